//! Reduced words in the free group F2 = <a, b>.
//!
//! Words are written over the ASCII alphabet `a`, `b`, `A`, `B` where the
//! capital letters denote inverses. The empty string is the identity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// One of the four letters a, b, a⁻¹, b⁻¹.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    A,
    AInv,
    B,
    BInv,
}

/// Base letter of a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    A,
    B,
}

impl Generator {
    pub const ALL: [Generator; 4] = [Generator::A, Generator::B, Generator::AInv, Generator::BInv];

    pub fn base(self) -> Base {
        match self {
            Generator::A | Generator::AInv => Base::A,
            Generator::B | Generator::BInv => Base::B,
        }
    }

    /// +1 for a, b and -1 for their inverses.
    pub fn sign(self) -> i64 {
        match self {
            Generator::A | Generator::B => 1,
            Generator::AInv | Generator::BInv => -1,
        }
    }

    pub fn inverse(self) -> Generator {
        match self {
            Generator::A => Generator::AInv,
            Generator::AInv => Generator::A,
            Generator::B => Generator::BInv,
            Generator::BInv => Generator::B,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Generator::A => 'a',
            Generator::AInv => 'A',
            Generator::B => 'b',
            Generator::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Generator> {
        match c {
            'a' => Some(Generator::A),
            'A' => Some(Generator::AInv),
            'b' => Some(Generator::B),
            'B' => Some(Generator::BInv),
            _ => None,
        }
    }
}

/// A freely reduced word. The reduction invariant is maintained by every
/// constructor, so two words are equal in F2 iff they are equal as values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Generator>,
}

impl Word {
    pub fn identity() -> Word {
        Word {
            letters: Vec::new(),
        }
    }

    pub fn generator(g: Generator) -> Word {
        Word { letters: vec![g] }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Generator>>(letters: I) -> Word {
        let mut out: Vec<Generator> = Vec::new();
        for g in letters {
            push_reduced(&mut out, g);
        }
        Word { letters: out }
    }

    /// `a^p b^q`.
    pub fn a_pow_b_pow(p: i64, q: i64) -> Word {
        let mut letters = Vec::with_capacity((p.unsigned_abs() + q.unsigned_abs()) as usize);
        let ga = if p >= 0 {
            Generator::A
        } else {
            Generator::AInv
        };
        let gb = if q >= 0 {
            Generator::B
        } else {
            Generator::BInv
        };
        letters.extend(std::iter::repeat_n(ga, p.unsigned_abs() as usize));
        letters.extend(std::iter::repeat_n(gb, q.unsigned_abs() as usize));
        Word { letters }
    }

    /// The commutator `[a, b] = a b a⁻¹ b⁻¹`.
    pub fn base_commutator() -> Word {
        Word {
            letters: vec![Generator::A, Generator::B, Generator::AInv, Generator::BInv],
        }
    }

    pub fn letters(&self) -> &[Generator] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut out = self.letters.clone();
        out.reserve(other.letters.len());
        for &g in &other.letters {
            push_reduced(&mut out, g);
        }
        Word { letters: out }
    }

    pub fn invert(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|g| g.inverse()).collect(),
        }
    }

    /// `g · self · g⁻¹`.
    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.multiply(self).multiply(&g.invert())
    }

    pub fn pow(&self, e: i64) -> Word {
        let base = if e >= 0 { self.clone() } else { self.invert() };
        let mut out = Word::identity();
        for _ in 0..e.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// Exponent sums of `a` and `b`: the image in F2/F2' = Z².
    pub fn abelianize(&self) -> (i64, i64) {
        self.letters
            .iter()
            .fold((0, 0), |(p, q), g| match g.base() {
                Base::A => (p + g.sign(), q),
                Base::B => (p, q + g.sign()),
            })
    }

    /// Membership in the commutator subgroup F2'.
    pub fn in_commutator(&self) -> bool {
        self.abelianize() == (0, 0)
    }
}

fn push_reduced(out: &mut Vec<Generator>, g: Generator) {
    if out.last() == Some(&g.inverse()) {
        out.pop();
    } else {
        out.push(g);
    }
}

pub fn reduce<I: IntoIterator<Item = Generator>>(letters: I) -> Word {
    Word::reduce(letters)
}

pub fn multiply(u: &Word, v: &Word) -> Word {
    u.multiply(v)
}

pub fn invert(w: &Word) -> Word {
    w.invert()
}

/// `g · w · g⁻¹`.
pub fn conjugate(g: &Word, w: &Word) -> Word {
    w.conjugate_by(g)
}

pub fn commutator(u: &Word, v: &Word) -> Word {
    u.multiply(v).multiply(&u.invert()).multiply(&v.invert())
}

pub fn abelianize(w: &Word) -> (i64, i64) {
    w.abelianize()
}

/// All reduced words of length exactly `len`, in lexicographic letter order.
pub fn words_of_length(len: usize) -> Vec<Word> {
    let mut layer = vec![Word::identity()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(layer.len() * 3);
        for w in &layer {
            for g in Generator::ALL {
                if w.letters.last() == Some(&g.inverse()) {
                    continue;
                }
                let mut letters = w.letters.clone();
                letters.push(g);
                next.push(Word { letters });
            }
        }
        layer = next;
    }
    layer
}

/// All reduced words of length at most `max_len`, shortest first.
pub fn words_up_to(max_len: usize) -> Vec<Word> {
    (0..=max_len).flat_map(words_of_length).collect()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.letters {
            write!(f, "{}", g.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses and freely reduces. `"e"` is accepted as the identity.
    fn from_str(s: &str) -> Result<Word, Error> {
        let s = s.trim();
        if s == "e" {
            return Ok(Word::identity());
        }
        let letters = s
            .chars()
            .map(|c| Generator::from_char(c).ok_or_else(|| Error::InvalidWord(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Word::reduce(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Word, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        use Generator::*;
        assert_eq!(reduce([A, AInv]), Word::identity());
        assert_eq!(reduce([A, B, BInv, A]), w("aa"));
        let c = reduce([A, B, AInv, BInv]);
        assert_eq!(c.len(), 4);
        assert_eq!(c.to_string(), "abAB");
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(multiply(&w("a"), &w("A")), Word::identity());
        assert_eq!(multiply(&w("ab"), &w("Ba")), w("aa"));
        assert_eq!(multiply(&Word::identity(), &w("abA")), w("abA"));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert(&w("ab")).to_string(), "BA");
        assert_eq!(invert(&Word::identity()), Word::identity());
        assert_eq!(invert(&w("abA")).to_string(), "aBA");
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate(&w("a"), &w("b")).to_string(), "abA");
        assert_eq!(conjugate(&w("abba"), &Word::identity()), Word::identity());
        assert_eq!(
            conjugate(&w("a"), &Word::base_commutator()).to_string(),
            "aabABA"
        );
    }

    #[test]
    fn abelianize_examples() {
        assert_eq!(abelianize(&Word::base_commutator()), (0, 0));
        assert_eq!(abelianize(&w("aaB")), (2, -1));
        assert_eq!(abelianize(&Word::identity()), (0, 0));
    }

    #[test]
    fn parse_rejects_foreign_letters() {
        assert!("abc".parse::<Word>().is_err());
        assert_eq!("".parse::<Word>().unwrap(), Word::identity());
        assert_eq!("aAbB".parse::<Word>().unwrap(), Word::identity());
    }

    #[test]
    fn enumeration_counts() {
        // 1 + 4·(3^n - 1)/2
        assert_eq!(words_up_to(8).len(), 1 + 2 * (3usize.pow(8) - 1));
        assert!(words_of_length(5).iter().all(|w| w.len() == 5));
    }

    fn raw_letters(max: usize) -> impl Strategy<Value = Vec<Generator>> {
        prop::collection::vec(prop::sample::select(Generator::ALL.to_vec()), 0..=max)
    }

    fn word(max: usize) -> impl Strategy<Value = Word> {
        raw_letters(max).prop_map(Word::reduce)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn group_laws(u in word(32), v in word(32), x in word(32)) {
            prop_assert_eq!(u.multiply(&v).multiply(&x), u.multiply(&v.multiply(&x)));
            prop_assert_eq!(u.multiply(&u.invert()), Word::identity());
            prop_assert_eq!(u.invert().multiply(&u), Word::identity());
            prop_assert_eq!(u.multiply(&Word::identity()), u.clone());
            prop_assert!(u.multiply(&v).len() <= u.len() + v.len());
            let (p1, q1) = u.abelianize();
            let (p2, q2) = v.abelianize();
            prop_assert_eq!(u.multiply(&v).abelianize(), (p1 + p2, q1 + q2));
        }

        #[test]
        fn reduce_is_idempotent(raw in raw_letters(40)) {
            let once = Word::reduce(raw.clone());
            let twice = Word::reduce(once.letters().iter().copied());
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.letters().windows(2).all(|p| p[0] != p[1].inverse()));
            // raw and reduced agree in the abelianization
            let raw_ab = raw.iter().fold((0, 0), |(p, q), g| match g.base() {
                Base::A => (p + g.sign(), q),
                Base::B => (p, q + g.sign()),
            });
            prop_assert_eq!(once.abelianize(), raw_ab);
        }

        #[test]
        fn string_round_trip(u in word(24)) {
            prop_assert_eq!(u.to_string().parse::<Word>().unwrap(), u);
        }
    }
}
