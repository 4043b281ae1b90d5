//! The free basis y_i = t_i [a,b] t_i⁻¹ of F = F2' and the chain Γ_k.
//!
//! Every element of F2' has a unique reduced spelling in the y_i. Rewriting
//! goes through the Schreier generators of the transversal {aᵖbᑫ},
//!
//! ```text
//! z(p,q) = aᵖ bᑫ a b⁻ᑫ a⁻ᵖ⁻¹        (q ≠ 0)
//! ```
//!
//! followed by the change of basis z(p,q) = x(p,q) · z(p,q+1), z(p,0) = e,
//! where x(p,q) = aᵖbᑫ [a,b] b⁻ᑫa⁻ᵖ = y_idx(p,q). Unrolling gives
//!
//! ```text
//! z(p,q) = (x(p,0) x(p,1) ⋯ x(p,q-1))⁻¹   q ≥ 1
//! z(p,q) =  x(p,q) x(p,q+1) ⋯ x(p,-1)     q ≤ -1
//! ```
//!
//! The retraction φ_k deletes the generators y_i with i ≥ k, so Γ_k = ker φ_k
//! and the depth of w is the largest k with φ_k(w) = e.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::freegroup::{Generator, Word};
use crate::grid::{self, GridPoint, TransversalIndex};

/// A reduced word in the free basis {y_i}: adjacent syllables have distinct
/// indices and every exponent is nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct YWord {
    syllables: Vec<(TransversalIndex, i64)>,
}

impl YWord {
    pub fn empty() -> YWord {
        YWord::default()
    }

    /// The basis element y_i.
    pub fn basis(i: TransversalIndex) -> YWord {
        YWord {
            syllables: vec![(i, 1)],
        }
    }

    /// Builds the normal form of an arbitrary syllable sequence.
    pub fn normalize<I: IntoIterator<Item = (TransversalIndex, i64)>>(syllables: I) -> YWord {
        let mut out = YWord::empty();
        for (i, e) in syllables {
            out.push(i, e);
        }
        out
    }

    pub fn syllables(&self) -> &[(TransversalIndex, i64)] {
        &self.syllables
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Appends y_i^e, merging with or cancelling against the last syllable.
    pub fn push(&mut self, i: TransversalIndex, e: i64) {
        if e == 0 {
            return;
        }
        match self.syllables.last_mut() {
            Some((j, f)) if *j == i => {
                *f += e;
                if *f == 0 {
                    self.syllables.pop();
                }
            }
            _ => self.syllables.push((i, e)),
        }
    }

    pub fn concat(&self, other: &YWord) -> YWord {
        let mut out = self.clone();
        for &(i, e) in &other.syllables {
            out.push(i, e);
        }
        out
    }

    pub fn inverse(&self) -> YWord {
        YWord {
            syllables: self.syllables.iter().rev().map(|&(i, e)| (i, -e)).collect(),
        }
    }

    pub fn max_index(&self) -> Option<TransversalIndex> {
        self.syllables.iter().map(|&(i, _)| i).max()
    }

    /// Grid positions of the basis elements that occur.
    pub fn support(&self) -> Vec<GridPoint> {
        let mut pts: Vec<GridPoint> = self
            .syllables
            .iter()
            .map(|&(i, _)| grid::point(i))
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }

    /// Largest ring among the support positions; 0 for the empty word.
    pub fn support_radius(&self) -> u64 {
        self.syllables
            .iter()
            .map(|&(i, _)| grid::point(i).ring())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for YWord {
    /// `y3^2 y1^-1`; exponent 1 is omitted and the empty word prints as `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return f.write_str("e");
        }
        for (n, (i, e)) in self.syllables.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            if *e == 1 {
                write!(f, "y{i}")?;
            } else {
                write!(f, "y{i}^{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for YWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<YWord, Error> {
        let bad = || Error::InvalidYWord(s.to_string());
        let t = s.trim();
        if t.is_empty() || t == "e" {
            return Ok(YWord::empty());
        }
        let mut out = YWord::empty();
        for tok in t.split_whitespace() {
            let body = tok.strip_prefix('y').ok_or_else(bad)?;
            let (i, e) = match body.split_once('^') {
                Some((i, e)) => (i, e.parse::<i64>().map_err(|_| bad())?),
                None => (body, 1),
            };
            let i = i.parse::<u64>().map_err(|_| bad())?;
            if e == 0 {
                return Err(bad());
            }
            out.push(TransversalIndex::new(i).map_err(|_| bad())?, e);
        }
        Ok(out)
    }
}

impl Serialize for YWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<YWord, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// The conjugate t [a,b]^e t⁻¹ for the transversal element at `x`.
fn basis_power_word(x: GridPoint, e: i64) -> Word {
    Word::base_commutator()
        .pow(e)
        .conjugate_by(&grid::transversal_word(x))
}

/// Substitutes y_i ↦ t_i [a,b] t_i⁻¹ and reduces.
pub fn expand(v: &YWord) -> Word {
    let mut letters: Vec<Generator> = Vec::new();
    for &(i, e) in &v.syllables {
        letters.extend_from_slice(basis_power_word(grid::point(i), e).letters());
    }
    Word::reduce(letters)
}

/// The Schreier generator z(p,q) as a word (identity when q = 0).
pub fn schreier_generator(x: GridPoint) -> Word {
    if x.q == 0 {
        return Word::identity();
    }
    grid::transversal_word(x)
        .multiply(&Word::generator(Generator::A))
        .multiply(&grid::transversal_word(GridPoint::new(x.p + 1, x.q)).invert())
}

/// The Cohen–Lyndon basis element x(p,q) = y_idx(p,q) as a word.
pub fn basis_word(x: GridPoint) -> Word {
    basis_power_word(x, 1)
}

/// Appends z(p,q)^sign to `out` in the y basis.
fn push_schreier(out: &mut YWord, x: GridPoint, sign: i64) {
    let GridPoint { p, q } = x;
    match q.cmp(&0) {
        Ordering::Equal => {}
        Ordering::Greater => {
            // z = x(p,q-1)⁻¹ ⋯ x(p,0)⁻¹
            if sign > 0 {
                for r in (0..q).rev() {
                    out.push(grid::idx(GridPoint::new(p, r)), -1);
                }
            } else {
                for r in 0..q {
                    out.push(grid::idx(GridPoint::new(p, r)), 1);
                }
            }
        }
        Ordering::Less => {
            // z = x(p,q) x(p,q+1) ⋯ x(p,-1)
            if sign > 0 {
                for r in q..0 {
                    out.push(grid::idx(GridPoint::new(p, r)), 1);
                }
            } else {
                for r in (q..0).rev() {
                    out.push(grid::idx(GridPoint::new(p, r)), -1);
                }
            }
        }
    }
}

/// Spells `w ∈ F2'` in the y basis; `expand(rewrite_to_y(w)) == w`.
pub fn rewrite_to_y(w: &Word) -> Result<YWord, Error> {
    let ab = w.abelianize();
    if ab != (0, 0) {
        return Err(Error::NotInCommutator(w.to_string(), ab));
    }
    let mut out = YWord::empty();
    let mut at = GridPoint::ORIGIN;
    for &g in w.letters() {
        match g {
            Generator::A => {
                push_schreier(&mut out, at, 1);
                at.p += 1;
            }
            Generator::AInv => {
                at.p -= 1;
                push_schreier(&mut out, at, -1);
            }
            Generator::B => at.q += 1,
            Generator::BInv => at.q -= 1,
        }
    }
    Ok(out)
}

/// The retraction φ_k: drops every y_i with i ≥ k.
pub fn phi_k(v: &YWord, k: u64) -> YWord {
    YWord::normalize(v.syllables.iter().copied().filter(|(i, _)| i.get() < k))
}

/// Position of an element in the chain F = Γ_1 ⊋ Γ_2 ⊋ ⋯ ⊋ {e}.
///
/// `Finite(0)` is used for elements outside F (contained in no Γ_k).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Depth {
    Finite(u64),
    Infinite,
}

impl Depth {
    pub fn finite(self) -> Option<u64> {
        match self {
            Depth::Finite(k) => Some(k),
            Depth::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Depth::Infinite)
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(k) => write!(f, "{k}"),
            Depth::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Depth {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Depth::Finite(k) => serializer.serialize_u64(*k),
            Depth::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Depth of a y-word: largest k with φ_k(v) = e.
pub fn depth_of(v: &YWord) -> Depth {
    let Some(max) = v.max_index() else {
        return Depth::Infinite;
    };
    // φ_1(v) = e and φ_{max+1}(v) = v ≠ e; the kernel condition is
    // downward closed in k.
    let (mut lo, mut hi) = (1u64, max.get() + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if phi_k(v, mid).is_empty() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Depth::Finite(lo)
}

/// Depth K(w) of `w ∈ F2'`; `Infinite` iff w = e.
pub fn depth(w: &Word) -> Result<Depth, Error> {
    Ok(depth_of(&rewrite_to_y(w)?))
}

/// Depth with words outside F2' mapped to `Finite(0)`.
pub fn event_depth(w: &Word) -> Depth {
    depth(w).unwrap_or(Depth::Finite(0))
}

/// w ∈ Γ_k.
pub fn in_gamma(w: &Word, k: u64) -> bool {
    match depth(w) {
        Ok(Depth::Infinite) => true,
        Ok(Depth::Finite(d)) => d >= k,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ti(i: u64) -> TransversalIndex {
        TransversalIndex::new(i).unwrap()
    }

    fn yw(s: &str) -> YWord {
        s.parse().unwrap()
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn expand_examples() {
        assert_eq!(expand(&yw("y1")).to_string(), "abAB");
        assert_eq!(expand(&yw("y2")).to_string(), "aabABA");
        assert_eq!(expand(&YWord::empty()), Word::identity());
    }

    #[test]
    fn rewrite_examples() {
        let c = Word::base_commutator();
        assert_eq!(rewrite_to_y(&c).unwrap(), yw("y1"));
        assert_eq!(rewrite_to_y(&c.conjugate_by(&w("a"))).unwrap(), yw("y2"));
        assert_eq!(rewrite_to_y(&c.pow(2)).unwrap(), yw("y1^2"));
        let v = c.conjugate_by(&w("ab")).multiply(&c);
        assert_eq!(grid::idx(GridPoint::new(1, 1)).get(), 3);
        assert_eq!(rewrite_to_y(&v).unwrap(), yw("y3 y1"));
    }

    #[test]
    fn rewrite_rejects_outside_commutator() {
        assert_eq!(
            rewrite_to_y(&w("a")),
            Err(Error::NotInCommutator("a".into(), (1, 0)))
        );
        assert!(depth(&w("abb")).is_err());
    }

    #[test]
    fn basis_change_identities_by_expansion() {
        // x(p,q) = z(p,q) z(p,q+1)⁻¹ with z(p,0) = e, checked on raw words.
        for p in -5..=5 {
            for q in -5..=5 {
                let x = GridPoint::new(p, q);
                let lhs = basis_word(x);
                let rhs = schreier_generator(x)
                    .multiply(&schreier_generator(GridPoint::new(p, q + 1)).invert());
                assert_eq!(lhs, rhs, "x({p},{q})");
                // and the unrolled forms used by the rewriter
                let mut v = YWord::empty();
                push_schreier(&mut v, x, 1);
                assert_eq!(expand(&v), schreier_generator(x), "z({p},{q})");
                let mut v = YWord::empty();
                push_schreier(&mut v, x, -1);
                assert_eq!(expand(&v), schreier_generator(x).invert(), "z({p},{q})⁻¹");
            }
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_k(&yw("y3 y1 y3^-1"), 2), yw("y1"));
        assert!(phi_k(&yw("y7^3 y2 y9"), 1).is_empty());
        assert!(phi_k(&yw("y3 y1 y3^-1 y1^-1"), 3).is_empty());
    }

    #[test]
    fn depth_examples() {
        assert_eq!(depth(&Word::identity()).unwrap(), Depth::Infinite);
        assert_eq!(depth(&Word::base_commutator()).unwrap(), Depth::Finite(1));
        assert_eq!(
            depth(&expand(&yw("y3 y1 y3^-1 y1^-1"))).unwrap(),
            Depth::Finite(3)
        );
        assert_eq!(event_depth(&w("a")), Depth::Finite(0));
    }

    #[test]
    fn in_gamma_examples() {
        let c = Word::base_commutator();
        assert!(in_gamma(&c, 1));
        assert!(!in_gamma(&c, 2));
        assert!(in_gamma(&Word::identity(), 1_000_000));
        assert!(!in_gamma(&w("a"), 1));
    }

    #[test]
    fn yword_text_form() {
        let v = yw("y3^2 y1^-1");
        assert_eq!(v.syllables(), &[(ti(3), 2), (ti(1), -1)]);
        assert_eq!(v.to_string(), "y3^2 y1^-1");
        assert_eq!(yw("y2 y2^-1"), YWord::empty());
        assert!("y0".parse::<YWord>().is_err());
        assert!("x3".parse::<YWord>().is_err());
    }

    fn yword() -> impl Strategy<Value = YWord> {
        prop::collection::vec((1u64..=50, prop_oneof![-3i64..=-1, 1i64..=3]), 0..=12)
            .prop_map(|s| YWord::normalize(s.into_iter().map(|(i, e)| (ti(i), e))))
    }

    fn commutator_word() -> impl Strategy<Value = Word> {
        prop::collection::vec(prop::sample::select(Generator::ALL.to_vec()), 0..=24)
            .prop_map(Word::reduce)
            .prop_filter("in F2'", |w| w.in_commutator())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2_000))]

        #[test]
        fn rewrite_round_trips(v in yword()) {
            let e = expand(&v);
            prop_assert!(e.in_commutator());
            let back = rewrite_to_y(&e).unwrap();
            prop_assert_eq!(&back, &v);
            prop_assert_eq!(expand(&back), e);
        }

        #[test]
        fn expand_after_rewrite(wd in commutator_word()) {
            prop_assert_eq!(expand(&rewrite_to_y(&wd).unwrap()), wd);
        }

        #[test]
        fn chain_is_descending(wd in commutator_word(), k in 1u64..40) {
            if in_gamma(&wd, k + 1) {
                prop_assert!(in_gamma(&wd, k));
            }
        }

        #[test]
        fn phi_is_a_retraction_and_homomorphism(u in yword(), v in yword(), k in 1u64..60) {
            let pu = phi_k(&u, k);
            prop_assert_eq!(phi_k(&pu, k), pu.clone());
            prop_assert_eq!(phi_k(&u.concat(&v), k), pu.concat(&phi_k(&v, k)));
        }

        #[test]
        fn depth_bounded_by_support(v in yword()) {
            match depth_of(&v) {
                Depth::Infinite => prop_assert!(v.is_empty()),
                Depth::Finite(k) => {
                    let max = v.max_index().unwrap().get();
                    prop_assert!(k >= 1 && k <= max);
                    prop_assert!(phi_k(&v, k).is_empty());
                    prop_assert!(!phi_k(&v, k + 1).is_empty());
                }
            }
        }

        #[test]
        fn conjugates_of_basis_elements_have_basis_depth(c in yword(), j in 1u64..60) {
            let cw = expand(&c);
            let conj = basis_word(grid::point(ti(j))).conjugate_by(&cw);
            prop_assert_eq!(depth(&conj).unwrap(), Depth::Finite(j));
        }
    }
}
