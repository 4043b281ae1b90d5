//! The transversal {aᵖbᑫ} of F2' in F2, indexed by a square spiral on Z².
//!
//! Ring ℓ = max(|p|, |q|) holds 8ℓ points with indices B(ℓ) .. B(ℓ)+8ℓ-1
//! where B(ℓ) = (2ℓ-1)² + 1. Inside a ring the walk starts at (ℓ, 0), goes up
//! the right edge to the corner (ℓ, ℓ), then counter-clockwise around the
//! square and back up to (ℓ, -1). Negation maps every ring onto itself.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::freegroup::Word;

/// A coset a^p b^q F2' of F2/F2' ≅ Z².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GridPoint {
    pub p: i64,
    pub q: i64,
}

impl GridPoint {
    pub const ORIGIN: GridPoint = GridPoint { p: 0, q: 0 };

    pub fn new(p: i64, q: i64) -> GridPoint {
        GridPoint { p, q }
    }

    /// Chebyshev norm max(|p|, |q|).
    pub fn ring(self) -> u64 {
        self.p.unsigned_abs().max(self.q.unsigned_abs())
    }
}

impl Add for GridPoint {
    type Output = GridPoint;
    fn add(self, o: GridPoint) -> GridPoint {
        GridPoint::new(self.p + o.p, self.q + o.q)
    }
}

impl Sub for GridPoint {
    type Output = GridPoint;
    fn sub(self, o: GridPoint) -> GridPoint {
        GridPoint::new(self.p - o.p, self.q - o.q)
    }
}

impl Neg for GridPoint {
    type Output = GridPoint;
    fn neg(self) -> GridPoint {
        GridPoint::new(-self.p, -self.q)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.p, self.q)
    }
}

impl FromStr for GridPoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<GridPoint, Error> {
        let bad = || Error::InvalidGridPoint(s.to_string());
        let (p, q) = s.split_once(',').ok_or_else(bad)?;
        Ok(GridPoint::new(
            p.trim().parse().map_err(|_| bad())?,
            q.trim().parse().map_err(|_| bad())?,
        ))
    }
}

impl Serialize for GridPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GridPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<GridPoint, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Position i ≥ 1 of a transversal element in the spiral enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TransversalIndex(u64);

impl TransversalIndex {
    pub const FIRST: TransversalIndex = TransversalIndex(1);

    pub fn new(i: u64) -> Result<TransversalIndex, Error> {
        if i == 0 {
            Err(Error::InvalidIndex(i))
        } else {
            Ok(TransversalIndex(i))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn next(self) -> TransversalIndex {
        TransversalIndex(self.0 + 1)
    }
}

impl fmt::Display for TransversalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// First index of ring ℓ: 1 for ℓ = 0, (2ℓ-1)² + 1 otherwise.
pub fn ring_start(ring: u64) -> u64 {
    if ring == 0 {
        1
    } else {
        (2 * ring - 1).pow(2) + 1
    }
}

/// Number of points in ring ℓ.
pub fn ring_size(ring: u64) -> u64 {
    if ring == 0 {
        1
    } else {
        8 * ring
    }
}

/// Every point of ring ℓ has index at least this value.
pub fn index_lower_bound(ring: u64) -> u64 {
    ring_start(ring)
}

/// Last index of ring ℓ, (2ℓ+1)².
pub fn ring_end(ring: u64) -> u64 {
    (2 * ring + 1).pow(2)
}

pub fn idx(x: GridPoint) -> TransversalIndex {
    let l = x.ring() as i64;
    if l == 0 {
        return TransversalIndex(1);
    }
    let GridPoint { p, q } = x;
    let offset = if p == l && q >= 0 {
        q
    } else if q == l {
        l + (l - p)
    } else if p == -l {
        3 * l + (l - q)
    } else if q == -l {
        5 * l + (p + l)
    } else {
        7 * l + (q + l)
    };
    TransversalIndex(ring_start(l as u64) + offset as u64)
}

pub fn point(i: TransversalIndex) -> GridPoint {
    let i = i.0;
    if i == 1 {
        return GridPoint::ORIGIN;
    }
    let s = (i - 1).isqrt();
    let l = s.div_ceil(2);
    let offset = (i - ring_start(l)) as i64;
    let l = l as i64;
    match offset {
        o if o <= l => GridPoint::new(l, o),
        o if o <= 3 * l => GridPoint::new(l - (o - l), l),
        o if o <= 5 * l => GridPoint::new(-l, l - (o - 3 * l)),
        o if o <= 7 * l => GridPoint::new((o - 5 * l) - l, -l),
        o => GridPoint::new(l, (o - 7 * l) - l),
    }
}

/// Checked variant of [`point`] for raw indices.
pub fn point_of(i: u64) -> Result<GridPoint, Error> {
    TransversalIndex::new(i).map(point)
}

/// The transversal representative aᵖbᑫ.
pub fn transversal_word(x: GridPoint) -> Word {
    Word::a_pow_b_pow(x.p, x.q)
}

/// Projection F2 → F2/F2'.
pub fn coset(w: &Word) -> GridPoint {
    let (p, q) = w.abelianize();
    GridPoint::new(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(p: i64, q: i64) -> GridPoint {
        GridPoint::new(p, q)
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(idx(gp(0, 0)).get(), 1);
        assert_eq!(idx(gp(1, 0)).get(), 2);
        assert_eq!(idx(gp(1, 1)).get(), 3);
        assert_eq!(idx(gp(0, 1)).get(), 4);
        assert_eq!(idx(gp(-1, 0)).get(), 6);
        assert_eq!(idx(gp(0, -1)).get(), 8);

        assert_eq!(point(TransversalIndex(1)), gp(0, 0));
        assert_eq!(point(TransversalIndex(5)), gp(-1, 1));
        assert_eq!(point(TransversalIndex(10)), gp(2, 0));
        assert_eq!(point_of(0), Err(Error::InvalidIndex(0)));
    }

    #[test]
    fn ring_one_walk() {
        let walk: Vec<_> = (2..=9).map(|i| point(TransversalIndex(i))).collect();
        assert_eq!(
            walk,
            vec![
                gp(1, 0),
                gp(1, 1),
                gp(0, 1),
                gp(-1, 1),
                gp(-1, 0),
                gp(-1, -1),
                gp(0, -1),
                gp(1, -1)
            ]
        );
    }

    #[test]
    fn bijection_up_to_ring_20() {
        for p in -20..=20 {
            for q in -20..=20 {
                let x = gp(p, q);
                let i = idx(x);
                assert_eq!(point(i), x);
                let l = x.ring();
                assert!(i.get() >= ring_start(l) && i.get() <= ring_end(l));
                assert!(i.get() >= index_lower_bound(l));
            }
        }
        for i in 1..=ring_end(20) {
            let i = TransversalIndex(i);
            assert_eq!(idx(point(i)), i);
        }
    }

    #[test]
    fn rings_partition_naturals() {
        let mut next = 1;
        for l in 0..=100 {
            assert_eq!(ring_start(l), next);
            if l > 0 {
                assert_eq!(ring_start(l), (2 * l - 1).pow(2) + 1);
            }
            next += ring_size(l);
            assert_eq!(ring_end(l) + 1, next);
        }
    }

    #[test]
    fn negation_is_an_involution_within_rings() {
        for i in 1..=10_000u64 {
            let x = point(TransversalIndex(i));
            let j = idx(-x);
            assert_eq!(point(j).ring(), x.ring());
            assert_eq!(idx(-point(j)).get(), i);
        }
    }

    #[test]
    fn transversal_words() {
        assert_eq!(transversal_word(gp(0, 0)), Word::identity());
        assert_eq!(transversal_word(gp(2, -1)).to_string(), "aaB");
        assert_eq!(transversal_word(gp(-1, 1)).to_string(), "Ab");
        for p in -3..=3 {
            for q in -3..=3 {
                assert_eq!(coset(&transversal_word(gp(p, q))), gp(p, q));
            }
        }
    }

    #[test]
    fn coset_examples() {
        let w = |s: &str| s.parse::<Word>().unwrap();
        assert_eq!(coset(&w("abAB")), gp(0, 0));
        assert_eq!(coset(&w("aaB")), gp(2, -1));
        assert_eq!(coset(&w("")), gp(0, 0));
    }

    #[test]
    fn gridpoint_string_form() {
        assert_eq!("3,-2".parse::<GridPoint>().unwrap(), gp(3, -2));
        assert_eq!(gp(-1, 4).to_string(), "-1,4");
        assert!("3".parse::<GridPoint>().is_err());
    }
}
