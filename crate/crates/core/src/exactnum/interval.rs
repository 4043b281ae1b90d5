use serde::{Deserialize, Serialize};

use super::Dyadic;

/// A closed interval [lo, hi] with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Interval {
    /// Panics if lo > hi.
    pub fn new(lo: Dyadic, hi: Dyadic) -> Interval {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: Dyadic) -> Interval {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn unit() -> Interval {
        Interval::new(Dyadic::zero(), Dyadic::one())
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Dyadic {
        (&self.lo + &self.hi) * Dyadic::pow2_neg(1)
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Containment test against a decimal reference value.
    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo.to_f64() <= x && x <= self.hi.to_f64()
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    /// Product of two intervals with nonnegative endpoints.
    pub fn mul_nonneg(&self, other: &Interval) -> Interval {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Interval::new(&self.lo * &other.lo, &self.hi * &other.hi)
    }

    /// Scaling by a nonnegative constant.
    pub fn scale(&self, c: &Dyadic) -> Interval {
        debug_assert!(!c.is_negative());
        Interval::new(&self.lo * c, &self.hi * c)
    }

    /// self − other.
    pub fn sub(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    /// Enclosure of |x| for x in self.
    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_negative() {
            Interval::new(Dyadic::zero(), self.lo.abs().max(self.hi.clone()))
        } else {
            Interval::new(self.hi.abs(), self.lo.abs())
        }
    }

    pub fn approx(&self) -> (f64, f64) {
        (self.lo.to_f64(), self.hi.to_f64())
    }
}
