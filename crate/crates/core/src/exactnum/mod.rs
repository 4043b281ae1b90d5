//! Exact dyadic arithmetic and certified enclosures of infinite products.

mod dyadic;
mod interval;
mod product;

pub use dyadic::Dyadic;
pub use interval::Interval;
pub use product::{
    certified_product, certified_product_fn, FactorSource, ProductOutcome, DEFAULT_FACTOR_CAP,
};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::cohenlyndon::Depth;

/// A probability known exactly or enclosed by a certified interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbabilityValue {
    Exact(Dyadic),
    Enclosure {
        interval: Interval,
        /// False when the factor cap stopped refinement before the
        /// requested width was reached.
        width_reached: bool,
    },
}

impl ProbabilityValue {
    pub fn zero() -> ProbabilityValue {
        ProbabilityValue::Exact(Dyadic::zero())
    }

    pub fn one() -> ProbabilityValue {
        ProbabilityValue::Exact(Dyadic::one())
    }

    pub fn from_interval(interval: Interval, width_reached: bool) -> ProbabilityValue {
        if interval.lo == interval.hi {
            ProbabilityValue::Exact(interval.lo)
        } else {
            ProbabilityValue::Enclosure {
                interval,
                width_reached,
            }
        }
    }

    pub fn exact(&self) -> Option<&Dyadic> {
        match self {
            ProbabilityValue::Exact(d) => Some(d),
            ProbabilityValue::Enclosure { .. } => None,
        }
    }

    pub fn interval(&self) -> Interval {
        match self {
            ProbabilityValue::Exact(d) => Interval::point(d.clone()),
            ProbabilityValue::Enclosure { interval, .. } => interval.clone(),
        }
    }

    pub fn lo(&self) -> Dyadic {
        self.interval().lo
    }

    pub fn hi(&self) -> Dyadic {
        self.interval().hi
    }

    pub fn width(&self) -> Dyadic {
        self.interval().width()
    }

    pub fn width_reached(&self) -> bool {
        match self {
            ProbabilityValue::Exact(_) => true,
            ProbabilityValue::Enclosure { width_reached, .. } => *width_reached,
        }
    }

    /// Midpoint as f64 (the exact value for `Exact`).
    pub fn approx(&self) -> f64 {
        self.interval().midpoint().to_f64()
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.interval().contains_f64(x)
    }

    pub fn scale(&self, c: &Dyadic) -> ProbabilityValue {
        self.map(|i| i.scale(c))
    }

    pub fn add(&self, other: &ProbabilityValue) -> ProbabilityValue {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn mul(&self, other: &ProbabilityValue) -> ProbabilityValue {
        self.zip(other, |a, b| a.mul_nonneg(b))
    }

    fn map(&self, f: impl Fn(&Interval) -> Interval) -> ProbabilityValue {
        ProbabilityValue::from_interval(f(&self.interval()), self.width_reached())
    }

    fn zip(
        &self,
        other: &ProbabilityValue,
        f: impl Fn(&Interval, &Interval) -> Interval,
    ) -> ProbabilityValue {
        ProbabilityValue::from_interval(
            f(&self.interval(), &other.interval()),
            self.width_reached() && other.width_reached(),
        )
    }
}

impl Serialize for ProbabilityValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ProbabilityValue::Exact(d) => {
                let mut m = serializer.serialize_map(Some(1))?;
                m.serialize_entry("exact", d)?;
                m.end()
            }
            ProbabilityValue::Enclosure {
                interval,
                width_reached,
            } => {
                let mut m = serializer.serialize_map(Some(3))?;
                m.serialize_entry("lo", &interval.lo)?;
                m.serialize_entry("hi", &interval.hi)?;
                m.serialize_entry("width_reached", width_reached)?;
                m.end()
            }
        }
    }
}

/// 1 − 2^-k, with 1 for k = ∞.
pub fn one_minus_pow2(k: Depth) -> Dyadic {
    match k {
        Depth::Infinite => Dyadic::one(),
        Depth::Finite(k) => Dyadic::one() - Dyadic::pow2_neg(k),
    }
}
