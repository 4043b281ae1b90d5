use super::{Dyadic, Interval, ProbabilityValue};

pub const DEFAULT_FACTOR_CAP: u64 = 1_000_000;

/// A lazily evaluated sequence of factors x_1, x_2, … in [0, 1].
pub trait FactorSource {
    /// The factor x_i, i ≥ 1.
    fn factor(&mut self, i: u64) -> Dyadic;

    /// A proven upper bound on Σ_{i > last} (1 − x_i).
    fn tail_bound(&mut self, last: u64) -> Dyadic;

    /// `Some(n)` when every factor beyond n is exactly 1.
    fn finite_len(&self) -> Option<u64> {
        None
    }
}

struct FnFactors<F, T> {
    factor: F,
    tail: T,
}

impl<F, T> FactorSource for FnFactors<F, T>
where
    F: FnMut(u64) -> Dyadic,
    T: FnMut(u64) -> Dyadic,
{
    fn factor(&mut self, i: u64) -> Dyadic {
        (self.factor)(i)
    }
    fn tail_bound(&mut self, last: u64) -> Dyadic {
        (self.tail)(last)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductOutcome {
    pub value: ProbabilityValue,
    /// Number of factors multiplied in.
    pub factors_used: u64,
}

/// Encloses ∏ x_i using ∏_{i>I}(1 − y_i) ≥ 1 − Σ_{i>I} y_i.
///
/// After I factors the enclosure is [P_I·(1 − ε_I), P_I] with
/// ε_I = min(tail_bound(I), 1). Partial products are kept exact until their
/// denominators pass a precision tied to `target_width`, then rounded
/// outward. Returns as soon as the width is at most `target_width`, or after
/// `cap` factors with `width_reached = false`.
pub fn certified_product<S: FactorSource>(
    source: &mut S,
    target_width: &Dyadic,
    cap: u64,
) -> ProductOutcome {
    let precision = 128u64.max(target_width.exponent() + 64);
    let one = Dyadic::one();
    let mut lo = one.clone();
    let mut hi = one.clone();
    let mut best = Interval::unit();
    let limit = source.finite_len().map_or(cap, |n| n.min(cap));

    for i in 1..=limit {
        let x = source.factor(i);
        debug_assert!(
            !x.is_negative() && x <= one,
            "factor {i} = {x} outside [0,1]"
        );
        if x.is_zero() {
            return ProductOutcome {
                value: ProbabilityValue::zero(),
                factors_used: i,
            };
        }
        if !x.is_one() {
            lo = (&lo * &x).floor_to(precision);
            hi = (&hi * &x).ceil_to(precision);
        }
        if source.finite_len() == Some(i) {
            return ProductOutcome {
                value: ProbabilityValue::from_interval(Interval::new(lo, hi), true),
                factors_used: i,
            };
        }
        let eps = source.tail_bound(i).min(one.clone());
        let cand_lo = if eps.is_one() {
            Dyadic::zero()
        } else {
            (&lo * &(&one - &eps)).floor_to(precision)
        };
        if cand_lo > best.lo {
            best.lo = cand_lo;
        }
        if hi < best.hi {
            best.hi = hi.clone();
        }
        if best.width() <= *target_width {
            return ProductOutcome {
                value: ProbabilityValue::from_interval(best, true),
                factors_used: i,
            };
        }
    }

    if source.finite_len().is_some_and(|n| n == 0) {
        return ProductOutcome {
            value: ProbabilityValue::one(),
            factors_used: 0,
        };
    }
    ProductOutcome {
        value: ProbabilityValue::from_interval(best, false),
        factors_used: limit,
    }
}

/// Closure form of [`certified_product`] with the default factor cap.
pub fn certified_product_fn(
    factor: impl FnMut(u64) -> Dyadic,
    tail_bound: impl FnMut(u64) -> Dyadic,
    target_width: &Dyadic,
) -> ProductOutcome {
    certified_product(
        &mut FnFactors {
            factor,
            tail: tail_bound,
        },
        target_width,
        DEFAULT_FACTOR_CAP,
    )
}
