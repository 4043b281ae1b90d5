use std::collections::BTreeSet;

use serde::Serialize;

use crate::cohenlyndon::{event_depth, rewrite_to_y, Depth};
use crate::error::Error;
use crate::exactnum::{
    certified_product, Dyadic, FactorSource, ProbabilityValue, DEFAULT_FACTOR_CAP,
};
use crate::freegroup::Word;
use crate::grid::{self, TransversalIndex};

use super::MeasureDescriptor;

/// The cylinder {Δ : words ⊆ Δ}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EnvEvent {
    words: BTreeSet<Word>,
}

impl EnvEvent {
    pub fn new<I: IntoIterator<Item = Word>>(words: I) -> EnvEvent {
        EnvEvent {
            words: words.into_iter().collect(),
        }
    }

    pub fn single(w: Word) -> EnvEvent {
        EnvEvent::new([w])
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.words.iter()
    }

    /// Words other than the identity (e lies in every subgroup).
    pub fn nontrivial(&self) -> impl Iterator<Item = &Word> {
        self.words.iter().filter(|w| !w.is_identity())
    }

    pub fn is_sure(&self) -> bool {
        self.nontrivial().next().is_none()
    }

    /// The event whose probability under μ equals that of `self` under
    /// g_*μ: every word w becomes g⁻¹wg.
    pub fn pulled_back(&self, g: &Word) -> EnvEvent {
        let gi = g.invert();
        EnvEvent::new(self.words.iter().map(|w| w.conjugate_by(&gi)))
    }

    pub fn union(&self, other: &EnvEvent) -> EnvEvent {
        EnvEvent::new(self.words.iter().chain(other.words.iter()).cloned())
    }

    pub fn is_subset_of(&self, other: &EnvEvent) -> bool {
        self.words.is_subset(&other.words)
    }

    /// min over the words of their depth (0 if some word is outside F).
    pub fn min_depth(&self) -> Depth {
        self.nontrivial()
            .map(event_depth)
            .min()
            .unwrap_or(Depth::Infinite)
    }

    pub fn in_commutator(&self) -> bool {
        self.words.iter().all(Word::in_commutator)
    }

    /// Largest ring of the grid positions of the y-spelling of the words.
    /// Requires every word to lie in F2'.
    pub fn support_radius(&self) -> Result<u64, Error> {
        let mut r = 0;
        for w in self.nontrivial() {
            r = r.max(rewrite_to_y(w)?.support_radius());
        }
        Ok(r)
    }
}

/// Decay certificate for a coordinate law ν: if every word of an F2'-event
/// has depth ≥ D after the extra conjugations inside ν, and D ≥ threshold,
/// then 1 − ν(Env) ≤ coeff · 2^-D. `slack` widens the support radius to
/// account for pushforwards by elements outside F2'.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailCertificate {
    pub coeff: Dyadic,
    pub threshold: u64,
    pub slack: u64,
}

impl TailCertificate {
    pub fn of(desc: &MeasureDescriptor) -> Option<TailCertificate> {
        use MeasureDescriptor::*;
        let cert = |coeff: Dyadic, threshold: u64| TailCertificate {
            coeff,
            threshold,
            slack: 0,
        };
        match desc {
            GeomGamma => Some(cert(Dyadic::one(), 1)),
            ParamFamily { .. } => Some(cert(Dyadic::one(), 3)),
            DiracGamma { k } => Some(cert(Dyadic::zero(), *k)),
            DiracTrivial | CoinducedProduct { .. } => None,
            // conjugation by S ⊂ H ⊂ F preserves depth
            InducedFinite { inner, .. } => TailCertificate::of(inner),
            Pushforward { g, inner } => {
                let mut c = TailCertificate::of(inner)?;
                c.slack += grid::coset(g).ring();
                Some(c)
            }
            // 1 − CDFⁿ ≤ n(1 − CDF)
            IntersectPower { n, inner } => {
                let mut c = TailCertificate::of(inner)?;
                c.coeff = c.coeff * Dyadic::from_int(*n as i64);
                Some(c)
            }
            // (1 − CDF)ⁿ ≤ 1 − CDF
            GeneratePower { inner, .. } => TailCertificate::of(inner),
            Convex { terms } => {
                let mut out = cert(Dyadic::zero(), 1);
                for t in terms {
                    let c = TailCertificate::of(&t.inner)?;
                    out.coeff = out.coeff + &t.weight * &c.coeff;
                    out.threshold = out.threshold.max(c.threshold);
                    out.slack = out.slack.max(c.slack);
                }
                Some(out)
            }
        }
    }
}

/// Upper bound on Σ (1 − factor_i) over all transversal indices in rings
/// ≥ `first_ring`, for an event of support radius `radius`.
///
/// A conjugate t⁻¹wt has depth at least the least spiral index of the
/// support shifted by −coset(t), which is ≥ (2(ℓ − R) − 1)² + 1 on ring
/// ℓ > R. Consecutive ring terms 8ℓ·2^-D_ℓ shrink by a factor ≤ 2·2⁻⁸, so
/// the series is at most twice its first term.
pub fn ring_tail_bound(first_ring: u64, radius: u64, cert: Option<&TailCertificate>) -> Dyadic {
    let Some(cert) = cert else {
        return Dyadic::one();
    };
    let radius = radius + cert.slack;
    if first_ring <= radius {
        return Dyadic::one();
    }
    let depth = grid::index_lower_bound(first_ring - radius);
    if depth < cert.threshold {
        return Dyadic::one();
    }
    let bound = &cert.coeff * &Dyadic::new(16 * first_ring, depth);
    bound.min(Dyadic::one())
}

/// Evaluation settings for envelope probabilities.
#[derive(Clone, Debug)]
pub struct Evaluator {
    pub factor_cap: u64,
}

impl Default for Evaluator {
    fn default() -> Evaluator {
        Evaluator {
            factor_cap: DEFAULT_FACTOR_CAP,
        }
    }
}

impl Evaluator {
    pub fn with_factor_cap(factor_cap: u64) -> Evaluator {
        Evaluator { factor_cap }
    }

    /// μ(Env E), exactly when possible, otherwise as a certified enclosure
    /// of width ≤ `target_width` (unless the factor cap binds).
    pub fn env_prob(
        &self,
        measure: &MeasureDescriptor,
        event: &EnvEvent,
        target_width: &Dyadic,
    ) -> Result<ProbabilityValue, Error> {
        measure.validate()?;
        self.eval(measure, event, target_width)
    }

    fn eval(
        &self,
        measure: &MeasureDescriptor,
        event: &EnvEvent,
        width: &Dyadic,
    ) -> Result<ProbabilityValue, Error> {
        use MeasureDescriptor::*;
        if event.is_sure() {
            return Ok(ProbabilityValue::one());
        }
        match measure {
            Pushforward { g, inner } => self.eval(inner, &event.pulled_back(g), width),
            Convex { terms } => {
                let mut acc = ProbabilityValue::zero();
                for t in terms {
                    acc = acc.add(&self.eval(&t.inner, event, width)?.scale(&t.weight));
                }
                Ok(acc)
            }
            InducedFinite { transversal, inner } => {
                let mut acc = ProbabilityValue::zero();
                for s in transversal {
                    acc = acc.add(&self.eval(inner, &event.pulled_back(s), width)?);
                }
                let m = transversal.len() as u64;
                Ok(acc.scale(&Dyadic::pow2_neg(m.trailing_zeros() as u64)))
            }
            CoinducedProduct { inner } => self.coinduced(inner, event, width),
            _ => {
                let p = measure
                    .chain_cdf(event.min_depth())
                    .ok_or_else(|| Error::Unsupported(format!("no envelope law for {measure}")))?;
                Ok(ProbabilityValue::Exact(p))
            }
        }
    }

    fn coinduced(
        &self,
        inner: &MeasureDescriptor,
        event: &EnvEvent,
        width: &Dyadic,
    ) -> Result<ProbabilityValue, Error> {
        // Every coordinate law lives on subgroups of F2'.
        if !event.in_commutator() {
            return Ok(ProbabilityValue::zero());
        }
        // Each factor is at most 1 − P(Δ = e) < 1 for a nontrivial event.
        if !inner.trivial_mass().is_zero() {
            return Ok(ProbabilityValue::zero());
        }
        let mut source = CoinducedFactors {
            evaluator: self,
            inner,
            event,
            radius: event.support_radius()?,
            cert: TailCertificate::of(inner),
            error: None,
        };
        let out = certified_product(&mut source, width, self.factor_cap);
        if let Some(e) = source.error {
            return Err(e);
        }
        Ok(out.value)
    }
}

struct CoinducedFactors<'a> {
    evaluator: &'a Evaluator,
    inner: &'a MeasureDescriptor,
    event: &'a EnvEvent,
    radius: u64,
    cert: Option<TailCertificate>,
    error: Option<Error>,
}

impl FactorSource for CoinducedFactors<'_> {
    fn factor(&mut self, i: u64) -> Dyadic {
        let t = grid::transversal_word(grid::point(TransversalIndex::new(i).expect("i >= 1")));
        let pulled = self.event.pulled_back(&t);
        match self.evaluator.eval(self.inner, &pulled, &Dyadic::zero()) {
            Ok(ProbabilityValue::Exact(p)) => p,
            Ok(_) => {
                self.error = Some(Error::Unsupported("inexact coordinate law".into()));
                Dyadic::zero()
            }
            Err(e) => {
                self.error = Some(e);
                Dyadic::zero()
            }
        }
    }

    fn tail_bound(&mut self, last: u64) -> Dyadic {
        let next = grid::point(TransversalIndex::new(last + 1).expect("i >= 1"));
        ring_tail_bound(next.ring(), self.radius, self.cert.as_ref())
    }
}

/// [`Evaluator::env_prob`] with default settings.
pub fn env_prob(
    measure: &MeasureDescriptor,
    event: &EnvEvent,
    target_width: &Dyadic,
) -> Result<ProbabilityValue, Error> {
    Evaluator::default().env_prob(measure, event, target_width)
}

/// Total weight of the chain atoms Γ_k with k ≤ K.
pub fn chain_env_weight(measure: &MeasureDescriptor, depth: Depth) -> Result<Dyadic, Error> {
    measure
        .chain_cdf(depth)
        .ok_or_else(|| Error::Unsupported(format!("{measure} is not a chain measure")))
}
