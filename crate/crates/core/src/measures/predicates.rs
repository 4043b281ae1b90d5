use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::exactnum::{Dyadic, Interval, ProbabilityValue};
use crate::freegroup::Word;

use super::{EnvEvent, Evaluator, MeasureDescriptor};

/// A decision backed by an exact value or a certified enclosure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifiedBool {
    True,
    False,
    Unknown,
}

impl CertifiedBool {
    pub fn is_true(self) -> bool {
        self == CertifiedBool::True
    }

    pub fn is_false(self) -> bool {
        self == CertifiedBool::False
    }

    pub fn and(self, other: CertifiedBool) -> CertifiedBool {
        use CertifiedBool::*;
        match (self, other) {
            (False, _) | (_, False) => False,
            (True, True) => True,
            _ => Unknown,
        }
    }

    pub fn or(self, other: CertifiedBool) -> CertifiedBool {
        use CertifiedBool::*;
        match (self, other) {
            (True, _) | (_, True) => True,
            (False, False) => False,
            _ => Unknown,
        }
    }
}

impl From<bool> for CertifiedBool {
    fn from(b: bool) -> CertifiedBool {
        if b {
            CertifiedBool::True
        } else {
            CertifiedBool::False
        }
    }
}

impl fmt::Display for CertifiedBool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertifiedBool::True => "true",
            CertifiedBool::False => "false",
            CertifiedBool::Unknown => "unknown",
        })
    }
}

/// Finest width tried by the refinement loops below.
const FINEST_WIDTH_EXP: u64 = 64;

/// Refines μ(Env w) until `decide` returns an answer.
fn refine(
    evaluator: &Evaluator,
    measure: &MeasureDescriptor,
    w: &Word,
    decide: impl Fn(&ProbabilityValue) -> Option<bool>,
) -> Result<CertifiedBool, Error> {
    let event = EnvEvent::single(w.clone());
    for e in 1..=FINEST_WIDTH_EXP {
        let v = evaluator.env_prob(measure, &event, &Dyadic::pow2_neg(e))?;
        if let Some(b) = decide(&v) {
            return Ok(b.into());
        }
        if !v.width_reached() {
            break;
        }
    }
    Ok(CertifiedBool::Unknown)
}

/// w ∈ ker(μ) ⇔ μ(Env w) = 1.
pub fn kernel_contains(measure: &MeasureDescriptor, w: &Word) -> Result<CertifiedBool, Error> {
    kernel_contains_with(&Evaluator::default(), measure, w)
}

pub fn kernel_contains_with(
    evaluator: &Evaluator,
    measure: &MeasureDescriptor,
    w: &Word,
) -> Result<CertifiedBool, Error> {
    refine(evaluator, measure, w, |v| match v {
        ProbabilityValue::Exact(p) => Some(p.is_one()),
        ProbabilityValue::Enclosure { interval, .. } => {
            (interval.hi < Dyadic::one()).then_some(false)
        }
    })
}

/// w is μ-essential ⇔ μ(Env w) > 0.
pub fn essential(measure: &MeasureDescriptor, w: &Word) -> Result<CertifiedBool, Error> {
    essential_with(&Evaluator::default(), measure, w)
}

pub fn essential_with(
    evaluator: &Evaluator,
    measure: &MeasureDescriptor,
    w: &Word,
) -> Result<CertifiedBool, Error> {
    refine(evaluator, measure, w, |v| match v {
        ProbabilityValue::Exact(p) => Some(!p.is_zero()),
        ProbabilityValue::Enclosure { interval, .. } => (!interval.lo.is_zero()).then_some(true),
    })
}

/// The symbolic subgroups against which closures are tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolicGroup {
    Trivial,
    Commutator,
    Whole,
}

impl std::str::FromStr for SymbolicGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<SymbolicGroup, Error> {
        match s {
            "trivial" | "e" => Ok(SymbolicGroup::Trivial),
            "commutator" | "F2'" | "F" => Ok(SymbolicGroup::Commutator),
            "whole" | "G" | "F2" => Ok(SymbolicGroup::Whole),
            _ => Err(Error::InvalidDescriptor(format!("unknown group {s:?}"))),
        }
    }
}

/// μ(Sub(C)) = 1.
///
/// Every chain atom is a subgroup of F = F2', F2' is normal, and
/// intersections of subgroups of F2' stay inside it, so every descriptor is
/// supported in F2'. Support in ⟨e⟩ is decided by the trivial mass.
pub fn supported_in(measure: &MeasureDescriptor, group: SymbolicGroup) -> Result<bool, Error> {
    measure.validate()?;
    Ok(match group {
        SymbolicGroup::Whole | SymbolicGroup::Commutator => true,
        SymbolicGroup::Trivial => measure.trivial_mass().is_one(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CombinationRow {
    pub word: Word,
    pub kernel_1: CertifiedBool,
    pub kernel_2: CertifiedBool,
    pub kernel_convex: CertifiedBool,
    pub essential_1: CertifiedBool,
    pub essential_2: CertifiedBool,
    pub essential_convex: CertifiedBool,
    /// ker(IntersectPower(n, μ₁)) membership, when μ₁ is a chain measure.
    pub kernel_power_1: Option<CertifiedBool>,
    pub kernel_power_2: Option<CertifiedBool>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CombinationReport {
    pub measure_1: MeasureDescriptor,
    pub measure_2: MeasureDescriptor,
    pub power: u32,
    pub rows: Vec<CombinationRow>,
    pub failures: usize,
    pub pass: bool,
}

/// Per-word checks of ker(½μ₁+½μ₂) = ker μ₁ ∩ ker μ₂, essential elements of
/// the mixture = union of the essential elements, and
/// ker(∩ⁿ μ) = ker μ for chain measures.
pub fn check_combination_identities(
    m1: &MeasureDescriptor,
    m2: &MeasureDescriptor,
    words: &[Word],
    power: u32,
) -> Result<CombinationReport, Error> {
    let ev = Evaluator::default();
    let convex = MeasureDescriptor::half_half(m1.clone(), m2.clone());
    let pow1 = m1
        .is_chain()
        .then(|| MeasureDescriptor::intersect_power(power, m1.clone()));
    let pow2 = m2
        .is_chain()
        .then(|| MeasureDescriptor::intersect_power(power, m2.clone()));
    let mut rows = Vec::with_capacity(words.len());
    for w in words {
        let kernel_1 = kernel_contains_with(&ev, m1, w)?;
        let kernel_2 = kernel_contains_with(&ev, m2, w)?;
        let kernel_convex = kernel_contains_with(&ev, &convex, w)?;
        let essential_1 = essential_with(&ev, m1, w)?;
        let essential_2 = essential_with(&ev, m2, w)?;
        let essential_convex = essential_with(&ev, &convex, w)?;
        let kernel_power_1 = pow1
            .as_ref()
            .map(|p| kernel_contains_with(&ev, p, w))
            .transpose()?;
        let kernel_power_2 = pow2
            .as_ref()
            .map(|p| kernel_contains_with(&ev, p, w))
            .transpose()?;
        let definite = |b: CertifiedBool| b != CertifiedBool::Unknown;
        let pass = definite(kernel_convex)
            && kernel_convex == kernel_1.and(kernel_2)
            && definite(essential_convex)
            && essential_convex == essential_1.or(essential_2)
            && kernel_power_1.is_none_or(|k| k == kernel_1 && definite(k))
            && kernel_power_2.is_none_or(|k| k == kernel_2 && definite(k));
        rows.push(CombinationRow {
            word: w.clone(),
            kernel_1,
            kernel_2,
            kernel_convex,
            essential_1,
            essential_2,
            essential_convex,
            kernel_power_1,
            kernel_power_2,
            pass,
        });
    }
    let failures = rows.iter().filter(|r| !r.pass).count();
    Ok(CombinationReport {
        measure_1: m1.clone(),
        measure_2: m2.clone(),
        power,
        rows,
        failures,
        pass: failures == 0,
    })
}

/// Enclosure of |μ(Env{w₁, g w₂ g⁻¹}) − μ(Env w₁)·μ(Env g w₂ g⁻¹)| for
/// μ = μ_G, an independence defect of shifted cylinder events.
///
/// This is a finite proxy for weak mixing, not a certificate of it.
pub fn mixing_defect(
    w1: &Word,
    w2: &Word,
    shift: &Word,
    target_width: &Dyadic,
) -> Result<Interval, Error> {
    mixing_defect_for(&MeasureDescriptor::mu_g(), w1, w2, shift, target_width)
}

pub fn mixing_defect_for(
    measure: &MeasureDescriptor,
    w1: &Word,
    w2: &Word,
    shift: &Word,
    target_width: &Dyadic,
) -> Result<Interval, Error> {
    for w in [w1, w2] {
        if !w.in_commutator() {
            return Err(Error::NotInCommutator(w.to_string(), w.abelianize()));
        }
    }
    let moved = w2.conjugate_by(shift);
    if w1.is_identity() || moved.is_identity() {
        return Ok(Interval::point(Dyadic::zero()));
    }
    // three enclosures enter the difference
    let width = target_width * &Dyadic::pow2_neg(2);
    let ev = Evaluator::default();
    let first = EnvEvent::single(w1.clone());
    let second = EnvEvent::single(moved);
    let joint = ev.env_prob(measure, &first.union(&second), &width)?;
    let p1 = ev.env_prob(measure, &first, &width)?;
    let p2 = ev.env_prob(measure, &second, &width)?;
    Ok(joint.interval().sub(&p1.mul(&p2).interval()).abs())
}
