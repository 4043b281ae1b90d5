use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cohenlyndon::{rewrite_to_y, Depth};
use crate::error::Error;
use crate::exactnum::Dyadic;
use crate::freegroup::Word;

/// Weight λ − a of Γ_2 in the parametrized family is taken against
/// λ = 2⁻¹ + 2⁻² (N = 1 because y_1 ∈ Γ_1 \ Γ_2).
pub fn family_lambda() -> Dyadic {
    Dyadic::new(3, 2)
}

/// Symbolic measure on the subgroups of F2.
///
/// Chain atoms live on F = Γ_1 ⊋ Γ_2 ⊋ ⋯ ⊋ {e}. Pushforwards act by
/// conjugation Δ ↦ gΔg⁻¹, so g_*μ(Env w) = μ(Env g⁻¹wg).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureDescriptor {
    /// Σ_k 2⁻ᵏ δ_{Γ_k}.
    GeomGamma,
    /// a δ_{Γ_1} + (3/4 − a) δ_{Γ_2} + Σ_{k≥3} 2⁻ᵏ δ_{Γ_k}, 0 < a < 3/4.
    ParamFamily {
        a: Dyadic,
    },
    Pushforward {
        g: Word,
        inner: Box<MeasureDescriptor>,
    },
    Convex {
        terms: Vec<ConvexTerm>,
    },
    /// (1/m) Σ_j (s_j)_* inner over a finite transversal S ⊂ H = ⟨[a,b]⟩.
    InducedFinite {
        transversal: Vec<Word>,
        inner: Box<MeasureDescriptor>,
    },
    /// ∩_i (t_i)_* inner over the whole transversal {aᵖbᑫ}.
    CoinducedProduct {
        inner: Box<MeasureDescriptor>,
    },
    /// Law of Δ_1 ∩ ⋯ ∩ Δ_n for iid chain samples.
    IntersectPower {
        n: u32,
        inner: Box<MeasureDescriptor>,
    },
    /// Law of ⟨Δ_1, …, Δ_n⟩ for iid chain samples.
    GeneratePower {
        n: u32,
        inner: Box<MeasureDescriptor>,
    },
    DiracTrivial,
    DiracGamma {
        k: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvexTerm {
    pub weight: Dyadic,
    pub inner: MeasureDescriptor,
}

impl MeasureDescriptor {
    /// μ_F.
    pub fn mu_f() -> MeasureDescriptor {
        MeasureDescriptor::GeomGamma
    }

    /// μ_HF = (1/m) Σ (s_j)_* μ_F with S = {e}.
    pub fn mu_hf() -> MeasureDescriptor {
        MeasureDescriptor::InducedFinite {
            transversal: vec![Word::identity()],
            inner: Box::new(MeasureDescriptor::mu_f()),
        }
    }

    /// μ_G = ∩_i (t_i)_* μ_HF.
    pub fn mu_g() -> MeasureDescriptor {
        MeasureDescriptor::CoinducedProduct {
            inner: Box::new(MeasureDescriptor::mu_hf()),
        }
    }

    pub fn mu_a_f(a: Dyadic) -> MeasureDescriptor {
        MeasureDescriptor::ParamFamily { a }
    }

    pub fn mu_a_g(a: Dyadic) -> MeasureDescriptor {
        MeasureDescriptor::CoinducedProduct {
            inner: Box::new(MeasureDescriptor::InducedFinite {
                transversal: vec![Word::identity()],
                inner: Box::new(MeasureDescriptor::mu_a_f(a)),
            }),
        }
    }

    pub fn coinduced(inner: MeasureDescriptor) -> MeasureDescriptor {
        MeasureDescriptor::CoinducedProduct {
            inner: Box::new(inner),
        }
    }

    pub fn pushforward(g: Word, inner: MeasureDescriptor) -> MeasureDescriptor {
        MeasureDescriptor::Pushforward {
            g,
            inner: Box::new(inner),
        }
    }

    pub fn intersect_power(n: u32, inner: MeasureDescriptor) -> MeasureDescriptor {
        MeasureDescriptor::IntersectPower {
            n,
            inner: Box::new(inner),
        }
    }

    pub fn generate_power(n: u32, inner: MeasureDescriptor) -> MeasureDescriptor {
        MeasureDescriptor::GeneratePower {
            n,
            inner: Box::new(inner),
        }
    }

    /// ½ μ₁ + ½ μ₂.
    pub fn half_half(m1: MeasureDescriptor, m2: MeasureDescriptor) -> MeasureDescriptor {
        MeasureDescriptor::Convex {
            terms: vec![
                ConvexTerm {
                    weight: Dyadic::pow2_neg(1),
                    inner: m1,
                },
                ConvexTerm {
                    weight: Dyadic::pow2_neg(1),
                    inner: m2,
                },
            ],
        }
    }

    /// Parses a named measure (`mu_F`, `mu_HF`, `mu_G`, `mu_aF:<a>`,
    /// `mu_aG:<a>`) or a JSON descriptor, and validates it.
    pub fn parse(s: &str) -> Result<MeasureDescriptor, Error> {
        let t = s.trim();
        let d = match t {
            "mu_F" => MeasureDescriptor::mu_f(),
            "mu_HF" => MeasureDescriptor::mu_hf(),
            "mu_G" => MeasureDescriptor::mu_g(),
            _ if t.starts_with("mu_aF:") => MeasureDescriptor::mu_a_f(t[6..].parse()?),
            _ if t.starts_with("mu_aG:") => MeasureDescriptor::mu_a_g(t[6..].parse()?),
            _ if t.starts_with('{') => {
                serde_json::from_str(t).map_err(|e| Error::InvalidDescriptor(format!("{e}")))?
            }
            _ => return Err(Error::InvalidDescriptor(format!("unknown measure {t:?}"))),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }

    pub fn validate(&self) -> Result<(), Error> {
        use MeasureDescriptor::*;
        let invalid = |m: String| Err(Error::InvalidDescriptor(m));
        match self {
            GeomGamma | DiracTrivial => Ok(()),
            DiracGamma { k } => {
                if *k == 0 {
                    return invalid("dirac_gamma needs k >= 1".into());
                }
                Ok(())
            }
            ParamFamily { a } => {
                if a.is_negative() || a.is_zero() || *a >= family_lambda() {
                    return invalid(format!("param_family needs 0 < a < 3/4, got {a}"));
                }
                Ok(())
            }
            Pushforward { inner, .. } => inner.validate(),
            Convex { terms } => {
                if terms.is_empty() {
                    return invalid("convex combination with no terms".into());
                }
                if terms
                    .iter()
                    .any(|t| t.weight.is_negative() || t.weight.is_zero())
                {
                    return invalid("convex weights must be positive".into());
                }
                let total: Dyadic = terms.iter().map(|t| t.weight.clone()).sum();
                if !total.is_one() {
                    return invalid(format!("convex weights sum to {total}, not 1"));
                }
                terms.iter().try_for_each(|t| t.inner.validate())
            }
            InducedFinite { transversal, inner } => {
                let m = transversal.len();
                if m == 0 || !m.is_power_of_two() {
                    return invalid(format!(
                        "induced transversal size {m} is not a power of two"
                    ));
                }
                let distinct: BTreeSet<&Word> = transversal.iter().collect();
                if distinct.len() != m {
                    return invalid("induced transversal has repeated elements".into());
                }
                for s in transversal {
                    if !in_h(s) {
                        return invalid(format!("transversal element {s:?} is not in H = <[a,b]>"));
                    }
                }
                inner.validate()
            }
            CoinducedProduct { inner } => {
                if inner.contains_coinduced() {
                    return Err(Error::Unsupported("nested co-induction".into()));
                }
                inner.validate()
            }
            IntersectPower { n, inner } | GeneratePower { n, inner } => {
                if *n == 0 {
                    return invalid("power needs n >= 1".into());
                }
                inner.validate()?;
                if !inner.is_chain() {
                    return Err(Error::Unsupported(
                        "intersection/generation powers are only defined on chain measures".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub(crate) fn contains_coinduced(&self) -> bool {
        use MeasureDescriptor::*;
        match self {
            CoinducedProduct { .. } => true,
            GeomGamma | ParamFamily { .. } | DiracTrivial | DiracGamma { .. } => false,
            Pushforward { inner, .. }
            | InducedFinite { inner, .. }
            | IntersectPower { inner, .. }
            | GeneratePower { inner, .. } => inner.contains_coinduced(),
            Convex { terms } => terms.iter().any(|t| t.inner.contains_coinduced()),
        }
    }

    /// True when the measure is carried by the chain {Γ_k} ∪ {⟨e⟩}.
    pub fn is_chain(&self) -> bool {
        use MeasureDescriptor::*;
        match self {
            GeomGamma | ParamFamily { .. } | DiracTrivial | DiracGamma { .. } => true,
            // Γ_k is normal in F, so conjugating by F keeps the chain.
            Pushforward { g, inner } => g.in_commutator() && inner.is_chain(),
            InducedFinite { inner, .. } => inner.is_chain(),
            IntersectPower { inner, .. } | GeneratePower { inner, .. } => inner.is_chain(),
            Convex { terms } => terms.iter().all(|t| t.inner.is_chain()),
            CoinducedProduct { .. } => false,
        }
    }

    /// P(Γ_k ∋ w) = P(k ≤ K) for a chain measure, where K is the depth of
    /// w (`Finite(0)` outside F). `None` if the measure is not a chain.
    pub fn chain_cdf(&self, depth: Depth) -> Option<Dyadic> {
        use MeasureDescriptor::*;
        let k = match depth {
            Depth::Infinite => return Some(Dyadic::one()),
            Depth::Finite(k) => k,
        };
        if k == 0 {
            return self.is_chain().then(Dyadic::zero);
        }
        let one = Dyadic::one();
        Some(match self {
            GeomGamma => &one - &Dyadic::pow2_neg(k),
            ParamFamily { a } => match k {
                1 => a.clone(),
                2 => family_lambda(),
                _ => &one - &Dyadic::pow2_neg(k),
            },
            DiracTrivial => Dyadic::zero(),
            DiracGamma { k: atom } => {
                if k >= *atom {
                    one
                } else {
                    Dyadic::zero()
                }
            }
            Pushforward { g, inner } => {
                if !g.in_commutator() {
                    return None;
                }
                inner.chain_cdf(depth)?
            }
            InducedFinite { inner, .. } => inner.chain_cdf(depth)?,
            IntersectPower { n, inner } => inner.chain_cdf(depth)?.pow(*n),
            GeneratePower { n, inner } => &one - &(&one - &inner.chain_cdf(depth)?).pow(*n),
            Convex { terms } => {
                let mut acc = Dyadic::zero();
                for t in terms {
                    acc = acc + &t.weight * &t.inner.chain_cdf(depth)?;
                }
                acc
            }
            CoinducedProduct { .. } => return None,
        })
    }

    /// P(Δ = ⟨e⟩).
    pub fn trivial_mass(&self) -> Dyadic {
        use MeasureDescriptor::*;
        let one = Dyadic::one();
        match self {
            GeomGamma | ParamFamily { .. } | DiracGamma { .. } => Dyadic::zero(),
            DiracTrivial => one,
            Pushforward { inner, .. } | InducedFinite { inner, .. } => inner.trivial_mass(),
            Convex { terms } => terms
                .iter()
                .map(|t| &t.weight * &t.inner.trivial_mass())
                .sum(),
            // ∩ Γ_{k_j} = Γ_{max k_j} is trivial iff some k_j = ∞
            IntersectPower { n, inner } => &one - &(&one - &inner.trivial_mass()).pow(*n),
            // ⟨Γ_{k_j}⟩ = Γ_{min k_j} is trivial iff every k_j = ∞
            GeneratePower { n, inner } => inner.trivial_mass().pow(*n),
            // A coordinate law with an atom at ⟨e⟩ bounds every factor of a
            // nontrivial envelope by 1 − c; otherwise the commutator of two
            // far-apart basis elements survives with positive probability,
            // and the co-induced law is ergodic.
            CoinducedProduct { inner } => {
                if inner.trivial_mass().is_zero() {
                    Dyadic::zero()
                } else {
                    one
                }
            }
        }
    }
}

/// Membership in H = ⟨[a,b]⟩: the y-spelling is a power of y_1.
fn in_h(s: &Word) -> bool {
    match rewrite_to_y(s) {
        Ok(v) => v.syllables().iter().all(|(i, _)| i.get() == 1),
        Err(_) => false,
    }
}

impl fmt::Display for MeasureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn named_measures_parse() {
        assert_eq!(
            MeasureDescriptor::parse("mu_F").unwrap(),
            MeasureDescriptor::GeomGamma
        );
        assert_eq!(
            MeasureDescriptor::parse("mu_G").unwrap(),
            MeasureDescriptor::mu_g()
        );
        assert_eq!(
            MeasureDescriptor::parse("mu_aG:1/4").unwrap(),
            MeasureDescriptor::mu_a_g(d("1/4"))
        );
        assert!(MeasureDescriptor::parse("mu_aF:3/4").is_err());
        assert!(MeasureDescriptor::parse("mu_aF:1/3").is_err());
        assert!(MeasureDescriptor::parse("nu").is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = MeasureDescriptor::half_half(
            MeasureDescriptor::mu_g(),
            MeasureDescriptor::pushforward(
                "ab".parse().unwrap(),
                MeasureDescriptor::DiracGamma { k: 3 },
            ),
        );
        let json = m.to_json();
        assert_eq!(MeasureDescriptor::parse(&json).unwrap(), m);
        let raw = r#"{"type":"coinduced_product","inner":{"type":"param_family","a":"1/8"}}"#;
        assert_eq!(
            MeasureDescriptor::parse(raw).unwrap(),
            MeasureDescriptor::coinduced(MeasureDescriptor::mu_a_f(d("1/8")))
        );
    }

    #[test]
    fn validation_rejects_bad_descriptors() {
        use MeasureDescriptor::*;
        let bad = [
            r#"{"type":"convex","terms":[{"weight":"1/2","inner":{"type":"geom_gamma"}}]}"#,
            r#"{"type":"convex","terms":[]}"#,
            r#"{"type":"dirac_gamma","k":0}"#,
            r#"{"type":"induced_finite","transversal":["a"],"inner":{"type":"geom_gamma"}}"#,
            r#"{"type":"induced_finite","transversal":["","abAB","ABab"],"inner":{"type":"geom_gamma"}}"#,
            r#"{"type":"intersect_power","n":0,"inner":{"type":"geom_gamma"}}"#,
            r#"{"type":"param_family","a":"0"}"#,
        ];
        for b in bad {
            assert!(
                matches!(
                    MeasureDescriptor::parse(b),
                    Err(Error::InvalidDescriptor(_))
                ),
                "{b}"
            );
        }
        let nested = MeasureDescriptor::coinduced(MeasureDescriptor::mu_g());
        assert!(matches!(nested.validate(), Err(Error::Unsupported(_))));
        let mixed = MeasureDescriptor::intersect_power(2, MeasureDescriptor::mu_g());
        assert!(matches!(mixed.validate(), Err(Error::Unsupported(_))));
        let off_chain = MeasureDescriptor::generate_power(
            2,
            MeasureDescriptor::pushforward("a".parse().unwrap(), GeomGamma),
        );
        assert!(matches!(off_chain.validate(), Err(Error::Unsupported(_))));
        let good =
            r#"{"type":"induced_finite","transversal":["","abAB"],"inner":{"type":"geom_gamma"}}"#;
        assert!(MeasureDescriptor::parse(good).is_ok());
    }

    #[test]
    fn chain_weights() {
        use MeasureDescriptor::*;
        assert_eq!(GeomGamma.chain_cdf(Depth::Finite(1)).unwrap(), d("1/2"));
        assert_eq!(GeomGamma.chain_cdf(Depth::Infinite).unwrap(), Dyadic::one());
        assert_eq!(
            GeomGamma.chain_cdf(Depth::Finite(0)).unwrap(),
            Dyadic::zero()
        );
        let fam = ParamFamily { a: d("1/8") };
        assert_eq!(fam.chain_cdf(Depth::Finite(1)).unwrap(), d("1/8"));
        assert_eq!(fam.chain_cdf(Depth::Finite(2)).unwrap(), d("3/4"));
        assert_eq!(fam.chain_cdf(Depth::Finite(5)).unwrap(), d("31/32"));
        assert_eq!(
            DiracTrivial.chain_cdf(Depth::Finite(9)).unwrap(),
            Dyadic::zero()
        );
        assert!(MeasureDescriptor::mu_g()
            .chain_cdf(Depth::Finite(1))
            .is_none());
    }

    /// Oracle: sum the atom weights 2⁻ᵏ (and the family's modified
    /// weights) over k ≤ K directly.
    #[test]
    fn chain_weights_match_atom_sums() {
        let geom_atom = |k: u64| Dyadic::pow2_neg(k);
        for a in ["1/8", "1/4", "1/2", "5/8"] {
            let a = d(a);
            let fam_atom = |k: u64| match k {
                1 => a.clone(),
                2 => &family_lambda() - &a,
                _ => Dyadic::pow2_neg(k),
            };
            for big_k in 1..=30u64 {
                let g: Dyadic = (1..=big_k).map(geom_atom).sum();
                let f: Dyadic = (1..=big_k).map(fam_atom).sum();
                assert_eq!(
                    MeasureDescriptor::GeomGamma
                        .chain_cdf(Depth::Finite(big_k))
                        .unwrap(),
                    g
                );
                assert_eq!(
                    MeasureDescriptor::mu_a_f(a.clone())
                        .chain_cdf(Depth::Finite(big_k))
                        .unwrap(),
                    f
                );
            }
        }
        let half = MeasureDescriptor::mu_a_f(d("1/2"));
        for k in 1..=20 {
            assert_eq!(
                half.chain_cdf(Depth::Finite(k)),
                MeasureDescriptor::GeomGamma.chain_cdf(Depth::Finite(k))
            );
        }
    }

    #[test]
    fn trivial_masses() {
        use MeasureDescriptor::*;
        assert!(GeomGamma.trivial_mass().is_zero());
        assert!(DiracTrivial.trivial_mass().is_one());
        let mix = MeasureDescriptor::half_half(GeomGamma, DiracTrivial);
        assert_eq!(mix.trivial_mass(), d("1/2"));
        assert_eq!(
            MeasureDescriptor::intersect_power(2, mix.clone()).trivial_mass(),
            d("3/4")
        );
        assert_eq!(
            MeasureDescriptor::generate_power(2, mix.clone()).trivial_mass(),
            d("1/4")
        );
        assert!(MeasureDescriptor::coinduced(mix).trivial_mass().is_one());
        assert!(MeasureDescriptor::mu_g().trivial_mass().is_zero());
    }
}
