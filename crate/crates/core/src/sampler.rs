//! Lazily materialized samples of a co-induced chain IRS, and the
//! statistics used to compare them with exact envelope probabilities.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cohenlyndon::{depth, Depth};
use crate::error::Error;
use crate::exactnum::{Dyadic, ProbabilityValue};
use crate::freegroup::Word;
use crate::grid::{self, TransversalIndex};
use crate::measures::{ring_tail_bound, EnvEvent, MeasureDescriptor, TailCertificate};

pub const DEFAULT_TOLERANCE_EXP: u64 = 60;

/// Ceiling on a single coordinate; reaching it needs thousands of
/// consecutive one-bits from the stream.
const MAX_COORDINATE: u64 = 4096;

/// The chain law shared by every coordinate of a co-induced product, with
/// finite inductions over H stripped (conjugating by H ⊂ F preserves depth).
fn coordinate_law(measure: &MeasureDescriptor) -> Result<MeasureDescriptor, Error> {
    measure.validate()?;
    let MeasureDescriptor::CoinducedProduct { inner } = measure else {
        return Err(Error::Unsupported(format!(
            "sampling needs a co-induced product, got {measure}"
        )));
    };
    let mut law = inner.as_ref();
    while let MeasureDescriptor::InducedFinite { inner, .. } = law {
        law = inner;
    }
    match law {
        MeasureDescriptor::GeomGamma | MeasureDescriptor::ParamFamily { .. } => Ok(law.clone()),
        other => Err(Error::Unsupported(format!(
            "cannot sample coordinates from {other}"
        ))),
    }
}

/// Bits of the uniform variable U_i = 0.b₁b₂… for coordinate i.
struct BitStream {
    rng: ChaCha20Rng,
    words: Vec<u64>,
}

impl BitStream {
    fn new(seed: u64, i: u64) -> BitStream {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(i);
        BitStream {
            rng,
            words: Vec::new(),
        }
    }

    /// ⌊U·2ᵉ⌋.
    fn prefix(&mut self, e: u64) -> BigUint {
        let needed = e.div_ceil(64) as usize;
        while self.words.len() < needed {
            self.words.push(self.rng.next_u64());
        }
        let mut acc = BigUint::ZERO;
        for w in &self.words[..needed] {
            acc = (acc << 64u32) + BigUint::from(*w);
        }
        acc >> (64 * needed as u64 - e)
    }
}

/// k_i: the least k with U_i < P(k_i ≤ k), compared exactly.
fn resolve(law: &MeasureDescriptor, seed: u64, i: u64) -> u64 {
    let mut bits = BitStream::new(seed, i);
    for k in 1..MAX_COORDINATE {
        let cdf = law.chain_cdf(Depth::Finite(k)).expect("chain law");
        if cdf.is_zero() {
            continue;
        }
        let numer = cdf.numerator().to_biguint().expect("cdf is non-negative");
        if bits.prefix(cdf.exponent()) < numer {
            return k;
        }
    }
    MAX_COORDINATE
}

/// The per-coordinate depths a membership test needs for one word,
/// independent of the sample.
#[derive(Clone, Debug)]
pub enum MembershipQuery {
    Identity,
    OutsideCommutator,
    /// depth_i of t_i⁻¹ w t_i for i = 1..=len; beyond that the violation
    /// mass is certified below 2⁻ᵗ.
    Profile(Vec<Depth>),
}

impl MembershipQuery {
    pub fn new(
        law: &MeasureDescriptor,
        w: &Word,
        tolerance_exp: u64,
    ) -> Result<MembershipQuery, Error> {
        if w.is_identity() {
            return Ok(MembershipQuery::Identity);
        }
        if !w.in_commutator() {
            return Ok(MembershipQuery::OutsideCommutator);
        }
        let radius = EnvEvent::single(w.clone()).support_radius()?;
        let cert = TailCertificate::of(law);
        let tolerance = Dyadic::pow2_neg(tolerance_exp);
        let mut ring = radius + 1;
        while ring_tail_bound(ring, radius, cert.as_ref()) >= tolerance {
            ring += 1;
        }
        // every index before the first certified ring is checked
        let last = grid::ring_start(ring) - 1;
        let mut profile = Vec::with_capacity(last as usize);
        for i in 1..=last {
            let t = grid::transversal_word(grid::point(TransversalIndex::new(i)?));
            profile.push(depth(&w.conjugate_by(&t.invert()))?);
        }
        Ok(MembershipQuery::Profile(profile))
    }

    /// Number of coordinates a test may inspect.
    pub fn coordinates(&self) -> usize {
        match self {
            MembershipQuery::Profile(p) => p.len(),
            _ => 0,
        }
    }
}

/// Δ = ∩_i t_i Γ_{k_i} t_i⁻¹ with k_i drawn from a keyed stream on (seed, i).
#[derive(Clone, Debug)]
pub struct SampledSubgroup {
    seed: u64,
    law: MeasureDescriptor,
    resolved: BTreeMap<u64, u64>,
    tolerance_exp: u64,
}

impl SampledSubgroup {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tolerance_exp(&self) -> u64 {
        self.tolerance_exp
    }

    pub fn with_tolerance_exp(mut self, t: u64) -> SampledSubgroup {
        self.tolerance_exp = t.max(1);
        self
    }

    /// The chain law of each coordinate.
    pub fn law(&self) -> &MeasureDescriptor {
        &self.law
    }

    /// Coordinates materialized so far.
    pub fn resolved(&self) -> &BTreeMap<u64, u64> {
        &self.resolved
    }

    /// k_i, drawn on first use.
    pub fn coordinate(&mut self, i: TransversalIndex) -> u64 {
        let (seed, law) = (self.seed, &self.law);
        *self
            .resolved
            .entry(i.get())
            .or_insert_with(|| resolve(law, seed, i.get()))
    }

    /// Fixes k_i, for constructing specific subgroups in tests and demos.
    pub fn force_coordinate(&mut self, i: TransversalIndex, k: u64) {
        self.resolved.insert(i.get(), k);
    }

    pub fn query(&self, w: &Word) -> Result<MembershipQuery, Error> {
        MembershipQuery::new(&self.law, w, self.tolerance_exp)
    }

    /// w ∈ Δ, exact up to a violation mass below 2⁻ᵗ in the unchecked tail.
    pub fn member(&mut self, w: &Word) -> Result<bool, Error> {
        let q = self.query(w)?;
        Ok(self.member_query(&q))
    }

    /// Coordinates are checked in order and the first violation k_i > depth_i
    /// stops the scan. The query must come from this sample's law and
    /// tolerance.
    pub fn member_query(&mut self, q: &MembershipQuery) -> bool {
        match q {
            MembershipQuery::Identity => true,
            MembershipQuery::OutsideCommutator => false,
            MembershipQuery::Profile(profile) => profile.iter().enumerate().all(|(j, d)| match d {
                Depth::Infinite => true,
                Depth::Finite(d) => {
                    let i = TransversalIndex::new(j as u64 + 1).expect("positive index");
                    self.coordinate(i) <= *d
                }
            }),
        }
    }
}

pub fn sample(measure: &MeasureDescriptor, seed: u64) -> Result<SampledSubgroup, Error> {
    Ok(SampledSubgroup {
        seed,
        law: coordinate_law(measure)?,
        resolved: BTreeMap::new(),
        tolerance_exp: DEFAULT_TOLERANCE_EXP,
    })
}

/// Rows follow `seeds`, columns follow `words`.
#[derive(Clone, Debug, Serialize)]
pub struct MembershipMatrix {
    pub seeds: Vec<u64>,
    pub words: Vec<Word>,
    pub tolerance_exp: u64,
    pub rows: Vec<Vec<bool>>,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
}

pub fn membership_matrix(
    measure: &MeasureDescriptor,
    seeds: &[u64],
    words: &[Word],
    tolerance_exp: u64,
) -> Result<MembershipMatrix, Error> {
    let law = coordinate_law(measure)?;
    let queries = words
        .iter()
        .map(|w| MembershipQuery::new(&law, w, tolerance_exp))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<bool>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut delta = SampledSubgroup {
                seed,
                law: law.clone(),
                resolved: BTreeMap::new(),
                tolerance_exp,
            };
            queries.iter().map(|q| delta.member_query(q)).collect()
        })
        .collect();
    let counts: Vec<u64> = (0..words.len())
        .map(|j| rows.iter().filter(|r| r[j]).count() as u64)
        .collect();
    let n = seeds.len().max(1) as f64;
    Ok(MembershipMatrix {
        seeds: seeds.to_vec(),
        words: words.to_vec(),
        tolerance_exp,
        frequencies: counts.iter().map(|&c| c as f64 / n).collect(),
        counts,
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WordStatistic {
    pub word: Word,
    pub empirical: f64,
    pub exact_or_enclosure: ProbabilityValue,
    pub sigma: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareReport {
    pub samples: u64,
    pub threshold_sigma: f64,
    pub rows: Vec<WordStatistic>,
    pub pass: bool,
}

pub const SIGMA_THRESHOLD: f64 = 3.0;

/// z-scores of observed frequencies against reference probabilities.
///
/// References are enclosure midpoints; an enclosure wider than σ/10 is
/// refused because its own uncertainty would blur the test. A reference of
/// exactly 0 or 1 has σ = 0 and passes only on exact agreement.
pub fn chi_square_report(
    words: &[Word],
    empirical: &[f64],
    reference: &[ProbabilityValue],
    samples: u64,
) -> Result<ChiSquareReport, Error> {
    if samples < 100 {
        return Err(Error::Statistics(format!(
            "{samples} samples, need at least 100"
        )));
    }
    if words.len() != empirical.len() || words.len() != reference.len() {
        return Err(Error::Statistics("table lengths differ".into()));
    }
    let mut rows = Vec::with_capacity(words.len());
    for ((w, &f), r) in words.iter().zip(empirical).zip(reference) {
        let p = r.interval().midpoint().to_f64();
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        let width = r.width().to_f64();
        if width > sigma / 10.0 {
            return Err(Error::Statistics(format!(
                "reference for {w} has width {width:e}, more than sigma/10 = {:e}",
                sigma / 10.0
            )));
        }
        let (z, pass) = if sigma == 0.0 {
            if f == p {
                (0.0, true)
            } else {
                (f64::INFINITY, false)
            }
        } else {
            let z = (f - p) / sigma;
            (z, z.abs() <= SIGMA_THRESHOLD)
        };
        rows.push(WordStatistic {
            word: w.clone(),
            empirical: f,
            exact_or_enclosure: r.clone(),
            sigma,
            z,
            pass,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ChiSquareReport {
        samples,
        threshold_sigma: SIGMA_THRESHOLD,
        rows,
        pass,
    })
}

/// Pearson's statistic Σ (O − E)²/E over bins with positive expectation.
pub fn pearson_statistic(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .filter(|(_, e)| **e > 0.0)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum()
}

/// Bin j−1 counts k₁ = j for j < `bins`; the last bin collects k₁ ≥ bins.
pub fn first_coordinate_histogram(
    measure: &MeasureDescriptor,
    seeds: &[u64],
    bins: usize,
) -> Result<Vec<u64>, Error> {
    let law = coordinate_law(measure)?;
    let mut hist = vec![0u64; bins];
    let ks: Vec<u64> = seeds.par_iter().map(|&s| resolve(&law, s, 1)).collect();
    for k in ks {
        hist[(k as usize).min(bins) - 1] += 1;
    }
    Ok(hist)
}

/// P(k = j) for the coordinate law, with the last bin holding P(k ≥ bins).
pub fn coordinate_probabilities(
    measure: &MeasureDescriptor,
    bins: usize,
) -> Result<Vec<Dyadic>, Error> {
    let law = coordinate_law(measure)?;
    let cdf = |k: u64| law.chain_cdf(Depth::Finite(k)).expect("chain law");
    let mut out = Vec::with_capacity(bins);
    for j in 1..bins as u64 {
        out.push(cdf(j) - cdf(j - 1));
    }
    out.push(Dyadic::one() - cdf(bins as u64 - 1));
    Ok(out)
}

/// `n` consecutive seeds starting at `base`.
pub fn seed_range(base: u64, n: u64) -> Vec<u64> {
    (0..n).map(|j| base.wrapping_add(j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohenlyndon::{expand, YWord};
    use crate::freegroup::words_up_to;
    use crate::measures::env_prob;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn mu_g_sample(seed: u64) -> SampledSubgroup {
        sample(&MeasureDescriptor::mu_g(), seed).unwrap()
    }

    fn y(s: &str) -> Word {
        expand(&s.parse::<YWord>().unwrap())
    }

    #[test]
    fn rejects_non_chain_coordinates() {
        assert!(sample(&MeasureDescriptor::mu_f(), 1).is_err());
        let dirac = MeasureDescriptor::coinduced(MeasureDescriptor::DiracGamma { k: 2 });
        assert!(matches!(sample(&dirac, 1), Err(Error::Unsupported(_))));
        assert!(sample(&MeasureDescriptor::mu_a_g("1/4".parse().unwrap()), 1).is_ok());
    }

    #[test]
    fn trivial_answers() {
        let mut delta = mu_g_sample(7);
        assert!(delta.member(&Word::identity()).unwrap());
        assert!(!delta.member(&w("a")).unwrap());
        assert!(!delta.member(&w("abABa")).unwrap());
        assert!(delta.resolved().is_empty());
    }

    #[test]
    fn single_coordinate_violation() {
        let mut delta = mu_g_sample(0);
        delta.force_coordinate(TransversalIndex::FIRST, 2);
        assert!(!delta.member(&w("abAB")).unwrap());
        assert_eq!(delta.resolved().len(), 1);
    }

    #[test]
    fn coordinates_are_replayable() {
        let mut a = mu_g_sample(42);
        let mut b = mu_g_sample(42);
        for i in (1..200).rev() {
            let i = TransversalIndex::new(i).unwrap();
            assert_eq!(a.coordinate(i), b.coordinate(i));
        }
        let words = [w("abAB"), y("y2"), y("y1^2"), y("y3 y1 y3^-1 y1^-1")];
        for v in &words {
            let first = a.member(v).unwrap();
            assert_eq!(first, a.member(v).unwrap());
            assert_eq!(first, b.member(v).unwrap());
        }
    }

    #[test]
    fn geometric_coordinate_is_first_zero_bit() {
        let law = MeasureDescriptor::GeomGamma;
        for seed in 0..50 {
            for i in 1..20 {
                let mut bits = BitStream::new(seed, i);
                let first = bits
                    .prefix(64)
                    .to_u64_digits()
                    .first()
                    .copied()
                    .unwrap_or(0);
                let expected = (first.leading_ones() + 1) as u64;
                assert_eq!(resolve(&law, seed, i), expected);
            }
        }
    }

    #[test]
    fn first_coordinate_is_geometric() {
        let m = MeasureDescriptor::mu_g();
        let seeds = seed_range(1000, 10_000);
        let bins = 8;
        let hist = first_coordinate_histogram(&m, &seeds, bins).unwrap();
        let probs = coordinate_probabilities(&m, bins).unwrap();
        let n = seeds.len() as f64;
        for (o, p) in hist.iter().zip(&probs) {
            let p = p.to_f64();
            let z = (*o as f64 / n - p) / (p * (1.0 - p) / n).sqrt();
            assert!(z.abs() <= 3.0, "bin z = {z}");
        }
        let expected: Vec<f64> = probs.iter().map(|p| p.to_f64() * n).collect();
        let stat = pearson_statistic(&hist, &expected);
        let chi = ChiSquared::new((bins - 1) as f64).unwrap();
        assert!(chi.sf(stat) > 0.001, "chi-square {stat}");
    }

    #[test]
    fn family_coordinate_law() {
        let m = MeasureDescriptor::mu_a_g("1/8".parse().unwrap());
        let seeds = seed_range(0, 10_000);
        let hist = first_coordinate_histogram(&m, &seeds, 6).unwrap();
        let probs = coordinate_probabilities(&m, 6).unwrap();
        assert_eq!(probs[0], "1/8".parse().unwrap());
        assert_eq!(probs[1], "5/8".parse().unwrap());
        let expected: Vec<f64> = probs.iter().map(|p| p.to_f64() * 10_000.0).collect();
        let chi = ChiSquared::new(5.0).unwrap();
        assert!(chi.sf(pearson_statistic(&hist, &expected)) > 0.001);
    }

    /// Pairs (k_1 under seed s, k_1 under seed s + 1): a 4×4 contingency
    /// table against the product of geometric laws.
    #[test]
    fn distinct_seeds_are_independent() {
        let law = MeasureDescriptor::GeomGamma;
        let n = 10_000u64;
        let mut table = vec![0u64; 16];
        for s in 0..n {
            let a = resolve(&law, 2 * s, 1).min(4) - 1;
            let b = resolve(&law, 2 * s + 1, 1).min(4) - 1;
            table[(a * 4 + b) as usize] += 1;
        }
        let marg = [0.5, 0.25, 0.125, 0.125];
        let expected: Vec<f64> = (0..16)
            .map(|c| marg[c / 4] * marg[c % 4] * n as f64)
            .collect();
        let chi = ChiSquared::new(15.0).unwrap();
        assert!(chi.sf(pearson_statistic(&table, &expected)) > 0.001);
    }

    #[test]
    fn frequencies_match_exact_values() {
        let m = MeasureDescriptor::mu_g();
        let words = vec![Word::identity(), w("a"), w("abAB"), y("y2"), y("y1^2")];
        let seeds = seed_range(0, 10_000);
        let mat = membership_matrix(&m, &seeds, &words, DEFAULT_TOLERANCE_EXP).unwrap();
        assert_eq!(mat.frequencies[0], 1.0);
        assert_eq!(mat.frequencies[1], 0.0);
        let refs: Vec<ProbabilityValue> = words
            .iter()
            .map(|v| env_prob(&m, &EnvEvent::single(v.clone()), &Dyadic::pow2_neg(32)).unwrap())
            .collect();
        let report = chi_square_report(&words, &mat.frequencies, &refs, 10_000).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn z_formula() {
        let words = [w("abAB")];
        let exact = [ProbabilityValue::Exact("4732/2^14".parse().unwrap())];
        let ok = chi_square_report(&words, &[0.289], &exact, 10_000).unwrap();
        assert!(ok.pass && ok.rows[0].z.abs() < 0.1);
        let bad = chi_square_report(&words, &[0.35], &exact, 10_000).unwrap();
        assert!(!bad.pass && (bad.rows[0].z - 13.5).abs() < 0.2);
        let perfect = chi_square_report(&words, &[4732.0 / 16384.0], &exact, 10_000).unwrap();
        assert_eq!(perfect.rows[0].z, 0.0);
        let wide = [ProbabilityValue::from_interval(
            crate::exactnum::Interval::new(Dyadic::pow2_neg(2), Dyadic::pow2_neg(1)),
            false,
        )];
        assert!(chi_square_report(&words, &[0.3], &wide, 10_000).is_err());
        assert!(chi_square_report(&words, &[0.3], &exact, 99).is_err());
    }

    #[test]
    fn members_form_subgroups_inside_the_commutator() {
        let candidates: Vec<Word> = words_up_to(8)
            .into_iter()
            .filter(|v| !v.is_identity() && v.in_commutator())
            .collect();
        let law = MeasureDescriptor::GeomGamma;
        let queries: Vec<MembershipQuery> = candidates
            .iter()
            .map(|v| MembershipQuery::new(&law, v, DEFAULT_TOLERANCE_EXP).unwrap())
            .collect();
        let mut trials = 0;
        let mut seed = 0;
        while trials < 10_000 {
            let mut delta = mu_g_sample(seed);
            seed += 1;
            let members: Vec<&Word> = candidates
                .iter()
                .zip(&queries)
                .filter(|(_, q)| delta.member_query(q))
                .map(|(v, _)| v)
                .collect();
            for v in &members {
                assert_eq!(v.abelianize(), (0, 0));
            }
            for pair in members.windows(2).take(200) {
                let (u, v) = (pair[0], pair[1]);
                assert!(
                    delta.member(&u.multiply(v)).unwrap(),
                    "seed {} {u} {v}",
                    seed - 1
                );
                assert!(delta.member(&u.invert()).unwrap(), "seed {} {u}", seed - 1);
                trials += 1;
            }
            if seed > 5_000 {
                break;
            }
        }
        assert!(trials >= 10_000, "only {trials} trials");
    }

    #[test]
    fn conjugate_frequencies_agree() {
        let m = MeasureDescriptor::mu_g();
        let base = w("abAB");
        let seeds = seed_range(77, 10_000);
        for g in ["a", "b", "ab", "aBAb", "bbbb"] {
            let g = w(g);
            let conj = base.conjugate_by(&g.invert());
            let mat = membership_matrix(&m, &seeds, &[base.clone(), conj], DEFAULT_TOLERANCE_EXP)
                .unwrap();
            let (p1, p2) = (mat.frequencies[0], mat.frequencies[1]);
            let p = (p1 + p2) / 2.0;
            let sigma = (2.0 * p * (1.0 - p) / 10_000.0).sqrt();
            assert!((p1 - p2).abs() <= 3.0 * sigma, "g = {g}: {p1} vs {p2}");
        }
    }
}
