//! Verification suites over the constructed measures, shared by the command
//! line, the acceptance tests and the Python bindings. Reports carry no
//! timings so that reruns serialize to identical bytes.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cohenlyndon::{depth, expand, Depth, YWord};
use crate::error::Error;
use crate::exactnum::{Dyadic, ProbabilityValue};
use crate::freegroup::{words_up_to, Word};
use crate::measures::{
    check_combination_identities, env_prob, essential, kernel_contains, mixing_defect,
    supported_in, CertifiedBool, EnvEvent, MeasureDescriptor, SymbolicGroup,
};
use crate::sampler::{chi_square_report, membership_matrix, seed_range, ChiSquareReport};

/// Instance and convention statement embedded in every report.
pub fn instance_description() -> Value {
    json!({
        "group": "F2 = <a, b>",
        "normal_generator": "[a,b] = abAB",
        "subgroups": "F = F2', H = N = <[a,b]>, m = 1, S = {e}",
        "transversal": "t_i = a^p b^q, i = idx(p, q) along the square spiral",
        "convention": "g acts on subgroups by D -> g D g^-1, so g_*mu(Env w) = mu(Env g^-1 w g)",
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Faithful,
    Invariance,
    Closure,
    ChainLimits,
    Combination,
    Mixing,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Faithful,
        Suite::Invariance,
        Suite::Closure,
        Suite::ChainLimits,
        Suite::Combination,
        Suite::Mixing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Faithful => "faithful",
            Suite::Invariance => "invariance",
            Suite::Closure => "closure",
            Suite::ChainLimits => "chain-limits",
            Suite::Combination => "combination",
            Suite::Mixing => "mixing",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite, Error> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidDescriptor(format!("unknown suite {s:?}")))
    }
}

/// Knobs shared by the suites; each suite reads the ones it needs.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteParams {
    pub max_len: usize,
    pub n: u32,
    pub pairs: usize,
    pub sample: usize,
    pub seed: u64,
    pub width: Dyadic,
    pub shift: i64,
}

impl Default for SuiteParams {
    fn default() -> SuiteParams {
        SuiteParams {
            max_len: 8,
            n: 10,
            pairs: 100,
            sample: 200,
            seed: 0,
            width: Dyadic::pow2_neg(20),
            shift: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: Value) -> Check {
        Check {
            name: name.into(),
            pass,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub params: Value,
    pub checks: Vec<Check>,
    pub failures: usize,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: Suite, params: Value, checks: Vec<Check>) -> SuiteReport {
        let failures = checks.iter().filter(|c| !c.pass).count();
        SuiteReport {
            suite,
            params,
            checks,
            failures,
            pass: failures == 0,
        }
    }
}

pub fn run_suite(suite: Suite, p: &SuiteParams) -> Result<SuiteReport, Error> {
    match suite {
        Suite::Faithful => faithful(p.max_len),
        Suite::Invariance => invariance(p.pairs, p.max_len.min(6), p.seed, &p.width),
        Suite::Closure => closure(),
        Suite::ChainLimits => chain_limits(p.n),
        Suite::Combination => combination(p.sample, p.seed),
        Suite::Mixing => mixing(p.shift, &p.width),
    }
}

fn y(s: &str) -> Word {
    expand(&s.parse::<YWord>().expect("literal y-word"))
}

/// Every nontrivial reduced word up to `max_len` lies outside ker(μ_G).
///
/// Words in F2' are certified by the first factor 1 − 2^-depth(w) < 1, words
/// outside F2' by μ_G(Env w) = 0. Only failures are itemized.
pub fn faithful(max_len: usize) -> Result<SuiteReport, Error> {
    let g = MeasureDescriptor::mu_g();
    let mut checked = 0u64;
    let mut outside = 0u64;
    let mut worst = Dyadic::zero();
    let mut checks = Vec::new();
    for w in words_up_to(max_len)
        .into_iter()
        .filter(|w| !w.is_identity())
    {
        checked += 1;
        let verdict = kernel_contains(&g, &w)?;
        let bound = if w.in_commutator() {
            match depth(&w)? {
                Depth::Finite(k) => Dyadic::one() - Dyadic::pow2_neg(k),
                Depth::Infinite => Dyadic::one(),
            }
        } else {
            outside += 1;
            Dyadic::zero()
        };
        if verdict != CertifiedBool::False || bound.is_one() {
            checks.push(Check::new(
                format!("kernel excludes {w}"),
                false,
                json!({ "verdict": verdict, "bound": bound }),
            ));
        }
        worst = worst.max(bound);
    }
    checks.insert(
        0,
        Check::new(
            "no nontrivial word in the kernel",
            checks.is_empty(),
            json!({
                "words": checked,
                "outside_commutator": outside,
                "largest_certified_upper_bound": worst,
            }),
        ),
    );
    Ok(SuiteReport::new(
        Suite::Faithful,
        json!({ "max_len": max_len }),
        checks,
    ))
}

/// Random pairs (g, w): the enclosures of μ_G(Env w) and μ_G(Env g⁻¹wg)
/// must intersect.
pub fn invariance(
    pairs: usize,
    max_len: usize,
    seed: u64,
    width: &Dyadic,
) -> Result<SuiteReport, Error> {
    let g_pool: Vec<Word> = words_up_to(max_len);
    let w_pool: Vec<Word> = g_pool
        .iter()
        .filter(|w| !w.is_identity() && w.in_commutator())
        .cloned()
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let m = MeasureDescriptor::mu_g();
    let mut checks = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let g = g_pool.choose(&mut rng).expect("nonempty pool").clone();
        let w = w_pool.choose(&mut rng).expect("nonempty pool").clone();
        let moved = w.conjugate_by(&g.invert());
        let p = env_prob(&m, &EnvEvent::single(w.clone()), width)?;
        let q = env_prob(&m, &EnvEvent::single(moved.clone()), width)?;
        let pass = p.width_reached() && q.width_reached() && p.interval().intersects(&q.interval());
        checks.push(Check::new(
            format!("g = {g}, w = {w}"),
            pass,
            json!({ "conjugate": moved, "w": p, "conjugate_value": q }),
        ));
    }
    Ok(SuiteReport::new(
        Suite::Invariance,
        json!({ "pairs": pairs, "max_len": max_len, "seed": seed, "width": width }),
        checks,
    ))
}

/// ⟨μ_G⟩ = F2': [a,b] is essential, a is not, the measure lives on F2' and
/// is not the trivial IRS.
pub fn closure() -> Result<SuiteReport, Error> {
    let m = MeasureDescriptor::mu_g();
    let ess_n = essential(&m, &Word::base_commutator())?;
    let ess_a = essential(&m, &"a".parse()?)?;
    let in_f = supported_in(&m, SymbolicGroup::Commutator)?;
    let trivial = supported_in(&m, SymbolicGroup::Trivial)?;
    let checks = vec![
        Check::new(
            "[a,b] is essential",
            ess_n.is_true(),
            json!({ "verdict": ess_n }),
        ),
        Check::new("supported in F2'", in_f, json!({ "value": in_f })),
        Check::new(
            "a is not essential",
            ess_a.is_false(),
            json!({ "verdict": ess_a }),
        ),
        Check::new(
            "not supported in the trivial group",
            !trivial,
            json!({ "value": trivial }),
        ),
    ];
    Ok(SuiteReport::new(Suite::Closure, json!({}), checks))
}

/// The words used by the chain-limit laws.
pub fn chain_limit_words() -> Vec<Word> {
    vec![Word::base_commutator(), y("y2"), y("y3 y1 y3^-1 y1^-1")]
}

/// (1 − 2⁻ᴷ)ⁿ and 1 − 2⁻ⁿᴷ, exactly, for n = 1..=max_n.
pub fn chain_limits(max_n: u32) -> Result<SuiteReport, Error> {
    let base = MeasureDescriptor::mu_f();
    let mut checks = Vec::new();
    for w in chain_limit_words() {
        let Depth::Finite(k) = depth(&w)? else {
            unreachable!("nontrivial word");
        };
        let event = EnvEvent::single(w.clone());
        let (mut prev_i, mut prev_g) = (Dyadic::one(), Dyadic::zero());
        for n in 1..=max_n {
            let inter = env_prob(
                &MeasureDescriptor::intersect_power(n, base.clone()),
                &event,
                &Dyadic::zero(),
            )?;
            let gen = env_prob(
                &MeasureDescriptor::generate_power(n, base.clone()),
                &event,
                &Dyadic::zero(),
            )?;
            let want_i = (Dyadic::one() - Dyadic::pow2_neg(k)).pow(n);
            let want_g = Dyadic::one() - Dyadic::pow2_neg(n as u64 * k);
            let (Some(vi), Some(vg)) = (inter.exact().cloned(), gen.exact().cloned()) else {
                checks.push(Check::new(
                    format!("{w}, n = {n}"),
                    false,
                    json!({ "error": "inexact" }),
                ));
                continue;
            };
            let pass = vi == want_i && vg == want_g && vi < prev_i && vg > prev_g;
            checks.push(Check::new(
                format!("{w}, n = {n}"),
                pass,
                json!({ "depth": k, "intersect": vi, "generate": vg }),
            ));
            prev_i = vi;
            prev_g = vg;
        }
    }
    Ok(SuiteReport::new(
        Suite::ChainLimits,
        json!({ "n": max_n }),
        checks,
    ))
}

/// A reproducible mix of short words: the identity, words in F2' and
/// arbitrary words.
pub fn word_sample(size: usize, seed: u64) -> Vec<Word> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let all = words_up_to(6);
    let comm: Vec<Word> = words_up_to(10)
        .into_iter()
        .filter(|w| !w.is_identity() && w.in_commutator())
        .collect();
    let mut out = vec![Word::identity()];
    while out.len() < size {
        let pool = if out.len() % 2 == 0 { &all } else { &comm };
        out.push(pool.choose(&mut rng).expect("nonempty pool").clone());
    }
    out.truncate(size);
    out
}

/// ker(½μ₁+½μ₂) = ker μ₁ ∩ ker μ₂ and friends, on two measure pairs.
pub fn combination(sample: usize, seed: u64) -> Result<SuiteReport, Error> {
    let words = word_sample(sample, seed);
    let pairs = [
        (
            MeasureDescriptor::GeomGamma,
            MeasureDescriptor::DiracTrivial,
        ),
        (
            MeasureDescriptor::GeomGamma,
            MeasureDescriptor::mu_a_f(Dyadic::pow2_neg(2)),
        ),
    ];
    let mut checks = Vec::new();
    for (m1, m2) in pairs {
        let r = check_combination_identities(&m1, &m2, &words, 3)?;
        let failing: Vec<String> = r
            .rows
            .iter()
            .filter(|x| !x.pass)
            .map(|x| x.word.to_string())
            .collect();
        checks.push(Check::new(
            format!("{} with {}", m1.to_json(), m2.to_json()),
            r.pass,
            json!({ "words": words.len(), "failures": failing }),
        ));
    }
    Ok(SuiteReport::new(
        Suite::Combination,
        json!({ "sample": sample, "seed": seed, "power": 3 }),
        checks,
    ))
}

/// The dependent value p(1 − p) at shift e, where p = μ_G(Env [a,b]).
pub const MIXING_SELF_TOLERANCE: f64 = 1e-4;
pub const MIXING_FAR_BOUND: f64 = 1e-6;

/// Independence defect of [a,b] against its aˢʰⁱᶠᵗ-conjugate, next to the
/// dependent case of no shift. A proxy for weak mixing, not a proof of it.
pub fn mixing(shift: i64, width: &Dyadic) -> Result<SuiteReport, Error> {
    let n = Word::base_commutator();
    let g = Word::a_pow_b_pow(shift, 0);
    let far = mixing_defect(&n, &n, &g, width)?;
    let near = mixing_defect(&n, &n, &Word::identity(), width)?;
    let p = env_prob(
        &MeasureDescriptor::mu_g(),
        &EnvEvent::single(n.clone()),
        width,
    )?;
    // p − p² on the enclosure of p
    let (lo, hi) = p.interval().approx();
    let dependent = (lo * (1.0 - lo), hi * (1.0 - hi));
    let (near_lo, near_hi) = near.approx();
    let far_hi = far.hi.to_f64();
    let self_ok = (near_lo - dependent.1).abs() <= MIXING_SELF_TOLERANCE
        && (near_hi - dependent.0).abs() <= MIXING_SELF_TOLERANCE;
    let checks = vec![
        Check::new(
            format!("defect at shift a^{shift} is at most 1e-6"),
            far_hi <= MIXING_FAR_BOUND,
            json!({ "defect": far }),
        ),
        Check::new(
            "defect at shift e equals p(1 - p)",
            self_ok && near_lo > MIXING_FAR_BOUND,
            json!({ "defect": near, "p": p, "p_times_one_minus_p": [dependent.1, dependent.0] }),
        ),
    ];
    Ok(SuiteReport::new(
        Suite::Mixing,
        json!({ "shift": shift, "width": width, "note": "finite independence proxy, not a certificate of weak mixing" }),
        checks,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    pub measure: MeasureDescriptor,
    pub base_seed: u64,
    pub samples: u64,
    pub tolerance_exp: u64,
    pub reference_width: Dyadic,
    pub words: Vec<Word>,
    pub counts: Vec<u64>,
    pub statistics: ChiSquareReport,
    pub pass: bool,
}

/// Samples seeds base_seed, base_seed + 1, … and compares member()
/// frequencies with the exact envelope probabilities.
pub fn sample_report(
    measure: &MeasureDescriptor,
    samples: u64,
    base_seed: u64,
    words: &[Word],
    tolerance_exp: u64,
) -> Result<(SampleReport, crate::sampler::MembershipMatrix), Error> {
    let seeds = seed_range(base_seed, samples);
    let matrix = membership_matrix(measure, &seeds, words, tolerance_exp)?;
    let reference_width = Dyadic::pow2_neg(32);
    let refs = words
        .iter()
        .map(|w| env_prob(measure, &EnvEvent::single(w.clone()), &reference_width))
        .collect::<Result<Vec<ProbabilityValue>, Error>>()?;
    let statistics = chi_square_report(words, &matrix.frequencies, &refs, samples)?;
    let report = SampleReport {
        measure: measure.clone(),
        base_seed,
        samples,
        tolerance_exp,
        reference_width,
        words: words.to_vec(),
        counts: matrix.counts.clone(),
        pass: statistics.pass,
        statistics,
    };
    Ok((report, matrix))
}

/// The words of the sampler fidelity check: e, a, [a,b], y₂ and y₁².
pub fn fidelity_words() -> Vec<Word> {
    vec![
        Word::identity(),
        Word::generator(crate::freegroup::Generator::A),
        Word::base_commutator(),
        y("y2"),
        y("y1^2"),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyRow {
    pub a: Dyadic,
    pub value: ProbabilityValue,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub word: Word,
    pub width: Dyadic,
    pub rows: Vec<FamilyRow>,
    /// Enclosures strictly increase with a and are pairwise disjoint.
    pub strictly_increasing: bool,
    pub widths_reached: bool,
}

/// μ_{a,G}(Env w) for each a, in the given order.
pub fn family(a_values: &[Dyadic], w: &Word, width: &Dyadic) -> Result<FamilyReport, Error> {
    let mut rows = Vec::with_capacity(a_values.len());
    for a in a_values {
        let m = MeasureDescriptor::mu_a_g(a.clone());
        m.validate()?;
        rows.push(FamilyRow {
            a: a.clone(),
            value: env_prob(&m, &EnvEvent::single(w.clone()), width)?,
        });
    }
    let strictly_increasing = rows
        .windows(2)
        .all(|p| p[0].a < p[1].a && p[0].value.hi() < p[1].value.lo());
    let widths_reached = rows.iter().all(|r| r.value.width_reached());
    Ok(FamilyReport {
        word: w.clone(),
        width: width.clone(),
        rows,
        strictly_increasing,
        widths_reached,
    })
}
