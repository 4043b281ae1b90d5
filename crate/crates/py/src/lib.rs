//! Python bindings. Words are plain strings over a, b, A, B ("" or "e" is
//! the identity), measures are names such as "mu_G" or JSON descriptors,
//! and exact numbers travel as "n/2^e" strings next to float renderings.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use irslab_core::cohenlyndon::{self, Depth, YWord};
use irslab_core::exactnum::{Dyadic, ProbabilityValue};
use irslab_core::freegroup::{self, Word};
use irslab_core::grid::{self, GridPoint, TransversalIndex};
use irslab_core::measures::{self, CertifiedBool, EnvEvent, MeasureDescriptor, SymbolicGroup};
use irslab_core::{sampler, suites};

fn err(e: irslab_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn word(s: &str) -> PyResult<Word> {
    s.parse().map_err(err)
}

fn measure(s: &str) -> PyResult<MeasureDescriptor> {
    MeasureDescriptor::parse(s).map_err(err)
}

#[derive(FromPyObject)]
enum Width {
    Number(f64),
    Text(String),
}

impl Width {
    fn dyadic(self) -> PyResult<Dyadic> {
        let d = match self {
            Width::Number(x) => Dyadic::pow2_at_most(x),
            Width::Text(s) => s
                .parse::<Dyadic>()
                .ok()
                .or_else(|| s.trim().parse::<f64>().ok().and_then(Dyadic::pow2_at_most)),
        };
        d.filter(|d| !d.is_zero() && !d.is_negative())
            .ok_or_else(|| PyValueError::new_err("width must be a positive number"))
    }
}

#[derive(FromPyObject)]
enum Words {
    One(String),
    Many(Vec<String>),
}

impl Words {
    fn event(self) -> PyResult<EnvEvent> {
        let raw = match self {
            Words::One(s) => vec![s],
            Words::Many(v) => v,
        };
        Ok(EnvEvent::new(
            raw.iter().map(|s| word(s)).collect::<PyResult<Vec<_>>>()?,
        ))
    }
}

/// An exact probability or a certified enclosure [lo, hi].
#[pyclass(name = "Probability", frozen)]
struct PyProbability {
    inner: ProbabilityValue,
}

#[pymethods]
impl PyProbability {
    /// The exact value as "n/2^e", or None for an enclosure.
    #[getter]
    fn exact(&self) -> Option<String> {
        self.inner.exact().map(ToString::to_string)
    }

    #[getter]
    fn lo(&self) -> String {
        self.inner.lo().to_string()
    }

    #[getter]
    fn hi(&self) -> String {
        self.inner.hi().to_string()
    }

    #[getter]
    fn width_reached(&self) -> bool {
        self.inner.width_reached()
    }

    /// (lo, hi) as floats.
    #[getter]
    fn bounds(&self) -> (f64, f64) {
        self.inner.interval().approx()
    }

    fn contains(&self, x: f64) -> bool {
        self.inner.contains_f64(x)
    }

    fn __float__(&self) -> f64 {
        self.inner.approx()
    }

    fn __repr__(&self) -> String {
        match self.inner.exact() {
            Some(p) => format!("Probability(exact={p})"),
            None => {
                let (lo, hi) = self.bounds();
                format!(
                    "Probability([{lo:.12}, {hi:.12}], width_reached={})",
                    self.width_reached()
                )
            }
        }
    }
}

fn prob(inner: ProbabilityValue) -> PyProbability {
    PyProbability { inner }
}

fn tri(b: CertifiedBool) -> Option<bool> {
    match b {
        CertifiedBool::True => Some(true),
        CertifiedBool::False => Some(false),
        CertifiedBool::Unknown => None,
    }
}

/// Freely reduced form.
#[pyfunction]
fn reduce(w: &str) -> PyResult<String> {
    Ok(word(w)?.to_string())
}

#[pyfunction]
fn multiply(u: &str, v: &str) -> PyResult<String> {
    Ok(word(u)?.multiply(&word(v)?).to_string())
}

#[pyfunction]
fn invert(w: &str) -> PyResult<String> {
    Ok(word(w)?.invert().to_string())
}

/// g w g⁻¹.
#[pyfunction]
fn conjugate(g: &str, w: &str) -> PyResult<String> {
    Ok(freegroup::conjugate(&word(g)?, &word(w)?).to_string())
}

/// u v u⁻¹ v⁻¹.
#[pyfunction]
fn commutator(u: &str, v: &str) -> PyResult<String> {
    Ok(freegroup::commutator(&word(u)?, &word(v)?).to_string())
}

#[pyfunction]
fn abelianize(w: &str) -> PyResult<(i64, i64)> {
    Ok(word(w)?.abelianize())
}

#[pyfunction]
fn in_commutator(w: &str) -> PyResult<bool> {
    Ok(word(w)?.in_commutator())
}

/// Spiral index of the grid point (p, q).
#[pyfunction]
fn idx(p: i64, q: i64) -> u64 {
    grid::idx(GridPoint::new(p, q)).get()
}

#[pyfunction]
fn point(i: u64) -> PyResult<(i64, i64)> {
    let x = grid::point_of(i).map_err(err)?;
    Ok((x.p, x.q))
}

/// The y-spelling of w ∈ F2' as (index, exponent) syllables.
#[pyfunction]
fn rewrite_to_y(w: &str) -> PyResult<Vec<(u64, i64)>> {
    let v = cohenlyndon::rewrite_to_y(&word(w)?).map_err(err)?;
    Ok(v.syllables().iter().map(|(i, e)| (i.get(), *e)).collect())
}

#[pyfunction]
fn expand(syllables: Vec<(u64, i64)>) -> PyResult<String> {
    let mut v = YWord::empty();
    for (i, e) in syllables {
        v.push(TransversalIndex::new(i).map_err(err)?, e);
    }
    Ok(cohenlyndon::expand(&v).to_string())
}

/// Largest k with w ∈ Γ_k; None for the identity.
#[pyfunction]
fn depth(w: &str) -> PyResult<Option<u64>> {
    Ok(match cohenlyndon::depth(&word(w)?).map_err(err)? {
        Depth::Finite(k) => Some(k),
        Depth::Infinite => None,
    })
}

#[pyfunction]
fn in_gamma(w: &str, k: u64) -> PyResult<bool> {
    Ok(cohenlyndon::in_gamma(&word(w)?, k))
}

/// μ(Env{w₁, …}) for a word or a list of words.
#[pyfunction]
#[pyo3(signature = (measure_name, words, width = Width::Number(1e-6)))]
fn env_prob(measure_name: &str, words: Words, width: Width) -> PyResult<PyProbability> {
    let m = measure(measure_name)?;
    let v = measures::env_prob(&m, &words.event()?, &width.dyadic()?).map_err(err)?;
    Ok(prob(v))
}

/// True, False, or None when the enclosures could not decide.
#[pyfunction]
fn kernel_contains(measure_name: &str, w: &str) -> PyResult<Option<bool>> {
    Ok(tri(measures::kernel_contains(
        &measure(measure_name)?,
        &word(w)?,
    )
    .map_err(err)?))
}

#[pyfunction]
fn essential(measure_name: &str, w: &str) -> PyResult<Option<bool>> {
    Ok(tri(
        measures::essential(&measure(measure_name)?, &word(w)?).map_err(err)?
    ))
}

/// `group` is "trivial", "commutator" or "whole".
#[pyfunction]
fn supported_in(measure_name: &str, group: &str) -> PyResult<bool> {
    let g: SymbolicGroup = group.parse().map_err(err)?;
    measures::supported_in(&measure(measure_name)?, g).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (w1, w2, shift, width = Width::Number(1e-6)))]
fn mixing_defect(w1: &str, w2: &str, shift: &str, width: Width) -> PyResult<PyProbability> {
    let i = measures::mixing_defect(&word(w1)?, &word(w2)?, &word(shift)?, &width.dyadic()?)
        .map_err(err)?;
    Ok(prob(ProbabilityValue::from_interval(i, true)))
}

/// Runs a verification suite and returns its JSON report.
#[pyfunction]
#[pyo3(signature = (name, max_len = 8, n = 10, pairs = 100, sample = 200, seed = 0, width = Width::Number(1e-6), shift = 10))]
#[allow(clippy::too_many_arguments)]
fn run_suite(
    name: &str,
    max_len: usize,
    n: u32,
    pairs: usize,
    sample: usize,
    seed: u64,
    width: Width,
    shift: i64,
) -> PyResult<String> {
    let suite: suites::Suite = name.parse().map_err(err)?;
    let params = suites::SuiteParams {
        max_len,
        n,
        pairs,
        sample,
        seed,
        width: width.dyadic()?,
        shift,
    };
    let report = suites::run_suite(suite, &params).map_err(err)?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

/// A sample of a co-induced chain IRS with lazily drawn coordinates.
#[pyclass(name = "SampledSubgroup")]
struct PySampledSubgroup {
    inner: sampler::SampledSubgroup,
}

#[pymethods]
impl PySampledSubgroup {
    #[new]
    #[pyo3(signature = (seed = 0, measure_name = "mu_G", tolerance_exp = sampler::DEFAULT_TOLERANCE_EXP))]
    fn new(seed: u64, measure_name: &str, tolerance_exp: u64) -> PyResult<PySampledSubgroup> {
        let inner = sampler::sample(&measure(measure_name)?, seed)
            .map_err(err)?
            .with_tolerance_exp(tolerance_exp);
        Ok(PySampledSubgroup { inner })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    /// k_i for transversal index i ≥ 1.
    fn coordinate(&mut self, i: u64) -> PyResult<u64> {
        Ok(self
            .inner
            .coordinate(TransversalIndex::new(i).map_err(err)?))
    }

    fn member(&mut self, w: &str) -> PyResult<bool> {
        self.inner.member(&word(w)?).map_err(err)
    }

    /// The coordinates drawn so far.
    #[getter]
    fn resolved(&self) -> BTreeMap<u64, u64> {
        self.inner.resolved().clone()
    }
}

/// Frequencies of membership over consecutive seeds, as a JSON report.
#[pyfunction]
#[pyo3(signature = (words, n = 10_000, seed = 0, measure_name = "mu_G", tolerance_exp = sampler::DEFAULT_TOLERANCE_EXP))]
fn sample_report(
    words: Vec<String>,
    n: u64,
    seed: u64,
    measure_name: &str,
    tolerance_exp: u64,
) -> PyResult<String> {
    let ws = words
        .iter()
        .map(|s| word(s))
        .collect::<PyResult<Vec<_>>>()?;
    let (report, _) =
        suites::sample_report(&measure(measure_name)?, n, seed, &ws, tolerance_exp).map_err(err)?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[pymodule]
fn irslab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProbability>()?;
    m.add_class::<PySampledSubgroup>()?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(multiply, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(conjugate, m)?)?;
    m.add_function(wrap_pyfunction!(commutator, m)?)?;
    m.add_function(wrap_pyfunction!(abelianize, m)?)?;
    m.add_function(wrap_pyfunction!(in_commutator, m)?)?;
    m.add_function(wrap_pyfunction!(idx, m)?)?;
    m.add_function(wrap_pyfunction!(point, m)?)?;
    m.add_function(wrap_pyfunction!(rewrite_to_y, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(depth, m)?)?;
    m.add_function(wrap_pyfunction!(in_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(env_prob, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_contains, m)?)?;
    m.add_function(wrap_pyfunction!(essential, m)?)?;
    m.add_function(wrap_pyfunction!(supported_in, m)?)?;
    m.add_function(wrap_pyfunction!(mixing_defect, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(sample_report, m)?)?;
    Ok(())
}
