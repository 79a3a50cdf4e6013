//! Python bindings: populations, encounter-mating laws, exact distributions,
//! Markov solvers, classification, and the stochastic simulator.
//!
//! Matrices cross the boundary as lists of lists; pattern distributions come
//! back as `(pattern, probability)` pairs.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sem_core::classify;
use sem_core::dynamics;
use sem_core::engine::{self, SemModel};
use sem_core::exact;
use sem_core::law::{em_law, EmLaw, Flavor, PreferenceMatrix, RateVector};
use sem_core::population::{AnimalRoster, PopulationCounts};
use sem_core::table::{self, PairTypeMatrix};
use sem_core::verify;
use sem_core::SemError;

fn err(e: SemError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_flavor(name: &str) -> PyResult<Flavor> {
    match name.to_ascii_lowercase().as_str() {
        "poisson" => Ok(Flavor::Poisson),
        "bernoulli" => Ok(Flavor::Bernoulli),
        other => Err(PyValueError::new_err(format!(
            "flavor must be 'poisson' or 'bernoulli', got {other:?}"
        ))),
    }
}

fn pattern_rows(m: &PairTypeMatrix) -> Vec<Vec<u64>> {
    m.rows()
}

fn pattern_from_rows(rows: Vec<Vec<u64>>) -> PyResult<PairTypeMatrix> {
    PairTypeMatrix::from_rows(rows).map_err(err)
}

fn pmf_pairs(pmf: &exact::PmfOverTables) -> Vec<(Vec<Vec<u64>>, f64)> {
    pmf.iter().map(|(m, p)| (pattern_rows(m), p)).collect()
}

/// Per-type female and male headcounts with equal totals.
#[pyclass(frozen)]
struct Population {
    inner: PopulationCounts,
}

#[pymethods]
impl Population {
    #[new]
    fn new(x: Vec<u64>, y: Vec<u64>) -> PyResult<Self> {
        Ok(Self { inner: PopulationCounts::new(x, y).map_err(err)? })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n()
    }

    #[getter]
    fn x(&self) -> Vec<u64> {
        self.inner.female_counts().to_vec()
    }

    #[getter]
    fn y(&self) -> Vec<u64> {
        self.inner.male_counts().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Population(x={:?}, y={:?})", self.x(), self.y())
    }
}

/// An encounter-mating law: the matrix that determines the pattern process.
#[pyclass(frozen)]
struct Law {
    inner: EmLaw,
}

#[pymethods]
impl Law {
    /// Build directly from the law matrix.
    #[staticmethod]
    fn from_pi(flavor: &str, pi: Vec<Vec<f64>>) -> PyResult<Self> {
        let flavor = parse_flavor(flavor)?;
        Ok(Self { inner: EmLaw::from_pi(flavor, pi).map_err(err)? })
    }

    /// Fold mating preferences and firing rates into the law.
    #[staticmethod]
    fn from_parameters(
        flavor: &str,
        p: Vec<Vec<f64>>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
    ) -> PyResult<Self> {
        let flavor = parse_flavor(flavor)?;
        let preferences = PreferenceMatrix::new(p).map_err(err)?;
        let rates = RateVector::new(flavor, alpha, beta).map_err(err)?;
        Ok(Self { inner: em_law(&preferences, &rates).map_err(err)? })
    }

    #[getter]
    fn flavor(&self) -> String {
        format!("{:?}", self.inner.flavor()).to_lowercase()
    }

    #[getter]
    fn pi(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn __repr__(&self) -> String {
        format!("Law(flavor={:?}, pi={:?})", self.flavor(), self.pi())
    }
}

/// Outcome of one simulation run.
#[pyclass(frozen)]
struct Simulation {
    record: engine::SimulationRecord,
}

#[pymethods]
impl Simulation {
    #[getter]
    fn terminal_time(&self) -> f64 {
        self.record.terminal_time
    }

    #[getter]
    fn rounds(&self) -> u64 {
        self.record.rounds_elapsed
    }

    #[getter]
    fn pattern(&self) -> Vec<Vec<u64>> {
        pattern_rows(&self.record.terminal_pattern)
    }

    #[getter]
    fn pairs(&self) -> Vec<(usize, usize)> {
        self.record.terminal_pairlist.pairs().to_vec()
    }

    #[getter]
    fn jump_times(&self) -> Vec<f64> {
        self.record.jumps.iter().map(|j| j.time).collect()
    }
}

fn build_model(
    pop: &Population,
    flavor: &str,
    p: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
) -> PyResult<SemModel> {
    let flavor = parse_flavor(flavor)?;
    let preferences = PreferenceMatrix::new(p).map_err(err)?;
    let rates = RateVector::new(flavor, alpha, beta).map_err(err)?;
    match flavor {
        Flavor::Poisson => SemModel::poisson(pop.inner.clone(), preferences, rates),
        Flavor::Bernoulli => SemModel::bernoulli(pop.inner.clone(), preferences, rates),
    }
    .map_err(err)
}

/// All completed pattern tables of a population.
#[pyfunction]
fn enumerate_tables(pop: &Population) -> PyResult<Vec<Vec<Vec<u64>>>> {
    Ok(table::enumerate_tables(&pop.inner)
        .map_err(err)?
        .iter()
        .map(pattern_rows)
        .collect())
}

/// The full transient state space of a population.
#[pyfunction]
fn enumerate_states(pop: &Population) -> PyResult<Vec<Vec<Vec<u64>>>> {
    Ok(table::enumerate_states(&pop.inner)
        .map_err(err)?
        .iter()
        .map(pattern_rows)
        .collect())
}

/// Terminal pattern law under definite mating (multiple hypergeometric).
#[pyfunction]
fn terminal_pmf(pop: &Population) -> PyResult<Vec<(Vec<Vec<u64>>, f64)>> {
    let tables = table::enumerate_tables(&pop.inner).map_err(err)?;
    tables
        .iter()
        .map(|m| {
            exact::terminal_pmf_definite(&pop.inner, m)
                .map(|prob| (pattern_rows(m), prob))
                .map_err(err)
        })
        .collect()
}

/// Mass of one pattern at time t for a fine-balanced law.
#[pyfunction]
fn qt_pmf(pop: &Population, law: &Law, t: f64, pattern: Vec<Vec<u64>>) -> PyResult<f64> {
    let m = pattern_from_rows(pattern)?;
    exact::qt_pmf_finebalanced(&pop.inner, &law.inner, t, &m).map_err(err)
}

/// Expected pattern entry at time t for a fine-balanced law.
#[pyfunction]
fn expected_qt(pop: &Population, law: &Law, t: f64, i: usize, j: usize) -> PyResult<f64> {
    exact::expected_qt_finebalanced(&pop.inner, &law.inner, t, i, j).map_err(err)
}

/// Distribution of the pattern at time t for any law of the flavor.
#[pyfunction]
fn transient_distribution(
    pop: &Population,
    law: &Law,
    t: f64,
) -> PyResult<Vec<(Vec<Vec<u64>>, f64)>> {
    Ok(pmf_pairs(
        &dynamics::transient_distribution(&pop.inner, &law.inner, t).map_err(err)?,
    ))
}

/// Expected terminal pattern by the first-step recursion.
#[pyfunction]
fn terminal_expectation(pop: &Population, law: &Law) -> PyResult<Vec<Vec<f64>>> {
    dynamics::TerminalExpectationSolver::new(&law.inner)
        .expectation(&pop.inner)
        .map_err(err)
}

/// Exact terminal pattern law through the absorption lattice.
#[pyfunction]
fn terminal_pattern_pmf(pop: &Population, law: &Law) -> PyResult<Vec<(Vec<Vec<u64>>, f64)>> {
    Ok(pmf_pairs(
        &dynamics::terminal_pmf_absorbing(&pop.inner, &law.inner).map_err(err)?,
    ))
}

/// Whether the law satisfies its flavor's fine balance condition.
#[pyfunction]
#[pyo3(signature = (law, tol = 1e-9))]
fn check_fine_balance(law: &Law, tol: f64) -> bool {
    classify::check_fine_balance(&law.inner, tol)
}

/// (alpha_bar, beta_bar, female_relabel, male_relabel).
type DecompositionParts = (Vec<f64>, Vec<f64>, Vec<usize>, Vec<usize>);

/// Constructive decomposition of a fine-balanced law.
#[pyfunction]
fn decompose(law: &Law) -> PyResult<DecompositionParts> {
    let d = classify::decompose(&law.inner).map_err(err)?;
    Ok((d.alpha_bar, d.beta_bar, d.female_relabel, d.male_relabel))
}

/// The 2x2 trichotomy: ("heterogamous" | "panmictic" | "homogamous",
/// discriminant).
#[pyfunction]
#[pyo3(signature = (law, tol = 1e-9))]
fn classify_species(law: &Law, tol: f64) -> PyResult<(String, f64)> {
    let t = classify::classify_2x2(&law.inner, tol).map_err(err)?;
    let verdict = match t.verdict {
        classify::Verdict::Heterogamous => "heterogamous",
        classify::Verdict::Panmictic => "panmictic",
        classify::Verdict::Homogamous => "homogamous",
    };
    Ok((verdict.to_string(), t.discriminant))
}

/// One simulation run with a canonical roster.
#[pyfunction]
fn simulate(
    pop: &Population,
    flavor: &str,
    p: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    seed: u64,
) -> PyResult<Simulation> {
    let model = build_model(pop, flavor, p, alpha, beta)?;
    Ok(Simulation { record: engine::run_sem(&model, seed).map_err(err)? })
}

/// Terminal-pattern frequencies over independent runs.
#[pyfunction]
fn empirical_terminal_pmf(
    pop: &Population,
    flavor: &str,
    p: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    runs: u64,
    seed: u64,
) -> PyResult<Vec<(Vec<Vec<u64>>, f64)>> {
    let model = build_model(pop, flavor, p, alpha, beta)?;
    let (pmf, _) = verify::empirical_terminal_pmf(&model, runs, seed).map_err(err)?;
    Ok(pmf_pairs(&pmf))
}

/// Brute-force terminal law over all n! pair lists (n <= 8).
#[pyfunction]
fn permutation_oracle(pop: &Population) -> PyResult<Vec<(Vec<Vec<u64>>, f64)>> {
    let roster = AnimalRoster::canonical(&pop.inner);
    Ok(pmf_pairs(
        &verify::permutation_oracle_definite(&pop.inner, &roster).map_err(err)?,
    ))
}

#[pymodule]
fn sempy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Population>()?;
    m.add_class::<Law>()?;
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(enumerate_tables, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_states, m)?)?;
    m.add_function(wrap_pyfunction!(terminal_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(qt_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(expected_qt, m)?)?;
    m.add_function(wrap_pyfunction!(transient_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(terminal_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(terminal_pattern_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(check_fine_balance, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(classify_species, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_terminal_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(permutation_oracle, m)?)?;
    Ok(())
}
