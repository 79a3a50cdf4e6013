//! Closed-form pair-type distributions.
//!
//! Under definite mating the terminal pair-list is uniform over permutations,
//! so the mating pattern is multiple hypergeometric and the time-t law is a
//! binomial thinning of it driven by the first-firing CDFs. Fine-balanced
//! laws reduce to definite mating by a change of parameters, which yields the
//! same formulas with the thinning probability read off the law matrix.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::classify;
use crate::error::SemError;
use crate::law::{EmLaw, Flavor, RateVector};
use crate::numeric::LnFactorial;
use crate::population::PopulationCounts;
use crate::table::{enumerate_completions_capped, PairTypeMatrix, DEFAULT_STATE_CAP};

/// Relative tolerance at which fine balance is enforced before the
/// fine-balanced formulas are evaluated. The formulas are wrong off the fine
/// balance manifold, so misuse must fail loudly rather than silently.
pub const FINE_BALANCE_TOL: f64 = 1e-9;

pub type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Where a first-firing distribution lives: the half-line or the integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeSupport {
    Continuous,
    IntegerLattice,
}

/// Per-type CDFs of the first firing time of females (F_i) and males (G_j).
#[derive(Clone)]
pub struct FirstFiringCdf {
    support: TimeSupport,
    female: Vec<CdfFn>,
    male: Vec<CdfFn>,
}

impl fmt::Debug for FirstFiringCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FirstFiringCdf")
            .field("support", &self.support)
            .field("k", &self.female.len())
            .finish()
    }
}

impl FirstFiringCdf {
    /// Exponential first firings with the given Poisson intensities.
    pub fn exponential(rates: &RateVector) -> Result<Self, SemError> {
        if rates.flavor() != Flavor::Poisson {
            return Err(SemError::InvalidRates(
                "exponential first firings require Poisson rates".into(),
            ));
        }
        let cdf = |r: f64| -> CdfFn { Arc::new(move |t: f64| 1.0 - (-r * t).exp()) };
        Ok(Self {
            support: TimeSupport::Continuous,
            female: rates.alpha().iter().map(|&r| cdf(r)).collect(),
            male: rates.beta().iter().map(|&r| cdf(r)).collect(),
        })
    }

    /// Geometric first firings with the given Bernoulli success probabilities.
    pub fn geometric(rates: &RateVector) -> Result<Self, SemError> {
        if rates.flavor() != Flavor::Bernoulli {
            return Err(SemError::InvalidRates(
                "geometric first firings require Bernoulli probabilities".into(),
            ));
        }
        let cdf = |p: f64| -> CdfFn { Arc::new(move |t: f64| 1.0 - (1.0 - p).powf(t.floor())) };
        Ok(Self {
            support: TimeSupport::IntegerLattice,
            female: rates.alpha().iter().map(|&p| cdf(p)).collect(),
            male: rates.beta().iter().map(|&p| cdf(p)).collect(),
        })
    }

    /// Arbitrary per-type CDFs. Callers are responsible for supplying
    /// nondecreasing right-continuous functions that vanish at 0; values are
    /// clamped to [0, 1] on evaluation.
    pub fn from_functions(
        support: TimeSupport,
        female: Vec<CdfFn>,
        male: Vec<CdfFn>,
    ) -> Result<Self, SemError> {
        if female.len() != male.len() {
            return Err(SemError::DimensionMismatch(female.len(), male.len()));
        }
        Ok(Self { support, female, male })
    }

    pub fn support(&self) -> TimeSupport {
        self.support
    }

    pub fn k(&self) -> usize {
        self.female.len()
    }

    pub fn female_cdf(&self, i: usize, t: f64) -> f64 {
        (self.female[i])(t).clamp(0.0, 1.0)
    }

    pub fn male_cdf(&self, j: usize, t: f64) -> f64 {
        (self.male[j])(t).clamp(0.0, 1.0)
    }
}

/// Probability that a standing type-ij pair has seen at least one firing by
/// time t: F_i(t) + G_j(t) - F_i(t) G_j(t).
pub fn lambda_ij(cdfs: &FirstFiringCdf, i: usize, j: usize, t: f64) -> f64 {
    let f = cdfs.female_cdf(i, t);
    let g = cdfs.male_cdf(j, t);
    f + g - f * g
}

/// The same quantity induced by an encounter-mating law after reduction to
/// definite mating: 1 - e^{-pi t} (Poisson) or 1 - (1 - pi)^t (Bernoulli).
pub fn law_lambda(law: &EmLaw, i: usize, j: usize, t: f64) -> f64 {
    let pi = law.get(i, j);
    match law.flavor() {
        Flavor::Poisson => 1.0 - (-pi * t).exp(),
        Flavor::Bernoulli => 1.0 - (1.0 - pi).powf(t),
    }
}

/// A probability mass function over pair-type matrices.
///
/// Support is kept sorted by grand total and then row-major lexicographically,
/// so functions building the same distribution compare equal entry for entry.
#[derive(Debug, Clone, Serialize)]
pub struct PmfOverTables {
    support: Vec<PairTypeMatrix>,
    probs: Vec<f64>,
    #[serde(skip)]
    index: HashMap<PairTypeMatrix, usize>,
}

impl PmfOverTables {
    pub fn new(support: Vec<PairTypeMatrix>, probs: Vec<f64>) -> Result<Self, SemError> {
        if support.len() != probs.len() {
            return Err(SemError::DimensionMismatch(support.len(), probs.len()));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(SemError::InvalidLaw(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(SemError::InvalidLaw(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut order: Vec<usize> = (0..support.len()).collect();
        order.sort_by(|&a, &b| {
            support[a]
                .total()
                .cmp(&support[b].total())
                .then_with(|| crate::table::lex_cmp(&support[a], &support[b]))
        });
        let support: Vec<PairTypeMatrix> = order.iter().map(|&i| support[i].clone()).collect();
        let probs: Vec<f64> = order.iter().map(|&i| probs[i]).collect();
        let index = support
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        Ok(Self { support, probs, index })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[PairTypeMatrix] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mass of a given matrix, zero when outside the support.
    pub fn prob(&self, m: &PairTypeMatrix) -> f64 {
        self.index.get(m).map_or(0.0, |&i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairTypeMatrix, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    /// Mean of entry (i, j) under the pmf.
    pub fn mean_entry(&self, i: usize, j: usize) -> f64 {
        self.iter().map(|(m, p)| m.entry(i, j) as f64 * p).sum()
    }

    /// Total variation distance, accounting for support mismatches.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (m, p) in self.iter() {
            acc += (p - other.prob(m)).abs();
        }
        for (m, q) in other.iter() {
            if !self.index.contains_key(m) {
                acc += q;
            }
        }
        acc / 2.0
    }
}

fn ln_terminal_prefactor(pop: &PopulationCounts, m: &PairTypeMatrix, lf: &LnFactorial) -> f64 {
    let k = pop.k();
    let mut acc = -lf.get(pop.n());
    for i in 0..k {
        acc += lf.get(pop.female_count(i));
    }
    for j in 0..k {
        acc += lf.get(pop.male_count(j));
    }
    for i in 0..k {
        for j in 0..k {
            acc -= lf.get(m.entry(i, j));
        }
    }
    acc
}

/// Multiple hypergeometric mass of a completed table under definite mating:
/// (prod_i x_i!)(prod_j y_j!) / (n! prod_ij m_ij!), evaluated in log space.
pub fn terminal_pmf_definite(
    pop: &PopulationCounts,
    m: &PairTypeMatrix,
) -> Result<f64, SemError> {
    if !m.is_table_of(pop) {
        return Err(SemError::NotATable);
    }
    let lf = LnFactorial::up_to(pop.n());
    Ok(ln_terminal_prefactor(pop, m, &lf).exp())
}

/// Mass of the event "the pair-type matrix equals m at thinning level
/// lambda(i, j)": the hypergeometric prefactor times the sum over completed
/// tables above m of the per-entry thinning weights.
pub(crate) fn pattern_mass_with_lambda(
    pop: &PopulationCounts,
    lambda: &dyn Fn(usize, usize) -> f64,
    m: &PairTypeMatrix,
    cap: usize,
) -> Result<f64, SemError> {
    if !m.is_state_of(pop) {
        return Err(SemError::NotAState);
    }
    let k = pop.k();
    let lf = LnFactorial::up_to(pop.n());
    let ln_pre = ln_terminal_prefactor(pop, m, &lf);
    let mut kept = 1.0_f64;
    for i in 0..k {
        for j in 0..k {
            let mij = m.entry(i, j);
            if mij > 0 {
                kept *= lambda(i, j).powi(mij as i32);
            }
        }
    }
    if kept == 0.0 {
        return Ok(0.0);
    }
    let completions = enumerate_completions_capped(m, pop, cap)?;
    let mut sum = 0.0;
    for mp in &completions {
        let mut term = 1.0_f64;
        for i in 0..k {
            for j in 0..k {
                let d = mp.entry(i, j) - m.entry(i, j);
                if d > 0 {
                    term *= (1.0 - lambda(i, j)).powi(d as i32) * (-lf.get(d)).exp();
                }
            }
        }
        sum += term;
    }
    Ok(ln_pre.exp() * kept * sum)
}

fn check_time(t: f64, support: TimeSupport) -> Result<(), SemError> {
    if t < 0.0 || !t.is_finite() {
        return Err(SemError::NegativeTime(t));
    }
    if support == TimeSupport::IntegerLattice && t.fract() != 0.0 {
        return Err(SemError::NonIntegerTime(t));
    }
    Ok(())
}

/// Distribution of the pair-type matrix at time t under definite mating.
pub fn qt_pmf_definite(
    pop: &PopulationCounts,
    cdfs: &FirstFiringCdf,
    t: f64,
    m: &PairTypeMatrix,
) -> Result<f64, SemError> {
    if cdfs.k() != pop.k() {
        return Err(SemError::DimensionMismatch(cdfs.k(), pop.k()));
    }
    check_time(t, cdfs.support())?;
    pattern_mass_with_lambda(pop, &|i, j| lambda_ij(cdfs, i, j, t), m, DEFAULT_STATE_CAP)
}

/// Expected pair count of type (i, j) at time t under definite mating:
/// x_i y_j lambda_ij(t) / n. At full thinning this is the panmictic product
/// form x_i y_j / n.
pub fn expected_qt_definite(
    pop: &PopulationCounts,
    cdfs: &FirstFiringCdf,
    t: f64,
    i: usize,
    j: usize,
) -> Result<f64, SemError> {
    pop.require_nonempty()?;
    check_time(t, cdfs.support())?;
    let lam = lambda_ij(cdfs, i, j, t);
    Ok(pop.female_count(i) as f64 * pop.male_count(j) as f64 * lam / pop.n() as f64)
}

/// Time-t distribution for a fine-balanced law; rejects laws that fail the
/// fine balance check.
pub fn qt_pmf_finebalanced(
    pop: &PopulationCounts,
    law: &EmLaw,
    t: f64,
    m: &PairTypeMatrix,
) -> Result<f64, SemError> {
    if law.k() != pop.k() {
        return Err(SemError::DimensionMismatch(law.k(), pop.k()));
    }
    classify::require_fine_balance(law, FINE_BALANCE_TOL)?;
    let support = match law.flavor() {
        Flavor::Poisson => TimeSupport::Continuous,
        Flavor::Bernoulli => TimeSupport::IntegerLattice,
    };
    check_time(t, support)?;
    pattern_mass_with_lambda(pop, &|i, j| law_lambda(law, i, j, t), m, DEFAULT_STATE_CAP)
}

/// Expected pair count at time t for a fine-balanced law.
pub fn expected_qt_finebalanced(
    pop: &PopulationCounts,
    law: &EmLaw,
    t: f64,
    i: usize,
    j: usize,
) -> Result<f64, SemError> {
    pop.require_nonempty()?;
    classify::require_fine_balance(law, FINE_BALANCE_TOL)?;
    let support = match law.flavor() {
        Flavor::Poisson => TimeSupport::Continuous,
        Flavor::Bernoulli => TimeSupport::IntegerLattice,
    };
    check_time(t, support)?;
    let lam = law_lambda(law, i, j, t);
    Ok(pop.female_count(i) as f64 * pop.male_count(j) as f64 * lam / pop.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{enumerate_states, enumerate_tables};

    fn pop(x: &[u64], y: &[u64]) -> PopulationCounts {
        PopulationCounts::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn table(rows: Vec<Vec<u64>>) -> PairTypeMatrix {
        PairTypeMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn two_permutations_are_equally_likely() {
        let p = pop(&[1, 1], &[1, 1]);
        let m = table(vec![vec![1, 0], vec![0, 1]]);
        assert!((terminal_pmf_definite(&p, &m).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn forced_pattern_has_unit_mass() {
        let p = pop(&[2, 0], &[1, 1]);
        let m = table(vec![vec![1, 1], vec![0, 0]]);
        assert!((terminal_pmf_definite(&p, &m).unwrap() - 1.0).abs() < 1e-15);
    }

    // Brute force over all 3! = 6 permutations of a canonical roster with
    // female types (0,0,1) and male types (0,0,1): four permutations give the
    // mixed table, two give the diagonal one.
    #[test]
    fn three_animal_masses_match_permutation_counting() {
        let p = pop(&[2, 1], &[2, 1]);
        let diag = table(vec![vec![2, 0], vec![0, 1]]);
        let mixed = table(vec![vec![1, 1], vec![1, 0]]);
        assert!((terminal_pmf_definite(&p, &diag).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((terminal_pmf_definite(&p, &mixed).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn margin_mismatch_is_rejected() {
        let p = pop(&[1, 1], &[1, 1]);
        let m = table(vec![vec![1, 0], vec![0, 0]]);
        assert_eq!(terminal_pmf_definite(&p, &m).unwrap_err(), SemError::NotATable);
    }

    #[test]
    fn lambda_combines_cdfs() {
        let half: CdfFn = Arc::new(|_| 0.5);
        let cdfs = FirstFiringCdf::from_functions(
            TimeSupport::Continuous,
            vec![half.clone(), half.clone()],
            vec![half.clone(), half],
        )
        .unwrap();
        assert!((lambda_ij(&cdfs, 0, 1, 1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn exponential_lambda_is_one_minus_joint_survival() {
        let rates = RateVector::new(Flavor::Poisson, vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
        let cdfs = FirstFiringCdf::exponential(&rates).unwrap();
        for &t in &[0.0f64, 0.3, 1.5] {
            let expect = 1.0 - (-(1.0 + 4.0) * t).exp();
            assert!((lambda_ij(&cdfs, 0, 1, t) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn geometric_lambda_is_one_minus_joint_survival() {
        let rates =
            RateVector::new(Flavor::Bernoulli, vec![0.2, 0.5], vec![0.4, 0.9]).unwrap();
        let cdfs = FirstFiringCdf::geometric(&rates).unwrap();
        for t in 0..5u32 {
            let t = f64::from(t);
            let expect = 1.0 - (0.8f64 * 0.6).powf(t);
            assert!((lambda_ij(&cdfs, 0, 0, t) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn qt_at_time_zero_is_point_mass_at_zero_matrix() {
        let p = pop(&[1, 1], &[1, 1]);
        let rates = RateVector::new(Flavor::Poisson, vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let cdfs = FirstFiringCdf::exponential(&rates).unwrap();
        let zero = PairTypeMatrix::zero(2);
        assert!((qt_pmf_definite(&p, &cdfs, 0.0, &zero).unwrap() - 1.0).abs() < 1e-15);
        let one = table(vec![vec![1, 0], vec![0, 0]]);
        assert_eq!(qt_pmf_definite(&p, &cdfs, 0.0, &one).unwrap(), 0.0);
    }

    #[test]
    fn full_thinning_reduces_to_terminal_law() {
        let p = pop(&[2, 1], &[2, 1]);
        let one: CdfFn = Arc::new(|_| 1.0);
        let cdfs = FirstFiringCdf::from_functions(
            TimeSupport::Continuous,
            vec![one.clone(), one.clone()],
            vec![one.clone(), one],
        )
        .unwrap();
        for m in enumerate_states(&p).unwrap() {
            let got = qt_pmf_definite(&p, &cdfs, 1.0, &m).unwrap();
            let expect = if m.is_table_of(&p) {
                terminal_pmf_definite(&p, &m).unwrap()
            } else {
                0.0
            };
            assert!((got - expect).abs() < 1e-14);
        }
    }

    // Hand expansion with uniform lambda = 1/2: the only completion of
    // [[1,0],[0,0]] is [[1,0],[0,1]], so the mass is (1/2) * 0.5 * 0.5.
    #[test]
    fn half_thinning_mass_by_hand() {
        let p = pop(&[1, 1], &[1, 1]);
        let half: CdfFn = Arc::new(|t: f64| if t > 0.0 { 0.5 } else { 0.0 });
        let zero: CdfFn = Arc::new(|_| 0.0);
        let cdfs = FirstFiringCdf::from_functions(
            TimeSupport::Continuous,
            vec![half.clone(), half.clone()],
            vec![zero.clone(), zero],
        )
        .unwrap();
        let m = table(vec![vec![1, 0], vec![0, 0]]);
        assert!((qt_pmf_definite(&p, &cdfs, 1.0, &m).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn expected_entry_examples() {
        let p = pop(&[2, 1], &[1, 2]);
        let rates = RateVector::new(Flavor::Poisson, vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let cdfs = FirstFiringCdf::exponential(&rates).unwrap();
        assert_eq!(expected_qt_definite(&p, &cdfs, 0.0, 0, 0).unwrap(), 0.0);
        // lambda_00(t) = 0.5 at t = ln(2)/2 under unit rates.
        let t = 0.5f64.ln() / -2.0;
        let got = expected_qt_definite(&p, &cdfs, t, 0, 0).unwrap();
        assert!((got - 2.0 * 1.0 * 0.5 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn pmf_over_tables_sorts_and_looks_up() {
        let p = pop(&[2, 1], &[2, 1]);
        let tables = enumerate_tables(&p).unwrap();
        let pmf =
            PmfOverTables::new(vec![tables[1].clone(), tables[0].clone()], vec![0.25, 0.75])
                .unwrap();
        assert_eq!(pmf.support()[0], tables[0]);
        assert!((pmf.prob(&tables[1]) - 0.25).abs() < 1e-15);
        assert_eq!(pmf.prob(&PairTypeMatrix::zero(2)), 0.0);
        assert!((pmf.mean_entry(0, 0) - (0.75 + 0.25 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn pmf_requires_unit_mass() {
        let p = pop(&[1, 1], &[1, 1]);
        let tables = enumerate_tables(&p).unwrap();
        assert!(PmfOverTables::new(tables, vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn lattice_laws_reject_fractional_times() {
        let p = pop(&[1, 1], &[1, 1]);
        let law = EmLaw::from_pi(
            Flavor::Bernoulli,
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        let zero = PairTypeMatrix::zero(2);
        assert_eq!(
            qt_pmf_finebalanced(&p, &law, 1.5, &zero).unwrap_err(),
            SemError::NonIntegerTime(1.5)
        );
        assert!(qt_pmf_finebalanced(&p, &law, 2.0, &zero).is_ok());
    }

    #[test]
    fn fine_balance_gate_rejects_unbalanced_laws() {
        let p = pop(&[1, 1], &[1, 1]);
        let law =
            EmLaw::from_pi(Flavor::Poisson, vec![vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let zero = PairTypeMatrix::zero(2);
        assert!(matches!(
            qt_pmf_finebalanced(&p, &law, 1.0, &zero).unwrap_err(),
            SemError::NotFineBalanced { .. }
        ));
    }

    // At x = y = (1,1) with Pi = [[4,5],[5,6]] both completed tables carry a
    // residual weight of e^{-10t}, so P(Q(t) = 0) = e^{-10t}.
    #[test]
    fn poisson_finebalanced_zero_mass_by_hand() {
        let p = pop(&[1, 1], &[1, 1]);
        let law =
            EmLaw::from_pi(Flavor::Poisson, vec![vec![4.0, 5.0], vec![5.0, 6.0]]).unwrap();
        let zero = PairTypeMatrix::zero(2);
        for &t in &[0.1, 0.5, 1.0] {
            let got = qt_pmf_finebalanced(&p, &law, t, &zero).unwrap();
            assert!((got - (-10.0 * t).exp()).abs() < 1e-14);
        }
    }

    // Expected type-11 count under the same law: (x1 y1 / n)(1 - e^{-4t}).
    #[test]
    fn poisson_finebalanced_expected_entry_closed_form() {
        let p = pop(&[1, 1], &[1, 1]);
        let law =
            EmLaw::from_pi(Flavor::Poisson, vec![vec![4.0, 5.0], vec![5.0, 6.0]]).unwrap();
        for &t in &[0.05, 0.3, 2.0] {
            let got = expected_qt_finebalanced(&p, &law, t, 0, 0).unwrap();
            let expect = 0.5 * (1.0 - (-4.0 * t).exp());
            assert!((got - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_mass_drains_into_terminal_mass() {
        let p = pop(&[2, 1], &[1, 2]);
        let rates = RateVector::new(Flavor::Poisson, vec![0.7, 0.3], vec![0.5, 1.1]).unwrap();
        let cdfs = FirstFiringCdf::exponential(&rates).unwrap();
        let zero = PairTypeMatrix::zero(2);
        let tables = enumerate_tables(&p).unwrap();
        let mut prev_zero = 1.0;
        let mut prev_terminal = 0.0;
        for step in 0..=12 {
            let t = 0.25 * step as f64;
            let at_zero = qt_pmf_definite(&p, &cdfs, t, &zero).unwrap();
            let terminal: f64 = tables
                .iter()
                .map(|m| qt_pmf_definite(&p, &cdfs, t, m).unwrap())
                .sum();
            assert!(at_zero <= prev_zero + 1e-12);
            assert!(terminal >= prev_terminal - 1e-12);
            prev_zero = at_zero;
            prev_terminal = terminal;
        }
        assert!(prev_zero < 0.1 && prev_terminal > 0.5);
    }

    #[test]
    fn bernoulli_definite_law_absorbs_in_one_round() {
        let p = pop(&[2, 1], &[2, 1]);
        let law = EmLaw::from_pi(Flavor::Bernoulli, vec![vec![1.0; 2]; 2]).unwrap();
        for m in enumerate_tables(&p).unwrap() {
            let got = qt_pmf_finebalanced(&p, &law, 1.0, &m).unwrap();
            let expect = terminal_pmf_definite(&p, &m).unwrap();
            assert!((got - expect).abs() < 1e-14);
        }
    }
}
