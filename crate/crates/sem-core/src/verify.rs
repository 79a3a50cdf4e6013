//! Statistical and brute-force verification: Monte Carlo estimators with
//! error bars, empirical-vs-exact goodness of fit, and factorial permutation
//! oracles for small populations.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{
    run_sem, run_sem_alternative, FiringSchedule, SemModel, SimulationRecord,
};
use crate::error::SemError;
use crate::exact::PmfOverTables;
use crate::numeric::chi_square_sf;
use crate::population::{AnimalRoster, PopulationCounts};
use crate::table::{enumerate_tables, PairTypeMatrix};

/// Populations beyond this size are refused by the factorial oracles.
pub const ORACLE_LIMIT: u64 = 8;

/// Expected cell counts below this are pooled before the chi-square statistic
/// is formed.
const MIN_EXPECTED_CELL: f64 = 5.0;

/// A Monte Carlo mean with its standard error, reproducible from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub runs: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Distance from a reference value in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == reference {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - reference) / self.std_error
        }
    }
}

/// One observed/expected cell of a goodness-of-fit comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GofCell {
    pub observed: u64,
    pub expected: f64,
}

/// Pearson chi-square comparison of observed counts against a reference pmf.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
    pub tv_distance: f64,
    pub cells: Vec<GofCell>,
    pub total_runs: u64,
}

impl GofReport {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value > significance
    }
}

/// Pool cells whose expected count is below the validity threshold into a
/// single tail cell, merging further small cells if the tail stays light.
fn pooled_cells(observed: &[u64], expected: &[f64]) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..expected.len()).collect();
    order.sort_by(|&a, &b| expected[a].total_cmp(&expected[b]));
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut tail = (0.0, 0.0);
    let mut pooling = false;
    for &i in &order {
        if pooling || expected[i] < MIN_EXPECTED_CELL {
            tail.0 += observed[i] as f64;
            tail.1 += expected[i];
            // Once the tail is heavy enough, the remaining (larger) cells
            // stand on their own.
            pooling = tail.1 < MIN_EXPECTED_CELL;
        } else {
            kept.push((observed[i] as f64, expected[i]));
        }
    }
    if tail.1 > 0.0 || tail.0 > 0.0 {
        kept.push(tail);
    }
    kept
}

fn chi_square_from_cells(cells: &[(f64, f64)]) -> (f64, u64, f64) {
    let mut statistic = 0.0;
    for &(obs, exp) in cells {
        if exp > 0.0 {
            let d = obs - exp;
            statistic += d * d / exp;
        } else if obs > 0.0 {
            statistic = f64::INFINITY;
        }
    }
    let df = cells.len().saturating_sub(1) as u64;
    let p_value = if df == 0 {
        1.0
    } else {
        chi_square_sf(statistic, df as f64)
    };
    (statistic, df, p_value)
}

/// Compare observed counts (aligned with the pmf's support order) against an
/// expected pmf.
pub fn gof_compare(observed: &[u64], expected: &PmfOverTables) -> Result<GofReport, SemError> {
    if observed.len() != expected.len() {
        return Err(SemError::DimensionMismatch(observed.len(), expected.len()));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(SemError::EmptySample);
    }
    let expected_counts: Vec<f64> =
        expected.probs().iter().map(|&p| p * total as f64).collect();
    let cells = pooled_cells(observed, &expected_counts);
    let (statistic, degrees_of_freedom, p_value) = chi_square_from_cells(&cells);
    let tv_distance = observed
        .iter()
        .zip(expected.probs())
        .map(|(&o, &p)| (o as f64 / total as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    Ok(GofReport {
        statistic,
        degrees_of_freedom,
        p_value,
        tv_distance,
        cells: observed
            .iter()
            .zip(&expected_counts)
            .map(|(&observed, &expected)| GofCell { observed, expected })
            .collect(),
        total_runs: total,
    })
}

/// Chi-square homogeneity test between two count vectors over the same cells.
pub fn gof_compare_two_sample(a: &[u64], b: &[u64]) -> Result<GofReport, SemError> {
    if a.len() != b.len() {
        return Err(SemError::DimensionMismatch(a.len(), b.len()));
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(SemError::EmptySample);
    }
    let grand = (na + nb) as f64;
    let pooled_p: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| (ai + bi) as f64 / grand)
        .collect();
    let exp_a: Vec<f64> = pooled_p.iter().map(|&p| p * na as f64).collect();
    let exp_b: Vec<f64> = pooled_p.iter().map(|&p| p * nb as f64).collect();
    let cells_a = pooled_cells(a, &exp_a);
    let cells_b = pooled_cells(b, &exp_b);
    let (stat_a, df_a, _) = chi_square_from_cells(&cells_a);
    let (stat_b, _, _) = chi_square_from_cells(&cells_b);
    let statistic = stat_a + stat_b;
    let degrees_of_freedom = df_a;
    let p_value = if degrees_of_freedom == 0 {
        1.0
    } else {
        chi_square_sf(statistic, degrees_of_freedom as f64)
    };
    let tv_distance = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| (ai as f64 / na as f64 - bi as f64 / nb as f64).abs())
        .sum::<f64>()
        / 2.0;
    Ok(GofReport {
        statistic,
        degrees_of_freedom,
        p_value,
        tv_distance,
        cells: a
            .iter()
            .zip(&exp_a)
            .map(|(&observed, &expected)| GofCell { observed, expected })
            .collect(),
        total_runs: na + nb,
    })
}

fn empirical_with(
    model: &SemModel,
    runs: u64,
    seed: u64,
    simulate: impl Fn(&SemModel, u64) -> Result<SimulationRecord, SemError> + Sync,
) -> Result<(PmfOverTables, Vec<u64>), SemError> {
    if runs == 0 {
        return Err(SemError::TooFewRuns { needed: 1, got: 0 });
    }
    let support = enumerate_tables(&model.population)?;
    let pmf_index = PmfOverTables::new(support.clone(), uniform_probs(support.len()))?;
    let indices: Vec<usize> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let record = simulate(model, crate::engine::derive_seed(seed, r))?;
            Ok(pmf_index
                .support()
                .iter()
                .position(|m| *m == record.terminal_pattern)
                .expect("terminal pattern has exact margins"))
        })
        .collect::<Result<Vec<usize>, SemError>>()?;
    let mut counts = vec![0u64; pmf_index.len()];
    for i in indices {
        counts[i] += 1;
    }
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / runs as f64).collect();
    let pmf = PmfOverTables::new(pmf_index.support().to_vec(), probs)?;
    Ok((pmf, counts))
}

fn uniform_probs(len: usize) -> Vec<f64> {
    vec![1.0 / len as f64; len]
}

/// Terminal-pattern frequencies over `runs` independent faithful simulations
/// with statelessly derived per-run seeds. Counts are aligned with the
/// returned pmf's support.
pub fn empirical_terminal_pmf(
    model: &SemModel,
    runs: u64,
    seed: u64,
) -> Result<(PmfOverTables, Vec<u64>), SemError> {
    empirical_with(model, runs, seed, run_sem)
}

/// Same, but through the alternative (match-all, discard) mechanism.
pub fn empirical_terminal_pmf_alternative(
    model: &SemModel,
    runs: u64,
    seed: u64,
) -> Result<(PmfOverTables, Vec<u64>), SemError> {
    empirical_with(model, runs, seed, run_sem_alternative)
}

fn oracle_guard(pop: &PopulationCounts) -> Result<(), SemError> {
    if pop.n() > ORACLE_LIMIT {
        return Err(SemError::TooLargeForOracle { n: pop.n(), limit: ORACLE_LIMIT });
    }
    pop.require_nonempty()
}

fn visit_permutations(n: usize, mut visit: impl FnMut(&[usize])) {
    // Heap's algorithm, iterative.
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&sigma);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                sigma.swap(0, i);
            } else {
                sigma.swap(c[i], i);
            }
            visit(&sigma);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn pattern_of_permutation(
    roster: &AnimalRoster,
    sigma: &[usize],
    keep: impl Fn(usize, usize) -> bool,
) -> PairTypeMatrix {
    let k = roster.k();
    let mut entries = vec![0u64; k * k];
    for (a, &b) in sigma.iter().enumerate() {
        if keep(a, b) {
            entries[roster.female_type(a) * k + roster.male_type(b)] += 1;
        }
    }
    PairTypeMatrix::from_rows(
        (0..k)
            .map(|i| entries[i * k..(i + 1) * k].to_vec())
            .collect(),
    )
    .expect("square pattern")
}

fn oracle_pmf(
    pop: &PopulationCounts,
    roster: &AnimalRoster,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<PmfOverTables, SemError> {
    oracle_guard(pop)?;
    let n = pop.n() as usize;
    let mut counts: std::collections::HashMap<PairTypeMatrix, u64> =
        std::collections::HashMap::new();
    let mut total = 0u64;
    visit_permutations(n, |sigma| {
        *counts
            .entry(pattern_of_permutation(roster, sigma, &keep))
            .or_insert(0) += 1;
        total += 1;
    });
    let (support, probs): (Vec<_>, Vec<_>) = counts
        .into_iter()
        .map(|(m, c)| (m, c as f64 / total as f64))
        .unzip();
    PmfOverTables::new(support, probs)
}

/// Terminal-pattern law under definite mating by brute force: enumerate all
/// n! equally likely terminal pair-lists and count their patterns.
pub fn permutation_oracle_definite(
    pop: &PopulationCounts,
    roster: &AnimalRoster,
) -> Result<PmfOverTables, SemError> {
    oracle_pmf(pop, roster, |_, _| true)
}

/// Time-t pattern law under definite mating for a fixed explicit schedule: a
/// destined pair is visible at t exactly when one of its members has fired,
/// so each permutation contributes its truncated pattern.
pub fn permutation_oracle_at(
    pop: &PopulationCounts,
    roster: &AnimalRoster,
    schedule: &FiringSchedule,
    t: f64,
) -> Result<PmfOverTables, SemError> {
    if schedule.n() != pop.n() as usize {
        return Err(SemError::DimensionMismatch(schedule.n(), pop.n() as usize));
    }
    let first = |times: &[f64]| times.first().copied().unwrap_or(f64::INFINITY);
    oracle_pmf(pop, roster, |a, b| {
        first(schedule.female_times(a)).min(first(schedule.male_times(b))) <= t
    })
}

/// Sample mean and standard error of a statistic of the simulation record
/// over independent replications.
pub fn mc_expectation(
    model: &SemModel,
    statistic: impl Fn(&SimulationRecord) -> f64 + Sync,
    runs: u64,
    seed: u64,
) -> Result<McEstimate, SemError> {
    if runs < 2 {
        return Err(SemError::TooFewRuns { needed: 2, got: runs });
    }
    let values: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|r| Ok(statistic(&run_sem(model, crate::engine::derive_seed(seed, r))?)))
        .collect::<Result<Vec<f64>, SemError>>()?;
    // Sequential reduction keeps the result independent of thread scheduling.
    let mean = values.iter().sum::<f64>() / runs as f64;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    let std_error = (ss / (runs as f64 - 1.0) / runs as f64).sqrt();
    Ok(McEstimate { mean, std_error, runs, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::{Flavor, PreferenceMatrix, RateVector};

    fn pop(x: &[u64], y: &[u64]) -> PopulationCounts {
        PopulationCounts::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn definite_poisson_model(x: &[u64], y: &[u64]) -> SemModel {
        let p = pop(x, y);
        let k = p.k();
        let rates = RateVector::new(Flavor::Poisson, vec![1.0; k], vec![1.0; k]).unwrap();
        SemModel::poisson(p, PreferenceMatrix::definite(k), rates).unwrap()
    }

    #[test]
    fn proportional_counts_give_zero_statistic() {
        let p = pop(&[2, 1], &[2, 1]);
        let tables = enumerate_tables(&p).unwrap();
        let pmf = PmfOverTables::new(tables, vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        // Support order is mixed-first (lexicographic), so counts follow it.
        let observed = [20_000u64, 40_000];
        let report = gof_compare(&observed, &pmf).unwrap();
        assert_eq!(report.statistic, 0.0);
        assert_eq!(report.p_value, 1.0);
        assert_eq!(report.tv_distance, 0.0);
    }

    #[test]
    fn even_split_is_a_perfect_fit() {
        let p = pop(&[1, 1], &[1, 1]);
        let tables = enumerate_tables(&p).unwrap();
        let pmf = PmfOverTables::new(tables, vec![0.5, 0.5]).unwrap();
        let report = gof_compare(&[50_000, 50_000], &pmf).unwrap();
        assert_eq!(report.statistic, 0.0);
    }

    #[test]
    fn gross_imbalance_is_flagged() {
        let p = pop(&[1, 1], &[1, 1]);
        let tables = enumerate_tables(&p).unwrap();
        let pmf = PmfOverTables::new(tables, vec![0.5, 0.5]).unwrap();
        let report = gof_compare(&[40_000, 60_000], &pmf).unwrap();
        assert!((report.statistic - 4000.0).abs() < 1e-9);
        assert!(report.p_value < 1e-300);
        assert!(!report.passes(1e-3));
        assert!((report.tv_distance - 0.1).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_is_an_error() {
        let p = pop(&[1, 1], &[1, 1]);
        let tables = enumerate_tables(&p).unwrap();
        let pmf = PmfOverTables::new(tables, vec![0.5, 0.5]).unwrap();
        assert_eq!(gof_compare(&[0, 0], &pmf).unwrap_err(), SemError::EmptySample);
    }

    #[test]
    fn two_sample_identical_counts_pass() {
        let report = gof_compare_two_sample(&[500, 300, 200], &[500, 300, 200]).unwrap();
        assert_eq!(report.statistic, 0.0);
        assert!(report.passes(1e-3));
    }

    #[test]
    fn oracle_unit_population() {
        let p = pop(&[1, 1], &[1, 1]);
        let roster = AnimalRoster::canonical(&p);
        let pmf = permutation_oracle_definite(&p, &roster).unwrap();
        for (_, prob) in pmf.iter() {
            assert!((prob - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn oracle_matches_hypergeometric_for_three_couples() {
        let p = pop(&[2, 1], &[2, 1]);
        let roster = AnimalRoster::canonical(&p);
        let pmf = permutation_oracle_definite(&p, &roster).unwrap();
        let diag = PairTypeMatrix::from_rows(vec![vec![2, 0], vec![0, 1]]).unwrap();
        let mixed = PairTypeMatrix::from_rows(vec![vec![1, 1], vec![1, 0]]).unwrap();
        assert!((pmf.prob(&diag) - 1.0 / 3.0).abs() < 1e-15);
        assert!((pmf.prob(&mixed) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_refuses_large_populations() {
        let p = pop(&[5, 4], &[4, 5]);
        let roster = AnimalRoster::canonical(&p);
        assert_eq!(
            permutation_oracle_definite(&p, &roster).unwrap_err(),
            SemError::TooLargeForOracle { n: 9, limit: 8 }
        );
    }

    #[test]
    fn time_truncated_oracle_before_first_firing() {
        let p = pop(&[1, 1], &[1, 1]);
        let roster = AnimalRoster::canonical(&p);
        let schedule = FiringSchedule::explicit(
            vec![vec![5.0], vec![6.0]],
            vec![vec![7.0], vec![8.0]],
        )
        .unwrap();
        let pmf = permutation_oracle_at(&p, &roster, &schedule, 1.0).unwrap();
        assert_eq!(pmf.len(), 1);
        assert!((pmf.prob(&PairTypeMatrix::zero(2)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_single_run_is_a_point_mass() {
        let model = definite_poisson_model(&[1, 1], &[1, 1]);
        let (pmf, counts) = empirical_terminal_pmf(&model, 1, 5).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), 1);
        assert_eq!(pmf.probs().iter().filter(|&&p| p == 1.0).count(), 1);
    }

    #[test]
    fn empirical_pmf_is_seed_deterministic() {
        let model = definite_poisson_model(&[2, 1], &[2, 1]);
        let (a, ca) = empirical_terminal_pmf(&model, 2000, 31).unwrap();
        let (b, cb) = empirical_terminal_pmf(&model, 2000, 31).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a.probs(), b.probs());
    }

    #[test]
    fn terminal_time_is_always_finite() {
        let model = definite_poisson_model(&[2, 1], &[1, 2]);
        let est = mc_expectation(
            &model,
            |rec| f64::from(u8::from(rec.terminal_time.is_finite())),
            500,
            9,
        )
        .unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.z_score(1.0), 0.0);
    }

    #[test]
    fn mc_expectation_needs_two_runs() {
        let model = definite_poisson_model(&[1, 1], &[1, 1]);
        assert_eq!(
            mc_expectation(&model, |_| 0.0, 1, 3).unwrap_err(),
            SemError::TooFewRuns { needed: 2, got: 1 }
        );
    }
}
