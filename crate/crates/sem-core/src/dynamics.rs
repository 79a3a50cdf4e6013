//! Markov-chain machinery for arbitrary encounter-mating laws: the Poisson
//! infinitesimal generator and Bernoulli transition kernel over the pattern
//! state space, transient solvers, terminal-expectation recursions, and an
//! exact terminal-pattern oracle via the absorption lattice.

use std::collections::HashMap;

use crate::error::SemError;
use crate::exact::{pattern_mass_with_lambda, PmfOverTables};
use crate::law::{EmLaw, Flavor};
use crate::population::PopulationCounts;
use crate::table::{enumerate_states_capped, lex_cmp, PairTypeMatrix, DEFAULT_STATE_CAP};

/// States sorted by grand total then lexicographically, with a reverse index.
/// Every transition of the pattern process strictly increases the total, so
/// this order is also a topological order of the transition DAG.
#[derive(Debug, Clone)]
struct StateSpace {
    states: Vec<PairTypeMatrix>,
    index: HashMap<PairTypeMatrix, usize>,
}

impl StateSpace {
    fn build(pop: &PopulationCounts, cap: usize) -> Result<Self, SemError> {
        let mut states = enumerate_states_capped(pop, cap)?;
        states.sort_by(|a, b| a.total().cmp(&b.total()).then_with(|| lex_cmp(a, b)));
        let index = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        Ok(Self { states, index })
    }
}

/// Infinitesimal generator of the continuous-time pattern process. Only
/// off-diagonal rates are stored; each diagonal entry is minus its row's exit
/// rate, and completed tables have empty rows.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    states: Vec<PairTypeMatrix>,
    index: HashMap<PairTypeMatrix, usize>,
    rows: Vec<Vec<(usize, f64)>>,
    exit_rates: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn states(&self) -> &[PairTypeMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Off-diagonal transition rates out of a state.
    pub fn transitions(&self, from: usize) -> &[(usize, f64)] {
        &self.rows[from]
    }

    pub fn exit_rate(&self, from: usize) -> f64 {
        self.exit_rates[from]
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.rows[state].is_empty()
    }

    pub fn index_of(&self, m: &PairTypeMatrix) -> Option<usize> {
        self.index.get(m).copied()
    }
}

/// One-step transition kernel of the discrete-time pattern process; rows
/// include the self-loop and sum to 1 as computed, with no renormalization.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    states: Vec<PairTypeMatrix>,
    index: HashMap<PairTypeMatrix, usize>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl KernelMatrix {
    pub fn states(&self) -> &[PairTypeMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn transitions(&self, from: usize) -> &[(usize, f64)] {
        &self.rows[from]
    }

    pub fn index_of(&self, m: &PairTypeMatrix) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Self-loop probability of a state.
    pub fn self_probability(&self, state: usize) -> f64 {
        self.rows[state]
            .iter()
            .find(|&&(j, _)| j == state)
            .map_or(0.0, |&(_, p)| p)
    }
}

fn require_flavor(law: &EmLaw, flavor: Flavor) -> Result<(), SemError> {
    if law.flavor() != flavor {
        return Err(SemError::InvalidLaw(format!(
            "expected a {flavor:?} law, got {:?}",
            law.flavor()
        )));
    }
    Ok(())
}

pub fn generator_poisson(pop: &PopulationCounts, law: &EmLaw) -> Result<GeneratorMatrix, SemError> {
    generator_poisson_capped(pop, law, DEFAULT_STATE_CAP)
}

/// Rate out of M into M plus one type-ij pair: pi_ij times the number of
/// single type-i females times single type-j males over the single count.
pub fn generator_poisson_capped(
    pop: &PopulationCounts,
    law: &EmLaw,
    cap: usize,
) -> Result<GeneratorMatrix, SemError> {
    require_flavor(law, Flavor::Poisson)?;
    if law.k() != pop.k() {
        return Err(SemError::DimensionMismatch(law.k(), pop.k()));
    }
    let space = StateSpace::build(pop, cap)?;
    let k = pop.k();
    let n = pop.n();
    let mut rows = Vec::with_capacity(space.states.len());
    let mut exit_rates = Vec::with_capacity(space.states.len());
    for m in &space.states {
        let singles = n - m.total();
        if singles == 0 {
            rows.push(Vec::new());
            exit_rates.push(0.0);
            continue;
        }
        let mut row = Vec::new();
        let mut exit = 0.0;
        for i in 0..k {
            let free_f = pop.female_count(i) - m.row_sum(i);
            if free_f == 0 {
                continue;
            }
            for j in 0..k {
                let free_m = pop.male_count(j) - m.col_sum(j);
                if free_m == 0 {
                    continue;
                }
                let rate = law.get(i, j) * free_f as f64 * free_m as f64 / singles as f64;
                let target = space.index[&m.bump(i, j)];
                row.push((target, rate));
                exit += rate;
            }
        }
        rows.push(row);
        exit_rates.push(exit);
    }
    Ok(GeneratorMatrix { states: space.states, index: space.index, rows, exit_rates })
}

pub fn kernel_bernoulli(pop: &PopulationCounts, law: &EmLaw) -> Result<KernelMatrix, SemError> {
    kernel_bernoulli_capped(pop, law, DEFAULT_STATE_CAP)
}

/// One round from M adds an arbitrary increment D compatible with the
/// residual population; its probability is the binomial-thinning mass of D at
/// level pi over the residual, so rows sum to 1 by construction.
pub fn kernel_bernoulli_capped(
    pop: &PopulationCounts,
    law: &EmLaw,
    cap: usize,
) -> Result<KernelMatrix, SemError> {
    require_flavor(law, Flavor::Bernoulli)?;
    if law.k() != pop.k() {
        return Err(SemError::DimensionMismatch(law.k(), pop.k()));
    }
    let space = StateSpace::build(pop, cap)?;
    let mut rows = Vec::with_capacity(space.states.len());
    for (s, m) in space.states.iter().enumerate() {
        let residual = m.residual(pop)?;
        if residual.n() == 0 {
            rows.push(vec![(s, 1.0)]);
            continue;
        }
        let mut row = Vec::new();
        for d in enumerate_states_capped(&residual, cap)? {
            let prob =
                pattern_mass_with_lambda(&residual, &|i, j| law.get(i, j), &d, cap)?;
            if prob > 0.0 {
                row.push((space.index[&m.plus(&d)], prob));
            }
        }
        rows.push(row);
    }
    Ok(KernelMatrix { states: space.states, index: space.index, rows })
}

fn unit_mass_at_zero(states: &[PairTypeMatrix]) -> Vec<f64> {
    let mut p = vec![0.0; states.len()];
    debug_assert_eq!(states[0].total(), 0);
    p[0] = 1.0;
    p
}

/// One uniformized step: v (I + Q / lambda).
fn uniformized_step(gen: &GeneratorMatrix, v: &[f64], lambda: f64) -> Vec<f64> {
    let mut out: Vec<f64> = v
        .iter()
        .zip(&gen.exit_rates)
        .map(|(&vi, &e)| vi * (1.0 - e / lambda))
        .collect();
    for (i, row) in gen.rows.iter().enumerate() {
        if v[i] == 0.0 {
            continue;
        }
        for &(j, r) in row {
            out[j] += v[i] * r / lambda;
        }
    }
    out
}

/// Transient distribution by uniformization, segmented so the Poisson weights
/// never underflow; per-segment truncation leaves at most 1e-15 of mass.
/// Stops early once the chain has absorbed to working precision.
fn transient_poisson(gen: &GeneratorMatrix, t: f64) -> Vec<f64> {
    let mut p = unit_mass_at_zero(&gen.states);
    let lambda = gen.exit_rates.iter().fold(0.0f64, |m, &e| m.max(e));
    if lambda <= 0.0 || t <= 0.0 {
        return p;
    }
    let segments = (lambda * t / 50.0).ceil().max(1.0) as usize;
    let dt = t / segments as f64;
    let a = lambda * dt;
    for _ in 0..segments {
        let mut weight = (-a).exp();
        let mut cumulative = weight;
        let mut acc: Vec<f64> = p.iter().map(|&x| x * weight).collect();
        let mut v = p;
        let mut m = 0usize;
        while 1.0 - cumulative > 1e-15 && m < 100_000 {
            m += 1;
            v = uniformized_step(gen, &v, lambda);
            weight *= a / m as f64;
            cumulative += weight;
            for (acc_j, &v_j) in acc.iter_mut().zip(&v) {
                *acc_j += weight * v_j;
            }
        }
        p = acc;
        let transient_mass: f64 = p
            .iter()
            .enumerate()
            .filter(|&(s, _)| !gen.rows[s].is_empty())
            .map(|(_, &mass)| mass)
            .sum();
        if transient_mass < 1e-18 {
            break;
        }
    }
    p
}

pub fn transient_distribution(
    pop: &PopulationCounts,
    law: &EmLaw,
    t: f64,
) -> Result<PmfOverTables, SemError> {
    transient_distribution_capped(pop, law, t, DEFAULT_STATE_CAP)
}

/// Distribution of the pattern at time t started from the empty pattern:
/// uniformization for Poisson laws, t-fold kernel application for Bernoulli.
pub fn transient_distribution_capped(
    pop: &PopulationCounts,
    law: &EmLaw,
    t: f64,
    cap: usize,
) -> Result<PmfOverTables, SemError> {
    if t < 0.0 || !t.is_finite() {
        return Err(SemError::NegativeTime(t));
    }
    match law.flavor() {
        Flavor::Poisson => {
            let gen = generator_poisson_capped(pop, law, cap)?;
            let probs = transient_poisson(&gen, t);
            PmfOverTables::new(gen.states.clone(), probs)
        }
        Flavor::Bernoulli => {
            if t.fract() != 0.0 {
                return Err(SemError::NonIntegerTime(t));
            }
            let kernel = kernel_bernoulli_capped(pop, law, cap)?;
            let mut p = unit_mass_at_zero(&kernel.states);
            for _ in 0..t as u64 {
                let mut next = vec![0.0; p.len()];
                let mut transient_mass = 0.0;
                for (s, &mass) in p.iter().enumerate() {
                    if mass == 0.0 {
                        continue;
                    }
                    if !kernel.states[s].is_table_of(pop) {
                        transient_mass += mass;
                    }
                    for &(target, prob) in &kernel.rows[s] {
                        next[target] += mass * prob;
                    }
                }
                p = next;
                if transient_mass < 1e-18 {
                    break;
                }
            }
            PmfOverTables::new(kernel.states.clone(), p)
        }
    }
}

/// Terminal-expectation recursions with a memo shared across evaluations.
///
/// The expected terminal pattern depends only on the residual counts, never
/// on labels, so evaluating many populations under one law reuses most of
/// the lattice.
#[derive(Debug)]
pub struct TerminalExpectationSolver<'a> {
    law: &'a EmLaw,
    memo: HashMap<(Vec<u64>, Vec<u64>), Vec<f64>>,
}

impl<'a> TerminalExpectationSolver<'a> {
    pub fn new(law: &'a EmLaw) -> Self {
        Self { law, memo: HashMap::new() }
    }

    pub fn expectation(&mut self, pop: &PopulationCounts) -> Result<Vec<Vec<f64>>, SemError> {
        let law = self.law;
        if law.k() != pop.k() {
            return Err(SemError::DimensionMismatch(law.k(), pop.k()));
        }
        let k = pop.k();
        let flat = match law.flavor() {
            Flavor::Poisson => {
                let mut x = pop.female_counts().to_vec();
                let mut y = pop.male_counts().to_vec();
                poisson_u_star(&mut x, &mut y, law, &mut self.memo)
            }
            Flavor::Bernoulli => bernoulli_u_star(
                pop.female_counts().to_vec(),
                pop.male_counts().to_vec(),
                law,
                &mut self.memo,
            )?,
        };
        Ok((0..k).map(|i| flat[i * k..(i + 1) * k].to_vec()).collect())
    }
}

/// Expected terminal pattern for a Poisson law, by the one-round conditioning
/// recursion over residual populations.
pub fn terminal_expectation_poisson(
    pop: &PopulationCounts,
    law: &EmLaw,
) -> Result<Vec<Vec<f64>>, SemError> {
    require_flavor(law, Flavor::Poisson)?;
    TerminalExpectationSolver::new(law).expectation(pop)
}

fn poisson_u_star(
    x: &mut Vec<u64>,
    y: &mut Vec<u64>,
    law: &EmLaw,
    memo: &mut HashMap<(Vec<u64>, Vec<u64>), Vec<f64>>,
) -> Vec<f64> {
    let k = law.k();
    if x.iter().all(|&v| v == 0) {
        return vec![0.0; k * k];
    }
    let key = (x.clone(), y.clone());
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let mut z = 0.0;
    for i in 0..k {
        for j in 0..k {
            z += law.get(i, j) * x[i] as f64 * y[j] as f64;
        }
    }
    let mut out = vec![0.0; k * k];
    for ip in 0..k {
        if x[ip] == 0 {
            continue;
        }
        for jp in 0..k {
            if y[jp] == 0 {
                continue;
            }
            let w = law.get(ip, jp) * x[ip] as f64 * y[jp] as f64 / z;
            x[ip] -= 1;
            y[jp] -= 1;
            let sub = poisson_u_star(x, y, law, memo);
            x[ip] += 1;
            y[jp] += 1;
            for (o, s) in out.iter_mut().zip(&sub) {
                *o += w * s;
            }
            out[ip * k + jp] += w;
        }
    }
    memo.insert(key, out.clone());
    out
}

/// Expected terminal pattern for a Bernoulli law, conditioning the first
/// round on leaving the empty pattern of each residual population.
pub fn terminal_expectation_bernoulli(
    pop: &PopulationCounts,
    law: &EmLaw,
) -> Result<Vec<Vec<f64>>, SemError> {
    require_flavor(law, Flavor::Bernoulli)?;
    TerminalExpectationSolver::new(law).expectation(pop)
}

fn bernoulli_u_star(
    x: Vec<u64>,
    y: Vec<u64>,
    law: &EmLaw,
    memo: &mut HashMap<(Vec<u64>, Vec<u64>), Vec<f64>>,
) -> Result<Vec<f64>, SemError> {
    let k = law.k();
    if x.iter().all(|&v| v == 0) {
        return Ok(vec![0.0; k * k]);
    }
    let key = (x.clone(), y.clone());
    if let Some(hit) = memo.get(&key) {
        return Ok(hit.clone());
    }
    let residual = PopulationCounts::new(x, y)?;
    let states = enumerate_states_capped(&residual, DEFAULT_STATE_CAP)?;
    let mut stay = 0.0;
    let mut moves: Vec<(PairTypeMatrix, f64)> = Vec::new();
    for d in states {
        let prob = pattern_mass_with_lambda(
            &residual,
            &|i, j| law.get(i, j),
            &d,
            DEFAULT_STATE_CAP,
        )?;
        if d.total() == 0 {
            stay = prob;
        } else if prob > 0.0 {
            moves.push((d, prob));
        }
    }
    if stay >= 1.0 {
        return Err(SemError::DegenerateKernel);
    }
    let escape = 1.0 - stay;
    let mut out = vec![0.0; k * k];
    for (d, prob) in moves {
        let sub_pop = d.residual(&residual)?;
        let sub = bernoulli_u_star(
            sub_pop.female_counts().to_vec(),
            sub_pop.male_counts().to_vec(),
            law,
            memo,
        )?;
        let w = prob / escape;
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] += w * (sub[i * k + j] + d.entry(i, j) as f64);
            }
        }
    }
    memo.insert(key, out.clone());
    Ok(out)
}

pub fn terminal_pmf_absorbing(
    pop: &PopulationCounts,
    law: &EmLaw,
) -> Result<PmfOverTables, SemError> {
    terminal_pmf_absorbing_capped(pop, law, DEFAULT_STATE_CAP)
}

/// Exact law of the terminal pattern under an arbitrary law of either
/// flavor: push unit mass from the empty pattern through the absorption
/// lattice in ascending-total order, so every state's mass is final before it
/// is propagated. Poisson uses the embedded jump chain; Bernoulli conditions
/// each row on leaving its state.
pub fn terminal_pmf_absorbing_capped(
    pop: &PopulationCounts,
    law: &EmLaw,
    cap: usize,
) -> Result<PmfOverTables, SemError> {
    pop.require_nonempty()?;
    let (states, rows) = match law.flavor() {
        Flavor::Poisson => {
            let gen = generator_poisson_capped(pop, law, cap)?;
            let rows: Vec<Vec<(usize, f64)>> = gen
                .rows
                .iter()
                .zip(&gen.exit_rates)
                .map(|(row, &exit)| row.iter().map(|&(j, r)| (j, r / exit)).collect())
                .collect();
            (gen.states, rows)
        }
        Flavor::Bernoulli => {
            let kernel = kernel_bernoulli_capped(pop, law, cap)?;
            let mut rows = Vec::with_capacity(kernel.rows.len());
            for (s, row) in kernel.rows.iter().enumerate() {
                let stay = kernel.self_probability(s);
                if row.len() == 1 && row[0].0 == s {
                    rows.push(Vec::new());
                    continue;
                }
                if stay >= 1.0 {
                    return Err(SemError::DegenerateKernel);
                }
                rows.push(
                    row.iter()
                        .filter(|&&(j, _)| j != s)
                        .map(|&(j, p)| (j, p / (1.0 - stay)))
                        .collect(),
                );
            }
            (kernel.states, rows)
        }
    };
    let mut mass = unit_mass_at_zero(&states);
    let mut terminal_support = Vec::new();
    let mut terminal_probs = Vec::new();
    for s in 0..states.len() {
        if mass[s] == 0.0 {
            continue;
        }
        if states[s].is_table_of(pop) {
            terminal_support.push(states[s].clone());
            terminal_probs.push(mass[s]);
            continue;
        }
        let here = mass[s];
        for &(target, p) in &rows[s] {
            mass[target] += here * p;
        }
    }
    PmfOverTables::new(terminal_support, terminal_probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::terminal_pmf_definite;

    fn pop(x: &[u64], y: &[u64]) -> PopulationCounts {
        PopulationCounts::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn poisson(rows: Vec<Vec<f64>>) -> EmLaw {
        EmLaw::from_pi(Flavor::Poisson, rows).unwrap()
    }

    fn bernoulli(rows: Vec<Vec<f64>>) -> EmLaw {
        EmLaw::from_pi(Flavor::Bernoulli, rows).unwrap()
    }

    #[test]
    fn generator_rates_by_hand() {
        let p = pop(&[1, 1], &[1, 1]);
        let law = poisson(vec![vec![4.0, 5.0], vec![5.0, 6.0]]);
        let gen = generator_poisson(&p, &law).unwrap();
        let zero = gen.index_of(&PairTypeMatrix::zero(2)).unwrap();
        let target = gen
            .index_of(&PairTypeMatrix::from_rows(vec![vec![1, 0], vec![0, 0]]).unwrap())
            .unwrap();
        let rate = gen
            .transitions(zero)
            .iter()
            .find(|&&(j, _)| j == target)
            .unwrap()
            .1;
        assert!((rate - 2.0).abs() < 1e-15);
        // Diagonal completes the row to zero.
        let total: f64 = gen.transitions(zero).iter().map(|&(_, r)| r).sum();
        assert!((gen.exit_rate(zero) - total).abs() < 1e-12);
    }

    #[test]
    fn completed_tables_are_absorbing() {
        let p = pop(&[2, 1], &[1, 2]);
        let law = poisson(vec![vec![1.0, 2.0], vec![0.5, 1.5]]);
        let gen = generator_poisson(&p, &law).unwrap();
        for (s, m) in gen.states().iter().enumerate() {
            assert_eq!(m.is_table_of(&p), gen.is_absorbing(s));
            for &(j, r) in gen.transitions(s) {
                assert!(r >= 0.0);
                // Transitions only reach single-pair increments.
                assert_eq!(gen.states()[j].total(), m.total() + 1);
                assert!(gen.states()[j].dominates(m));
            }
        }
    }

    #[test]
    fn definite_bernoulli_kernel_from_zero() {
        let p = pop(&[1, 1], &[1, 1]);
        let law = bernoulli(vec![vec![1.0; 2]; 2]);
        let kernel = kernel_bernoulli(&p, &law).unwrap();
        let zero = kernel.index_of(&PairTypeMatrix::zero(2)).unwrap();
        let diag = kernel
            .index_of(&PairTypeMatrix::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap())
            .unwrap();
        let anti = kernel
            .index_of(&PairTypeMatrix::from_rows(vec![vec![0, 1], vec![1, 0]]).unwrap())
            .unwrap();
        let row = kernel.transitions(zero);
        assert_eq!(row.len(), 2);
        for &(j, prob) in row {
            assert!(j == diag || j == anti);
            assert!((prob - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn bernoulli_kernel_entries_by_hand() {
        let (p11, p22) = (0.3, 0.8);
        let p = pop(&[1, 1], &[1, 1]);
        let law = bernoulli(vec![vec![p11, 0.6], vec![0.7, p22]]);
        let kernel = kernel_bernoulli(&p, &law).unwrap();
        let zero = kernel.index_of(&PairTypeMatrix::zero(2)).unwrap();
        let single = kernel
            .index_of(&PairTypeMatrix::from_rows(vec![vec![1, 0], vec![0, 0]]).unwrap())
            .unwrap();
        let diag = kernel
            .index_of(&PairTypeMatrix::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap())
            .unwrap();
        let lookup = |target: usize| {
            kernel
                .transitions(zero)
                .iter()
                .find(|&&(j, _)| j == target)
                .map_or(0.0, |&(_, p)| p)
        };
        assert!((lookup(single) - 0.5 * p11 * (1.0 - p22)).abs() < 1e-15);
        assert!((lookup(diag) - 0.5 * p11 * p22).abs() < 1e-15);
    }

    #[test]
    fn kernel_rows_sum_to_one() {
        let p = pop(&[2, 1], &[1, 2]);
        let law = bernoulli(vec![vec![0.37, 0.81], vec![0.64, 0.29]]);
        let kernel = kernel_bernoulli(&p, &law).unwrap();
        for s in 0..kernel.len() {
            let total: f64 = kernel.transitions(s).iter().map(|&(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12, "row {s} sums to {total}");
        }
    }

    #[test]
    fn transient_at_zero_is_point_mass() {
        let p = pop(&[1, 1], &[1, 1]);
        let law = poisson(vec![vec![4.0, 5.0], vec![5.0, 6.0]]);
        let pmf = transient_distribution(&p, &law, 0.0).unwrap();
        assert!((pmf.prob(&PairTypeMatrix::zero(2)) - 1.0).abs() < 1e-15);
        let law = bernoulli(vec![vec![0.4; 2]; 2]);
        let pmf = transient_distribution(&p, &law, 0.0).unwrap();
        assert!((pmf.prob(&PairTypeMatrix::zero(2)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transient_rejects_fractional_bernoulli_times() {
        let p = pop(&[1, 1], &[1, 1]);
        let law = bernoulli(vec![vec![0.4; 2]; 2]);
        assert_eq!(
            transient_distribution(&p, &law, 1.5).unwrap_err(),
            SemError::NonIntegerTime(1.5)
        );
    }

    #[test]
    fn poisson_mass_reaches_absorption() {
        let p = pop(&[2, 1], &[1, 2]);
        let law = poisson(vec![vec![2.0, 1.0], vec![0.7, 1.4]]);
        let pmf = transient_distribution(&p, &law, 50.0 / 0.7).unwrap();
        let absorbed: f64 = pmf
            .iter()
            .filter(|(m, _)| m.is_table_of(&p))
            .map(|(_, prob)| prob)
            .sum();
        assert!((absorbed - 1.0).abs() < 1e-6, "absorbed {absorbed}");
    }

    // First-step analysis at x = y = (1,1) gives
    // u*_11 = (pi11 + pi22) / (pi11 + pi12 + pi21 + pi22).
    #[test]
    fn first_step_recursion_two_couples() {
        let p = pop(&[1, 1], &[1, 1]);
        let law = poisson(vec![vec![1.0, 1.0], vec![1.0, 2.0]]);
        let u = terminal_expectation_poisson(&p, &law).unwrap();
        assert!((u[0][0] - 3.0 / 5.0).abs() < 1e-14);
        assert!((u[0][1] - 2.0 / 5.0).abs() < 1e-14);
        assert!((u[1][0] - 2.0 / 5.0).abs() < 1e-14);
        assert!((u[1][1] - 3.0 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn fine_balanced_poisson_expectation_is_product_form() {
        let p = pop(&[3, 2], &[2, 3]);
        let law = poisson(vec![vec![4.0, 5.0], vec![5.0, 6.0]]);
        let u = terminal_expectation_poisson(&p, &law).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let product =
                    p.female_count(i) as f64 * p.male_count(j) as f64 / p.n() as f64;
                assert!((u[i][j] - product).abs() < 1e-10);
            }
        }
    }

    // Mixed-only definite mating with pure-type preference c: at x = y =
    // (1,1) the recursion gives u*_11 = c / (1 + c).
    #[test]
    fn mixed_only_poisson_expectation() {
        let c = 0.5;
        let p = pop(&[1, 1], &[1, 1]);
        let law = poisson(vec![vec![c, 1.0], vec![1.0, c]]);
        let u = terminal_expectation_poisson(&p, &law).unwrap();
        assert!((u[0][0] - c / (1.0 + c)).abs() < 1e-14);
        assert!(u[0][0] < 0.5);
    }

    #[test]
    fn bernoulli_expectation_two_couples_closed_form() {
        let p = pop(&[1, 1], &[1, 1]);
        let (p11, p12, p21, p22) = (0.3, 0.6, 0.7, 0.8);
        let law = bernoulli(vec![vec![p11, p12], vec![p21, p22]]);
        let u = terminal_expectation_bernoulli(&p, &law).unwrap();
        let same = p11 + p22 - p11 * p22;
        let cross = p12 + p21 - p12 * p21;
        assert!((u[0][0] - same / (same + cross)).abs() < 1e-14);
    }

    #[test]
    fn fine_balanced_bernoulli_expectation_is_product_form() {
        let p = pop(&[2, 2], &[1, 3]);
        let a = [0.1, 0.7];
        let b = [0.3, 0.9];
        let rows: Vec<Vec<f64>> = a
            .iter()
            .map(|&ai| b.iter().map(|&bj| 1.0 - (1.0 - ai) * (1.0 - bj)).collect())
            .collect();
        let law = bernoulli(rows);
        let u = terminal_expectation_bernoulli(&p, &law).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let product =
                    p.female_count(i) as f64 * p.male_count(j) as f64 / p.n() as f64;
                assert!((u[i][j] - product).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn definite_bernoulli_expectation_is_hypergeometric_mean() {
        let p = pop(&[2, 1], &[1, 2]);
        let law = bernoulli(vec![vec![1.0; 2]; 2]);
        let u = terminal_expectation_bernoulli(&p, &law).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let product =
                    p.female_count(i) as f64 * p.male_count(j) as f64 / p.n() as f64;
                assert!((u[i][j] - product).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn absorbing_pmf_of_constant_poisson_law_is_hypergeometric() {
        let p = pop(&[2, 1], &[2, 1]);
        let law = poisson(vec![vec![0.9; 2]; 2]);
        let pmf = terminal_pmf_absorbing(&p, &law).unwrap();
        for (m, prob) in pmf.iter() {
            let expect = terminal_pmf_definite(&p, m).unwrap();
            assert!((prob - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn absorbing_mass_matches_expectation_recursion() {
        let p = pop(&[1, 1], &[1, 1]);
        let law = poisson(vec![vec![1.0, 1.0], vec![1.0, 2.0]]);
        let pmf = terminal_pmf_absorbing(&p, &law).unwrap();
        let diag = PairTypeMatrix::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let u = terminal_expectation_poisson(&p, &law).unwrap();
        assert!((pmf.prob(&diag) - u[0][0]).abs() < 1e-12);

        let law = bernoulli(vec![vec![0.25, 0.5], vec![0.75, 0.4]]);
        let pmf = terminal_pmf_absorbing(&p, &law).unwrap();
        let u = terminal_expectation_bernoulli(&p, &law).unwrap();
        assert!((pmf.prob(&diag) - u[0][0]).abs() < 1e-12);
    }

    // Pure-type expectations sit strictly below the product form whenever the
    // other type is populated on both sides, and never above it.
    #[test]
    fn mixed_only_definite_mating_is_strictly_depressed() {
        for (x, y) in [
            (vec![1u64, 1], vec![1u64, 1]),
            (vec![2, 1], vec![1, 2]),
            (vec![2, 2], vec![2, 2]),
            (vec![3, 1], vec![2, 2]),
        ] {
            let p = PopulationCounts::new(x, y).unwrap();
            for (pii, pjj) in [(0.4, 0.9), (0.9, 0.4), (0.2, 0.2)] {
                let law = poisson(vec![vec![pii, 1.0], vec![1.0, pjj]]);
                let u = terminal_expectation_poisson(&p, &law).unwrap();
                for i in 0..2 {
                    let product =
                        p.female_count(i) as f64 * p.male_count(i) as f64 / p.n() as f64;
                    let other = 1 - i;
                    let off_diagonal_populated = p.female_count(i)
                        * p.female_count(other)
                        * p.male_count(i)
                        * p.male_count(other)
                        != 0;
                    if off_diagonal_populated {
                        assert!(u[i][i] < product - 1e-12);
                    } else {
                        assert!(u[i][i] <= product + 1e-12);
                    }
                }
            }
        }
    }
}
