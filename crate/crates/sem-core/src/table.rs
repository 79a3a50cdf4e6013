//! Pair-type contingency tables and enumeration of the state spaces they
//! live in.
//!
//! A pattern matrix M belongs to the transient state space of a population
//! when its row sums stay below the female counts and its column sums below
//! the male counts; it is a completed table when the margins are met exactly.

use serde::Serialize;

use crate::error::SemError;
use crate::population::PopulationCounts;

/// Default cap on the number of enumerated matrices.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;

/// A k-by-k matrix of nonnegative pair counts with cached margins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PairTypeMatrix {
    k: usize,
    entries: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl PairTypeMatrix {
    pub fn zero(k: usize) -> Self {
        Self {
            k,
            entries: vec![0; k * k],
            row_sums: vec![0; k],
            col_sums: vec![0; k],
            total: 0,
        }
    }

    pub(crate) fn from_flat(k: usize, entries: Vec<u64>) -> Self {
        debug_assert_eq!(entries.len(), k * k);
        let mut row_sums = vec![0; k];
        let mut col_sums = vec![0; k];
        let mut total = 0;
        for i in 0..k {
            for j in 0..k {
                let v = entries[i * k + j];
                row_sums[i] += v;
                col_sums[j] += v;
                total += v;
            }
        }
        Self { k, entries, row_sums, col_sums, total }
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self, SemError> {
        let k = rows.len();
        for row in &rows {
            if row.len() != k {
                return Err(SemError::DimensionMismatch(k, row.len()));
            }
        }
        Ok(Self::from_flat(k, rows.into_iter().flatten().collect()))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.k + j]
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.row_sums[i]
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.col_sums[j]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.k)
            .map(|i| self.entries[i * self.k..(i + 1) * self.k].to_vec())
            .collect()
    }

    /// The matrix with entry (i, j) incremented; margins are recomputed.
    pub fn bump(&self, i: usize, j: usize) -> Self {
        let mut out = self.clone();
        out.entries[i * self.k + j] += 1;
        out.row_sums[i] += 1;
        out.col_sums[j] += 1;
        out.total += 1;
        out
    }

    /// Entrywise partial order: self >= other.
    pub fn dominates(&self, other: &Self) -> bool {
        self.k == other.k
            && self
                .entries
                .iter()
                .zip(other.entries.iter())
                .all(|(a, b)| a >= b)
    }

    /// Membership in the transient state space: margins bounded by the counts.
    pub fn is_state_of(&self, pop: &PopulationCounts) -> bool {
        self.k == pop.k()
            && (0..self.k).all(|i| self.row_sums[i] <= pop.female_count(i))
            && (0..self.k).all(|j| self.col_sums[j] <= pop.male_count(j))
    }

    /// Membership in the terminal space: margins equal the counts.
    pub fn is_table_of(&self, pop: &PopulationCounts) -> bool {
        self.k == pop.k()
            && (0..self.k).all(|i| self.row_sums[i] == pop.female_count(i))
            && (0..self.k).all(|j| self.col_sums[j] == pop.male_count(j))
    }

    /// Counts of still-single animals once the pairs in `self` are formed.
    pub fn residual(&self, pop: &PopulationCounts) -> Result<PopulationCounts, SemError> {
        if !self.is_state_of(pop) {
            return Err(SemError::NotAState);
        }
        let x = (0..self.k)
            .map(|i| pop.female_count(i) - self.row_sums[i])
            .collect();
        let y = (0..self.k)
            .map(|j| pop.male_count(j) - self.col_sums[j])
            .collect();
        PopulationCounts::new(x, y)
    }

    /// Entrywise sum, used to rebase enumeration output.
    pub(crate) fn plus(&self, other: &Self) -> Self {
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a + b)
            .collect();
        Self::from_flat(self.k, entries)
    }

    pub(crate) fn flat(&self) -> &[u64] {
        &self.entries
    }
}

/// Row-major lexicographic order on entries; ties cannot occur between
/// distinct matrices of equal dimension.
pub fn lex_cmp(a: &PairTypeMatrix, b: &PairTypeMatrix) -> std::cmp::Ordering {
    a.flat().cmp(b.flat())
}

struct Enumerator<'a> {
    pop: &'a PopulationCounts,
    cap: usize,
    exact_margins: bool,
    out: Vec<PairTypeMatrix>,
}

impl Enumerator<'_> {
    fn run(mut self) -> Result<Vec<PairTypeMatrix>, SemError> {
        let k = self.pop.k();
        let mut entries = vec![0u64; k * k];
        let mut col_left: Vec<u64> = self.pop.male_counts().to_vec();
        self.fill_cell(0, 0, self.pop.female_count(0), &mut entries, &mut col_left)?;
        Ok(self.out)
    }

    /// Recursive row-major fill. `row_left` is what remains of row i's budget.
    fn fill_cell(
        &mut self,
        i: usize,
        j: usize,
        row_left: u64,
        entries: &mut Vec<u64>,
        col_left: &mut Vec<u64>,
    ) -> Result<(), SemError> {
        let k = self.pop.k();
        if i == k {
            if self.out.len() >= self.cap {
                return Err(SemError::StateSpaceTooLarge { cap: self.cap });
            }
            self.out.push(PairTypeMatrix::from_flat(k, entries.clone()));
            return Ok(());
        }
        if j == k {
            if self.exact_margins && row_left > 0 {
                return Ok(());
            }
            let next_budget = if i + 1 < k { self.pop.female_count(i + 1) } else { 0 };
            return self.fill_cell(i + 1, 0, next_budget, entries, col_left);
        }
        let hi = row_left.min(col_left[j]);
        for v in 0..=hi {
            entries[i * k + j] = v;
            col_left[j] -= v;
            self.fill_cell(i, j + 1, row_left - v, entries, col_left)?;
            col_left[j] += v;
            entries[i * k + j] = 0;
        }
        Ok(())
    }
}

/// All tables with row sums exactly x and column sums exactly y, in row-major
/// lexicographic order (smallest entries first), each exactly once.
pub fn enumerate_tables(pop: &PopulationCounts) -> Result<Vec<PairTypeMatrix>, SemError> {
    enumerate_tables_capped(pop, DEFAULT_STATE_CAP)
}

pub fn enumerate_tables_capped(
    pop: &PopulationCounts,
    cap: usize,
) -> Result<Vec<PairTypeMatrix>, SemError> {
    Enumerator { pop, cap, exact_margins: true, out: Vec::new() }.run()
}

/// The full transient state space: all matrices with row sums <= x and column
/// sums <= y, in row-major lexicographic order. Includes the zero matrix and
/// every completed table.
pub fn enumerate_states(pop: &PopulationCounts) -> Result<Vec<PairTypeMatrix>, SemError> {
    enumerate_states_capped(pop, DEFAULT_STATE_CAP)
}

pub fn enumerate_states_capped(
    pop: &PopulationCounts,
    cap: usize,
) -> Result<Vec<PairTypeMatrix>, SemError> {
    Enumerator { pop, cap, exact_margins: false, out: Vec::new() }.run()
}

/// All completed tables lying above `m` in the entrywise order: `m` plus each
/// table of the residual population.
pub fn enumerate_completions(
    m: &PairTypeMatrix,
    pop: &PopulationCounts,
) -> Result<Vec<PairTypeMatrix>, SemError> {
    enumerate_completions_capped(m, pop, DEFAULT_STATE_CAP)
}

pub fn enumerate_completions_capped(
    m: &PairTypeMatrix,
    pop: &PopulationCounts,
    cap: usize,
) -> Result<Vec<PairTypeMatrix>, SemError> {
    let residual = m.residual(pop)?;
    let fills = enumerate_tables_capped(&residual, cap)?;
    Ok(fills.into_iter().map(|d| m.plus(&d)).collect())
}
