//! Populations, animal rosters, and pair lists.

use serde::Serialize;

use crate::error::SemError;
use crate::table::PairTypeMatrix;

/// Per-type female and male headcounts with equal totals.
///
/// `x[i]` counts type-`i` females, `y[j]` counts type-`j` males, and both
/// sides sum to the common total `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PopulationCounts {
    k: usize,
    x: Vec<u64>,
    y: Vec<u64>,
    n: u64,
}

impl PopulationCounts {
    /// Validate raw headcount vectors into a population.
    pub fn new(x: Vec<u64>, y: Vec<u64>) -> Result<Self, SemError> {
        if x.len() != y.len() {
            return Err(SemError::DimensionMismatch(x.len(), y.len()));
        }
        if x.len() < 2 {
            return Err(SemError::TooFewTypes(x.len()));
        }
        let sum_x: u64 = x.iter().sum();
        let sum_y: u64 = y.iter().sum();
        if sum_x != sum_y {
            return Err(SemError::UnequalTotals { sum_x, sum_y });
        }
        Ok(Self { k: x.len(), x, y, n: sum_x })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn female_count(&self, i: usize) -> u64 {
        self.x[i]
    }

    pub fn male_count(&self, j: usize) -> u64 {
        self.y[j]
    }

    pub fn female_counts(&self) -> &[u64] {
        &self.x
    }

    pub fn male_counts(&self) -> &[u64] {
        &self.y
    }

    /// Simulation and dynamics require at least one animal per sex.
    pub fn require_nonempty(&self) -> Result<(), SemError> {
        if self.n == 0 {
            Err(SemError::EmptyPopulation)
        } else {
            Ok(())
        }
    }
}

/// One animal, identified by sex and 0-based label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AnimalId {
    Female(usize),
    Male(usize),
}

/// Concrete labelled animals: the type of every female and male.
///
/// Females carry labels `0..n`, males independently `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnimalRoster {
    k: usize,
    female_types: Vec<usize>,
    male_types: Vec<usize>,
}

impl AnimalRoster {
    /// Roster with animals laid out in ascending type order: females of type 0
    /// come first, and so on. Any fixed labelling induces the same pattern law.
    pub fn canonical(pop: &PopulationCounts) -> Self {
        let expand = |counts: &[u64]| {
            let mut types = Vec::with_capacity(pop.n() as usize);
            for (t, &c) in counts.iter().enumerate() {
                types.extend(std::iter::repeat_n(t, c as usize));
            }
            types
        };
        Self {
            k: pop.k(),
            female_types: expand(pop.female_counts()),
            male_types: expand(pop.male_counts()),
        }
    }

    /// Roster with explicit per-animal types, checked against the population.
    pub fn new(
        female_types: Vec<usize>,
        male_types: Vec<usize>,
        pop: &PopulationCounts,
    ) -> Result<Self, SemError> {
        let n = pop.n() as usize;
        if female_types.len() != n || male_types.len() != n {
            return Err(SemError::InvalidRoster);
        }
        let mut xc = vec![0u64; pop.k()];
        let mut yc = vec![0u64; pop.k()];
        for &t in &female_types {
            if t >= pop.k() {
                return Err(SemError::InvalidRoster);
            }
            xc[t] += 1;
        }
        for &t in &male_types {
            if t >= pop.k() {
                return Err(SemError::InvalidRoster);
            }
            yc[t] += 1;
        }
        if xc != pop.female_counts() || yc != pop.male_counts() {
            return Err(SemError::InvalidRoster);
        }
        Ok(Self { k: pop.k(), female_types, male_types })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.female_types.len()
    }

    pub fn female_type(&self, a: usize) -> usize {
        self.female_types[a]
    }

    pub fn male_type(&self, b: usize) -> usize {
        self.male_types[b]
    }
}

/// An admissible set of pairs: no animal appears twice.
///
/// Pairs are `(female label, male label)`, kept sorted by female label so that
/// equal collections compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PairList {
    pairs: Vec<(usize, usize)>,
}

impl PairList {
    pub fn empty() -> Self {
        Self { pairs: Vec::new() }
    }

    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self, SemError> {
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(SemError::NotAdmissible);
            }
        }
        let mut males: Vec<usize> = pairs.iter().map(|&(_, b)| b).collect();
        males.sort_unstable();
        for w in males.windows(2) {
            if w[0] == w[1] {
                return Err(SemError::NotAdmissible);
            }
        }
        Ok(Self { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// A terminal list over n animals is a permutation: female a is matched
    /// with male sigma(a). Returns `None` unless the list is perfect.
    pub fn permutation(&self, n: usize) -> Option<Vec<usize>> {
        if self.pairs.len() != n {
            return None;
        }
        let mut sigma = vec![usize::MAX; n];
        for &(a, b) in &self.pairs {
            if a >= n || b >= n {
                return None;
            }
            sigma[a] = b;
        }
        if sigma.contains(&usize::MAX) {
            return None;
        }
        Some(sigma)
    }
}

/// Count pair types: entry (i, j) is the number of pairs whose female has
/// type i and whose male has type j.
pub fn pattern_from_pairlist(
    list: &PairList,
    roster: &AnimalRoster,
) -> Result<PairTypeMatrix, SemError> {
    let n = roster.n();
    let k = roster.k();
    let mut counts = vec![0u64; k * k];
    for &(a, b) in list.pairs() {
        if a >= n || b >= n {
            return Err(SemError::InvalidIndex);
        }
        counts[roster.female_type(a) * k + roster.male_type(b)] += 1;
    }
    Ok(PairTypeMatrix::from_flat(k, counts))
}
