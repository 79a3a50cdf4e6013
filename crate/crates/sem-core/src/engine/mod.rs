//! Stochastic simulation of the encounter-mating process.
//!
//! Two mechanisms are provided. The faithful one walks the firing rounds:
//! every single animal firing at the round time samples a uniformly random
//! single of the opposite sex without replacement, and each temporary pair
//! then faces an independent mating coin. The alternative one pairs *all*
//! singles by a uniformly random perfect matching, discards pairs in which
//! nobody fired, and applies the same coins; both induce the same law on the
//! pair-type process.

mod schedule;
mod seed;

pub use schedule::{sample_firing_schedule, FiringProcessSpec, FiringSchedule};
pub use seed::{derive_seed, replication_rng};

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::SemError;
use crate::law::{Flavor, PreferenceMatrix, RateVector};
use crate::population::{AnimalId, AnimalRoster, PairList, PopulationCounts};
use crate::table::PairTypeMatrix;

/// Tie-break order for simultaneous firers within a round. The induced law
/// does not depend on it; the knob exists so that invariance can be tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirerOrder {
    #[default]
    FemalesFirst,
    MalesFirst,
}

/// Everything a simulation run needs: who exists, how they fire, and how
/// encounters turn into matings.
#[derive(Debug, Clone)]
pub struct SemModel {
    pub population: PopulationCounts,
    pub roster: AnimalRoster,
    pub preferences: PreferenceMatrix,
    pub firing: FiringProcessSpec,
    pub firer_order: FirerOrder,
}

impl SemModel {
    pub fn new(
        population: PopulationCounts,
        roster: AnimalRoster,
        preferences: PreferenceMatrix,
        firing: FiringProcessSpec,
    ) -> Result<Self, SemError> {
        if preferences.k() != population.k() {
            return Err(SemError::DimensionMismatch(preferences.k(), population.k()));
        }
        if roster.n() != population.n() as usize || roster.k() != population.k() {
            return Err(SemError::InvalidRoster);
        }
        match &firing {
            FiringProcessSpec::PoissonRates(r) | FiringProcessSpec::BernoulliProbabilities(r) => {
                if r.k() != population.k() {
                    return Err(SemError::DimensionMismatch(r.k(), population.k()));
                }
            }
            FiringProcessSpec::ExplicitSchedule(s) => {
                if s.n() != population.n() as usize {
                    return Err(SemError::DimensionMismatch(s.n(), population.n() as usize));
                }
            }
        }
        Ok(Self {
            population,
            roster,
            preferences,
            firing,
            firer_order: FirerOrder::default(),
        })
    }

    /// Canonical-roster model with Poisson firing.
    pub fn poisson(
        population: PopulationCounts,
        preferences: PreferenceMatrix,
        rates: RateVector,
    ) -> Result<Self, SemError> {
        let roster = AnimalRoster::canonical(&population);
        let firing = FiringProcessSpec::poisson(rates)?;
        Self::new(population, roster, preferences, firing)
    }

    /// Canonical-roster model with Bernoulli firing.
    pub fn bernoulli(
        population: PopulationCounts,
        preferences: PreferenceMatrix,
        rates: RateVector,
    ) -> Result<Self, SemError> {
        let roster = AnimalRoster::canonical(&population);
        let firing = FiringProcessSpec::bernoulli(rates)?;
        Self::new(population, roster, preferences, firing)
    }

    /// Canonical-roster model driven by an explicit schedule.
    pub fn explicit(
        population: PopulationCounts,
        preferences: PreferenceMatrix,
        schedule: FiringSchedule,
    ) -> Result<Self, SemError> {
        let roster = AnimalRoster::canonical(&population);
        Self::new(population, roster, preferences, FiringProcessSpec::explicit(schedule))
    }

    pub fn with_firer_order(mut self, order: FirerOrder) -> Self {
        self.firer_order = order;
        self
    }
}

/// The animals not yet in a permanent pair, by sex, in ascending label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinglesPool {
    females: Vec<usize>,
    males: Vec<usize>,
}

impl SinglesPool {
    pub fn full(n: usize) -> Self {
        Self { females: (0..n).collect(), males: (0..n).collect() }
    }

    pub fn females(&self) -> &[usize] {
        &self.females
    }

    pub fn males(&self) -> &[usize] {
        &self.males
    }

    /// Number of single females (equivalently males).
    pub fn len(&self) -> usize {
        self.females.len()
    }

    pub fn is_empty(&self) -> bool {
        self.females.is_empty()
    }

    fn remove_female(&mut self, a: usize) {
        let idx = self.females.binary_search(&a).expect("female is single");
        self.females.remove(idx);
    }

    fn remove_male(&mut self, b: usize) {
        let idx = self.males.binary_search(&b).expect("male is single");
        self.males.remove(idx);
    }
}

/// One pattern jump: the round time, the pairs formed there, and the running
/// pattern just after.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Jump {
    pub time: f64,
    pub new_pairs: PairList,
    pub pattern_after: PairTypeMatrix,
}

/// Full record of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub jumps: Vec<Jump>,
    pub terminal_time: f64,
    pub terminal_pairlist: PairList,
    pub terminal_pattern: PairTypeMatrix,
    pub rounds_elapsed: u64,
    /// Rounds at which two continuous-time clocks collided in floating point.
    pub simultaneity_anomalies: u64,
}

/// Stage I of a firing round: every firer not already in a temporary pair
/// samples a uniformly random unpaired single of the opposite sex. Every
/// admissible covering set C in which each pair contains a firer comes out
/// with probability (s - |C|)! / s! for s current singles per sex.
pub fn encounter_round(
    pool: &SinglesPool,
    firers: &[AnimalId],
    rng: &mut ChaCha8Rng,
) -> PairList {
    let mut avail_f = pool.females().to_vec();
    let mut avail_m = pool.males().to_vec();
    let mut in_pair: HashSet<AnimalId> = HashSet::new();
    let mut pairs = Vec::new();
    for &firer in firers {
        if in_pair.contains(&firer) {
            continue;
        }
        let (a, b) = match firer {
            AnimalId::Female(a) => {
                let idx = rng.random_range(0..avail_m.len());
                let b = avail_m.swap_remove(idx);
                let pos = avail_f.iter().position(|&x| x == a).expect("firer is single");
                avail_f.swap_remove(pos);
                (a, b)
            }
            AnimalId::Male(b) => {
                let idx = rng.random_range(0..avail_f.len());
                let a = avail_f.swap_remove(idx);
                let pos = avail_m.iter().position(|&x| x == b).expect("firer is single");
                avail_m.swap_remove(pos);
                (a, b)
            }
        };
        in_pair.insert(AnimalId::Female(a));
        in_pair.insert(AnimalId::Male(b));
        pairs.push((a, b));
    }
    PairList::new(pairs).expect("sampling without replacement is admissible")
}

/// Stage I in the alternative representation: match all singles uniformly,
/// then keep only the pairs containing at least one firer.
fn alternative_round(
    pool: &SinglesPool,
    firers: &[AnimalId],
    rng: &mut ChaCha8Rng,
) -> PairList {
    let mut matched_males = pool.males().to_vec();
    matched_males.shuffle(rng);
    let firer_set: HashSet<AnimalId> = firers.iter().copied().collect();
    let mut pairs = Vec::new();
    for (i, &a) in pool.females().iter().enumerate() {
        let b = matched_males[i];
        if firer_set.contains(&AnimalId::Female(a)) || firer_set.contains(&AnimalId::Male(b)) {
            pairs.push((a, b));
        }
    }
    PairList::new(pairs).expect("a perfect matching is admissible")
}

enum ExtendMode {
    Poisson(RateVector),
    Bernoulli(RateVector),
    Fixed,
}

/// Per-animal firing clocks with consumption cursors and, for memoryless
/// flavors, on-demand horizon extension.
struct Clocks {
    female_times: Vec<Vec<f64>>,
    male_times: Vec<Vec<f64>>,
    female_cursor: Vec<usize>,
    male_cursor: Vec<usize>,
    horizon: f64,
    span: f64,
    mode: ExtendMode,
}

impl Clocks {
    fn init(model: &SemModel, rng: &mut ChaCha8Rng) -> Result<Self, SemError> {
        let n = model.population.n() as usize;
        let (schedule, span, mode) = match &model.firing {
            FiringProcessSpec::PoissonRates(rates) => {
                let span = initial_span(&model.population, rates);
                let sched =
                    schedule::sample_schedule_with_rng(&model.firing, &model.roster, span, rng)?;
                (sched, span, ExtendMode::Poisson(rates.clone()))
            }
            FiringProcessSpec::BernoulliProbabilities(rates) => {
                let span = initial_span(&model.population, rates);
                let sched =
                    schedule::sample_schedule_with_rng(&model.firing, &model.roster, span, rng)?;
                (sched, span, ExtendMode::Bernoulli(rates.clone()))
            }
            FiringProcessSpec::ExplicitSchedule(s) => (s.clone(), 0.0, ExtendMode::Fixed),
        };
        let horizon = schedule.horizon();
        let female_times: Vec<Vec<f64>> =
            (0..n).map(|a| schedule.female_times(a).to_vec()).collect();
        let male_times: Vec<Vec<f64>> = (0..n).map(|b| schedule.male_times(b).to_vec()).collect();
        Ok(Self {
            female_times,
            male_times,
            female_cursor: vec![0; n],
            male_cursor: vec![0; n],
            horizon,
            span,
            mode,
        })
    }

    fn next_female(&self, a: usize) -> Option<f64> {
        self.female_times[a].get(self.female_cursor[a]).copied()
    }

    fn next_male(&self, b: usize) -> Option<f64> {
        self.male_times[b].get(self.male_cursor[b]).copied()
    }

    /// Draw a fresh segment for every still-single animal; valid because the
    /// memoryless flavors forget how long the current horizon has been quiet.
    fn extend(
        &mut self,
        singles: &SinglesPool,
        roster: &AnimalRoster,
        rng: &mut ChaCha8Rng,
    ) -> Result<(), SemError> {
        match &self.mode {
            ExtendMode::Fixed => Err(SemError::HorizonExhausted),
            ExtendMode::Poisson(rates) => {
                let new_horizon = self.horizon + self.span;
                for &a in singles.females() {
                    let rate = rates.alpha()[roster.female_type(a)];
                    let ts = schedule::sample_poisson_times(rng, rate, self.horizon, new_horizon);
                    self.female_times[a].extend(ts);
                }
                for &b in singles.males() {
                    let rate = rates.beta()[roster.male_type(b)];
                    let ts = schedule::sample_poisson_times(rng, rate, self.horizon, new_horizon);
                    self.male_times[b].extend(ts);
                }
                self.horizon = new_horizon;
                Ok(())
            }
            ExtendMode::Bernoulli(rates) => {
                let start = self.horizon as u64;
                let end = start + self.span as u64;
                for &a in singles.females() {
                    let p = rates.alpha()[roster.female_type(a)];
                    let ts = schedule::sample_bernoulli_times(rng, p, start, end);
                    self.female_times[a].extend(ts);
                }
                for &b in singles.males() {
                    let p = rates.beta()[roster.male_type(b)];
                    let ts = schedule::sample_bernoulli_times(rng, p, start, end);
                    self.male_times[b].extend(ts);
                }
                self.horizon = end as f64;
                Ok(())
            }
        }
    }
}

/// Starting horizon: a few multiples of the slowest pair's expected first
/// firing, clamped so the initial draw stays small. Extension covers the
/// tail either way.
fn initial_span(pop: &PopulationCounts, rates: &RateVector) -> f64 {
    let k = rates.k();
    let mut min_pair = f64::INFINITY;
    for i in 0..k {
        for j in 0..k {
            min_pair = min_pair.min(rates.pair_rate(i, j));
        }
    }
    let n = pop.n() as f64;
    match rates.flavor() {
        Flavor::Poisson => {
            let total: f64 = (0..k)
                .map(|i| rates.alpha()[i] * pop.female_count(i) as f64)
                .sum::<f64>()
                + (0..k)
                    .map(|j| rates.beta()[j] * pop.male_count(j) as f64)
                    .sum::<f64>();
            let span = (4.0 * n / min_pair).max(1.0);
            span.min((1e6 / total.max(1e-9)).max(1.0))
        }
        Flavor::Bernoulli => {
            let span = (4.0 * n / min_pair).ceil().max(1.0);
            span.min((1e6 / (2.0 * n)).ceil().max(1.0))
        }
    }
}

enum Mechanism {
    Faithful,
    Alternative,
}

fn run_with_mechanism(
    model: &SemModel,
    seed: u64,
    mechanism: Mechanism,
) -> Result<SimulationRecord, SemError> {
    model.population.require_nonempty()?;
    let n = model.population.n() as usize;
    let k = model.population.k();
    let roster = &model.roster;
    let mut rng = replication_rng(seed, 0);
    let mut clocks = Clocks::init(model, &mut rng)?;
    let mut singles = SinglesPool::full(n);
    let mut pattern = PairTypeMatrix::zero(k);
    let mut all_pairs: Vec<(usize, usize)> = Vec::new();
    let mut jumps = Vec::new();
    let mut rounds = 0u64;
    let mut anomalies = 0u64;
    let mut terminal_time = 0.0;

    while !singles.is_empty() {
        let mut t_star = f64::INFINITY;
        for &a in singles.females() {
            if let Some(t) = clocks.next_female(a) {
                t_star = t_star.min(t);
            }
        }
        for &b in singles.males() {
            if let Some(t) = clocks.next_male(b) {
                t_star = t_star.min(t);
            }
        }
        if !t_star.is_finite() {
            clocks.extend(&singles, roster, &mut rng)?;
            continue;
        }

        let firing_females: Vec<usize> = singles
            .females()
            .iter()
            .copied()
            .filter(|&a| clocks.next_female(a) == Some(t_star))
            .collect();
        let firing_males: Vec<usize> = singles
            .males()
            .iter()
            .copied()
            .filter(|&b| clocks.next_male(b) == Some(t_star))
            .collect();
        if matches!(clocks.mode, ExtendMode::Poisson(_))
            && firing_females.len() + firing_males.len() > 1
        {
            anomalies += 1;
        }
        rounds += 1;

        let females = firing_females.iter().map(|&a| AnimalId::Female(a));
        let males = firing_males.iter().map(|&b| AnimalId::Male(b));
        let firers: Vec<AnimalId> = match model.firer_order {
            FirerOrder::FemalesFirst => females.chain(males).collect(),
            FirerOrder::MalesFirst => males.chain(females).collect(),
        };

        let temporary = match mechanism {
            Mechanism::Faithful => encounter_round(&singles, &firers, &mut rng),
            Mechanism::Alternative => alternative_round(&singles, &firers, &mut rng),
        };

        let mut new_pairs = Vec::new();
        for &(a, b) in temporary.pairs() {
            let p = model
                .preferences
                .get(roster.female_type(a), roster.male_type(b));
            if rng.random::<f64>() < p {
                new_pairs.push((a, b));
            }
        }

        for &a in &firing_females {
            clocks.female_cursor[a] += 1;
        }
        for &b in &firing_males {
            clocks.male_cursor[b] += 1;
        }

        if !new_pairs.is_empty() {
            for &(a, b) in &new_pairs {
                singles.remove_female(a);
                singles.remove_male(b);
                pattern = pattern.bump(roster.female_type(a), roster.male_type(b));
            }
            all_pairs.extend(new_pairs.iter().copied());
            jumps.push(Jump {
                time: t_star,
                new_pairs: PairList::new(new_pairs).expect("new pairs are disjoint"),
                pattern_after: pattern.clone(),
            });
        }
        terminal_time = t_star;
    }

    debug_assert!(pattern.is_table_of(&model.population));
    Ok(SimulationRecord {
        jumps,
        terminal_time,
        terminal_pairlist: PairList::new(all_pairs).expect("permanent pairs are disjoint"),
        terminal_pattern: pattern,
        rounds_elapsed: rounds,
        simultaneity_anomalies: anomalies,
    })
}

/// Simulate one run with the faithful round mechanism.
pub fn run_sem(model: &SemModel, seed: u64) -> Result<SimulationRecord, SemError> {
    run_with_mechanism(model, seed, Mechanism::Faithful)
}

/// Simulate one run with the alternative (match-all, discard) mechanism.
pub fn run_sem_alternative(model: &SemModel, seed: u64) -> Result<SimulationRecord, SemError> {
    run_with_mechanism(model, seed, Mechanism::Alternative)
}
