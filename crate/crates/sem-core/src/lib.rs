//! Stochastic encounter-mating: monogamous pair formation in a population of
//! typed females and males.
//!
//! Animals fire at point-process times, encounter a uniformly random single of
//! the opposite sex, and mate with a type-dependent probability. The crate
//! provides:
//!
//! - faithful and alternative-representation simulators over Poisson,
//!   Bernoulli, or explicitly supplied firing schedules ([`engine`]);
//! - closed-form pair-type distributions, including the multiple
//!   hypergeometric terminal law and the fine-balanced time-t laws ([`exact`]);
//! - the infinitesimal generator / transition kernel of the pair-type process
//!   together with transient solvers, terminal-expectation recursions, and an
//!   absorbing-chain terminal oracle ([`dynamics`]);
//! - fine-balance detection, constructive rate decompositions, and the k = 2
//!   heterogamy/panmixia/homogamy trichotomy ([`classify`]);
//! - Monte Carlo estimators, goodness-of-fit reports, and brute-force
//!   permutation oracles ([`verify`]).

pub mod classify;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod exact;
pub mod law;
pub mod numeric;
pub mod population;
pub mod table;
pub mod verify;

pub use error::SemError;
pub use law::{em_law, EmLaw, Flavor, PreferenceMatrix, RateVector};
pub use population::{pattern_from_pairlist, AnimalId, AnimalRoster, PairList, PopulationCounts};
pub use table::{
    enumerate_completions, enumerate_completions_capped, enumerate_states,
    enumerate_states_capped, enumerate_tables, enumerate_tables_capped, PairTypeMatrix,
    DEFAULT_STATE_CAP,
};
