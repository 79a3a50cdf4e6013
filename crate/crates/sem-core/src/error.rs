use thiserror::Error;

use crate::law::Flavor;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemError {
    #[error("type vectors differ in length: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("at least two types are required, got k = {0}")]
    TooFewTypes(usize),
    #[error("female total {sum_x} does not equal male total {sum_y}; the population must have equally many females and males")]
    UnequalTotals { sum_x: u64, sum_y: u64 },
    #[error("operation requires a nonempty population")]
    EmptyPopulation,
    #[error("mating preferences must lie in (0, 1]: p[{i}][{j}] = {value}")]
    InvalidPreference { i: usize, j: usize, value: f64 },
    #[error("invalid firing rates: {0}")]
    InvalidRates(String),
    #[error("invalid encounter-mating law: {0}")]
    InvalidLaw(String),
    #[error("state space exceeds the configured cap of {cap} entries")]
    StateSpaceTooLarge { cap: usize },
    #[error("matrix margins do not equal the population counts")]
    NotATable,
    #[error("matrix margins exceed the population counts")]
    NotAState,
    #[error("pair references an animal outside the roster")]
    InvalidIndex,
    #[error("pair list is not admissible: an animal appears in two pairs")]
    NotAdmissible,
    #[error("roster type counts do not match the population")]
    InvalidRoster,
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("explicit firing schedule exhausted before the singles' pool emptied")]
    HorizonExhausted,
    #[error("firing times must be positive and strictly increasing: {0}")]
    ImproperSchedule(String),
    #[error("schedule line {line}: {message}")]
    ScheduleParse { line: usize, message: String },
    #[error("law violates the {flavor:?} fine balance condition; worst quadruple (i, j, i', j') = ({i}, {j}, {ip}, {jp}) with residual {residual:e}")]
    NotFineBalanced {
        flavor: Flavor,
        i: usize,
        j: usize,
        ip: usize,
        jp: usize,
        residual: f64,
    },
    #[error("time must be a nonnegative integer for lattice-supported laws, got {0}")]
    NonIntegerTime(f64),
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("classification is defined for k = 2 only, got k = {0}")]
    WrongDimension(usize),
    #[error("transition kernel is degenerate: no escape from the empty pattern")]
    DegenerateKernel,
    #[error("population too large for factorial enumeration: n = {n}, limit {limit}")]
    TooLargeForOracle { n: u64, limit: u64 },
    #[error("sample is empty")]
    EmptySample,
    #[error("at least {needed} replications are required, got {got}")]
    TooFewRuns { needed: u64, got: u64 },
}
