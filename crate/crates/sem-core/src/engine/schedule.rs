//! Firing schedules: per-animal strictly increasing positive firing times,
//! sampled from the memoryless families or supplied explicitly.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::SemError;
use crate::law::{Flavor, RateVector};
use crate::population::AnimalRoster;

/// How the engine obtains firing times.
#[derive(Debug, Clone)]
pub enum FiringProcessSpec {
    PoissonRates(RateVector),
    BernoulliProbabilities(RateVector),
    ExplicitSchedule(FiringSchedule),
}

impl FiringProcessSpec {
    pub fn poisson(rates: RateVector) -> Result<Self, SemError> {
        if rates.flavor() != Flavor::Poisson {
            return Err(SemError::InvalidRates("expected Poisson intensities".into()));
        }
        Ok(Self::PoissonRates(rates))
    }

    pub fn bernoulli(rates: RateVector) -> Result<Self, SemError> {
        if rates.flavor() != Flavor::Bernoulli {
            return Err(SemError::InvalidRates(
                "expected Bernoulli success probabilities".into(),
            ));
        }
        Ok(Self::BernoulliProbabilities(rates))
    }

    pub fn explicit(schedule: FiringSchedule) -> Self {
        Self::ExplicitSchedule(schedule)
    }
}

/// Firing times for every animal, truncated at a horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiringSchedule {
    female: Vec<Vec<f64>>,
    male: Vec<Vec<f64>>,
    horizon: f64,
}

fn check_times(times: &[f64], label: &str) -> Result<(), SemError> {
    let mut prev = 0.0;
    for &t in times {
        if !t.is_finite() || t <= prev {
            return Err(SemError::ImproperSchedule(format!(
                "{label}: time {t} after {prev}"
            )));
        }
        prev = t;
    }
    Ok(())
}

impl FiringSchedule {
    /// An explicitly supplied schedule; the horizon is the latest listed time.
    pub fn explicit(female: Vec<Vec<f64>>, male: Vec<Vec<f64>>) -> Result<Self, SemError> {
        if female.len() != male.len() {
            return Err(SemError::DimensionMismatch(female.len(), male.len()));
        }
        for (a, times) in female.iter().enumerate() {
            check_times(times, &format!("F{}", a + 1))?;
        }
        for (b, times) in male.iter().enumerate() {
            check_times(times, &format!("M{}", b + 1))?;
        }
        let horizon = female
            .iter()
            .chain(male.iter())
            .flat_map(|ts| ts.last().copied())
            .fold(0.0f64, f64::max);
        Ok(Self { female, male, horizon })
    }

    pub(crate) fn from_parts(female: Vec<Vec<f64>>, male: Vec<Vec<f64>>, horizon: f64) -> Self {
        Self { female, male, horizon }
    }

    /// Parse the plain-text format: one line per animal, `F<index>` or
    /// `M<index>` (1-based) followed by whitespace-separated strictly
    /// increasing positive times. Unlisted animals never fire.
    pub fn parse(text: &str, n: usize) -> Result<Self, SemError> {
        let mut female = vec![Vec::new(); n];
        let mut male = vec![Vec::new(); n];
        let mut seen: Vec<(char, usize)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let head = fields.next().unwrap();
            let (sex, index_str) = head.split_at(1);
            let sex = match sex {
                "F" | "f" => 'F',
                "M" | "m" => 'M',
                _ => {
                    return Err(SemError::ScheduleParse {
                        line,
                        message: format!("animal id must start with F or M, got {head:?}"),
                    })
                }
            };
            let index: usize = index_str.parse().map_err(|_| SemError::ScheduleParse {
                line,
                message: format!("bad animal index in {head:?}"),
            })?;
            if index == 0 || index > n {
                return Err(SemError::ScheduleParse {
                    line,
                    message: format!("animal index {index} outside 1..={n}"),
                });
            }
            if seen.contains(&(sex, index)) {
                return Err(SemError::ScheduleParse {
                    line,
                    message: format!("duplicate entry for {sex}{index}"),
                });
            }
            seen.push((sex, index));
            let mut times = Vec::new();
            for field in fields {
                let t: f64 = field.parse().map_err(|_| SemError::ScheduleParse {
                    line,
                    message: format!("bad time {field:?}"),
                })?;
                times.push(t);
            }
            if sex == 'F' {
                female[index - 1] = times;
            } else {
                male[index - 1] = times;
            }
        }
        Self::explicit(female, male)
    }

    /// Render in the `parse` format, skipping animals that never fire.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut write = |tag: char, idx: usize, times: &[f64]| {
            if times.is_empty() {
                return;
            }
            out.push(tag);
            out.push_str(&(idx + 1).to_string());
            for t in times {
                out.push(' ');
                out.push_str(&t.to_string());
            }
            out.push('\n');
        };
        for (a, times) in self.female.iter().enumerate() {
            write('F', a, times);
        }
        for (b, times) in self.male.iter().enumerate() {
            write('M', b, times);
        }
        out
    }

    pub fn n(&self) -> usize {
        self.female.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn female_times(&self, a: usize) -> &[f64] {
        &self.female[a]
    }

    pub fn male_times(&self, b: usize) -> &[f64] {
        &self.male[b]
    }
}

/// One exponential interarrival; the measure-zero zero draw is nudged so
/// cumulative times stay strictly increasing.
pub(crate) fn exp_interarrival(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    let mut d = -(1.0 - u).ln() / rate;
    if d == 0.0 {
        d = f64::MIN_POSITIVE;
    }
    d
}

pub(crate) fn sample_poisson_times(
    rng: &mut ChaCha8Rng,
    rate: f64,
    start: f64,
    end: f64,
) -> Vec<f64> {
    let mut times = Vec::new();
    if rate <= 0.0 {
        return times;
    }
    let mut t = start;
    loop {
        t += exp_interarrival(rng, rate);
        if t > end {
            return times;
        }
        times.push(t);
    }
}

pub(crate) fn sample_bernoulli_times(
    rng: &mut ChaCha8Rng,
    prob: f64,
    start: u64,
    end: u64,
) -> Vec<f64> {
    let mut times = Vec::new();
    if prob <= 0.0 {
        return times;
    }
    for round in (start + 1)..=end {
        if rng.random::<f64>() < prob {
            times.push(round as f64);
        }
    }
    times
}

pub(crate) fn sample_schedule_with_rng(
    spec: &FiringProcessSpec,
    roster: &AnimalRoster,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<FiringSchedule, SemError> {
    let n = roster.n();
    match spec {
        FiringProcessSpec::PoissonRates(rates) => {
            if !horizon.is_finite() || horizon <= 0.0 {
                return Err(SemError::InvalidHorizon(format!(
                    "Poisson horizon must be positive and finite, got {horizon}"
                )));
            }
            let female = (0..n)
                .map(|a| sample_poisson_times(rng, rates.alpha()[roster.female_type(a)], 0.0, horizon))
                .collect();
            let male = (0..n)
                .map(|b| sample_poisson_times(rng, rates.beta()[roster.male_type(b)], 0.0, horizon))
                .collect();
            Ok(FiringSchedule::from_parts(female, male, horizon))
        }
        FiringProcessSpec::BernoulliProbabilities(rates) => {
            if !horizon.is_finite() || horizon <= 0.0 || horizon.fract() != 0.0 {
                return Err(SemError::InvalidHorizon(format!(
                    "Bernoulli horizon must be a positive integer, got {horizon}"
                )));
            }
            let end = horizon as u64;
            let female = (0..n)
                .map(|a| sample_bernoulli_times(rng, rates.alpha()[roster.female_type(a)], 0, end))
                .collect();
            let male = (0..n)
                .map(|b| sample_bernoulli_times(rng, rates.beta()[roster.male_type(b)], 0, end))
                .collect();
            Ok(FiringSchedule::from_parts(female, male, horizon))
        }
        FiringProcessSpec::ExplicitSchedule(schedule) => {
            if schedule.n() != n {
                return Err(SemError::DimensionMismatch(schedule.n(), n));
            }
            Ok(schedule.clone())
        }
    }
}

/// Sample a truncated schedule for every animal in the roster; deterministic
/// given the seed. Zero-rate animals get an empty time list.
pub fn sample_firing_schedule(
    spec: &FiringProcessSpec,
    roster: &AnimalRoster,
    horizon: f64,
    seed: u64,
) -> Result<FiringSchedule, SemError> {
    let mut rng = super::seed::replication_rng(seed, 0);
    sample_schedule_with_rng(spec, roster, horizon, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::PopulationCounts;

    fn roster() -> AnimalRoster {
        let pop = PopulationCounts::new(vec![1, 1], vec![1, 1]).unwrap();
        AnimalRoster::canonical(&pop)
    }

    #[test]
    fn certain_bernoulli_males_fire_every_round() {
        let rates = RateVector::new(Flavor::Bernoulli, vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let spec = FiringProcessSpec::bernoulli(rates).unwrap();
        let sched = sample_firing_schedule(&spec, &roster(), 5.0, 7).unwrap();
        for b in 0..2 {
            assert_eq!(sched.male_times(b), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        }
    }

    #[test]
    fn zero_rate_females_never_fire() {
        let rates = RateVector::new(Flavor::Poisson, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let spec = FiringProcessSpec::poisson(rates).unwrap();
        let sched = sample_firing_schedule(&spec, &roster(), 10.0, 3).unwrap();
        for a in 0..2 {
            assert!(sched.female_times(a).is_empty());
        }
        for b in 0..2 {
            assert!(!sched.male_times(b).is_empty());
            check_times(sched.male_times(b), "M").unwrap();
        }
    }

    // Count statistics oracle: a unit-rate process on [0, 10] has mean count
    // 10 and variance 10 per draw.
    #[test]
    fn poisson_counts_have_the_right_mean() {
        let rates = RateVector::new(Flavor::Poisson, vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let spec = FiringProcessSpec::poisson(rates).unwrap();
        let reps = 100_000;
        let mut total = 0usize;
        for r in 0..reps {
            let sched = sample_firing_schedule(&spec, &roster(), 10.0, 1000 + r).unwrap();
            total += sched.female_times(0).len();
        }
        let mean = total as f64 / reps as f64;
        let se = (10.0f64 / reps as f64).sqrt();
        assert!(
            (mean - 10.0).abs() < 3.0 * se,
            "mean {mean} outside 10 +- {}",
            3.0 * se
        );
    }

    #[test]
    fn schedules_are_deterministic_in_the_seed() {
        let rates = RateVector::new(Flavor::Poisson, vec![0.7, 1.3], vec![0.2, 2.0]).unwrap();
        let spec = FiringProcessSpec::poisson(rates).unwrap();
        let a = sample_firing_schedule(&spec, &roster(), 8.0, 99).unwrap();
        let b = sample_firing_schedule(&spec, &roster(), 8.0, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn horizon_validation() {
        let rates = RateVector::new(Flavor::Bernoulli, vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let spec = FiringProcessSpec::bernoulli(rates).unwrap();
        assert!(matches!(
            sample_firing_schedule(&spec, &roster(), 2.5, 1).unwrap_err(),
            SemError::InvalidHorizon(_)
        ));
        let rates = RateVector::new(Flavor::Poisson, vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let spec = FiringProcessSpec::poisson(rates).unwrap();
        assert!(matches!(
            sample_firing_schedule(&spec, &roster(), 0.0, 1).unwrap_err(),
            SemError::InvalidHorizon(_)
        ));
    }

    #[test]
    fn parse_round_trips() {
        let text = "# explicit schedule\nF1 0.5 1.25 3\nM2 0.75\n";
        let sched = FiringSchedule::parse(text, 2).unwrap();
        assert_eq!(sched.female_times(0), &[0.5, 1.25, 3.0]);
        assert!(sched.female_times(1).is_empty());
        assert_eq!(sched.male_times(1), &[0.75]);
        assert_eq!(sched.horizon(), 3.0);
        let reparsed = FiringSchedule::parse(&sched.to_text(), 2).unwrap();
        assert_eq!(reparsed, sched);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(
            FiringSchedule::parse("X1 1.0", 2).unwrap_err(),
            SemError::ScheduleParse { line: 1, .. }
        ));
        assert!(matches!(
            FiringSchedule::parse("F3 1.0", 2).unwrap_err(),
            SemError::ScheduleParse { line: 1, .. }
        ));
        assert!(matches!(
            FiringSchedule::parse("F1 1.0\nF1 2.0", 2).unwrap_err(),
            SemError::ScheduleParse { line: 2, .. }
        ));
        // Times must be strictly increasing and positive.
        assert!(matches!(
            FiringSchedule::parse("F1 2.0 2.0", 2).unwrap_err(),
            SemError::ImproperSchedule(_)
        ));
        assert!(matches!(
            FiringSchedule::parse("M1 0.0 1.0", 2).unwrap_err(),
            SemError::ImproperSchedule(_)
        ));
    }
}
