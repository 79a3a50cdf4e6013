use sem_core::classify::check_fine_balance;
use sem_core::dynamics::{terminal_pmf_absorbing_capped, TerminalExpectationSolver};
use sem_core::exact::terminal_pmf_definite;
use sem_core::population::AnimalRoster;
use sem_core::verify::{
    empirical_terminal_pmf, empirical_terminal_pmf_alternative, gof_compare,
    permutation_oracle_definite, ORACLE_LIMIT,
};
use sem_core::SemError;

use crate::config::Experiment;
use crate::output::{Document, Section, Value};

struct Checks {
    section: Section,
    all_passed: bool,
}

impl Checks {
    fn new() -> Self {
        Self {
            section: Section::new(
                "checks",
                vec![
                    "check".into(),
                    "status".into(),
                    "statistic".into(),
                    "p_value_or_gap".into(),
                    "threshold".into(),
                ],
            ),
            all_passed: true,
        }
    }

    fn record(&mut self, name: &str, passed: bool, statistic: f64, value: f64, threshold: f64) {
        self.all_passed &= passed;
        self.section.push(vec![
            Value::from(name),
            Value::from(if passed { "PASS" } else { "FAIL" }),
            Value::from(statistic),
            Value::from(value),
            Value::from(threshold),
        ]);
    }
}

/// Cross-check the simulator, the absorbing-lattice law, the expectation
/// recursion, and (where the closed form applies) the permutation oracle.
/// Returns the report and whether every check passed.
pub fn run(exp: &Experiment) -> Result<(Document, bool), SemError> {
    let pop = &exp.population;
    pop.require_nonempty()?;
    let runs = exp.runs.unwrap_or(100_000);
    let significance = exp.tol_or(1e-3);
    let model = exp.model()?;
    let mut checks = Checks::new();

    let absorbing = terminal_pmf_absorbing_capped(pop, &exp.law, exp.state_cap)?;

    let (empirical, counts) = empirical_terminal_pmf(&model, runs, exp.seed)?;
    let aligned = sem_core::exact::PmfOverTables::new(
        empirical.support().to_vec(),
        empirical.support().iter().map(|m| absorbing.prob(m)).collect(),
    )?;
    let report = gof_compare(&counts, &aligned)?;
    checks.record(
        "simulation vs absorbing lattice",
        report.passes(significance),
        report.statistic,
        report.p_value,
        significance,
    );

    let (_, alt_counts) = empirical_terminal_pmf_alternative(&model, runs, exp.seed ^ 0x5eed)?;
    let alt_report = gof_compare(&alt_counts, &aligned)?;
    checks.record(
        "alternative mechanism vs absorbing lattice",
        alt_report.passes(significance),
        alt_report.statistic,
        alt_report.p_value,
        significance,
    );

    let u = TerminalExpectationSolver::new(&exp.law).expectation(pop)?;
    let k = pop.k();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            worst = worst.max((absorbing.mean_entry(i, j) - u[i][j]).abs());
        }
    }
    checks.record(
        "absorbing mean vs expectation recursion",
        worst <= 1e-10,
        worst,
        worst,
        1e-10,
    );

    let closed_form_applies =
        exp.preferences_definite || check_fine_balance(&exp.law, 1e-9);
    if closed_form_applies {
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let product = pop.female_count(i) as f64 * pop.male_count(j) as f64
                    / pop.n() as f64;
                worst = worst.max((u[i][j] - product).abs());
            }
        }
        checks.record(
            "expectation recursion vs product form",
            worst <= 1e-10,
            worst,
            worst,
            1e-10,
        );

        if pop.n() <= ORACLE_LIMIT {
            let roster = AnimalRoster::canonical(pop);
            let oracle = permutation_oracle_definite(pop, &roster)?;
            let mut worst = 0.0f64;
            for (m, prob) in oracle.iter() {
                worst = worst.max((prob - terminal_pmf_definite(pop, m)?).abs());
            }
            checks.record(
                "permutation oracle vs closed form",
                worst <= 1e-12,
                worst,
                worst,
                1e-12,
            );
        }
    }

    let mut doc = Document::default();
    let all_passed = checks.all_passed;
    doc.push(checks.section);
    Ok((doc, all_passed))
}
