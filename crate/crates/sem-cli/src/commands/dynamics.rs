use sem_core::dynamics::{
    generator_poisson_capped, kernel_bernoulli_capped, terminal_pmf_absorbing_capped,
    transient_distribution_capped, TerminalExpectationSolver,
};
use sem_core::law::Flavor;
use sem_core::table::PairTypeMatrix;
use sem_core::SemError;

use super::cell_values;
use crate::config::Experiment;
use crate::output::{cell_columns, Document, Section, Value};

fn states_section(states: &[PairTypeMatrix], exp: &Experiment) -> Section {
    let k = exp.population.k();
    let mut columns = vec!["state".to_string()];
    columns.extend(cell_columns(k));
    columns.push("total".into());
    columns.push("absorbing".into());
    let mut section = Section::new("states", columns);
    for (s, m) in states.iter().enumerate() {
        let mut row = vec![Value::from(s)];
        row.extend(cell_values(m));
        row.push(Value::from(m.total()));
        row.push(Value::from(m.is_table_of(&exp.population)));
        section.push(row);
    }
    section
}

/// Markov machinery dump: the generator or kernel, transient distributions on
/// the time grid, the terminal expectation, and the absorbing terminal law.
pub fn run(exp: &Experiment) -> Result<Document, SemError> {
    let pop = &exp.population;
    let k = pop.k();
    let mut doc = Document::default();

    match exp.flavor {
        Flavor::Poisson => {
            let gen = generator_poisson_capped(pop, &exp.law, exp.state_cap)?;
            doc.push(states_section(gen.states(), exp));
            let mut section = Section::new(
                "generator",
                vec!["from".into(), "to".into(), "rate".into()],
            );
            for s in 0..gen.len() {
                for &(target, rate) in gen.transitions(s) {
                    section.push(vec![
                        Value::from(s),
                        Value::from(target),
                        Value::from(rate),
                    ]);
                }
                if !gen.is_absorbing(s) {
                    section.push(vec![
                        Value::from(s),
                        Value::from(s),
                        Value::from(-gen.exit_rate(s)),
                    ]);
                }
            }
            doc.push(section);
        }
        Flavor::Bernoulli => {
            let kernel = kernel_bernoulli_capped(pop, &exp.law, exp.state_cap)?;
            doc.push(states_section(kernel.states(), exp));
            let mut section = Section::new(
                "kernel",
                vec!["from".into(), "to".into(), "probability".into()],
            );
            for s in 0..kernel.len() {
                for &(target, prob) in kernel.transitions(s) {
                    section.push(vec![
                        Value::from(s),
                        Value::from(target),
                        Value::from(prob),
                    ]);
                }
            }
            doc.push(section);
        }
    }

    if !exp.t_grid.is_empty() {
        let mut columns = vec!["t".to_string()];
        columns.extend(cell_columns(k));
        columns.push("probability".into());
        let mut section = Section::new("transient", columns);
        for &t in &exp.t_grid {
            let pmf = transient_distribution_capped(pop, &exp.law, t, exp.state_cap)?;
            for (m, prob) in pmf.iter() {
                let mut row = vec![Value::from(t)];
                row.extend(cell_values(m));
                row.push(Value::from(prob));
                section.push(row);
            }
        }
        doc.push(section);
    }

    let u = TerminalExpectationSolver::new(&exp.law).expectation(pop)?;
    let mut section = Section::new("terminal_expectation", cell_columns(k));
    section.push(
        u.iter()
            .flatten()
            .map(|&v| Value::from(v))
            .collect::<Vec<_>>(),
    );
    doc.push(section);

    let pmf = terminal_pmf_absorbing_capped(pop, &exp.law, exp.state_cap)?;
    let mut columns = cell_columns(k);
    columns.push("probability".into());
    let mut section = Section::new("terminal_pmf", columns);
    for (m, prob) in pmf.iter() {
        let mut row = cell_values(m);
        row.push(Value::from(prob));
        section.push(row);
    }
    doc.push(section);
    Ok(doc)
}
