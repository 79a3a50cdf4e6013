use sem_core::exact::{
    expected_qt_definite, expected_qt_finebalanced, qt_pmf_definite, qt_pmf_finebalanced,
    terminal_pmf_definite, FirstFiringCdf,
};
use sem_core::law::Flavor;
use sem_core::table::{enumerate_states_capped, enumerate_tables_capped};
use sem_core::SemError;

use super::cell_values;
use crate::config::Experiment;
use crate::output::{cell_columns, Document, Section, Value};

/// Closed-form tables: the terminal law, and the time-t law plus expected
/// pattern on the configured grid. Definite preferences evaluate through the
/// first-firing CDFs; otherwise the law must be fine balanced, and the module
/// error propagates when it is not.
pub fn run(exp: &Experiment) -> Result<Document, SemError> {
    let pop = &exp.population;
    let k = pop.k();
    let mut doc = Document::default();

    let tables = enumerate_tables_capped(pop, exp.state_cap)?;
    let mut columns = cell_columns(k);
    columns.push("probability".into());
    let mut terminal = Section::new("terminal_pmf", columns);
    for m in &tables {
        let mut row = cell_values(m);
        row.push(Value::from(terminal_pmf_definite(pop, m)?));
        terminal.push(row);
    }
    doc.push(terminal);

    if exp.t_grid.is_empty() {
        return Ok(doc);
    }

    let cdfs = if exp.preferences_definite && exp.schedule.is_none() {
        Some(match exp.flavor {
            Flavor::Poisson => FirstFiringCdf::exponential(&exp.rates)?,
            Flavor::Bernoulli => FirstFiringCdf::geometric(&exp.rates)?,
        })
    } else {
        None
    };

    let states = enumerate_states_capped(pop, exp.state_cap)?;
    let mut columns = vec!["t".to_string()];
    columns.extend(cell_columns(k));
    columns.push("probability".into());
    let mut qt = Section::new("qt_pmf", columns);
    let mut expected = Section::new("expected_qt", {
        let mut c = vec!["t".to_string()];
        c.extend(cell_columns(k));
        c
    });
    for &t in &exp.t_grid {
        for m in &states {
            let mass = match &cdfs {
                Some(cdfs) => qt_pmf_definite(pop, cdfs, t, m)?,
                None => qt_pmf_finebalanced(pop, &exp.law, t, m)?,
            };
            let mut row = vec![Value::from(t)];
            row.extend(cell_values(m));
            row.push(Value::from(mass));
            qt.push(row);
        }
        let mut row = vec![Value::from(t)];
        for i in 0..k {
            for j in 0..k {
                let u = match &cdfs {
                    Some(cdfs) => expected_qt_definite(pop, cdfs, t, i, j)?,
                    None => expected_qt_finebalanced(pop, &exp.law, t, i, j)?,
                };
                row.push(Value::from(u));
            }
        }
        expected.push(row);
    }
    doc.push(qt);
    doc.push(expected);
    Ok(doc)
}
