use sem_core::engine::{derive_seed, run_sem};
use sem_core::verify::empirical_terminal_pmf;
use sem_core::SemError;

use super::cell_values;
use crate::config::Experiment;
use crate::output::{cell_columns, Document, Section, Value};

/// Run the simulator. One summary row per run, or an aggregated pattern pmf
/// when `empirical_pmf` is set.
pub fn run(exp: &Experiment, empirical_pmf: bool) -> Result<Document, SemError> {
    let model = exp.model()?;
    let runs = exp.runs.unwrap_or(1);
    let mut doc = Document::default();
    let k = exp.population.k();

    if empirical_pmf {
        let (pmf, counts) = empirical_terminal_pmf(&model, runs, exp.seed)?;
        let mut columns = cell_columns(k);
        columns.push("count".into());
        columns.push("probability".into());
        let mut section = Section::new("empirical_pmf", columns);
        for ((m, prob), &count) in pmf.iter().zip(&counts) {
            let mut row = cell_values(m);
            row.push(Value::from(count));
            row.push(Value::from(prob));
            section.push(row);
        }
        doc.push(section);
        return Ok(doc);
    }

    let mut columns = vec![
        "run".to_string(),
        "seed".to_string(),
        "terminal_time".to_string(),
        "rounds".to_string(),
        "jumps".to_string(),
    ];
    columns.extend(cell_columns(k));
    let mut section = Section::new("runs", columns);
    for r in 0..runs {
        let seed = derive_seed(exp.seed, r);
        let record = run_sem(&model, seed)?;
        let mut row = vec![
            Value::from(r),
            Value::from(seed),
            Value::from(record.terminal_time),
            Value::from(record.rounds_elapsed),
            Value::from(record.jumps.len()),
        ];
        row.extend(cell_values(&record.terminal_pattern));
        section.push(row);
    }
    doc.push(section);
    Ok(doc)
}
