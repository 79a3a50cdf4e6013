use sem_core::classify::{
    check_fine_balance, classify_2x2, decompose, fine_balance_residual, Verdict,
};
use sem_core::SemError;

use crate::config::Experiment;
use crate::output::{Document, Section, Value};

/// Fine-balance report, the constructive decomposition when one exists, and
/// the two-type trichotomy verdict.
pub fn run(exp: &Experiment) -> Result<Document, SemError> {
    let mut doc = Document::default();
    let law = &exp.law;
    let tol = exp.tol_or(1e-9);
    let balanced = check_fine_balance(law, tol);
    let (i, j, ip, jp, residual) = fine_balance_residual(law);

    let mut section = Section::new(
        "fine_balance",
        vec![
            "flavor".into(),
            "fine_balanced".into(),
            "tol".into(),
            "worst_residual".into(),
            "i".into(),
            "j".into(),
            "i2".into(),
            "j2".into(),
        ],
    );
    section.push(vec![
        Value::from(format!("{:?}", law.flavor()).to_lowercase()),
        Value::from(balanced),
        Value::from(tol),
        Value::from(residual),
        Value::from(i + 1),
        Value::from(j + 1),
        Value::from(ip + 1),
        Value::from(jp + 1),
    ]);
    doc.push(section);

    if balanced {
        let d = decompose(law)?;
        let mut section = Section::new(
            "decomposition",
            vec![
                "type".into(),
                "alpha_bar".into(),
                "beta_bar".into(),
                "female_relabel".into(),
                "male_relabel".into(),
            ],
        );
        for r in 0..law.k() {
            section.push(vec![
                Value::from(r + 1),
                Value::from(d.alpha_bar[r]),
                Value::from(d.beta_bar[r]),
                Value::from(d.female_relabel[r] + 1),
                Value::from(d.male_relabel[r] + 1),
            ]);
        }
        doc.push(section);
    }

    if law.k() == 2 {
        let t = classify_2x2(law, tol)?;
        let verdict = match t.verdict {
            Verdict::Heterogamous => "heterogamous",
            Verdict::Panmictic => "panmictic",
            Verdict::Homogamous => "homogamous",
        };
        let mut section = Section::new(
            "trichotomy",
            vec!["verdict".into(), "discriminant".into()],
        );
        section.push(vec![Value::from(verdict), Value::from(t.discriminant)]);
        doc.push(section);
    }
    Ok(doc)
}
