//! Fine-balance detection, constructive rate decompositions, reduction to
//! definite mating, and the 2x2 heterogamy/panmixia/homogamy trichotomy.
//!
//! A Poisson law is fine balanced when its entries are an additive rank-one
//! perturbation, pi_ij = a_i + b_j; a Bernoulli law when the complements
//! factor, 1 - pi_ij = (1 - a_i)(1 - b_j). Either structure lets the model be
//! re-parameterized as definite mating with adjusted rates, and exactly then
//! the species is panmictic.

use serde::Serialize;

use crate::error::SemError;
use crate::law::{EmLaw, Flavor, PreferenceMatrix, RateVector};

/// Constructive witness of fine balance.
///
/// The relabelings map positions in the decomposed order back to original
/// type indices: entry (i, j) of the relabeled law is
/// `pi[female_relabel[i]][male_relabel[j]]`, and that relabeled matrix equals
/// the rank-one combination of `alpha_bar` and `beta_bar`. Relabelings are
/// returned, never silently applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub flavor: Flavor,
    pub alpha_bar: Vec<f64>,
    pub beta_bar: Vec<f64>,
    pub female_relabel: Vec<usize>,
    pub male_relabel: Vec<usize>,
}

impl Decomposition {
    /// Rates expressed against the original type indexing, so that the law
    /// rebuilt from them matches the input entry for entry.
    pub fn rates_original_order(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.alpha_bar.len();
        let mut alpha = vec![0.0; k];
        let mut beta = vec![0.0; k];
        for r in 0..k {
            alpha[self.female_relabel[r]] = self.alpha_bar[r];
            beta[self.male_relabel[r]] = self.beta_bar[r];
        }
        (alpha, beta)
    }
}

/// Largest fine-balance residual over all 2x2 minors, with its quadruple
/// (i, j, i', j'). Zero residual means the law is exactly fine balanced.
pub fn fine_balance_residual(law: &EmLaw) -> (usize, usize, usize, usize, f64) {
    worst_violation(law)
}

fn worst_violation(law: &EmLaw) -> (usize, usize, usize, usize, f64) {
    let k = law.k();
    let mut worst = (0, 0, 1, 1, 0.0f64);
    for i in 0..k {
        for ip in (i + 1)..k {
            for j in 0..k {
                for jp in (j + 1)..k {
                    let r = match law.flavor() {
                        Flavor::Poisson => {
                            (law.get(i, j) + law.get(ip, jp))
                                - (law.get(i, jp) + law.get(ip, j))
                        }
                        Flavor::Bernoulli => {
                            (1.0 - law.get(i, j)) * (1.0 - law.get(ip, jp))
                                - (1.0 - law.get(i, jp)) * (1.0 - law.get(ip, j))
                        }
                    };
                    if r.abs() > worst.4.abs() {
                        worst = (i, j, ip, jp, r);
                    }
                }
            }
        }
    }
    worst
}

/// Residual threshold for a given tolerance: relative to the largest entry
/// for Poisson laws, absolute on the complement products for Bernoulli.
fn threshold(law: &EmLaw, tol: f64) -> f64 {
    match law.flavor() {
        Flavor::Poisson => tol * law.max_abs(),
        Flavor::Bernoulli => tol,
    }
}

/// Whether the law satisfies its flavor's fine balance condition within tol.
pub fn check_fine_balance(law: &EmLaw, tol: f64) -> bool {
    worst_violation(law).4.abs() <= threshold(law, tol)
}

/// Same check with the worst-violating quadruple attached on failure.
pub fn require_fine_balance(law: &EmLaw, tol: f64) -> Result<(), SemError> {
    let (i, j, ip, jp, r) = worst_violation(law);
    if r.abs() <= threshold(law, tol) {
        Ok(())
    } else {
        Err(SemError::NotFineBalanced {
            flavor: law.flavor(),
            i,
            j,
            ip,
            jp,
            residual: r,
        })
    }
}

fn swap_permutation(k: usize, a: usize, b: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..k).collect();
    p.swap(a, b);
    p
}

/// Constructive decomposition of a fine-balanced law.
///
/// Poisson: relabel male types so the (0, 0) entry is the smallest of row 0,
/// then a_i is column 0 and b_j is row 0 shifted down by the corner.
/// Bernoulli: relabel both sexes to move the global minimum to (0, 0) (unless
/// the law is identically 1, where a = b = 1 works), then a_i is column 0 and
/// 1 - b_j is row 0's complement ratio. The rebuilt law is compared entry for
/// entry; any mismatch beyond 1e-12 reports the worst-violating quadruple.
pub fn decompose(law: &EmLaw) -> Result<Decomposition, SemError> {
    let k = law.k();
    let (candidate, reconstructs) = match law.flavor() {
        Flavor::Poisson => {
            let mut jmin = 0;
            for j in 1..k {
                if law.get(0, j) < law.get(0, jmin) {
                    jmin = j;
                }
            }
            let male_relabel = swap_permutation(k, 0, jmin);
            let female_relabel: Vec<usize> = (0..k).collect();
            let alpha_bar: Vec<f64> = (0..k).map(|i| law.get(i, jmin)).collect();
            let beta_bar: Vec<f64> = (0..k)
                .map(|j| law.get(0, male_relabel[j]) - law.get(0, jmin))
                .collect();
            let d = Decomposition {
                flavor: Flavor::Poisson,
                alpha_bar,
                beta_bar,
                female_relabel,
                male_relabel,
            };
            let scale = law.max_abs().max(1.0);
            let ok = (0..k).all(|i| {
                (0..k).all(|j| {
                    let rebuilt = d.alpha_bar[i] + d.beta_bar[j];
                    (law.get(d.female_relabel[i], d.male_relabel[j]) - rebuilt).abs()
                        <= 1e-12 * scale
                })
            });
            (d, ok)
        }
        Flavor::Bernoulli => {
            let (mut imin, mut jmin) = (0, 0);
            for i in 0..k {
                for j in 0..k {
                    if law.get(i, j) < law.get(imin, jmin) {
                        (imin, jmin) = (i, j);
                    }
                }
            }
            if law.get(imin, jmin) == 1.0 {
                // Identically-one law: every pair both fires and mates each
                // round, matched by unit rates on both sexes.
                let d = Decomposition {
                    flavor: Flavor::Bernoulli,
                    alpha_bar: vec![1.0; k],
                    beta_bar: vec![1.0; k],
                    female_relabel: (0..k).collect(),
                    male_relabel: (0..k).collect(),
                };
                return Ok(d);
            }
            let female_relabel = swap_permutation(k, 0, imin);
            let male_relabel = swap_permutation(k, 0, jmin);
            let corner = law.get(imin, jmin);
            let alpha_bar: Vec<f64> =
                (0..k).map(|i| law.get(female_relabel[i], jmin)).collect();
            let beta_bar: Vec<f64> = (0..k)
                .map(|j| 1.0 - (1.0 - law.get(imin, male_relabel[j])) / (1.0 - corner))
                .collect();
            let d = Decomposition {
                flavor: Flavor::Bernoulli,
                alpha_bar,
                beta_bar,
                female_relabel,
                male_relabel,
            };
            let ok = (0..k).all(|i| {
                (0..k).all(|j| {
                    let rebuilt = 1.0 - (1.0 - d.alpha_bar[i]) * (1.0 - d.beta_bar[j]);
                    (law.get(d.female_relabel[i], d.male_relabel[j]) - rebuilt).abs() <= 1e-12
                })
            });
            (d, ok)
        }
    };
    if reconstructs {
        Ok(candidate)
    } else {
        let (i, j, ip, jp, r) = worst_violation(law);
        Err(SemError::NotFineBalanced {
            flavor: law.flavor(),
            i,
            j,
            ip,
            jp,
            residual: r,
        })
    }
}

/// Re-parameterize a fine-balanced law as definite mating with adjusted
/// rates: the law rebuilt from the output equals the input entrywise.
pub fn reduce_to_definite(law: &EmLaw) -> Result<(PreferenceMatrix, RateVector), SemError> {
    let d = decompose(law)?;
    let (alpha, beta) = d.rates_original_order();
    let rates = RateVector::new(law.flavor(), alpha, beta)?;
    Ok((PreferenceMatrix::definite(law.k()), rates))
}

/// Correlation verdict for the expected mating pattern of a 2x2 species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Heterogamous,
    Panmictic,
    Homogamous,
}

/// Verdict plus the discriminant it was read from. Positive discriminants
/// mean homogamy under both flavors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trichotomy {
    pub verdict: Verdict,
    pub discriminant: f64,
}

/// The k = 2 trichotomy. Poisson compares the diagonal and anti-diagonal
/// sums; Bernoulli compares the complement products with the opposite
/// orientation, so a positive discriminant is homogamous in both cases.
pub fn classify_2x2(law: &EmLaw, tol: f64) -> Result<Trichotomy, SemError> {
    if law.k() != 2 {
        return Err(SemError::WrongDimension(law.k()));
    }
    let d = match law.flavor() {
        Flavor::Poisson => (law.get(0, 0) + law.get(1, 1)) - (law.get(0, 1) + law.get(1, 0)),
        Flavor::Bernoulli => {
            (1.0 - law.get(0, 1)) * (1.0 - law.get(1, 0))
                - (1.0 - law.get(0, 0)) * (1.0 - law.get(1, 1))
        }
    };
    let eps = threshold(law, tol);
    let verdict = if d < -eps {
        Verdict::Heterogamous
    } else if d > eps {
        Verdict::Homogamous
    } else {
        Verdict::Panmictic
    };
    Ok(Trichotomy { verdict, discriminant: d })
}
