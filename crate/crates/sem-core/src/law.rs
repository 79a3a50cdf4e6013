//! Mating preferences, firing rates, and the encounter-mating law they
//! induce.

use serde::{Deserialize, Serialize};

use crate::error::SemError;

/// Firing-time family: exponential clocks or per-round coin flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Poisson,
    Bernoulli,
}

/// Probability that a type-ij encounter results in mating; entries in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferenceMatrix {
    k: usize,
    p: Vec<f64>,
}

impl PreferenceMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, SemError> {
        let k = rows.len();
        for row in &rows {
            if row.len() != k {
                return Err(SemError::DimensionMismatch(k, row.len()));
            }
        }
        let p: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..k {
            for j in 0..k {
                let v = p[i * k + j];
                if !v.is_finite() || v <= 0.0 || v > 1.0 {
                    return Err(SemError::InvalidPreference { i, j, value: v });
                }
            }
        }
        Ok(Self { k, p })
    }

    /// Constant preference c for every type pair.
    pub fn uniform(k: usize, c: f64) -> Result<Self, SemError> {
        Self::new(vec![vec![c; k]; k])
    }

    /// Definite mating: every encounter succeeds.
    pub fn definite(k: usize) -> Self {
        Self { k, p: vec![1.0; k * k] }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.k + j]
    }

    pub fn is_definite(&self) -> bool {
        self.p.iter().all(|&v| v == 1.0)
    }
}

/// Per-type firing intensities (Poisson) or success probabilities (Bernoulli).
///
/// Every female-male type pair must have a positive combined rate, so no pair
/// of animals can be mutually silent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateVector {
    flavor: Flavor,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl RateVector {
    pub fn new(flavor: Flavor, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self, SemError> {
        if alpha.len() != beta.len() {
            return Err(SemError::DimensionMismatch(alpha.len(), beta.len()));
        }
        let in_range = |v: f64| match flavor {
            Flavor::Poisson => v >= 0.0 && v.is_finite(),
            Flavor::Bernoulli => (0.0..=1.0).contains(&v),
        };
        if let Some(v) = alpha.iter().chain(beta.iter()).find(|&&v| !in_range(v)) {
            return Err(SemError::InvalidRates(format!(
                "rate {v} out of range for {flavor:?} firing times"
            )));
        }
        for (i, &a) in alpha.iter().enumerate() {
            for (j, &b) in beta.iter().enumerate() {
                if a + b <= 0.0 {
                    return Err(SemError::InvalidRates(format!(
                        "alpha[{i}] + beta[{j}] must be positive"
                    )));
                }
            }
        }
        Ok(Self { flavor, alpha, beta })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Probability-per-unit-time (Poisson) or per-round (Bernoulli) that at
    /// least one member of a type-ij pair fires.
    pub fn pair_rate(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.alpha[i], self.beta[j]);
        match self.flavor {
            Flavor::Poisson => a + b,
            Flavor::Bernoulli => a + b - a * b,
        }
    }
}

/// The matrix that fully determines the pair-type process: preferences folded
/// together with firing rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmLaw {
    flavor: Flavor,
    k: usize,
    pi: Vec<f64>,
}

impl EmLaw {
    /// Build directly from an entry matrix, checking the flavor's range.
    pub fn from_pi(flavor: Flavor, rows: Vec<Vec<f64>>) -> Result<Self, SemError> {
        let k = rows.len();
        for row in &rows {
            if row.len() != k {
                return Err(SemError::DimensionMismatch(k, row.len()));
            }
        }
        let pi: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..k {
            for j in 0..k {
                let v = pi[i * k + j];
                let ok = match flavor {
                    Flavor::Poisson => v > 0.0 && v.is_finite(),
                    Flavor::Bernoulli => v > 0.0 && v <= 1.0,
                };
                if !ok {
                    return Err(SemError::InvalidLaw(format!(
                        "pi[{i}][{j}] = {v} out of range for {flavor:?}"
                    )));
                }
            }
        }
        Ok(Self { flavor, k, pi })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pi[i * self.k + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.k)
            .map(|i| self.pi[i * self.k..(i + 1) * self.k].to_vec())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.pi.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }
}

/// Fold preferences and rates into the law matrix.
///
/// Poisson: pi_ij = p_ij (alpha_i + beta_j). Bernoulli: pi_ij =
/// p_ij (alpha_i + beta_j - alpha_i beta_j), the per-round probability that
/// a standing type-ij pair fires and then mates.
pub fn em_law(preferences: &PreferenceMatrix, rates: &RateVector) -> Result<EmLaw, SemError> {
    let k = preferences.k();
    if rates.k() != k {
        return Err(SemError::DimensionMismatch(k, rates.k()));
    }
    let mut pi = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            pi[i * k + j] = preferences.get(i, j) * rates.pair_rate(i, j);
        }
    }
    Ok(EmLaw { flavor: rates.flavor(), k, pi })
}
