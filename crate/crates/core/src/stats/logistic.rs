use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dist::normal_cdf;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    pub max_iter: usize,
    /// Convergence when the largest coefficient step falls below this.
    pub tol: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub coefficients: Vec<Coefficient>,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub n: usize,
}

impl LogisticFit {
    pub fn get(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

const MU_EDGE: f64 = 1e-10;

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares. `x` is the full design matrix (include an intercept column if
/// wanted) and `names` labels its columns. Standard errors come from the
/// inverse Fisher information; p-values are two-sided Wald.
pub fn logistic_irls(
    x: &DMatrix<f64>,
    y: &[f64],
    names: &[String],
    opts: LogisticOptions,
) -> Result<LogisticFit, StatsError> {
    let (n, p) = x.shape();
    if names.len() != p {
        return Err(StatsError::InvalidParams(format!("{} names for {p} columns", names.len())));
    }
    if y.len() != n {
        return Err(StatsError::LengthMismatch(n, y.len()));
    }
    if n <= p {
        return Err(StatsError::InsufficientData { needed: p + 1, got: n });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(StatsError::InvalidParams("outcome must be 0 or 1".into()));
    }
    let yv = DVector::from_column_slice(y);
    let mut beta = DVector::<f64>::zeros(p);
    let separated = |beta: &DVector<f64>| {
        // name the non-intercept column carrying the largest coefficient
        let j = (0..p)
            .filter(|&j| p == 1 || !names[j].eq_ignore_ascii_case("intercept"))
            .max_by(|&a, &b| beta[a].abs().total_cmp(&beta[b].abs()))
            .unwrap_or(0);
        StatsError::SeparationDetected { column: names[j].clone() }
    };

    for iter in 1..=opts.max_iter {
        let eta = x * &beta;
        let mu = eta.map(sigmoid);
        if mu.iter().any(|&m| !(MU_EDGE..=1.0 - MU_EDGE).contains(&m)) {
            return Err(separated(&beta));
        }
        let w = mu.map(|m| m * (1.0 - m));
        let mut xtwx = DMatrix::<f64>::zeros(p, p);
        for i in 0..n {
            let row = x.row(i);
            xtwx += w[i] * row.transpose() * row;
        }
        let score = x.transpose() * (&yv - &mu);
        let chol = xtwx.clone().cholesky().ok_or(StatsError::SingularDesign)?;
        let step = chol.solve(&score);
        beta += &step;
        if step.amax() < opts.tol {
            let eta = x * &beta;
            let mu = eta.map(sigmoid);
            if mu.iter().any(|&m| !(MU_EDGE..=1.0 - MU_EDGE).contains(&m)) {
                return Err(separated(&beta));
            }
            let w = mu.map(|m| m * (1.0 - m));
            let mut info = DMatrix::<f64>::zeros(p, p);
            for i in 0..n {
                let row = x.row(i);
                info += w[i] * row.transpose() * row;
            }
            let cov = info.cholesky().ok_or(StatsError::SingularDesign)?.inverse();
            let log_likelihood = (0..n).map(|i| y[i] * mu[i].ln() + (1.0 - y[i]) * (1.0 - mu[i]).ln()).sum();
            let coefficients = (0..p)
                .map(|j| {
                    let se = cov[(j, j)].sqrt();
                    let z = beta[j] / se;
                    Coefficient {
                        name: names[j].clone(),
                        estimate: beta[j],
                        std_error: se,
                        z,
                        p: (2.0 * (1.0 - normal_cdf(z.abs()))).min(1.0),
                    }
                })
                .collect();
            return Ok(LogisticFit { coefficients, iterations: iter, log_likelihood, n });
        }
    }
    Err(StatsError::NonConvergence { iterations: opts.max_iter })
}
