//! Elastic-net linear regression by cyclic coordinate descent.
//!
//! Minimizes `||y - b - X theta||^2 + a*beta*|theta|_1 + (a*(1-beta)/2)*|theta|^2`
//! with an unpenalized intercept `b`.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::tree::check_xy;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAX_SWEEPS: usize = 10_000;
/// Sweeps stop once no coefficient moves by more than this fraction of the
/// largest coefficient magnitude (floored at 1).
pub const COEF_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coef: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut s = self.intercept;
        for (c, v) in self.coef.iter().zip(x) {
            s += c * v;
        }
        s
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetFit {
    pub model: LinearModel,
    /// Objective after each completed sweep; entry 0 is at `theta = 0`.
    pub objective: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

pub fn fit_elastic_net(x: &Matrix, y: &[f64], alpha: f64, beta: f64) -> Result<ElasticNetFit> {
    check_xy(x, y)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("alpha {alpha} must be >= 0")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(alloc::format!("l1 ratio {beta} outside [0, 1]")));
    }
    let m = x.rows();
    let p = x.cols();
    let l1 = alpha * beta;
    let l2 = alpha * (1.0 - beta);
    let y_mean = y.iter().sum::<f64>() / m as f64;
    let mut x_mean = vec![0.0; p];
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let c = x.column(j);
            let mu = c.iter().sum::<f64>() / m as f64;
            x_mean[j] = mu;
            c.into_iter().map(|v| v - mu).collect()
        })
        .collect();
    let z: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let mut theta = vec![0.0; p];
    let mut resid: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let objective_of = |resid: &[f64], theta: &[f64]| {
        let sse: f64 = resid.iter().map(|r| r * r).sum();
        let n1: f64 = theta.iter().map(|t| t.abs()).sum();
        let n2: f64 = theta.iter().map(|t| t * t).sum();
        sse + l1 * n1 + 0.5 * l2 * n2
    };
    let mut objective = vec![objective_of(&resid, &theta)];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut max_delta: f64 = 0.0;
        for j in 0..p {
            let denom = z[j] + 0.5 * l2;
            if denom <= 0.0 {
                continue;
            }
            let cj = &cols[j];
            let old = theta[j];
            let mut rho = z[j] * old;
            for (a, r) in cj.iter().zip(&resid) {
                rho += a * r;
            }
            let new = soft_threshold(rho, 0.5 * l1) / denom;
            let delta = new - old;
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(cj) {
                    *r -= a * delta;
                }
                theta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        objective.push(objective_of(&resid, &theta));
        let scale = theta.iter().fold(1.0f64, |acc, t| acc.max(t.abs()));
        if max_delta <= COEF_TOL * scale {
            converged = true;
            break;
        }
    }
    let intercept = y_mean - x_mean.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>();
    Ok(ElasticNetFit {
        model: LinearModel { coef: theta, intercept },
        objective,
        sweeps,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::cholesky_solve;

    fn design(m: usize) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let f = i as f64;
                vec![(f * 0.7).sin(), (f * 0.13).cos() + 0.3 * (f * 0.7).sin(), (f * 1.9).sin() * 2.0]
            })
            .collect();
        Matrix::from_rows(&rows).unwrap()
    }

    /// Normal-equation OLS with intercept via an augmented design.
    fn ols(x: &Matrix, y: &[f64]) -> Vec<f64> {
        let p = x.cols() + 1;
        let mut g = Matrix::zeros(p, p);
        let mut b = vec![0.0; p];
        for i in 0..x.rows() {
            let mut r = vec![1.0];
            r.extend_from_slice(x.row(i));
            for a in 0..p {
                b[a] += r[a] * y[i];
                for c in 0..p {
                    g.set(a, c, g.get(a, c) + r[a] * r[c]);
                }
            }
        }
        cholesky_solve(&g, &b, 1e-14).unwrap()
    }

    #[test]
    fn zero_alpha_is_ols() {
        let x = design(60);
        let y: Vec<f64> = (0..60).map(|i| 2.0 - x.get(i, 0) + 0.5 * x.get(i, 1) + (i as f64 * 0.37).cos()).collect();
        let fit = fit_elastic_net(&x, &y, 0.0, 0.5).unwrap();
        let sol = ols(&x, &y);
        assert!((fit.model.intercept - sol[0]).abs() < 1e-6);
        for j in 0..3 {
            assert!((fit.model.coef[j] - sol[j + 1]).abs() < 1e-6);
        }
    }

    #[test]
    fn exact_linear_target() {
        let x = design(40);
        let y: Vec<f64> = (0..40).map(|i| 3.0 * x.get(i, 0)).collect();
        let fit = fit_elastic_net(&x, &y, 0.0, 0.1).unwrap();
        assert!((fit.model.coef[0] - 3.0).abs() < 1e-6);
        assert!(fit.model.coef[1].abs() < 1e-6 && fit.model.coef[2].abs() < 1e-6);
    }

    #[test]
    fn full_shrinkage() {
        let x = design(30);
        let y: Vec<f64> = (0..30).map(|i| 5.0 + x.get(i, 2)).collect();
        let fit = fit_elastic_net(&x, &y, 1e6, 1.0).unwrap();
        assert!(fit.model.coef.iter().all(|&c| c == 0.0));
        let mean = y.iter().sum::<f64>() / 30.0;
        assert!((fit.model.intercept - mean).abs() < 1e-12);
    }

    #[test]
    fn objective_non_increasing() {
        let x = design(50);
        let y: Vec<f64> = (0..50).map(|i| (i as f64 * 0.2).sin() * 4.0 + x.get(i, 1)).collect();
        for (a, b) in [(0.5, 0.1), (5.0, 0.01), (1.0, 0.001)] {
            let fit = fit_elastic_net(&x, &y, a, b).unwrap();
            for w in fit.objective.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut x = design(5);
        x.set(2, 1, f64::NAN);
        assert!(fit_elastic_net(&x, &[1.0; 5], 0.1, 0.1).is_err());
    }
}
