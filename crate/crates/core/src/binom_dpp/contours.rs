//! Prior, likelihood and posterior surfaces on `(p₀, p₁)` for contour plots.

use serde::{Deserialize, Serialize};

use super::grid::axis;
use super::{arm_loglik, BetaPrior, BinomialData, PairGaussianPrior};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourPrior {
    Gaussian(PairGaussianPrior),
    Beta(BetaPrior),
}

impl ContourPrior {
    fn log_density(&self, p0: f64, p1: f64) -> f64 {
        match self {
            ContourPrior::Gaussian(g) => g.log_density(p0, p1),
            ContourPrior::Beta(b) => {
                let lb = |a: f64, bb: f64, p: f64| (a - 1.0) * p.ln() + (bb - 1.0) * (1.0 - p).ln();
                lb(b.a0, b.b0, p0) + lb(b.a1, b.b1, p1)
            }
        }
    }
}

/// One grid point; each surface integrates to one over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub x: f64,
    pub y: f64,
    pub prior: f64,
    pub lik: f64,
    pub post: f64,
}

/// Rows ordered with `x = p₀` outer and `y = p₁` inner.
pub fn contour_grid(data: &BinomialData, prior: &ContourPrior, resolution: usize) -> Result<Vec<ContourRow>> {
    if resolution < 2 {
        return Err(Error::ResolutionTooLow {
            found: resolution,
            minimum: 2,
        });
    }
    let ax = axis(resolution);
    let n = resolution;
    let mut lp = Vec::with_capacity(n * n);
    let mut ll = Vec::with_capacity(n * n);
    for &x in &ax.nodes {
        for &y in &ax.nodes {
            lp.push(prior.log_density(x, y));
            ll.push(arm_loglik(data.y0, data.n0, x) + arm_loglik(data.y1, data.n1, y));
        }
    }
    let post: Vec<f64> = lp.iter().zip(&ll).map(|(a, b)| a + b).collect();
    let area = ax.h * ax.h;
    let normalize = |v: &[f64]| -> Vec<f64> {
        let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
        let z: f64 = e.iter().sum::<f64>() * area;
        e.into_iter().map(|x| x / z).collect()
    };
    let (dp, dl, dq) = (normalize(&lp), normalize(&ll), normalize(&post));
    Ok((0..n * n)
        .map(|k| ContourRow {
            x: ax.nodes[k / n],
            y: ax.nodes[k % n],
            prior: dp[k],
            lik: dl[k],
            post: dq[k],
        })
        .collect())
}
