//! Posterior mode under a Gaussian prior on the logits, with the prior
//! correlation either fixed or treated as a free parameter under a uniform
//! prior on (−1, 1).

use serde::{Deserialize, Serialize};

use super::newton::{damped_newton, NewtonFailure};
use super::{BinomialData, LogitGaussianPrior};
use crate::error::{Error, Result};
use crate::symlin::SymMatrix;

const GRAD_TOL: f64 = 1e-10;
const MAX_ITER: usize = 100;
/// Correlations beyond this are reported as having no interior mode.
const R_LIMIT: f64 = 1.0 - 1e-8;

pub(super) fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub(super) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub(super) fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Log posterior in `(θ₀, θ₁, r)` with gradient and Hessian over all three.
/// The `−½ ln(1 − r²)` normalizer is included so the `r` derivatives refer to
/// the joint posterior with a flat prior on `r`.
pub fn logit_log_posterior(
    data: &BinomialData,
    prior: &LogitGaussianPrior,
    theta: [f64; 2],
    r: f64,
) -> Option<(f64, [f64; 3], [[f64; 3]; 3])> {
    if !(r.abs() < R_LIMIT) || !theta[0].is_finite() || !theta[1].is_finite() {
        return None;
    }
    let (s0, s1) = (prior.sigma0, prior.sigma1);
    let a = (theta[0] - prior.mu[0]) / s0;
    let b = (theta[1] - prior.mu[1]) / s1;
    let d = 1.0 - r * r;
    let s = a * a - 2.0 * r * a * b + b * b;
    let (y0, n0, y1, n1) = (data.y0 as f64, data.n0 as f64, data.y1 as f64, data.n1 as f64);
    let ll = y0 * theta[0] - n0 * softplus(theta[0]) + y1 * theta[1] - n1 * softplus(theta[1]);
    let f = ll - s / (2.0 * d) - 0.5 * d.ln();
    let (p0, p1) = (sigmoid(theta[0]), sigmoid(theta[1]));

    let g = [
        y0 - n0 * p0 - (a - r * b) / (d * s0),
        y1 - n1 * p1 - (b - r * a) / (d * s1),
        a * b / d - r * s / (d * d) + r / d,
    ];
    let h00 = -n0 * p0 * (1.0 - p0) - 1.0 / (d * s0 * s0);
    let h11 = -n1 * p1 * (1.0 - p1) - 1.0 / (d * s1 * s1);
    let h01 = r / (d * s0 * s1);
    let h0r = (b / d - 2.0 * r * (a - r * b) / (d * d)) / s0;
    let h1r = (a / d - 2.0 * r * (b - r * a) / (d * d)) / s1;
    let hrr = 4.0 * r * a * b / (d * d) - s / (d * d) - 4.0 * r * r * s / (d * d * d) + 1.0 / d + 2.0 * r * r / (d * d);
    Some((f, g, [[h00, h01, h0r], [h01, h11, h1r], [h0r, h1r, hrr]]))
}

/// Stationary point in logit coordinates and the residual-product identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitModeState {
    pub theta_star: [f64; 2],
    pub p_star: [f64; 2],
    /// `(a − r b)/(1 − r²)` with `a, b` the standardized logits.
    pub phi0: f64,
    /// `(r a − b)/(1 − r²)`.
    pub phi1: f64,
    /// `(y₀/n₀ − p₀)(y₁/n₁ − p₁)`.
    pub lhs: f64,
    /// `−r / (n₀ n₁ σ₀ σ₁ (1 − r²))`.
    pub rhs: f64,
    pub r: f64,
    /// Whether `r` was solved for rather than held at the prior value.
    pub r_free: bool,
    pub grad_norm: f64,
    pub iterations: usize,
    /// `lhs − rhs`; only expected to vanish when `r` is free.
    pub identity_residual: f64,
    /// Derivative of the joint log posterior in `r` at the reported point.
    pub r_stationarity_residual: f64,
    pub hessian_nd: bool,
}

fn state(data: &BinomialData, prior: &LogitGaussianPrior, theta: [f64; 2], r: f64, r_free: bool, grad_norm: f64, iterations: usize, hessian_nd: bool) -> LogitModeState {
    let (s0, s1) = (prior.sigma0, prior.sigma1);
    let a = (theta[0] - prior.mu[0]) / s0;
    let b = (theta[1] - prior.mu[1]) / s1;
    let d = 1.0 - r * r;
    let p_star = [sigmoid(theta[0]), sigmoid(theta[1])];
    let lhs = (data.phat0() - p_star[0]) * (data.phat1() - p_star[1]);
    let rhs = -r / (data.n0 as f64 * data.n1 as f64 * s0 * s1 * d);
    let (_, g, _) = logit_log_posterior(data, prior, theta, r).expect("interior point");
    LogitModeState {
        theta_star: theta,
        p_star,
        phi0: (a - r * b) / d,
        phi1: (r * a - b) / d,
        lhs,
        rhs,
        r,
        r_free,
        grad_norm,
        iterations,
        identity_residual: lhs - rhs,
        r_stationarity_residual: g[2],
        hessian_nd,
    }
}

fn start_theta(data: &BinomialData, prior: &LogitGaussianPrior) -> [f64; 2] {
    let clamp = |y: u64, n: u64| {
        let n = n as f64;
        (y as f64).clamp(0.5, n - 0.5) / n
    };
    [
        0.5 * (logit(clamp(data.y0, data.n0)) + prior.mu[0]),
        0.5 * (logit(clamp(data.y1, data.n1)) + prior.mu[1]),
    ]
}

fn stalled(what: &str, f: NewtonFailure) -> Error {
    match f {
        NewtonFailure::Stalled { x, grad_norm } => {
            Error::NoConvergence(format!("{what} stalled at {x:?} with gradient norm {grad_norm:e}"))
        }
        NewtonFailure::Infeasible => Error::NoConvergence(format!("{what}: infeasible start")),
    }
}

/// Solves the two logit score equations with `r` held at `prior.r`.
pub fn mode_solve_logit_prior(data: &BinomialData, prior: &LogitGaussianPrior) -> Result<LogitModeState> {
    let r = prior.r;
    let eval = |x: &[f64]| {
        logit_log_posterior(data, prior, [x[0], x[1]], r).map(|(f, g, h)| {
            let hm = SymMatrix::from_rows(vec![vec![h[0][0], h[0][1]], vec![h[1][0], h[1][1]]]).expect("symmetric");
            (f, vec![g[0], g[1]], hm)
        })
    };
    let out = damped_newton(&eval, &start_theta(data, prior), GRAD_TOL, MAX_ITER)
        .map_err(|e| stalled("logit mode", e))?;
    Ok(state(data, prior, [out.x[0], out.x[1]], r, false, out.grad_norm, out.iterations, out.hessian_nd))
}

/// Solves jointly for `(θ₀, θ₁, r)`, starting from `r = prior.r`.
pub fn mode_solve_logit_prior_free_r(data: &BinomialData, prior: &LogitGaussianPrior) -> Result<LogitModeState> {
    let eval = |x: &[f64]| {
        logit_log_posterior(data, prior, [x[0], x[1]], x[2]).map(|(f, g, h)| {
            let hm = SymMatrix::from_rows(h.iter().map(|row| row.to_vec()).collect::<Vec<_>>()).expect("symmetric");
            (f, g.to_vec(), hm)
        })
    };
    let t = start_theta(data, prior);
    let out = damped_newton(&eval, &[t[0], t[1], prior.r], GRAD_TOL, MAX_ITER).map_err(|e| match e {
        NewtonFailure::Stalled { x, .. } if x[2].abs() > 1.0 - 1e-6 => Error::NoConvergence(format!(
            "no interior mode: correlation ran to the boundary (r = {})",
            x[2]
        )),
        other => stalled("free-r logit mode", other),
    })?;
    Ok(state(data, prior, [out.x[0], out.x[1]], out.x[2], true, out.grad_norm, out.iterations, out.hessian_nd))
}
