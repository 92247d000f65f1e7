//! Posterior mode under a Gaussian prior on `(p₀, η)` and the linear
//! decomposition of `η*` it satisfies.

use serde::{Deserialize, Serialize};

use super::newton::{damped_newton, NewtonFailure};
use super::{arm_loglik, BinomialData, EtaGaussianPrior};
use crate::error::{Error, Result};
use crate::gauss_dpp::boundary_eps;
use crate::symlin::SymMatrix;

const BOX_LO: f64 = 1e-9;
const BOX_HI: f64 = 1.0 - 1e-9;
const GRAD_TOL: f64 = 1e-10;
const MAX_ITER: usize = 100;
const COARSE: usize = 201;

fn in_box(p: f64) -> bool {
    (BOX_LO..=BOX_HI).contains(&p)
}

/// Log posterior at `(p₀, η)` with gradient and Hessian, `None` off the box.
pub fn eta_log_posterior(data: &BinomialData, prior: &EtaGaussianPrior, p0: f64, eta: f64) -> Option<(f64, [f64; 2], [[f64; 2]; 2])> {
    let p1 = p0 + eta;
    if !(in_box(p0) && in_box(p1)) {
        return None;
    }
    let (a, b, c) = prior.precision();
    let (x, y) = (p0 - prior.mu0, eta - prior.eta0);
    let f = arm_loglik(data.y0, data.n0, p0) + arm_loglik(data.y1, data.n1, p1) - 0.5 * (a * x * x + 2.0 * b * x * y + c * y * y);
    let score = |yy: u64, n: u64, p: f64| (yy as f64 - n as f64 * p) / (p * (1.0 - p));
    let curv = |yy: u64, n: u64, p: f64| -(yy as f64) / (p * p) - (n - yy) as f64 / ((1.0 - p) * (1.0 - p));
    let (s0, s1) = (score(data.y0, data.n0, p0), score(data.y1, data.n1, p1));
    let (h0, h1) = (curv(data.y0, data.n0, p0), curv(data.y1, data.n1, p1));
    let g = [s0 + s1 - (a * x + b * y), s1 - (b * x + c * y)];
    let h = [[h0 + h1 - a, h1 - b], [h1 - b, h1 - c]];
    Some((f, g, h))
}

/// Stationary point of the posterior on `(p₀, η)` and the weights of
/// `η* = W_L η̂ + W_η η₀ + W_d (ŷ₀ − μ₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub p0_star: f64,
    pub eta_star: f64,
    /// `n_i / (p_i*(1 − p_i*))`.
    pub i0: f64,
    pub i1: f64,
    pub w_l: f64,
    pub w_eta: f64,
    pub w_d: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// `η* − (W_L η̂ + W_η η₀ + W_d (ŷ₀ − μ₀))`.
    pub identity_residual: f64,
    pub hessian_nd: bool,
    /// Whether the solve had to restart from a coarse grid.
    pub restarted: bool,
}

fn coarse_start(data: &BinomialData, prior: &EtaGaussianPrior) -> [f64; 2] {
    let mut best = (f64::NEG_INFINITY, [0.5, 0.0]);
    for i in 0..COARSE {
        let p0 = (i as f64 + 0.5) / COARSE as f64;
        for j in 0..COARSE {
            let p1 = (j as f64 + 0.5) / COARSE as f64;
            if let Some((f, _, _)) = eta_log_posterior(data, prior, p0, p1 - p0) {
                if f > best.0 {
                    best = (f, [p0, p1 - p0]);
                }
            }
        }
    }
    best.1
}

pub fn mode_solve_eta_prior(data: &BinomialData, prior: &EtaGaussianPrior) -> Result<ModeResult> {
    let eval = |x: &[f64]| {
        eta_log_posterior(data, prior, x[0], x[1]).map(|(f, g, h)| {
            let hm = SymMatrix::from_rows(vec![h[0].to_vec(), h[1].to_vec()]).expect("symmetric");
            (f, g.to_vec(), hm)
        })
    };
    let p0 = (0.5 * (data.phat0() + prior.mu0)).clamp(BOX_LO, BOX_HI);
    let eta = 0.5 * (data.eta_hat() + prior.eta0);
    let start = if in_box(p0 + eta) { [p0, eta] } else { coarse_start(data, prior) };

    let mut restarted = false;
    let outcome = match damped_newton(&eval, &start, GRAD_TOL, MAX_ITER) {
        Ok(o) => o,
        Err(_) => {
            restarted = true;
            match damped_newton(&eval, &coarse_start(data, prior), GRAD_TOL, MAX_ITER) {
                Ok(o) => o,
                Err(NewtonFailure::Stalled { x, grad_norm }) => {
                    return Err(Error::NoConvergence(format!(
                        "eta-prior mode stalled at ({}, {}) with gradient norm {grad_norm:e}",
                        x[0], x[1]
                    )))
                }
                Err(NewtonFailure::Infeasible) => {
                    return Err(Error::NoConvergence("no feasible starting point for the eta-prior mode".into()))
                }
            }
        }
    };
    let (p0s, etas) = (outcome.x[0], outcome.x[1]);
    let p1s = p0s + etas;
    let i0 = data.n0 as f64 / (p0s * (1.0 - p0s));
    let i1 = data.n1 as f64 / (p1s * (1.0 - p1s));
    let (s0, s1, r) = (prior.sigma0, prior.sigma1, prior.r);
    let c = r / (s0 * s1);
    let den = (1.0 - r * r) * i0 * i1 + 1.0 / (s0 * s0 * s1 * s1) + i0 / (s1 * s1) + i1 * (1.0 / (s0 * s0) + 2.0 * c + 1.0 / (s1 * s1));
    let w_l = ((1.0 - r * r) * i0 * i1 + i1 * (1.0 / (s0 * s0) + c)) / den;
    let w_d = (i1 * (1.0 / (s0 * s0) + c) + c * i0) / den;
    let w_eta = 1.0 - w_l;
    let fit = w_l * data.eta_hat() + w_eta * prior.eta0 + w_d * (data.phat0() - prior.mu0);
    Ok(ModeResult {
        p0_star: p0s,
        eta_star: etas,
        i0,
        i1,
        w_l,
        w_eta,
        w_d,
        grad_norm: outcome.grad_norm,
        iterations: outcome.iterations,
        identity_residual: etas - fit,
        hessian_nd: outcome.hessian_nd,
        restarted,
    })
}

/// DPP verdict for `η` read from the linear decomposition. DPP means the mode
/// lies beyond both the prior mean and the MLE, i.e. `(η* − η̂)(η* − η₀) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalVerdict {
    /// Data oriented so that `ŷ₀ ≥ μ₀` (successes and failures exchanged otherwise).
    pub flipped: bool,
    /// `η₀ − η̂` in the oriented coordinates.
    pub x: f64,
    /// `ŷ₀ − μ₀` in the oriented coordinates, nonnegative.
    pub g: f64,
    /// `−W_d g / (1 − W_L)`; absent when `W_L = 1`.
    pub lower: Option<f64>,
    /// `W_d g / W_L`; absent when `W_L = 0`.
    pub upper: Option<f64>,
    /// `((1 − W_L)x + W_d g)(W_d g − W_L x)`, equal to `(η* − η̂)(η* − η₀)`.
    pub interval_product: f64,
    /// `(η* − η₀)(η* − η̂)` from the solved mode.
    pub direct_product: f64,
    pub occurs: bool,
    pub boundary: bool,
    /// Whether the two products give the same sign verdict.
    pub agree: bool,
}

pub fn dpp_interval_check(data: &BinomialData, prior: &EtaGaussianPrior, mode: &ModeResult) -> IntervalVerdict {
    let flipped = data.phat0() < prior.mu0;
    let sign = if flipped { -1.0 } else { 1.0 };
    let x = sign * (prior.eta0 - data.eta_hat());
    let g = sign * (data.phat0() - prior.mu0);
    let w_l = mode.w_l;
    let wdg = mode.w_d * g;
    let lower = (w_l < 1.0).then(|| -wdg / (1.0 - w_l));
    let upper = (w_l > 0.0).then(|| wdg / w_l);
    let interval_product = ((1.0 - w_l) * x + wdg) * (wdg - w_l * x);
    let direct_product = (mode.eta_star - prior.eta0) * (mode.eta_star - data.eta_hat());
    let eps = boundary_eps(prior.eta0, data.eta_hat(), mode.eta_star);
    let occurs = interval_product > eps;
    let boundary = interval_product.abs() <= eps;
    let direct_occurs = direct_product > eps;
    let direct_boundary = direct_product.abs() <= eps;
    IntervalVerdict {
        flipped,
        x,
        g,
        lower,
        upper,
        interval_product,
        direct_product,
        occurs,
        boundary,
        agree: boundary || direct_boundary || occurs == direct_occurs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn figure_prior(r: f64) -> EtaGaussianPrior {
        EtaGaussianPrior::new(0.75, 0.159, 0.1, 0.1, r).unwrap()
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let d = BinomialData::new(31, 68, 33, 59).unwrap();
        let pr = figure_prior(0.4);
        let (p0, e) = (0.55, 0.07);
        let (_, g, h) = eta_log_posterior(&d, &pr, p0, e).unwrap();
        let f = |a: f64, b: f64| eta_log_posterior(&d, &pr, a, b).unwrap();
        let step = 1e-6;
        let g0 = (f(p0 + step, e).0 - f(p0 - step, e).0) / (2.0 * step);
        let g1 = (f(p0, e + step).0 - f(p0, e - step).0) / (2.0 * step);
        assert_abs_diff_eq!(g[0], g0, epsilon = 1e-5);
        assert_abs_diff_eq!(g[1], g1, epsilon = 1e-5);
        let h01 = (f(p0, e + step).1[0] - f(p0, e - step).1[0]) / (2.0 * step);
        let h11 = (f(p0, e + step).1[1] - f(p0, e - step).1[1]) / (2.0 * step);
        assert_abs_diff_eq!(h[0][1], h01, epsilon = 1e-3);
        assert_abs_diff_eq!(h[1][1], h11, epsilon = 1e-3);
    }

    #[test]
    fn mode_satisfies_identity() {
        let d = BinomialData::new(31, 68, 33, 59).unwrap();
        for r in [-0.8, -0.3, 0.0, 0.5, 0.9] {
            let m = mode_solve_eta_prior(&d, &figure_prior(r)).unwrap();
            assert!(m.grad_norm < 1e-10, "{}", m.grad_norm);
            assert!(m.hessian_nd);
            assert!(m.identity_residual.abs() < 1e-8, "r={r}: {}", m.identity_residual);
        }
    }

    #[test]
    fn independent_prior_weight_ratios() {
        let d = BinomialData::new(12, 40, 25, 50).unwrap();
        let (s0, s1) = (0.2f64, 0.3f64);
        let pr = EtaGaussianPrior::new(0.4, -0.1, s0, s1, 0.0).unwrap();
        let m = mode_solve_eta_prior(&d, &pr).unwrap();
        assert_abs_diff_eq!(m.w_d / m.w_l, 1.0 / (1.0 + m.i0 * s0 * s0), epsilon = 1e-13);
        assert_abs_diff_eq!(
            m.w_d / (1.0 - m.w_l),
            m.i1 * s1 * s1 / (1.0 + (m.i1 + m.i0) * s0 * s0),
            epsilon = 1e-13
        );
    }

    #[test]
    fn flat_limit_approaches_mle_monotonically() {
        let d = BinomialData::new(31, 68, 33, 59).unwrap();
        let gaps: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&s| {
                let m = mode_solve_eta_prior(&d, &EtaGaussianPrior::new(0.75, 0.159, s, s, 0.0).unwrap()).unwrap();
                (m.p0_star - d.phat0()).hypot(m.eta_star - d.eta_hat())
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    #[test]
    fn vague_prior_recovers_mle() {
        let d = BinomialData::new(31, 68, 33, 59).unwrap();
        let pr = EtaGaussianPrior::new(0.5, 0.0, 1e6, 1e6, 0.0).unwrap();
        let m = mode_solve_eta_prior(&d, &pr).unwrap();
        assert_abs_diff_eq!(m.eta_star, d.eta_hat(), epsilon = 1e-9);
        assert_abs_diff_eq!(m.w_l, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn interval_check_on_worked_data() {
        let d = BinomialData::new(31, 68, 33, 59).unwrap();
        let pr = figure_prior(0.0);
        let m = mode_solve_eta_prior(&d, &pr).unwrap();
        let v = dpp_interval_check(&d, &pr, &m);
        // ŷ₀ = 0.456 < μ₀ = 0.75 so the orientation flips.
        assert!(v.flipped && v.g > 0.0);
        assert!(v.agree);
        assert_abs_diff_eq!(v.interval_product, v.direct_product, epsilon = 1e-8);
        let (lo, hi) = (v.lower.unwrap(), v.upper.unwrap());
        assert_eq!(v.occurs, v.x > lo && v.x < hi);
    }

    #[test]
    fn arm_swap_negates_mode() {
        let d = BinomialData::new(20, 50, 30, 60).unwrap();
        let pair = figure_prior(0.3).to_pair();
        let m = mode_solve_eta_prior(&d, &pair.to_eta().unwrap()).unwrap();
        let s = mode_solve_eta_prior(&d.swapped(), &pair.swapped().to_eta().unwrap()).unwrap();
        assert_abs_diff_eq!(m.eta_star, -s.eta_star, epsilon = 1e-9);
        assert_abs_diff_eq!(m.p0_star + m.eta_star, s.p0_star, epsilon = 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn identity_and_verdicts_agree(
            n0 in 10u64..300, n1 in 10u64..300,
            f0 in 0.05f64..0.95, f1 in 0.05f64..0.95,
            mu0 in 0.1f64..0.9, eta0 in -0.4f64..0.4,
            s0 in 0.05f64..1.0, s1 in 0.05f64..1.0,
            r in -0.9f64..0.9,
        ) {
            let y0 = ((n0 as f64 * f0).round() as u64).clamp(1, n0 - 1);
            let y1 = ((n1 as f64 * f1).round() as u64).clamp(1, n1 - 1);
            let d = BinomialData::new(y0, n0, y1, n1).unwrap();
            let pr = EtaGaussianPrior::new(mu0, eta0, s0, s1, r).unwrap();
            let m = mode_solve_eta_prior(&d, &pr).unwrap();
            prop_assert!(m.identity_residual.abs() < 1e-8, "{}", m.identity_residual);
            let v = dpp_interval_check(&d, &pr, &m);
            prop_assert!(v.agree);
            let scale = 1.0 + v.direct_product.abs();
            prop_assert!((v.interval_product - v.direct_product).abs() < 1e-7 * scale);
        }
    }
}
