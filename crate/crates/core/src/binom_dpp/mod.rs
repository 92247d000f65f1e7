//! Two-arm Binomial model `y_i ~ Binom(n_i, p_i)` with the treatment effect
//! `η = p₁ − p₀` (written δ in summaries).
//!
//! Gaussian priors can sit on `(p₀, η)`, on `(p₀, p₁)` or on the logits
//! `θ_i = logit p_i`. Gaussian priors on bounded parameters are used
//! unnormalized on the support.

mod beta;
mod contours;
mod eta_mode;
mod grid;
mod logit_mode;
mod mcmc;
mod newton;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use beta::{beta_conjugate_summary, BetaDiagnostics};
pub use contours::{contour_grid, ContourPrior, ContourRow};
pub use eta_mode::{dpp_interval_check, eta_log_posterior, mode_solve_eta_prior, IntervalVerdict, ModeResult};
pub use grid::{
    posterior_summary_grid, posterior_summary_grid_rho_marginal, GridDiagnostics, GridSpec, RhoMarginalSummary,
    DEFAULT_RESOLUTION, GRID_EPSILON, MIN_RESOLUTION,
};
pub use logit_mode::{logit_log_posterior, mode_solve_logit_prior, mode_solve_logit_prior_free_r, LogitModeState};
pub use mcmc::{
    posterior_summary_mcmc, FlexiblePriorSpec, McmcDiagnostics, McmcSpec, McmcSummary, ParamSummary, RhoMode,
    Transformation, VarianceMode, FLAT_SIGMA_MAX, GAMMA_RATE, GAMMA_SHAPE,
};

/// Counts `(y₀, n₀)` for control and `(y₁, n₁)` for treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawData")]
pub struct BinomialData {
    pub y0: u64,
    pub n0: u64,
    pub y1: u64,
    pub n1: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    y0: u64,
    n0: u64,
    y1: u64,
    n1: u64,
}

impl TryFrom<RawData> for BinomialData {
    type Error = Error;

    fn try_from(r: RawData) -> Result<Self> {
        BinomialData::new(r.y0, r.n0, r.y1, r.n1)
    }
}

impl BinomialData {
    pub fn new(y0: u64, n0: u64, y1: u64, n1: u64) -> Result<Self> {
        if n0 == 0 || n1 == 0 {
            return Err(Error::InvalidInput("trial counts must be positive".into()));
        }
        if y0 > n0 || y1 > n1 {
            return Err(Error::InvalidInput("successes cannot exceed trials".into()));
        }
        Ok(BinomialData { y0, n0, y1, n1 })
    }

    pub fn phat0(&self) -> f64 {
        self.y0 as f64 / self.n0 as f64
    }

    pub fn phat1(&self) -> f64 {
        self.y1 as f64 / self.n1 as f64
    }

    /// `η̂ = y₁/n₁ − y₀/n₀`.
    pub fn eta_hat(&self) -> f64 {
        self.phat1() - self.phat0()
    }

    /// Exchanges the arms.
    pub fn swapped(&self) -> Self {
        BinomialData {
            y0: self.y1,
            n0: self.n1,
            y1: self.y0,
            n1: self.n0,
        }
    }

    /// Successes and failures exchanged, i.e. `p ↦ 1 − p`.
    pub fn flipped(&self) -> Self {
        BinomialData {
            y0: self.n0 - self.y0,
            n0: self.n0,
            y1: self.n1 - self.y1,
            n1: self.n1,
        }
    }
}

/// `x ln y` with the convention `0 ln 0 = 0`.
pub(crate) fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Log-likelihood of one arm at `p`, without the binomial coefficient.
pub(crate) fn arm_loglik(y: u64, n: u64, p: f64) -> f64 {
    xlny(y as f64, p) + xlny((n - y) as f64, 1.0 - p)
}

/// Log-likelihood at `(p₀, η)` up to the binomial coefficients.
pub fn binom_loglik(data: &BinomialData, p0: f64, eta: f64) -> Result<f64> {
    let p1 = p0 + eta;
    if !(p0 > 0.0 && p0 < 1.0 && p1 > 0.0 && p1 < 1.0) {
        return Err(Error::DomainError(format!(
            "(p0, eta) = ({p0}, {eta}) is outside the open simplex"
        )));
    }
    Ok(arm_loglik(data.y0, data.n0, p0) + arm_loglik(data.y1, data.n1, p1))
}

fn check_sd(name: &str, s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::DomainError(format!("{name} must be positive and finite, got {s}")));
    }
    Ok(())
}

fn check_corr(r: f64) -> Result<()> {
    if !(r > -1.0 && r < 1.0) {
        return Err(Error::InvalidCorrelation {
            value: r,
            lower: -1.0,
            dim: 2,
        });
    }
    Ok(())
}

fn check_finite(name: &'static str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::NonFinite(name));
    }
    Ok(())
}

/// Bivariate Gaussian prior on `(p₀, η)` with means `(μ₀, η₀)`, standard
/// deviations `(σ₀, σ₁)` and correlation `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEtaPrior")]
pub struct EtaGaussianPrior {
    pub mu0: f64,
    pub eta0: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub r: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEtaPrior {
    mu0: f64,
    eta0: f64,
    sigma0: f64,
    sigma1: f64,
    r: f64,
}

impl TryFrom<RawEtaPrior> for EtaGaussianPrior {
    type Error = Error;

    fn try_from(r: RawEtaPrior) -> Result<Self> {
        EtaGaussianPrior::new(r.mu0, r.eta0, r.sigma0, r.sigma1, r.r)
    }
}

impl EtaGaussianPrior {
    pub fn new(mu0: f64, eta0: f64, sigma0: f64, sigma1: f64, r: f64) -> Result<Self> {
        check_finite("mu0", mu0)?;
        check_finite("eta0", eta0)?;
        check_sd("sigma0", sigma0)?;
        check_sd("sigma1", sigma1)?;
        check_corr(r)?;
        Ok(EtaGaussianPrior {
            mu0,
            eta0,
            sigma0,
            sigma1,
            r,
        })
    }

    /// Inverse covariance entries `(P₀₀, P₀₁, P₁₁)`.
    pub(crate) fn precision(&self) -> (f64, f64, f64) {
        precision(self.sigma0, self.sigma1, self.r)
    }

    /// The same Gaussian expressed on `(p₀, p₁) = (p₀, p₀ + η)`.
    pub fn to_pair(&self) -> PairGaussianPrior {
        let (s0, s1, r) = (self.sigma0, self.sigma1, self.r);
        let var1 = s0 * s0 + 2.0 * r * s0 * s1 + s1 * s1;
        let cov = s0 * s0 + r * s0 * s1;
        let sd1 = var1.sqrt();
        PairGaussianPrior {
            mean: [self.mu0, self.mu0 + self.eta0],
            sd: [s0, sd1],
            rho: cov / (s0 * sd1),
        }
    }
}

pub(crate) fn precision(s0: f64, s1: f64, r: f64) -> (f64, f64, f64) {
    let d = 1.0 - r * r;
    (1.0 / (s0 * s0 * d), -r / (s0 * s1 * d), 1.0 / (s1 * s1 * d))
}

/// Bivariate Gaussian prior on `(p₀, p₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPairPrior")]
pub struct PairGaussianPrior {
    pub mean: [f64; 2],
    pub sd: [f64; 2],
    pub rho: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPairPrior {
    mean: [f64; 2],
    sd: [f64; 2],
    rho: f64,
}

impl TryFrom<RawPairPrior> for PairGaussianPrior {
    type Error = Error;

    fn try_from(r: RawPairPrior) -> Result<Self> {
        PairGaussianPrior::new(r.mean, r.sd, r.rho)
    }
}

impl PairGaussianPrior {
    pub fn new(mean: [f64; 2], sd: [f64; 2], rho: f64) -> Result<Self> {
        check_finite("mean", mean[0])?;
        check_finite("mean", mean[1])?;
        check_sd("sd[0]", sd[0])?;
        check_sd("sd[1]", sd[1])?;
        check_corr(rho)?;
        Ok(PairGaussianPrior { mean, sd, rho })
    }

    /// Exchanges the arms.
    pub fn swapped(&self) -> Self {
        PairGaussianPrior {
            mean: [self.mean[1], self.mean[0]],
            sd: [self.sd[1], self.sd[0]],
            rho: self.rho,
        }
    }

    /// The same Gaussian expressed on `(p₀, η)`.
    pub fn to_eta(&self) -> Result<EtaGaussianPrior> {
        let [s0, s1] = self.sd;
        let var_eta = s0 * s0 - 2.0 * self.rho * s0 * s1 + s1 * s1;
        let cov = self.rho * s0 * s1 - s0 * s0;
        let sd_eta = var_eta.sqrt();
        EtaGaussianPrior::new(self.mean[0], self.mean[1] - self.mean[0], s0, sd_eta, cov / (s0 * sd_eta))
    }

    /// Log density up to the constant `−ln 2π`, including the normalizer.
    pub(crate) fn log_density(&self, p0: f64, p1: f64) -> f64 {
        log_gauss2(p0 - self.mean[0], p1 - self.mean[1], self.sd[0], self.sd[1], self.rho)
    }
}

/// `ln N₂((x, y); 0, Σ(s₀, s₁, ρ)) + ln 2π`.
pub(crate) fn log_gauss2(x: f64, y: f64, s0: f64, s1: f64, rho: f64) -> f64 {
    let d = 1.0 - rho * rho;
    let (a, b) = (x / s0, y / s1);
    // Summed in an order that is symmetric under swapping the arguments.
    -((a * a + b * b) - 2.0 * rho * (a * b)) / (2.0 * d) - (s0 * s1).ln() - 0.5 * d.ln()
}

/// Gaussian prior on the logits `θ_i = ln(p_i/(1 − p_i))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLogitPrior")]
pub struct LogitGaussianPrior {
    pub mu: [f64; 2],
    pub sigma0: f64,
    pub sigma1: f64,
    pub r: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLogitPrior {
    mu: [f64; 2],
    sigma0: f64,
    sigma1: f64,
    r: f64,
}

impl TryFrom<RawLogitPrior> for LogitGaussianPrior {
    type Error = Error;

    fn try_from(r: RawLogitPrior) -> Result<Self> {
        LogitGaussianPrior::new(r.mu, r.sigma0, r.sigma1, r.r)
    }
}

impl LogitGaussianPrior {
    pub fn new(mu: [f64; 2], sigma0: f64, sigma1: f64, r: f64) -> Result<Self> {
        check_finite("mu", mu[0])?;
        check_finite("mu", mu[1])?;
        check_sd("sigma0", sigma0)?;
        check_sd("sigma1", sigma1)?;
        check_corr(r)?;
        Ok(LogitGaussianPrior { mu, sigma0, sigma1, r })
    }
}

/// Independent `Beta(a₀, b₀)` and `Beta(a₁, b₁)` priors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBeta")]
pub struct BetaPrior {
    pub a0: f64,
    pub b0: f64,
    pub a1: f64,
    pub b1: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeta {
    a0: f64,
    b0: f64,
    a1: f64,
    b1: f64,
}

impl TryFrom<RawBeta> for BetaPrior {
    type Error = Error;

    fn try_from(r: RawBeta) -> Result<Self> {
        BetaPrior::new(r.a0, r.b0, r.a1, r.b1)
    }
}

impl BetaPrior {
    pub fn new(a0: f64, b0: f64, a1: f64, b1: f64) -> Result<Self> {
        for (name, v) in [("a0", a0), ("b0", b0), ("a1", a1), ("b1", b1)] {
            check_sd(name, v)?;
        }
        Ok(BetaPrior { a0, b0, a1, b1 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMethod {
    Grid,
    Mcmc,
    BetaExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryDiagnostics {
    Grid(GridDiagnostics),
    Mcmc(McmcDiagnostics),
    BetaExact(BetaDiagnostics),
}

/// Summary of the marginal posterior of `δ = p₁ − p₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub median: f64,
    /// Equal-tailed 95% interval.
    pub ci95: (f64, f64),
    pub method: SummaryMethod,
    pub diagnostics: SummaryDiagnostics,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn data_validation_and_relabeling() {
        assert!(BinomialData::new(3, 2, 0, 1).is_err());
        assert!(BinomialData::new(0, 0, 0, 1).is_err());
        let d = BinomialData::new(31, 68, 33, 59).unwrap();
        assert_eq!(d.swapped().swapped(), d);
        assert_eq!(d.flipped().y0, 37);
        assert_abs_diff_eq!(d.eta_hat(), 33.0 / 59.0 - 31.0 / 68.0, epsilon = 1e-16);
        let json: BinomialData = serde_json::from_str(r#"{"y0":1,"n0":2,"y1":1,"n1":2}"#).unwrap();
        assert_eq!(json, BinomialData::new(1, 2, 1, 2).unwrap());
        assert!(serde_json::from_str::<BinomialData>(r#"{"y0":3,"n0":2,"y1":1,"n1":2}"#).is_err());
    }

    #[test]
    fn loglik_symmetry_and_domain() {
        let d = BinomialData::new(31, 68, 33, 59).unwrap();
        for &(p0, eta) in &[(0.3, 0.2), (0.6, -0.1), (0.01, 0.9)] {
            let a = binom_loglik(&d, p0, eta).unwrap();
            let b = binom_loglik(&d.swapped(), p0 + eta, -eta).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        assert!(matches!(binom_loglik(&d, 0.0, 0.1), Err(Error::DomainError(_))));
        assert!(binom_loglik(&d, 0.6, 0.4).is_err());

        // All successes: the failure branch contributes nothing.
        let all = BinomialData::new(5, 5, 2, 4).unwrap();
        let near_one = binom_loglik(&all, 1.0 - 1e-12, -0.5).unwrap();
        assert!(near_one.is_finite());
        assert_abs_diff_eq!(near_one, 5.0 * (1.0f64 - 1e-12).ln() + 4.0 * 0.5f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn loglik_grid_maximum_at_mle() {
        let d = BinomialData::new(31, 68, 33, 59).unwrap();
        let (p0, eta) = (d.phat0(), d.eta_hat());
        let best = binom_loglik(&d, p0, eta).unwrap();
        let n = 2001;
        let mut arg = (0.0, 0.0);
        let mut max = f64::NEG_INFINITY;
        for i in 0..n {
            let q0 = (i as f64 + 0.5) / n as f64;
            for j in 0..n {
                let e = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
                if let Ok(v) = binom_loglik(&d, q0, e) {
                    if v > max {
                        max = v;
                        arg = (q0, e);
                    }
                }
            }
        }
        assert!(best >= max);
        assert!((arg.0 - p0).abs() < 1e-3 && (arg.1 - eta).abs() < 2e-3);
    }

    #[test]
    fn prior_parameterizations_round_trip() {
        let eta = EtaGaussianPrior::new(0.75, 0.159, 0.1, 0.2, -0.3).unwrap();
        let back = eta.to_pair().to_eta().unwrap();
        assert_abs_diff_eq!(back.mu0, eta.mu0, epsilon = 1e-15);
        assert_abs_diff_eq!(back.eta0, eta.eta0, epsilon = 1e-15);
        assert_abs_diff_eq!(back.sigma0, eta.sigma0, epsilon = 1e-15);
        assert_abs_diff_eq!(back.sigma1, eta.sigma1, epsilon = 1e-14);
        assert_abs_diff_eq!(back.r, eta.r, epsilon = 1e-14);

        // Densities agree up to the unit Jacobian of the shear.
        let pair = eta.to_pair();
        let (p0, e) = (0.7, 0.1);
        let (a, b, c) = eta.precision();
        let (x, y) = (p0 - eta.mu0, e - eta.eta0);
        let q = a * x * x + 2.0 * b * x * y + c * y * y;
        let eta_log = -0.5 * q - (eta.sigma0 * eta.sigma1).ln() - 0.5 * (1.0 - eta.r * eta.r).ln();
        assert_abs_diff_eq!(pair.log_density(p0, p0 + e), eta_log, epsilon = 1e-12);

        assert!(PairGaussianPrior::new([0.5, 0.5], [0.1, 0.0], 0.0).is_err());
        assert!(EtaGaussianPrior::new(0.5, 0.0, 0.1, 0.1, 1.0).is_err());
    }
}
