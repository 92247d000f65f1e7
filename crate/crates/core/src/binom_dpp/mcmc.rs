//! Adaptive random-walk Metropolis for Gaussian priors on `(p₀, p₁)` or on
//! the logits, with optional hyperpriors on the standard deviations and the
//! correlation.
//!
//! The proposal covariance is learned from the burn-in draws and a global log
//! scale is tuned toward the target acceptance rate by Robbins–Monro steps.
//! Both freeze when burn-in ends.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logit_mode::{logit, sigmoid, softplus};
use super::{arm_loglik, log_gauss2, BinomialData, PosteriorSummary, SummaryDiagnostics, SummaryMethod};
use crate::error::{Error, Result};
use crate::presets;
use crate::rng::{domain, StreamRng};
use crate::stats;
use crate::symlin::{cholesky, LowerTriangularFactor, SymMatrix};

pub const GAMMA_SHAPE: f64 = 10.0;
pub const GAMMA_RATE: f64 = 10.0;
/// Upper bound of the flat prior on each standard deviation.
pub const FLAT_SIGMA_MAX: f64 = 5.0;
const RHAT_LIMIT: f64 = 1.05;
const ADAPT_EVERY: usize = 100;
const ADAPT_START: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transformation {
    None,
    Logit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// Beta-moment standard deviations.
    FixedA,
    /// Standard deviations 0.5.
    FixedB,
    /// Independent `Gamma(shape, rate)` priors on the standard deviations.
    GammaHyper,
    /// Flat on `(0, FLAT_SIGMA_MAX]` for each standard deviation.
    FlatCov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoMode {
    Fixed(f64),
    /// Uniform on (−1, 1).
    Uniform,
}

fn default_a() -> [f64; 2] {
    presets::BETA_A
}

fn default_b() -> [f64; 2] {
    presets::BETA_B
}

/// Prior means are `a/(a + b)`, mapped through the logit when transformed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlexiblePriorSpec {
    pub transformation: Transformation,
    pub variance_mode: VarianceMode,
    pub rho_mode: RhoMode,
    #[serde(default = "default_a")]
    pub a: [f64; 2],
    #[serde(default = "default_b")]
    pub b: [f64; 2],
}

impl FlexiblePriorSpec {
    pub fn new(transformation: Transformation, variance_mode: VarianceMode, rho_mode: RhoMode) -> Self {
        FlexiblePriorSpec {
            transformation,
            variance_mode,
            rho_mode,
            a: presets::BETA_A,
            b: presets::BETA_B,
        }
    }

    fn validate(&self) -> Result<()> {
        for v in self.a.iter().chain(&self.b) {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::DomainError(format!("Beta shape parameters must be positive, got {v}")));
            }
        }
        if let RhoMode::Fixed(r) = self.rho_mode {
            if !(r > -1.0 && r < 1.0) {
                return Err(Error::InvalidCorrelation {
                    value: r,
                    lower: -1.0,
                    dim: 2,
                });
            }
        }
        Ok(())
    }

    fn fixed_sd(&self) -> Option<[f64; 2]> {
        let s = |a: f64, b: f64| (a * b / ((a + b) * (a + b) * (a + b + 1.0))).sqrt();
        match self.variance_mode {
            VarianceMode::FixedA => Some([s(self.a[0], self.b[0]), s(self.a[1], self.b[1])]),
            VarianceMode::FixedB => Some(presets::WIDE_SD),
            VarianceMode::GammaHyper | VarianceMode::FlatCov => None,
        }
    }

    fn means(&self) -> [f64; 2] {
        let m = [self.a[0] / (self.a[0] + self.b[0]), self.a[1] / (self.a[1] + self.b[1])];
        match self.transformation {
            Transformation::None => m,
            Transformation::Logit => [logit(m[0]), logit(m[1])],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSpec {
    pub chains: usize,
    /// Total iterations per chain, burn-in included.
    pub iters: usize,
    pub burn_in: usize,
    #[serde(default = "default_target")]
    pub target_accept: f64,
    pub seed: u64,
}

fn default_target() -> f64 {
    0.234
}

impl Default for McmcSpec {
    fn default() -> Self {
        McmcSpec {
            chains: 4,
            iters: 60_000,
            burn_in: 10_000,
            target_accept: default_target(),
            seed: 0,
        }
    }
}

impl McmcSpec {
    fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::InvalidInput("need at least 2 chains".into()));
        }
        if self.burn_in >= self.iters {
            return Err(Error::InvalidInput("burn_in must be smaller than iters".into()));
        }
        if self.iters - self.burn_in < 100 {
            return Err(Error::InvalidInput("need at least 100 post burn-in iterations".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::DomainError("target_accept must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcDiagnostics {
    pub chains: usize,
    pub iters: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Post burn-in acceptance rate per chain.
    pub acceptance: Vec<f64>,
    /// `(coordinate, split R-hat, ESS)`.
    pub coordinates: Vec<(String, f64, f64)>,
    pub max_rhat: f64,
    pub min_ess: f64,
    /// Upper bound of the flat prior on σ, when that prior is in use.
    pub flat_sigma_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub mean: f64,
    pub median: f64,
    pub ci95: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcSummary {
    pub delta: PosteriorSummary,
    /// Posterior of ρ when it is sampled.
    pub rho: Option<ParamSummary>,
    /// Posteriors of the standard deviations when they are sampled.
    pub sigma: Option<[ParamSummary; 2]>,
}

struct Target<'a> {
    data: &'a BinomialData,
    logit: bool,
    mean: [f64; 2],
    fixed_sd: Option<[f64; 2]>,
    fixed_rho: Option<f64>,
    variance_mode: VarianceMode,
}

impl Target<'_> {
    fn rho_index(&self) -> Option<usize> {
        self.fixed_rho.is_none().then_some(2)
    }

    fn sigma_index(&self) -> Option<usize> {
        self.fixed_sd.is_none().then_some(if self.fixed_rho.is_none() { 3 } else { 2 })
    }

    fn dim(&self) -> usize {
        2 + usize::from(self.fixed_rho.is_none()) + 2 * usize::from(self.fixed_sd.is_none())
    }

    fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = if self.logit {
            vec!["theta0".into(), "theta1".into()]
        } else {
            vec!["p0".into(), "p1".into()]
        };
        if self.rho_index().is_some() {
            v.push("rho".into());
        }
        if self.sigma_index().is_some() {
            v.push("sigma0".into());
            v.push("sigma1".into());
        }
        v
    }

    fn probs(&self, x: &[f64]) -> [f64; 2] {
        if self.logit {
            [sigmoid(x[0]), sigmoid(x[1])]
        } else {
            [x[0], x[1]]
        }
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.data;
        let ll = if self.logit {
            let arm = |y: u64, n: u64, t: f64| y as f64 * t - n as f64 * softplus(t);
            arm(d.y0, d.n0, x[0]) + arm(d.y1, d.n1, x[1])
        } else {
            if !(x[0] > 0.0 && x[0] < 1.0 && x[1] > 0.0 && x[1] < 1.0) {
                return f64::NEG_INFINITY;
            }
            arm_loglik(d.y0, d.n0, x[0]) + arm_loglik(d.y1, d.n1, x[1])
        };
        let rho = match self.rho_index() {
            Some(i) => {
                if !(x[i].abs() < 1.0) {
                    return f64::NEG_INFINITY;
                }
                x[i]
            }
            None => self.fixed_rho.unwrap_or(0.0),
        };
        let (sd, hyper) = match self.sigma_index() {
            Some(i) => {
                let s = [x[i], x[i + 1]];
                if !(s[0] > 0.0 && s[1] > 0.0) {
                    return f64::NEG_INFINITY;
                }
                let hyper = match self.variance_mode {
                    VarianceMode::GammaHyper => s.iter().map(|v| (GAMMA_SHAPE - 1.0) * v.ln() - GAMMA_RATE * v).sum(),
                    _ => {
                        if s[0] > FLAT_SIGMA_MAX || s[1] > FLAT_SIGMA_MAX {
                            return f64::NEG_INFINITY;
                        }
                        0.0
                    }
                };
                (s, hyper)
            }
            None => (self.fixed_sd.expect("fixed sd"), 0.0),
        };
        ll + log_gauss2(x[0] - self.mean[0], x[1] - self.mean[1], sd[0], sd[1], rho) + hyper
    }

    fn initial_scales(&self) -> Vec<f64> {
        let mut v = if self.logit { vec![0.3, 0.3] } else { vec![0.05, 0.05] };
        if self.rho_index().is_some() {
            v.push(0.3);
        }
        if self.sigma_index().is_some() {
            v.extend([0.3, 0.3]);
        }
        v
    }

    fn initial_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        let d = self.data;
        let mle = [
            (d.y0 as f64).clamp(0.5, d.n0 as f64 - 0.5) / d.n0 as f64,
            (d.y1 as f64).clamp(0.5, d.n1 as f64 - 0.5) / d.n1 as f64,
        ];
        loop {
            let (z0, z1) = rng.normal_pair();
            let mut x = if self.logit {
                vec![0.5 * (logit(mle[0]) + self.mean[0]) + 0.2 * z0, 0.5 * (logit(mle[1]) + self.mean[1]) + 0.2 * z1]
            } else {
                vec![0.5 * (mle[0] + self.mean[0]) + 0.02 * z0, 0.5 * (mle[1] + self.mean[1]) + 0.02 * z1]
            };
            if self.rho_index().is_some() {
                x.push(rng.uniform_range(-0.5, 0.5));
            }
            if self.sigma_index().is_some() {
                let (lo, hi) = match self.variance_mode {
                    VarianceMode::GammaHyper => (0.7, 1.3),
                    _ => (0.3, 1.5),
                };
                x.push(rng.uniform_range(lo, hi));
                x.push(rng.uniform_range(lo, hi));
            }
            if self.log_density(&x).is_finite() {
                return x;
            }
        }
    }
}

/// Running mean and covariance of the burn-in draws.
struct Welford {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<Vec<f64>>,
}

impl Welford {
    fn new(d: usize) -> Self {
        Welford {
            n: 0.0,
            mean: vec![0.0; d],
            m2: vec![vec![0.0; d]; d],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1.0;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl / self.n;
        }
        for i in 0..x.len() {
            for j in 0..x.len() {
                self.m2[i][j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    fn factor(&self) -> Option<LowerTriangularFactor> {
        let d = self.mean.len();
        let cov = SymMatrix::from_fn(d, |i, j| {
            let c = self.m2[i][j] / (self.n - 1.0);
            if i == j {
                c + 1e-12
            } else {
                c
            }
        })
        .ok()?;
        cholesky(&cov).ok()
    }
}

struct ChainOutput {
    draws: Vec<Vec<f64>>,
    deltas: Vec<f64>,
    acceptance: f64,
}

fn run_chain(target: &Target<'_>, spec: &McmcSpec, chain: usize) -> ChainOutput {
    let d = target.dim();
    let mut rng = StreamRng::new(spec.seed, domain::MCMC, chain as u64);
    let mut x = target.initial_point(&mut rng);
    let mut lp = target.log_density(&x);
    let scales = target.initial_scales();
    let mut factor = cholesky(&SymMatrix::diagonal(&scales.iter().map(|s| s * s).collect::<Vec<_>>()).expect("diag"))
        .expect("positive scales");
    let mut log_scale = 0.0f64;
    let base_scale = 2.38 / (d as f64).sqrt();
    let mut welford = Welford::new(d);
    let kept = spec.iters - spec.burn_in;
    let mut draws = Vec::with_capacity(kept);
    let mut deltas = Vec::with_capacity(kept);
    let mut accepted = 0usize;
    let mut z = vec![0.0; d];

    for t in 0..spec.iters {
        let burn = t < spec.burn_in;
        rng.fill_normal(&mut z);
        let step = factor.mul_vec(&z);
        let s = base_scale * log_scale.exp();
        let prop: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + s * b).collect();
        let lp_prop = target.log_density(&prop);
        let log_alpha = (lp_prop - lp).min(0.0);
        let u = rng.uniform();
        let accept = lp_prop.is_finite() && u.ln() < log_alpha;
        if accept {
            x = prop;
            lp = lp_prop;
        }
        if burn {
            let alpha = if lp_prop.is_finite() { log_alpha.exp() } else { 0.0 };
            log_scale += (alpha - spec.target_accept) / ((t + 1) as f64).powf(0.6);
            log_scale = log_scale.clamp(-10.0, 10.0);
            welford.push(&x);
            if t + 1 >= ADAPT_START && (t + 1) % ADAPT_EVERY == 0 {
                if let Some(f) = welford.factor() {
                    factor = f;
                }
            }
        } else {
            if accept {
                accepted += 1;
            }
            let p = target.probs(&x);
            deltas.push(p[1] - p[0]);
            draws.push(x.clone());
        }
    }
    ChainOutput {
        draws,
        deltas,
        acceptance: accepted as f64 / kept as f64,
    }
}

fn param_summary(values: &[f64]) -> ParamSummary {
    let sorted = stats::sorted_copy(values);
    ParamSummary {
        mean: stats::mean(values),
        median: stats::quantile_sorted(&sorted, 0.5),
        ci95: (stats::quantile_sorted(&sorted, 0.025), stats::quantile_sorted(&sorted, 0.975)),
    }
}

pub fn posterior_summary_mcmc(data: &BinomialData, spec: &FlexiblePriorSpec, mcmc: &McmcSpec) -> Result<McmcSummary> {
    spec.validate()?;
    mcmc.validate()?;
    let target = Target {
        data,
        logit: spec.transformation == Transformation::Logit,
        mean: spec.means(),
        fixed_sd: spec.fixed_sd(),
        fixed_rho: match spec.rho_mode {
            RhoMode::Fixed(r) => Some(r),
            RhoMode::Uniform => None,
        },
        variance_mode: spec.variance_mode,
    };
    let outputs: Vec<ChainOutput> = (0..mcmc.chains).into_par_iter().map(|c| run_chain(&target, mcmc, c)).collect();

    let names = target.names();
    let column = |k: usize| -> Vec<Vec<f64>> { outputs.iter().map(|o| o.draws.iter().map(|x| x[k]).collect()).collect() };
    let mut coordinates = Vec::new();
    let mut columns: Vec<Vec<Vec<f64>>> = (0..target.dim()).map(column).collect();
    columns.push(outputs.iter().map(|o| o.deltas.clone()).collect());
    let mut all_names = names.clone();
    all_names.push("delta".into());
    for (name, chains) in all_names.iter().zip(&columns) {
        let refs: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        coordinates.push((name.clone(), stats::split_rhat(&refs), stats::effective_sample_size(&refs)));
    }
    let max_rhat = coordinates.iter().map(|c| c.1).fold(0.0, f64::max);
    let min_ess = coordinates.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    if !(max_rhat < RHAT_LIMIT) {
        let detail: Vec<String> = coordinates.iter().map(|(n, r, e)| format!("{n}: rhat={r:.4} ess={e:.0}")).collect();
        return Err(Error::NotConverged(format!(
            "split R-hat {max_rhat:.4} exceeds {RHAT_LIMIT} ({})",
            detail.join(", ")
        )));
    }
    let pooled = |k: usize| -> Vec<f64> { columns[k].concat() };
    let delta_all = pooled(target.dim());
    let ds = param_summary(&delta_all);
    let delta = PosteriorSummary {
        mean: ds.mean,
        median: ds.median,
        ci95: ds.ci95,
        method: SummaryMethod::Mcmc,
        diagnostics: SummaryDiagnostics::Mcmc(McmcDiagnostics {
            chains: mcmc.chains,
            iters: mcmc.iters,
            burn_in: mcmc.burn_in,
            seed: mcmc.seed,
            acceptance: outputs.iter().map(|o| o.acceptance).collect(),
            coordinates,
            max_rhat,
            min_ess,
            flat_sigma_bound: (spec.variance_mode == VarianceMode::FlatCov).then_some(FLAT_SIGMA_MAX),
        }),
    };
    Ok(McmcSummary {
        delta,
        rho: target.rho_index().map(|i| param_summary(&pooled(i))),
        sigma: target.sigma_index().map(|i| [param_summary(&pooled(i)), param_summary(&pooled(i + 1))]),
    })
}
