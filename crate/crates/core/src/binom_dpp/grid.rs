//! Midpoint-rule quadrature of the posterior on `(p₀, p₁)` and the marginal
//! of `δ = p₁ − p₀`.
//!
//! Cells on the diagonal `j − i = k` all have `δ = k h`, so the marginal lives
//! on the lattice `k h`. Each lattice mass is spread uniformly over
//! `[(k − ½)h, (k + ½)h]` for quantiles. Sums are arranged so that swapping
//! the arms negates every summary bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{arm_loglik, log_gauss2, BinomialData, PairGaussianPrior, PosteriorSummary, SummaryDiagnostics, SummaryMethod};
use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 1001;
pub const MIN_RESOLUTION: usize = 401;
/// The grid covers `(ε, 1 − ε)²`.
pub const GRID_EPSILON: f64 = 1e-6;
/// Posterior mass in edge cells above this is flagged.
const EDGE_MASS_WARNING: f64 = 1e-6;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooLow {
                found: self.resolution,
                minimum: MIN_RESOLUTION,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDiagnostics {
    pub resolution: usize,
    /// Spacing `h`, also the width of a δ bin.
    pub spacing: f64,
    /// Fraction of posterior mass in the outermost cells.
    pub edge_mass: f64,
    pub mass_at_boundary: bool,
    /// Number of correlation nodes when ρ is integrated out.
    pub rho_nodes: Option<usize>,
}

pub(crate) struct Axis {
    pub nodes: Vec<f64>,
    pub h: f64,
}

pub(crate) fn axis(n: usize) -> Axis {
    let h = (1.0 - 2.0 * GRID_EPSILON) / n as f64;
    Axis {
        nodes: (0..n).map(|i| GRID_EPSILON + (i as f64 + 0.5) * h).collect(),
        h,
    }
}

/// Mass on the lattice `k h`, indexed by `k + n − 1`.
struct DeltaMarginal {
    n: usize,
    h: f64,
    masses: Vec<f64>,
    edge: f64,
}

/// Index of diagonal `k` in the mass vector.
fn slot(n: usize, k: isize) -> usize {
    (k + n as isize - 1) as usize
}

/// Cell `t` along diagonal `k`, ordered identically for `k` and `−k` after an arm swap.
fn diagonal_cell(k: isize, t: usize) -> (usize, usize) {
    if k >= 0 {
        (t, t + k as usize)
    } else {
        (t + k.unsigned_abs(), t)
    }
}

impl DeltaMarginal {
    /// Accumulates `exp(logw(i, j))` along each diagonal.
    fn from_cells(n: usize, h: f64, logw: &(dyn Fn(usize, usize) -> f64 + Sync)) -> Self {
        let ks: Vec<isize> = (-(n as isize - 1)..=(n as isize - 1)).collect();
        let per_diag: Vec<(f64, f64)> = ks
            .par_iter()
            .map(|&k| {
                let len = n - k.unsigned_abs();
                let mut mass = 0.0;
                let mut edge = 0.0;
                for t in 0..len {
                    let (i, j) = diagonal_cell(k, t);
                    let w = logw(i, j).exp();
                    mass += w;
                    if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                        edge += w;
                    }
                }
                (mass, edge)
            })
            .collect();
        let masses: Vec<f64> = per_diag.iter().map(|p| p.0).collect();
        let edge = symmetric_total(n, &per_diag.iter().map(|p| p.1).collect::<Vec<_>>());
        DeltaMarginal { n, h, masses, edge }
    }

    fn total(&self) -> f64 {
        symmetric_total(self.n, &self.masses)
    }

    fn mean(&self) -> f64 {
        let mut num = 0.0;
        for k in 1..self.n as isize {
            num += (self.masses[slot(self.n, k)] - self.masses[slot(self.n, -k)]) * (k as f64 * self.h);
        }
        num / self.total()
    }

    /// Quantile cumulating from the low end.
    fn lower_quantile(&self, q: f64) -> f64 {
        let target = q * self.total();
        let mut cum = 0.0;
        for k in -(self.n as isize - 1)..=(self.n as isize - 1) {
            let m = self.masses[slot(self.n, k)];
            if m > 0.0 && cum + m >= target {
                let frac = ((target - cum) / m).clamp(0.0, 1.0);
                return (k as f64 - 0.5) * self.h + frac * self.h;
            }
            cum += m;
        }
        (self.n as f64 - 0.5) * self.h
    }

    /// Point with upper-tail mass `tail`, cumulating from the high end.
    fn upper_quantile(&self, tail: f64) -> f64 {
        let target = tail * self.total();
        let mut cum = 0.0;
        for k in (-(self.n as isize - 1)..=(self.n as isize - 1)).rev() {
            let m = self.masses[slot(self.n, k)];
            if m > 0.0 && cum + m >= target {
                let frac = ((target - cum) / m).clamp(0.0, 1.0);
                return (k as f64 + 0.5) * self.h - frac * self.h;
            }
            cum += m;
        }
        -(self.n as f64 - 0.5) * self.h
    }

    fn summary(&self, rho_nodes: Option<usize>) -> PosteriorSummary {
        let edge_mass = self.edge / self.total();
        PosteriorSummary {
            mean: self.mean(),
            median: 0.5 * (self.lower_quantile(0.5) + self.upper_quantile(0.5)),
            ci95: (self.lower_quantile(0.025), self.upper_quantile(0.025)),
            method: SummaryMethod::Grid,
            diagnostics: SummaryDiagnostics::Grid(GridDiagnostics {
                resolution: self.n,
                spacing: self.h,
                edge_mass,
                mass_at_boundary: edge_mass > EDGE_MASS_WARNING,
                rho_nodes,
            }),
        }
    }
}

/// `m₀ + Σ_k (m_k + m_{−k})`, invariant under reversing the lattice.
fn symmetric_total(n: usize, m: &[f64]) -> f64 {
    let mut total = m[slot(n, 0)];
    for k in 1..n as isize {
        total += m[slot(n, k)] + m[slot(n, -k)];
    }
    total
}

fn arm_grid(y: u64, n: u64, ax: &Axis) -> Vec<f64> {
    ax.nodes.iter().map(|&p| arm_loglik(y, n, p)).collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// δ summary under a Gaussian prior on `(p₀, p₁)`.
pub fn posterior_summary_grid(data: &BinomialData, prior: &PairGaussianPrior, grid: &GridSpec) -> Result<PosteriorSummary> {
    grid.validate()?;
    let ax = axis(grid.resolution);
    let l0 = arm_grid(data.y0, data.n0, &ax);
    let l1 = arm_grid(data.y1, data.n1, &ax);
    let lp = |i: usize, j: usize| l0[i] + l1[j] + prior.log_density(ax.nodes[i], ax.nodes[j]);
    // Shift by the maximum to keep the exponentials in range.
    let shift = (0..grid.resolution)
        .into_par_iter()
        .map(|i| (0..grid.resolution).map(|j| lp(i, j)).fold(f64::NEG_INFINITY, f64::max))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let m = DeltaMarginal::from_cells(grid.resolution, ax.h, &|i, j| lp(i, j) - shift);
    if !(m.total() > 0.0) {
        return Err(Error::DegenerateGeometry("posterior mass underflows on the grid".into()));
    }
    Ok(m.summary(None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoMarginalSummary {
    pub delta: PosteriorSummary,
    /// Posterior mean of ρ under a uniform prior on [−1, 1].
    pub rho_mean: f64,
    /// `(ρ_k, posterior weight)` at the trapezoid nodes.
    pub rho_weights: Vec<(f64, f64)>,
}

/// δ summary with ρ integrated out against a uniform prior by an
/// `rho_nodes`-point trapezoid rule on [−1, 1]. The endpoint priors are the
/// singular Gaussians on the lines `p₁ = μ₁ ± (s₁/s₀)(p₀ − μ₀)`.
pub fn posterior_summary_grid_rho_marginal(
    data: &BinomialData,
    mean: [f64; 2],
    sd: [f64; 2],
    grid: &GridSpec,
    rho_nodes: usize,
) -> Result<RhoMarginalSummary> {
    grid.validate()?;
    if rho_nodes < 3 {
        return Err(Error::InvalidInput("need at least 3 correlation nodes".into()));
    }
    // Validates the mean and standard deviations.
    PairGaussianPrior::new(mean, sd, 0.0)?;
    let n = grid.resolution;
    let ax = axis(n);
    let h = ax.h;
    let l0 = arm_grid(data.y0, data.n0, &ax);
    let l1 = arm_grid(data.y1, data.n1, &ax);
    let shift = max_of(&l0) + max_of(&l1);
    let step = 2.0 / (rho_nodes - 1) as f64;

    let per_rho: Vec<Vec<f64>> = (0..rho_nodes)
        .map(|k| {
            let rho = -1.0 + k as f64 * step;
            if k == 0 || k == rho_nodes - 1 {
                line_masses(data, &ax, &l0, shift, mean, sd, rho.signum())
            } else {
                let lw = |i: usize, j: usize| {
                    l0[i] + l1[j] - shift + log_gauss2(ax.nodes[i] - mean[0], ax.nodes[j] - mean[1], sd[0], sd[1], rho) - LN_2PI
                        + 2.0 * h.ln()
                };
                DeltaMarginal::from_cells(n, h, &lw).masses
            }
        })
        .collect();

    let evidence: Vec<f64> = per_rho.iter().map(|m| symmetric_total(n, m)).collect();
    let trap = |k: usize| if k == 0 || k == rho_nodes - 1 { 0.5 * step } else { step };
    let mut masses = vec![0.0; 2 * n - 1];
    for (k, m) in per_rho.iter().enumerate() {
        for (acc, v) in masses.iter_mut().zip(m) {
            *acc += trap(k) * v;
        }
    }
    let z: f64 = (0..rho_nodes).map(|k| trap(k) * evidence[k]).sum();
    if !(z > 0.0) {
        return Err(Error::DegenerateGeometry("posterior mass underflows on the grid".into()));
    }
    let rho_weights: Vec<(f64, f64)> = (0..rho_nodes)
        .map(|k| (-1.0 + k as f64 * step, trap(k) * evidence[k] / z))
        .collect();
    let rho_mean = rho_weights.iter().map(|(r, w)| r * w).sum();

    // Only the interior correlation nodes contribute edge cells.
    let marginal = DeltaMarginal {
        n,
        h,
        masses,
        edge: edge_mass_weighted(&ax, &l0, &l1, shift, mean, sd, rho_nodes, step),
    };
    let delta = marginal.summary(Some(rho_nodes));
    Ok(RhoMarginalSummary {
        delta,
        rho_mean,
        rho_weights,
    })
}

fn line_masses(data: &BinomialData, ax: &Axis, l0: &[f64], shift: f64, mean: [f64; 2], sd: [f64; 2], sign: f64) -> Vec<f64> {
    let n = ax.nodes.len();
    let mut masses = vec![0.0; 2 * n - 1];
    let slope = sign * sd[1] / sd[0];
    for (i, &p0) in ax.nodes.iter().enumerate() {
        let p1 = mean[1] + slope * (p0 - mean[0]);
        if !(p1 > GRID_EPSILON && p1 < 1.0 - GRID_EPSILON) {
            continue;
        }
        let z = (p0 - mean[0]) / sd[0];
        let log_prior = -0.5 * z * z - sd[0].ln() - 0.5 * LN_2PI;
        let w = (l0[i] + arm_loglik(data.y1, data.n1, p1) - shift + log_prior).exp() * ax.h;
        let k = ((p1 - p0) / ax.h).round() as isize;
        let k = k.clamp(-(n as isize - 1), n as isize - 1);
        masses[slot(n, k)] += w;
    }
    masses
}

#[allow(clippy::too_many_arguments)]
fn edge_mass_weighted(
    ax: &Axis,
    l0: &[f64],
    l1: &[f64],
    shift: f64,
    mean: [f64; 2],
    sd: [f64; 2],
    rho_nodes: usize,
    step: f64,
) -> f64 {
    let n = ax.nodes.len();
    let h = ax.h;
    let mut edge = 0.0;
    for k in 1..rho_nodes - 1 {
        let rho = -1.0 + k as f64 * step;
        let lw = |i: usize, j: usize| {
            (l0[i] + l1[j] - shift + log_gauss2(ax.nodes[i] - mean[0], ax.nodes[j] - mean[1], sd[0], sd[1], rho) - LN_2PI
                + 2.0 * h.ln())
            .exp()
        };
        let mut e = 0.0;
        for t in 0..n {
            e += lw(0, t) + lw(n - 1, t);
            if t > 0 && t < n - 1 {
                e += lw(t, 0) + lw(t, n - 1);
            }
        }
        edge += step * e;
    }
    edge
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{self, VarianceFamily};
    use approx::assert_abs_diff_eq;

    fn data() -> BinomialData {
        presets::binomial_figure_data()
    }

    #[test]
    fn rejects_coarse_grids() {
        let prior = presets::gauss_pair_prior(VarianceFamily::A, 0.0);
        let err = posterior_summary_grid(&data(), &prior, &GridSpec { resolution: 400 }).unwrap_err();
        assert!(matches!(err, Error::ResolutionTooLow { found: 400, .. }));
    }

    #[test]
    fn arm_swap_negates_summary_exactly() {
        for rho in [-0.8, 0.0, 0.95] {
            let prior = presets::gauss_pair_prior(VarianceFamily::A, rho);
            let g = GridSpec { resolution: 401 };
            let a = posterior_summary_grid(&data(), &prior, &g).unwrap();
            let b = posterior_summary_grid(&data().swapped(), &prior.swapped(), &g).unwrap();
            assert_eq!(a.mean, -b.mean);
            assert_eq!(a.median, -b.median);
            assert_eq!(a.ci95, (-b.ci95.1, -b.ci95.0));
        }
    }

    #[test]
    fn vague_prior_matches_independent_beta_posteriors() {
        // A near-flat Gaussian leaves Beta(y+1, n−y+1) posteriors.
        let d = data();
        let prior = PairGaussianPrior::new([0.5, 0.5], [1e3, 1e3], 0.0).unwrap();
        let s = posterior_summary_grid(&d, &prior, &GridSpec::default()).unwrap();
        let m0 = (d.y0 as f64 + 1.0) / (d.n0 as f64 + 2.0);
        let m1 = (d.y1 as f64 + 1.0) / (d.n1 as f64 + 2.0);
        assert_abs_diff_eq!(s.mean, m1 - m0, epsilon = 1e-6);
        assert!(s.ci95.0 < s.median && s.median < s.ci95.1);
        match s.diagnostics {
            SummaryDiagnostics::Grid(g) => assert!(!g.mass_at_boundary),
            _ => unreachable!(),
        }
    }

    #[test]
    fn gauss_a_mean_increases_with_rho() {
        let g = GridSpec { resolution: 601 };
        let means: Vec<f64> = presets::TABLE1_RHOS
            .iter()
            .map(|&r| posterior_summary_grid(&data(), &presets::gauss_pair_prior(VarianceFamily::A, r), &g).unwrap().mean)
            .collect();
        for w in means.windows(2) {
            assert!(w[1] >= w[0], "{means:?}");
        }
    }

    #[test]
    fn rho_marginal_weights_sum_to_one() {
        let sd = VarianceFamily::B.sds();
        let r = posterior_summary_grid_rho_marginal(&data(), presets::beta_means(), sd, &GridSpec { resolution: 401 }, 11).unwrap();
        let total: f64 = r.rho_weights.iter().map(|w| w.1).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(r.rho_mean > -1.0 && r.rho_mean < 1.0);
    }

    #[test]
    fn rho_marginal_with_concentrated_weight_reduces_to_fixed() {
        // Mixing fixed-ρ posteriors by evidence: the marginal mean lies between the extremes.
        let sd = VarianceFamily::B.sds();
        let g = GridSpec { resolution: 401 };
        let r = posterior_summary_grid_rho_marginal(&data(), presets::beta_means(), sd, &g, 21).unwrap();
        let fixed: Vec<f64> = [-0.9, 0.0, 0.9]
            .iter()
            .map(|&rho| posterior_summary_grid(&data(), &PairGaussianPrior::new(presets::beta_means(), sd, rho).unwrap(), &g).unwrap().mean)
            .collect();
        let lo = fixed.iter().cloned().fold(f64::INFINITY, f64::min) - 0.05;
        let hi = fixed.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.05;
        assert!(r.delta.mean > lo && r.delta.mean < hi);
    }
}
