//! Independent conjugate Beta priors.

use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BetaPrior, BinomialData, PosteriorSummary, SummaryDiagnostics, SummaryMethod};
use crate::error::{Error, Result};
use crate::rng::{domain, StreamRng};
use crate::stats;

const BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaDiagnostics {
    pub draws: usize,
    pub seed: u64,
    /// `(a₀ + y₀, b₀ + n₀ − y₀, a₁ + y₁, b₁ + n₁ − y₁)`.
    pub posterior: [f64; 4],
    /// Difference of the Beta posterior means.
    pub exact_mean: f64,
    pub mc_mean: f64,
    pub mc_std_err: f64,
}

/// Exact posteriors with δ summarized by Monte Carlo. The reported mean is the
/// exact one; the MC mean is kept in the diagnostics for comparison.
pub fn beta_conjugate_summary(data: &BinomialData, prior: &BetaPrior, draws: usize, seed: u64) -> Result<PosteriorSummary> {
    if draws < 2 {
        return Err(Error::InvalidInput("need at least 2 draws".into()));
    }
    let post = [
        prior.a0 + data.y0 as f64,
        prior.b0 + (data.n0 - data.y0) as f64,
        prior.a1 + data.y1 as f64,
        prior.b1 + (data.n1 - data.y1) as f64,
    ];
    let beta = |a: f64, b: f64| Beta::new(a, b).map_err(|e| Error::DomainError(format!("beta posterior: {e}")));
    let (d0, d1) = (beta(post[0], post[1])?, beta(post[2], post[3])?);
    let blocks = draws.div_ceil(BLOCK);
    let deltas: Vec<f64> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|blk| {
            let mut rng = StreamRng::new(seed, domain::BETA_DRAWS, blk as u64);
            let len = BLOCK.min(draws - blk * BLOCK);
            (0..len)
                .map(|_| {
                    let p0 = d0.sample(&mut rng);
                    let p1 = d1.sample(&mut rng);
                    p1 - p0
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let exact_mean = post[2] / (post[2] + post[3]) - post[0] / (post[0] + post[1]);
    let mc_mean = stats::mean(&deltas);
    let mc_std_err = (stats::variance(&deltas) / draws as f64).sqrt();
    let sorted = stats::sorted_copy(&deltas);
    Ok(PosteriorSummary {
        mean: exact_mean,
        median: stats::quantile_sorted(&sorted, 0.5),
        ci95: (stats::quantile_sorted(&sorted, 0.025), stats::quantile_sorted(&sorted, 0.975)),
        method: SummaryMethod::BetaExact,
        diagnostics: SummaryDiagnostics::BetaExact(BetaDiagnostics {
            draws,
            seed,
            posterior: post,
            exact_mean,
            mc_mean,
            mc_std_err,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_abs_diff_eq;

    fn diag(s: &PosteriorSummary) -> &BetaDiagnostics {
        match &s.diagnostics {
            SummaryDiagnostics::BetaExact(d) => d,
            _ => unreachable!(),
        }
    }

    #[test]
    fn symmetric_case_has_zero_mean() {
        let d = BinomialData::new(1, 2, 1, 2).unwrap();
        let s = beta_conjugate_summary(&d, &BetaPrior::new(1.0, 1.0, 1.0, 1.0).unwrap(), 20_000, 3).unwrap();
        assert_eq!(s.mean, 0.0);
        assert!(diag(&s).mc_mean.abs() < 4.0 * diag(&s).mc_std_err);
    }

    #[test]
    fn figure_data_exact_mean() {
        let s = beta_conjugate_summary(&presets::binomial_figure_data(), &presets::beta_prior(), 100_000, 11).unwrap();
        assert_abs_diff_eq!(s.mean, 79.81 / 110.49 - 45.66 / 87.54, epsilon = 1e-14);
        let dg = diag(&s);
        assert!((dg.mc_mean - dg.exact_mean).abs() < 3.0 * dg.mc_std_err);
        assert!(s.ci95.0 < s.median && s.median < s.ci95.1);
    }

    #[test]
    fn deterministic_and_partial_block() {
        let d = presets::binomial_figure_data();
        let p = presets::beta_prior();
        let a = beta_conjugate_summary(&d, &p, 5000, 9).unwrap();
        let b = beta_conjugate_summary(&d, &p, 5000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(diag(&a).draws, 5000);
    }
}
