//! Sample summaries and multi-chain convergence diagnostics.

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Linear-interpolation quantile of ascending `sorted` (the common "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn split_halves<'a>(chains: &[&'a [f64]]) -> Vec<&'a [f64]> {
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0) / 2;
    chains
        .iter()
        .flat_map(|c| [&c[..n], &c[n..2 * n]])
        .collect()
}

/// Split potential scale reduction factor.
pub fn split_rhat(chains: &[&[f64]]) -> f64 {
    let halves = split_halves(chains);
    let n = halves[0].len() as f64;
    let means: Vec<f64> = halves.iter().map(|c| mean(c)).collect();
    let w = halves.iter().map(|c| variance(c)).sum::<f64>() / halves.len() as f64;
    let b = n * variance(&means);
    if w == 0.0 {
        return if b == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    (var_plus / w).sqrt()
}

fn autocovariance(xs: &[f64], lag: usize) -> f64 {
    let m = mean(xs);
    let n = xs.len();
    (0..n - lag).map(|t| (xs[t] - m) * (xs[t + lag] - m)).sum::<f64>() / n as f64
}

/// Multi-chain effective sample size with Geyer's initial positive sequence
/// on the split chains.
pub fn effective_sample_size(chains: &[&[f64]]) -> f64 {
    let halves = split_halves(chains);
    let m = halves.len() as f64;
    let n = halves[0].len();
    let nf = n as f64;
    let means: Vec<f64> = halves.iter().map(|c| mean(c)).collect();
    let w = halves.iter().map(|c| variance(c)).sum::<f64>() / m;
    let b_over_n = variance(&means);
    let var_plus = (nf - 1.0) / nf * w + b_over_n;
    if var_plus == 0.0 {
        return m * nf;
    }
    let rho = |lag: usize| -> f64 {
        let acov = halves.iter().map(|c| autocovariance(c, lag)).sum::<f64>() / m;
        1.0 - (w - acov) / var_plus
    };
    let mut tau = -1.0;
    let mut lag = 0;
    let mut prev_pair = f64::INFINITY;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        // Monotone sequence estimator.
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        lag += 2;
    }
    (m * nf / tau.max(1e-12)).min(m * nf * (m * nf).log10().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert!((quantile_sorted(&s, 1.0 / 3.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_on_independent_draws() {
        let chains: Vec<Vec<f64>> = (0..4)
            .map(|c| {
                let mut rng = StreamRng::new(5, 99, c);
                let mut v = vec![0.0; 4000];
                rng.fill_normal(&mut v);
                v
            })
            .collect();
        let refs: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        assert!((split_rhat(&refs) - 1.0).abs() < 0.01);
        let ess = effective_sample_size(&refs);
        assert!(ess > 12_000.0 && ess < 20_000.0, "{ess}");
    }

    #[test]
    fn diagnostics_flag_shifted_chains() {
        let chains: Vec<Vec<f64>> = (0..4)
            .map(|c| {
                let mut rng = StreamRng::new(5, 99, c);
                let mut v = vec![0.0; 2000];
                rng.fill_normal(&mut v);
                v.iter().map(|x| x + c as f64).collect()
            })
            .collect();
        let refs: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        assert!(split_rhat(&refs) > 1.3);
    }

    #[test]
    fn ess_of_autocorrelated_chain_is_small() {
        let chains: Vec<Vec<f64>> = (0..2)
            .map(|c| {
                let mut rng = StreamRng::new(8, 99, c);
                let mut x = 0.0;
                (0..10_000)
                    .map(|_| {
                        x = 0.95 * x + rng.normal_pair().0;
                        x
                    })
                    .collect()
            })
            .collect();
        let refs: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        let ess = effective_sample_size(&refs);
        // AR(1) with φ = 0.95 has ESS ≈ N(1−φ)/(1+φ) ≈ 513.
        assert!(ess > 300.0 && ess < 800.0, "{ess}");
    }
}
