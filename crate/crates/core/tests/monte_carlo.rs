use dpp_core::dpp_mc::*;
use dpp_core::gauss_dpp::GaussianBelief;
use dpp_core::{presets, Direction, SymMatrix, Vector};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn setup(n: u64) -> (TrueModel, GaussianBelief, SamplingSpec, Direction) {
    let lam = SymMatrix::from_rows(vec![vec![1.0, 0.6], vec![0.6, 2.0]]).unwrap();
    let mu = Vector::new(vec![0.3, -0.2]).unwrap();
    let model = TrueModel::new(mu, lam.clone(), n).unwrap();
    let prior = GaussianBelief::prior(Vector::new(vec![0.0, 0.5]).unwrap(), SymMatrix::diagonal(&[0.5, 3.0]).unwrap()).unwrap();
    (model, prior, SamplingSpec::new(lam, n).unwrap(), Direction::from_slice(&[1.0, -1.0]).unwrap())
}

#[test]
fn probability_estimate_is_thread_invariant() {
    let (m, p, s, d) = setup(20);
    let runs: Vec<ProbEstimate> = [1, 4, 8]
        .iter()
        .map(|&t| in_pool(t, || simulate_dpp_probability(&m, &p, &s, &d, 50_000, 5).unwrap()))
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    assert_eq!(runs[0].dpp_count, runs[0].bruteforce_count);
}

#[test]
fn degenerate_configuration_gives_zero_probability() {
    // Λ/n = 2Σᵖⁱ makes the two weights proportional in every direction.
    let n = 10;
    let prior_cov = SymMatrix::from_rows(vec![vec![1.0, 0.3], vec![0.3, 0.5]]).unwrap();
    let lam = prior_cov.scale(2.0 * n as f64).unwrap();
    let prior = GaussianBelief::prior(Vector::new(vec![1.0, -1.0]).unwrap(), prior_cov).unwrap();
    let spec = SamplingSpec::new(lam.clone(), n).unwrap();
    let model = TrueModel::new(Vector::new(vec![0.0, 0.0]).unwrap(), lam, n).unwrap();
    let dir = Direction::from_slice(&[0.7, 0.2]).unwrap();
    let rep = degeneracy_check(&prior, &spec, &dir).unwrap();
    assert!(rep.degenerate && rep.globally_degenerate);
    let est = simulate_dpp_probability(&model, &prior, &spec, &dir, 100_000, 1).unwrap();
    assert_eq!(est.p_hat, 0.0);
}

#[test]
fn dpp_vanishes_with_sample_size() {
    for (name, cfg) in presets::figure2_configs(20_000, 3) {
        let table = figure2_harness(&cfg).unwrap();
        let rates: Vec<f64> = table.cells.iter().map(|c| c.dpp_count as f64 / c.reps as f64).collect();
        for c in &table.cells {
            assert_eq!(c.agreement_rate, 1.0, "{name}");
        }
        assert!(rates[0] > rates[1] && rates[1] > rates[2], "{name}: {rates:?}");
    }
}

#[test]
fn harness_is_thread_invariant() {
    let (_, cfg) = presets::figure2_configs(500, 9).remove(0);
    let a = in_pool(1, || figure2_harness(&cfg).unwrap());
    let b = in_pool(8, || figure2_harness(&cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn cone_fraction_matches_sampling() {
    let (prior, lik) = (presets::figure3_prior(), presets::figure3_likelihood());
    let post = dpp_core::gauss_dpp::posterior_update(&prior, &lik).unwrap();
    let cone = dpp_direction_cone(prior.mean(), lik.mean(), post.mean()).unwrap();
    let f = cone_fraction_by_sampling(&cone, 200_000, 4).unwrap();
    assert!((f - cone.dpp_fraction).abs() < 0.005);
}
