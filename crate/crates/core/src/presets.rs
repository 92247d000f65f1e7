//! Worked instances used by the examples, the CLI presets and the tests.

use crate::binom_dpp::{BetaPrior, BinomialData, PairGaussianPrior};
use crate::dpp_mc::Fig2Config;
use crate::gauss_dpp::{Direction, GaussianBelief};
use crate::symlin::{SymMatrix, Vector};

fn diag_belief(mean: [f64; 2], diag: [f64; 2], prior: bool) -> GaussianBelief {
    let mean = Vector::new(mean.to_vec()).expect("finite");
    let cov = SymMatrix::diagonal(&diag).expect("finite");
    if prior {
        GaussianBelief::prior(mean, cov).expect("SPD")
    } else {
        GaussianBelief::likelihood(mean, cov).expect("SPD")
    }
}

/// Placebo/drug prior of the two-dimensional geometry example.
pub fn figure3_prior() -> GaussianBelief {
    diag_belief([0.25, 0.45], [3.0, 9.0], true)
}

pub fn figure3_likelihood() -> GaussianBelief {
    diag_belief([1.10, 1.15], [7.0, 3.0], false)
}

/// Drug minus placebo.
pub fn figure3_direction() -> Direction {
    Direction::from_slice(&[-1.0, 1.0]).expect("nonzero")
}

/// Prior offset `θ − μᵖⁱ` shared by the four simulation configurations.
pub const FIGURE2_PRIOR_OFFSET: [f64; 2] = [-0.25, 0.0];
pub const FIGURE2_SAMPLE_SIZES: [u64; 3] = [3, 30, 300];
pub const FIGURE2_LAMBDA: [f64; 2] = [1.0, -1.0];

/// The four simulation configurations: correlated and diagonal covariances,
/// each at `θ = (−1, 1)` and `θ = (0, 0)`.
pub fn figure2_configs(reps: u64, seed: u64) -> Vec<(String, Fig2Config)> {
    let corr_lambda = SymMatrix::from_rows(vec![vec![7.0, 2.0], vec![2.0, 1.0]]).expect("symmetric");
    let corr_prior = SymMatrix::from_rows(vec![vec![5.0, 4.0], vec![4.0, 4.0]]).expect("symmetric");
    let diag_lambda = SymMatrix::diagonal(&[7.0, 1.0]).expect("finite");
    let diag_prior = SymMatrix::diagonal(&[5.0, 4.0]).expect("finite");
    let cases = [
        ("correlated_theta_m1_1", [-1.0, 1.0], &corr_lambda, &corr_prior),
        ("correlated_theta_0_0", [0.0, 0.0], &corr_lambda, &corr_prior),
        ("diagonal_theta_m1_1", [-1.0, 1.0], &diag_lambda, &diag_prior),
        ("diagonal_theta_0_0", [0.0, 0.0], &diag_lambda, &diag_prior),
    ];
    cases
        .iter()
        .map(|(name, theta, lambda_cov, prior_cov)| {
            let mu_pi = [theta[0] - FIGURE2_PRIOR_OFFSET[0], theta[1] - FIGURE2_PRIOR_OFFSET[1]];
            let cfg = Fig2Config {
                theta_true: Vector::new(theta.to_vec()).expect("finite"),
                lambda_cov: (*lambda_cov).clone(),
                prior: GaussianBelief::prior(Vector::new(mu_pi.to_vec()).expect("finite"), (*prior_cov).clone())
                    .expect("SPD"),
                direction: Direction::from_slice(&FIGURE2_LAMBDA).expect("nonzero"),
                sample_sizes: FIGURE2_SAMPLE_SIZES.to_vec(),
                reps,
                seed,
            };
            (name.to_string(), cfg)
        })
        .collect()
}

/// Control and treatment counts of the Binomial illustration.
pub fn binomial_figure_data() -> BinomialData {
    BinomialData::new(31, 68, 33, 59).expect("valid counts")
}

/// Beta hyperparameters `a`, `b` for (control, treatment).
pub const BETA_A: [f64; 2] = [14.66, 46.81];
pub const BETA_B: [f64; 2] = [4.88, 4.68];

pub fn beta_prior() -> BetaPrior {
    BetaPrior::new(BETA_A[0], BETA_B[0], BETA_A[1], BETA_B[1]).expect("positive")
}

pub fn beta_means() -> [f64; 2] {
    [BETA_A[0] / (BETA_A[0] + BETA_B[0]), BETA_A[1] / (BETA_A[1] + BETA_B[1])]
}

/// Beta-moment standard deviations (variance `ab/((a+b)²(a+b+1))`).
pub fn beta_sds() -> [f64; 2] {
    let sd = |a: f64, b: f64| (a * b / ((a + b).powi(2) * (a + b + 1.0))).sqrt();
    [sd(BETA_A[0], BETA_B[0]), sd(BETA_A[1], BETA_B[1])]
}

/// Marginal standard deviations of the wide variant.
pub const WIDE_SD: [f64; 2] = [0.5, 0.5];

pub const TABLE1_RHOS: [f64; 7] = [-0.95, -0.8, -0.2, 0.0, 0.2, 0.8, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceFamily {
    /// Beta-moment variances.
    A,
    /// Standard deviations 0.5.
    B,
}

impl VarianceFamily {
    pub fn label(self) -> &'static str {
        match self {
            VarianceFamily::A => "A",
            VarianceFamily::B => "B",
        }
    }

    pub fn sds(self) -> [f64; 2] {
        match self {
            VarianceFamily::A => beta_sds(),
            VarianceFamily::B => WIDE_SD,
        }
    }
}

pub fn gauss_pair_prior(family: VarianceFamily, rho: f64) -> PairGaussianPrior {
    PairGaussianPrior::new(beta_means(), family.sds(), rho).expect("valid prior")
}

/// Printed summaries `(mean, median, lo, hi)` of the fourteen Gaussian rows,
/// keyed by family and correlation. Used only for reporting deviations.
pub const TABLE1_GAUSS_PRINTED: [(VarianceFamily, f64, [f64; 4]); 14] = [
    (VarianceFamily::A, 0.0, [0.314, 0.315, 0.195, 0.427]),
    (VarianceFamily::A, 0.2, [0.325, 0.325, 0.213, 0.445]),
    (VarianceFamily::A, -0.2, [0.308, 0.310, 0.189, 0.420]),
    (VarianceFamily::A, 0.8, [0.381, 0.381, 0.296, 0.460]),
    (VarianceFamily::A, -0.8, [0.250, 0.247, 0.153, 0.357]),
    (VarianceFamily::A, 0.95, [0.403, 0.402, 0.345, 0.463]),
    (VarianceFamily::A, -0.95, [0.200, 0.203, 0.121, 0.276]),
    (VarianceFamily::B, 0.0, [0.094, 0.097, -0.064, 0.248]),
    (VarianceFamily::B, 0.2, [0.096, 0.092, -0.061, 0.265]),
    (VarianceFamily::B, -0.2, [0.092, 0.093, -0.082, 0.249]),
    (VarianceFamily::B, 0.8, [0.098, 0.097, -0.059, 0.254]),
    (VarianceFamily::B, -0.8, [0.099, 0.102, -0.069, 0.250]),
    (VarianceFamily::B, 0.95, [0.105, 0.106, -0.035, 0.242]),
    (VarianceFamily::B, -0.95, [0.119, 0.120, -0.047, 0.282]),
];

/// Printed `(mean, median, lo, hi)` of the independent conjugate row.
pub const TABLE1_CONJUGATE_PRINTED: [f64; 4] = [0.237, 0.240, 0.094, 0.382];

/// Printed `(mean, lo, hi)` of the flexible-prior rows, in table order.
pub const TABLE2_PRINTED: [[f64; 3]; 4] = [
    [0.388, 0.297, 0.458],
    [0.103, -0.065, 0.250],
    [0.096, -0.068, 0.274],
    [0.117, -0.032, 0.255],
];
