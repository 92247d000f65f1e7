//! Discrepant posterior analysis for Gaussian-conjugate and two-arm Binomial models.
//!
//! A posterior estimate of a marginal `η = λᵀθ` is *discrepant* when it falls
//! strictly outside the interval spanned by the prior and likelihood estimates.
//! The crate provides exact criteria for Gaussian models ([`gauss_dpp`]),
//! Monte-Carlo occurrence probabilities and direction geometry ([`dpp_mc`]),
//! Binomial posterior modes and summaries ([`binom_dpp`]) and the link with
//! Simpson's paradox ([`simpson_bridge`]).

pub mod binom_dpp;
pub mod dpp_mc;
pub mod error;
pub mod gauss_dpp;
pub mod instances;
pub mod presets;
pub mod rng;
pub mod simpson_bridge;
pub mod stats;
pub mod symlin;

pub use error::{Error, Result};
pub use gauss_dpp::{Direction, DppVerdict, GaussianBelief};
pub use symlin::{SymMatrix, Vector};
