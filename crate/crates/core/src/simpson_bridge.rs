//! Aggregating two conditional means against shared or distinct weights, and
//! the identity between the incoherent case and the Gaussian posterior
//! contrast.
//!
//! Each variable `T_i` has conditional means `μ_iᵖⁱ` and `μ_iᴸ`. Coherent
//! aggregation mixes both with the same weight `w`; incoherent aggregation uses
//! `w^s` for the first and `w^σ` for the second.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss_dpp::{boundary_eps, dpp_check, DppVerdict, GaussianBelief, Direction, DIAGONAL_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationProblem {
    /// `(μ₁ᵖⁱ, μ₁ᴸ)`.
    pub mu1: (f64, f64),
    /// `(μ₂ᵖⁱ, μ₂ᴸ)`.
    pub mu2: (f64, f64),
    #[serde(default)]
    pub w: Option<f64>,
    #[serde(default)]
    pub w1: Option<f64>,
    #[serde(default)]
    pub w2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpsonVerdict {
    pub contrast: f64,
    pub lower: f64,
    pub upper: f64,
    pub paradox: bool,
}

fn check_weight(name: &str, w: Option<f64>) -> Result<f64> {
    match w {
        Some(w) if (0.0..=1.0).contains(&w) => Ok(w),
        Some(w) => Err(Error::DomainError(format!("weight {name} = {w} outside [0, 1]"))),
        None => Err(Error::InvalidInput(format!("weight {name} is required"))),
    }
}

fn check_means(prob: &AggregationProblem) -> Result<()> {
    let all = [prob.mu1.0, prob.mu1.1, prob.mu2.0, prob.mu2.1];
    if all.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("conditional means"));
    }
    Ok(())
}

fn verdict(prob: &AggregationProblem, w1: f64, w2: f64) -> SimpsonVerdict {
    let (m1p, m1l) = prob.mu1;
    let (m2p, m2l) = prob.mu2;
    let contrast = (w1 * m1p + (1.0 - w1) * m1l) - (w2 * m2p + (1.0 - w2) * m2l);
    let prior_contrast = m1p - m2p;
    let lik_contrast = m1l - m2l;
    let lower = prior_contrast.min(lik_contrast);
    let upper = prior_contrast.max(lik_contrast);
    let eps = boundary_eps(prior_contrast, lik_contrast, contrast);
    SimpsonVerdict {
        contrast,
        lower,
        upper,
        paradox: contrast < lower - eps || contrast > upper + eps,
    }
}

/// Shared weight `w` on both variables; never out of range.
pub fn coherent_contrast(prob: &AggregationProblem) -> Result<SimpsonVerdict> {
    check_means(prob)?;
    let w = check_weight("w", prob.w)?;
    let v = verdict(prob, w, w);
    debug_assert!(!v.paradox, "coherent aggregation left the conditional range");
    Ok(v)
}

/// Distinct weights `w1` and `w2`.
pub fn incoherent_contrast(prob: &AggregationProblem) -> Result<SimpsonVerdict> {
    check_means(prob)?;
    let w1 = check_weight("w1", prob.w1)?;
    let w2 = check_weight("w2", prob.w2)?;
    Ok(verdict(prob, w1, w2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpsonEquivalence {
    pub w1: f64,
    pub w2: f64,
    pub simpson: SimpsonVerdict,
    pub dpp: DppVerdict,
    /// `|incoherent contrast − λᵀμᵖ|` with `λ = (1, −1)`.
    pub contrast_gap: f64,
    pub equivalent: bool,
}

/// For diagonal two-dimensional covariances the posterior contrast is the
/// incoherent aggregate with the per-coordinate prior weights, so the paradox
/// flag and the DPP verdict coincide.
pub fn dpp_simpson_equivalence(prior: &GaussianBelief, lik: &GaussianBelief) -> Result<SimpsonEquivalence> {
    if prior.dim() != 2 || lik.dim() != 2 {
        return Err(Error::UnsupportedShape("equivalence needs dimension 2".into()));
    }
    for m in [prior.cov(), lik.cov()] {
        if m.get(0, 1).abs() > DIAGONAL_TOLERANCE {
            return Err(Error::UnsupportedShape("equivalence needs diagonal covariances".into()));
        }
    }
    let weight = |j: usize| {
        let pp = 1.0 / prior.cov().get(j, j);
        let lp = 1.0 / lik.cov().get(j, j);
        pp / (pp + lp)
    };
    let (w1, w2) = (weight(0), weight(1));
    let prob = AggregationProblem {
        mu1: (prior.mean()[0], lik.mean()[0]),
        mu2: (prior.mean()[1], lik.mean()[1]),
        w: None,
        w1: Some(w1),
        w2: Some(w2),
    };
    let simpson = incoherent_contrast(&prob)?;
    let dpp = dpp_check(prior, lik, &Direction::from_slice(&[1.0, -1.0])?)?;
    let contrast_gap = (simpson.contrast - dpp.posterior_margin).abs();
    let equivalent = dpp.boundary || simpson.paradox == dpp.occurs;
    Ok(SimpsonEquivalence {
        w1,
        w2,
        simpson,
        dpp,
        contrast_gap,
        equivalent,
    })
}
