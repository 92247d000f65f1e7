//! Exact DPP analysis for a Gaussian prior and a Gaussian (exponential-quadratic)
//! likelihood summary.
//!
//! With `d = μᴸ − μᵖⁱ` the two diagnostics are
//! `Δ1 = λᵀΣᵖ(Σᴸ)⁻¹d` (posterior minus prior margin) and
//! `Δ2 = λᵀΣᵖ(Σᵖⁱ)⁻¹d` (likelihood minus posterior margin).
//! The posterior margin is discrepant exactly when they have opposite signs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symlin::{cholesky, same_dim, spd_inverse, SymMatrix, Vector};

/// Off-diagonal magnitude above which a covariance is not treated as diagonal.
pub const DIAGONAL_TOLERANCE: f64 = 1e-14;
/// Relative gap under which two variances count as equal.
pub const HOMOGENEITY_TOLERANCE: f64 = 1e-12;

/// Scale-aware zero threshold for the discrepancy products.
pub fn boundary_eps(prior_margin: f64, likelihood_margin: f64, posterior_margin: f64) -> f64 {
    1e-12 * (prior_margin.abs() + likelihood_margin.abs() + posterior_margin.abs() + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefRole {
    Prior,
    LikelihoodSummary,
    Posterior,
}

/// A Gaussian `N(mean, cov)` with SPD covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBelief")]
pub struct GaussianBelief {
    mean: Vector,
    cov: SymMatrix,
    role: BeliefRole,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBelief {
    mean: Vector,
    cov: SymMatrix,
    role: BeliefRole,
}

impl TryFrom<RawBelief> for GaussianBelief {
    type Error = Error;

    fn try_from(raw: RawBelief) -> Result<Self> {
        GaussianBelief::new(raw.mean, raw.cov, raw.role)
    }
}

impl GaussianBelief {
    pub fn new(mean: Vector, cov: SymMatrix, role: BeliefRole) -> Result<Self> {
        same_dim(cov.dim(), mean.dim())?;
        cholesky(&cov)?;
        Ok(GaussianBelief { mean, cov, role })
    }

    pub fn prior(mean: Vector, cov: SymMatrix) -> Result<Self> {
        Self::new(mean, cov, BeliefRole::Prior)
    }

    pub fn likelihood(mean: Vector, cov: SymMatrix) -> Result<Self> {
        Self::new(mean, cov, BeliefRole::LikelihoodSummary)
    }

    /// Likelihood summary of `n` i.i.d. draws with known covariance `Λ`:
    /// `N(ȳ, Λ/n)`.
    pub fn from_sample_mean(ybar: Vector, lambda_cov: &SymMatrix, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be positive".into()));
        }
        Self::likelihood(ybar, lambda_cov.scale(1.0 / n as f64)?)
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn cov(&self) -> &SymMatrix {
        &self.cov
    }

    pub fn role(&self) -> BeliefRole {
        self.role
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    pub fn with_role(mut self, role: BeliefRole) -> Self {
        self.role = role;
        self
    }
}

/// A nonzero marginal direction `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vector", into = "Vector")]
pub struct Direction {
    lambda: Vector,
}

impl Direction {
    pub fn new(lambda: Vector) -> Result<Self> {
        if lambda.as_slice().iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroDirection);
        }
        Ok(Direction { lambda })
    }

    pub fn from_slice(lambda: &[f64]) -> Result<Self> {
        Self::new(Vector::new(lambda.to_vec())?)
    }

    pub fn lambda(&self) -> &Vector {
        &self.lambda
    }

    pub fn dim(&self) -> usize {
        self.lambda.dim()
    }

    /// `λᵀx`.
    pub fn margin(&self, x: &Vector) -> Result<f64> {
        self.lambda.dot(x)
    }
}

impl TryFrom<Vector> for Direction {
    type Error = Error;

    fn try_from(v: Vector) -> Result<Self> {
        Direction::new(v)
    }
}

impl From<Direction> for Vector {
    fn from(d: Direction) -> Self {
        d.lambda
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DppVerdict {
    pub delta1: f64,
    pub delta2: f64,
    pub prior_margin: f64,
    pub likelihood_margin: f64,
    pub posterior_margin: f64,
    pub occurs: bool,
    pub boundary: bool,
}

impl DppVerdict {
    /// Definition-style product `(ηᵖ − ηᵖⁱ)(ηᵖ − ηᴸ)`.
    pub fn margin_product(&self) -> f64 {
        (self.posterior_margin - self.prior_margin) * (self.posterior_margin - self.likelihood_margin)
    }

    pub fn eps(&self) -> f64 {
        boundary_eps(self.prior_margin, self.likelihood_margin, self.posterior_margin)
    }
}

fn check_pair(prior: &GaussianBelief, lik: &GaussianBelief) -> Result<()> {
    same_dim(prior.dim(), lik.dim())
}

/// Conjugate update: `Σᵖ = (Σᵖⁱ⁻¹ + Σᴸ⁻¹)⁻¹` and `μᵖ = Σᵖ(Σᵖⁱ⁻¹μᵖⁱ + Σᴸ⁻¹μᴸ)`.
pub fn posterior_update(prior: &GaussianBelief, lik: &GaussianBelief) -> Result<GaussianBelief> {
    check_pair(prior, lik)?;
    let prior_prec = spd_inverse(&prior.cov)?;
    let lik_prec = spd_inverse(&lik.cov)?;
    let post_prec = prior_prec.add(&lik_prec)?;
    let cov = spd_inverse(&post_prec)?;
    let info = prior_prec
        .mul_vec(&prior.mean)?
        .add(&lik_prec.mul_vec(&lik.mean)?)?;
    let mean = cov.mul_vec(&info)?;
    GaussianBelief::new(mean, cov, BeliefRole::Posterior)
}

/// Sign test on `Δ1` and `Δ2`.
pub fn dpp_check(prior: &GaussianBelief, lik: &GaussianBelief, dir: &Direction) -> Result<DppVerdict> {
    check_pair(prior, lik)?;
    same_dim(prior.dim(), dir.dim())?;
    let post = posterior_update(prior, lik)?;
    let d = lik.mean.sub(&prior.mean)?;
    let sp_lambda = post.cov.mul_vec(&dir.lambda)?;
    let delta1 = sp_lambda.dot(&cholesky(&lik.cov)?.solve(&d)?)?;
    let delta2 = sp_lambda.dot(&cholesky(&prior.cov)?.solve(&d)?)?;

    let prior_margin = dir.margin(&prior.mean)?;
    let likelihood_margin = dir.margin(&lik.mean)?;
    let posterior_margin = dir.margin(&post.mean)?;
    let eps = boundary_eps(prior_margin, likelihood_margin, posterior_margin);
    let product = delta1 * delta2;
    Ok(DppVerdict {
        delta1,
        delta2,
        prior_margin,
        likelihood_margin,
        posterior_margin,
        occurs: product < -eps,
        boundary: product.abs() <= eps,
    })
}

/// Direct evaluation of the definition on the three margins.
pub fn dpp_check_bruteforce(
    prior: &GaussianBelief,
    lik: &GaussianBelief,
    dir: &Direction,
) -> Result<bool> {
    Ok(definition_product(prior, lik, dir)?.0)
}

/// Returns `(occurs, product, eps)` for the definition product.
pub fn definition_product(
    prior: &GaussianBelief,
    lik: &GaussianBelief,
    dir: &Direction,
) -> Result<(bool, f64, f64)> {
    check_pair(prior, lik)?;
    same_dim(prior.dim(), dir.dim())?;
    let post = posterior_update(prior, lik)?;
    let ep = dir.margin(&prior.mean)?;
    let el = dir.margin(&lik.mean)?;
    let epost = dir.margin(&post.mean)?;
    let product = (epost - ep) * (epost - el);
    let eps = boundary_eps(ep, el, epost);
    Ok((product > eps, product, eps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalCaseTerms {
    pub omegas: Vec<f64>,
    pub delta1: f64,
    pub delta2: f64,
}

impl DiagonalCaseTerms {
    pub fn occurs(&self) -> bool {
        self.delta1 * self.delta2 < 0.0
    }
}

fn check_diagonal(m: &SymMatrix) -> Result<()> {
    for i in 0..m.dim() {
        for j in 0..i {
            let value = m.get(i, j);
            if value.abs() > DIAGONAL_TOLERANCE {
                return Err(Error::NotDiagonal { row: i, col: j, value });
            }
        }
    }
    Ok(())
}

/// Closed form for diagonal covariances, with prior weights
/// `ω_j = σ⁻²_{πj} / (σ⁻²_{πj} + σ⁻²_{Lj})`.
pub fn diagonal_terms(
    prior: &GaussianBelief,
    lik: &GaussianBelief,
    dir: &Direction,
) -> Result<DiagonalCaseTerms> {
    check_pair(prior, lik)?;
    same_dim(prior.dim(), dir.dim())?;
    check_diagonal(&prior.cov)?;
    check_diagonal(&lik.cov)?;
    let mut omegas = Vec::with_capacity(prior.dim());
    let (mut delta1, mut delta2) = (0.0, 0.0);
    for j in 0..prior.dim() {
        let pp = 1.0 / prior.cov.get(j, j);
        let lp = 1.0 / lik.cov.get(j, j);
        let omega = pp / (pp + lp);
        let diff = lik.mean[j] - prior.mean[j];
        delta1 += dir.lambda[j] * (1.0 - omega) * diff;
        delta2 += dir.lambda[j] * omega * diff;
        omegas.push(omega);
    }
    Ok(DiagonalCaseTerms {
        omegas,
        delta1,
        delta2,
    })
}

/// `σ²[(1−r)I + r·11ᵀ]`, rejected unless `r ∈ (−1/(d−1), 1)`.
pub fn equicorrelation(dim: usize, variance: f64, r: f64) -> Result<SymMatrix> {
    let lower = if dim > 1 { -1.0 / (dim as f64 - 1.0) } else { f64::NEG_INFINITY };
    if !(r > lower && r < 1.0) {
        return Err(Error::InvalidCorrelation { value: r, lower, dim });
    }
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::DomainError(format!("variance must be positive, got {variance}")));
    }
    SymMatrix::from_fn(dim, |i, j| variance * if i == j { 1.0 } else { r })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquicorrCaseTerms {
    pub w: f64,
    pub c: f64,
    pub d1: f64,
    pub d2: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl EquicorrCaseTerms {
    pub fn occurs(&self) -> bool {
        self.delta1 * self.delta2 < 0.0
    }
}

/// Closed form for equicorrelated prior `σπ²[(1−r)I + r11ᵀ]` and likelihood
/// `σL²[(1−ρ)I + ρ11ᵀ]`.
pub fn equicorr_terms(
    prior_var: f64,
    r: f64,
    lik_var: f64,
    rho: f64,
    mu_pi: &Vector,
    mu_l: &Vector,
    dir: &Direction,
) -> Result<EquicorrCaseTerms> {
    let d = mu_pi.dim();
    same_dim(d, mu_l.dim())?;
    same_dim(d, dir.dim())?;
    // Validation through the matrix builders.
    equicorrelation(d, prior_var, r)?;
    equicorrelation(d, lik_var, rho)?;
    let df = d as f64;
    let (sp, sl) = (prior_var, lik_var);
    let perp = sp * (1.0 - r) + sl * (1.0 - rho);
    let w = sp * (1.0 - r) / perp;
    let ones = sl * (rho * df + 1.0 - rho) + sp * (r * df + 1.0 - r);
    let c = sp * sl * (rho - r) / perp / ones;
    let diff = mu_l.sub(mu_pi)?;
    let d1 = dir.lambda.dot(&diff)?;
    let d2 = dir.lambda.sum() * diff.sum();
    Ok(EquicorrCaseTerms {
        w,
        c,
        d1,
        d2,
        delta1: w * d1 - c * d2,
        delta2: (1.0 - w) * d1 + c * d2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastRegime {
    /// Diagonal covariances with arbitrary variances.
    DiagonalHeterogeneous,
    /// Equal variances within prior and within likelihood, any correlations.
    HomogeneousVariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastCaseTerms {
    pub regime: ContrastRegime,
    /// Prior weight of the first coordinate.
    pub ws: f64,
    /// Prior weight of the second coordinate.
    pub wsigma: f64,
    pub delta_pi: f64,
    pub delta_l: f64,
    pub delta_star: f64,
    /// Interval ends after orienting so the second weight is the larger.
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    /// `(μ₁ᴸ−μ₁ᵖⁱ)/(μ₂ᴸ−μ₂ᵖⁱ)` in the oriented coordinates, when defined.
    pub ratio: Option<f64>,
    /// True when the coordinates were exchanged to orient the weights.
    pub swapped: bool,
    /// Convex weight of the prior contrast in the homogeneous regime.
    pub w_pi: Option<f64>,
    pub occurs: bool,
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= HOMOGENEITY_TOLERANCE * a.abs().max(b.abs())
}

fn is_diagonal(m: &SymMatrix) -> bool {
    check_diagonal(m).is_ok()
}

/// Two-coordinate contrast `θ₁ − θ₂`: interval criterion for diagonal
/// covariances and the convex-weight form for homogeneous variances.
pub fn contrast_analysis(prior: &GaussianBelief, lik: &GaussianBelief) -> Result<ContrastCaseTerms> {
    check_pair(prior, lik)?;
    if prior.dim() != 2 {
        return Err(Error::UnsupportedShape(format!(
            "contrast analysis needs dimension 2, got {}",
            prior.dim()
        )));
    }
    let (mp, ml) = (prior.mean.as_slice(), lik.mean.as_slice());
    let delta_pi = mp[0] - mp[1];
    let delta_l = ml[0] - ml[1];

    if is_diagonal(&prior.cov) && is_diagonal(&lik.cov) {
        let weight = |j: usize| {
            let pp = 1.0 / prior.cov.get(j, j);
            let lp = 1.0 / lik.cov.get(j, j);
            pp / (pp + lp)
        };
        let (ws, wsigma) = (weight(0), weight(1));
        let delta_star = ws * mp[0] - wsigma * mp[1] + (1.0 - ws) * ml[0] - (1.0 - wsigma) * ml[1];
        let swapped = wsigma < ws;
        let (w1, w2, d1, d2) = if swapped {
            (wsigma, ws, ml[1] - mp[1], ml[0] - mp[0])
        } else {
            (ws, wsigma, ml[0] - mp[0], ml[1] - mp[1])
        };
        let lower_ratio = (1.0 - w2) / (1.0 - w1);
        let upper_ratio = w2 / w1;
        let ratio = if d2 != 0.0 { Some(d1 / d2) } else { None };
        let occurs = ratio.is_some_and(|q| q > lower_ratio && q < upper_ratio);
        return Ok(ContrastCaseTerms {
            regime: ContrastRegime::DiagonalHeterogeneous,
            ws,
            wsigma,
            delta_pi,
            delta_l,
            delta_star,
            lower_ratio,
            upper_ratio,
            ratio,
            swapped,
            w_pi: None,
            occurs,
        });
    }

    let (pc, lc) = (&prior.cov, &lik.cov);
    if nearly_equal(pc.get(0, 0), pc.get(1, 1)) && nearly_equal(lc.get(0, 0), lc.get(1, 1)) {
        // Contrast variances 2σπ²(1−r) and 2σL²(1−ρ).
        let prior_contrast_var = pc.get(0, 0) + pc.get(1, 1) - 2.0 * pc.get(0, 1);
        let lik_contrast_var = lc.get(0, 0) + lc.get(1, 1) - 2.0 * lc.get(0, 1);
        let w_pi = (1.0 / prior_contrast_var) / (1.0 / prior_contrast_var + 1.0 / lik_contrast_var);
        let delta_star = w_pi * delta_pi + (1.0 - w_pi) * delta_l;
        return Ok(ContrastCaseTerms {
            regime: ContrastRegime::HomogeneousVariance,
            ws: w_pi,
            wsigma: w_pi,
            delta_pi,
            delta_l,
            delta_star,
            lower_ratio: 1.0,
            upper_ratio: 1.0,
            ratio: None,
            swapped: false,
            w_pi: Some(w_pi),
            occurs: false,
        });
    }

    Err(Error::UnsupportedShape(
        "covariances are neither both diagonal nor homogeneous in variance".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryAngles {
    /// Slope angle of the segment from `μᴸ` to `μᵖ` (two dimensions only).
    pub alpha: Option<f64>,
    /// Slope angle of the segment from `μᵖⁱ` to `μᵖ` (two dimensions only).
    pub beta: Option<f64>,
    pub cos_theta_l: f64,
    pub cos_theta_pi: f64,
    pub occurs: bool,
    pub boundary: bool,
}

/// Angles between `λ` and the displacements `μᵖ − μᴸ`, `μᵖ − μᵖⁱ`.
pub fn geometry_angles(
    prior: &GaussianBelief,
    lik: &GaussianBelief,
    dir: &Direction,
) -> Result<GeometryAngles> {
    check_pair(prior, lik)?;
    same_dim(prior.dim(), dir.dim())?;
    let post = posterior_update(prior, lik)?;
    let u = post.mean.sub(&prior.mean)?;
    let v = post.mean.sub(&lik.mean)?;
    let scale = 1e-12 * prior.mean.norm().max(lik.mean.norm()).max(post.mean.norm()).max(1.0);
    if u.norm() <= scale {
        return Err(Error::DegenerateGeometry("posterior mean coincides with prior mean".into()));
    }
    if v.norm() <= scale {
        return Err(Error::DegenerateGeometry(
            "posterior mean coincides with likelihood mean".into(),
        ));
    }
    let lnorm = dir.lambda.norm();
    let cos_theta_l = (dir.lambda.dot(&v)? / (lnorm * v.norm())).clamp(-1.0, 1.0);
    let cos_theta_pi = (dir.lambda.dot(&u)? / (lnorm * u.norm())).clamp(-1.0, 1.0);
    let product = cos_theta_l * cos_theta_pi;
    let slope_angle = |w: &Vector| -> Option<f64> {
        if w.dim() == 2 && w[0] != 0.0 {
            Some((w[1] / w[0]).atan())
        } else {
            None
        }
    };
    Ok(GeometryAngles {
        alpha: slope_angle(&v),
        beta: slope_angle(&u),
        cos_theta_l,
        cos_theta_pi,
        occurs: product > 1e-12,
        boundary: product.abs() <= 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn belief(mean: &[f64], diag: &[f64], role: BeliefRole) -> GaussianBelief {
        GaussianBelief::new(
            Vector::new(mean.to_vec()).unwrap(),
            SymMatrix::diagonal(diag).unwrap(),
            role,
        )
        .unwrap()
    }

    #[test]
    fn figure3_posterior() {
        let (prior, lik) = (presets::figure3_prior(), presets::figure3_likelihood());
        let post = posterior_update(&prior, &lik).unwrap();
        assert_abs_diff_eq!(post.mean()[0], 0.505, epsilon = 1e-12);
        assert_abs_diff_eq!(post.mean()[1], 0.975, epsilon = 1e-12);
        assert_abs_diff_eq!(post.cov().get(0, 0), 2.1, epsilon = 1e-12);
        assert_abs_diff_eq!(post.cov().get(1, 1), 2.25, epsilon = 1e-12);
        assert_abs_diff_eq!(post.cov().get(0, 1), 0.0, epsilon = 1e-12);
        assert_eq!(post.role(), BeliefRole::Posterior);
    }

    #[test]
    fn figure3_verdict() {
        let v = dpp_check(
            &presets::figure3_prior(),
            &presets::figure3_likelihood(),
            &presets::figure3_direction(),
        )
        .unwrap();
        // Δ1 = ηᵖ − ηᵖⁱ and Δ2 = −(ηᵖ − ηᴸ) by direct arithmetic on the margins.
        assert_abs_diff_eq!(v.delta1, 0.47 - 0.20, epsilon = 1e-12);
        assert_abs_diff_eq!(v.delta2, -(0.47 - 0.05), epsilon = 1e-12);
        assert_abs_diff_eq!(v.prior_margin, 0.20, epsilon = 1e-12);
        assert_abs_diff_eq!(v.likelihood_margin, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(v.posterior_margin, 0.47, epsilon = 1e-12);
        assert!(v.occurs && !v.boundary);
        assert!(dpp_check_bruteforce(
            &presets::figure3_prior(),
            &presets::figure3_likelihood(),
            &presets::figure3_direction()
        )
        .unwrap());
    }

    #[test]
    fn symmetric_halving() {
        let a = belief(&[0.0, 0.0], &[1.0, 1.0], BeliefRole::Prior);
        let b = belief(&[0.0, 0.0], &[1.0, 1.0], BeliefRole::LikelihoodSummary);
        let post = posterior_update(&a, &b).unwrap();
        // Inversion goes through a Cholesky factor, so only rounding separates it from ½I.
        assert!(post.cov().max_abs_diff(&SymMatrix::diagonal(&[0.5, 0.5]).unwrap()).unwrap() < 1e-15);
        assert_eq!(post.mean().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn equal_means_are_boundary() {
        let a = belief(&[0.3, -0.2], &[1.0, 4.0], BeliefRole::Prior);
        let b = belief(&[0.3, -0.2], &[2.0, 0.5], BeliefRole::LikelihoodSummary);
        let v = dpp_check(&a, &b, &Direction::from_slice(&[1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(v.delta1, 0.0);
        assert_eq!(v.delta2, 0.0);
        assert!(!v.occurs && v.boundary);
    }

    #[test]
    fn one_dimension_never_discrepant() {
        for &(mp, vp, ml, vl) in &[(0.0, 1.0, 3.0, 0.1), (-2.0, 5.0, 1.0, 9.0), (1.0, 0.01, -1.0, 100.0)] {
            let a = belief(&[mp], &[vp], BeliefRole::Prior);
            let b = belief(&[ml], &[vl], BeliefRole::LikelihoodSummary);
            for lam in [1.0, -2.5] {
                let dir = Direction::from_slice(&[lam]).unwrap();
                assert!(!dpp_check(&a, &b, &dir).unwrap().occurs);
                assert!(!dpp_check_bruteforce(&a, &b, &dir).unwrap());
            }
        }
    }

    #[test]
    fn orthogonal_direction_gives_zero_product() {
        // μᵖ − μᵖⁱ and μᵖ − μᴸ both lie in the first two coordinates.
        let a = belief(&[0.0, 0.0, 5.0], &[1.0, 3.0, 2.0], BeliefRole::Prior);
        let b = belief(&[1.0, 2.0, 5.0], &[2.0, 1.0, 7.0], BeliefRole::LikelihoodSummary);
        let dir = Direction::from_slice(&[0.0, 0.0, 1.0]).unwrap();
        let (occurs, product, _) = definition_product(&a, &b, &dir).unwrap();
        assert!(!occurs);
        assert_eq!(product, 0.0);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(Direction::from_slice(&[0.0, 0.0]).unwrap_err(), Error::ZeroDirection);
        let bad = GaussianBelief::prior(
            Vector::new(vec![0.0, 0.0]).unwrap(),
            SymMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap(),
        );
        assert!(matches!(bad, Err(Error::NotSpd { .. })));
        let a = belief(&[0.0, 0.0], &[1.0, 1.0], BeliefRole::Prior);
        let b = belief(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], BeliefRole::LikelihoodSummary);
        assert!(matches!(posterior_update(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn belief_json_validates() {
        let ok: GaussianBelief = serde_json::from_str(
            r#"{"mean":[1.0,2.0],"cov":[[2.0,0.5],[0.5,1.0]],"role":"prior"}"#,
        )
        .unwrap();
        assert_eq!(ok.dim(), 2);
        let err = serde_json::from_str::<GaussianBelief>(
            r#"{"mean":[1.0,2.0],"cov":[[1.0,2.0],[2.0,1.0]],"role":"prior"}"#,
        );
        assert!(err.is_err());
        let extra = serde_json::from_str::<GaussianBelief>(
            r#"{"mean":[1.0],"cov":[[1.0]],"role":"prior","x":1}"#,
        );
        assert!(extra.is_err());
    }

    #[test]
    fn diagonal_terms_examples() {
        let t = diagonal_terms(
            &presets::figure3_prior(),
            &presets::figure3_likelihood(),
            &presets::figure3_direction(),
        )
        .unwrap();
        assert_abs_diff_eq!(t.omegas[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(t.omegas[1], 0.25, epsilon = 1e-15);
        assert!(t.occurs());

        // Same heterogeneity pattern: all ω equal.
        let a = belief(&[0.1, 0.7, -0.3], &[2.0, 6.0, 1.0], BeliefRole::Prior);
        let b = belief(&[1.0, -1.0, 0.4], &[1.0, 3.0, 0.5], BeliefRole::LikelihoodSummary);
        for lam in [[1.0, -1.0, 0.0], [0.3, 2.0, -5.0], [-1.0, -1.0, 1.0]] {
            let t = diagonal_terms(&a, &b, &Direction::from_slice(&lam).unwrap()).unwrap();
            assert!(t.delta1 * t.delta2 >= 0.0);
        }

        // A single coordinate is never discrepant.
        let b2 = belief(&[1.0, -1.0, 0.4], &[3.0, 0.2, 9.0], BeliefRole::LikelihoodSummary);
        let t = diagonal_terms(&a, &b2, &Direction::from_slice(&[2.0, 0.0, 0.0]).unwrap()).unwrap();
        let w = t.omegas[0];
        assert_abs_diff_eq!(t.delta1 * t.delta2, 4.0 * w * (1.0 - w) * 0.81, epsilon = 1e-14);

        let full = GaussianBelief::prior(
            Vector::new(vec![0.0, 0.0]).unwrap(),
            SymMatrix::from_rows(vec![vec![1.0, 0.1], vec![0.1, 1.0]]).unwrap(),
        )
        .unwrap();
        let lik = belief(&[1.0, 0.0], &[1.0, 1.0], BeliefRole::LikelihoodSummary);
        assert!(matches!(
            diagonal_terms(&full, &lik, &Direction::from_slice(&[1.0, 0.0]).unwrap()),
            Err(Error::NotDiagonal { .. })
        ));
    }

    #[test]
    fn equicorr_examples() {
        let mu_pi = Vector::new(vec![0.0, 0.0]).unwrap();
        let mu_l = Vector::new(vec![1.0, 2.0]).unwrap();
        let dir = Direction::from_slice(&[-2.0, 1.0]).unwrap();
        let t = equicorr_terms(1.0, 0.0, 1.0, 0.5, &mu_pi, &mu_l, &dir).unwrap();
        assert_eq!(t.d1, 0.0);
        assert_eq!(t.d2, -3.0);
        assert_abs_diff_eq!(t.delta1 * t.delta2, -t.c * t.c * 9.0, epsilon = 1e-15);
        assert!(t.occurs());
        let prior = GaussianBelief::prior(mu_pi.clone(), equicorrelation(2, 1.0, 0.0).unwrap()).unwrap();
        let lik = GaussianBelief::likelihood(mu_l.clone(), equicorrelation(2, 1.0, 0.5).unwrap()).unwrap();
        let v = dpp_check(&prior, &lik, &dir).unwrap();
        assert!(v.occurs);
        assert_abs_diff_eq!(v.delta1, t.delta1, epsilon = 1e-12);
        assert_abs_diff_eq!(v.delta2, t.delta2, epsilon = 1e-12);

        // Same correlation pattern.
        let t = equicorr_terms(2.0, 0.3, 0.5, 0.3, &mu_pi, &mu_l, &dir).unwrap();
        assert_eq!(t.c, 0.0);
        assert!(!t.occurs());

        // Contrast direction.
        let t = equicorr_terms(2.0, -0.3, 0.5, 0.6, &mu_pi, &mu_l, &Direction::from_slice(&[1.0, -1.0]).unwrap())
            .unwrap();
        assert_eq!(t.d2, 0.0);
        assert!(!t.occurs());

        let three = Vector::new(vec![0.0; 3]).unwrap();
        let err = equicorr_terms(1.0, -0.5, 1.0, 0.0, &three, &three, &Direction::from_slice(&[1.0, 0.0, 0.0]).unwrap());
        assert!(matches!(err, Err(Error::InvalidCorrelation { .. })));
    }

    #[test]
    fn contrast_examples() {
        let t = contrast_analysis(&presets::figure3_prior(), &presets::figure3_likelihood()).unwrap();
        assert_eq!(t.regime, ContrastRegime::DiagonalHeterogeneous);
        assert_abs_diff_eq!(t.ws, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(t.wsigma, 0.25, epsilon = 1e-15);
        assert!(t.swapped);
        assert_abs_diff_eq!(t.lower_ratio, 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(t.upper_ratio, 2.8, epsilon = 1e-14);
        assert_abs_diff_eq!(t.ratio.unwrap(), 0.70 / 0.85, epsilon = 1e-14);
        assert_abs_diff_eq!(t.delta_star, 0.505 - 0.975, epsilon = 1e-14);
        assert!(t.occurs);

        // Proportional covariances and equal contrasts.
        let a = belief(&[0.2, 0.5], &[2.0, 8.0], BeliefRole::Prior);
        let b = belief(&[1.0, 1.3], &[1.0, 4.0], BeliefRole::LikelihoodSummary);
        let t = contrast_analysis(&a, &b).unwrap();
        assert_abs_diff_eq!(t.ws, t.wsigma, epsilon = 1e-15);
        assert_abs_diff_eq!(t.delta_star, t.delta_l, epsilon = 1e-14);
        assert_abs_diff_eq!(t.delta_star, t.delta_pi, epsilon = 1e-14);
        assert!(!t.occurs);

        let hom_p = GaussianBelief::prior(
            Vector::new(vec![0.1, 0.9]).unwrap(),
            SymMatrix::from_rows(vec![vec![2.0, 1.5], vec![1.5, 2.0]]).unwrap(),
        )
        .unwrap();
        let hom_l = GaussianBelief::likelihood(
            Vector::new(vec![1.0, -0.4]).unwrap(),
            SymMatrix::from_rows(vec![vec![0.5, -0.2], vec![-0.2, 0.5]]).unwrap(),
        )
        .unwrap();
        let t = contrast_analysis(&hom_p, &hom_l).unwrap();
        assert_eq!(t.regime, ContrastRegime::HomogeneousVariance);
        assert!(!t.occurs);
        let post = posterior_update(&hom_p, &hom_l).unwrap();
        assert_abs_diff_eq!(t.delta_star, post.mean()[0] - post.mean()[1], epsilon = 1e-12);

        let mixed = GaussianBelief::prior(
            Vector::new(vec![0.0, 0.0]).unwrap(),
            SymMatrix::from_rows(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(),
        )
        .unwrap();
        assert!(matches!(contrast_analysis(&mixed, &hom_l), Err(Error::UnsupportedShape(_))));
    }

    #[test]
    fn figure3_angles() {
        let (prior, lik, dir) = (
            presets::figure3_prior(),
            presets::figure3_likelihood(),
            presets::figure3_direction(),
        );
        let g = geometry_angles(&prior, &lik, &dir).unwrap();
        assert_abs_diff_eq!(g.alpha.unwrap().tan(), (0.25 / 0.7) * (0.70 / 0.85), epsilon = 1e-12);
        assert_abs_diff_eq!(g.beta.unwrap().tan(), (0.75 / 0.3) * (0.70 / 0.85), epsilon = 1e-12);
        assert!(g.alpha.unwrap().tan() < 1.0 && 1.0 < g.beta.unwrap().tan());
        assert!(g.cos_theta_l > 0.0 && g.cos_theta_pi > 0.0);
        assert!(g.occurs);

        // λ orthogonal to μᵖ − μᵖⁱ = (0.255, 0.525).
        let perp = Direction::from_slice(&[0.525, -0.255]).unwrap();
        let g = geometry_angles(&prior, &lik, &perp).unwrap();
        assert!(g.cos_theta_pi.abs() < 1e-12);
        assert!(g.boundary && !g.occurs);

        let same = belief(&[0.25, 0.45], &[1.0, 1.0], BeliefRole::LikelihoodSummary);
        assert!(matches!(
            geometry_angles(&prior, &same, &dir),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    fn random_belief(d: usize, entries: &[f64], mean: &[f64], eps: f64, role: BeliefRole) -> GaussianBelief {
        let cov = SymMatrix::from_fn(d, |i, j| {
            (0..d).map(|k| entries[k * d + i] * entries[k * d + j]).sum::<f64>() + if i == j { eps } else { 0.0 }
        })
        .unwrap();
        GaussianBelief::new(Vector::new(mean[..d].to_vec()).unwrap(), cov, role).unwrap()
    }

    proptest! {
        #[test]
        fn precision_identity(
            d in 1usize..6,
            a in proptest::collection::vec(-1.5f64..1.5, 36),
            b in proptest::collection::vec(-1.5f64..1.5, 36),
            ma in proptest::collection::vec(-3.0f64..3.0, 6),
            mb in proptest::collection::vec(-3.0f64..3.0, 6),
        ) {
            let p = random_belief(d, &a, &ma, 0.3, BeliefRole::Prior);
            let l = random_belief(d, &b, &mb, 0.3, BeliefRole::LikelihoodSummary);
            let post = posterior_update(&p, &l).unwrap();
            let lhs = spd_inverse(post.cov()).unwrap();
            let rhs = spd_inverse(p.cov()).unwrap().add(&spd_inverse(l.cov()).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10 * rhs.max_abs_diagonal().max(1.0));
        }

        #[test]
        fn angle_sign_law(
            a in proptest::collection::vec(-1.5f64..1.5, 16),
            b in proptest::collection::vec(-1.5f64..1.5, 16),
            ma in proptest::collection::vec(-3.0f64..3.0, 4),
            mb in proptest::collection::vec(-3.0f64..3.0, 4),
            lam in proptest::collection::vec(-2.0f64..2.0, 4),
            d in 2usize..5,
        ) {
            let p = random_belief(d, &a, &ma, 0.2, BeliefRole::Prior);
            let l = random_belief(d, &b, &mb, 0.2, BeliefRole::LikelihoodSummary);
            let Ok(dir) = Direction::from_slice(&lam[..d]) else { return Ok(()) };
            let v = dpp_check(&p, &l, &dir).unwrap();
            let Ok(g) = geometry_angles(&p, &l, &dir) else { return Ok(()) };
            if !v.boundary && !g.boundary {
                prop_assert_eq!(v.occurs, g.occurs);
            }
        }

        #[test]
        fn collinear_means_never_discrepant(
            pv in proptest::collection::vec(0.1f64..5.0, 3),
            mp in proptest::collection::vec(-3.0f64..3.0, 3),
            ml in proptest::collection::vec(-3.0f64..3.0, 3),
            lam in proptest::collection::vec(-2.0f64..2.0, 3),
            c in 0.1f64..10.0,
        ) {
            // Proportional covariances put μᵖ on the segment between μᵖⁱ and μᴸ.
            let p = belief(&mp, &pv, BeliefRole::Prior);
            let lv: Vec<f64> = pv.iter().map(|x| x * c).collect();
            let l = belief(&ml, &lv, BeliefRole::LikelihoodSummary);
            let Ok(dir) = Direction::from_slice(&lam) else { return Ok(()) };
            prop_assert!(!dpp_check(&p, &l, &dir).unwrap().occurs);
            prop_assert!(!dpp_check_bruteforce(&p, &l, &dir).unwrap());
        }
    }
}
