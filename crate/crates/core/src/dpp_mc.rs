//! Occurrence probabilities under a true data-generating model, degeneracy and
//! collinearity diagnostics, the cone of vulnerable directions and the
//! repeated-sampling harness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss_dpp::{boundary_eps, Direction, GaussianBelief};
use crate::rng::{domain, StreamRng};
use crate::symlin::{cholesky, same_dim, spd_inverse, LowerTriangularFactor, SymMatrix, Vector};

/// Replicates handled by one rayon task.
const CHUNK: u64 = 4096;

/// `ȳ ~ N(μᵒ, Σᵒ/n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueModel {
    pub mu_o: Vector,
    pub sigma_o: SymMatrix,
    pub n: u64,
}

impl TrueModel {
    pub fn new(mu_o: Vector, sigma_o: SymMatrix, n: u64) -> Result<Self> {
        same_dim(sigma_o.dim(), mu_o.dim())?;
        cholesky(&sigma_o)?;
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be positive".into()));
        }
        Ok(TrueModel { mu_o, sigma_o, n })
    }
}

/// Known sampling covariance `Λ`, so the likelihood summary is `N(ȳ, Λ/n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub lambda_cov: SymMatrix,
    pub n: u64,
}

impl SamplingSpec {
    pub fn new(lambda_cov: SymMatrix, n: u64) -> Result<Self> {
        cholesky(&lambda_cov)?;
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be positive".into()));
        }
        Ok(SamplingSpec { lambda_cov, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub reps: u64,
    pub seed: u64,
    pub boundary_count: u64,
    /// Replicates flagged by the `Δ1Δ2 < 0` test.
    pub dpp_count: u64,
    /// Replicates flagged by comparing the three margins directly.
    pub bruteforce_count: u64,
}

/// Everything about one replicate that does not depend on the draw.
struct Replicate<'a> {
    prior: &'a GaussianBelief,
    dir: &'a Direction,
    noise: LowerTriangularFactor,
    mean: &'a Vector,
    /// `Σᵖ`.
    post_cov: SymMatrix,
    /// `(Λ/n)⁻¹`.
    lik_prec: SymMatrix,
    prior_prec: SymMatrix,
    /// `(Λ/n)⁻¹Σᵖλ`, so `Δ1 = a·(ȳ − μᵖⁱ)`.
    a: Vector,
    /// `(Σᵖⁱ)⁻¹Σᵖλ`, so `Δ2 = b·(ȳ − μᵖⁱ)`.
    b: Vector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateOutcome {
    pub ybar_first: f64,
    pub ybar_second: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub dpp: bool,
    pub dpp_bruteforce: bool,
    pub boundary: bool,
}

impl<'a> Replicate<'a> {
    fn new(
        mean: &'a Vector,
        sampling_cov: &SymMatrix,
        prior: &'a GaussianBelief,
        lambda_cov: &SymMatrix,
        n: u64,
        dir: &'a Direction,
    ) -> Result<Self> {
        let d = prior.dim();
        same_dim(d, mean.dim())?;
        same_dim(d, lambda_cov.dim())?;
        same_dim(d, dir.dim())?;
        let noise = cholesky(&sampling_cov.scale(1.0 / n as f64)?)?;
        let lik_prec = spd_inverse(&lambda_cov.scale(1.0 / n as f64)?)?;
        let prior_prec = spd_inverse(prior.cov())?;
        let post_cov = spd_inverse(&prior_prec.add(&lik_prec)?)?;
        let sp_lambda = post_cov.mul_vec(dir.lambda())?;
        let a = lik_prec.mul_vec(&sp_lambda)?;
        let b = prior_prec.mul_vec(&sp_lambda)?;
        Ok(Replicate {
            prior,
            dir,
            noise,
            mean,
            post_cov,
            lik_prec,
            prior_prec,
            a,
            b,
        })
    }

    fn run(&self, rng: &mut StreamRng) -> ReplicateOutcome {
        let d = self.mean.dim();
        let mut z = vec![0.0; d];
        rng.fill_normal(&mut z);
        let shift = self.noise.mul_vec(&z);
        let ybar: Vec<f64> = self.mean.as_slice().iter().zip(&shift).map(|(m, s)| m + s).collect();
        let ybar = Vector::new(ybar).expect("finite draw");
        let centred = ybar.sub(self.prior.mean()).expect("dims checked");
        let delta1 = self.a.dot(&centred).expect("dims checked");
        let delta2 = self.b.dot(&centred).expect("dims checked");

        let info = self
            .prior_prec
            .mul_vec(self.prior.mean())
            .and_then(|p| p.add(&self.lik_prec.mul_vec(&ybar)?))
            .expect("dims checked");
        let post_mean = self.post_cov.mul_vec(&info).expect("dims checked");
        let ep = self.dir.margin(self.prior.mean()).expect("dims checked");
        let el = self.dir.margin(&ybar).expect("dims checked");
        let epost = self.dir.margin(&post_mean).expect("dims checked");
        let product = (epost - ep) * (epost - el);
        let eps = boundary_eps(ep, el, epost);
        let sign_product = delta1 * delta2;

        ReplicateOutcome {
            ybar_first: ybar[0],
            ybar_second: if d > 1 { ybar[1] } else { f64::NAN },
            delta1,
            delta2,
            dpp: sign_product < -eps,
            dpp_bruteforce: product > eps,
            boundary: sign_product.abs() <= eps || product.abs() <= eps,
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Counts {
    dpp: u64,
    brute: u64,
    boundary: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            dpp: self.dpp + o.dpp,
            brute: self.brute + o.brute,
            boundary: self.boundary + o.boundary,
        }
    }
}

/// Frequency of `Δ1Δ2 < 0` over `reps` draws of `ȳ`. Replicate `i` always uses
/// stream `i`, so the estimate is the same for any number of worker threads.
pub fn simulate_dpp_probability(
    model: &TrueModel,
    prior: &GaussianBelief,
    spec: &SamplingSpec,
    dir: &Direction,
    reps: u64,
    seed: u64,
) -> Result<ProbEstimate> {
    if reps == 0 {
        return Err(Error::InvalidInput("reps must be at least 1".into()));
    }
    if model.n != spec.n {
        return Err(Error::InvalidInput(format!(
            "true model sample size {} differs from sampling sample size {}",
            model.n, spec.n
        )));
    }
    let rep = Replicate::new(&model.mu_o, &model.sigma_o, prior, &spec.lambda_cov, spec.n, dir)?;
    let chunks = reps.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Counts::default();
            for i in (c * CHUNK)..((c + 1) * CHUNK).min(reps) {
                let mut rng = StreamRng::new(seed, domain::DPP_PROBABILITY, i);
                let out = rep.run(&mut rng);
                if out.boundary {
                    acc.boundary += 1;
                } else {
                    acc.dpp += out.dpp as u64;
                    acc.brute += out.dpp_bruteforce as u64;
                }
            }
            acc
        })
        .reduce(Counts::default, |a, b| a + b);
    let p_hat = counts.dpp as f64 / reps as f64;
    Ok(ProbEstimate {
        p_hat,
        std_err: (p_hat * (1.0 - p_hat) / reps as f64).sqrt(),
        reps,
        seed,
        boundary_count: counts.boundary,
        dpp_count: counts.dpp,
        bruteforce_count: counts.brute,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub c_fit: f64,
    pub residual: f64,
    pub degenerate: bool,
    /// Frobenius least-squares `b` in `Λ/n ≈ bΣᵖⁱ`.
    pub b_fit: f64,
    pub b_residual: f64,
    /// `Λ/n` proportional to `Σᵖⁱ`: no direction can ever be discrepant.
    pub globally_degenerate: bool,
}

/// Fits `c` in `λᵀΣᵖΛ⁻¹ ≈ c·λᵀΣᵖ(Σᵖⁱ)⁻¹`. A zero residual with `c > 0` means
/// `Δ1` and `Δ2` are positively proportional for every draw.
pub fn degeneracy_check(
    prior: &GaussianBelief,
    spec: &SamplingSpec,
    dir: &Direction,
) -> Result<DegeneracyReport> {
    let d = prior.dim();
    same_dim(d, spec.lambda_cov.dim())?;
    same_dim(d, dir.dim())?;
    let lik_cov = spec.lambda_cov.scale(1.0 / spec.n as f64)?;
    let prior_prec = spd_inverse(prior.cov())?;
    let post_cov = spd_inverse(&prior_prec.add(&spd_inverse(&lik_cov)?)?)?;
    let sp_lambda = post_cov.mul_vec(dir.lambda())?;
    let a = cholesky(&spec.lambda_cov)?.solve(&sp_lambda)?;
    let b = prior_prec.mul_vec(&sp_lambda)?;
    let bb = b.dot(&b)?;
    let c_fit = if bb > 0.0 { a.dot(&b)? / bb } else { 0.0 };
    let residual = a.sub(&b.scale(c_fit))?.norm();
    let degenerate = c_fit > 0.0 && residual <= 1e-10 * a.norm();

    let b_fit = lik_cov.frobenius_dot(prior.cov())? / prior.cov().frobenius_dot(prior.cov())?;
    let diff = lik_cov.sub(&prior.cov().scale(b_fit)?)?;
    let b_residual = diff.frobenius_dot(&diff)?.sqrt();
    let globally_degenerate = b_residual <= 1e-10 * lik_cov.frobenius_dot(&lik_cov)?.sqrt();
    Ok(DegeneracyReport {
        c_fit,
        residual,
        degenerate,
        b_fit,
        b_residual,
        globally_degenerate,
    })
}

/// Relative tolerance for collinearity of the three means.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearityReport {
    pub a_fit: f64,
    pub b_fit: f64,
    pub residual: f64,
    pub collinear: bool,
}

/// Fits `μᵖ ≈ aμᵖⁱ + bμᴸ` with `a + b = 1`, i.e. whether `μᵖ` lies on the
/// line through the other two means. When `μᵖⁱ = μᴸ` the line is undefined
/// and the symmetric member `a = b = ½` of the solution family is reported.
pub fn collinearity_check(mu_pi: &Vector, mu_l: &Vector, mu_p: &Vector) -> Result<CollinearityReport> {
    same_dim(mu_pi.dim(), mu_l.dim())?;
    same_dim(mu_pi.dim(), mu_p.dim())?;
    let scale = mu_pi.norm() + mu_l.norm() + mu_p.norm();
    let span = mu_pi.sub(mu_l)?;
    let target = mu_p.sub(mu_l)?;
    let ss = span.dot(&span)?;
    let a_fit = if ss > (1e-15 * scale).powi(2) {
        target.dot(&span)? / ss
    } else {
        0.5
    };
    let b_fit = 1.0 - a_fit;
    let fitted = mu_pi.scale(a_fit).add(&mu_l.scale(b_fit))?;
    let residual = mu_p.sub(&fitted)?.norm();
    Ok(CollinearityReport {
        a_fit,
        b_fit,
        residual,
        collinear: residual <= COLLINEARITY_TOLERANCE * scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionCone {
    pub u: Vector,
    pub v: Vector,
    /// Orthonormal basis of the span of `u` and `v`; a single vector when
    /// they are parallel.
    pub span_basis: Vec<Vector>,
    pub phi: f64,
    pub dpp_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionClass {
    Dpp,
    NoDpp,
    Boundary,
}

impl DirectionClass {
    pub fn label(self) -> &'static str {
        match self {
            DirectionClass::Dpp => "dpp",
            DirectionClass::NoDpp => "no_dpp",
            DirectionClass::Boundary => "boundary",
        }
    }
}

/// Cone of directions whose margin is discrepant, with `u = μᵖ − μᵖⁱ` and
/// `v = μᵖ − μᴸ`. Within their plane the discrepant directions fill an
/// angular fraction `1 − φ/π`, where `φ` is the angle between `u` and `v`.
pub fn dpp_direction_cone(mu_pi: &Vector, mu_l: &Vector, mu_p: &Vector) -> Result<DirectionCone> {
    same_dim(mu_pi.dim(), mu_l.dim())?;
    same_dim(mu_pi.dim(), mu_p.dim())?;
    let u = mu_p.sub(mu_pi)?;
    let v = mu_p.sub(mu_l)?;
    let scale = 1e-12 * (mu_pi.norm() + mu_l.norm() + mu_p.norm()).max(1.0);
    if u.norm() <= scale || v.norm() <= scale {
        return Err(Error::DegenerateGeometry(
            "posterior mean coincides with the prior or likelihood mean".into(),
        ));
    }
    let e1 = u.scale(1.0 / u.norm());
    let along = v.dot(&e1)?;
    let perp = v.sub(&e1.scale(along))?;
    let perp_norm = perp.norm();
    let mut span_basis = vec![e1];
    let phi = if perp_norm <= 1e-12 * v.norm() {
        if along > 0.0 {
            0.0
        } else {
            std::f64::consts::PI
        }
    } else {
        span_basis.push(perp.scale(1.0 / perp_norm));
        perp_norm.atan2(along)
    };
    Ok(DirectionCone {
        u,
        v,
        span_basis,
        phi,
        dpp_fraction: 1.0 - phi / std::f64::consts::PI,
    })
}

/// Same-side rule: discrepant iff `λᵀu` and `λᵀv` have the same nonzero sign.
pub fn classify_direction(cone: &DirectionCone, dir: &Direction) -> Result<DirectionClass> {
    same_dim(cone.u.dim(), dir.dim())?;
    // Only the in-plane projection matters, and it has the same inner
    // products with u and v as λ itself.
    let lnorm = dir.lambda().norm();
    let du = dir.lambda().dot(&cone.u)?;
    let dv = dir.lambda().dot(&cone.v)?;
    let tol_u = 1e-12 * lnorm * cone.u.norm();
    let tol_v = 1e-12 * lnorm * cone.v.norm();
    if du.abs() <= tol_u || dv.abs() <= tol_v {
        return Ok(DirectionClass::Boundary);
    }
    Ok(if (du > 0.0) == (dv > 0.0) {
        DirectionClass::Dpp
    } else {
        DirectionClass::NoDpp
    })
}

/// In-plane direction at angle `deg`: standard axes when `d = 2`, otherwise
/// the cone's span basis.
pub fn planar_direction(cone: &DirectionCone, deg: f64) -> Result<Direction> {
    let t = deg.to_radians();
    let d = cone.u.dim();
    if d == 2 {
        return Direction::from_slice(&[t.cos(), t.sin()]);
    }
    let e1 = &cone.span_basis[0];
    let mut lam = e1.scale(t.cos());
    if let Some(e2) = cone.span_basis.get(1) {
        lam = lam.add(&e2.scale(t.sin()))?;
    }
    Direction::new(lam)
}

/// Classification of directions at `0, step, 2·step, …` degrees below 360.
pub fn cone_sweep(cone: &DirectionCone, step_deg: f64) -> Result<Vec<(f64, DirectionClass)>> {
    if !(step_deg > 0.0 && step_deg <= 360.0) {
        return Err(Error::InvalidInput(format!("sweep step must lie in (0, 360], got {step_deg}")));
    }
    let count = (360.0 / step_deg).ceil() as usize;
    (0..count)
        .map(|k| {
            let deg = k as f64 * step_deg;
            Ok((deg, classify_direction(cone, &planar_direction(cone, deg)?)?))
        })
        .collect()
}

/// Fraction of `samples` uniformly random in-plane directions classified as
/// discrepant, for checking `dpp_fraction`.
pub fn cone_fraction_by_sampling(cone: &DirectionCone, samples: u64, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = StreamRng::new(seed, domain::DIRECTIONS, c);
            let mut hits = 0u64;
            for _ in (c * CHUNK)..((c + 1) * CHUNK).min(samples) {
                let deg = rng.uniform_range(0.0, 360.0);
                let dir = planar_direction(cone, deg).expect("unit direction");
                if classify_direction(cone, &dir).expect("dims match") == DirectionClass::Dpp {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(hits as f64 / samples as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Config {
    pub theta_true: Vector,
    pub lambda_cov: SymMatrix,
    pub prior: GaussianBelief,
    pub direction: Direction,
    pub sample_sizes: Vec<u64>,
    pub reps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub n: u64,
    pub rep: u64,
    pub ybar1: f64,
    pub ybar2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub dpp: bool,
    pub dpp_bruteforce: bool,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2CellSummary {
    pub n: u64,
    pub reps: u64,
    pub dpp_count: u64,
    pub boundary_count: u64,
    /// Non-boundary replicates on which the two classifiers agree.
    pub agree_count: u64,
    pub agreement_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Table {
    pub rows: Vec<Fig2Row>,
    pub cells: Vec<Fig2CellSummary>,
}

/// Simulates `reps` sample means per sample size and classifies each both by
/// the sign test and by comparing margins. Replicate `rep` of the `k`-th
/// sample size uses stream `k·2³² + rep`.
pub fn figure2_harness(cfg: &Fig2Config) -> Result<Fig2Table> {
    if cfg.reps == 0 || cfg.reps >= 1 << 32 {
        return Err(Error::InvalidInput("reps must lie in 1..2^32".into()));
    }
    if cfg.theta_true.dim() != 2 {
        return Err(Error::UnsupportedShape("the harness reports two coordinates".into()));
    }
    if cfg.sample_sizes.is_empty() || cfg.sample_sizes.contains(&0) {
        return Err(Error::InvalidInput("sample sizes must be positive and non-empty".into()));
    }
    let mut rows = Vec::with_capacity(cfg.sample_sizes.len() * cfg.reps as usize);
    let mut cells = Vec::with_capacity(cfg.sample_sizes.len());
    for (k, &n) in cfg.sample_sizes.iter().enumerate() {
        let rep = Replicate::new(&cfg.theta_true, &cfg.lambda_cov, &cfg.prior, &cfg.lambda_cov, n, &cfg.direction)?;
        let block: Vec<Fig2Row> = (0..cfg.reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = StreamRng::new(cfg.seed, domain::FIGURE2, ((k as u64) << 32) | i);
                let o = rep.run(&mut rng);
                Fig2Row {
                    n,
                    rep: i,
                    ybar1: o.ybar_first,
                    ybar2: o.ybar_second,
                    delta1: o.delta1,
                    delta2: o.delta2,
                    dpp: o.dpp,
                    dpp_bruteforce: o.dpp_bruteforce,
                    boundary: o.boundary,
                }
            })
            .collect();
        let boundary_count = block.iter().filter(|r| r.boundary).count() as u64;
        let agree_count = block.iter().filter(|r| !r.boundary && r.dpp == r.dpp_bruteforce).count() as u64;
        let interior = cfg.reps - boundary_count;
        cells.push(Fig2CellSummary {
            n,
            reps: cfg.reps,
            dpp_count: block.iter().filter(|r| r.dpp).count() as u64,
            boundary_count,
            agree_count,
            agreement_rate: if interior > 0 { agree_count as f64 / interior as f64 } else { 1.0 },
        });
        rows.extend(block);
    }
    Ok(Fig2Table { rows, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_dpp::{dpp_check, dpp_check_bruteforce, posterior_update};
    use crate::presets;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    fn m(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn figure2_column1() -> (GaussianBelief, SymMatrix, Vector) {
        let cfg = &presets::figure2_configs(1, 0)[0].1;
        (cfg.prior.clone(), cfg.lambda_cov.clone(), cfg.theta_true.clone())
    }

    #[test]
    fn aligned_likelihood_never_discrepant() {
        let prior = GaussianBelief::prior(v(&[0.3, -0.1]), m(&[&[2.0, 0.5], &[0.5, 1.0]])).unwrap();
        let n = 10;
        let spec = SamplingSpec::new(prior.cov().scale(n as f64).unwrap(), n).unwrap();
        let model = TrueModel::new(v(&[2.0, -3.0]), m(&[&[1.0, 0.9], &[0.9, 4.0]]), n).unwrap();
        let dir = Direction::from_slice(&[1.0, -1.0]).unwrap();
        let est = simulate_dpp_probability(&model, &prior, &spec, &dir, 5000, 3).unwrap();
        assert_eq!(est.p_hat, 0.0);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn one_dimension_probability_is_zero() {
        let prior = GaussianBelief::prior(v(&[0.0]), m(&[&[3.0]])).unwrap();
        let spec = SamplingSpec::new(m(&[&[0.7]]), 4).unwrap();
        let model = TrueModel::new(v(&[1.5]), m(&[&[2.0]]), 4).unwrap();
        let dir = Direction::from_slice(&[-1.0]).unwrap();
        let est = simulate_dpp_probability(&model, &prior, &spec, &dir, 5000, 1).unwrap();
        assert_eq!(est.p_hat, 0.0);
        assert!(degeneracy_check(&prior, &spec, &dir).unwrap().degenerate);
    }

    #[test]
    fn estimate_is_seed_deterministic_and_counts_agree() {
        let (prior, lambda, theta) = figure2_column1();
        let model = TrueModel::new(theta, lambda.clone(), 3).unwrap();
        let spec = SamplingSpec::new(lambda, 3).unwrap();
        let dir = Direction::from_slice(&[1.0, -1.0]).unwrap();
        let a = simulate_dpp_probability(&model, &prior, &spec, &dir, 20_000, 9).unwrap();
        let b = simulate_dpp_probability(&model, &prior, &spec, &dir, 20_000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dpp_count, a.bruteforce_count);
        assert!(a.p_hat > 0.0);
        assert_abs_diff_eq!(a.std_err, (a.p_hat * (1.0 - a.p_hat) / 20_000.0).sqrt(), epsilon = 1e-18);

        let mismatched = SamplingSpec::new(spec.lambda_cov.clone(), 30).unwrap();
        assert!(simulate_dpp_probability(&model, &prior, &mismatched, &dir, 10, 0).is_err());
    }

    #[test]
    fn degeneracy_examples() {
        let prior = GaussianBelief::prior(v(&[0.0, 0.0]), m(&[&[2.0, 0.3], &[0.3, 1.0]])).unwrap();
        let n = 5;
        let spec = SamplingSpec::new(prior.cov().scale(2.0 * n as f64).unwrap(), n).unwrap();
        for lam in [[1.0, -1.0], [0.2, 3.0], [-1.0, 0.0]] {
            let r = degeneracy_check(&prior, &spec, &Direction::from_slice(&lam).unwrap()).unwrap();
            assert!(r.degenerate);
            assert!(r.globally_degenerate);
            assert_abs_diff_eq!(r.b_fit, 2.0, epsilon = 1e-12);
        }
        let (prior, lambda, _) = figure2_column1();
        let r = degeneracy_check(&prior, &SamplingSpec::new(lambda, 3).unwrap(), &Direction::from_slice(&[1.0, -1.0]).unwrap())
            .unwrap();
        assert!(!r.degenerate);
        assert!(r.residual > 1e-6);
        assert!(!r.globally_degenerate);
    }

    #[test]
    fn collinearity_examples() {
        let (a, b) = (v(&[0.3, 1.0, -2.0]), v(&[1.0, 0.5, 4.0]));
        let mid = a.scale(0.5).add(&b.scale(0.5)).unwrap();
        let r = collinearity_check(&a, &b, &mid).unwrap();
        assert!(r.collinear);
        assert_abs_diff_eq!(r.a_fit, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r.b_fit, 0.5, epsilon = 1e-14);

        let r = collinearity_check(&v(&[0.25, 0.45]), &v(&[1.10, 1.15]), &v(&[0.505, 0.975])).unwrap();
        assert!(!r.collinear);
        assert!(r.residual > 0.1);

        let p = v(&[0.7, -0.7]);
        let r = collinearity_check(&p, &p, &p).unwrap();
        assert!(r.collinear);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.a_fit + r.b_fit, 1.0);
        assert!(collinearity_check(&p, &v(&[1.0]), &p).is_err());
    }

    #[test]
    fn figure3_cone() {
        let post = posterior_update(&presets::figure3_prior(), &presets::figure3_likelihood()).unwrap();
        let cone = dpp_direction_cone(presets::figure3_prior().mean(), presets::figure3_likelihood().mean(), post.mean())
            .unwrap();
        assert_abs_diff_eq!(cone.u[0], 0.255, epsilon = 1e-12);
        assert_abs_diff_eq!(cone.u[1], 0.525, epsilon = 1e-12);
        assert_abs_diff_eq!(cone.v[0], -0.595, epsilon = 1e-12);
        assert_abs_diff_eq!(cone.v[1], -0.175, epsilon = 1e-12);
        // cos φ = u·v / (|u||v|) by hand.
        let cos_phi = (0.255 * -0.595 + 0.525 * -0.175)
            / ((0.255f64.powi(2) + 0.525f64.powi(2)).sqrt() * (0.595f64.powi(2) + 0.175f64.powi(2)).sqrt());
        assert_abs_diff_eq!(cone.phi, cos_phi.acos(), epsilon = 1e-12);
        assert_abs_diff_eq!(cone.phi, 2.309, epsilon = 1e-3);
        assert_abs_diff_eq!(cone.dpp_fraction, 0.265, epsilon = 1e-3);
        assert_eq!(
            classify_direction(&cone, &presets::figure3_direction()).unwrap(),
            DirectionClass::Dpp
        );
        // λᵀu > 0 and λᵀv < 0.
        assert_eq!(
            classify_direction(&cone, &Direction::from_slice(&[1.0, 0.0]).unwrap()).unwrap(),
            DirectionClass::NoDpp
        );
    }

    #[test]
    fn cone_special_angles() {
        let cone = dpp_direction_cone(&v(&[-1.0, 0.0]), &v(&[0.0, -1.0]), &v(&[0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(cone.phi, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(cone.dpp_fraction, 0.5, epsilon = 1e-15);

        let cone = dpp_direction_cone(&v(&[0.0, 0.0]), &v(&[0.0, 0.0]), &v(&[1.0, 2.0])).unwrap();
        assert_eq!(cone.phi, 0.0);
        assert_eq!(cone.dpp_fraction, 1.0);
        assert_eq!(cone.span_basis.len(), 1);

        // d = 3 with λ orthogonal to the span.
        let cone = dpp_direction_cone(&v(&[0.0, 0.0, 0.0]), &v(&[1.0, 1.0, 0.0]), &v(&[0.5, 0.1, 0.0])).unwrap();
        let ortho = Direction::from_slice(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(classify_direction(&cone, &ortho).unwrap(), DirectionClass::Boundary);

        let p = v(&[1.0, 1.0]);
        assert!(matches!(dpp_direction_cone(&p, &v(&[0.0, 2.0]), &p), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn classification_matches_definition_for_figure3() {
        let (prior, lik) = (presets::figure3_prior(), presets::figure3_likelihood());
        let post = posterior_update(&prior, &lik).unwrap();
        let cone = dpp_direction_cone(prior.mean(), lik.mean(), post.mean()).unwrap();
        for (deg, class) in cone_sweep(&cone, 1.0).unwrap() {
            let dir = planar_direction(&cone, deg).unwrap();
            let brute = dpp_check_bruteforce(&prior, &lik, &dir).unwrap();
            match class {
                DirectionClass::Dpp => assert!(brute, "{deg}"),
                DirectionClass::NoDpp => assert!(!brute, "{deg}"),
                DirectionClass::Boundary => {}
            }
            assert_eq!(dpp_check(&prior, &lik, &dir).unwrap().occurs, class == DirectionClass::Dpp);
        }
        assert_eq!(cone_sweep(&cone, 1.0).unwrap().len(), 360);
        assert!(cone_sweep(&cone, 0.0).is_err());
    }

    #[test]
    fn harness_rows_and_agreement() {
        let (name, mut cfg) = presets::figure2_configs(200, 17).remove(0);
        assert_eq!(name, "correlated_theta_m1_1");
        let t = figure2_harness(&cfg).unwrap();
        assert_eq!(t.rows.len(), 600);
        for c in &t.cells {
            assert_eq!(c.agreement_rate, 1.0);
        }
        for r in &t.rows {
            if !r.boundary {
                assert_eq!(r.dpp, r.dpp_bruteforce);
            }
        }
        cfg.reps = 1;
        let one = figure2_harness(&cfg).unwrap();
        let again = figure2_harness(&cfg).unwrap();
        assert_eq!(one.rows.len(), 3);
        assert_eq!(one, again);
        assert_eq!(one.rows[0], t.rows[0]);
    }
}
