//! Commands on Gaussian beliefs: single checks, replicate studies, the
//! direction cone, the simulation harness and the aggregation view.

use serde::{Deserialize, Serialize};

use dpp_core::dpp_mc::{
    classify_direction, collinearity_check, cone_fraction_by_sampling, cone_sweep, degeneracy_check,
    dpp_direction_cone, figure2_harness, simulate_dpp_probability, CollinearityReport, DegeneracyReport, DirectionClass,
    DirectionCone, Fig2CellSummary, Fig2Config, Fig2Table, ProbEstimate, SamplingSpec, TrueModel,
};
use dpp_core::gauss_dpp::{
    contrast_analysis, definition_product, dpp_check, geometry_angles, posterior_update, ContrastCaseTerms,
    GeometryAngles,
};
use dpp_core::simpson_bridge::{
    coherent_contrast, dpp_simpson_equivalence, incoherent_contrast, AggregationProblem, SimpsonEquivalence,
    SimpsonVerdict,
};
use dpp_core::{presets, Direction, DppVerdict, GaussianBelief, SymMatrix, Vector};

use crate::error::{CliError, CliResult};
use crate::format::{Cell, CsvTable};
use crate::{check_label, finish, Artifacts, FigureKind, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefSpec {
    pub mean: Vector,
    pub cov: SymMatrix,
}

impl BeliefSpec {
    fn of(b: &GaussianBelief) -> Self {
        BeliefSpec {
            mean: b.mean().clone(),
            cov: b.cov().clone(),
        }
    }

    fn prior(&self) -> CliResult<GaussianBelief> {
        Ok(GaussianBelief::prior(self.mean.clone(), self.cov.clone())?)
    }

    fn likelihood(&self) -> CliResult<GaussianBelief> {
        Ok(GaussianBelief::likelihood(self.mean.clone(), self.cov.clone())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussPreset {
    /// Placebo/drug example with `λ = (−1, 1)`.
    Figure3,
}

/// Prior, likelihood and direction, any of which a preset may supply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<FigureKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<GaussPreset>,
    #[serde(default)]
    pub prior: Option<BeliefSpec>,
    #[serde(default)]
    pub likelihood: Option<BeliefSpec>,
    #[serde(default)]
    pub direction: Option<Direction>,
}

struct Pair {
    prior: GaussianBelief,
    lik: GaussianBelief,
    dir: Option<Direction>,
}

impl PairModel {
    fn resolve(mut self, need_direction: bool) -> CliResult<(Self, Pair)> {
        if let Some(GaussPreset::Figure3) = self.preset.take() {
            self.prior.get_or_insert_with(|| BeliefSpec::of(&presets::figure3_prior()));
            self.likelihood.get_or_insert_with(|| BeliefSpec::of(&presets::figure3_likelihood()));
            self.direction.get_or_insert_with(presets::figure3_direction);
        }
        let prior = self.prior.as_ref().ok_or_else(|| missing("prior"))?.prior()?;
        let lik = self.likelihood.as_ref().ok_or_else(|| missing("likelihood"))?.likelihood()?;
        if need_direction && self.direction.is_none() {
            return Err(missing("direction"));
        }
        let dir = self.direction.clone();
        Ok((self, Pair { prior, lik, dir }))
    }
}

fn missing(field: &str) -> CliError {
    CliError::Config(format!("model.{field} is required unless a preset supplies it"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefinitionCheck {
    pub occurs: bool,
    pub product: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckResult {
    pub posterior: BeliefSpec,
    pub verdict: DppVerdict,
    /// Direct comparison of the three margins.
    pub definition: DefinitionCheck,
    /// Two-dimensional inputs only.
    pub geometry: Option<GeometryAngles>,
    /// Two-dimensional diagonal or homogeneous-variance inputs only.
    pub contrast: Option<ContrastCaseTerms>,
}

pub fn check(cfg: &RunConfig) -> CliResult<Artifacts> {
    let (model, p) = cfg.model::<PairModel>()?.resolve(true)?;
    let dir = p.dir.expect("resolved");
    let post = posterior_update(&p.prior, &p.lik)?;
    let verdict = dpp_check(&p.prior, &p.lik, &dir)?;
    let (occurs, product, eps) = definition_product(&p.prior, &p.lik, &dir)?;
    let two_d = p.prior.dim() == 2;
    let result = CheckResult {
        posterior: BeliefSpec::of(&post),
        verdict,
        definition: DefinitionCheck { occurs, product, eps },
        geometry: if two_d { geometry_angles(&p.prior, &p.lik, &dir).ok() } else { None },
        contrast: if two_d { contrast_analysis(&p.prior, &p.lik).ok() } else { None },
    };
    finish(cfg, &model, &result, vec![])
}

fn default_prob_reps() -> u64 {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbModel {
    /// Mean of the sampling distribution of one observation.
    pub mu_true: Vector,
    /// Known per-observation covariance `Λ`.
    pub lambda_cov: SymMatrix,
    pub n: u64,
    pub prior: BeliefSpec,
    pub direction: Direction,
    #[serde(default = "default_prob_reps")]
    pub reps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbResult {
    pub estimate: ProbEstimate,
    pub degeneracy: DegeneracyReport,
}

pub fn prob(cfg: &RunConfig) -> CliResult<Artifacts> {
    let model: ProbModel = cfg.model()?;
    let prior = model.prior.prior()?;
    let truth = TrueModel::new(model.mu_true.clone(), model.lambda_cov.clone(), model.n)?;
    let spec = SamplingSpec::new(model.lambda_cov.clone(), model.n)?;
    let degeneracy = degeneracy_check(&prior, &spec, &model.direction)?;
    let estimate = simulate_dpp_probability(&truth, &prior, &spec, &model.direction, model.reps, cfg.seed())?;
    if estimate.dpp_count != estimate.bruteforce_count {
        log::warn!(
            "sign test flagged {} replicates, direct comparison {}",
            estimate.dpp_count,
            estimate.bruteforce_count
        );
    }
    finish(cfg, &model, &ProbResult { estimate, degeneracy }, vec![])
}

fn default_step() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<GaussPreset>,
    #[serde(default)]
    pub prior: Option<BeliefSpec>,
    #[serde(default)]
    pub likelihood: Option<BeliefSpec>,
    /// Optional direction to classify against the cone.
    #[serde(default)]
    pub direction: Option<Direction>,
    #[serde(default = "default_step")]
    pub step_deg: f64,
    /// Random in-plane directions for the sampling cross-check; 0 skips it.
    #[serde(default)]
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeResult {
    pub cone: DirectionCone,
    pub collinearity: CollinearityReport,
    pub sweep_points: u64,
    pub sweep_dpp: u64,
    pub sweep_boundary: u64,
    pub sampled_fraction: Option<f64>,
    pub direction_class: Option<DirectionClass>,
    /// Definition check along `direction`, for comparison with the class.
    pub direction_verdict: Option<DppVerdict>,
}

pub fn cone(cfg: &RunConfig) -> CliResult<Artifacts> {
    let m: ConeModel = cfg.model()?;
    let pair = PairModel {
        kind: None,
        preset: m.preset,
        prior: m.prior.clone(),
        likelihood: m.likelihood.clone(),
        direction: m.direction.clone(),
    };
    let (resolved, p) = pair.resolve(false)?;
    let model = ConeModel {
        preset: None,
        prior: resolved.prior,
        likelihood: resolved.likelihood,
        direction: resolved.direction,
        ..m
    };
    let post = posterior_update(&p.prior, &p.lik)?;
    let cone = dpp_direction_cone(p.prior.mean(), p.lik.mean(), post.mean())?;
    let collinearity = collinearity_check(p.prior.mean(), p.lik.mean(), post.mean())?;
    let sweep = cone_sweep(&cone, model.step_deg)?;
    let mut table = CsvTable::new(&["direction_deg", "classification"]);
    for (deg, class) in &sweep {
        table.row(&[Cell::F(*deg), Cell::S(class.label())]);
    }
    let sampled_fraction = match model.samples {
        0 => None,
        s => Some(cone_fraction_by_sampling(&cone, s, cfg.seed())?),
    };
    let (direction_class, direction_verdict) = match &model.direction {
        Some(d) => (Some(classify_direction(&cone, d)?), Some(dpp_check(&p.prior, &p.lik, d)?)),
        None => (None, None),
    };
    let result = ConeResult {
        sweep_points: sweep.len() as u64,
        sweep_dpp: sweep.iter().filter(|(_, c)| *c == DirectionClass::Dpp).count() as u64,
        sweep_boundary: sweep.iter().filter(|(_, c)| *c == DirectionClass::Boundary).count() as u64,
        cone,
        collinearity,
        sampled_fraction,
        direction_class,
        direction_verdict,
    };
    finish(cfg, &model, &result, vec![("cone.csv".into(), table.finish())])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fig2Preset {
    /// The four correlated/diagonal, off/on-centre configurations.
    Figure2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedFig2 {
    pub name: String,
    pub theta_true: Vector,
    pub lambda_cov: SymMatrix,
    pub prior: BeliefSpec,
    pub direction: Direction,
    pub sample_sizes: Vec<u64>,
}

fn default_fig2_reps() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Model {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<FigureKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Fig2Preset>,
    #[serde(default)]
    pub configs: Option<Vec<NamedFig2>>,
    #[serde(default = "default_fig2_reps")]
    pub reps: u64,
}

impl Fig2Model {
    fn resolve(mut self, seed: u64) -> CliResult<(Self, Vec<(String, Fig2Config)>)> {
        if let Some(Fig2Preset::Figure2) = self.preset.take() {
            if self.configs.is_some() {
                return Err(CliError::Config("give either model.preset or model.configs, not both".into()));
            }
            let named = presets::figure2_configs(self.reps, seed)
                .into_iter()
                .map(|(name, c)| NamedFig2 {
                    name,
                    theta_true: c.theta_true,
                    lambda_cov: c.lambda_cov,
                    prior: BeliefSpec::of(&c.prior),
                    direction: c.direction,
                    sample_sizes: c.sample_sizes,
                })
                .collect();
            self.configs = Some(named);
        }
        let named = self.configs.as_ref().ok_or_else(|| missing("configs"))?;
        if named.is_empty() {
            return Err(CliError::Config("model.configs is empty".into()));
        }
        let mut out: Vec<(String, Fig2Config)> = Vec::new();
        for c in named {
            check_label(&c.name)?;
            if out.iter().any(|(n, _)| *n == c.name) {
                return Err(CliError::Config(format!("duplicate config name {:?}", c.name)));
            }
            let cfg = Fig2Config {
                theta_true: c.theta_true.clone(),
                lambda_cov: c.lambda_cov.clone(),
                prior: c.prior.prior()?,
                direction: c.direction.clone(),
                sample_sizes: c.sample_sizes.clone(),
                reps: self.reps,
                seed,
            };
            out.push((c.name.clone(), cfg));
        }
        Ok((self, out))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Summary {
    pub name: String,
    pub file: String,
    pub cells: Vec<Fig2CellSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Result {
    pub configs: Vec<Fig2Summary>,
}

fn run_fig2(cfg: &RunConfig, scatter: bool) -> CliResult<Artifacts> {
    let (model, configs) = cfg.model::<Fig2Model>()?.resolve(cfg.seed())?;
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for (name, c) in &configs {
        let table = figure2_harness(c)?;
        let (file, bytes) = if scatter {
            (format!("fig2_scatter_{name}.csv"), scatter_csv(&table))
        } else {
            (format!("fig2_{name}.csv"), harness_csv(&table))
        };
        summaries.push(Fig2Summary {
            name: name.clone(),
            file: file.clone(),
            cells: table.cells,
        });
        files.push((file, bytes));
    }
    finish(cfg, &model, &Fig2Result { configs: summaries }, files)
}

fn harness_csv(t: &Fig2Table) -> Vec<u8> {
    let mut csv = CsvTable::new(&["n", "rep", "ybar1", "ybar2", "delta1", "delta2", "dpp", "dpp_direct", "boundary", "agree"]);
    for r in &t.rows {
        csv.row(&[
            Cell::U(r.n),
            Cell::U(r.rep),
            Cell::F(r.ybar1),
            Cell::F(r.ybar2),
            Cell::F(r.delta1),
            Cell::F(r.delta2),
            Cell::B(r.dpp),
            Cell::B(r.dpp_bruteforce),
            Cell::B(r.boundary),
            Cell::B(r.dpp == r.dpp_bruteforce),
        ]);
    }
    csv.finish()
}

fn scatter_csv(t: &Fig2Table) -> Vec<u8> {
    let mut csv = CsvTable::new(&["n", "rep", "ybar1", "ybar2", "delta1", "delta2", "dpp"]);
    for r in &t.rows {
        csv.row(&[
            Cell::U(r.n),
            Cell::U(r.rep),
            Cell::F(r.ybar1),
            Cell::F(r.ybar2),
            Cell::F(r.delta1),
            Cell::F(r.delta2),
            Cell::B(r.dpp),
        ]);
    }
    csv.finish()
}

pub fn fig2(cfg: &RunConfig) -> CliResult<Artifacts> {
    run_fig2(cfg, false)
}

pub fn fig2_scatter(cfg: &RunConfig) -> CliResult<Artifacts> {
    run_fig2(cfg, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryResult {
    pub prior_margin: f64,
    pub likelihood_margin: f64,
    pub posterior_margin: f64,
    pub occurs: bool,
}

/// Points of the two-dimensional geometry diagram: the three means, the
/// margins as `y`-axis intercepts and unit directions along the two edges of
/// the discrepant cone.
pub fn fig3_geometry(cfg: &RunConfig) -> CliResult<Artifacts> {
    let (model, p) = cfg.model::<PairModel>()?.resolve(true)?;
    if p.prior.dim() != 2 {
        return Err(CliError::Core(dpp_core::Error::UnsupportedShape(
            "the geometry diagram needs dimension 2".into(),
        )));
    }
    let dir = p.dir.expect("resolved");
    let post = posterior_update(&p.prior, &p.lik)?;
    let v = dpp_check(&p.prior, &p.lik, &dir)?;
    let cone = dpp_direction_cone(p.prior.mean(), p.lik.mean(), post.mean())?;
    let perp = |w: &Vector| {
        let n = w.norm();
        (-w[1] / n, w[0] / n)
    };
    let mut csv = CsvTable::new(&["label", "x", "y"]);
    for (label, m) in [("mu_prior", p.prior.mean()), ("mu_likelihood", p.lik.mean()), ("mu_posterior", post.mean())] {
        csv.row(&[Cell::S(label), Cell::F(m[0]), Cell::F(m[1])]);
    }
    for (label, y) in [("A", v.prior_margin), ("B", v.likelihood_margin), ("C", v.posterior_margin)] {
        csv.row(&[Cell::S(label), Cell::F(0.0), Cell::F(y)]);
    }
    for (label, w) in [("cone_edge_u", &cone.u), ("cone_edge_v", &cone.v)] {
        let (x, y) = perp(w);
        csv.row(&[Cell::S(label), Cell::F(x), Cell::F(y)]);
    }
    let result = GeometryResult {
        prior_margin: v.prior_margin,
        likelihood_margin: v.likelihood_margin,
        posterior_margin: v.posterior_margin,
        occurs: v.occurs,
    };
    finish(cfg, &model, &result, vec![("fig3_geometry.csv".into(), csv.finish())])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimpsonModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<GaussPreset>,
    #[serde(default)]
    pub prior: Option<BeliefSpec>,
    #[serde(default)]
    pub likelihood: Option<BeliefSpec>,
    #[serde(default)]
    pub problem: Option<AggregationProblem>,
    /// Number of equal steps for the shared-weight sweep over `[0, 1]`; 0 skips it.
    #[serde(default)]
    pub sweep: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub points: u64,
    pub paradox_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimpsonResult {
    pub coherent: Option<SimpsonVerdict>,
    pub incoherent: Option<SimpsonVerdict>,
    pub coherent_sweep: Option<SweepReport>,
    pub equivalence: Option<SimpsonEquivalence>,
}

pub fn simpson(cfg: &RunConfig) -> CliResult<Artifacts> {
    let mut model: SimpsonModel = cfg.model()?;
    if let Some(GaussPreset::Figure3) = model.preset.take() {
        model.prior.get_or_insert_with(|| BeliefSpec::of(&presets::figure3_prior()));
        model.likelihood.get_or_insert_with(|| BeliefSpec::of(&presets::figure3_likelihood()));
    }
    let mut result = SimpsonResult {
        coherent: None,
        incoherent: None,
        coherent_sweep: None,
        equivalence: None,
    };
    match (&model.prior, &model.likelihood) {
        (Some(p), Some(l)) => result.equivalence = Some(dpp_simpson_equivalence(&p.prior()?, &l.likelihood()?)?),
        (None, None) => {}
        _ => return Err(CliError::Config("model.prior and model.likelihood go together".into())),
    }
    if model.sweep > 0 && model.problem.is_none() {
        return Err(CliError::Config("model.sweep needs model.problem".into()));
    }
    if let Some(prob) = &model.problem {
        if prob.w.is_some() {
            result.coherent = Some(coherent_contrast(prob)?);
        }
        if prob.w1.is_some() || prob.w2.is_some() {
            result.incoherent = Some(incoherent_contrast(prob)?);
        }
        if model.sweep > 0 {
            let mut paradox_count = 0;
            for k in 0..=model.sweep {
                let p = AggregationProblem {
                    w: Some(k as f64 / model.sweep as f64),
                    ..prob.clone()
                };
                paradox_count += coherent_contrast(&p)?.paradox as u64;
            }
            result.coherent_sweep = Some(SweepReport {
                points: model.sweep + 1,
                paradox_count,
            });
        }
    }
    if result == (SimpsonResult { coherent: None, incoherent: None, coherent_sweep: None, equivalence: None }) {
        return Err(CliError::Config(
            "nothing to evaluate: give prior and likelihood, a preset, or a problem with weights".into(),
        ));
    }
    finish(cfg, &model, &result, vec![])
}
