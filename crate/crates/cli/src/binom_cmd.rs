//! Commands on the two-arm Binomial model.

use serde::{Deserialize, Serialize};

use dpp_core::binom_dpp::{
    beta_conjugate_summary, contour_grid, dpp_interval_check, mode_solve_eta_prior, mode_solve_logit_prior,
    mode_solve_logit_prior_free_r, posterior_summary_grid, posterior_summary_grid_rho_marginal,
    posterior_summary_mcmc, BetaPrior, BinomialData, ContourPrior, EtaGaussianPrior, FlexiblePriorSpec, GridSpec,
    IntervalVerdict, LogitGaussianPrior, LogitModeState, McmcSpec, McmcSummary, ModeResult, PairGaussianPrior,
    PosteriorSummary, RhoMode, SummaryDiagnostics, Transformation, VarianceMode,
};
use dpp_core::presets::{self, VarianceFamily};

use crate::error::{CliError, CliResult};
use crate::format::{Cell, CsvTable};
use crate::{finish, Artifacts, FigureKind, RunConfig};

fn figure_data() -> Option<BinomialData> {
    Some(presets::binomial_figure_data())
}

fn data_of(d: &Option<BinomialData>) -> BinomialData {
    d.expect("resolved")
}

fn warn_edge_mass(s: &PosteriorSummary) {
    if let SummaryDiagnostics::Grid(g) = &s.diagnostics {
        if g.mass_at_boundary {
            log::warn!("grid posterior puts {:e} of its mass in the edge cells", g.edge_mass);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModePrior {
    /// Gaussian on `(p₀, η)`.
    Eta {
        mu0: f64,
        eta0: f64,
        sigma0: f64,
        sigma1: f64,
        r: f64,
    },
    /// Gaussian on the logits; `free_r` also solves for the correlation.
    Logit {
        mu: [f64; 2],
        sigma0: f64,
        sigma1: f64,
        r: f64,
        #[serde(default = "yes")]
        free_r: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeModel {
    #[serde(default = "figure_data")]
    pub data: Option<BinomialData>,
    pub prior: ModePrior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaModeOutput {
    pub mode: ModeResult,
    pub interval: IntervalVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeOutput {
    pub eta: Option<EtaModeOutput>,
    pub logit: Option<LogitModeState>,
}

pub fn mode(cfg: &RunConfig) -> CliResult<Artifacts> {
    let model: ModeModel = cfg.model()?;
    let data = data_of(&model.data);
    let out = match model.prior {
        ModePrior::Eta {
            mu0,
            eta0,
            sigma0,
            sigma1,
            r,
        } => {
            let prior = EtaGaussianPrior::new(mu0, eta0, sigma0, sigma1, r)?;
            let mode = mode_solve_eta_prior(&data, &prior)?;
            let interval = dpp_interval_check(&data, &prior, &mode);
            if !interval.agree && !interval.boundary {
                log::warn!("interval and direct verdicts disagree: {interval:?}");
            }
            ModeOutput {
                eta: Some(EtaModeOutput { mode, interval }),
                logit: None,
            }
        }
        ModePrior::Logit {
            mu,
            sigma0,
            sigma1,
            r,
            free_r,
        } => {
            let prior = LogitGaussianPrior::new(mu, sigma0, sigma1, r)?;
            let state = if free_r {
                mode_solve_logit_prior_free_r(&data, &prior)?
            } else {
                mode_solve_logit_prior(&data, &prior)?
            };
            ModeOutput {
                eta: None,
                logit: Some(state),
            }
        }
    };
    finish(cfg, &model, &out, vec![])
}

/// MCMC settings other than the seed, which comes from the job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcOptions {
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_target")]
    pub target_accept: f64,
}

fn default_chains() -> usize {
    McmcSpec::default().chains
}
fn default_iters() -> usize {
    McmcSpec::default().iters
}
fn default_burn_in() -> usize {
    McmcSpec::default().burn_in
}
fn default_target() -> f64 {
    McmcSpec::default().target_accept
}

impl Default for McmcOptions {
    fn default() -> Self {
        let d = McmcSpec::default();
        McmcOptions {
            chains: d.chains,
            iters: d.iters,
            burn_in: d.burn_in,
            target_accept: d.target_accept,
        }
    }
}

impl McmcOptions {
    fn spec(&self, seed: u64) -> McmcSpec {
        McmcSpec {
            chains: self.chains,
            iters: self.iters,
            burn_in: self.burn_in,
            target_accept: self.target_accept,
            seed,
        }
    }
}

fn default_resolution() -> usize {
    GridSpec::default().resolution
}
fn default_marginal_resolution() -> usize {
    601
}
fn default_rho_nodes() -> usize {
    41
}
fn default_draws() -> usize {
    1_000_000
}
fn default_beta() -> BetaPrior {
    presets::beta_prior()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum SummaryModel {
    Grid {
        #[serde(default = "figure_data")]
        data: Option<BinomialData>,
        prior: PairGaussianPrior,
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
    /// Grid with the correlation integrated out under a uniform prior.
    GridRhoMarginal {
        #[serde(default = "figure_data")]
        data: Option<BinomialData>,
        mean: [f64; 2],
        sd: [f64; 2],
        #[serde(default = "default_marginal_resolution")]
        resolution: usize,
        #[serde(default = "default_rho_nodes")]
        rho_nodes: usize,
    },
    BetaExact {
        #[serde(default = "figure_data")]
        data: Option<BinomialData>,
        #[serde(default = "default_beta")]
        prior: BetaPrior,
        #[serde(default = "default_draws")]
        draws: usize,
    },
    Mcmc {
        #[serde(default = "figure_data")]
        data: Option<BinomialData>,
        prior: FlexiblePriorSpec,
        #[serde(default)]
        mcmc: McmcOptions,
    },
    /// The conjugate row and the fourteen fixed-correlation Gaussian rows.
    Table1 {
        #[serde(default = "figure_data")]
        data: Option<BinomialData>,
        #[serde(default = "default_resolution")]
        resolution: usize,
        #[serde(default = "default_draws")]
        draws: usize,
        /// Also run the sampler on each Gaussian row.
        #[serde(default)]
        mcmc: Option<McmcOptions>,
    },
    /// The four rows with unknown correlation or covariance.
    Table2 {
        #[serde(default = "figure_data")]
        data: Option<BinomialData>,
        #[serde(default)]
        mcmc: McmcOptions,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub label: String,
    pub summary: PosteriorSummary,
    /// Sampler summary of the same row, when requested.
    pub mcmc: Option<PosteriorSummary>,
    /// Printed `(mean, median, lo, hi)`, or `(mean, lo, hi)` for the flexible rows.
    pub printed: Vec<f64>,
    /// `summary.mean` minus the printed mean.
    pub mean_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryOutput {
    pub summary: Option<PosteriorSummary>,
    pub mcmc: Option<McmcSummary>,
    pub rho_mean: Option<f64>,
    pub rho_weights: Option<Vec<(f64, f64)>>,
    pub table: Option<Vec<TableRow>>,
}

impl SummaryOutput {
    fn empty() -> Self {
        SummaryOutput {
            summary: None,
            mcmc: None,
            rho_mean: None,
            rho_weights: None,
            table: None,
        }
    }
}

fn table1_rows(data: &BinomialData, resolution: usize, draws: usize, mcmc: Option<McmcOptions>, seed: u64) -> CliResult<Vec<TableRow>> {
    let conj = beta_conjugate_summary(data, &presets::beta_prior(), draws, seed)?;
    let mut rows = vec![TableRow {
        label: "conjugate".into(),
        mean_deviation: conj.mean - presets::TABLE1_CONJUGATE_PRINTED[0],
        summary: conj,
        mcmc: None,
        printed: presets::TABLE1_CONJUGATE_PRINTED.to_vec(),
    }];
    for (family, rho, printed) in presets::TABLE1_GAUSS_PRINTED {
        let prior = presets::gauss_pair_prior(family, rho);
        let s = posterior_summary_grid(data, &prior, &GridSpec { resolution })?;
        warn_edge_mass(&s);
        let sampled = match mcmc {
            Some(opts) => {
                let vm = match family {
                    VarianceFamily::A => VarianceMode::FixedA,
                    VarianceFamily::B => VarianceMode::FixedB,
                };
                let spec = FlexiblePriorSpec::new(Transformation::None, vm, RhoMode::Fixed(rho));
                Some(posterior_summary_mcmc(data, &spec, &opts.spec(seed))?.delta)
            }
            None => None,
        };
        rows.push(TableRow {
            label: format!("gauss_{}_rho_{rho}", family.label()),
            mean_deviation: s.mean - printed[0],
            summary: s,
            mcmc: sampled,
            printed: printed.to_vec(),
        });
    }
    Ok(rows)
}

/// Prior specifications of the flexible rows, in table order.
pub fn table2_specs() -> [(&'static str, FlexiblePriorSpec); 4] {
    use Transformation::*;
    [
        ("A_unknown_rho", FlexiblePriorSpec::new(None, VarianceMode::FixedA, RhoMode::Uniform)),
        ("B_unknown_rho", FlexiblePriorSpec::new(None, VarianceMode::FixedB, RhoMode::Uniform)),
        ("none_unknown_cov", FlexiblePriorSpec::new(None, VarianceMode::FlatCov, RhoMode::Uniform)),
        ("logit_unknown_cov", FlexiblePriorSpec::new(Logit, VarianceMode::FlatCov, RhoMode::Uniform)),
    ]
}

pub fn summary(cfg: &RunConfig) -> CliResult<Artifacts> {
    let model: SummaryModel = cfg.model()?;
    let seed = cfg.seed();
    let mut out = SummaryOutput::empty();
    match &model {
        SummaryModel::Grid { data, prior, resolution } => {
            let s = posterior_summary_grid(&data_of(data), prior, &GridSpec { resolution: *resolution })?;
            warn_edge_mass(&s);
            out.summary = Some(s);
        }
        SummaryModel::GridRhoMarginal {
            data,
            mean,
            sd,
            resolution,
            rho_nodes,
        } => {
            let m = posterior_summary_grid_rho_marginal(&data_of(data), *mean, *sd, &GridSpec { resolution: *resolution }, *rho_nodes)?;
            out.summary = Some(m.delta);
            out.rho_mean = Some(m.rho_mean);
            out.rho_weights = Some(m.rho_weights);
        }
        SummaryModel::BetaExact { data, prior, draws } => {
            out.summary = Some(beta_conjugate_summary(&data_of(data), prior, *draws, seed)?);
        }
        SummaryModel::Mcmc { data, prior, mcmc } => {
            out.mcmc = Some(posterior_summary_mcmc(&data_of(data), prior, &mcmc.spec(seed))?);
        }
        SummaryModel::Table1 {
            data,
            resolution,
            draws,
            mcmc,
        } => {
            out.table = Some(table1_rows(&data_of(data), *resolution, *draws, *mcmc, seed)?);
        }
        SummaryModel::Table2 { data, mcmc } => {
            let d = data_of(data);
            let mut rows = Vec::new();
            for ((label, spec), printed) in table2_specs().into_iter().zip(presets::TABLE2_PRINTED) {
                let s = posterior_summary_mcmc(&d, &spec, &mcmc.spec(seed))?.delta;
                rows.push(TableRow {
                    label: label.into(),
                    mean_deviation: s.mean - printed[0],
                    summary: s,
                    mcmc: None,
                    printed: printed.to_vec(),
                });
            }
            out.table = Some(rows);
        }
    }
    finish(cfg, &model, &out, vec![])
}

fn default_fig1_resolution() -> usize {
    201
}
fn default_fig4_resolution() -> usize {
    101
}
fn default_fig1_prior() -> ContourPrior {
    ContourPrior::Gaussian(presets::gauss_pair_prior(VarianceFamily::A, 0.0))
}
fn default_panels() -> Vec<PairGaussianPrior> {
    [VarianceFamily::A, VarianceFamily::B]
        .iter()
        .flat_map(|&f| presets::TABLE1_RHOS.iter().map(move |&r| presets::gauss_pair_prior(f, r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Model {
    pub kind: FigureKind,
    #[serde(default = "figure_data")]
    pub data: Option<BinomialData>,
    #[serde(default = "default_fig1_prior")]
    pub prior: ContourPrior,
    #[serde(default = "default_fig1_resolution")]
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig4Model {
    pub kind: FigureKind,
    #[serde(default = "figure_data")]
    pub data: Option<BinomialData>,
    #[serde(default = "default_panels")]
    pub panels: Vec<PairGaussianPrior>,
    #[serde(default = "default_fig4_resolution")]
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourOutput {
    pub files: Vec<String>,
    pub rows_per_file: u64,
}

fn contour_csv(data: &BinomialData, prior: &ContourPrior, resolution: usize, header: [&str; 5]) -> CliResult<Vec<u8>> {
    let rows = contour_grid(data, prior, resolution)?;
    let mut csv = CsvTable::new(&header);
    for r in &rows {
        csv.row(&[Cell::F(r.x), Cell::F(r.y), Cell::F(r.prior), Cell::F(r.lik), Cell::F(r.post)]);
    }
    Ok(csv.finish())
}

fn check_kind(kind: FigureKind, want: FigureKind) -> CliResult<()> {
    if kind != want {
        return Err(CliError::Internal(format!("dispatched {kind:?} to the {want:?} writer")));
    }
    Ok(())
}

pub fn fig1_contours(cfg: &RunConfig) -> CliResult<Artifacts> {
    let model: Fig1Model = cfg.model()?;
    check_kind(model.kind, FigureKind::Fig1Contours)?;
    let bytes = contour_csv(&data_of(&model.data), &model.prior, model.resolution, ["x", "y", "prior", "lik", "post"])?;
    let out = ContourOutput {
        files: vec!["fig1_contours.csv".into()],
        rows_per_file: (model.resolution * model.resolution) as u64,
    };
    finish(cfg, &model, &out, vec![("fig1_contours.csv".into(), bytes)])
}

pub fn fig4_contours(cfg: &RunConfig) -> CliResult<Artifacts> {
    let model: Fig4Model = cfg.model()?;
    check_kind(model.kind, FigureKind::Fig4Contours)?;
    if model.panels.is_empty() {
        return Err(CliError::Config("model.panels is empty".into()));
    }
    let data = data_of(&model.data);
    let mut files = Vec::new();
    for (k, p) in model.panels.iter().enumerate() {
        let bytes = contour_csv(&data, &ContourPrior::Gaussian(*p), model.resolution, ["p0", "p1", "prior", "lik", "post"])?;
        files.push((format!("fig4_contours_{k:02}.csv"), bytes));
    }
    let out = ContourOutput {
        files: files.iter().map(|(n, _)| n.clone()).collect(),
        rows_per_file: (model.resolution * model.resolution) as u64,
    };
    finish(cfg, &model, &out, files)
}
