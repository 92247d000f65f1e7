use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use dpp_lab::{run, Artifacts, CliError, CliResult, RunConfig};

/// Discrepant-posterior diagnostics for Gaussian and Binomial models.
#[derive(Parser, Debug)]
#[command(name = "dpp-lab", version)]
struct Args {
    /// JSON job file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the job's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Does not change any output.
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for result.json and CSV files. Without it the JSON goes to
    /// stdout and CSV-producing jobs are refused.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn execute(args: &Args) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let cfg = RunConfig::parse(&text)?.with_overrides(args.seed, args.threads);
    let threads = cfg.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    log::info!("using {} worker threads", pool.current_num_threads());
    let Artifacts { json, files } = pool.install(|| run(&cfg))?;
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            for (name, bytes) in &files {
                let path = dir.join(name);
                std::fs::write(&path, bytes).map_err(io_err(&path))?;
                log::info!("wrote {}", path.display());
            }
            let path = dir.join("result.json");
            std::fs::write(&path, &json).map_err(io_err(&path))?;
        }
        None if !files.is_empty() => {
            return Err(CliError::Config(format!(
                "{} writes CSV files; pass --out <dir>",
                cfg.command.name()
            )))
        }
        None => {}
    }
    std::io::stdout()
        .write_all(json.as_bytes())
        .map_err(io_err(Path::new("<stdout>")))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DPP_LAB_LOG", "warn")).init();
    let args = Args::parse();
    let outcome = std::panic::catch_unwind(|| execute(&args));
    let err = match outcome {
        Ok(Ok(())) => return ExitCode::SUCCESS,
        Ok(Err(e)) => e,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            CliError::Internal(msg)
        }
    };
    let report = serde_json::to_string(&err.report()).expect("plain strings serialize");
    eprintln!("{report}");
    ExitCode::from(err.exit_code() as u8)
}
