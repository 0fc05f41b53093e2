use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use ccdrift::pipeline::{self, RunConfig};
use clap::{Args, Parser, Subcommand};

/// Flag outdated code comments from version-control history.
#[derive(Debug, Parser)]
#[command(name = "ccdrift", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every command. Flags override the config file.
#[derive(Debug, Args)]
struct Common {
    /// `key = value` run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repository to read; may repeat.
    #[arg(long, global = true)]
    repo: Vec<PathBuf>,
    /// Comma-separated source file extensions.
    #[arg(long, global = true)]
    ext: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Work directory holding the dataset, model bundle and reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Similarity-shift threshold of the rule baseline.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Training share of the train/test split.
    #[arg(long, global = true)]
    split: Option<f64>,
    /// Pick forest hyperparameters by grid search with cross-validation.
    #[arg(long, global = true)]
    grid_search: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine labeled pair changes from the repositories' history.
    Mine,
    /// Train the embedding and forest on a mined dataset.
    Train {
        /// Dataset file; defaults to the work directory's dataset.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Score the pair changes of a commit range with a trained bundle.
    Detect {
        /// `A..B`, or a single commit; defaults to HEAD.
        #[arg(long, default_value = "HEAD")]
        range: String,
        /// Model bundle directory; defaults to the work directory's bundle.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Importance ranking, reduced-feature retrain and calibration tables.
    Report {
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn run_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text)?;
    }
    if !c.repo.is_empty() {
        cfg.repos = c.repo.clone();
    }
    if let Some(ext) = &c.ext {
        cfg.set("ext", ext)?;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &c.out {
        cfg.out = out.clone();
    }
    if let Some(t) = c.threshold {
        cfg.rule_threshold = t;
    }
    if let Some(s) = c.split {
        cfg.split = s;
    }
    cfg.grid_search |= c.grid_search;
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &RunConfig, command: &Command) -> Result<()> {
    match command {
        Command::Mine => {
            let (records, summary) = pipeline::cmd_mine(cfg)?;
            print!("{}", pipeline::dataset_counts(&records));
            println!(
                "{} commits scanned, {} skipped, {} files unparsed; wrote {}",
                summary.commits,
                summary.skipped_commits,
                summary.unparsed_files,
                cfg.dataset_path().display()
            );
        }
        Command::Train { dataset } => {
            let path = dataset.clone().unwrap_or_else(|| cfg.dataset_path());
            let summary = pipeline::cmd_train(cfg, &path)?;
            print!("{}", summary.render());
            println!("wrote {}", cfg.bundle_dir().display());
        }
        Command::Detect { range, model } => {
            let [repo] = cfg.repos.as_slice() else {
                anyhow::bail!("detect needs exactly one --repo");
            };
            let bundle = model.clone().unwrap_or_else(|| cfg.bundle_dir());
            let report = pipeline::cmd_detect(&bundle, repo, Some(range), cfg)?;
            print!("{}", report.render());
            let path = cfg.report_dir().join("detect.json");
            std::fs::create_dir_all(cfg.report_dir())?;
            std::fs::write(&path, pipeline::report_json(&report)?)?;
        }
        Command::Report { model } => {
            let bundle = model.clone().unwrap_or_else(|| cfg.bundle_dir());
            let a = pipeline::cmd_report(&bundle, cfg)?;
            print!("{}", a.importance_table());
            print!("{}", a.subset_text());
            print!("{}", a.calibration_table());
            println!("wrote {}", cfg.report_dir().display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match run_config(&cli.common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match execute(&cfg, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
