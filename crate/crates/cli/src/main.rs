//! `hitgate` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration
//! error, 3 input parse failure.

mod commands;
mod config;
mod output;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use hitgate::docking::{DockingError, KlReference, TriageStats};
use hitgate::hitfilter::FilterError;
use hitgate::io::InputError;
use hitgate::metrics::MetricError;

#[derive(Debug, Parser)]
#[command(
    name = "hitgate",
    version,
    about = "Hit-likeness filtering, generation metrics and docking analytics"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration with [filter], [metrics], [docking] and [triage] tables.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set filter.mw_max=400`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, global = true, default_value = "hitgate-out", value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Emit per-molecule measured values.
    #[arg(long, global = true)]
    pub explain: bool,
    /// Keep only the largest fragment of multi-fragment inputs.
    #[arg(long, global = true)]
    pub largest_fragment: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validity, uniqueness and novelty of a SMILES set.
    Validate {
        input: PathBuf,
        /// Training set for novelty.
        #[arg(long)]
        training: Option<PathBuf>,
    },
    /// Apply the hit-like filter cascade.
    Filter { input: PathBuf },
    /// Generation metrics against a reference set.
    Metrics {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        training: Option<PathBuf>,
        /// Feature file for the generated set (CSV or binary).
        #[arg(long, requires = "ref_features")]
        gen_features: Option<PathBuf>,
        #[arg(long, requires = "gen_features")]
        ref_features: Option<PathBuf>,
        /// Skip the Fréchet distance unless feature files are given.
        #[arg(long)]
        no_builtin_features: bool,
        /// Include self-pairs in internal diversity.
        #[arg(long)]
        include_self_pairs: bool,
    },
    /// Docking-score tables and histograms.
    Docking {
        scores: PathBuf,
        #[arg(long, value_enum)]
        kl_reference: Option<KlRefArg>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Rank novel, potent candidates.
    Triage {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        binders: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        /// Target whose scores rank the candidates; needed when several are present.
        #[arg(long)]
        target: Option<String>,
        /// Restrict candidate scores to this cohort.
        #[arg(long)]
        cohort: Option<String>,
        /// Cohort supplying the cutoff statistics with `--stats reference`.
        #[arg(long, default_value = hitgate::docking::REFERENCE_FULL)]
        reference_cohort: String,
        #[arg(long, value_enum)]
        stats: Option<StatsArg>,
        #[arg(long)]
        td_min: Option<f64>,
        #[arg(long)]
        z: Option<f64>,
        #[arg(long)]
        max_candidates: Option<usize>,
        /// CSV with a `value` column: reference activity distribution to plot.
        #[arg(long)]
        activities: Option<PathBuf>,
        #[arg(long, requires = "activities")]
        highlight_value: Option<f64>,
        #[arg(long, default_value = "candidate")]
        highlight_label: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KlRefArg {
    Full,
    Hitlike,
}

impl From<KlRefArg> for KlReference {
    fn from(a: KlRefArg) -> Self {
        match a {
            KlRefArg::Full => KlReference::Full,
            KlRefArg::Hitlike => KlReference::Hitlike,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatsArg {
    Candidates,
    Reference,
}

impl From<StatsArg> for TriageStats {
    fn from(a: StatsArg) -> Self {
        match a {
            StatsArg::Candidates => TriageStats::Candidates,
            StatsArg::Reference => TriageStats::Reference,
        }
    }
}

impl Command {
    fn input_paths(&self) -> Vec<&PathBuf> {
        match self {
            Command::Validate { input, training } => {
                std::iter::once(input).chain(training).collect()
            }
            Command::Filter { input } => vec![input],
            Command::Metrics {
                generated,
                reference,
                training,
                gen_features,
                ref_features,
                ..
            } => [
                Some(generated),
                Some(reference),
                training.as_ref(),
                gen_features.as_ref(),
                ref_features.as_ref(),
            ]
            .into_iter()
            .flatten()
            .collect(),
            Command::Docking { scores, .. } => vec![scores],
            Command::Triage {
                candidates,
                binders,
                scores,
                activities,
                ..
            } => [
                Some(candidates),
                Some(binders),
                Some(scores),
                activities.as_ref(),
            ]
            .into_iter()
            .flatten()
            .collect(),
        }
    }
}

fn is_parse_failure(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        if let Some(i) = e.downcast_ref::<InputError>() {
            return matches!(i, InputError::Malformed { .. });
        }
        if let Some(FilterError::Input(InputError::Malformed { .. })) =
            e.downcast_ref::<FilterError>()
        {
            return true;
        }
        if let Some(d) = e.downcast_ref::<DockingError>() {
            return matches!(
                d,
                DockingError::MalformedRow { .. } | DockingError::UnknownHeader(_)
            );
        }
        if let Some(MetricError::FeatureFile(_)) = e.downcast_ref::<MetricError>() {
            return true;
        }
        e.downcast_ref::<commands::ParseFailure>().is_some()
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    for path in cli.command.input_paths() {
        if !path.exists() {
            Cli::command()
                .error(
                    clap::error::ErrorKind::ValueValidation,
                    format!("input not found: {}", path.display()),
                )
                .exit();
        }
    }
    if cli.common.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.common.threads)
            .build_global()
        {
            log::warn!("thread pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err
                .chain()
                .any(|e| e.downcast_ref::<config::ConfigError>().is_some())
            {
                ExitCode::from(2)
            } else if is_parse_failure(&err) {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
