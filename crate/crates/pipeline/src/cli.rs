//! Command-line entry point. Exit codes: 0 success, 1 runtime failure,
//! 2 usage or configuration error.

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::datastore::{RunStore, Stage};
use crate::executor::{Executor, SubprocessBackend};
use crate::genclient::decontam::{NgramIndex, DEFAULT_NGRAM};
use crate::genclient::{GenClient, HttpTransport};
use crate::pipeline::{
    fixture_services, format_strategy_table, synthetic_comparison, Fixture, Pipeline, RunOptions,
    Services, SyntheticSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mutval",
    version,
    about = "Rank sampled code by mutual test verification and build preference pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read seed snippets from the corpus.
    Seed(Common),
    /// Extract concepts, write tasks and sample codes and tests.
    Generate(Common),
    /// Run every code against every test.
    Validate(Common),
    /// Score codes and tests.
    Rank(Common),
    /// Time codes on the credible tests.
    Time(Common),
    /// Select preference pairs and export them.
    Pairs(Common),
    /// Correlate strategy scores with oracle accuracy.
    Eval(EvalArgs),
    /// Run several stages in order.
    Run(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "default")]
    pub run_id: String,
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Directory with corpus/, responses.json and optionally outcomes.json.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Seed for the random baseline.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for the pairs and eval files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory holding run directories.
    #[arg(long)]
    pub runs_dir: Option<PathBuf>,
    /// Process at most this many problems per stage.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated stages; all by default.
    #[arg(long, value_delimiter = ',')]
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Compare strategies on this many planted graphs instead of stored
    /// problems.
    #[arg(long)]
    pub synthetic: Option<usize>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load_config(c: &Common) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &c.config {
        Some(p) => PipelineConfig::load(p).map_err(|e| Failure::Usage(e.to_string()))?,
        None => PipelineConfig::default(),
    };
    cfg.apply_env(|k| std::env::var(k).ok());
    if let Some(p) = c.parallelism {
        cfg.parallelism = p;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn build_services(
    cfg: &PipelineConfig,
    c: &Common,
    stages: &[Stage],
) -> Result<(Services, PathBuf), Failure> {
    let needs = |s: Stage| stages.contains(&s);
    let (mut services, corpus) = match &c.fixture {
        Some(dir) => {
            let fx = Fixture::load(dir).map_err(|e| Failure::Usage(e.to_string()))?;
            (fixture_services(cfg, &fx)?, fx.corpus_dir)
        }
        None => {
            let mut s = Services::default();
            if needs(Stage::Generate) {
                if cfg.generation.endpoint.is_empty() {
                    return Err(Failure::Usage(
                        "generate needs generation.endpoint, GEN_ENDPOINT or --fixture".into(),
                    ));
                }
                let transport = HttpTransport::new(
                    cfg.generation.endpoint.clone(),
                    cfg.api_key.clone(),
                    Duration::from_millis(cfg.generation.request_timeout_ms),
                );
                s.gen = Some(GenClient::new(Arc::new(transport), cfg.generation.clone())?);
            }
            (s, cfg.paths.corpus_dir.clone())
        }
    };
    if services.executor.is_none()
        && [Stage::Validate, Stage::Time, Stage::Eval]
            .into_iter()
            .any(needs)
    {
        let backend = SubprocessBackend::new(cfg.paths.harness.clone())
            .map_err(|e| Failure::Usage(e.to_string()))?;
        services.executor = Some(Executor::new(
            Arc::new(backend),
            cfg.limits,
            cfg.parallelism,
        ));
    }
    if let Some(path) = &cfg.paths.decontam_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        services.decontam = Some(NgramIndex::from_text(&text, DEFAULT_NGRAM));
    }
    Ok((services, corpus))
}

fn run_stages(c: &Common, stages: Vec<Stage>) -> Result<(), Failure> {
    let cfg = load_config(c)?;
    let (services, corpus_dir) = build_services(&cfg, c, &stages)?;
    let runs_dir = c
        .runs_dir
        .clone()
        .unwrap_or_else(|| cfg.paths.runs_dir.clone());
    let mut store = RunStore::open(&runs_dir, &c.run_id, &cfg.fingerprint())?;
    let opts = RunOptions {
        stages,
        limit: c.limit,
        seed: c.seed,
        corpus_dir,
        out_dir: c.out.clone().unwrap_or_else(|| cfg.paths.out_dir.clone()),
    };
    let summary = Pipeline {
        config: &cfg,
        services: &services,
        store: &mut store,
    }
    .run(&opts)?;
    print!("{summary}");
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Seed(c) => run_stages(&c, vec![Stage::Seed]),
        Command::Generate(c) => run_stages(&c, vec![Stage::Generate]),
        Command::Validate(c) => run_stages(&c, vec![Stage::Validate]),
        Command::Rank(c) => run_stages(&c, vec![Stage::Rank]),
        Command::Time(c) => run_stages(&c, vec![Stage::Time]),
        Command::Pairs(c) => run_stages(&c, vec![Stage::Pairs]),
        Command::Eval(e) => match e.synthetic {
            Some(0) => Err(Failure::Usage(
                "--synthetic needs at least one graph".into(),
            )),
            Some(n) => {
                let cfg = load_config(&e.common)?;
                let spec = SyntheticSpec {
                    n_graphs: n,
                    ..SyntheticSpec::default()
                };
                let rows = synthetic_comparison(&spec, &cfg.scoring, e.common.seed)?;
                print!("{}", format_strategy_table(&rows));
                Ok(())
            }
            None => run_stages(&e.common, vec![Stage::Eval]),
        },
        Command::Run(r) => {
            let stages = if r.stages.is_empty() {
                Stage::ALL.to_vec()
            } else {
                r.stages
            };
            run_stages(&r.common, stages)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_RUNTIME
        }
    }
}
