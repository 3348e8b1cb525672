use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use pitchfit_core::harness::{self, NoiseMode, ScenarioSpec, DEFAULT_ALPHA_GRID, DEFAULT_SEED};
use pitchfit_core::{
    CombineMode, ParamSet, PartialAttributeVector, RecommendInputs, Recommendation, ScoreState,
    StrategyLibrary,
};

use crate::api::{self, AppState, LibrarySource};
use crate::error::{parse_json, ServiceError};
use crate::evaluate::{evaluate, EvaluateKind, EvaluateOptions};
use crate::sessions::SessionStore;

#[derive(Debug, Parser)]
#[command(
    name = "pitchfit",
    version,
    about = "Context-aware tactical strategy recommender"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the strategy library for a team state.
    Recommend(RecommendArgs),
    /// Run one part of the evaluation protocol.
    Evaluate(EvaluateArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

fn parse_score_state(s: &str) -> Result<ScoreState, String> {
    match s.to_ascii_lowercase().as_str() {
        "-1" | "losing" => Ok(ScoreState::Losing),
        "0" | "drawing" => Ok(ScoreState::Drawing),
        "1" | "winning" => Ok(ScoreState::Winning),
        _ => Err(format!(
            "`{s}` is not one of -1, 0, 1, losing, drawing, winning"
        )),
    }
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// Team vector (JSON object keyed A1..A14).
    #[arg(long)]
    pub team: PathBuf,
    /// Opponent vector over the same attributes.
    #[arg(long)]
    pub opp: Option<PathBuf>,
    /// Strategy library JSON; defaults to the built-in library.
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Parameter set JSON; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub time_remaining: Option<f64>,
    /// -1/0/1 or losing/drawing/winning.
    #[arg(long, value_parser = parse_score_state, allow_hyphen_values = true)]
    pub score_state: Option<ScoreState>,
    /// Overrides the team's A8 for weighting.
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub combine_mode: Option<CombineMode>,
    /// Also write the recommendation as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvaluateCommand {
    Scenarios,
    Robustness,
    Sensitivity,
    Ablation,
    Pilot,
}

impl From<EvaluateCommand> for EvaluateKind {
    fn from(c: EvaluateCommand) -> Self {
        match c {
            EvaluateCommand::Scenarios => EvaluateKind::Scenarios,
            EvaluateCommand::Robustness => EvaluateKind::Robustness,
            EvaluateCommand::Sensitivity => EvaluateKind::Sensitivity,
            EvaluateCommand::Ablation => EvaluateKind::Ablation,
            EvaluateCommand::Pilot => EvaluateKind::Pilot,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseArg {
    Multiplicative,
    Additive,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub kind: EvaluateCommand,
    /// Scenario fixtures (JSON array); defaults to the shipped fixtures.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Strategy library; defaults to the five canonical templates.
    #[arg(long)]
    pub library: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// Monte Carlo runs per scenario.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "multiplicative")]
    pub noise: NoiseArg,
    /// Comma-separated alpha grid for `sensitivity`.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Directory for report.json and the figure CSVs.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write the report JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "PITCHFIT_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "PITCHFIT_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "PITCHFIT_LIBRARY")]
    pub library: Option<PathBuf>,
    #[arg(long, env = "PITCHFIT_FIXTURES")]
    pub fixtures: Option<PathBuf>,
    #[arg(long, env = "PITCHFIT_SESSIONS_DIR", default_value = "sessions")]
    pub sessions_dir: PathBuf,
}

fn read(path: &Path) -> Result<String, ServiceError> {
    std::fs::read_to_string(path).map_err(|e| {
        ServiceError::validation(path.display().to_string(), format!("cannot read file: {e}"))
    })
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T, ServiceError> {
    parse_json(&read(path)?).map_err(|mut e| {
        e.field = Some(match e.field {
            Some(f) => format!("{}:{f}", path.display()),
            None => path.display().to_string(),
        });
        e
    })
}

fn load_library(
    path: Option<&Path>,
    default: StrategyLibrary,
) -> Result<StrategyLibrary, ServiceError> {
    match path {
        Some(p) => StrategyLibrary::from_json(&read(p)?)
            .map_err(|e| ServiceError::validation(p.display().to_string(), e.to_string())),
        None => Ok(default),
    }
}

fn load_fixtures(path: Option<&Path>) -> Result<Vec<ScenarioSpec>, ServiceError> {
    match path {
        Some(p) => {
            let specs: Vec<ScenarioSpec> = load(p)?;
            for spec in &specs {
                spec.validate().map_err(|e| {
                    let mut err = ServiceError::from(e);
                    err.field = Some(format!(
                        "{}:{}",
                        p.display(),
                        err.field.unwrap_or_else(|| spec.name.clone())
                    ));
                    err
                })?;
            }
            Ok(specs)
        }
        None => Ok(harness::default_scenarios()),
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), ServiceError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| ServiceError::io(e.to_string()))?;
    }
    std::fs::write(path, body)
        .map_err(|e| ServiceError::io(format!("cannot write {}: {e}", path.display())))
}

/// Builds the request the `recommend` flags describe.
pub fn recommend_inputs(args: &RecommendArgs) -> Result<RecommendInputs, ServiceError> {
    let team: PartialAttributeVector = load(&args.team)?;
    let opponent: Option<PartialAttributeVector> = args.opp.as_deref().map(load).transpose()?;
    let mut params: ParamSet = match &args.config {
        Some(p) => load(p)?,
        None => ParamSet::default(),
    };
    if let Some(alpha) = args.alpha {
        params.alpha = alpha;
    }
    if let Some(mode) = args.combine_mode {
        params.combine_mode = mode;
    }
    let mut inputs = RecommendInputs::new(team).with_params(params);
    inputs.opponent = opponent;
    if let Some(t) = args.time_remaining {
        inputs.state.time_remaining = t;
    }
    if let Some(s) = args.score_state {
        inputs.state.score_state = s;
    }
    inputs.state.energy = args.energy;
    Ok(inputs)
}

pub fn format_recommendation(rec: &Recommendation) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4}  {:<34} {:>8} {:>8} {:>8}",
        "rank", "strategy", "d_eucl", "d_adapt", "d_comb"
    );
    for e in &rec.entries {
        let _ = writeln!(
            out,
            "{:>4}  {:<34} {:>8.4} {:>8.4} {:>8.4}",
            e.rank, e.name, e.d_eucl, e.d_adapt, e.d_comb
        );
    }
    let _ = writeln!(out, "\nrecommended: {}", rec.chosen);
    let _ = writeln!(out, "diagnostics (strategy minus team):");
    for d in &rec.diagnostics.deltas {
        let _ = writeln!(
            out,
            "  {:<4} {:<26} team {:.2}  strategy {:.2}  {:+.2}  {:?}",
            d.attribute.code(),
            d.attribute.name(),
            d.team,
            d.strategy,
            d.delta,
            d.class
        );
    }
    out
}

fn run_recommend(args: &RecommendArgs) -> Result<ExitCode, ServiceError> {
    let inputs = recommend_inputs(args)?;
    let library = load_library(args.library.as_deref(), StrategyLibrary::builtin_default())?;
    let rec = inputs.rank(&library)?;
    print!("{}", format_recommendation(&rec));
    if let Some(path) = &args.json {
        let body =
            serde_json::to_string_pretty(&rec).map_err(|e| ServiceError::io(e.to_string()))?;
        write_file(path, &body)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_evaluate(args: &EvaluateArgs) -> Result<ExitCode, ServiceError> {
    let fixtures = load_fixtures(args.fixtures.as_deref())?;
    let library = load_library(
        args.library.as_deref(),
        StrategyLibrary::builtin_canonical(),
    )?;
    let options = EvaluateOptions {
        seed: args.seed,
        sigma: args.sigma,
        k: args.k,
        mode: match args.noise {
            NoiseArg::Multiplicative => NoiseMode::Multiplicative,
            NoiseArg::Additive => NoiseMode::Additive,
        },
        alphas: args
            .alphas
            .clone()
            .unwrap_or_else(|| DEFAULT_ALPHA_GRID.to_vec()),
    };
    let evaluation = evaluate(args.kind.into(), &options, &fixtures, &library)?;
    print!("{}", evaluation.summary);
    let report = serde_json::to_string_pretty(&evaluation.report)
        .map_err(|e| ServiceError::io(e.to_string()))?;
    if let Some(dir) = &args.out_dir {
        write_file(&dir.join("report.json"), &report)?;
        harness::export_figure_data(&evaluation.figures, dir)?;
    }
    if let Some(path) = &args.json {
        write_file(path, &report)?;
    }
    Ok(if evaluation.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_serve(args: &ServeArgs) -> Result<ExitCode, ServiceError> {
    let source = match &args.library {
        Some(p) => LibrarySource::File(p.clone()),
        None => LibrarySource::Builtin,
    };
    let fixtures = load_fixtures(args.fixtures.as_deref())?;
    let sessions = SessionStore::open(&args.sessions_dir).map_err(|e| {
        ServiceError::validation(args.sessions_dir.display().to_string(), e.to_string())
    })?;
    let state = AppState::new(
        source,
        fixtures,
        StrategyLibrary::builtin_canonical(),
        sessions,
    )?;
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| ServiceError::validation("host", format!("{e}")))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| ServiceError::io(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| ServiceError::io(format!("cannot bind {addr}: {e}")))?;
        log::info!("listening on {addr}");
        axum::serve(listener, api::router(Arc::new(state)))
            .await
            .map_err(|e| ServiceError::io(e.to_string()))
    })?;
    Ok(ExitCode::SUCCESS)
}

/// Runs a parsed command line. Input errors exit with 2, failed scenario
/// checks with 1.
pub fn run(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Recommend(args) => run_recommend(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Serve(args) => run_serve(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if err.error == "io" {
                ExitCode::FAILURE
            } else {
                ExitCode::from(2)
            }
        }
    }
}
