mod evaluate;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spg_keyframes::features_io::{load_features, to_frame_index, FeatureFileHeader};
use spg_keyframes::reconstruct::{glr_residual, solve_glr, SampledSignal};
use spg_keyframes::verify::{run_verify, VerifyConfig};
use spg_keyframes::{
    budgeted_sample, build_spg, partition_sample, PathGraph, SamplerParams, SelectionResult,
};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

/// Keyframe extraction by Gershgorin disc alignment on a similarity path graph.
#[derive(Parser, Debug)]
#[command(name = "spgkf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select keyframes from a feature file.
    Sample(SampleArgs),
    /// Score automatic summaries against user summaries.
    Evaluate(evaluate::EvaluateArgs),
    /// Run the randomized property suites.
    Verify(VerifyArgs),
    /// Sample a signal on the graph and reconstruct it from the samples.
    Reconstruct(ReconstructArgs),
}

#[derive(Args, Debug)]
#[group(id = "mode", required = true, multiple = false)]
struct Mode {
    /// Maximum number of keyframes; the threshold is found by binary search.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), group = "mode")]
    budget: Option<u64>,
    /// Eigenvalue threshold in (0, 1).
    #[arg(long, group = "mode")]
    threshold: Option<f64>,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// SPGF feature file, or CSV with a `.csv` extension.
    features: PathBuf,
    #[command(flatten)]
    mode: Mode,
    /// Smoothness weight of the graph regularizer.
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    /// Width at which the threshold search stops.
    #[arg(long, default_value_t = 1e-7)]
    epsilon: f64,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Write here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Video id for the summary; defaults to the feature file stem.
    #[arg(long)]
    video: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    max_nodes: usize,
    #[arg(long, hide = true)]
    inject_radius_fault: Option<f64>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Ground-truth signal: one value per feature row, whitespace separated.
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct SampleOutput {
    video: String,
    frame_indices: Vec<u64>,
    #[serde(rename = "T_used")]
    t_used: Option<f64>,
    budget_infeasible: bool,
    subgraphs: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct ReconstructOutput {
    samples: Vec<usize>,
    #[serde(rename = "T_used")]
    t_used: Option<f64>,
    x: Vec<f64>,
    rmse: f64,
    glr: f64,
    residual: f64,
}

/// Failure class of a command, mapped to the process exit code.
enum Failure {
    Data(anyhow::Error),
    Violation,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Sample(args) => run_sample(&args).map_err(Failure::from),
        Command::Evaluate(args) => evaluate::run(&args).map_err(Failure::from),
        Command::Verify(args) => run_verify_cmd(&args),
        Command::Reconstruct(args) => run_reconstruct(&args).map_err(Failure::from),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
        Err(Failure::Violation) => ExitCode::from(EXIT_VIOLATION),
    }
}

fn select(graph: &PathGraph, args: &GraphArgs) -> Result<SelectionResult> {
    match (args.mode.budget, args.mode.threshold) {
        (Some(c), None) => {
            let c = usize::try_from(c).context("budget too large")?;
            Ok(budgeted_sample(graph, c, args.mu, args.epsilon)?)
        }
        (None, Some(t)) => Ok(partition_sample(graph, &SamplerParams::new(args.mu, t)?)),
        _ => unreachable!("clap enforces exactly one mode"),
    }
}

fn load_graph(args: &GraphArgs) -> Result<(PathGraph, FeatureFileHeader)> {
    let (features, header) = load_features(&args.features)?;
    let graph = build_spg(&features)
        .with_context(|| format!("building graph for {}", args.features.display()))?;
    Ok((graph, header))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn run_sample(args: &SampleArgs) -> Result<()> {
    let (graph, header) = load_graph(&args.graph)?;
    let result = select(&graph, &args.graph)?;
    let video = match &args.video {
        Some(v) => v.clone(),
        None => args
            .graph
            .features
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .context("feature path has no file stem; pass --video")?,
    };
    let frame_indices = result
        .samples
        .iter()
        .map(|&row| to_frame_index(row, &header))
        .collect::<spg_keyframes::Result<Vec<_>>>()?;
    if result.budget_infeasible {
        eprintln!(
            "warning: budget not reachable; returning the sparsest selection found ({} keyframes)",
            result.count()
        );
    }

    let text = match args.format {
        Format::Json => {
            let out = SampleOutput {
                video,
                frame_indices,
                t_used: result.threshold,
                budget_infeasible: result.budget_infeasible,
                subgraphs: result.subgraphs.iter().map(|s| [s.first, s.last]).collect(),
            };
            serde_json::to_string_pretty(&out)? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("row,frame_index\n");
            for (row, frame) in result.samples.iter().zip(&frame_indices) {
                s.push_str(&format!("{row},{frame}\n"));
            }
            s
        }
    };
    emit(args.output.as_deref(), &text)
}

fn run_verify_cmd(args: &VerifyArgs) -> std::result::Result<(), Failure> {
    if args.trials == 0 {
        return Err(Failure::Data(anyhow::anyhow!("--trials must be positive")));
    }
    let mut cfg = VerifyConfig::new(args.trials, args.seed, args.max_nodes);
    if let Some(f) = args.inject_radius_fault {
        cfg = cfg.with_radius_fault(f);
    }
    let mut failed = false;
    for report in run_verify(&cfg) {
        let status = if report.passed() { "PASS" } else { "FAIL" };
        print!("{status}  {:<16} checked {}", report.name, report.checked);
        if report.skipped > 0 {
            print!(", skipped {}", report.skipped);
        }
        if let Some(note) = &report.note {
            print!(" ({note})");
        }
        println!();
        if let Some(v) = &report.violation {
            failed = true;
            println!("      trial {}: {}", v.trial, v.message);
            println!("      instance: {}", v.instance);
        }
    }
    if failed {
        Err(Failure::Violation)
    } else {
        Ok(())
    }
}

fn run_reconstruct(args: &ReconstructArgs) -> Result<()> {
    let (graph, _) = load_graph(&args.graph)?;
    let text = fs::read_to_string(&args.signal)
        .with_context(|| format!("reading {}", args.signal.display()))?;
    let signal = text
        .split_whitespace()
        .map(|v| {
            v.parse::<f64>()
                .with_context(|| format!("bad signal value '{v}'"))
        })
        .collect::<Result<Vec<_>>>()?;
    if signal.len() != graph.n_nodes() {
        bail!(
            "signal has {} values, graph has {} nodes",
            signal.len(),
            graph.n_nodes()
        );
    }
    let result = select(&graph, &args.graph)?;
    let obs = SampledSignal::observe(&result.selection, &signal)?;
    let x = solve_glr(&graph, &obs, args.graph.mu)?;
    let rmse = (x
        .iter()
        .zip(&signal)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / x.len() as f64)
        .sqrt();
    let out = ReconstructOutput {
        samples: result.samples,
        t_used: result.threshold,
        rmse,
        glr: graph.glr(&x),
        residual: glr_residual(&graph, &obs, args.graph.mu, &x)?,
        x,
    };
    emit(
        args.output.as_deref(),
        &(serde_json::to_string_pretty(&out)? + "\n"),
    )
}
