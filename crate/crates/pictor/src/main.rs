use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pictor::config::{load_config, FileConfig};
use pictor::corpus::{synthesize_corpus, SynthOptions};
use pictor::evalrun::{evaluate_entries, load_entries, oracle_for};
use pictor::imageio::{load_png, save_png};
use pictor::manifest::{
    annotations_path_for, image_ref_for, read_annotations_jsonl, read_items_jsonl,
    read_manifest,
};
use pictor::remote::{ChatClient, RemoteGroundingBackend, RemoteOptions};
use pictor::scripted::load_script;
use pictor::solver::{run_bench, solve, AgentSource, BenchOptions, JudgeKind};
use pictor_core::bench::summarize;
use pictor_core::grounding::{Axis, GroundingBackend, OffsetBackend, OracleBackend};
use pictor_core::tools::{
    add_auxiliary_line, connect_points, construct_parallel, construct_perpendicular,
    crop_subfigure, magnify_region, mask_by_legend, AxisWindow, GeomDiagram, LineRef,
    MaskMode, ToolConfig, ToolOutput, ToolRegistry,
};
use pictor_core::workflow::RunConfig;
use pictor_core::RasterImage;

/// Structured-image reasoning toolkit: synthesize annotated charts, evaluate
/// grounding, apply visual tools, and run the multi-agent solver.
#[derive(Parser)]
#[command(name = "pictor", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic corpus of annotated chart images.
    Synth(SynthArgs),
    /// Score a grounding backend against a corpus manifest.
    GroundEval(GroundEvalArgs),
    /// Apply one visual tool to an image and save the result.
    Tool(ToolArgs),
    /// Answer a question about an image with the full agent loop.
    Solve(SolveArgs),
    /// Run a benchmark file and report accuracy and critic behaviour.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of single-panel charts; composites are added at one per five.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMode {
    Oracle,
    Remote,
}

#[derive(Args)]
struct RemoteFlags {
    /// Config file (defaults to ./pictor.toml when present).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Chat-completions endpoint URL.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long)]
    token_env: Option<String>,
    #[arg(long)]
    timeout_secs: Option<u64>,
    #[arg(long)]
    max_retries: Option<u32>,
}

impl RemoteFlags {
    fn resolve(&self, file: &FileConfig) -> Result<RemoteOptions> {
        let defaults = RemoteOptions::default();
        let endpoint = self
            .endpoint
            .clone()
            .or_else(|| file.remote.endpoint.clone())
            .ok_or_else(|| usage("remote mode needs --endpoint or [remote].endpoint"))?;
        let model = self
            .model
            .clone()
            .or_else(|| file.remote.model.clone())
            .ok_or_else(|| usage("remote mode needs --model or [remote].model"))?;
        Ok(RemoteOptions {
            endpoint,
            model,
            token_env: self.token_env.clone().or_else(|| file.remote.token_env.clone()),
            timeout_secs: self
                .timeout_secs
                .or(file.remote.timeout_secs)
                .unwrap_or(defaults.timeout_secs),
            max_retries: self
                .max_retries
                .or(file.remote.max_retries)
                .unwrap_or(defaults.max_retries),
        })
    }
}

#[derive(Args)]
struct GroundEvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = EvalMode::Oracle)]
    mode: EvalMode,
    /// Evaluate only the first N manifest entries.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Shift oracle answers diagonally by this many pixels (robustness probe).
    #[arg(long, default_value_t = 0.0)]
    perturb_px: f64,
    /// Write the report as JSON here as well as printing the table.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    remote: RemoteFlags,
}

#[derive(Args)]
struct ToolArgs {
    #[arg(long)]
    image: PathBuf,
    /// Annotation sidecar; defaults to the image path with `.jsonl`.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Tool name or alias, e.g. `mask_by_legend` or `Region_Magnification`.
    #[arg(long)]
    tool: String,
    /// Tool arguments as key=value, repeatable.
    #[arg(long = "arg", value_name = "KEY=VALUE")]
    args: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    /// Write the grounding provenance JSON here.
    #[arg(long)]
    provenance: Option<PathBuf>,
}

#[derive(Args)]
struct EngineFlags {
    #[arg(long)]
    max_steps: Option<u32>,
    #[arg(long)]
    max_rounds: Option<u32>,
    #[arg(long)]
    parse_retries: Option<u32>,
}

impl EngineFlags {
    fn resolve(&self, file: &FileConfig) -> RunConfig {
        let mut cfg = RunConfig::default();
        if let Some(v) = self.max_steps.or(file.engine.max_steps) {
            cfg.engine.max_steps = v;
        }
        if let Some(v) = self.parse_retries.or(file.engine.parse_retries) {
            cfg.engine.parse_retries = v;
        }
        if let Some(v) = self.max_rounds.or(file.engine.max_rounds) {
            cfg.max_rounds = v;
        }
        cfg
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    question: String,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// `scripted:<script.json>` or `remote`.
    #[arg(long)]
    backend: String,
    /// Write the full run result (trace, critiques, answer) as JSON.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineFlags,
    #[command(flatten)]
    remote: RemoteFlags,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum JudgeFlag {
    Offline,
    Remote,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark items, one JSON object per line.
    #[arg(long)]
    items: PathBuf,
    /// `scripted:<dir>` (one `{id}.json` script per item) or `remote`.
    #[arg(long)]
    backend: String,
    #[arg(long, value_enum, default_value_t = JudgeFlag::Offline)]
    judge: JudgeFlag,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Exit nonzero when accuracy lands below this.
    #[arg(long)]
    min_accuracy: Option<f64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    engine: EngineFlags,
    #[command(flatten)]
    remote: RemoteFlags,
}

/// Errors that should exit with the usage code instead of the failure code.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: &str) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::GroundEval(args) => cmd_ground_eval(args),
        Command::Tool(args) => cmd_tool(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode> {
    let summary = synthesize_corpus(
        &args.out,
        &SynthOptions { n_singles: args.n, seed: args.seed },
    )?;
    println!(
        "wrote {} singles and {} composites; manifest at {}",
        summary.singles,
        summary.composites,
        summary.manifest_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_ground_eval(args: GroundEvalArgs) -> Result<ExitCode> {
    let manifest = read_manifest(&args.manifest)?;
    let dir = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let entries = load_entries(&dir, &manifest, args.limit)?;

    let report = match args.mode {
        EvalMode::Oracle => {
            let oracle = oracle_for(&entries);
            if args.perturb_px > 0.0 {
                let shifted = OffsetBackend::diagonal(oracle, args.perturb_px);
                evaluate_entries(&entries, &shifted, args.jobs)
            } else {
                evaluate_entries(&entries, &oracle, args.jobs)
            }
        }
        EvalMode::Remote => {
            let file = load_config(args.remote.config.as_deref())?;
            let options = args.remote.resolve(&file)?;
            let backend = RemoteGroundingBackend::new(ChatClient::new(options)?);
            evaluate_entries(&entries, &backend, args.jobs)
        }
    }
    .map_err(|e| anyhow!("grounding evaluation: {e}"))?;

    print!("{}", report.to_table());
    if let Some(path) = args.report {
        std::fs::write(&path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_kv(args: &[String]) -> Result<Vec<(String, String)>> {
    args.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| usage(&format!("argument '{kv}' is not key=value")))
        })
        .collect()
}

fn lookup<'a>(kv: &'a [(String, String)], key: &str) -> Result<&'a str> {
    kv.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| usage(&format!("tool needs --arg {key}=...")))
}

fn lookup_opt<'a>(kv: &'a [(String, String)], key: &str) -> Option<&'a str> {
    kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn parse_num(kv: &[(String, String)], key: &str) -> Result<f64> {
    let raw = lookup(kv, key)?;
    raw.parse::<f64>()
        .map_err(|_| usage(&format!("--arg {key}={raw} is not a number")))
}

fn parse_num_opt(kv: &[(String, String)], key: &str) -> Result<Option<f64>> {
    match lookup_opt(kv, key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<f64>()
            .map(Some)
            .map_err(|_| usage(&format!("--arg {key}={raw} is not a number"))),
    }
}

fn run_named_tool(
    name: &str,
    kv: &[(String, String)],
    image: &RasterImage,
    image_ref: &str,
    oracle: &OracleBackend,
    annotations: &[pictor_core::ElementAnnotation],
) -> Result<ToolOutput> {
    let cfg = ToolConfig::default();
    let registry = ToolRegistry::standard();
    let spec = registry
        .get(name)
        .ok_or_else(|| usage(&format!("unknown tool '{name}'; try one of: {}", registry.names().join(", "))))?;
    let backend: &dyn GroundingBackend = oracle;

    let output = match spec.name {
        "Subfigure_Cropping" => {
            crop_subfigure(image, image_ref, lookup(kv, "target")?, backend, &cfg)
        }
        "Region_Magnification" => {
            let window = AxisWindow {
                x: match (parse_num_opt(kv, "x_start")?, parse_num_opt(kv, "x_end")?) {
                    (Some(a), Some(b)) => Some((a, b)),
                    (None, None) => None,
                    _ => bail!(usage("x_start and x_end must be given together")),
                },
                y: match (parse_num_opt(kv, "y_start")?, parse_num_opt(kv, "y_end")?) {
                    (Some(a), Some(b)) => Some((a, b)),
                    (None, None) => None,
                    _ => bail!(usage("y_start and y_end must be given together")),
                },
            };
            magnify_region(image, image_ref, &window, parse_num(kv, "scale")?, backend, &cfg)
        }
        "Adding_Auxiliary_Lines" => {
            let axis = match lookup(kv, "axis")? {
                "x" | "X" => Axis::X,
                "y" | "Y" => Axis::Y,
                other => bail!(usage(&format!("axis must be x or y, got '{other}'"))),
            };
            add_auxiliary_line(image, image_ref, axis, parse_num(kv, "value")?, backend, &cfg)
        }
        "Masking_Data_with_Legend" => {
            let mode = match lookup(kv, "mode")? {
                "remove" => MaskMode::Remove,
                "keep_only" => MaskMode::KeepOnly,
                other => bail!(usage(&format!("mode must be remove or keep_only, got '{other}'"))),
            };
            mask_by_legend(image, image_ref, lookup(kv, "item")?, mode, backend, &cfg)
        }
        "Point_Connection" => {
            let diagram = GeomDiagram::from_annotations(image.clone(), image_ref, annotations);
            connect_points(&diagram, lookup(kv, "a")?, lookup(kv, "b")?, backend, &cfg)
        }
        "Perpendicular_Line_Construction" => {
            let diagram = GeomDiagram::from_annotations(image.clone(), image_ref, annotations);
            let line = LineRef::new(lookup(kv, "line_a")?, lookup(kv, "line_b")?);
            construct_perpendicular(&diagram, lookup(kv, "point")?, &line, backend, &cfg)
                .map(|r| r.output)
        }
        "Parallel_Line_Construction" => {
            let diagram = GeomDiagram::from_annotations(image.clone(), image_ref, annotations);
            let line = LineRef::new(lookup(kv, "line_a")?, lookup(kv, "line_b")?);
            construct_parallel(&diagram, lookup(kv, "point")?, &line, backend, &cfg)
                .map(|r| r.output)
        }
        "Numerical_Computation" => {
            let expr = lookup(kv, "expression")?;
            let value = pictor_core::expr::eval_expression(expr)
                .map_err(|e| anyhow!("expression error: {e}"))?;
            println!("{expr} = {value}");
            return Err(usage("Numerical_Computation produces no image; omit --out by using it via `solve`"));
        }
        other => bail!("tool '{other}' is not executable here"),
    }
    .map_err(|e| anyhow!("tool failed: {e}"))?;
    Ok(output)
}

fn cmd_tool(args: ToolArgs) -> Result<ExitCode> {
    let image = load_png(&args.image)?;
    let sidecar = args
        .annotations
        .clone()
        .unwrap_or_else(|| annotations_path_for(&args.image));
    let annotations = read_annotations_jsonl(&sidecar)?;
    let image_ref = image_ref_for(&args.image);
    let oracle = OracleBackend::single(image_ref.clone(), annotations.clone());
    let kv = parse_kv(&args.args)?;

    let output = run_named_tool(&args.tool, &kv, &image, &image_ref, &oracle, &annotations)?;
    save_png(&output.image, &args.out)?;
    println!("{}", output.description);
    if let Some(path) = args.provenance {
        let body = json!({
            "tool": output.tool,
            "description": output.description,
            "grounding": output.grounding,
        });
        std::fs::write(&path, serde_json::to_string_pretty(&body)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let file = load_config(args.remote.config.as_deref())?;
    let cfg = args.engine.resolve(&file);
    let image = load_png(&args.image)?;
    let image_ref = image_ref_for(&args.image);
    let sidecar = args
        .annotations
        .clone()
        .unwrap_or_else(|| annotations_path_for(&args.image));
    let annotations =
        if sidecar.is_file() { read_annotations_jsonl(&sidecar)? } else { Vec::new() };

    let result = if let Some(script) = args.backend.strip_prefix("scripted:") {
        let mut backend = load_script(Path::new(script))?;
        let oracle = OracleBackend::single(image_ref.clone(), annotations.clone());
        solve(&image, &image_ref, &annotations, &args.question, &mut backend, &oracle, &cfg)?
    } else if args.backend == "remote" {
        let options = args.remote.resolve(&file)?;
        let mut backend =
            pictor::remote::RemoteAgentBackend::new(ChatClient::new(options.clone())?);
        if annotations.is_empty() {
            let grounding = RemoteGroundingBackend::new(ChatClient::new(options)?);
            solve(&image, &image_ref, &annotations, &args.question, &mut backend, &grounding, &cfg)?
        } else {
            let oracle = OracleBackend::single(image_ref.clone(), annotations.clone());
            solve(&image, &image_ref, &annotations, &args.question, &mut backend, &oracle, &cfg)?
        }
    } else {
        bail!(usage("--backend must be scripted:<path> or remote"));
    };

    match &result.final_answer {
        Some(a) => println!("answer: {a} (rounds: {})", result.rounds_used),
        None => println!("no answer after {} rounds", result.rounds_used),
    }
    if let Some(path) = args.trace_out {
        std::fs::write(&path, serde_json::to_string_pretty(&result)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let file = load_config(args.remote.config.as_deref())?;
    let run_cfg = args.engine.resolve(&file);
    let items = read_items_jsonl(&args.items)?;
    let items_dir = args
        .items
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));

    let source = if let Some(dir) = args.backend.strip_prefix("scripted:") {
        AgentSource::ScriptedDir(PathBuf::from(dir))
    } else if args.backend == "remote" {
        AgentSource::Remote(args.remote.resolve(&file)?)
    } else {
        bail!(usage("--backend must be scripted:<dir> or remote"));
    };
    let judge = match args.judge {
        JudgeFlag::Offline => JudgeKind::Offline,
        JudgeFlag::Remote => {
            if !matches!(source, AgentSource::Remote(_)) {
                bail!(usage("--judge remote requires --backend remote"));
            }
            JudgeKind::Remote
        }
    };

    let report = run_bench(
        &items_dir,
        &items,
        &source,
        &BenchOptions { run: run_cfg, jobs: args.jobs, judge },
    );
    print!("{}", summarize(&report));
    if let Some(path) = args.report {
        std::fs::write(&path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(min) = args.min_accuracy {
        if report.accuracy < min {
            eprintln!("accuracy {:.3} is below the required {min:.3}", report.accuracy);
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(ExitCode::SUCCESS)
}
