//! End-to-end drivers: answer one question about one image, or run a whole
//! benchmark file and score it.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use pictor_core::bench::{
    build_report, offline_judge, BenchItem, BenchReport, ItemOutcome,
};
use pictor_core::grounding::{GroundingBackend, OracleBackend};
use pictor_core::tools::{GeomDiagram, LabeledPoint, ToolRegistry};
use pictor_core::workflow::prompts::{render_template, JUDGE};
use pictor_core::workflow::{refine_loop, AgentBackend, Episode, RunConfig, RunResult};
use pictor_core::{ElementAnnotation, ElementCategory, RasterImage};

use crate::imageio::load_png;
use crate::manifest::{annotations_path_for, image_ref_for, read_annotations_jsonl};
use crate::remote::{ChatClient, RemoteAgentBackend, RemoteGroundingBackend, RemoteOptions};
use crate::scripted::load_script;

/// Root description handed to the planner: the figure's own title when it is
/// annotated, otherwise just the dimensions.
pub fn describe_root(image: &RasterImage, annotations: &[ElementAnnotation]) -> String {
    let title = annotations.iter().find_map(|a| {
        let (scope, local) = pictor_core::annotation::split_scoped_id(&a.element_id);
        (a.category == ElementCategory::TextLabel && local == "title" && scope.is_none())
            .then(|| a.label_text.clone())
            .flatten()
    });
    match title {
        Some(t) => format!("a figure titled '{t}'"),
        None => format!("an image, {}x{} px", image.width(), image.height()),
    }
}

pub fn geom_points_of(
    image: &RasterImage,
    image_ref: &str,
    annotations: &[ElementAnnotation],
) -> Vec<LabeledPoint> {
    GeomDiagram::from_annotations(image.clone(), image_ref, annotations).points
}

/// Runs the full dispatch / plan / criticise loop for one question.
pub fn solve(
    image: &RasterImage,
    image_ref: &str,
    annotations: &[ElementAnnotation],
    question: &str,
    backend: &mut dyn AgentBackend,
    grounding: &dyn GroundingBackend,
    cfg: &RunConfig,
) -> Result<RunResult> {
    let description = describe_root(image, annotations);
    let points = geom_points_of(image, image_ref, annotations);
    let ep = Episode {
        question,
        root_image: image,
        root_ref: image_ref,
        root_description: &description,
        geom_points: &points,
        suggestions: "",
    };
    let registry = ToolRegistry::standard();
    refine_loop(&ep, backend, grounding, &registry, cfg)
        .map_err(|e| anyhow::anyhow!("agent backend: {e}"))
}

/// Where each benchmark item's agent replies come from.
pub enum AgentSource {
    /// Directory of `{item_id}.json` scripts (see [`crate::scripted`]).
    ScriptedDir(PathBuf),
    Remote(RemoteOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JudgeKind {
    Offline,
    Remote,
}

pub struct BenchOptions {
    pub run: RunConfig,
    pub jobs: usize,
    pub judge: JudgeKind,
}

/// Asks a chat model to compare answers. "incorrect" anywhere in the reply
/// means wrong; otherwise "correct" means right; anything else falls back to
/// the offline judge.
pub fn remote_judge(
    client: &ChatClient,
    question: &str,
    gold: &str,
    predicted: &str,
) -> bool {
    let text = render_template(
        JUDGE,
        &[("question", question), ("gold", gold), ("predicted", predicted)],
    );
    match client.chat(&text, &[]) {
        Ok(reply) => {
            let lower = reply.to_lowercase();
            if lower.contains("incorrect") {
                false
            } else if lower.contains("correct") {
                true
            } else {
                offline_judge(gold, predicted)
            }
        }
        Err(_) => offline_judge(gold, predicted),
    }
}

fn solve_item(
    items_dir: &Path,
    item: &BenchItem,
    source: &AgentSource,
    opts: &BenchOptions,
) -> Result<ItemOutcome> {
    let image_path = items_dir.join(&item.image);
    let image = load_png(&image_path)?;
    let image_ref = image_ref_for(&image_path);
    let sidecar = annotations_path_for(&image_path);
    let annotations = if sidecar.is_file() {
        read_annotations_jsonl(&sidecar)?
    } else {
        Vec::new()
    };

    let mut backend: Box<dyn AgentBackend> = match source {
        AgentSource::ScriptedDir(dir) => {
            Box::new(load_script(&dir.join(format!("{}.json", item.id)))?)
        }
        AgentSource::Remote(options) => {
            Box::new(RemoteAgentBackend::new(ChatClient::new(options.clone())?))
        }
    };
    let run = match source {
        // Scripted runs ground against the sidecar oracle; remote runs ask
        // the model itself unless a sidecar provides exact geometry.
        AgentSource::ScriptedDir(_) => {
            let oracle = OracleBackend::single(image_ref.clone(), annotations.clone());
            solve(&image, &image_ref, &annotations, &item.question, &mut *backend, &oracle, &opts.run)?
        }
        AgentSource::Remote(options) => {
            if annotations.is_empty() {
                let grounding = RemoteGroundingBackend::new(ChatClient::new(options.clone())?);
                solve(&image, &image_ref, &annotations, &item.question, &mut *backend, &grounding, &opts.run)?
            } else {
                let oracle = OracleBackend::single(image_ref.clone(), annotations.clone());
                solve(&image, &image_ref, &annotations, &item.question, &mut *backend, &oracle, &opts.run)?
            }
        }
    };

    let outcome = match (opts.judge, source) {
        (JudgeKind::Remote, AgentSource::Remote(options)) => {
            let client = ChatClient::new(options.clone())?;
            ItemOutcome::from_run(&item.id, &item.answer, &run, |gold, predicted| {
                remote_judge(&client, &item.question, gold, predicted)
            })
        }
        _ => ItemOutcome::from_run(&item.id, &item.answer, &run, offline_judge),
    };
    Ok(outcome)
}

/// Runs every item (in parallel when `jobs > 1`) and folds the outcomes into
/// a report. Item failures are recorded, not fatal.
pub fn run_bench(
    items_dir: &Path,
    items: &[BenchItem],
    source: &AgentSource,
    opts: &BenchOptions,
) -> BenchReport {
    let workers = opts.jobs.max(1).min(items.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<ItemOutcome>>> =
        items.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let outcome = solve_item(items_dir, item, source, opts)
                    .with_context(|| format!("item {}", item.id))
                    .unwrap_or_else(|e| ItemOutcome::failed(&item.id, &format!("{e:#}")));
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    let outcomes = slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every item processed"))
        .collect();
    build_report(outcomes)
}
