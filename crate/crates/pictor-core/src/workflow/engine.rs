//! The episode engine: runs the planner's THOUGHT/ACTION/OBSERVATION loop
//! over the image memory, executes tools with critic gating, and wraps the
//! whole thing in a dispatch + review refinement loop.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::memory::{ImageMemory, MemoryEdge};
use super::parse::{
    parse_bracket_list, parse_critique, parse_planner_reply, parse_visual_verdict, render_action,
    ActionCall, ArgValue, Critique, PlannerMove,
};
use super::prompts::{
    render_template, DISPATCHER, PLANNER, PLANNING_CRITIC, REASONER,
    VISUAL_CRITIC_ANSWERABILITY, VISUAL_CRITIC_GOAL,
};
use super::{AgentBackend, AgentPrompt, BackendError, Role};
use crate::annotation::fmt_axis_value;
use crate::expr;
use crate::geom::Point;
use crate::grounding::{
    parse_element_prompt, Axis, ElementRef, GroundingBackend, GroundingError, GroundingRequest,
    GroundingResult, TickMark,
};
use crate::raster::RasterImage;
use crate::tools::{
    add_auxiliary_line, connect_points, construct_parallel, construct_perpendicular,
    crop_subfigure, magnify_region, mask_by_legend, AxisWindow, GeomDiagram, LabeledPoint,
    LineRef, MaskMode, ToolConfig, ToolError, ToolOutput, ToolRegistry,
};

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Planner steps per episode, counting failed and no-op steps.
    pub max_steps: u32,
    /// Re-prompts allowed when a planner reply does not parse.
    pub parse_retries: u32,
    /// Keep every prompt sent to the backend in the trace (large).
    pub record_prompts: bool,
    pub tool_config: ToolConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_steps: 10,
            parse_retries: 2,
            record_prompts: false,
            tool_config: ToolConfig::default(),
        }
    }
}

/// One planner step as it happened.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TraceStep {
    pub index: u32,
    pub thought: String,
    /// Canonical rendering of the executed action, `TERMINATE`, or `NOOP`
    /// when the reply never parsed.
    pub action: String,
    pub observation: String,
    pub images_in: Vec<String>,
    pub images_out: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RecordedPrompt {
    pub role: String,
    pub text: String,
}

/// Everything one episode produced.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_answer: Option<String>,
    /// The image memory tree at episode end.
    pub memory: Vec<MemoryEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompts: Option<Vec<RecordedPrompt>>,
}

/// Inputs for one episode. All references, so a refinement loop can re-run
/// the same episode cheaply with different suggestions.
#[derive(Clone, Copy)]
pub struct Episode<'a> {
    pub question: &'a str,
    pub root_image: &'a RasterImage,
    /// Grounding key of the root image (corpus path or caller-chosen id).
    pub root_ref: &'a str,
    pub root_description: &'a str,
    /// Labeled points known in the root diagram; chart questions pass none.
    pub geom_points: &'a [LabeledPoint],
    /// Accumulated critic advice, empty on a first round.
    pub suggestions: &'a str,
}

/// Grounding view for one episode: labels constructed during the episode
/// (perpendicular feet) resolve from the overlay, everything else from the
/// real backend. Keys are (grounding ref, label) because constructed
/// coordinates are only meaningful in the frame they were made in.
struct OverlayGrounding<'a> {
    inner: &'a dyn GroundingBackend,
    extra: &'a BTreeMap<(String, String), Point>,
}

impl GroundingBackend for OverlayGrounding<'_> {
    fn id(&self) -> &str {
        "episode-overlay"
    }

    fn ground(&self, req: &GroundingRequest<'_>) -> Result<GroundingResult, GroundingError> {
        if let ElementRef::NamedPoint { label } = parse_element_prompt(req.prompt) {
            let key = (req.image_ref.to_string(), label);
            if let Some(p) = self.extra.get(&key) {
                return Ok(GroundingResult::found_point(*p));
            }
        }
        self.inner.ground(req)
    }

    fn axis_ticks(
        &self,
        image_ref: &str,
        axis: Axis,
    ) -> Result<Option<Vec<TickMark>>, GroundingError> {
        self.inner.axis_ticks(image_ref, axis)
    }
}

struct EpisodeState<'a> {
    memory: ImageMemory,
    /// Memory id -> grounding ref. Coordinate-preserving tools (masking,
    /// lines, constructions) inherit the parent's ref so annotations keep
    /// working on their output; crops and magnifications do not.
    alias: BTreeMap<String, String>,
    extra_points: BTreeMap<(String, String), Point>,
    known_labels: Vec<LabeledPoint>,
    grounding: &'a dyn GroundingBackend,
    prompts: Option<Vec<RecordedPrompt>>,
}

impl EpisodeState<'_> {
    fn effective_ref<'i>(&'i self, id: &'i str) -> &'i str {
        self.alias.get(id).map(String::as_str).unwrap_or(id)
    }

    fn record(&mut self, role: Role, text: &str) {
        if let Some(log) = &mut self.prompts {
            log.push(RecordedPrompt { role: role.name().to_string(), text: text.to_string() });
        }
    }
}

fn render_history(steps: &[TraceStep]) -> String {
    if steps.is_empty() {
        return "(none yet)".to_string();
    }
    let mut out = String::new();
    for s in steps {
        out.push_str(&format!("THOUGHT {}: {}\n", s.index, s.thought));
        out.push_str(&format!("ACTION {}: {}\n", s.index, s.action));
        out.push_str(&format!("OBSERVATION {}: {}\n", s.index, s.observation));
    }
    out
}

fn tools_slot(registry: &ToolRegistry) -> String {
    registry.descriptions_text()
}

/// Outcome of running one action, before the observation is written.
enum ToolRun {
    Image {
        output: ToolOutput,
        parent_id: String,
        preserves_coords: bool,
        /// Constructed point to register, keyed in the output's frame.
        new_point: Option<(String, Point)>,
    },
    Text {
        observation: String,
        images_in: Vec<String>,
    },
}

enum ToolFail {
    /// Recorded as an observation; the episode continues.
    Observation(String),
    /// Infrastructure failure; the episode aborts.
    Backend(BackendError),
}

fn want_arg<'c>(call: &'c ActionCall, key: &str) -> Result<&'c ArgValue, ToolFail> {
    call.arg(key)
        .ok_or_else(|| ToolFail::Observation(format!("tool call invalid: missing argument '{key}'")))
}

fn want_str(call: &ActionCall, key: &str) -> Result<String, ToolFail> {
    match want_arg(call, key)? {
        ArgValue::Str(s) => Ok(s.clone()),
        ArgValue::ImageId(s) => Ok(s.clone()),
        ArgValue::Num(n) => Ok(fmt_axis_value(*n)),
    }
}

fn want_num(call: &ActionCall, key: &str) -> Result<f64, ToolFail> {
    want_arg(call, key)?.as_num().ok_or_else(|| {
        ToolFail::Observation(format!("tool call invalid: argument '{key}' must be a number"))
    })
}

fn opt_num(call: &ActionCall, key: &str) -> Result<Option<f64>, ToolFail> {
    match call.arg(key) {
        None => Ok(None),
        Some(v) => v.as_num().map(Some).ok_or_else(|| {
            ToolFail::Observation(format!("tool call invalid: argument '{key}' must be a number"))
        }),
    }
}

fn want_image(call: &ActionCall, state: &EpisodeState<'_>) -> Result<String, ToolFail> {
    let id = match want_arg(call, "image")? {
        ArgValue::ImageId(id) => id.clone(),
        ArgValue::Str(s) => s.clone(),
        ArgValue::Num(_) => {
            return Err(ToolFail::Observation(
                "tool call invalid: 'image' must be an image id like img_0".to_string(),
            ))
        }
    };
    if !state.memory.contains(&id) {
        return Err(ToolFail::Observation(format!(
            "tool call invalid: no image '{id}' in the pool"
        )));
    }
    Ok(id)
}

fn map_tool_err(e: ToolError) -> ToolFail {
    match e {
        ToolError::Grounding(GroundingError::BackendUnavailable { message }) => {
            ToolFail::Backend(BackendError::Remote { message: format!("grounding: {message}") })
        }
        other => ToolFail::Observation(format!("tool failed: {other}")),
    }
}

fn diagram_for(state: &EpisodeState<'_>, id: &str) -> GeomDiagram {
    GeomDiagram {
        image: state.memory.image(id).expect("validated").clone(),
        image_ref: state.effective_ref(id).to_string(),
        // Positions in this list are not used for lookup (grounding is);
        // the labels matter for fresh-label bookkeeping.
        points: state.known_labels.clone(),
    }
}

fn run_tool(
    state: &EpisodeState<'_>,
    canonical: &str,
    call: &ActionCall,
    cfg: &ToolConfig,
) -> Result<ToolRun, ToolFail> {
    let overlay = OverlayGrounding { inner: state.grounding, extra: &state.extra_points };
    match canonical {
        "Subfigure_Cropping" => {
            let id = want_image(call, state)?;
            let target = want_str(call, "target")?;
            let image = state.memory.image(&id).expect("validated");
            let output = crop_subfigure(image, state.effective_ref(&id), &target, &overlay, cfg)
                .map_err(map_tool_err)?;
            Ok(ToolRun::Image { output, parent_id: id, preserves_coords: false, new_point: None })
        }
        "Region_Magnification" => {
            let id = want_image(call, state)?;
            let scale = want_num(call, "scale")?;
            let window = AxisWindow {
                x: pair(opt_num(call, "x_start")?, opt_num(call, "x_end")?, "x")?,
                y: pair(opt_num(call, "y_start")?, opt_num(call, "y_end")?, "y")?,
            };
            let image = state.memory.image(&id).expect("validated");
            let output =
                magnify_region(image, state.effective_ref(&id), &window, scale, &overlay, cfg)
                    .map_err(map_tool_err)?;
            Ok(ToolRun::Image { output, parent_id: id, preserves_coords: false, new_point: None })
        }
        "Adding_Auxiliary_Lines" => {
            let id = want_image(call, state)?;
            let axis = match want_str(call, "axis")?.trim().to_ascii_lowercase().as_str() {
                "x" => Axis::X,
                "y" => Axis::Y,
                other => {
                    return Err(ToolFail::Observation(format!(
                        "tool call invalid: axis must be x or y, not '{other}'"
                    )))
                }
            };
            let value = want_num(call, "value")?;
            let image = state.memory.image(&id).expect("validated");
            let output =
                add_auxiliary_line(image, state.effective_ref(&id), axis, value, &overlay, cfg)
                    .map_err(map_tool_err)?;
            Ok(ToolRun::Image { output, parent_id: id, preserves_coords: true, new_point: None })
        }
        "Masking_Data_with_Legend" => {
            let id = want_image(call, state)?;
            let item = want_str(call, "item")?;
            let mode = match want_str(call, "mode")?.trim().to_ascii_lowercase().as_str() {
                "remove" => MaskMode::Remove,
                "keep_only" | "keeponly" | "keep" => MaskMode::KeepOnly,
                other => {
                    return Err(ToolFail::Observation(format!(
                        "tool call invalid: mode must be remove or keep_only, not '{other}'"
                    )))
                }
            };
            let image = state.memory.image(&id).expect("validated");
            let output =
                mask_by_legend(image, state.effective_ref(&id), &item, mode, &overlay, cfg)
                    .map_err(map_tool_err)?;
            Ok(ToolRun::Image { output, parent_id: id, preserves_coords: true, new_point: None })
        }
        "Point_Connection" => {
            let id = want_image(call, state)?;
            let a = want_str(call, "a")?;
            let b = want_str(call, "b")?;
            let diagram = diagram_for(state, &id);
            let output = connect_points(&diagram, &a, &b, &overlay, cfg).map_err(map_tool_err)?;
            Ok(ToolRun::Image { output, parent_id: id, preserves_coords: true, new_point: None })
        }
        "Perpendicular_Line_Construction" => {
            let id = want_image(call, state)?;
            let point = want_str(call, "point")?;
            let line = LineRef::new(want_str(call, "line_a")?, want_str(call, "line_b")?);
            let diagram = diagram_for(state, &id);
            let res = construct_perpendicular(&diagram, &point, &line, &overlay, cfg)
                .map_err(map_tool_err)?;
            Ok(ToolRun::Image {
                output: res.output,
                parent_id: id,
                preserves_coords: true,
                new_point: Some((res.foot_label, res.foot)),
            })
        }
        "Parallel_Line_Construction" => {
            let id = want_image(call, state)?;
            let point = want_str(call, "point")?;
            let line = LineRef::new(want_str(call, "line_a")?, want_str(call, "line_b")?);
            let diagram = diagram_for(state, &id);
            let res = construct_parallel(&diagram, &point, &line, &overlay, cfg)
                .map_err(map_tool_err)?;
            Ok(ToolRun::Image {
                output: res.output,
                parent_id: id,
                preserves_coords: true,
                new_point: None,
            })
        }
        "Numerical_Computation" => {
            let expression = want_str(call, "expression")?;
            let observation = match expr::eval_expression(&expression) {
                Ok(v) => format!("{expression} = {}", fmt_axis_value(v)),
                Err(e) => format!("expression error: {e}"),
            };
            Ok(ToolRun::Text { observation, images_in: Vec::new() })
        }
        other => Err(ToolFail::Observation(format!("tool '{other}' is not executable"))),
    }
}

fn pair(a: Option<f64>, b: Option<f64>, axis: &str) -> Result<Option<(f64, f64)>, ToolFail> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(ToolFail::Observation(format!(
            "tool call invalid: {axis}_start and {axis}_end must be given together"
        ))),
    }
}

fn critic_check(
    log: &mut Option<Vec<RecordedPrompt>>,
    backend: &mut dyn AgentBackend,
    template: &str,
    slots: &[(&str, &str)],
    image: (&str, &RasterImage),
) -> Result<super::parse::CriticVerdict, BackendError> {
    let text = render_template(template, slots);
    if let Some(entries) = log {
        entries.push(RecordedPrompt {
            role: Role::VisualCritic.name().to_string(),
            text: text.clone(),
        });
    }
    let prompt = AgentPrompt {
        role: Role::VisualCritic,
        text,
        images: vec![(image.0.to_string(), image.1)],
    };
    let reply = backend.reply(&prompt)?;
    Ok(parse_visual_verdict(&reply))
}

/// Executes one parsed action. Returns the observation plus the image ids
/// read and written. Only infrastructure failures abort; every tool-level
/// problem becomes an observation the planner can react to.
fn execute_action(
    ep: &Episode<'_>,
    state: &mut EpisodeState<'_>,
    registry: &ToolRegistry,
    call: &ActionCall,
    thought: &str,
    backend: &mut dyn AgentBackend,
    cfg: &EngineConfig,
) -> Result<(String, Vec<String>, Vec<String>), BackendError> {
    // The reasoner is always available, independent of tool selection.
    if call.tool.eq_ignore_ascii_case("reasoner") {
        return reasoner_step(state, call, backend);
    }

    let Some(spec) = registry.get(&call.tool) else {
        let names = registry.names().join(", ");
        return Ok((
            format!("unknown tool '{}'; available tools: [{}] and Reasoner", call.tool, names),
            Vec::new(),
            Vec::new(),
        ));
    };

    let run = match run_tool(state, spec.name, call, &cfg.tool_config) {
        Ok(run) => run,
        Err(ToolFail::Observation(obs)) => return Ok((obs, Vec::new(), Vec::new())),
        Err(ToolFail::Backend(e)) => return Err(e),
    };

    match run {
        ToolRun::Text { observation, images_in } => Ok((observation, images_in, Vec::new())),
        ToolRun::Image { output, parent_id, preserves_coords, new_point } => {
            let id = state
                .memory
                .insert(&parent_id, output.image, output.description.clone())
                .expect("parent id was validated");
            let eff = if preserves_coords {
                state.effective_ref(&parent_id).to_string()
            } else {
                id.clone()
            };
            state.alias.insert(id.clone(), eff.clone());
            if let Some((label, at)) = new_point {
                state.extra_points.insert((eff, label.clone()), at);
                state.known_labels.push(LabeledPoint { label, at });
            }

            // Critic gating: answerability first, then goal satisfaction.
            // Either failure flags the observation; the image stays in
            // memory so a later step can still build on the branch.
            let action_text = render_action(call);
            let stored = state.memory.image(&id).expect("just inserted");
            let answerable = critic_check(
                &mut state.prompts,
                backend,
                VISUAL_CRITIC_ANSWERABILITY,
                &[("question", ep.question), ("description", &output.description)],
                (&id, stored),
            )?;
            let verdict = if answerable.pass {
                critic_check(
                    &mut state.prompts,
                    backend,
                    VISUAL_CRITIC_GOAL,
                    &[
                        ("thought", thought),
                        ("action", &action_text),
                        ("description", &output.description),
                    ],
                    (&id, stored),
                )?
            } else {
                answerable
            };

            let observation = if verdict.pass {
                format!("stored {id}: {}", output.description)
            } else {
                format!(
                    "visual critic flagged the result ({}); kept as {id} for reference, consider a different step",
                    verdict.reason
                )
            };
            Ok((observation, vec![parent_id], vec![id]))
        }
    }
}

fn reasoner_step(
    state: &mut EpisodeState<'_>,
    call: &ActionCall,
    backend: &mut dyn AgentBackend,
) -> Result<(String, Vec<String>, Vec<String>), BackendError> {
    let question = match call.arg("question").and_then(|v| v.as_str()) {
        Some(q) => q.to_string(),
        None => {
            return Ok((
                "tool call invalid: Reasoner needs a question argument".to_string(),
                Vec::new(),
                Vec::new(),
            ))
        }
    };
    let id = match call.arg("image") {
        Some(ArgValue::ImageId(id)) if state.memory.contains(id) => id.clone(),
        Some(_) => {
            return Ok((
                "tool call invalid: Reasoner's image must be an id from the pool".to_string(),
                Vec::new(),
                Vec::new(),
            ))
        }
        None => "img_0".to_string(),
    };
    let description = state.memory.edge(&id).expect("validated").description.clone();
    let text = render_template(
        REASONER,
        &[("question", question.as_str()), ("description", description.as_str())],
    );
    state.record(Role::Reasoner, &text);
    let image = state.memory.image(&id).expect("validated");
    let prompt =
        AgentPrompt { role: Role::Reasoner, text, images: vec![(id.clone(), image)] };
    let reply = backend.reply(&prompt)?;
    Ok((reply.trim().to_string(), vec![id], Vec::new()))
}

/// Runs one planner episode: up to `max_steps` THOUGHT/ACTION/OBSERVATION
/// steps against a fresh image memory rooted at the episode's image.
pub fn run_episode(
    ep: &Episode<'_>,
    backend: &mut dyn AgentBackend,
    grounding: &dyn GroundingBackend,
    registry: &ToolRegistry,
    cfg: &EngineConfig,
) -> Result<Trace, BackendError> {
    let mut state = EpisodeState {
        memory: ImageMemory::new(),
        alias: BTreeMap::new(),
        extra_points: BTreeMap::new(),
        known_labels: ep.geom_points.to_vec(),
        grounding,
        prompts: cfg.record_prompts.then(Vec::new),
    };
    let root_id = state.memory.insert_root(ep.root_image.clone(), ep.root_description);
    state.alias.insert(root_id.clone(), ep.root_ref.to_string());

    let suggestions_slot = if ep.suggestions.trim().is_empty() {
        String::new()
    } else {
        format!("Advice from the previous attempt:\n{}\n\n", ep.suggestions.trim())
    };

    let mut steps: Vec<TraceStep> = Vec::new();
    let mut final_answer = None;
    let mut last_stored: Option<String> = None;

    for index in 1..=cfg.max_steps {
        let text = render_template(
            PLANNER,
            &[
                ("question", ep.question),
                ("tools", &tools_slot(registry)),
                ("pool", state.memory.pool_listing().trim_end()),
                ("suggestions", &suggestions_slot),
                ("history", render_history(&steps).trim_end()),
            ],
        );

        // Parse with bounded re-prompting; a planner that cannot produce
        // the scaffold burns the step as a recorded no-op.
        let mut attempt_text = text;
        let mut parsed: Result<PlannerMove, super::parse::ParseFailure> =
            Err(super::parse::ParseFailure { message: "unattempted".to_string() });
        for attempt in 0..=cfg.parse_retries {
            state.record(Role::Planner, &attempt_text);
            let reply = {
                let mut images = vec![(
                    root_id.clone(),
                    state.memory.image(&root_id).expect("root exists"),
                )];
                if let Some(last) = &last_stored {
                    images.push((last.clone(), state.memory.image(last).expect("stored")));
                }
                let prompt =
                    AgentPrompt { role: Role::Planner, text: attempt_text.clone(), images };
                backend.reply(&prompt)?
            };
            parsed = parse_planner_reply(&reply);
            match &parsed {
                Ok(_) => break,
                Err(failure) if attempt < cfg.parse_retries => {
                    attempt_text = format!(
                        "{attempt_text}\n\nYour previous reply could not be used ({failure}). \
                         Follow the required format exactly: THOUGHT and ACTION lines, or \
                         FINAL ANSWER followed by TERMINATE."
                    );
                }
                Err(_) => {}
            }
        }

        match parsed {
            Err(failure) => {
                steps.push(TraceStep {
                    index,
                    thought: String::new(),
                    action: "NOOP".to_string(),
                    observation: format!("planner reply unparseable: {failure}"),
                    images_in: Vec::new(),
                    images_out: Vec::new(),
                });
            }
            Ok(PlannerMove::Finish { thought, answer }) => {
                steps.push(TraceStep {
                    index,
                    thought,
                    action: "TERMINATE".to_string(),
                    observation: String::new(),
                    images_in: Vec::new(),
                    images_out: Vec::new(),
                });
                final_answer = Some(answer);
                break;
            }
            Ok(PlannerMove::Invoke { thought, action }) => {
                let (observation, images_in, images_out) =
                    execute_action(ep, &mut state, registry, &action, &thought, backend, cfg)?;
                if let Some(new_id) = images_out.first() {
                    last_stored = Some(new_id.clone());
                }
                steps.push(TraceStep {
                    index,
                    thought,
                    action: render_action(&action),
                    observation,
                    images_in,
                    images_out,
                });
            }
        }
    }

    Ok(Trace {
        steps,
        final_answer,
        memory: state.memory.edges().to_vec(),
        prompts: state.prompts,
    })
}

/// What the dispatcher chose for a question.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DispatchRecord {
    /// Canonical tool names, in catalog order.
    pub selected: Vec<String>,
    /// True when the reply had no bracketed list and keyword matching on
    /// the question picked the tools instead.
    pub used_fallback: bool,
    pub raw_reply: String,
}

fn canonicalize(names: &[String], registry: &ToolRegistry) -> Vec<String> {
    registry.subset(names).names().iter().map(|n| n.to_string()).collect()
}

/// Keyword cues used when a dispatcher reply has no usable tool list. Cues
/// map question phrasing to the tool that typically helps; an empty match
/// set falls back to the full catalog.
const FALLBACK_CUES: &[(&str, &[&str])] = &[
    ("Subfigure_Cropping", &["subplot", "panel", "subfigure", "which plot"]),
    ("Region_Magnification", &["zoom", "magnif", "small", "tiny", "exact value", "precise"]),
    ("Adding_Auxiliary_Lines", &["above", "below", "exceed", "threshold", "reference", "cross"]),
    ("Masking_Data_with_Legend", &["overlap", "series", "legend", "hide", "isolate"]),
    ("Point_Connection", &["connect", "segment between", "join"]),
    ("Perpendicular_Line_Construction", &["perpendicular", "distance from", "altitude", "foot"]),
    ("Parallel_Line_Construction", &["parallel"]),
    (
        "Numerical_Computation",
        &[
            "sum", "total", "average", "mean", "difference", "ratio", "percent", "how much",
            "how many", "compute", "calculate",
        ],
    ),
];

fn keyword_fallback(question: &str, registry: &ToolRegistry) -> Vec<String> {
    let q = question.to_ascii_lowercase();
    let mut names: Vec<String> = Vec::new();
    for (tool, cues) in FALLBACK_CUES {
        if registry.get(tool).is_some() && cues.iter().any(|c| q.contains(c)) {
            names.push(tool.to_string());
        }
    }
    if names.is_empty() {
        registry.names().iter().map(|n| n.to_string()).collect()
    } else {
        names
    }
}

/// Asks the dispatcher to pick tools for a question. A reply without a
/// bracketed list falls back to keyword cues on the question itself; an
/// explicitly empty list `[]` is honored as "no tools".
pub fn dispatch(
    question: &str,
    image_description: &str,
    registry: &ToolRegistry,
    backend: &mut dyn AgentBackend,
) -> Result<DispatchRecord, BackendError> {
    let text = render_template(
        DISPATCHER,
        &[
            ("question", question),
            ("description", image_description),
            ("tools", &tools_slot(registry)),
        ],
    );
    let prompt = AgentPrompt { role: Role::Dispatcher, text, images: Vec::new() };
    let raw_reply = backend.reply(&prompt)?;
    let (selected, used_fallback) = match parse_bracket_list(&raw_reply) {
        Some(names) => (canonicalize(&names, registry), false),
        None => (keyword_fallback(question, registry), true),
    };
    Ok(DispatchRecord { selected, used_fallback, raw_reply })
}

/// Shows a finished trace to the planning critic and parses its verdict.
/// Suggested tools are filtered against the catalog; a suggestion list with
/// no valid names is dropped entirely.
pub fn planning_critic_review(
    question: &str,
    trace: &Trace,
    registry: &ToolRegistry,
    backend: &mut dyn AgentBackend,
) -> Result<Critique, BackendError> {
    let answer_text = trace.final_answer.clone().unwrap_or_else(|| "(none given)".to_string());
    let text = render_template(
        PLANNING_CRITIC,
        &[
            ("question", question),
            ("trace", render_history(&trace.steps).trim_end()),
            ("answer", &answer_text),
            ("tools", &tools_slot(registry)),
        ],
    );
    let prompt = AgentPrompt { role: Role::PlanningCritic, text, images: Vec::new() };
    let reply = backend.reply(&prompt)?;
    let mut critique = parse_critique(&reply);
    if let Some(tools) = critique.tools.take() {
        let filtered = canonicalize(&tools, registry);
        critique.tools = if filtered.is_empty() { None } else { Some(filtered) };
    }
    Ok(critique)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub engine: EngineConfig,
    /// Episodes the critic may force, counting the first.
    pub max_rounds: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { engine: EngineConfig::default(), max_rounds: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    /// Tools the planner had this round, canonical names.
    pub tools: Vec<String>,
    pub trace: Trace,
    pub critique: Critique,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunResult {
    pub dispatch: DispatchRecord,
    pub rounds: Vec<RoundRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_answer: Option<String>,
    pub rounds_used: u32,
}

/// Full question-answering run: dispatch once, then up to `max_rounds`
/// episodes, each reviewed by the planning critic. A round that the critic
/// accepts (ADJUSTMENT: False) ends the loop; otherwise the next round runs
/// with the critic's tool selection and its advice prepended to the planner
/// prompt. The last round's answer stands regardless of the final verdict.
pub fn refine_loop(
    ep: &Episode<'_>,
    backend: &mut dyn AgentBackend,
    grounding: &dyn GroundingBackend,
    registry: &ToolRegistry,
    cfg: &RunConfig,
) -> Result<RunResult, BackendError> {
    let dispatch_record = dispatch(ep.question, ep.root_description, registry, backend)?;
    let mut tool_names = dispatch_record.selected.clone();
    let mut suggestions = ep.suggestions.to_string();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut final_answer = None;

    for round in 1..=cfg.max_rounds {
        let subset = registry.subset(&tool_names);
        let round_ep = Episode { suggestions: &suggestions, ..*ep };
        let trace = run_episode(&round_ep, backend, grounding, &subset, &cfg.engine)?;
        final_answer = trace.final_answer.clone();

        let critique = planning_critic_review(ep.question, &trace, registry, backend)?;
        let adjust = critique.adjustment;
        if adjust {
            if let Some(next_tools) = &critique.tools {
                tool_names = next_tools.clone();
            }
            if !critique.suggestions.is_empty() {
                suggestions.push_str(&format!(
                    "Round {round} review: {}\n",
                    critique.suggestions.replace('\n', " ")
                ));
            }
        }
        rounds.push(RoundRecord {
            round,
            tools: subset.names().iter().map(|n| n.to_string()).collect(),
            trace,
            critique,
        });
        if !adjust {
            break;
        }
    }

    Ok(RunResult {
        dispatch: dispatch_record,
        rounds_used: rounds.len() as u32,
        rounds,
        final_answer,
    })
}
