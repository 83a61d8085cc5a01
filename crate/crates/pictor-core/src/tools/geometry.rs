//! Construction tools for diagrams with labeled points: connecting points,
//! dropping perpendiculars, and drawing parallels.
//!
//! Point positions come from the grounding backend, so the same code path
//! works whether positions are oracle annotations or model replies. All
//! constructions are drawn dashed so they read as added, not original.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{ground_point, GroundingUse, ToolConfig, ToolError, ToolOutput};
use crate::annotation::{ElementAnnotation, ElementCategory};
use crate::color;
use crate::font::draw_text;
use crate::geom::{clip_line_to_rect, foot_of_perpendicular, BBox, Point};
use crate::grounding::GroundingBackend;
use crate::mathf;
use crate::raster::RasterImage;

/// A named point in a diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub label: String,
    pub at: Point,
}

/// A diagram image together with its labeled points. The point list is used
/// only for label bookkeeping (which names are taken); positions are always
/// resolved through the grounding backend.
#[derive(Debug, Clone)]
pub struct GeomDiagram {
    pub image: RasterImage,
    pub image_ref: String,
    pub points: Vec<LabeledPoint>,
}

impl GeomDiagram {
    pub fn new(image: RasterImage, image_ref: impl Into<String>) -> Self {
        GeomDiagram { image, image_ref: image_ref.into(), points: Vec::new() }
    }

    /// Collects the labeled points out of an annotation set.
    pub fn from_annotations(
        image: RasterImage,
        image_ref: impl Into<String>,
        annotations: &[ElementAnnotation],
    ) -> Self {
        let points = annotations
            .iter()
            .filter(|a| a.category == ElementCategory::GeomPoint)
            .filter_map(|a| {
                Some(LabeledPoint { label: a.label_text.clone()?, at: a.point? })
            })
            .collect();
        GeomDiagram { image, image_ref: image_ref.into(), points }
    }

    /// First unused single capital letter, falling back to `P1`, `P2`, ...
    /// once the alphabet is exhausted.
    pub fn fresh_label(&self) -> String {
        let taken = |cand: &str| self.points.iter().any(|p| p.label == cand);
        for c in b'A'..=b'Z' {
            let cand = String::from_utf8(alloc::vec![c]).unwrap();
            if !taken(&cand) {
                return cand;
            }
        }
        for n in 1.. {
            let cand = format!("P{n}");
            if !taken(&cand) {
                return cand;
            }
        }
        unreachable!()
    }
}

/// A line named by two labeled points.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRef {
    pub a: String,
    pub b: String,
}

impl LineRef {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        LineRef { a: a.into(), b: b.into() }
    }
}

fn locate(
    diagram: &GeomDiagram,
    label: &str,
    backend: &dyn GroundingBackend,
    uses: &mut Vec<GroundingUse>,
) -> Result<Point, ToolError> {
    let prompt = format!("point {label}");
    ground_point(backend, &diagram.image, &diagram.image_ref, &prompt, uses)?
        .ok_or(ToolError::GroundingMiss { prompt })
}

fn fmt_coord(v: f64) -> String {
    format!("{:.1}", v)
}

/// Draws a dashed segment between two labeled points, with a small solid
/// dot at each end. The description reports the pixel length so a caller
/// can reason about distances without measuring.
pub fn connect_points(
    diagram: &GeomDiagram,
    a: &str,
    b: &str,
    backend: &dyn GroundingBackend,
    cfg: &ToolConfig,
) -> Result<ToolOutput, ToolError> {
    let mut uses = Vec::new();
    let pa = locate(diagram, a, backend, &mut uses)?;
    let pb = locate(diagram, b, backend, &mut uses)?;
    if pa.distance(pb) < cfg.snap_px {
        return Err(ToolError::CoincidentPoints { a: a.to_string(), b: b.to_string() });
    }

    let mut out = diagram.image.clone();
    out.draw_dashed_segment(pa, pb, color::RED, cfg.dash_on, cfg.dash_off);
    out.draw_dot(pa, 1, color::RED);
    out.draw_dot(pb, 1, color::RED);

    let description = format!(
        "diagram with {a} and {b} connected by a dashed segment ({} px long)",
        fmt_coord(pa.distance(pb))
    );
    Ok(ToolOutput {
        image: out,
        description,
        tool: "connect_points".to_string(),
        grounding: uses,
    })
}

/// Result of [`construct_perpendicular`]: the drawn image plus the exact
/// foot of the perpendicular and the label assigned to it.
#[derive(Debug, Clone)]
pub struct PerpendicularResult {
    pub output: ToolOutput,
    pub foot: Point,
    pub foot_label: String,
}

/// Drops a perpendicular from `point` onto the line through `line.a` and
/// `line.b`. The foot gets the first unused capital letter as its label and
/// is reported with one-decimal pixel coordinates. When the point already
/// lies on the line (within half a pixel) nothing is drawn and the
/// description says so.
pub fn construct_perpendicular(
    diagram: &GeomDiagram,
    point: &str,
    line: &LineRef,
    backend: &dyn GroundingBackend,
    cfg: &ToolConfig,
) -> Result<PerpendicularResult, ToolError> {
    let mut uses = Vec::new();
    let p = locate(diagram, point, backend, &mut uses)?;
    let a = locate(diagram, &line.a, backend, &mut uses)?;
    let b = locate(diagram, &line.b, backend, &mut uses)?;
    if a.distance(b) < cfg.snap_px {
        return Err(ToolError::DegenerateLine { a: line.a.clone(), b: line.b.clone() });
    }
    let foot = foot_of_perpendicular(p, a, b)
        .map_err(|_| ToolError::DegenerateLine { a: line.a.clone(), b: line.b.clone() })?;
    let foot_label = diagram.fresh_label();

    let mut out = diagram.image.clone();
    let dist = p.distance(foot);
    let description;
    if dist < 0.5 {
        description = format!(
            "diagram unchanged: {point} already lies on line {}{} (foot {foot_label} at ({}, {}))",
            line.a,
            line.b,
            fmt_coord(foot.x),
            fmt_coord(foot.y)
        );
    } else {
        // Extend slightly past the foot so the right angle is visible.
        let overshoot = 6.0;
        let dir = ((foot.x - p.x) / dist, (foot.y - p.y) / dist);
        let end = Point::new(foot.x + dir.0 * overshoot, foot.y + dir.1 * overshoot);
        out.draw_dashed_segment(p, end, color::RED, cfg.dash_on, cfg.dash_off);
        out.draw_dot(foot, 1, color::RED);
        draw_text(
            &mut out,
            mathf::round(foot.x) as i64 + 4,
            mathf::round(foot.y) as i64 + 4,
            &foot_label,
            1,
            color::RED,
        );
        description = format!(
            "diagram with a dashed perpendicular from {point} to line {}{}, foot {foot_label} at ({}, {})",
            line.a,
            line.b,
            fmt_coord(foot.x),
            fmt_coord(foot.y)
        );
    }

    Ok(PerpendicularResult {
        output: ToolOutput {
            image: out,
            description,
            tool: "construct_perpendicular".to_string(),
            grounding: uses,
        },
        foot,
        foot_label,
    })
}

/// Result of [`construct_parallel`]: the drawn image plus the exact
/// direction vector used, which is the source line's direction verbatim.
#[derive(Debug, Clone)]
pub struct ParallelResult {
    pub output: ToolOutput,
    pub direction: (f64, f64),
}

/// Draws the line through `point` parallel to the line through `line.a` and
/// `line.b`, clipped to the canvas and dashed. The direction vector is
/// taken componentwise from the source points, so its cross product with
/// the source direction is exactly zero.
pub fn construct_parallel(
    diagram: &GeomDiagram,
    point: &str,
    line: &LineRef,
    backend: &dyn GroundingBackend,
    cfg: &ToolConfig,
) -> Result<ParallelResult, ToolError> {
    let mut uses = Vec::new();
    let p = locate(diagram, point, backend, &mut uses)?;
    let a = locate(diagram, &line.a, backend, &mut uses)?;
    let b = locate(diagram, &line.b, backend, &mut uses)?;
    if a.distance(b) < cfg.snap_px {
        return Err(ToolError::DegenerateLine { a: line.a.clone(), b: line.b.clone() });
    }
    let direction = (b.x - a.x, b.y - a.y);

    let w = diagram.image.width() as f64;
    let h = diagram.image.height() as f64;
    let canvas = BBox::new(0.0, 0.0, w - 1.0, h - 1.0);
    // Grounded points are clamped into the image, so the clip cannot miss.
    let (e0, e1) = clip_line_to_rect(p, direction, &canvas)
        .ok_or(ToolError::DegenerateLine { a: line.a.clone(), b: line.b.clone() })?;

    let mut out = diagram.image.clone();
    out.draw_dashed_segment(e0, e1, color::RED, cfg.dash_on, cfg.dash_off);
    out.draw_dot(p, 1, color::RED);

    let description = format!(
        "diagram with a dashed line through {point} parallel to line {}{}",
        line.a, line.b
    );
    Ok(ParallelResult {
        output: ToolOutput {
            image: out,
            description,
            tool: "construct_parallel".to_string(),
            grounding: uses,
        },
        direction,
    })
}
