//! Visual manipulation tools.
//!
//! Each tool takes an input image plus a grounding backend, produces a new
//! image, and records which grounding calls it made so callers can audit how
//! a result was located. Tools never mutate their input; the output image is
//! always a fresh buffer.
//!
//! Chart tools ([`crop_subfigure`], [`magnify_region`], [`add_auxiliary_line`],
//! [`mask_by_legend`]) navigate rendered charts. Geometry tools
//! ([`connect_points`], [`construct_perpendicular`], [`construct_parallel`])
//! add constructions to diagrams with labeled points.

mod chart;
mod geometry;
mod registry;

pub use chart::{
    add_auxiliary_line, crop_subfigure, dominant_color, magnify_region, mask_by_legend,
    AxisWindow, MaskMode,
};
pub use geometry::{
    connect_points, construct_parallel, construct_perpendicular, GeomDiagram, LabeledPoint,
    LineRef, ParallelResult, PerpendicularResult,
};
pub use registry::{ArgType, ParamSpec, ToolRegistry, ToolSpec};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::grounding::GroundingError;
use crate::raster::RasterImage;

/// Tunables shared by the tools. Defaults match the values the rest of the
/// crate is tested against; override individual fields for experiments.
#[derive(Debug, Clone)]
pub struct ToolConfig {
    /// Color distance at or below which a pixel counts as belonging to a
    /// masked series.
    pub mask_tau: f64,
    /// Padding in pixels added around a cropped region.
    pub crop_padding_px: u32,
    /// Extra margin kept on the label side of a magnified region so axis
    /// text survives the crop (left of the y axis, below the x axis).
    pub ruler_margin_px: u32,
    /// How far outside the known tick range an auxiliary line may be placed,
    /// as a fraction of the tick value span.
    pub extrapolation_frac: f64,
    /// Pixels closer than this to pure white or pure black are ignored when
    /// estimating a legend icon's dominant color, and survive `keep_only`
    /// masking (they are structure, not data).
    pub filter_dist: f64,
    /// Minimum share of an icon box the dominant color must cover.
    pub min_icon_share: f64,
    /// Distance below which two grounded points are treated as coincident.
    pub snap_px: f64,
    /// Dash pattern for construction and auxiliary lines.
    pub dash_on: f64,
    pub dash_off: f64,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            mask_tau: 30.0,
            crop_padding_px: 2,
            ruler_margin_px: 26,
            extrapolation_frac: 0.10,
            filter_dist: 40.0,
            min_icon_share: 0.20,
            snap_px: 2.0,
            dash_on: 6.0,
            dash_off: 4.0,
        }
    }
}

/// One grounding call made by a tool, kept for provenance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GroundingUse {
    pub prompt: String,
    /// Human-readable outcome: `box [..]`, `point [..]`, `not found`,
    /// `malformed`, or `axis ticks (n)`.
    pub outcome: String,
}

/// Result of a tool invocation.
#[derive(Debug, Clone)]
pub struct ToolOutput {
    pub image: RasterImage,
    /// Short description of what the tool did, suitable for an image pool
    /// listing or an observation.
    pub description: String,
    /// Canonical snake_case tool name.
    pub tool: String,
    /// Grounding calls made while executing, in order.
    pub grounding: Vec<GroundingUse>,
}

/// Why a tool invocation failed.
#[derive(Debug, Clone, PartialEq)]
pub enum ToolError {
    /// A required element could not be grounded.
    GroundingMiss { prompt: String },
    /// A grounded region was too small to operate on.
    DegenerateRegion { what: String },
    /// A magnification window had equal endpoints.
    EmptyWindow { axis: char },
    /// Caller-supplied arguments were invalid.
    BadArgument { message: String },
    /// No color dominated the legend icon box.
    AmbiguousColor { share: f64 },
    /// Every pixel in the probed region was filtered out as structure.
    EmptyAfterFiltering,
    /// Two points that must be distinct grounded to (nearly) the same spot.
    CoincidentPoints { a: String, b: String },
    /// The two points naming a line are too close to define one.
    DegenerateLine { a: String, b: String },
    /// The grounding backend itself failed.
    Grounding(GroundingError),
}

impl fmt::Display for ToolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ToolError::GroundingMiss { prompt } => {
                write!(f, "could not locate '{prompt}' in the image")
            }
            ToolError::DegenerateRegion { what } => {
                write!(f, "region for {what} is too small to use")
            }
            ToolError::EmptyWindow { axis } => {
                write!(f, "{axis} window has equal endpoints")
            }
            ToolError::BadArgument { message } => write!(f, "bad argument: {message}"),
            ToolError::AmbiguousColor { share } => write!(
                f,
                "no dominant icon color (best share {share:.2})"
            ),
            ToolError::EmptyAfterFiltering => {
                write!(f, "no candidate pixels left after filtering structure colors")
            }
            ToolError::CoincidentPoints { a, b } => {
                write!(f, "points {a} and {b} coincide")
            }
            ToolError::DegenerateLine { a, b } => {
                write!(f, "points {a} and {b} are too close to define a line")
            }
            ToolError::Grounding(e) => write!(f, "grounding backend error: {e}"),
        }
    }
}

impl From<GroundingError> for ToolError {
    fn from(e: GroundingError) -> Self {
        ToolError::Grounding(e)
    }
}

use crate::geom::{BBox, Point};
use crate::grounding::{ground, Found, GroundingBackend, GroundingRequest, TargetShape};
use alloc::format;
use alloc::string::ToString;

fn outcome_text(found: &Found) -> String {
    match found {
        Found::Box(b) => format!("box [{}, {}, {}, {}]", b.x1, b.y1, b.x2, b.y2),
        Found::Point(p) => format!("point [{}, {}]", p.x, p.y),
        Found::NotFound => "not found".to_string(),
    }
}

/// Grounds one prompt, recording the call. Malformed replies are recorded
/// and downgraded to a miss; transport failures abort the tool.
pub(crate) fn ground_once(
    backend: &dyn GroundingBackend,
    image: &RasterImage,
    image_ref: &str,
    prompt: &str,
    expected: TargetShape,
    uses: &mut Vec<GroundingUse>,
) -> Result<Found, ToolError> {
    let req = GroundingRequest { image, image_ref, prompt, expected };
    match ground(backend, &req) {
        Ok(res) => {
            uses.push(GroundingUse {
                prompt: prompt.to_string(),
                outcome: outcome_text(&res.found),
            });
            Ok(res.found)
        }
        Err(GroundingError::MalformedResponse { .. }) => {
            uses.push(GroundingUse { prompt: prompt.to_string(), outcome: "malformed".to_string() });
            Ok(Found::NotFound)
        }
        Err(e) => Err(ToolError::Grounding(e)),
    }
}

pub(crate) fn ground_box(
    backend: &dyn GroundingBackend,
    image: &RasterImage,
    image_ref: &str,
    prompt: &str,
    uses: &mut Vec<GroundingUse>,
) -> Result<Option<BBox>, ToolError> {
    match ground_once(backend, image, image_ref, prompt, TargetShape::Box, uses)? {
        Found::Box(b) => Ok(Some(b)),
        // A point cannot substitute for a region.
        Found::Point(_) | Found::NotFound => Ok(None),
    }
}

pub(crate) fn ground_point(
    backend: &dyn GroundingBackend,
    image: &RasterImage,
    image_ref: &str,
    prompt: &str,
    uses: &mut Vec<GroundingUse>,
) -> Result<Option<Point>, ToolError> {
    match ground_once(backend, image, image_ref, prompt, TargetShape::Point, uses)? {
        Found::Point(p) => Ok(Some(p)),
        // A box reply still pins a location; take its center.
        Found::Box(b) => Ok(Some(b.center())),
        Found::NotFound => Ok(None),
    }
}
