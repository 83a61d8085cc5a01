//! Grounding: resolving a textual element reference ("the legend", "tick 25
//! on the x axis") to pixel coordinates on a specific image, through a
//! pluggable backend. Includes the annotation-backed oracle backend, a
//! perturbation decorator for degradation studies, the response-text
//! parser remote backends share, and the evaluation harness that scores a
//! backend against ground truth.

mod oracle;
mod prompt;
mod report;
mod wire;

pub use oracle::{OffsetBackend, OracleBackend};
pub use prompt::{canonical_prompt, parse_element_prompt, ElementRef, LabelKind};
pub use report::{GroundingReport, ReportBuilder};
pub use wire::{parse_coords_from_text, ParsedCoords};

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::annotation::ElementAnnotation;
use crate::geom::{BBox, Point};
use crate::mathf;
use crate::metrics::{bbox_iou, pck_hit};
use crate::raster::RasterImage;

/// PCK radius as a fraction of the larger image side.
pub const PCK_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

/// What geometry the caller wants back for this prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetShape {
    Box,
    Point,
}

#[derive(Debug, Clone, Copy)]
pub struct GroundingRequest<'a> {
    pub image: &'a RasterImage,
    /// Stable identifier of the image (corpus path or memory id); oracle
    /// backends key their annotation store by it.
    pub image_ref: &'a str,
    pub prompt: &'a str,
    pub expected: TargetShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Found {
    Box(BBox),
    Point(Point),
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingResult {
    pub found: Found,
    /// Raw backend reply, verbatim, for auditability. Oracles leave this
    /// empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
}

impl GroundingResult {
    pub fn found_box(b: BBox) -> Self {
        Self { found: Found::Box(b), raw_text: None }
    }

    pub fn found_point(p: Point) -> Self {
        Self { found: Found::Point(p), raw_text: None }
    }

    pub fn not_found() -> Self {
        Self { found: Found::NotFound, raw_text: None }
    }

    pub fn with_raw(mut self, raw: impl Into<String>) -> Self {
        self.raw_text = Some(raw.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundingError {
    /// Transport or configuration failure; evaluation aborts rather than
    /// scoring it as a miss.
    BackendUnavailable { message: String },
    /// The backend replied but the reply had no usable coordinates. Scored
    /// as zero and tallied separately.
    MalformedResponse { raw_text: String },
}

impl core::fmt::Display for GroundingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GroundingError::BackendUnavailable { message } => {
                write!(f, "grounding backend unavailable: {message}")
            }
            GroundingError::MalformedResponse { raw_text } => {
                write!(f, "malformed grounding response: {raw_text:?}")
            }
        }
    }
}

/// A tick position a backend can report for axis interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickMark {
    pub value: f64,
    pub pixel: Point,
}

pub trait GroundingBackend {
    fn id(&self) -> &str;

    fn ground(&self, req: &GroundingRequest<'_>) -> Result<GroundingResult, GroundingError>;

    /// Known tick marks along one axis of the referenced image, if the
    /// backend can enumerate them (oracles can; remote models return
    /// `None`). Used for interpolating positions between labeled ticks.
    fn axis_ticks(
        &self,
        image_ref: &str,
        axis: Axis,
    ) -> Result<Option<Vec<TickMark>>, GroundingError> {
        let _ = (image_ref, axis);
        Ok(None)
    }
}

/// Grounds a request and clamps the geometry to the image bounds. A box
/// that clamps to zero area (entirely outside the image) degrades to
/// `NotFound`.
pub fn ground(
    backend: &dyn GroundingBackend,
    req: &GroundingRequest<'_>,
) -> Result<GroundingResult, GroundingError> {
    let mut res = backend.ground(req)?;
    let (w, h) = (req.image.width() as f64, req.image.height() as f64);
    res.found = match res.found {
        Found::Box(b) => {
            let clamped = BBox::new(
                mathf::clamp(b.x1, 0.0, w),
                mathf::clamp(b.y1, 0.0, h),
                mathf::clamp(b.x2, 0.0, w),
                mathf::clamp(b.y2, 0.0, h),
            );
            if clamped.area() == 0.0 {
                Found::NotFound
            } else {
                Found::Box(clamped)
            }
        }
        Found::Point(p) => {
            Found::Point(Point::new(mathf::clamp(p.x, 0.0, w), mathf::clamp(p.y, 0.0, h)))
        }
        Found::NotFound => Found::NotFound,
    };
    Ok(res)
}

/// Scores one annotation against a backend: IoU for box categories, binary
/// PCK@0.01 for point categories. Malformed responses score zero and are
/// tallied. `BackendUnavailable` aborts. Annotations without a canonical
/// prompt are skipped.
pub fn evaluate_element(
    backend: &dyn GroundingBackend,
    image: &RasterImage,
    image_ref: &str,
    ann: &ElementAnnotation,
    builder: &mut ReportBuilder,
) -> Result<(), GroundingError> {
    let Some(prompt) = canonical_prompt(ann) else {
        return Ok(());
    };
    let expected = if ann.category.uses_box() { TargetShape::Box } else { TargetShape::Point };
    let req = GroundingRequest { image, image_ref, prompt: &prompt, expected };
    match ground(backend, &req) {
        Ok(res) => {
            let score = score_result(&res.found, ann, image);
            builder.add(ann.category, score);
            Ok(())
        }
        Err(GroundingError::MalformedResponse { .. }) => {
            builder.add_malformed(ann.category);
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn score_result(found: &Found, ann: &ElementAnnotation, image: &RasterImage) -> f64 {
    match (found, ann.category.uses_box()) {
        (Found::Box(pred), true) => bbox_iou(pred, &ann.bbox.expect("box annotation")),
        (Found::Point(pred), false) => {
            let truth = ann.point.expect("point annotation");
            if pck_hit(*pred, truth, image.width(), image.height(), PCK_ALPHA) {
                1.0
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

/// Scores every annotation of one image into the builder.
pub fn evaluate_annotations(
    backend: &dyn GroundingBackend,
    image: &RasterImage,
    image_ref: &str,
    annotations: &[ElementAnnotation],
    builder: &mut ReportBuilder,
) -> Result<(), GroundingError> {
    for ann in annotations {
        evaluate_element(backend, image, image_ref, ann, builder)?;
    }
    Ok(())
}

/// Convenience single-image evaluation.
pub fn evaluate_grounding(
    backend: &dyn GroundingBackend,
    image: &RasterImage,
    image_ref: &str,
    annotations: &[ElementAnnotation],
) -> Result<GroundingReport, GroundingError> {
    let mut builder = ReportBuilder::new();
    evaluate_annotations(backend, image, image_ref, annotations, &mut builder)?;
    Ok(builder.finish())
}
