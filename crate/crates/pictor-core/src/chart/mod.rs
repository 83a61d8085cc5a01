//! Deterministic chart synthesis: spec sampling, axis mapping, instrumented
//! rendering with exact ground-truth annotations, and multi-panel
//! composition.

mod axis;
mod compose;
mod render;
mod spec;

pub use axis::{value_to_pixel, AxisMap, AxisMapError};
pub use compose::{compose_multipanel, Composite, PanelLayout};
pub use render::{render_chart, short_description, RenderOutput};
pub use spec::{
    generate_chart_spec, generate_chart_spec_with, ChartKind, ChartSpec, LegendPosition,
    SeriesSpec, SpecOptions, PALETTE,
};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChartError {
    /// The spec violates a structural invariant; the message names it.
    InvalidSpec(String),
    /// The canvas cannot fit the fixed margins and labels.
    CanvasTooSmall { width: u32, height: u32 },
    /// Composites take 2 to 16 panels.
    PanelCount { got: usize },
}

impl core::fmt::Display for ChartError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ChartError::InvalidSpec(msg) => write!(f, "invalid chart spec: {msg}"),
            ChartError::CanvasTooSmall { width, height } => {
                write!(f, "canvas {width}x{height} is too small to render")
            }
            ChartError::PanelCount { got } => {
                write!(f, "composite needs 2 to 16 panels, got {got}")
            }
        }
    }
}
