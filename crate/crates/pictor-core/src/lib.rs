//! Core building blocks for structured-image reasoning over charts and
//! geometry diagrams: deterministic chart synthesis with exact annotations,
//! textual-reference grounding, pixel-space visual tools, and a planner
//! driven multi-agent workflow with an image-memory tree.
//!
//! The crate is `no_std` (with `alloc`) so the same arithmetic runs
//! bit-identically on hosts and embedded targets; all IO lives in the
//! companion `pictor` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod annotation;
pub mod bench;
pub mod chart;
pub mod color;
pub mod expr;
pub mod font;
pub mod geom;
pub mod grounding;
pub mod mathf;
pub mod metrics;
pub mod raster;
pub mod tools;
pub mod workflow;

pub use annotation::{ElementAnnotation, ElementCategory};
pub use color::ColorRGB;
pub use geom::{BBox, Point};
pub use raster::RasterImage;
