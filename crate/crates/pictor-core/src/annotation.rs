//! Ground-truth element annotations attached to rendered images.
//!
//! One annotation names one visual element (a subplot, a legend entry, a
//! text label, an axis tick, or a labeled geometry point) with either a box
//! or a point in pixel coordinates. Boxes serialize as `[x1, y1, x2, y2]`
//! and points as `[x, y]`.

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::geom::{BBox, Point};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum ElementCategory {
    Subplot,
    LegendRegion,
    TextLabel,
    AxisTick,
    GeomPoint,
}

impl ElementCategory {
    pub const ALL: [ElementCategory; 5] = [
        ElementCategory::Subplot,
        ElementCategory::LegendRegion,
        ElementCategory::TextLabel,
        ElementCategory::AxisTick,
        ElementCategory::GeomPoint,
    ];

    /// Box-shaped categories localize with IoU, point-shaped ones with PCK.
    pub fn uses_box(self) -> bool {
        matches!(
            self,
            ElementCategory::Subplot | ElementCategory::LegendRegion | ElementCategory::TextLabel
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementCategory::Subplot => "subplot",
            ElementCategory::LegendRegion => "legend_region",
            ElementCategory::TextLabel => "text_label",
            ElementCategory::AxisTick => "axis_tick",
            ElementCategory::GeomPoint => "geom_point",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementAnnotation {
    pub element_id: String,
    pub category: ElementCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_value: Option<f64>,
    /// 1-based (row, column) of the panel inside a composite image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_pos: Option<(u32, u32)>,
}

impl ElementAnnotation {
    pub fn boxed(element_id: impl Into<String>, category: ElementCategory, bbox: BBox) -> Self {
        Self {
            element_id: element_id.into(),
            category,
            bbox: Some(bbox),
            point: None,
            label_text: None,
            axis_value: None,
            grid_pos: None,
        }
    }

    pub fn pointed(element_id: impl Into<String>, category: ElementCategory, point: Point) -> Self {
        Self {
            element_id: element_id.into(),
            category,
            bbox: None,
            point: None,
            label_text: None,
            axis_value: None,
            grid_pos: None,
        }
        .with_point(point)
    }

    pub fn with_point(mut self, point: Point) -> Self {
        self.point = Some(point);
        self
    }

    pub fn with_label(mut self, text: impl Into<String>) -> Self {
        self.label_text = Some(text.into());
        self
    }

    pub fn with_axis_value(mut self, v: f64) -> Self {
        self.axis_value = Some(v);
        self
    }

    pub fn with_grid_pos(mut self, row: u32, col: u32) -> Self {
        self.grid_pos = Some((row, col));
        self
    }

    /// Checks the geometry matches the category: box categories carry a
    /// bbox, point categories carry a point.
    pub fn geometry_is_consistent(&self) -> bool {
        if self.category.uses_box() {
            self.bbox.is_some()
        } else {
            self.point.is_some()
        }
    }

    /// The id with any panel scope prefix removed.
    pub fn local_id(&self) -> &str {
        split_scoped_id(&self.element_id).1
    }
}

/// Splits a panel scope prefix `r{R}c{C}_` off an element id. Ids without
/// the prefix return `(None, id)`.
pub fn split_scoped_id(id: &str) -> (Option<(u32, u32)>, &str) {
    let parse = || -> Option<((u32, u32), usize)> {
        let rest = id.strip_prefix('r')?;
        let c_at = rest.find('c')?;
        let row: u32 = rest[..c_at].parse().ok()?;
        let after_c = &rest[c_at + 1..];
        let us_at = after_c.find('_')?;
        let col: u32 = after_c[..us_at].parse().ok()?;
        let local_start = 1 + c_at + 1 + us_at + 1;
        Some(((row, col), local_start))
    };
    match parse() {
        Some((rc, start)) => (Some(rc), &id[start..]),
        None => (None, id),
    }
}

/// Prefixes an element id with a panel scope.
pub fn scoped_id(row: u32, col: u32, local: &str) -> String {
    alloc::format!("r{row}c{col}_{local}")
}

/// Canonical rendering of an axis value: integers print without a decimal
/// point, everything else uses the shortest round-trip float form. Tick
/// labels and grounding prompts share this so they always agree.
pub fn fmt_axis_value(v: f64) -> String {
    if v == crate::mathf::trunc(v) && crate::mathf::abs(v) < 1e15 {
        alloc::format!("{}", v as i64)
    } else {
        alloc::format!("{v}")
    }
}
