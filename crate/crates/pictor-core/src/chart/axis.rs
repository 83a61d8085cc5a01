//! Affine value-to-pixel mapping for one axis.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisMap {
    /// Data values at the two reference positions (first tick, last tick).
    pub value_range: (f64, f64),
    /// Pixel coordinates of the same two positions. For y axes the first
    /// entry is the larger pixel row (values grow upward, rows downward).
    pub pixel_range: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisMapError {
    EmptyValueRange,
    EmptyPixelRange,
    NonFinite,
}

impl core::fmt::Display for AxisMapError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            AxisMapError::EmptyValueRange => "value range endpoints must differ",
            AxisMapError::EmptyPixelRange => "pixel range endpoints must differ",
            AxisMapError::NonFinite => "axis map endpoints must be finite",
        };
        f.write_str(msg)
    }
}

impl AxisMap {
    pub fn new(value_range: (f64, f64), pixel_range: (f64, f64)) -> Result<Self, AxisMapError> {
        let all = [value_range.0, value_range.1, pixel_range.0, pixel_range.1];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(AxisMapError::NonFinite);
        }
        if value_range.0 == value_range.1 {
            return Err(AxisMapError::EmptyValueRange);
        }
        if pixel_range.0 == pixel_range.1 {
            return Err(AxisMapError::EmptyPixelRange);
        }
        Ok(Self { value_range, pixel_range })
    }

    /// Maps a data value to a (fractional) pixel coordinate, extrapolating
    /// beyond the reference range.
    pub fn value_to_pixel(&self, value: f64) -> f64 {
        let (v0, v1) = self.value_range;
        let (p0, p1) = self.pixel_range;
        p0 + (value - v0) / (v1 - v0) * (p1 - p0)
    }

    /// Inverse of `value_to_pixel`.
    pub fn pixel_to_value(&self, pixel: f64) -> f64 {
        let (v0, v1) = self.value_range;
        let (p0, p1) = self.pixel_range;
        v0 + (pixel - p0) / (p1 - p0) * (v1 - v0)
    }

    pub fn value_span(&self) -> f64 {
        self.value_range.1 - self.value_range.0
    }
}

/// Free-function form of the forward mapping.
pub fn value_to_pixel(value: f64, map: &AxisMap) -> f64 {
    map.value_to_pixel(value)
}
