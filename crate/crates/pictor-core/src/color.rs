//! RGB color type and Euclidean color distance.

use serde::{Deserialize, Serialize};

use crate::mathf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColorRGB {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

pub const WHITE: ColorRGB = ColorRGB::new(255, 255, 255);
pub const BLACK: ColorRGB = ColorRGB::new(0, 0, 0);
pub const RED: ColorRGB = ColorRGB::new(214, 39, 40);

impl ColorRGB {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// Packs to `0xRRGGBB`; used for deterministic tie-breaking.
    pub const fn packed(self) -> u32 {
        ((self.r as u32) << 16) | ((self.g as u32) << 8) | (self.b as u32)
    }
}

/// Euclidean distance in RGB space; ranges over `[0, 255 * sqrt(3)]`.
pub fn color_distance(a: ColorRGB, b: ColorRGB) -> f64 {
    let dr = a.r as f64 - b.r as f64;
    let dg = a.g as f64 - b.g as f64;
    let db = a.b as f64 - b.b as f64;
    mathf::sqrt(dr * dr + dg * dg + db * db)
}
