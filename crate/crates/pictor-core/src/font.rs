//! Bitmap text drawing on top of the 8x8 `font8x8` glyphs. Glyphs scale by
//! integer factors; painting reports the exact extents of lit pixels so
//! text annotations are pixel-true.

use font8x8::legacy::BASIC_LEGACY;

use crate::color::ColorRGB;
use crate::geom::BBox;
use crate::raster::RasterImage;

pub const GLYPH_SIZE: u32 = 8;

fn glyph(ch: char) -> [u8; 8] {
    let code = ch as usize;
    if code < BASIC_LEGACY.len() {
        BASIC_LEGACY[code]
    } else {
        BASIC_LEGACY[b'?' as usize]
    }
}

/// Nominal advance box of a string: `(8 * scale * chars, 8 * scale)`.
/// Actual lit extents are usually tighter; `draw_text` reports those.
pub fn measure_text(text: &str, scale: u32) -> (u32, u32) {
    let n = text.chars().count() as u32;
    (GLYPH_SIZE * scale * n, GLYPH_SIZE * scale)
}

struct Extents {
    min_x: i64,
    min_y: i64,
    max_x: i64,
    max_y: i64,
    any: bool,
}

impl Extents {
    fn new() -> Self {
        Self { min_x: 0, min_y: 0, max_x: 0, max_y: 0, any: false }
    }

    fn cover(&mut self, x: i64, y: i64) {
        if self.any {
            self.min_x = self.min_x.min(x);
            self.min_y = self.min_y.min(y);
            self.max_x = self.max_x.max(x);
            self.max_y = self.max_y.max(y);
        } else {
            *self = Self { min_x: x, min_y: y, max_x: x, max_y: y, any: true };
        }
    }

    /// Pixel-area box: the lit pixel (x, y) occupies [x, x+1) x [y, y+1).
    fn bbox(&self) -> Option<BBox> {
        self.any.then(|| {
            BBox::new(
                self.min_x as f64,
                self.min_y as f64,
                self.max_x as f64 + 1.0,
                self.max_y as f64 + 1.0,
            )
        })
    }
}

fn paint_glyphs(
    text: &str,
    scale: u32,
    mut paint: impl FnMut(i64, i64), // (px, py) in unrotated text space
) {
    let s = scale.max(1) as i64;
    for (i, ch) in text.chars().enumerate() {
        let rows = glyph(ch);
        let cx = i as i64 * GLYPH_SIZE as i64 * s;
        for (gy, row) in rows.iter().enumerate() {
            for gx in 0..8i64 {
                if row & (1 << gx) != 0 {
                    for sy in 0..s {
                        for sx in 0..s {
                            paint(cx + gx * s + sx, gy as i64 * s + sy);
                        }
                    }
                }
            }
        }
    }
}

/// Draws `text` with its advance box anchored at `(x, y)` top-left and
/// returns the exact bounding box of lit pixels (None for blank strings).
pub fn draw_text(
    img: &mut RasterImage,
    x: i64,
    y: i64,
    text: &str,
    scale: u32,
    color: ColorRGB,
) -> Option<BBox> {
    let mut ext = Extents::new();
    paint_glyphs(text, scale, |px, py| {
        let (dx, dy) = (x + px, y + py);
        img.put(dx, dy, color);
        ext.cover(dx, dy);
    });
    ext.bbox()
}

/// Draws `text` rotated a quarter turn counterclockwise (reading bottom to
/// top), with the vertical strip's top-left at `(x, y)`. Returns the exact
/// lit bounding box.
pub fn draw_text_rot90(
    img: &mut RasterImage,
    x: i64,
    y: i64,
    text: &str,
    scale: u32,
    color: ColorRGB,
) -> Option<BBox> {
    let (advance_w, _) = measure_text(text, scale.max(1));
    let strip_h = advance_w as i64;
    let mut ext = Extents::new();
    paint_glyphs(text, scale, |px, py| {
        let (dx, dy) = (x + py, y + strip_h - 1 - px);
        img.put(dx, dy, color);
        ext.cover(dx, dy);
    });
    ext.bbox()
}
