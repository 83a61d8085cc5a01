//! In-memory RGB8 raster with the small set of drawing primitives the
//! renderer and the visual tools need. No anti-aliasing anywhere: every
//! painted pixel is exactly the requested color, which keeps color-keyed
//! masking and ground-truth bookkeeping exact.

use alloc::vec;
use alloc::vec::Vec;

use crate::color::{self, ColorRGB};
use crate::geom::{BBox, Point};
use crate::mathf;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

/// Integer pixel rectangle, `x..x+w` by `y..y+h`, always within the image
/// it was clamped against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl PixelRect {
    /// Converts a float box to pixels: floor/ceil outward, grow by `pad`,
    /// clamp to an image of the given size. `None` when nothing remains.
    pub fn from_bbox(b: &BBox, pad: u32, img_w: u32, img_h: u32) -> Option<PixelRect> {
        let pad = pad as i64;
        let x0 = (mathf::floor(b.x1) as i64 - pad).clamp(0, img_w as i64);
        let y0 = (mathf::floor(b.y1) as i64 - pad).clamp(0, img_h as i64);
        let x1 = (mathf::ceil(b.x2) as i64 + pad).clamp(0, img_w as i64);
        let y1 = (mathf::ceil(b.y2) as i64 + pad).clamp(0, img_h as i64);
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(PixelRect {
            x: x0 as u32,
            y: y0 as u32,
            w: (x1 - x0) as u32,
            h: (y1 - y0) as u32,
        })
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

impl RasterImage {
    /// White canvas. Panics on zero dimensions.
    pub fn new(width: u32, height: u32) -> Self {
        Self::with_fill(width, height, color::WHITE)
    }

    pub fn with_fill(width: u32, height: u32, fill: ColorRGB) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let n = (width as usize)
            .checked_mul(height as usize)
            .and_then(|p| p.checked_mul(3))
            .expect("image too large");
        let mut pixels = vec![0u8; n];
        for px in pixels.chunks_exact_mut(3) {
            px[0] = fill.r;
            px[1] = fill.g;
            px[2] = fill.b;
        }
        Self { width, height, pixels }
    }

    /// Rebuilds an image from raw RGB8 bytes (row-major).
    pub fn from_raw(width: u32, height: u32, pixels: Vec<u8>) -> Option<Self> {
        if width == 0 || height == 0 || pixels.len() != (width as usize) * (height as usize) * 3 {
            return None;
        }
        Some(Self { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    fn idx(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    /// Panics when out of bounds.
    pub fn get(&self, x: u32, y: u32) -> ColorRGB {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        let i = self.idx(x, y);
        ColorRGB::new(self.pixels[i], self.pixels[i + 1], self.pixels[i + 2])
    }

    /// Panics when out of bounds.
    pub fn set(&mut self, x: u32, y: u32, c: ColorRGB) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        let i = self.idx(x, y);
        self.pixels[i] = c.r;
        self.pixels[i + 1] = c.g;
        self.pixels[i + 2] = c.b;
    }

    /// Clipping write: coordinates outside the canvas are ignored.
    pub fn put(&mut self, x: i64, y: i64, c: ColorRGB) {
        if x >= 0 && y >= 0 && (x as u64) < self.width as u64 && (y as u64) < self.height as u64 {
            self.set(x as u32, y as u32, c);
        }
    }

    pub fn fill_rect(&mut self, rect: PixelRect, c: ColorRGB) {
        let x1 = rect.x.saturating_add(rect.w).min(self.width);
        let y1 = rect.y.saturating_add(rect.h).min(self.height);
        for y in rect.y.min(self.height)..y1 {
            for x in rect.x.min(self.width)..x1 {
                self.set(x, y, c);
            }
        }
    }

    /// 1 px rectangle outline along the rect border.
    pub fn stroke_rect(&mut self, rect: PixelRect, c: ColorRGB) {
        if rect.w == 0 || rect.h == 0 {
            return;
        }
        let x1 = rect.x + rect.w - 1;
        let y1 = rect.y + rect.h - 1;
        for x in rect.x..=x1 {
            self.put(x as i64, rect.y as i64, c);
            self.put(x as i64, y1 as i64, c);
        }
        for y in rect.y..=y1 {
            self.put(rect.x as i64, y as i64, c);
            self.put(x1 as i64, y as i64, c);
        }
    }

    pub fn crop(&self, rect: PixelRect) -> Option<RasterImage> {
        let x1 = rect.x.checked_add(rect.w)?.min(self.width);
        let y1 = rect.y.checked_add(rect.h)?.min(self.height);
        if rect.x >= x1 || rect.y >= y1 {
            return None;
        }
        let (w, h) = (x1 - rect.x, y1 - rect.y);
        let mut out = RasterImage::new(w, h);
        for y in 0..h {
            let src = self.idx(rect.x, rect.y + y);
            let dst = out.idx(0, y);
            out.pixels[dst..dst + w as usize * 3]
                .copy_from_slice(&self.pixels[src..src + w as usize * 3]);
        }
        Some(out)
    }

    /// Copies `src` onto `self` with its top-left corner at `(x0, y0)`,
    /// clipped at the canvas edges.
    pub fn blit(&mut self, src: &RasterImage, x0: u32, y0: u32) {
        let w = src.width.min(self.width.saturating_sub(x0));
        let h = src.height.min(self.height.saturating_sub(y0));
        for y in 0..h {
            let s = src.idx(0, y);
            let d = self.idx(x0, y0 + y);
            self.pixels[d..d + w as usize * 3].copy_from_slice(&src.pixels[s..s + w as usize * 3]);
        }
    }

    /// Nearest-neighbor resampling. Output dimensions are
    /// `ceil(dim * scale)`, never below 1. Requires `scale > 0`.
    pub fn scale_nearest(&self, scale: f64) -> RasterImage {
        assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
        let ow = mathf::max(mathf::ceil(self.width as f64 * scale), 1.0) as u32;
        let oh = mathf::max(mathf::ceil(self.height as f64 * scale), 1.0) as u32;
        let mut out = RasterImage::new(ow, oh);
        for y in 0..oh {
            let sy = (mathf::floor(y as f64 / scale) as i64).clamp(0, self.height as i64 - 1) as u32;
            for x in 0..ow {
                let sx =
                    (mathf::floor(x as f64 / scale) as i64).clamp(0, self.width as i64 - 1) as u32;
                let c = self.get(sx, sy);
                out.set(x, y, c);
            }
        }
        out
    }

    pub fn draw_segment(&mut self, a: Point, b: Point, c: ColorRGB) {
        for_each_segment_pixel(a, b, |x, y, _| self.put(x, y, c));
    }

    /// Dash pattern phased by arc length from `a`: `on` lit pixels then
    /// `off` dark ones, starting lit. The final endpoint does not start a
    /// new dash.
    pub fn draw_dashed_segment(&mut self, a: Point, b: Point, c: ColorRGB, on: f64, off: f64) {
        assert!(on > 0.0 && off >= 0.0);
        let period = on + off;
        let len = a.distance(b);
        for_each_segment_pixel(a, b, |x, y, t| {
            let phase = t - mathf::floor(t / period) * period;
            let lit = phase < on && (t < len || len == 0.0 || off == 0.0);
            if lit {
                self.put(x, y, c);
            }
        });
    }

    /// Filled square dot: side `2 * half + 1` centered on the point.
    pub fn draw_dot(&mut self, center: Point, half: i64, c: ColorRGB) {
        let cx = mathf::round(center.x) as i64;
        let cy = mathf::round(center.y) as i64;
        for y in -half..=half {
            for x in -half..=half {
                self.put(cx + x, cy + y, c);
            }
        }
    }

    /// Inclusive extents `(min_x, min_y, max_x, max_y)` of pixels that
    /// differ from `background`, or `None` when the image is uniform.
    pub fn lit_extents(&self, background: ColorRGB) -> Option<(u32, u32, u32, u32)> {
        let mut ext: Option<(u32, u32, u32, u32)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) != background {
                    ext = Some(match ext {
                        None => (x, y, x, y),
                        Some((ax, ay, bx, by)) => (ax.min(x), ay.min(y), bx.max(x), by.max(y)),
                    });
                }
            }
        }
        ext
    }
}

/// Walks the segment from `a` to `b` sampling one pixel per unit of the
/// dominant axis, calling `f(x, y, arc_t)` for each sample. Consecutive
/// samples differ by at most one pixel per axis, so lines are connected.
pub fn for_each_segment_pixel(a: Point, b: Point, mut f: impl FnMut(i64, i64, f64)) {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let n = mathf::ceil(mathf::max(mathf::abs(dx), mathf::abs(dy))) as i64;
    let len = mathf::hypot(dx, dy);
    if n <= 0 {
        f(mathf::round(a.x) as i64, mathf::round(a.y) as i64, 0.0);
        return;
    }
    for k in 0..=n {
        let u = k as f64 / n as f64;
        f(
            mathf::round(a.x + u * dx) as i64,
            mathf::round(a.y + u * dy) as i64,
            u * len,
        );
    }
}

/// Lit arc-length intervals `[start, end)` of the dash schedule over a
/// segment of length `len`, half-open at `len` itself. A 50 px segment with
/// a 6 on / 4 off pattern yields five dashes.
pub fn dash_intervals(len: f64, on: f64, off: f64) -> Vec<(f64, f64)> {
    assert!(on > 0.0 && off >= 0.0 && len >= 0.0);
    let mut out = Vec::new();
    let period = on + off;
    let mut start = 0.0;
    while start < len {
        out.push((start, mathf::min(start + on, len)));
        if period == 0.0 {
            break;
        }
        start += period;
    }
    out
}
