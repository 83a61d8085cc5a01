//! Plane geometry primitives shared by the renderer, the metrics, and the
//! construction tools. Coordinates are f64 pixels, x right, y down.

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::mathf;

/// Serialized as a `[x, y]` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        (self.x, self.y).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let (x, y) = <(f64, f64)>::deserialize(de)?;
        Ok(Point::new(x, y))
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        mathf::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Axis-aligned box with `x1 <= x2` and `y1 <= y2` (enforced by `new`).
/// Serialized as a `[x1, y1, x2, y2]` quadruple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Serialize for BBox {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        (self.x1, self.y1, self.x2, self.y2).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let (x1, y1, x2, y2) = <(f64, f64, f64, f64)>::deserialize(de)?;
        Ok(BBox::new(x1, y1, x2, y2))
    }
}

impl BBox {
    /// Builds a box from any two opposite corners.
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self {
            x1: mathf::min(x1, x2),
            y1: mathf::min(y1, y2),
            x2: mathf::max(x1, x2),
            y2: mathf::max(y1, y2),
        }
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// Intersection area; zero when the boxes touch only at an edge or not
    /// at all.
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = mathf::min(self.x2, other.x2) - mathf::max(self.x1, other.x1);
        let h = mathf::min(self.y2, other.y2) - mathf::max(self.y1, other.y1);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= self.x1 && p.x <= self.x2 && p.y >= self.y1 && p.y <= self.y2
    }

    /// Grows the box by `pad` on every side.
    pub fn padded(&self, pad: f64) -> BBox {
        BBox::new(self.x1 - pad, self.y1 - pad, self.x2 + pad, self.y2 + pad)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> BBox {
        BBox::new(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)
    }
}

/// Error surfaced when a perpendicular foot is requested on a zero-length
/// line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegenerateLine;

/// Orthogonal projection of `p` onto the infinite line through `a` and `b`.
///
/// Fails only when `a == b` exactly; near-degenerate inputs are the caller's
/// concern (the drawing tools apply a pixel threshold on top of this).
pub fn foot_of_perpendicular(p: Point, a: Point, b: Point) -> Result<Point, DegenerateLine> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return Err(DegenerateLine);
    }
    let t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    Ok(Point::new(a.x + t * dx, a.y + t * dy))
}

/// 2D cross product of `u` and `v` (z component of the 3D cross).
pub fn cross(u: (f64, f64), v: (f64, f64)) -> f64 {
    u.0 * v.1 - u.1 * v.0
}

/// Dot product of direction vectors.
pub fn dot(u: (f64, f64), v: (f64, f64)) -> f64 {
    u.0 * v.0 + u.1 * v.1
}

/// Clips the infinite line through `p` with direction `d` to the rectangle,
/// returning the entry and exit points (Liang-Barsky). `None` when the line
/// misses the rectangle or `d` is zero.
pub fn clip_line_to_rect(p: Point, d: (f64, f64), rect: &BBox) -> Option<(Point, Point)> {
    if d.0 == 0.0 && d.1 == 0.0 {
        return None;
    }
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    // Each side contributes p + t*d clipped against one half-plane.
    let checks = [
        (-d.0, p.x - rect.x1),
        (d.0, rect.x2 - p.x),
        (-d.1, p.y - rect.y1),
        (d.1, rect.y2 - p.y),
    ];
    for (denom, num) in checks {
        if denom == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let t = num / denom;
            if denom < 0.0 {
                t0 = mathf::max(t0, t);
            } else {
                t1 = mathf::min(t1, t);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    let e = Point::new(p.x + t0 * d.0, p.y + t0 * d.1);
    let f = Point::new(p.x + t1 * d.0, p.y + t1 * d.1);
    Some((e, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_new_normalizes_corners() {
        let b = BBox::new(10.0, 20.0, 3.0, 4.0);
        assert_eq!(b, BBox { x1: 3.0, y1: 4.0, x2: 10.0, y2: 20.0 });
    }

    #[test]
    fn foot_lands_on_axis_projection() {
        // Projecting (3, 7) onto the x axis keeps x and zeroes y.
        let foot =
            foot_of_perpendicular(Point::new(3.0, 7.0), Point::new(0.0, 0.0), Point::new(10.0, 0.0))
                .unwrap();
        assert_eq!(foot, Point::new(3.0, 0.0));
    }

    #[test]
    fn foot_of_point_on_line_is_itself() {
        let a = Point::new(1.0, 1.0);
        let b = Point::new(5.0, 9.0);
        let p = Point::new(3.0, 5.0);
        let foot = foot_of_perpendicular(p, a, b).unwrap();
        assert!(foot.distance(p) < 1e-12);
    }

    #[test]
    fn foot_rejects_coincident_line_points() {
        let a = Point::new(2.0, 2.0);
        assert_eq!(foot_of_perpendicular(Point::new(0.0, 0.0), a, a), Err(DegenerateLine));
    }

    #[test]
    fn residual_is_orthogonal_to_line() {
        let p = Point::new(13.0, -4.5);
        let a = Point::new(-2.0, 3.0);
        let b = Point::new(7.5, 11.0);
        let foot = foot_of_perpendicular(p, a, b).unwrap();
        let along = (b.x - a.x, b.y - a.y);
        let resid = (p.x - foot.x, p.y - foot.y);
        assert!(mathf::abs(dot(along, resid)) < 1e-9);
    }

    #[test]
    fn clip_horizontal_line_spans_rect() {
        let rect = BBox::new(0.0, 0.0, 100.0, 50.0);
        let (e, f) = clip_line_to_rect(Point::new(40.0, 25.0), (1.0, 0.0), &rect).unwrap();
        assert_eq!(e, Point::new(0.0, 25.0));
        assert_eq!(f, Point::new(100.0, 25.0));
    }

    #[test]
    fn clip_misses_rect_entirely() {
        let rect = BBox::new(0.0, 0.0, 10.0, 10.0);
        assert!(clip_line_to_rect(Point::new(20.0, 20.0), (0.0, 1.0), &rect).is_none());
    }

    #[test]
    fn clip_diagonal_touches_corners() {
        let rect = BBox::new(0.0, 0.0, 10.0, 10.0);
        let (e, f) = clip_line_to_rect(Point::new(5.0, 5.0), (1.0, 1.0), &rect).unwrap();
        assert_eq!(e, Point::new(0.0, 0.0));
        assert_eq!(f, Point::new(10.0, 10.0));
    }

    #[test]
    fn intersection_area_zero_for_touching_boxes() {
        let a = BBox::new(0.0, 0.0, 10.0, 10.0);
        let b = BBox::new(10.0, 0.0, 20.0, 10.0);
        assert_eq!(a.intersection_area(&b), 0.0);
    }
}
