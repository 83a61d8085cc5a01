//! Localization metrics: box IoU and keypoint PCK.

use crate::geom::{BBox, Point};
use crate::mathf;

/// Intersection-over-union of two boxes. Degenerate boxes (zero area) yield
/// 0.0 rather than NaN.
pub fn bbox_iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    inter / union
}

/// PCK hit test: the prediction counts as correct when its Euclidean
/// distance to the truth is within `alpha * max(image_w, image_h)`.
/// The comparison is inclusive, so a distance exactly at the threshold hits.
pub fn pck_hit(pred: Point, truth: Point, image_w: u32, image_h: u32, alpha: f64) -> bool {
    let scale = mathf::max(image_w as f64, image_h as f64);
    pred.distance(truth) <= alpha * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    /// Counting oracle for IoU: rasterize both boxes onto a fine integer
    /// grid (`s` cells per unit) and count cells. Exact for boxes whose
    /// coordinates are multiples of `1/s`.
    fn iou_by_counting(a: &BBox, b: &BBox, s: i64) -> f64 {
        let cells = |r: &BBox| -> i64 {
            let w = (r.x2 * s as f64) as i64 - (r.x1 * s as f64) as i64;
            let h = (r.y2 * s as f64) as i64 - (r.y1 * s as f64) as i64;
            w * h
        };
        let ix1 = mathf::max(a.x1, b.x1);
        let iy1 = mathf::max(a.y1, b.y1);
        let ix2 = mathf::min(a.x2, b.x2);
        let iy2 = mathf::min(a.y2, b.y2);
        let inter = if ix2 > ix1 && iy2 > iy1 {
            cells(&BBox::new(ix1, iy1, ix2, iy2))
        } else {
            0
        };
        let union = cells(a) + cells(b) - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    #[test]
    fn iou_of_offset_squares_counts_to_25_over_175() {
        let a = BBox::new(0.0, 0.0, 10.0, 10.0);
        let b = BBox::new(5.0, 5.0, 15.0, 15.0);
        // Oracle: 5x5 intersection, 100 + 100 - 25 union.
        assert_eq!(iou_by_counting(&a, &b, 1), 25.0 / 175.0);
        assert!((bbox_iou(&a, &b) - 25.0 / 175.0).abs() < 1e-15);
    }

    #[test]
    fn iou_matches_counting_oracle_on_fractional_boxes() {
        let a = BBox::new(0.5, 0.25, 4.75, 3.5);
        let b = BBox::new(2.25, 1.0, 6.0, 5.25);
        let oracle = iou_by_counting(&a, &b, 4);
        assert!((bbox_iou(&a, &b) - oracle).abs() < 1e-12);
    }

    #[test]
    fn iou_identity_disjoint_and_degenerate() {
        let a = BBox::new(3.0, 4.0, 9.0, 11.0);
        assert_eq!(bbox_iou(&a, &a), 1.0);
        let far = BBox::new(100.0, 100.0, 110.0, 111.0);
        assert_eq!(bbox_iou(&a, &far), 0.0);
        let line = BBox::new(0.0, 0.0, 0.0, 10.0);
        assert_eq!(bbox_iou(&line, &line), 0.0);
    }

    #[test]
    fn iou_is_symmetric_and_bounded() {
        let pairs = [
            (BBox::new(0.0, 0.0, 2.0, 2.0), BBox::new(1.0, 1.0, 3.0, 3.0)),
            (BBox::new(-5.0, -5.0, 5.0, 5.0), BBox::new(0.0, 0.0, 1.0, 1.0)),
        ];
        for (a, b) in pairs {
            let ab = bbox_iou(&a, &b);
            assert_eq!(ab, bbox_iou(&b, &a));
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    #[test]
    fn pck_threshold_on_1000x800_is_10px() {
        // alpha 0.01 on a 1000x800 image gives a 10px radius.
        let t = Point::new(500.0, 400.0);
        assert!(pck_hit(Point::new(500.0, 409.0), t, 1000, 800, 0.01)); // dist 9
        assert!(pck_hit(Point::new(500.0, 410.0), t, 1000, 800, 0.01)); // dist 10, inclusive
        assert!(!pck_hit(Point::new(500.0, 410.5), t, 1000, 800, 0.01)); // dist 10.5
    }

    #[test]
    fn pck_uses_larger_image_side() {
        let t = Point::new(0.0, 0.0);
        // 200x1000: threshold 10 regardless of which side is larger.
        assert!(pck_hit(Point::new(10.0, 0.0), t, 200, 1000, 0.01));
        assert!(!pck_hit(Point::new(10.1, 0.0), t, 200, 1000, 0.01));
    }

    #[test]
    fn pck_hits_scale_with_distance_brute_force() {
        // Sweep integer displacements and compare against a direct
        // distance check to guard the inclusivity convention.
        let t = Point::new(50.0, 50.0);
        let hits: Vec<bool> = (0..30)
            .map(|d| pck_hit(Point::new(50.0 + d as f64, 50.0), t, 2000, 500, 0.01))
            .collect();
        for (d, hit) in hits.iter().enumerate() {
            assert_eq!(*hit, d as f64 <= 20.0, "displacement {d}");
        }
    }
}
