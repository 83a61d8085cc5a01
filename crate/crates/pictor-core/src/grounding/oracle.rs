//! The annotation-backed oracle backend and the offset decorator used for
//! controlled degradation studies.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::annotation::{split_scoped_id, ElementAnnotation, ElementCategory};
use crate::geom::Point;
use crate::grounding::prompt::{parse_element_prompt, tick_value_matches, ElementRef};
use crate::grounding::{
    Axis, Found, GroundingBackend, GroundingError, GroundingRequest, GroundingResult, TickMark,
};
use crate::mathf;

/// Perfect grounding over ground-truth annotations, keyed by image ref.
/// Prompts inside the canonical grammar resolve exactly; anything else is
/// `NotFound`.
#[derive(Debug, Clone, Default)]
pub struct OracleBackend {
    store: BTreeMap<String, Vec<ElementAnnotation>>,
}

impl OracleBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(image_ref: impl Into<String>, annotations: Vec<ElementAnnotation>) -> Self {
        let mut o = Self::new();
        o.insert(image_ref, annotations);
        o
    }

    pub fn insert(&mut self, image_ref: impl Into<String>, annotations: Vec<ElementAnnotation>) {
        self.store.insert(image_ref.into(), annotations);
    }

    pub fn annotations(&self, image_ref: &str) -> Option<&[ElementAnnotation]> {
        self.store.get(image_ref).map(|v| v.as_slice())
    }

    fn resolve<'a>(
        anns: &'a [ElementAnnotation],
        target: &ElementRef,
    ) -> Option<&'a ElementAnnotation> {
        let scope_of = |ann: &ElementAnnotation| split_scoped_id(&ann.element_id).0;
        anns.iter().find(|ann| match target {
            ElementRef::Subplot { row, col } => {
                ann.category == ElementCategory::Subplot
                    && (ann.grid_pos == Some((*row, *col)) || scope_of(ann) == Some((*row, *col)))
            }
            ElementRef::PlotArea { panel } => {
                ann.category == ElementCategory::Subplot
                    && match panel {
                        Some(rc) => ann.grid_pos == Some(*rc) || scope_of(ann) == Some(*rc),
                        None => scope_of(ann).is_none(),
                    }
            }
            ElementRef::Legend { item, panel } => {
                ann.category == ElementCategory::LegendRegion
                    && scope_of(ann) == *panel
                    && ann.label_text.as_deref() == item.as_deref()
            }
            ElementRef::Label { kind, panel } => {
                ann.category == ElementCategory::TextLabel
                    && scope_of(ann) == *panel
                    && ann.local_id() == kind.local_id()
            }
            ElementRef::Tick { axis, value, panel } => {
                ann.category == ElementCategory::AxisTick
                    && scope_of(ann) == *panel
                    && ann.local_id().starts_with(match axis {
                        Axis::X => "x_tick",
                        Axis::Y => "y_tick",
                    })
                    && ann.axis_value.is_some_and(|v| tick_value_matches(v, *value))
            }
            ElementRef::NamedPoint { label } => {
                ann.category == ElementCategory::GeomPoint
                    && ann.label_text.as_deref() == Some(label.as_str())
            }
            ElementRef::Opaque { .. } => false,
        })
    }
}

impl GroundingBackend for OracleBackend {
    fn id(&self) -> &str {
        "oracle"
    }

    fn ground(&self, req: &GroundingRequest<'_>) -> Result<GroundingResult, GroundingError> {
        let Some(anns) = self.store.get(req.image_ref) else {
            return Ok(GroundingResult::not_found());
        };
        let target = parse_element_prompt(req.prompt);
        match Self::resolve(anns, &target) {
            Some(ann) => match (ann.bbox, ann.point) {
                (Some(b), _) => Ok(GroundingResult::found_box(b)),
                (None, Some(p)) => Ok(GroundingResult::found_point(p)),
                (None, None) => Ok(GroundingResult::not_found()),
            },
            None => Ok(GroundingResult::not_found()),
        }
    }

    fn axis_ticks(
        &self,
        image_ref: &str,
        axis: Axis,
    ) -> Result<Option<Vec<TickMark>>, GroundingError> {
        let Some(anns) = self.store.get(image_ref) else {
            return Ok(Some(Vec::new()));
        };
        let prefix = match axis {
            Axis::X => "x_tick",
            Axis::Y => "y_tick",
        };
        let mut ticks: Vec<TickMark> = anns
            .iter()
            .filter(|a| {
                a.category == ElementCategory::AxisTick
                    && split_scoped_id(&a.element_id).0.is_none()
                    && a.local_id().starts_with(prefix)
            })
            .filter_map(|a| Some(TickMark { value: a.axis_value?, pixel: a.point? }))
            .collect();
        ticks.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("finite tick values"));
        Ok(Some(ticks))
    }
}

/// Decorator that shifts every grounded geometry by a fixed pixel offset.
/// `diagonal(inner, d)` displaces by `d` pixels total (d/sqrt(2) per axis),
/// which turns a perfect backend into one with a known localization error.
#[derive(Debug, Clone)]
pub struct OffsetBackend<B> {
    inner: B,
    dx: f64,
    dy: f64,
    id: String,
}

impl<B: GroundingBackend> OffsetBackend<B> {
    pub fn new(inner: B, dx: f64, dy: f64) -> Self {
        let id = alloc::format!("{}+offset({dx},{dy})", inner.id());
        Self { inner, dx, dy, id }
    }

    pub fn diagonal(inner: B, magnitude: f64) -> Self {
        let per_axis = magnitude / mathf::sqrt(2.0);
        Self::new(inner, per_axis, per_axis)
    }
}

impl<B: GroundingBackend> GroundingBackend for OffsetBackend<B> {
    fn id(&self) -> &str {
        &self.id
    }

    fn ground(&self, req: &GroundingRequest<'_>) -> Result<GroundingResult, GroundingError> {
        let mut res = self.inner.ground(req)?;
        res.found = match res.found {
            Found::Box(b) => Found::Box(b.translated(self.dx, self.dy)),
            Found::Point(p) => Found::Point(Point::new(p.x + self.dx, p.y + self.dy)),
            Found::NotFound => Found::NotFound,
        };
        Ok(res)
    }

    fn axis_ticks(
        &self,
        image_ref: &str,
        axis: Axis,
    ) -> Result<Option<Vec<TickMark>>, GroundingError> {
        Ok(self.inner.axis_ticks(image_ref, axis)?.map(|ticks| {
            ticks
                .into_iter()
                .map(|t| TickMark {
                    value: t.value,
                    pixel: Point::new(t.pixel.x + self.dx, t.pixel.y + self.dy),
                })
                .collect()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{generate_chart_spec, render_chart, ChartKind};
    use crate::grounding::{canonical_prompt, ground, TargetShape};
    use crate::raster::RasterImage;

    fn oracle_fixture() -> (RasterImage, Vec<ElementAnnotation>, OracleBackend) {
        let spec = generate_chart_spec(12, ChartKind::Line);
        let out = render_chart(&spec).unwrap();
        let oracle = OracleBackend::single("img", out.annotations.clone());
        (out.image, out.annotations, oracle)
    }

    #[test]
    fn oracle_round_trips_every_renderer_annotation() {
        let (img, anns, oracle) = oracle_fixture();
        for ann in &anns {
            let prompt = canonical_prompt(ann).expect(&ann.element_id);
            let expected =
                if ann.category.uses_box() { TargetShape::Box } else { TargetShape::Point };
            let req = GroundingRequest {
                image: &img,
                image_ref: "img",
                prompt: &prompt,
                expected,
            };
            let res = oracle.ground(&req).unwrap();
            match (res.found, ann.bbox, ann.point) {
                (Found::Box(b), Some(truth), _) => assert_eq!(b, truth, "{}", ann.element_id),
                (Found::Point(p), _, Some(truth)) => assert_eq!(p, truth, "{}", ann.element_id),
                other => panic!("{}: unexpected {other:?}", ann.element_id),
            }
        }
    }

    #[test]
    fn unknown_image_and_unknown_prompt_are_not_found() {
        let (img, _, oracle) = oracle_fixture();
        let req = GroundingRequest {
            image: &img,
            image_ref: "missing",
            prompt: "the legend",
            expected: TargetShape::Box,
        };
        assert_eq!(oracle.ground(&req).unwrap().found, Found::NotFound);
        let req = GroundingRequest {
            image: &img,
            image_ref: "img",
            prompt: "the legend entry for 'Nobody'",
            expected: TargetShape::Box,
        };
        assert_eq!(oracle.ground(&req).unwrap().found, Found::NotFound);
        let req = GroundingRequest {
            image: &img,
            image_ref: "img",
            prompt: "something else entirely",
            expected: TargetShape::Box,
        };
        assert_eq!(oracle.ground(&req).unwrap().found, Found::NotFound);
    }

    #[test]
    fn axis_ticks_come_back_sorted_with_values() {
        let (_, anns, oracle) = oracle_fixture();
        let ticks = oracle.axis_ticks("img", Axis::X).unwrap().unwrap();
        let n_truth = anns.iter().filter(|a| a.element_id.starts_with("x_tick")).count();
        assert_eq!(ticks.len(), n_truth);
        assert!(ticks.windows(2).all(|w| w[0].value < w[1].value));
        assert!(ticks.windows(2).all(|w| w[0].pixel.x < w[1].pixel.x));
    }

    #[test]
    fn offset_backend_shifts_by_diagonal_magnitude() {
        let (img, anns, oracle) = oracle_fixture();
        let shifted = OffsetBackend::diagonal(oracle.clone(), 10.0);
        let tick = anns.iter().find(|a| a.element_id == "x_tick_0").unwrap();
        let prompt = canonical_prompt(tick).unwrap();
        let req = GroundingRequest {
            image: &img,
            image_ref: "img",
            prompt: &prompt,
            expected: TargetShape::Point,
        };
        let truth = tick.point.unwrap();
        match shifted.ground(&req).unwrap().found {
            Found::Point(p) => {
                assert!((p.distance(truth) - 10.0).abs() < 1e-9, "total displacement 10px");
                assert!((p.x - truth.x - 10.0 / mathf::sqrt(2.0)).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        // Zero offset is the identity.
        let same = OffsetBackend::diagonal(oracle, 0.0);
        match same.ground(&req).unwrap().found {
            Found::Point(p) => assert_eq!(p, truth),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn clamped_ground_keeps_offset_results_inside_image() {
        let (img, _, oracle) = oracle_fixture();
        let shifted = OffsetBackend::new(oracle, 10_000.0, 0.0);
        let req = GroundingRequest {
            image: &img,
            image_ref: "img",
            prompt: "tick 0 on the y axis",
            expected: TargetShape::Point,
        };
        if let Found::Point(p) = ground(&shifted, &req).unwrap().found {
            assert!(p.x <= img.width() as f64);
        }
    }
}
