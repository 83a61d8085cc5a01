//! Instrumented chart renderer. Alongside the pixels it emits exact element
//! annotations (measured from what was actually painted, never re-derived)
//! and the per-series pixel sets that survive occlusion, so downstream
//! masking and grounding can be scored against ground truth.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::annotation::{fmt_axis_value, ElementAnnotation, ElementCategory};
use crate::chart::axis::AxisMap;
use crate::chart::spec::{ChartKind, ChartSpec, LegendPosition};
use crate::chart::ChartError;
use crate::color::{BLACK, WHITE};
use crate::font;
use crate::geom::{BBox, Point};
use crate::mathf;
use crate::raster::{PixelRect, RasterImage};

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub image: RasterImage,
    pub annotations: Vec<ElementAnnotation>,
    pub x_axis: AxisMap,
    pub y_axis: AxisMap,
    /// For each series, the pixels it owns in the final image (occlusion
    /// resolved: a pixel repainted by a later series belongs to that one,
    /// and pixels hidden under the legend belong to nobody).
    pub series_pixels: Vec<Vec<(u32, u32)>>,
}

struct Layout {
    plot_left: u32,
    plot_top: u32,
    plot_right: u32,
    plot_bottom: u32,
    legend_origin: (u32, u32),
    legend_w: u32,
    legend_h: u32,
    title_scale: u32,
}

const LEGEND_PAD: u32 = 4;
const LEGEND_ICON_W: u32 = 12;
const LEGEND_ICON_H: u32 = 8;
const LEGEND_ROW_H: u32 = 12;

fn legend_dims(spec: &ChartSpec) -> (u32, u32) {
    let max_name = spec.series.iter().map(|s| s.name.chars().count()).max().unwrap_or(0) as u32;
    let w = LEGEND_PAD + LEGEND_ICON_W + 3 + max_name * font::GLYPH_SIZE + LEGEND_PAD;
    let h = 2 * LEGEND_PAD + spec.series.len() as u32 * LEGEND_ROW_H - (LEGEND_ROW_H - LEGEND_ICON_H);
    (w, h)
}

fn layout(spec: &ChartSpec) -> Result<Layout, ChartError> {
    let (w, h) = spec.canvas;
    let too_small = Err(ChartError::CanvasTooSmall { width: w, height: h });

    let title_len = spec.title.chars().count() as u32;
    let title_scale = if 2 * font::GLYPH_SIZE * title_len + 8 <= w {
        2
    } else if font::GLYPH_SIZE * title_len + 8 <= w {
        1
    } else {
        return too_small;
    };

    let (legend_w, legend_h) = legend_dims(spec);
    let plot_left = 64u32;
    let plot_top = 40u32;
    let mut plot_right = w as i64 - 20;
    let mut plot_bottom = h as i64 - 52;

    if spec.legend_position == LegendPosition::RightOfAxes {
        plot_right -= legend_w as i64 + 8;
    }
    if spec.legend_position == LegendPosition::BelowAxes {
        plot_bottom -= legend_h as i64 + 6;
    }
    if plot_right - (plot_left as i64) < 60 || plot_bottom - (plot_top as i64) < 60 {
        return too_small;
    }
    let (plot_right, plot_bottom) = (plot_right as u32, plot_bottom as u32);

    let legend_origin = match spec.legend_position {
        LegendPosition::InsideTopRight => {
            let x = plot_right as i64 - legend_w as i64 - 6;
            if x <= plot_left as i64 {
                return too_small;
            }
            (x as u32, plot_top + 6)
        }
        LegendPosition::RightOfAxes => (plot_right + 8, plot_top),
        LegendPosition::BelowAxes => {
            let x = (w as i64 - legend_w as i64) / 2;
            if x < 0 || plot_bottom + 40 + legend_h > h {
                return too_small;
            }
            (x as u32, plot_bottom + 40)
        }
    };

    Ok(Layout {
        plot_left,
        plot_top,
        plot_right,
        plot_bottom,
        legend_origin,
        legend_w,
        legend_h,
        title_scale,
    })
}

/// Paints series pixels while tracking ownership. Data never crosses the
/// plot border: painting clips to the strict interior.
struct DataLayer {
    owner: Vec<u16>,
    width: u32,
    interior: (u32, u32, u32, u32), // x0, y0, x1, y1 inclusive
}

const NO_OWNER: u16 = u16::MAX;

impl DataLayer {
    fn new(img: &RasterImage, lay: &Layout) -> Self {
        Self {
            owner: vec![NO_OWNER; img.width() as usize * img.height() as usize],
            width: img.width(),
            interior: (
                lay.plot_left + 1,
                lay.plot_top + 1,
                lay.plot_right - 1,
                lay.plot_bottom - 1,
            ),
        }
    }

    fn paint(&mut self, img: &mut RasterImage, x: i64, y: i64, series: usize, color: crate::color::ColorRGB) {
        let (x0, y0, x1, y1) = self.interior;
        if x < x0 as i64 || x > x1 as i64 || y < y0 as i64 || y > y1 as i64 {
            return;
        }
        let (x, y) = (x as u32, y as u32);
        img.set(x, y, color);
        self.owner[(y * self.width + x) as usize] = series as u16;
    }

    fn clear(&mut self, x: u32, y: u32) {
        self.owner[(y * self.width + x) as usize] = NO_OWNER;
    }

    fn collect(&self, n_series: usize, height: u32) -> Vec<Vec<(u32, u32)>> {
        let mut out = vec![Vec::new(); n_series];
        for y in 0..height {
            for x in 0..self.width {
                let o = self.owner[(y * self.width + x) as usize];
                if o != NO_OWNER {
                    out[o as usize].push((x, y));
                }
            }
        }
        out
    }
}

pub fn render_chart(spec: &ChartSpec) -> Result<RenderOutput, ChartError> {
    spec.validate()?;
    let lay = layout(spec)?;
    let (w, h) = spec.canvas;
    let mut img = RasterImage::new(w, h);
    let mut anns: Vec<ElementAnnotation> = Vec::new();

    // Ticks map onto an interior band two pixels inside the border so data
    // at the extreme ticks never lands on the border itself.
    let x_axis = AxisMap::new(
        (spec.x_ticks[0], *spec.x_ticks.last().unwrap()),
        (lay.plot_left as f64 + 2.0, lay.plot_right as f64 - 2.0),
    )
    .map_err(|e| ChartError::InvalidSpec(alloc::format!("x axis: {e}")))?;
    let y_axis = AxisMap::new(
        (spec.y_ticks[0], *spec.y_ticks.last().unwrap()),
        (lay.plot_bottom as f64 - 2.0, lay.plot_top as f64 + 2.0),
    )
    .map_err(|e| ChartError::InvalidSpec(alloc::format!("y axis: {e}")))?;

    // Plot border and its annotation (pixel-area convention: the box spans
    // the painted border rows and columns).
    img.stroke_rect(
        PixelRect {
            x: lay.plot_left,
            y: lay.plot_top,
            w: lay.plot_right - lay.plot_left + 1,
            h: lay.plot_bottom - lay.plot_top + 1,
        },
        BLACK,
    );
    anns.push(ElementAnnotation::boxed(
        "subplot",
        ElementCategory::Subplot,
        BBox::new(
            lay.plot_left as f64,
            lay.plot_top as f64,
            lay.plot_right as f64 + 1.0,
            lay.plot_bottom as f64 + 1.0,
        ),
    ));

    // Series data with ownership tracking.
    let mut data = DataLayer::new(&img, &lay);
    for (si, series) in spec.series.iter().enumerate() {
        let c = series.color;
        match spec.kind {
            ChartKind::Line => {
                let px: Vec<Point> = series
                    .points
                    .iter()
                    .map(|&(x, y)| Point::new(x_axis.value_to_pixel(x), y_axis.value_to_pixel(y)))
                    .collect();
                for pair in px.windows(2) {
                    crate::raster::for_each_segment_pixel(pair[0], pair[1], |x, y, _| {
                        data.paint(&mut img, x, y, si, c);
                    });
                }
                if px.len() == 1 {
                    data.paint(
                        &mut img,
                        mathf::round(px[0].x) as i64,
                        mathf::round(px[0].y) as i64,
                        si,
                        c,
                    );
                }
            }
            ChartKind::Scatter => {
                for &(x, y) in &series.points {
                    let cx = mathf::round(x_axis.value_to_pixel(x)) as i64;
                    let cy = mathf::round(y_axis.value_to_pixel(y)) as i64;
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            data.paint(&mut img, cx + dx, cy + dy, si, c);
                        }
                    }
                }
            }
            ChartKind::Bar => {
                let baseline = mathf::round(y_axis.value_to_pixel(spec.y_ticks[0])) as i64;
                let slot = bar_slot_width(spec, &x_axis);
                let group_w = slot * 0.8;
                let bar_w = mathf::max(mathf::floor(group_w / spec.series.len() as f64), 2.0) as i64;
                for &(x, y) in &series.points {
                    let cx = x_axis.value_to_pixel(x);
                    let x0 = mathf::round(cx - group_w / 2.0) as i64 + si as i64 * bar_w;
                    let y_top = mathf::round(y_axis.value_to_pixel(y)) as i64;
                    for bx in x0..x0 + bar_w {
                        for by in y_top..=baseline {
                            data.paint(&mut img, bx, by, si, c);
                        }
                    }
                }
            }
        }
    }

    // Title and axis labels, annotated from exact lit extents.
    let title_w = font::measure_text(&spec.title, lay.title_scale).0;
    let title_bbox = font::draw_text(
        &mut img,
        (w as i64 - title_w as i64) / 2,
        6,
        &spec.title,
        lay.title_scale,
        BLACK,
    );
    if let Some(b) = title_bbox {
        anns.push(
            ElementAnnotation::boxed("title", ElementCategory::TextLabel, b)
                .with_label(spec.title.clone()),
        );
    }

    let plot_w = lay.plot_right - lay.plot_left;
    let xl_w = font::measure_text(&spec.x_label, 1).0;
    let xl_bbox = font::draw_text(
        &mut img,
        lay.plot_left as i64 + (plot_w as i64 - xl_w as i64) / 2,
        lay.plot_bottom as i64 + 22,
        &spec.x_label,
        1,
        BLACK,
    );
    if let Some(b) = xl_bbox {
        anns.push(
            ElementAnnotation::boxed("x_label", ElementCategory::TextLabel, b)
                .with_label(spec.x_label.clone()),
        );
    }

    let plot_h = lay.plot_bottom - lay.plot_top;
    let yl_h = font::measure_text(&spec.y_label, 1).0; // strip height after rotation
    let yl_bbox = font::draw_text_rot90(
        &mut img,
        8,
        lay.plot_top as i64 + (plot_h as i64 - yl_h as i64) / 2,
        &spec.y_label,
        1,
        BLACK,
    );
    if let Some(b) = yl_bbox {
        anns.push(
            ElementAnnotation::boxed("y_label", ElementCategory::TextLabel, b)
                .with_label(spec.y_label.clone()),
        );
    }

    // Tick marks, tick labels, and point annotations. The annotation point
    // is the exact (fractional) mapped position on the axis line.
    for (i, &v) in spec.x_ticks.iter().enumerate() {
        let px = x_axis.value_to_pixel(v);
        let col = mathf::round(px) as i64;
        for dy in 1..=5 {
            img.put(col, lay.plot_bottom as i64 + dy, BLACK);
        }
        let label = fmt_axis_value(v);
        let lw = font::measure_text(&label, 1).0;
        font::draw_text(
            &mut img,
            col - lw as i64 / 2,
            lay.plot_bottom as i64 + 7,
            &label,
            1,
            BLACK,
        );
        anns.push(
            ElementAnnotation::pointed(
                alloc::format!("x_tick_{i}"),
                ElementCategory::AxisTick,
                Point::new(px, lay.plot_bottom as f64),
            )
            .with_axis_value(v),
        );
    }
    for (i, &v) in spec.y_ticks.iter().enumerate() {
        let py = y_axis.value_to_pixel(v);
        let row = mathf::round(py) as i64;
        for dx in 1..=5 {
            img.put(lay.plot_left as i64 - dx, row, BLACK);
        }
        let label = fmt_axis_value(v);
        let lw = font::measure_text(&label, 1).0;
        font::draw_text(&mut img, lay.plot_left as i64 - 6 - lw as i64, row - 4, &label, 1, BLACK);
        anns.push(
            ElementAnnotation::pointed(
                alloc::format!("y_tick_{i}"),
                ElementCategory::AxisTick,
                Point::new(lay.plot_left as f64, py),
            )
            .with_axis_value(v),
        );
    }

    // Legend last: it may sit on top of data, in which case the hidden
    // pixels stop belonging to their series.
    let (lx, ly) = lay.legend_origin;
    let legend_rect = PixelRect { x: lx, y: ly, w: lay.legend_w, h: lay.legend_h };
    img.fill_rect(legend_rect, WHITE);
    for yy in ly..(ly + lay.legend_h).min(h) {
        for xx in lx..(lx + lay.legend_w).min(w) {
            data.clear(xx, yy);
        }
    }
    img.stroke_rect(legend_rect, BLACK);
    anns.push(ElementAnnotation::boxed(
        "legend",
        ElementCategory::LegendRegion,
        BBox::new(lx as f64, ly as f64, (lx + lay.legend_w) as f64, (ly + lay.legend_h) as f64),
    ));
    for (si, series) in spec.series.iter().enumerate() {
        let row_y = ly + LEGEND_PAD + si as u32 * LEGEND_ROW_H;
        let icon = PixelRect { x: lx + LEGEND_PAD, y: row_y, w: LEGEND_ICON_W, h: LEGEND_ICON_H };
        img.fill_rect(icon, series.color);
        font::draw_text(
            &mut img,
            (lx + LEGEND_PAD + LEGEND_ICON_W + 3) as i64,
            row_y as i64,
            &series.name,
            1,
            BLACK,
        );
        anns.push(
            ElementAnnotation::boxed(
                alloc::format!("legend_item_{}", series.name),
                ElementCategory::LegendRegion,
                BBox::new(
                    icon.x as f64 - 1.0,
                    icon.y as f64 - 1.0,
                    (icon.x + icon.w) as f64 + 1.0,
                    (icon.y + icon.h) as f64 + 1.0,
                ),
            )
            .with_label(series.name.clone()),
        );
    }

    let series_pixels = data.collect(spec.series.len(), h);
    Ok(RenderOutput { image: img, annotations: anns, x_axis, y_axis, series_pixels })
}

/// Pixel distance between adjacent bar groups: the smallest gap between
/// consecutive distinct x positions, or most of the plot for a single group.
fn bar_slot_width(spec: &ChartSpec, x_axis: &AxisMap) -> f64 {
    let mut xs: Vec<f64> = spec.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let mut min_gap = f64::INFINITY;
    for w in xs.windows(2) {
        let gap = mathf::abs(x_axis.value_to_pixel(w[1]) - x_axis.value_to_pixel(w[0]));
        min_gap = mathf::min(min_gap, gap);
    }
    if min_gap.is_finite() {
        min_gap
    } else {
        mathf::abs(x_axis.pixel_range.1 - x_axis.pixel_range.0)
    }
}

/// String summary used in corpus descriptions, e.g. `"line chart, 2 series"`.
pub fn short_description(spec: &ChartSpec) -> String {
    alloc::format!("{} chart, {} series", spec.kind.name(), spec.series.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::spec::{generate_chart_spec, generate_chart_spec_with, SpecOptions};
    use crate::color::color_distance;

    fn spec_for(seed: u64, kind: ChartKind) -> ChartSpec {
        generate_chart_spec(seed, kind)
    }

    #[test]
    fn rendering_is_deterministic() {
        let spec = spec_for(11, ChartKind::Line);
        let a = render_chart(&spec).unwrap();
        let b = render_chart(&spec).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.annotations, b.annotations);
        assert_eq!(a.series_pixels, b.series_pixels);
    }

    #[test]
    fn annotations_cover_all_elements() {
        let spec = spec_for(3, ChartKind::Line);
        let out = render_chart(&spec).unwrap();
        let ids: Vec<&str> = out.annotations.iter().map(|a| a.element_id.as_str()).collect();
        assert!(ids.contains(&"subplot"));
        assert!(ids.contains(&"legend"));
        assert!(ids.contains(&"title"));
        assert!(ids.contains(&"x_label"));
        assert!(ids.contains(&"y_label"));
        for i in 0..spec.x_ticks.len() {
            assert!(ids.contains(&alloc::format!("x_tick_{i}").as_str()));
        }
        for s in &spec.series {
            assert!(ids.contains(&alloc::format!("legend_item_{}", s.name).as_str()));
        }
        for ann in &out.annotations {
            assert!(ann.geometry_is_consistent(), "{}", ann.element_id);
        }
    }

    #[test]
    fn tick_annotations_match_axis_map_exactly() {
        let spec = spec_for(5, ChartKind::Scatter);
        let out = render_chart(&spec).unwrap();
        for ann in &out.annotations {
            if ann.category != ElementCategory::AxisTick {
                continue;
            }
            let v = ann.axis_value.unwrap();
            let p = ann.point.unwrap();
            if ann.element_id.starts_with("x_tick") {
                assert_eq!(p.x, out.x_axis.value_to_pixel(v));
            } else {
                assert_eq!(p.y, out.y_axis.value_to_pixel(v));
            }
        }
    }

    #[test]
    fn series_pixels_carry_their_color() {
        for kind in ChartKind::ALL {
            let spec = spec_for(9, kind);
            let out = render_chart(&spec).unwrap();
            assert_eq!(out.series_pixels.len(), spec.series.len());
            for (si, px) in out.series_pixels.iter().enumerate() {
                assert!(!px.is_empty(), "{kind:?} series {si} painted nothing");
                for &(x, y) in px {
                    assert_eq!(out.image.get(x, y), spec.series[si].color, "{kind:?} ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn every_series_colored_pixel_is_owned() {
        let spec = generate_chart_spec_with(
            21,
            ChartKind::Line,
            &SpecOptions { series_count: Some(2), ..Default::default() },
        );
        let out = render_chart(&spec).unwrap();
        let subplot = out.annotations.iter().find(|a| a.element_id == "subplot").unwrap();
        let b = subplot.bbox.unwrap();
        let legend = out.annotations.iter().find(|a| a.element_id == "legend").unwrap().bbox.unwrap();
        for (si, series) in spec.series.iter().enumerate() {
            let owned = &out.series_pixels[si];
            let mut found = 0usize;
            for y in (b.y1 as u32 + 1)..(b.y2 as u32 - 1) {
                for x in (b.x1 as u32 + 1)..(b.x2 as u32 - 1) {
                    if legend.contains_point(crate::geom::Point::new(x as f64, y as f64)) {
                        continue;
                    }
                    if out.image.get(x, y) == series.color {
                        assert!(owned.contains(&(x, y)), "series {si} pixel ({x},{y}) unowned");
                        found += 1;
                    }
                }
            }
            assert_eq!(found, owned.len());
        }
    }

    #[test]
    fn data_stays_inside_plot_border() {
        for kind in ChartKind::ALL {
            let spec = spec_for(13, kind);
            let out = render_chart(&spec).unwrap();
            let b = out.annotations.iter().find(|a| a.element_id == "subplot").unwrap().bbox.unwrap();
            for px in out.series_pixels.iter().flatten() {
                let (x, y) = (px.0 as f64, px.1 as f64);
                assert!(
                    x > b.x1 && x < b.x2 - 1.0 && y > b.y1 && y < b.y2 - 1.0,
                    "{kind:?} data pixel ({x},{y}) touches the border"
                );
            }
        }
    }

    #[test]
    fn legend_icons_are_solid_series_color() {
        let spec = generate_chart_spec_with(
            2,
            ChartKind::Bar,
            &SpecOptions { series_count: Some(3), ..Default::default() },
        );
        let out = render_chart(&spec).unwrap();
        for (si, series) in spec.series.iter().enumerate() {
            let id = alloc::format!("legend_item_{}", series.name);
            let ann = out.annotations.iter().find(|a| a.element_id == id).unwrap();
            let b = ann.bbox.unwrap();
            let icon_center = out.image.get(
                ((b.x1 + b.x2) / 2.0) as u32,
                ((b.y1 + b.y2) / 2.0) as u32,
            );
            assert_eq!(icon_center, series.color, "series {si}");
            assert_eq!(ann.label_text.as_deref(), Some(series.name.as_str()));
        }
    }

    #[test]
    fn legend_positions_respect_plot_geometry() {
        for pos in [
            LegendPosition::InsideTopRight,
            LegendPosition::RightOfAxes,
            LegendPosition::BelowAxes,
        ] {
            let spec = generate_chart_spec_with(
                4,
                ChartKind::Line,
                &SpecOptions { legend_position: Some(pos), ..Default::default() },
            );
            let out = render_chart(&spec).unwrap();
            let plot = out.annotations.iter().find(|a| a.element_id == "subplot").unwrap().bbox.unwrap();
            let legend = out.annotations.iter().find(|a| a.element_id == "legend").unwrap().bbox.unwrap();
            match pos {
                LegendPosition::InsideTopRight => {
                    assert!(plot.intersection_area(&legend) == legend.area(), "legend inside plot");
                }
                LegendPosition::RightOfAxes => {
                    assert!(legend.x1 > plot.x2, "legend right of plot");
                }
                LegendPosition::BelowAxes => {
                    assert!(legend.y1 > plot.y2, "legend below plot");
                }
            }
        }
    }

    #[test]
    fn bars_rest_on_the_baseline() {
        let spec = spec_for(6, ChartKind::Bar);
        let out = render_chart(&spec).unwrap();
        let baseline = mathf::round(out.y_axis.value_to_pixel(spec.y_ticks[0])) as u32;
        for (si, px) in out.series_pixels.iter().enumerate() {
            let max_y = px.iter().map(|p| p.1).max().unwrap();
            assert_eq!(max_y, baseline, "series {si} bottom row");
        }
    }

    #[test]
    fn canvas_too_small_is_reported() {
        let mut spec = spec_for(1, ChartKind::Line);
        spec.canvas = (150, 110);
        assert!(matches!(render_chart(&spec), Err(ChartError::CanvasTooSmall { .. })));
    }

    #[test]
    fn tick_columns_show_tick_marks() {
        let spec = spec_for(17, ChartKind::Line);
        let out = render_chart(&spec).unwrap();
        let plot_bottom = out
            .annotations
            .iter()
            .find(|a| a.element_id == "subplot")
            .unwrap()
            .bbox
            .unwrap()
            .y2 as i64
            - 1;
        for ann in out.annotations.iter().filter(|a| a.element_id.starts_with("x_tick")) {
            let col = mathf::round(ann.point.unwrap().x) as u32;
            let below = out.image.get(col, (plot_bottom + 2) as u32);
            assert_eq!(below, BLACK, "tick mark under {}", ann.element_id);
        }
    }

    #[test]
    fn no_antialiasing_every_pixel_is_a_known_color() {
        let spec = spec_for(8, ChartKind::Line);
        let out = render_chart(&spec).unwrap();
        let mut palette: Vec<crate::color::ColorRGB> = alloc::vec![WHITE, BLACK];
        palette.extend(spec.series.iter().map(|s| s.color));
        for y in 0..out.image.height() {
            for x in 0..out.image.width() {
                let c = out.image.get(x, y);
                assert!(
                    palette.iter().any(|p| color_distance(*p, c) == 0.0),
                    "unexpected blended color {c:?} at ({x},{y})"
                );
            }
        }
    }
}
