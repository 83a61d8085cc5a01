//! Tools that operate on rendered charts: cropping, magnification,
//! auxiliary guide lines, and per-series masking.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{ground_box, ground_point, GroundingUse, ToolConfig, ToolError, ToolOutput};
use crate::annotation::fmt_axis_value;
use crate::color::{self, color_distance, ColorRGB};
use crate::geom::{BBox, Point};
use crate::grounding::{parse_element_prompt, Axis, ElementRef, GroundingBackend};
use crate::mathf;
use crate::raster::{PixelRect, RasterImage};

/// Gap inserted between a cropped panel and a detached legend.
const LEGEND_GAP_PX: u32 = 4;

fn scope_suffix(panel: Option<(u32, u32)>) -> String {
    match panel {
        Some((r, c)) => format!(" of the subplot at row {r}, column {c}"),
        None => String::new(),
    }
}

/// Crops the region described by `target` out of `image`, keeping the
/// region's legend with it. A legend inside the target box comes along for
/// free; a spatially separate legend (outside the axes, or shared by a
/// panel grid) is cropped too and stacked under the target with a small
/// white gap, so downstream steps can still resolve series colors.
pub fn crop_subfigure(
    image: &RasterImage,
    image_ref: &str,
    target: &str,
    backend: &dyn GroundingBackend,
    cfg: &ToolConfig,
) -> Result<ToolOutput, ToolError> {
    let mut uses = Vec::new();
    let target_box = ground_box(backend, image, image_ref, target, &mut uses)?
        .ok_or(ToolError::GroundingMiss { prompt: target.to_string() })?;
    if target_box.width() < 4.0 || target_box.height() < 4.0 {
        return Err(ToolError::DegenerateRegion { what: target.to_string() });
    }

    // Only region-like targets have an associated legend worth chasing.
    let legend_prompt = match parse_element_prompt(target) {
        ElementRef::Subplot { row, col } => {
            Some(format!("the legend{}", scope_suffix(Some((row, col)))))
        }
        ElementRef::PlotArea { panel } => Some(format!("the legend{}", scope_suffix(panel))),
        _ => None,
    };
    let legend_box = match &legend_prompt {
        Some(p) => ground_box(backend, image, image_ref, p, &mut uses)?,
        None => None,
    };
    let detached = legend_box
        .as_ref()
        .filter(|lb| lb.intersection_area(&target_box) == 0.0)
        .cloned();

    let pad = cfg.crop_padding_px;
    let target_rect = PixelRect::from_bbox(&target_box, pad, image.width(), image.height())
        .ok_or(ToolError::DegenerateRegion { what: target.to_string() })?;
    let panel = image
        .crop(target_rect)
        .ok_or(ToolError::DegenerateRegion { what: target.to_string() })?;

    let (out, description) = match detached {
        Some(lb) => {
            let lrect = PixelRect::from_bbox(&lb, pad, image.width(), image.height())
                .ok_or(ToolError::DegenerateRegion { what: "the legend".to_string() })?;
            let legend = image
                .crop(lrect)
                .ok_or(ToolError::DegenerateRegion { what: "the legend".to_string() })?;
            let w = panel.width().max(legend.width());
            let h = panel.height() + LEGEND_GAP_PX + legend.height();
            let mut canvas = RasterImage::new(w, h);
            canvas.blit(&panel, 0, 0);
            canvas.blit(&legend, 0, panel.height() + LEGEND_GAP_PX);
            (canvas, format!("crop of {target} with its legend attached below"))
        }
        None => (panel, format!("crop of {target}")),
    };

    Ok(ToolOutput {
        image: out,
        description,
        tool: "crop_subfigure".to_string(),
        grounding: uses,
    })
}

/// Value windows for [`magnify_region`]. At least one axis must be given;
/// an omitted axis keeps the full plot-area extent.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AxisWindow {
    pub x: Option<(f64, f64)>,
    pub y: Option<(f64, f64)>,
}

struct PixelSpan {
    lo: f64,
    hi: f64,
}

fn window_span(
    backend: &dyn GroundingBackend,
    image: &RasterImage,
    image_ref: &str,
    axis: Axis,
    window: (f64, f64),
    uses: &mut Vec<GroundingUse>,
) -> Result<PixelSpan, ToolError> {
    if window.0 == window.1 {
        return Err(ToolError::EmptyWindow { axis: axis.name().as_bytes()[0] as char });
    }
    let mut px = [0.0f64; 2];
    for (slot, v) in px.iter_mut().zip([window.0, window.1]) {
        let prompt = format!("tick {} on the {} axis", fmt_axis_value(v), axis.name());
        let p = ground_point(backend, image, image_ref, &prompt, uses)?
            .ok_or(ToolError::GroundingMiss { prompt })?;
        *slot = match axis {
            Axis::X => p.x,
            Axis::Y => p.y,
        };
    }
    Ok(PixelSpan { lo: mathf::min(px[0], px[1]), hi: mathf::max(px[0], px[1]) })
}

/// Cuts out the part of the chart covering the requested value windows and
/// scales it up with nearest-neighbor sampling (no resampling artifacts; a
/// magnified pixel keeps its exact source color). The cut extends left and
/// below the windowed plot region by a fixed ruler margin so axis tick
/// labels stay readable in the output.
pub fn magnify_region(
    image: &RasterImage,
    image_ref: &str,
    window: &AxisWindow,
    scale: f64,
    backend: &dyn GroundingBackend,
    cfg: &ToolConfig,
) -> Result<ToolOutput, ToolError> {
    if !(scale.is_finite() && scale >= 1.0) {
        return Err(ToolError::BadArgument { message: format!("scale {scale} must be >= 1") });
    }
    if window.x.is_none() && window.y.is_none() {
        return Err(ToolError::BadArgument {
            message: "magnify window needs at least one axis range".to_string(),
        });
    }

    let mut uses = Vec::new();
    let plot = ground_box(backend, image, image_ref, "the plot area", &mut uses)?
        .unwrap_or(BBox::new(0.0, 0.0, image.width() as f64, image.height() as f64));

    let xs = match window.x {
        Some(w) => window_span(backend, image, image_ref, Axis::X, w, &mut uses)?,
        None => PixelSpan { lo: plot.x1, hi: plot.x2 },
    };
    let ys = match window.y {
        Some(w) => window_span(backend, image, image_ref, Axis::Y, w, &mut uses)?,
        None => PixelSpan { lo: plot.y1, hi: plot.y2 },
    };

    let margin = cfg.ruler_margin_px as f64;
    let region = BBox::new(xs.lo - margin, ys.lo, xs.hi, ys.hi + margin);
    let rect = PixelRect::from_bbox(&region, 0, image.width(), image.height())
        .ok_or(ToolError::DegenerateRegion { what: "magnify window".to_string() })?;
    let cut = image
        .crop(rect)
        .ok_or(ToolError::DegenerateRegion { what: "magnify window".to_string() })?;
    let out = cut.scale_nearest(scale);

    let mut parts = Vec::new();
    if let Some((a, b)) = window.x {
        parts.push(format!("x in [{}, {}]", fmt_axis_value(a), fmt_axis_value(b)));
    }
    if let Some((a, b)) = window.y {
        parts.push(format!("y in [{}, {}]", fmt_axis_value(a), fmt_axis_value(b)));
    }
    let description = format!("magnified view of {} at {scale}x", parts.join(", "));

    Ok(ToolOutput {
        image: out,
        description,
        tool: "magnify_region".to_string(),
        grounding: uses,
    })
}

fn interpolate_from_ticks(
    backend: &dyn GroundingBackend,
    image_ref: &str,
    axis: Axis,
    value: f64,
    frac: f64,
    prompt: &str,
    uses: &mut Vec<GroundingUse>,
) -> Result<f64, ToolError> {
    let mut ticks = backend.axis_ticks(image_ref, axis)?.unwrap_or_default();
    ticks.retain(|t| t.value.is_finite());
    ticks.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    ticks.dedup_by(|a, b| a.value == b.value);
    uses.push(GroundingUse {
        prompt: format!("ticks on the {} axis", axis.name()),
        outcome: format!("{} known", ticks.len()),
    });
    if ticks.len() < 2 {
        return Err(ToolError::GroundingMiss { prompt: prompt.to_string() });
    }

    let first = &ticks[0];
    let last = &ticks[ticks.len() - 1];
    let span = last.value - first.value;
    if value < first.value - frac * span || value > last.value + frac * span {
        return Err(ToolError::GroundingMiss { prompt: prompt.to_string() });
    }

    let coord = |t: &crate::grounding::TickMark| match axis {
        Axis::X => t.pixel.x,
        Axis::Y => t.pixel.y,
    };
    // Pick the bracketing pair, or the nearest edge pair when extrapolating.
    let pair = ticks
        .windows(2)
        .find(|w| w[0].value <= value && value <= w[1].value)
        .map(|w| (&w[0], &w[1]))
        .unwrap_or_else(|| {
            if value < first.value {
                (&ticks[0], &ticks[1])
            } else {
                (&ticks[ticks.len() - 2], &ticks[ticks.len() - 1])
            }
        });
    let t = (value - pair.0.value) / (pair.1.value - pair.0.value);
    Ok(coord(pair.0) + t * (coord(pair.1) - coord(pair.0)))
}

/// Draws a dashed red guide line across the full image at the pixel
/// position of `value` on `axis`: vertical for the x axis, horizontal for
/// the y axis. The position comes from grounding the tick directly when the
/// value is labeled, otherwise from linear interpolation between known
/// ticks (with bounded extrapolation past the outermost ones). Every pixel
/// outside the one-pixel guide band is left untouched.
pub fn add_auxiliary_line(
    image: &RasterImage,
    image_ref: &str,
    axis: Axis,
    value: f64,
    backend: &dyn GroundingBackend,
    cfg: &ToolConfig,
) -> Result<ToolOutput, ToolError> {
    if !value.is_finite() {
        return Err(ToolError::BadArgument { message: "axis value must be finite".to_string() });
    }
    let mut uses = Vec::new();
    let prompt = format!("tick {} on the {} axis", fmt_axis_value(value), axis.name());
    let direct = ground_point(backend, image, image_ref, &prompt, &mut uses)?;
    let coord = match direct {
        Some(p) => match axis {
            Axis::X => p.x,
            Axis::Y => p.y,
        },
        None => interpolate_from_ticks(
            backend,
            image_ref,
            axis,
            value,
            cfg.extrapolation_frac,
            &prompt,
            &mut uses,
        )?,
    };

    let mut out = image.clone();
    let band = mathf::round(coord);
    let (a, b, orientation) = match axis {
        Axis::X => (
            Point::new(band, 0.0),
            Point::new(band, (image.height() - 1) as f64),
            "vertical",
        ),
        Axis::Y => (
            Point::new(0.0, band),
            Point::new((image.width() - 1) as f64, band),
            "horizontal",
        ),
    };
    out.draw_dashed_segment(a, b, color::RED, cfg.dash_on, cfg.dash_off);

    let description = format!(
        "dashed {orientation} auxiliary line at {} = {}",
        axis.name(),
        fmt_axis_value(value)
    );
    Ok(ToolOutput {
        image: out,
        description,
        tool: "add_auxiliary_line".to_string(),
        grounding: uses,
    })
}

/// Whether masking keeps only the matched series or removes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskMode {
    KeepOnly,
    Remove,
}

fn dominant_color_with_share(
    image: &RasterImage,
    region: &BBox,
    cfg: &ToolConfig,
) -> Result<(ColorRGB, f64), ToolError> {
    let rect = PixelRect::from_bbox(region, 0, image.width(), image.height())
        .ok_or(ToolError::EmptyAfterFiltering)?;
    let mut counts: alloc::collections::BTreeMap<u32, usize> = alloc::collections::BTreeMap::new();
    let mut total = 0usize;
    for y in rect.y..rect.y + rect.h {
        for x in rect.x..rect.x + rect.w {
            total += 1;
            let c = image.get(x, y);
            if color_distance(c, color::WHITE) <= cfg.filter_dist
                || color_distance(c, color::BLACK) <= cfg.filter_dist
            {
                continue;
            }
            *counts.entry(c.packed()).or_insert(0) += 1;
        }
    }
    // BTreeMap iteration is ascending by packed value, so on a count tie the
    // lowest packed color wins deterministically.
    let best = counts
        .iter()
        .max_by_key(|(packed, n)| (**n, core::cmp::Reverse(**packed)))
        .map(|(packed, n)| (*packed, *n))
        .ok_or(ToolError::EmptyAfterFiltering)?;
    let color = ColorRGB::new((best.0 >> 16) as u8, (best.0 >> 8) as u8, best.0 as u8);
    Ok((color, best.1 as f64 / total as f64))
}

/// Most frequent color inside `region`, ignoring pixels close to pure white
/// or black (background, borders, text). Count ties break toward the
/// numerically lowest packed RGB value.
pub fn dominant_color(
    image: &RasterImage,
    region: &BBox,
    cfg: &ToolConfig,
) -> Result<ColorRGB, ToolError> {
    dominant_color_with_share(image, region, cfg).map(|(c, _)| c)
}

/// Grounds the legend entry for `item`, reads the series color off its
/// icon, then repaints the plot interior: `Remove` turns pixels of that
/// color white, `KeepOnly` turns everything else white except background
/// and near-black structure. Pixels under the legend box and outside the
/// plot area are never touched.
pub fn mask_by_legend(
    image: &RasterImage,
    image_ref: &str,
    item: &str,
    mode: MaskMode,
    backend: &dyn GroundingBackend,
    cfg: &ToolConfig,
) -> Result<ToolOutput, ToolError> {
    let mut uses = Vec::new();
    let entry_prompt = format!("the legend entry for '{item}'");
    let entry = ground_box(backend, image, image_ref, &entry_prompt, &mut uses)?
        .ok_or(ToolError::GroundingMiss { prompt: entry_prompt })?;
    let (target_color, share) = dominant_color_with_share(image, &entry, cfg)?;
    if share < cfg.min_icon_share {
        return Err(ToolError::AmbiguousColor { share });
    }

    let plot_prompt = "the plot area";
    let plot = ground_box(backend, image, image_ref, plot_prompt, &mut uses)?
        .ok_or(ToolError::GroundingMiss { prompt: plot_prompt.to_string() })?;
    let legend = ground_box(backend, image, image_ref, "the legend", &mut uses)?;
    let legend_rect =
        legend.and_then(|b| PixelRect::from_bbox(&b, 0, image.width(), image.height()));

    // Shrink by one pixel per side so the plot border itself is exempt.
    let rect = PixelRect::from_bbox(&plot, 0, image.width(), image.height())
        .ok_or(ToolError::DegenerateRegion { what: plot_prompt.to_string() })?;
    if rect.w <= 2 || rect.h <= 2 {
        return Err(ToolError::DegenerateRegion { what: plot_prompt.to_string() });
    }

    let mut out = image.clone();
    for y in rect.y + 1..rect.y + rect.h - 1 {
        for x in rect.x + 1..rect.x + rect.w - 1 {
            if legend_rect.is_some_and(|r| r.contains(x, y)) {
                continue;
            }
            let c = out.get(x, y);
            let matches = color_distance(c, target_color) <= cfg.mask_tau;
            let erase = match mode {
                MaskMode::Remove => matches,
                MaskMode::KeepOnly => {
                    !matches
                        && c != color::WHITE
                        && color_distance(c, color::BLACK) > cfg.filter_dist
                }
            };
            if erase {
                out.set(x, y, color::WHITE);
            }
        }
    }

    let description = match mode {
        MaskMode::Remove => format!("chart with series '{item}' removed"),
        MaskMode::KeepOnly => format!("chart with only series '{item}' kept"),
    };
    Ok(ToolOutput {
        image: out,
        description,
        tool: "mask_by_legend".to_string(),
        grounding: uses,
    })
}
