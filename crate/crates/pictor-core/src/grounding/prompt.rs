//! The canonical element-reference grammar and its two directions:
//! rendering an annotation as a prompt, and parsing a prompt back into a
//! structured reference. `parse_element_prompt(canonical_prompt(ann))`
//! always resolves back to `ann`.
//!
//! Grammar (case-insensitive keywords, panel scope optional):
//!
//! ```text
//! the subplot at row R, column C
//! the plot area                       [of the subplot at row R, column C]
//! the legend                          [of the subplot at row R, column C]
//! the legend entry for '<name>'       [of the subplot at row R, column C]
//! the title                           [of the subplot at row R, column C]
//! the x axis label / the y axis label [of the subplot at row R, column C]
//! tick <value> on the x axis          [of the subplot at row R, column C]
//! point <label>
//! ```

use alloc::format;
use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::annotation::{fmt_axis_value, split_scoped_id, ElementAnnotation, ElementCategory};
use crate::grounding::Axis;
use crate::mathf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Title,
    XLabel,
    YLabel,
}

impl LabelKind {
    pub fn local_id(self) -> &'static str {
        match self {
            LabelKind::Title => "title",
            LabelKind::XLabel => "x_label",
            LabelKind::YLabel => "y_label",
        }
    }
}

/// Structured form of an element reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementRef {
    Subplot { row: u32, col: u32 },
    PlotArea { panel: Option<(u32, u32)> },
    Legend { item: Option<String>, panel: Option<(u32, u32)> },
    Label { kind: LabelKind, panel: Option<(u32, u32)> },
    Tick { axis: Axis, value: f64, panel: Option<(u32, u32)> },
    NamedPoint { label: String },
    /// Anything outside the grammar; kept verbatim for backends that can
    /// ground free-form text.
    Opaque { prompt: String },
}

fn scope_suffix(scope: Option<(u32, u32)>) -> String {
    match scope {
        Some((r, c)) => format!(" of the subplot at row {r}, column {c}"),
        None => String::new(),
    }
}

/// Renders the canonical prompt for an annotation, or `None` for
/// annotations outside the grammar (which evaluation then skips).
pub fn canonical_prompt(ann: &ElementAnnotation) -> Option<String> {
    let (scope, local) = split_scoped_id(&ann.element_id);
    let suffix = scope_suffix(scope);
    let prompt = match ann.category {
        ElementCategory::Subplot => match ann.grid_pos.or(scope) {
            Some((r, c)) => format!("the subplot at row {r}, column {c}"),
            None => "the plot area".to_string(),
        },
        ElementCategory::LegendRegion => match &ann.label_text {
            Some(item) => format!("the legend entry for '{item}'{suffix}"),
            None => format!("the legend{suffix}"),
        },
        ElementCategory::TextLabel => {
            let base = match local {
                "title" => "the title",
                "x_label" => "the x axis label",
                "y_label" => "the y axis label",
                _ => return None,
            };
            format!("{base}{suffix}")
        }
        ElementCategory::AxisTick => {
            let axis = if local.starts_with("x_tick") {
                Axis::X
            } else if local.starts_with("y_tick") {
                Axis::Y
            } else {
                return None;
            };
            let value = ann.axis_value?;
            format!("tick {} on the {} axis{suffix}", fmt_axis_value(value), axis.name())
        }
        ElementCategory::GeomPoint => {
            let label = ann.label_text.as_ref()?;
            format!("point {label}")
        }
    };
    Some(prompt)
}

/// Case-insensitive prefix strip.
fn eat_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    if head.eq_ignore_ascii_case(prefix) {
        Some(&s[prefix.len()..])
    } else {
        None
    }
}

/// Finds the last case-insensitive occurrence of `needle`.
fn rfind_ci(haystack: &str, needle: &str) -> Option<usize> {
    if needle.is_empty() || haystack.len() < needle.len() {
        return None;
    }
    (0..=haystack.len() - needle.len()).rev().find(|&i| {
        haystack
            .get(i..i + needle.len())
            .is_some_and(|w| w.eq_ignore_ascii_case(needle))
    })
}

/// Parses `"R, column C"` (the tail of a subplot reference).
fn parse_row_col(s: &str) -> Option<(u32, u32)> {
    let s = s.trim();
    let comma = s.find(',')?;
    let row: u32 = s[..comma].trim().parse().ok()?;
    let rest = eat_ci(s[comma + 1..].trim_start(), "column ")?;
    let col: u32 = rest.trim().parse().ok()?;
    Some((row, col))
}

fn strip_quotes(s: &str) -> &str {
    let s = s.trim();
    for q in ['\'', '"'] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return &s[1..s.len() - 1];
        }
    }
    s
}

const SCOPE_MARKER: &str = " of the subplot at row ";

/// Parses a textual element reference. Unrecognized text becomes
/// `ElementRef::Opaque` rather than an error: it is still a valid prompt
/// for free-form backends, just not resolvable by the oracle.
pub fn parse_element_prompt(prompt: &str) -> ElementRef {
    let original = prompt.trim();
    let mut base = original.trim_end_matches('.').trim();
    let mut panel: Option<(u32, u32)> = None;

    if let Some(at) = rfind_ci(base, SCOPE_MARKER) {
        if let Some(rc) = parse_row_col(&base[at + SCOPE_MARKER.len()..]) {
            panel = Some(rc);
            base = base[..at].trim_end();
        }
    }

    let bare = eat_ci(base, "the ").unwrap_or(base).trim();

    if let Some(rest) = eat_ci(bare, "subplot at row ") {
        if let Some((row, col)) = parse_row_col(rest) {
            return ElementRef::Subplot { row, col };
        }
    }
    if bare.eq_ignore_ascii_case("plot area") {
        return ElementRef::PlotArea { panel };
    }
    if let Some(rest) = eat_ci(bare, "legend entry for ") {
        return ElementRef::Legend { item: Some(strip_quotes(rest).to_string()), panel };
    }
    if bare.eq_ignore_ascii_case("legend") {
        return ElementRef::Legend { item: None, panel };
    }
    if bare.eq_ignore_ascii_case("title") {
        return ElementRef::Label { kind: LabelKind::Title, panel };
    }
    if bare.eq_ignore_ascii_case("x axis label") || bare.eq_ignore_ascii_case("x-axis label") {
        return ElementRef::Label { kind: LabelKind::XLabel, panel };
    }
    if bare.eq_ignore_ascii_case("y axis label") || bare.eq_ignore_ascii_case("y-axis label") {
        return ElementRef::Label { kind: LabelKind::YLabel, panel };
    }
    if let Some(rest) = eat_ci(bare, "tick ") {
        if let Some(at) = rfind_ci(rest, " on the ") {
            let value_str = rest[..at].trim();
            let axis_str = rest[at + " on the ".len()..].trim();
            let axis = if axis_str.eq_ignore_ascii_case("x axis")
                || axis_str.eq_ignore_ascii_case("x-axis")
            {
                Some(Axis::X)
            } else if axis_str.eq_ignore_ascii_case("y axis")
                || axis_str.eq_ignore_ascii_case("y-axis")
            {
                Some(Axis::Y)
            } else {
                None
            };
            if let (Some(axis), Ok(value)) = (axis, value_str.parse::<f64>()) {
                if value.is_finite() {
                    return ElementRef::Tick { axis, value, panel };
                }
            }
        }
    }
    if let Some(rest) = eat_ci(bare, "point ") {
        let label = strip_quotes(rest);
        if !label.is_empty() {
            return ElementRef::NamedPoint { label: label.to_string() };
        }
    }
    ElementRef::Opaque { prompt: original.to_string() }
}

/// Tolerant float equality for tick values mentioned in prompts.
pub fn tick_value_matches(a: f64, b: f64) -> bool {
    mathf::abs(a - b) <= 1e-9 * mathf::max(1.0, mathf::abs(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::ElementAnnotation;
    use crate::geom::{BBox, Point};

    #[test]
    fn canonical_prompts_for_single_chart_elements() {
        let subplot = ElementAnnotation::boxed("subplot", ElementCategory::Subplot, BBox::new(0.0, 0.0, 1.0, 1.0));
        assert_eq!(canonical_prompt(&subplot).unwrap(), "the plot area");

        let legend = ElementAnnotation::boxed("legend", ElementCategory::LegendRegion, BBox::new(0.0, 0.0, 1.0, 1.0));
        assert_eq!(canonical_prompt(&legend).unwrap(), "the legend");

        let item = ElementAnnotation::boxed("legend_item_Alpha", ElementCategory::LegendRegion, BBox::new(0.0, 0.0, 1.0, 1.0))
            .with_label("Alpha");
        assert_eq!(canonical_prompt(&item).unwrap(), "the legend entry for 'Alpha'");

        let tick = ElementAnnotation::pointed("x_tick_3", ElementCategory::AxisTick, Point::new(5.0, 6.0))
            .with_axis_value(25.0);
        assert_eq!(canonical_prompt(&tick).unwrap(), "tick 25 on the x axis");

        let pt = ElementAnnotation::pointed("pt_B", ElementCategory::GeomPoint, Point::new(1.0, 2.0))
            .with_label("B");
        assert_eq!(canonical_prompt(&pt).unwrap(), "point B");
    }

    #[test]
    fn canonical_prompts_for_composite_elements() {
        let subplot = ElementAnnotation::boxed("r2c1_subplot", ElementCategory::Subplot, BBox::new(0.0, 0.0, 1.0, 1.0))
            .with_grid_pos(2, 1);
        assert_eq!(canonical_prompt(&subplot).unwrap(), "the subplot at row 2, column 1");

        let title = ElementAnnotation::boxed("r1c3_title", ElementCategory::TextLabel, BBox::new(0.0, 0.0, 1.0, 1.0))
            .with_label("T")
            .with_grid_pos(1, 3);
        assert_eq!(
            canonical_prompt(&title).unwrap(),
            "the title of the subplot at row 1, column 3"
        );

        let tick = ElementAnnotation::pointed("r1c2_y_tick_0", ElementCategory::AxisTick, Point::new(0.0, 0.0))
            .with_axis_value(0.5)
            .with_grid_pos(1, 2);
        assert_eq!(
            canonical_prompt(&tick).unwrap(),
            "tick 0.5 on the y axis of the subplot at row 1, column 2"
        );
    }

    #[test]
    fn parse_inverts_canonical_forms() {
        assert_eq!(
            parse_element_prompt("the subplot at row 2, column 1"),
            ElementRef::Subplot { row: 2, col: 1 }
        );
        assert_eq!(parse_element_prompt("the plot area"), ElementRef::PlotArea { panel: None });
        assert_eq!(
            parse_element_prompt("the legend entry for 'North'"),
            ElementRef::Legend { item: Some("North".to_string()), panel: None }
        );
        assert_eq!(
            parse_element_prompt("the legend of the subplot at row 1, column 2"),
            ElementRef::Legend { item: None, panel: Some((1, 2)) }
        );
        assert_eq!(
            parse_element_prompt("tick 25 on the x axis"),
            ElementRef::Tick { axis: Axis::X, value: 25.0, panel: None }
        );
        assert_eq!(
            parse_element_prompt("the y axis label of the subplot at row 3, column 1"),
            ElementRef::Label { kind: LabelKind::YLabel, panel: Some((3, 1)) }
        );
        assert_eq!(
            parse_element_prompt("point B"),
            ElementRef::NamedPoint { label: "B".to_string() }
        );
    }

    #[test]
    fn parse_is_case_insensitive_and_trims() {
        assert_eq!(
            parse_element_prompt("  The Plot Area. "),
            ElementRef::PlotArea { panel: None }
        );
        assert_eq!(
            parse_element_prompt("TICK 0.5 ON THE Y AXIS"),
            ElementRef::Tick { axis: Axis::Y, value: 0.5, panel: None }
        );
        assert_eq!(
            parse_element_prompt("the LEGEND ENTRY FOR \"West\""),
            ElementRef::Legend { item: Some("West".to_string()), panel: None }
        );
    }

    #[test]
    fn free_text_stays_opaque() {
        for text in [
            "the highest bar",
            "where the two lines cross",
            "tick twenty on the x axis",
            "subplot at row one",
            "",
        ] {
            match parse_element_prompt(text) {
                ElementRef::Opaque { prompt } => assert_eq!(prompt, text.trim()),
                other => panic!("{text:?} parsed as {other:?}"),
            }
        }
    }

    #[test]
    fn legend_item_names_keep_case_and_spaces() {
        assert_eq!(
            parse_element_prompt("the legend entry for 'Model B'"),
            ElementRef::Legend { item: Some("Model B".to_string()), panel: None }
        );
    }

    #[test]
    fn tick_values_tolerate_float_noise() {
        assert!(tick_value_matches(25.0 + 1e-12, 25.0));
        assert!(tick_value_matches(0.0, 1e-10));
        assert!(!tick_value_matches(25.1, 25.0));
    }
}
