//! Parsing coordinates out of free-form model replies. Accepts the tagged
//! form `<|box_start|>[x1, y1, x2, y2]<|box_end|>`, bare bracket lists, and
//! parenthesized pairs; a reply saying "not found" (without coordinates)
//! maps to `NotFound`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::geom::{BBox, Point};

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedCoords {
    Box(BBox),
    Point(Point),
    NotFound,
    /// No coordinate group and no "not found" marker.
    Unparseable,
}

fn parse_float_list(body: &str) -> Option<Vec<f64>> {
    let mut vals = Vec::new();
    for part in body.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return None;
        }
        let v: f64 = part.parse().ok()?;
        if !v.is_finite() {
            return None;
        }
        vals.push(v);
    }
    Some(vals)
}

fn scan_groups(text: &str, open: char, close: char) -> Option<ParsedCoords> {
    let mut rest = text;
    loop {
        let start = rest.find(open)?;
        let after = &rest[start + open.len_utf8()..];
        let Some(end) = after.find(close) else {
            return None;
        };
        if let Some(vals) = parse_float_list(&after[..end]) {
            match vals.len() {
                2 => return Some(ParsedCoords::Point(Point::new(vals[0], vals[1]))),
                4 => {
                    return Some(ParsedCoords::Box(BBox::new(vals[0], vals[1], vals[2], vals[3])))
                }
                _ => {}
            }
        }
        rest = &after[end + close.len_utf8()..];
    }
}

/// Extracts the first usable coordinate group from a reply. Bracket groups
/// win over parenthesized ones; within each, the first group with exactly
/// two (point) or four (box) comma-separated finite numbers is taken.
pub fn parse_coords_from_text(text: &str) -> ParsedCoords {
    if let Some(found) = scan_groups(text, '[', ']') {
        return found;
    }
    if let Some(found) = scan_groups(text, '(', ')') {
        return found;
    }
    let lower: String = text.chars().map(|c| c.to_ascii_lowercase()).collect();
    if lower.contains("not found") {
        return ParsedCoords::NotFound;
    }
    ParsedCoords::Unparseable
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_box_form() {
        let text = "The legend is here: <|box_start|>[12, 30, 200, 180]<|box_end|>";
        assert_eq!(
            parse_coords_from_text(text),
            ParsedCoords::Box(BBox::new(12.0, 30.0, 200.0, 180.0))
        );
    }

    #[test]
    fn bare_bracket_point() {
        assert_eq!(
            parse_coords_from_text("the tick sits at [450.5, 432]"),
            ParsedCoords::Point(Point::new(450.5, 432.0))
        );
    }

    #[test]
    fn parenthesized_pair_fallback() {
        assert_eq!(
            parse_coords_from_text("I estimate the point at (450, 432)."),
            ParsedCoords::Point(Point::new(450.0, 432.0))
        );
    }

    #[test]
    fn first_parseable_group_wins() {
        let text = "[not, numbers] then [1, 2, 3] then [5, 6] and [7, 8]";
        assert_eq!(parse_coords_from_text(text), ParsedCoords::Point(Point::new(5.0, 6.0)));
    }

    #[test]
    fn brackets_beat_parentheses() {
        let text = "(1, 2) but really [3, 4]";
        assert_eq!(parse_coords_from_text(text), ParsedCoords::Point(Point::new(3.0, 4.0)));
    }

    #[test]
    fn reversed_box_corners_normalize() {
        match parse_coords_from_text("[200, 180, 12, 30]") {
            ParsedCoords::Box(b) => assert_eq!(b, BBox::new(12.0, 30.0, 200.0, 180.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn not_found_marker() {
        assert_eq!(parse_coords_from_text("Not found"), ParsedCoords::NotFound);
        assert_eq!(parse_coords_from_text("  the element was NOT FOUND in the image"), ParsedCoords::NotFound);
    }

    #[test]
    fn garbage_is_unparseable() {
        for text in ["", "no coordinates here", "[1, 2, 3]", "[a, b]", "(1,2,3,4,5)", "[inf, 2]"] {
            assert_eq!(parse_coords_from_text(text), ParsedCoords::Unparseable, "{text:?}");
        }
    }

    #[test]
    fn whitespace_and_floats_tolerated() {
        assert_eq!(
            parse_coords_from_text("[ 1.5 ,  2.25 , 10 , 20.125 ]"),
            ParsedCoords::Box(BBox::new(1.5, 2.25, 10.0, 20.125))
        );
    }
}
