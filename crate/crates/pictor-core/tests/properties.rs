//! Property tests for the parser surfaces and geometric invariants.

use pictor_core::annotation::fmt_axis_value;
use pictor_core::bench::{normalize_answer, offline_judge};
use pictor_core::chart::{generate_chart_spec, ChartKind};
use pictor_core::expr::eval_expression;
use pictor_core::geom::foot_of_perpendicular;
use pictor_core::grounding::{parse_element_prompt, Axis, ElementRef, LabelKind};
use pictor_core::metrics::bbox_iou;
use pictor_core::raster::PixelRect;
use pictor_core::workflow::{
    parse_critique, parse_planner_reply, parse_visual_verdict, render_action, ActionCall,
    ArgValue,
};
use pictor_core::{BBox, Point};

use proptest::prelude::*;

fn arg_value() -> impl Strategy<Value = ArgValue> {
    prop_oneof![
        (0u32..50).prop_map(|n| ArgValue::ImageId(format!("img_{n}"))),
        proptest::num::f64::NORMAL.prop_map(ArgValue::Num),
        (-1_000_000i64..1_000_000).prop_map(|n| ArgValue::Num(n as f64)),
        "[a-zA-Z0-9_ .,()-]{0,20}".prop_map(ArgValue::Str),
    ]
}

fn action_call() -> impl Strategy<Value = ActionCall> {
    (
        "[A-Za-z_][A-Za-z0-9_]{0,15}",
        proptest::collection::vec(("[a-z_][a-z0-9_]{0,8}", arg_value()), 0..5),
    )
        .prop_map(|(tool, args)| ActionCall { tool, args })
}

fn panel() -> impl Strategy<Value = Option<(u32, u32)>> {
    proptest::option::of((1u32..6, 1u32..6))
}

fn scoped(base: String, panel: Option<(u32, u32)>) -> String {
    match panel {
        Some((r, c)) => format!("{base} of the subplot at row {r}, column {c}"),
        None => base,
    }
}

/// Pairs each generated reference with its canonical prompt text, written
/// out here independently of the library's own renderer.
fn element_ref() -> impl Strategy<Value = (String, ElementRef)> {
    let item = "[a-z][a-z0-9_]{0,9}";
    let tick_value = (-4000i32..=4000).prop_map(|q| q as f64 * 0.25);
    prop_oneof![
        (1u32..6, 1u32..6).prop_map(|(row, col)| (
            format!("the subplot at row {row}, column {col}"),
            ElementRef::Subplot { row, col },
        )),
        panel().prop_map(|panel| (
            scoped("the plot area".to_string(), panel),
            ElementRef::PlotArea { panel },
        )),
        (item, panel()).prop_map(|(item, panel)| (
            scoped(format!("the legend entry for '{item}'"), panel),
            ElementRef::Legend { item: Some(item), panel },
        )),
        panel().prop_map(|panel| (
            scoped("the legend".to_string(), panel),
            ElementRef::Legend { item: None, panel },
        )),
        (prop_oneof![Just(LabelKind::Title), Just(LabelKind::XLabel), Just(LabelKind::YLabel)], panel())
            .prop_map(|(kind, panel)| {
                let base = match kind {
                    LabelKind::Title => "the title",
                    LabelKind::XLabel => "the x axis label",
                    LabelKind::YLabel => "the y axis label",
                };
                (scoped(base.to_string(), panel), ElementRef::Label { kind, panel })
            }),
        (tick_value, prop_oneof![Just(Axis::X), Just(Axis::Y)], panel()).prop_map(
            |(value, axis, panel)| (
                scoped(
                    format!("tick {} on the {} axis", fmt_axis_value(value), axis.name()),
                    panel,
                ),
                ElementRef::Tick { axis, value, panel },
            )
        ),
        "[A-Z]".prop_map(|label| (
            format!("point {label}"),
            ElementRef::NamedPoint { label },
        )),
    ]
}

fn finite_point() -> impl Strategy<Value = Point> {
    (-1000.0f64..1000.0, -1000.0f64..1000.0).prop_map(|(x, y)| Point::new(x, y))
}

fn positive_bbox() -> impl Strategy<Value = BBox> {
    (-500.0f64..500.0, -500.0f64..500.0, 0.5f64..200.0, 0.5f64..200.0)
        .prop_map(|(x, y, w, h)| BBox::new(x, y, x + w, y + h))
}

proptest! {
    #[test]
    fn planner_parser_never_panics(text in "\\PC{0,300}") {
        let _ = parse_planner_reply(&text);
    }

    #[test]
    fn critique_and_verdict_parsers_never_panic(text in "\\PC{0,300}") {
        let _ = parse_critique(&text);
        let _ = parse_visual_verdict(&text);
    }

    #[test]
    fn element_prompt_parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_element_prompt(&text);
    }

    #[test]
    fn expression_evaluator_never_panics(text in "\\PC{0,80}") {
        let _ = eval_expression(&text);
    }

    #[test]
    fn rendered_actions_parse_back_exactly(call in action_call()) {
        let rendered = render_action(&call);
        let reply = format!("THOUGHT 1: t.\nACTION 1: {rendered}");
        let parsed = parse_planner_reply(&reply).expect("rendered action must parse");
        match parsed {
            pictor_core::workflow::PlannerMove::Invoke { action, .. } => {
                prop_assert_eq!(action, call);
            }
            other => prop_assert!(false, "unexpected move: {:?}", other),
        }
    }

    #[test]
    fn canonical_prompts_parse_back_exactly((prompt, expected) in element_ref()) {
        prop_assert_eq!(parse_element_prompt(&prompt), expected);
    }

    #[test]
    fn iou_is_bounded_symmetric_and_reflexive(a in positive_bbox(), b in positive_bbox()) {
        let ab = bbox_iou(&a, &b);
        let ba = bbox_iou(&b, &a);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((bbox_iou(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perpendicular_foot_is_orthogonal_and_stable(
        p in finite_point(),
        a in finite_point(),
        b in finite_point(),
    ) {
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let len = (dx * dx + dy * dy).sqrt();
        prop_assume!(len > 1e-6);
        let foot = foot_of_perpendicular(p, a, b).unwrap();
        let scale = 1.0 + p.distance(a) + len;
        // Residual is orthogonal to the line direction.
        let dot = (p.x - foot.x) * dx + (p.y - foot.y) * dy;
        prop_assert!(dot.abs() / len <= 1e-9 * scale, "dot={dot} len={len}");
        // Projecting the foot again moves it by at most rounding noise.
        let again = foot_of_perpendicular(foot, a, b).unwrap();
        prop_assert!(again.distance(foot) <= 1e-9 * scale);
    }

    #[test]
    fn answer_normalization_is_idempotent(text in "\\PC{0,120}") {
        let once = normalize_answer(&text);
        prop_assert_eq!(normalize_answer(&once), once.clone());
        prop_assert!(offline_judge(&text, &text));
    }

    #[test]
    fn chart_specs_are_seed_deterministic(seed in any::<u64>(), kind_ix in 0u8..3) {
        let kind = match kind_ix {
            0 => ChartKind::Line,
            1 => ChartKind::Bar,
            _ => ChartKind::Scatter,
        };
        prop_assert_eq!(
            generate_chart_spec(seed, kind),
            generate_chart_spec(seed, kind)
        );
    }

    #[test]
    fn pixel_rects_stay_inside_the_image(
        bbox in positive_bbox(),
        pad in 0u32..10,
        w in 1u32..400,
        h in 1u32..400,
    ) {
        if let Some(rect) = PixelRect::from_bbox(&bbox, pad, w, h) {
            prop_assert!(rect.w >= 1 && rect.h >= 1);
            prop_assert!(rect.x + rect.w <= w);
            prop_assert!(rect.y + rect.h <= h);
        }
    }
}
