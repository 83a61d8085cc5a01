//! Chart specification and the seeded generator that samples one.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::ChartError;
use crate::color::{self, color_distance, ColorRGB};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Line,
    Bar,
    Scatter,
}

impl ChartKind {
    pub const ALL: [ChartKind; 3] = [ChartKind::Line, ChartKind::Bar, ChartKind::Scatter];

    pub fn name(self) -> &'static str {
        match self {
            ChartKind::Line => "line",
            ChartKind::Bar => "bar",
            ChartKind::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegendPosition {
    InsideTopRight,
    RightOfAxes,
    BelowAxes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub name: String,
    pub color: ColorRGB,
    /// Data points in value space.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Strictly increasing; first and last tick define the axis range.
    pub x_ticks: Vec<f64>,
    pub y_ticks: Vec<f64>,
    pub series: Vec<SeriesSpec>,
    pub legend_position: LegendPosition,
    pub canvas: (u32, u32),
    pub seed: u64,
}

/// Series palette. Every pair of entries keeps an RGB distance of at least
/// 60, and every entry stays at least 60 from both white and black, so
/// color-keyed masking at threshold 30 can never confuse two series.
pub const PALETTE: [ColorRGB; 10] = [
    ColorRGB::new(214, 39, 40),
    ColorRGB::new(31, 119, 180),
    ColorRGB::new(44, 160, 44),
    ColorRGB::new(255, 127, 14),
    ColorRGB::new(148, 103, 189),
    ColorRGB::new(140, 86, 75),
    ColorRGB::new(227, 119, 194),
    ColorRGB::new(23, 190, 207),
    ColorRGB::new(188, 189, 34),
    ColorRGB::new(82, 84, 163),
];

const TITLE_WORDS: [&str; 24] = [
    "Quarterly", "Revenue", "Trend", "Sensor", "Output", "Regional", "Sales", "Growth",
    "Temperature", "Latency", "Throughput", "Error", "Rate", "Energy", "Usage", "Model",
    "Accuracy", "Signal", "Response", "Index", "Volume", "Price", "Daily", "Annual",
];

const AXIS_WORDS: [&str; 15] = [
    "Time", "Step", "Epoch", "Day", "Month", "Sample", "Distance", "Frequency", "Score",
    "Value", "Count", "Load", "Speed", "Power", "Depth",
];

const SERIES_WORDS: [&str; 12] = [
    "Alpha", "Beta", "Gamma", "Delta", "North", "South", "East", "West", "Control", "Test",
    "Baseline", "Target",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SpecOptions {
    /// Fixed series count instead of sampling 1..=3.
    pub series_count: Option<usize>,
    pub canvas: (u32, u32),
    pub legend_position: Option<LegendPosition>,
}

impl Default for SpecOptions {
    fn default() -> Self {
        Self { series_count: None, canvas: (640, 480), legend_position: None }
    }
}

/// Picks `k` distinct indices out of `0..n` (partial Fisher-Yates).
fn distinct_indices(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let at = rng.gen_range(0..pool.len());
        out.push(pool.swap_remove(at));
    }
    out
}

fn sample_ticks(rng: &mut ChaCha8Rng, count_range: (usize, usize), zero_start: bool) -> Vec<f64> {
    const STEPS: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 25.0, 50.0];
    let count = rng.gen_range(count_range.0..=count_range.1);
    let step = STEPS[rng.gen_range(0..STEPS.len())];
    let start = if zero_start { 0.0 } else { step * rng.gen_range(0..3) as f64 };
    (0..count).map(|i| start + step * i as f64).collect()
}

pub fn generate_chart_spec(seed: u64, kind: ChartKind) -> ChartSpec {
    generate_chart_spec_with(seed, kind, &SpecOptions::default())
}

/// Seeded, pure sampling: the same `(seed, kind, opts)` always yields the
/// same spec, and the spec records the seed it came from.
pub fn generate_chart_spec_with(seed: u64, kind: ChartKind, opts: &SpecOptions) -> ChartSpec {
    let salt = match kind {
        ChartKind::Line => 0x6c_69_6e_65,
        ChartKind::Bar => 0x62_61_72,
        ChartKind::Scatter => 0x73_63_61_74,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);

    let n_series = opts.series_count.unwrap_or_else(|| rng.gen_range(1..=3)).clamp(1, PALETTE.len());
    let color_picks = distinct_indices(&mut rng, PALETTE.len(), n_series);
    let name_picks = distinct_indices(&mut rng, SERIES_WORDS.len(), n_series.min(SERIES_WORDS.len()));

    let title_len = rng.gen_range(2..=3);
    let title_picks = distinct_indices(&mut rng, TITLE_WORDS.len(), title_len);
    let title = title_picks.iter().map(|&i| TITLE_WORDS[i]).collect::<Vec<_>>().join(" ");
    let axis_picks = distinct_indices(&mut rng, AXIS_WORDS.len(), 2);
    let x_label = AXIS_WORDS[axis_picks[0]].to_string();
    let y_label = AXIS_WORDS[axis_picks[1]].to_string();

    let bar = matches!(kind, ChartKind::Bar);
    let x_ticks = if bar {
        let count = rng.gen_range(4..=7);
        (0..count).map(|i| 1.0 + i as f64).collect()
    } else {
        sample_ticks(&mut rng, (5, 8), false)
    };
    let y_ticks = sample_ticks(&mut rng, (4, 7), bar);

    let (x_min, x_max) = (x_ticks[0], *x_ticks.last().unwrap());
    let (y_min, y_max) = (y_ticks[0], *y_ticks.last().unwrap());
    let y_span = y_max - y_min;

    let mut series = Vec::with_capacity(n_series);
    for s in 0..n_series {
        let name = match name_picks.get(s) {
            Some(&i) => SERIES_WORDS[i].to_string(),
            None => format!("Series {}", s + 1),
        };
        let points: Vec<(f64, f64)> = match kind {
            ChartKind::Line => {
                let n = rng.gen_range(6..=12);
                (0..n)
                    .map(|i| {
                        let x = x_min + (x_max - x_min) * i as f64 / (n - 1) as f64;
                        let y = rng.gen_range(y_min + 0.05 * y_span..=y_max - 0.05 * y_span);
                        (x, y)
                    })
                    .collect()
            }
            ChartKind::Scatter => {
                let n = rng.gen_range(8..=16);
                (0..n)
                    .map(|_| {
                        let x = rng.gen_range(x_min + 0.02 * (x_max - x_min)..=x_max - 0.02 * (x_max - x_min));
                        let y = rng.gen_range(y_min + 0.05 * y_span..=y_max - 0.05 * y_span);
                        (x, y)
                    })
                    .collect()
            }
            ChartKind::Bar => x_ticks
                .iter()
                .map(|&x| (x, rng.gen_range(0.15 * y_max..=0.9 * y_max)))
                .collect(),
        };
        series.push(SeriesSpec { name, color: PALETTE[color_picks[s]], points });
    }

    let legend_position = opts.legend_position.unwrap_or_else(|| {
        match rng.gen_range(0..3) {
            0 => LegendPosition::InsideTopRight,
            1 => LegendPosition::RightOfAxes,
            _ => LegendPosition::BelowAxes,
        }
    });

    ChartSpec {
        kind,
        title,
        x_label,
        y_label,
        x_ticks,
        y_ticks,
        series,
        legend_position,
        canvas: opts.canvas,
        seed,
    }
}

impl ChartSpec {
    /// Structural invariants every renderable spec satisfies. Generated
    /// specs always pass; hand-built ones are checked before rendering.
    pub fn validate(&self) -> Result<(), ChartError> {
        let fail = |msg: String| Err(ChartError::InvalidSpec(msg));
        if self.series.is_empty() {
            return fail("at least one series is required".into());
        }
        for ticks in [&self.x_ticks, &self.y_ticks] {
            if ticks.len() < 2 {
                return fail("each axis needs at least two ticks".into());
            }
            if ticks.windows(2).any(|w| !(w[0] < w[1])) {
                return fail("tick values must be strictly increasing".into());
            }
            if ticks.iter().any(|v| !v.is_finite()) {
                return fail("tick values must be finite".into());
            }
        }
        let mut names: Vec<&str> = Vec::new();
        for s in &self.series {
            if s.name.trim().is_empty() {
                return fail("series names must be non-empty".into());
            }
            if names.contains(&s.name.as_str()) {
                return fail(format!("duplicate series name '{}'", s.name));
            }
            names.push(&s.name);
            if s.points.is_empty() {
                return fail(format!("series '{}' has no points", s.name));
            }
            if s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return fail(format!("series '{}' has non-finite points", s.name));
            }
            for anchor in [color::WHITE, color::BLACK] {
                if color_distance(s.color, anchor) < 60.0 {
                    return fail(format!("series '{}' color too close to white/black", s.name));
                }
            }
        }
        for i in 0..self.series.len() {
            for j in i + 1..self.series.len() {
                let d = color_distance(self.series[i].color, self.series[j].color);
                if d < 60.0 {
                    return fail(format!(
                        "series '{}' and '{}' colors are only {d:.1} apart",
                        self.series[i].name, self.series[j].name
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_separation_invariant() {
        for (i, a) in PALETTE.iter().enumerate() {
            for b in &PALETTE[i + 1..] {
                assert!(color_distance(*a, *b) >= 60.0, "{a:?} vs {b:?}");
            }
            assert!(color_distance(*a, color::WHITE) >= 60.0, "{a:?} vs white");
            assert!(color_distance(*a, color::BLACK) >= 60.0, "{a:?} vs black");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in ChartKind::ALL {
            let a = generate_chart_spec(42, kind);
            let b = generate_chart_spec(42, kind);
            assert_eq!(a, b);
            assert_eq!(a.seed, 42);
        }
    }

    #[test]
    fn different_seeds_differ() {
        let mut distinct = 0;
        for seed in 0..10u64 {
            let a = generate_chart_spec(seed, ChartKind::Line);
            let b = generate_chart_spec(seed + 1, ChartKind::Line);
            if a != b {
                distinct += 1;
            }
        }
        assert!(distinct >= 9, "only {distinct}/10 consecutive seeds differed");
    }

    #[test]
    fn kinds_share_seed_but_not_content() {
        let line = generate_chart_spec(7, ChartKind::Line);
        let bar = generate_chart_spec(7, ChartKind::Bar);
        assert_ne!(line.title, bar.title);
    }

    #[test]
    fn generated_specs_validate() {
        for seed in 0..50u64 {
            for kind in ChartKind::ALL {
                let spec = generate_chart_spec(seed, kind);
                spec.validate().unwrap_or_else(|e| panic!("seed {seed} {kind:?}: {e}"));
            }
        }
    }

    #[test]
    fn options_pin_series_count_and_legend() {
        let opts = SpecOptions {
            series_count: Some(2),
            canvas: (500, 400),
            legend_position: Some(LegendPosition::RightOfAxes),
        };
        for seed in 0..20u64 {
            let spec = generate_chart_spec_with(seed, ChartKind::Line, &opts);
            assert_eq!(spec.series.len(), 2);
            assert_eq!(spec.legend_position, LegendPosition::RightOfAxes);
            assert_eq!(spec.canvas, (500, 400));
        }
    }

    #[test]
    fn bar_specs_anchor_y_at_zero_with_positive_values() {
        for seed in 0..20u64 {
            let spec = generate_chart_spec(seed, ChartKind::Bar);
            assert_eq!(spec.y_ticks[0], 0.0);
            for s in &spec.series {
                assert!(s.points.iter().all(|&(_, y)| y > 0.0));
            }
        }
    }

    #[test]
    fn validate_rejects_close_colors() {
        let mut spec = generate_chart_spec_with(
            1,
            ChartKind::Line,
            &SpecOptions { series_count: Some(2), ..Default::default() },
        );
        spec.series[1].color = ColorRGB::new(
            spec.series[0].color.r.saturating_add(5),
            spec.series[0].color.g,
            spec.series[0].color.b,
        );
        assert!(matches!(spec.validate(), Err(ChartError::InvalidSpec(_))));
    }

    #[test]
    fn validate_rejects_unsorted_ticks() {
        let mut spec = generate_chart_spec(1, ChartKind::Line);
        spec.x_ticks = alloc::vec![0.0, 2.0, 2.0];
        assert!(matches!(spec.validate(), Err(ChartError::InvalidSpec(_))));
    }
}
