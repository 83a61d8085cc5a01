//! Per-category score aggregation for grounding evaluation.

use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::annotation::ElementCategory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingReport {
    /// Unweighted mean over the categories that appeared.
    pub overall: f64,
    pub per_category: BTreeMap<ElementCategory, f64>,
    pub counts: BTreeMap<ElementCategory, usize>,
    pub n_elements: usize,
    /// Replies that parsed to nothing usable; each also scored zero in its
    /// category.
    pub n_malformed: usize,
}

impl GroundingReport {
    pub fn category(&self, cat: ElementCategory) -> Option<f64> {
        self.per_category.get(&cat).copied()
    }

    /// Fixed-width text table, one row per category plus the overall line.
    pub fn to_table(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:>8} {:>8}", "category", "n", "score");
        for (cat, score) in &self.per_category {
            let n = self.counts.get(cat).copied().unwrap_or(0);
            let _ = writeln!(out, "{:<16} {:>8} {:>8.3}", cat.name(), n, score);
        }
        let _ = writeln!(out, "{:<16} {:>8} {:>8.3}", "overall", self.n_elements, self.overall);
        if self.n_malformed > 0 {
            let _ = writeln!(out, "malformed replies: {}", self.n_malformed);
        }
        out
    }
}

/// Accumulates element scores; mergeable so evaluation can fan out and
/// combine partial builders deterministically.
#[derive(Debug, Clone, Default)]
pub struct ReportBuilder {
    sums: BTreeMap<ElementCategory, f64>,
    counts: BTreeMap<ElementCategory, usize>,
    n_malformed: usize,
}

impl ReportBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, category: ElementCategory, score: f64) {
        debug_assert!((0.0..=1.0).contains(&score));
        *self.sums.entry(category).or_insert(0.0) += score;
        *self.counts.entry(category).or_insert(0) += 1;
    }

    /// A malformed backend reply: scores zero and is tallied.
    pub fn add_malformed(&mut self, category: ElementCategory) {
        self.add(category, 0.0);
        self.n_malformed += 1;
    }

    pub fn merge(&mut self, other: ReportBuilder) {
        for (cat, sum) in other.sums {
            *self.sums.entry(cat).or_insert(0.0) += sum;
        }
        for (cat, n) in other.counts {
            *self.counts.entry(cat).or_insert(0) += n;
        }
        self.n_malformed += other.n_malformed;
    }

    pub fn finish(self) -> GroundingReport {
        let mut per_category = BTreeMap::new();
        let mut n_elements = 0usize;
        for (cat, n) in &self.counts {
            if *n > 0 {
                per_category.insert(*cat, self.sums[cat] / *n as f64);
                n_elements += n;
            }
        }
        let overall = if per_category.is_empty() {
            0.0
        } else {
            per_category.values().sum::<f64>() / per_category.len() as f64
        };
        GroundingReport {
            overall,
            per_category,
            counts: self.counts,
            n_elements,
            n_malformed: self.n_malformed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_is_unweighted_category_mean() {
        let mut b = ReportBuilder::new();
        // 10 subplot elements at 1.0, 2 tick elements at 0.5 average.
        for _ in 0..10 {
            b.add(ElementCategory::Subplot, 1.0);
        }
        b.add(ElementCategory::AxisTick, 1.0);
        b.add(ElementCategory::AxisTick, 0.0);
        let r = b.finish();
        assert_eq!(r.category(ElementCategory::Subplot), Some(1.0));
        assert_eq!(r.category(ElementCategory::AxisTick), Some(0.5));
        // Mean of category means, not of all elements.
        assert!((r.overall - 0.75).abs() < 1e-12);
        assert_eq!(r.n_elements, 12);
    }

    #[test]
    fn absent_categories_do_not_dilute() {
        let mut b = ReportBuilder::new();
        b.add(ElementCategory::GeomPoint, 1.0);
        let r = b.finish();
        assert_eq!(r.overall, 1.0);
        assert_eq!(r.per_category.len(), 1);
    }

    #[test]
    fn merge_equals_sequential_adds() {
        let mut left = ReportBuilder::new();
        left.add(ElementCategory::Subplot, 0.5);
        left.add_malformed(ElementCategory::AxisTick);
        let mut right = ReportBuilder::new();
        right.add(ElementCategory::Subplot, 1.0);
        right.add(ElementCategory::LegendRegion, 0.25);

        let mut merged = ReportBuilder::new();
        merged.merge(left.clone());
        merged.merge(right);

        let mut seq = left;
        seq.add(ElementCategory::Subplot, 1.0);
        seq.add(ElementCategory::LegendRegion, 0.25);

        assert_eq!(merged.finish(), seq.finish());
    }

    #[test]
    fn malformed_scores_zero_and_counts() {
        let mut b = ReportBuilder::new();
        b.add(ElementCategory::TextLabel, 1.0);
        b.add_malformed(ElementCategory::TextLabel);
        let r = b.finish();
        assert_eq!(r.category(ElementCategory::TextLabel), Some(0.5));
        assert_eq!(r.n_malformed, 1);
    }

    #[test]
    fn empty_report_is_zero() {
        let r = ReportBuilder::new().finish();
        assert_eq!(r.overall, 0.0);
        assert_eq!(r.n_elements, 0);
    }

    #[test]
    fn table_renders_rows() {
        let mut b = ReportBuilder::new();
        b.add(ElementCategory::Subplot, 1.0);
        let table = b.finish().to_table();
        assert!(table.contains("subplot"));
        assert!(table.contains("overall"));
        assert!(table.contains("1.000"));
    }
}
