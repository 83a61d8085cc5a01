//! Benchmark scoring: answer judging, per-item outcomes, and critic tallies.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::workflow::RunResult;

/// One benchmark task: an image reference (interpreted by the caller, e.g. a
/// file path), a question about it, and the gold answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchItem {
    pub id: String,
    pub image: String,
    pub question: String,
    pub answer: String,
}

/// Canonical form used by the offline judge: lowercased, `$`/`%`/`,` and a
/// trailing period stripped, whitespace collapsed.
pub fn normalize_answer(text: &str) -> String {
    let mut cleaned = String::new();
    for ch in text.trim().chars() {
        match ch {
            '$' | '%' | ',' => {}
            c if c.is_whitespace() => {
                if !cleaned.ends_with(' ') && !cleaned.is_empty() {
                    cleaned.push(' ');
                }
            }
            c => {
                for lower in c.to_lowercase() {
                    cleaned.push(lower);
                }
            }
        }
    }
    while cleaned.ends_with(' ') {
        cleaned.pop();
    }
    if cleaned.ends_with('.') && !cleaned.ends_with("..") {
        cleaned.pop();
    }
    cleaned
}

/// String-equality judge with a numeric fallback: answers match when their
/// normalized forms are equal, or when both parse as finite floats that are
/// equal ("0.70" matches "0.7", "1,234" matches "1234").
pub fn offline_judge(gold: &str, predicted: &str) -> bool {
    let g = normalize_answer(gold);
    let p = normalize_answer(predicted);
    if g == p {
        return true;
    }
    match (g.parse::<f64>(), p.parse::<f64>()) {
        (Ok(a), Ok(b)) => a.is_finite() && b.is_finite() && a == b,
        _ => false,
    }
}

/// One refinement round of one item, as seen by the scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRound {
    pub round: u32,
    pub answer: Option<String>,
    /// Whether the planning critic asked for another round after this one.
    pub adjustment: bool,
    /// Whether this round's answer already matched the gold answer.
    pub correct: bool,
}

/// Scored result for one benchmark item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemOutcome {
    pub id: String,
    pub predicted: Option<String>,
    pub correct: bool,
    pub rounds_used: u32,
    pub rounds: Vec<ItemRound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ItemOutcome {
    /// Scores a finished run against the gold answer. `judge` decides whether
    /// a produced answer matches gold; pass [`offline_judge`] for the
    /// self-contained variant.
    pub fn from_run<J>(id: &str, gold: &str, run: &RunResult, judge: J) -> Self
    where
        J: Fn(&str, &str) -> bool,
    {
        let rounds: Vec<ItemRound> = run
            .rounds
            .iter()
            .map(|r| {
                let answer = r.trace.final_answer.clone();
                let correct = answer.as_deref().map(|a| judge(gold, a)).unwrap_or(false);
                ItemRound { round: r.round, answer, adjustment: r.critique.adjustment, correct }
            })
            .collect();
        let predicted = run.final_answer.clone();
        let correct = predicted.as_deref().map(|a| judge(gold, a)).unwrap_or(false);
        ItemOutcome {
            id: id.to_string(),
            predicted,
            correct,
            rounds_used: run.rounds_used,
            rounds,
            error: None,
        }
    }

    /// Records an item whose run never produced a result (backend failure,
    /// unreadable image, ...). Counts as incorrect.
    pub fn failed(id: &str, message: &str) -> Self {
        ItemOutcome {
            id: id.to_string(),
            predicted: None,
            correct: false,
            rounds_used: 0,
            rounds: Vec::new(),
            error: Some(message.to_string()),
        }
    }
}

/// Aggregate critic behaviour at one round position across all items.
///
/// A `true_positive` is an adjustment request issued while the round's answer
/// was in fact wrong; a `false_positive` is one issued while it was already
/// right. Items that errored out contribute to neither.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticRoundTally {
    pub round: u32,
    pub reviews: usize,
    pub adjustments: usize,
    pub true_positive: usize,
    pub false_positive: usize,
}

/// Full benchmark report: overall accuracy plus per-item and per-round detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub critic_rounds: Vec<CriticRoundTally>,
    pub items: Vec<ItemOutcome>,
}

/// Folds item outcomes into a report. Items are ordered by id so identical
/// inputs serialize identically regardless of completion order.
pub fn build_report(mut items: Vec<ItemOutcome>) -> BenchReport {
    items.sort_by(|a, b| a.id.cmp(&b.id));
    let total = items.len();
    let correct = items.iter().filter(|i| i.correct).count();
    let accuracy = if total == 0 { 0.0 } else { correct as f64 / total as f64 };

    let mut tallies: BTreeMap<u32, CriticRoundTally> = BTreeMap::new();
    for item in &items {
        for round in &item.rounds {
            let t = tallies.entry(round.round).or_insert(CriticRoundTally {
                round: round.round,
                reviews: 0,
                adjustments: 0,
                true_positive: 0,
                false_positive: 0,
            });
            t.reviews += 1;
            if round.adjustment {
                t.adjustments += 1;
                if round.correct {
                    t.false_positive += 1;
                } else {
                    t.true_positive += 1;
                }
            }
        }
    }

    BenchReport {
        total,
        correct,
        accuracy,
        critic_rounds: tallies.into_values().collect(),
        items,
    }
}

/// Human-readable summary: one accuracy line, then one line per round
/// position describing what the planning critic did there.
pub fn summarize(report: &BenchReport) -> String {
    let mut out = format!(
        "accuracy: {:.3} ({}/{})\n",
        report.accuracy, report.correct, report.total
    );
    for t in &report.critic_rounds {
        out.push_str(&format!(
            "critic round {}: {} reviews, {} adjustments, {} true positive, {} false positive\n",
            t.round, t.reviews, t.adjustments, t.true_positive, t.false_positive
        ));
    }
    let errored = report.items.iter().filter(|i| i.error.is_some()).count();
    if errored > 0 {
        out.push_str(&format!("errors: {errored}\n"));
    }
    out
}
