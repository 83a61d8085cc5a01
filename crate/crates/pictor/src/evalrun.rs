//! Grounding evaluation over a corpus directory, with optional fan-out
//! across threads. Partial results merge in entry order, so the report is
//! identical for any worker count.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use pictor_core::grounding::{
    evaluate_annotations, GroundingBackend, GroundingError, GroundingReport, OracleBackend,
    ReportBuilder,
};
use pictor_core::{ElementAnnotation, RasterImage};

use crate::imageio::load_png;
use crate::manifest::{image_ref_for, read_annotations_jsonl, CorpusManifest};

pub struct LoadedEntry {
    pub image_ref: String,
    pub image: RasterImage,
    pub annotations: Vec<ElementAnnotation>,
}

/// Loads up to `limit` manifest entries (images and annotation sidecars)
/// from the manifest's directory.
pub fn load_entries(
    dir: &Path,
    manifest: &CorpusManifest,
    limit: Option<usize>,
) -> Result<Vec<LoadedEntry>> {
    let take = limit.unwrap_or(manifest.entries.len());
    let mut out = Vec::new();
    for entry in manifest.entries.iter().take(take) {
        let image_path = dir.join(&entry.image);
        let image = load_png(&image_path)?;
        let annotations = read_annotations_jsonl(&dir.join(&entry.annotations))
            .with_context(|| format!("annotations for {}", entry.image))?;
        out.push(LoadedEntry { image_ref: image_ref_for(&image_path), image, annotations });
    }
    Ok(out)
}

/// Oracle backend answering for every loaded entry, keyed by image ref.
pub fn oracle_for(entries: &[LoadedEntry]) -> OracleBackend {
    let mut oracle = OracleBackend::new();
    for e in entries {
        oracle.insert(e.image_ref.clone(), e.annotations.clone());
    }
    oracle
}

/// Evaluates every annotated element of every entry against `backend`.
/// `jobs` worker threads pull entries off a shared queue; per-entry partial
/// reports merge in entry order afterwards.
pub fn evaluate_entries(
    entries: &[LoadedEntry],
    backend: &(dyn GroundingBackend + Sync),
    jobs: usize,
) -> Result<GroundingReport, GroundingError> {
    let workers = jobs.max(1).min(entries.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<ReportBuilder, GroundingError>>>> =
        entries.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(entry) = entries.get(i) else { break };
                let mut builder = ReportBuilder::new();
                let outcome = evaluate_annotations(
                    backend,
                    &entry.image,
                    &entry.image_ref,
                    &entry.annotations,
                    &mut builder,
                )
                .map(|()| builder);
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    let mut merged = ReportBuilder::new();
    for slot in slots {
        match slot.into_inner().unwrap().expect("worker processed every claimed entry") {
            Ok(partial) => merged.merge(partial),
            Err(e) => return Err(e),
        }
    }
    Ok(merged.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, SynthOptions};
    use crate::manifest::read_manifest;
    use pictor_core::grounding::OffsetBackend;

    fn small_corpus() -> (tempfile::TempDir, Vec<LoadedEntry>) {
        let dir = tempfile::tempdir().unwrap();
        let summary =
            synthesize_corpus(dir.path(), &SynthOptions { n_singles: 5, seed: 11 }).unwrap();
        let manifest = read_manifest(&summary.manifest_path).unwrap();
        let entries = load_entries(dir.path(), &manifest, None).unwrap();
        (dir, entries)
    }

    #[test]
    fn oracle_scores_its_own_corpus_perfectly() {
        let (_dir, entries) = small_corpus();
        let oracle = oracle_for(&entries);
        let report = evaluate_entries(&entries, &oracle, 1).unwrap();
        assert!(report.n_elements > 0);
        assert_eq!(report.overall, 1.0, "{}", report.to_table());
    }

    #[test]
    fn worker_count_does_not_change_the_report() {
        let (_dir, entries) = small_corpus();
        let oracle = oracle_for(&entries);
        let one = evaluate_entries(&entries, &oracle, 1).unwrap();
        let eight = evaluate_entries(&entries, &oracle, 8).unwrap();
        assert_eq!(
            serde_json::to_string(&one).unwrap(),
            serde_json::to_string(&eight).unwrap()
        );
    }

    #[test]
    fn offset_perturbation_lowers_the_score() {
        let (_dir, entries) = small_corpus();
        let shifted = OffsetBackend::diagonal(oracle_for(&entries), 25.0);
        let report = evaluate_entries(&entries, &shifted, 2).unwrap();
        assert!(report.overall < 1.0);
    }

    #[test]
    fn limit_restricts_the_loaded_entries() {
        let dir = tempfile::tempdir().unwrap();
        let summary =
            synthesize_corpus(dir.path(), &SynthOptions { n_singles: 5, seed: 11 }).unwrap();
        let manifest = read_manifest(&summary.manifest_path).unwrap();
        let entries = load_entries(dir.path(), &manifest, Some(2)).unwrap();
        assert_eq!(entries.len(), 2);
    }
}
