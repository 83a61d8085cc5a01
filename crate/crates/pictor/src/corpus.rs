//! Deterministic corpus synthesis: single-panel charts plus multi-panel
//! composites assembled from them, written as PNG + annotation sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use pictor_core::chart::{
    compose_multipanel, generate_chart_spec, render_chart, ChartKind, RenderOutput,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imageio::save_png;
use crate::manifest::{
    write_annotations_jsonl, write_manifest, CorpusManifest, EntryKind, ManifestEntry,
    MANIFEST_VERSION,
};

const KINDS: [ChartKind; 3] = [ChartKind::Line, ChartKind::Bar, ChartKind::Scatter];
const MAX_PANELS: usize = 16;

#[derive(Debug, Clone, Copy)]
pub struct SynthOptions {
    pub n_singles: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SynthSummary {
    pub singles: usize,
    pub composites: usize,
    pub manifest_path: PathBuf,
}

fn render_single(seed: u64, index: usize) -> Result<RenderOutput> {
    let spec = generate_chart_spec(seed, KINDS[index % KINDS.len()]);
    render_chart(&spec).map_err(|e| anyhow!("rendering single {index}: {e}"))
}

/// Generates `n_singles` charts (kinds cycling line, bar, scatter) and
/// `ceil(n/5)` composites of 2..=16 panels sampled from them. Everything
/// derives from `seed`, so equal options reproduce byte-identical output.
pub fn synthesize_corpus(dir: &Path, opts: &SynthOptions) -> Result<SynthSummary> {
    fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let single_seeds: Vec<u64> = (0..opts.n_singles).map(|_| rng.gen()).collect();

    let mut entries = Vec::new();
    for (i, &s) in single_seeds.iter().enumerate() {
        let out = render_single(s, i)?;
        let image = format!("sample_{i:04}.png");
        let annotations = format!("sample_{i:04}.jsonl");
        save_png(&out.image, &dir.join(&image))?;
        write_annotations_jsonl(&dir.join(&annotations), &out.annotations)?;
        entries.push(ManifestEntry { image, annotations, kind: EntryKind::Single });
    }

    let n = opts.n_singles;
    let mut composites = 0;
    if n >= 2 {
        for j in 0..n.div_ceil(5) {
            let panel_count = rng.gen_range(2..=MAX_PANELS.min(n));
            let picked = rand::seq::index::sample(&mut rng, n, panel_count).into_vec();
            let rendered: Vec<RenderOutput> = picked
                .iter()
                .map(|&i| render_single(single_seeds[i], i))
                .collect::<Result<_>>()?;
            let panels: Vec<_> = rendered
                .iter()
                .map(|r| (&r.image, r.annotations.as_slice()))
                .collect();
            let composite = compose_multipanel(&panels, rng.gen())
                .map_err(|e| anyhow!("composing composite {j}: {e}"))?;
            let image = format!("composite_{j:04}.png");
            let annotations = format!("composite_{j:04}.jsonl");
            save_png(&composite.image, &dir.join(&image))?;
            write_annotations_jsonl(&dir.join(&annotations), &composite.annotations)?;
            entries.push(ManifestEntry { image, annotations, kind: EntryKind::Multi });
            composites += 1;
        }
    }

    let manifest = CorpusManifest { version: MANIFEST_VERSION, seed: opts.seed, entries };
    let manifest_path = write_manifest(dir, &manifest)?;
    Ok(SynthSummary { singles: n, composites, manifest_path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::read_manifest;

    #[test]
    fn small_corpus_has_expected_shape() {
        let dir = tempfile::tempdir().unwrap();
        let summary =
            synthesize_corpus(dir.path(), &SynthOptions { n_singles: 6, seed: 7 }).unwrap();
        assert_eq!(summary.singles, 6);
        assert_eq!(summary.composites, 2);
        let manifest = read_manifest(&summary.manifest_path).unwrap();
        assert_eq!(manifest.entries.len(), 8);
        for entry in &manifest.entries {
            assert!(dir.path().join(&entry.image).is_file(), "{}", entry.image);
            assert!(dir.path().join(&entry.annotations).is_file(), "{}", entry.annotations);
        }
        assert!(matches!(manifest.entries[6].kind, EntryKind::Multi));
    }

    #[test]
    fn same_seed_reproduces_identical_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let opts = SynthOptions { n_singles: 4, seed: 99 };
        synthesize_corpus(a.path(), &opts).unwrap();
        synthesize_corpus(b.path(), &opts).unwrap();
        for name in ["sample_0000.png", "sample_0003.jsonl", "composite_0000.png"] {
            let one = fs::read(a.path().join(name)).unwrap();
            let two = fs::read(b.path().join(name)).unwrap();
            assert_eq!(one, two, "{name} differs between runs");
        }
    }

    #[test]
    fn single_image_corpus_skips_composites() {
        let dir = tempfile::tempdir().unwrap();
        let summary =
            synthesize_corpus(dir.path(), &SynthOptions { n_singles: 1, seed: 3 }).unwrap();
        assert_eq!(summary.composites, 0);
        assert_eq!(read_manifest(&summary.manifest_path).unwrap().entries.len(), 1);
    }
}
