//! Corpus manifest and annotation sidecar formats.
//!
//! A corpus directory holds PNG images, one `.jsonl` annotation sidecar per
//! image (same stem), and a `manifest.json` indexing them. Paths inside the
//! manifest are relative to the manifest's directory.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use pictor_core::ElementAnnotation;
use serde::{Deserialize, Serialize};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Single,
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: String,
    pub annotations: String,
    pub kind: EntryKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub version: u32,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

pub fn write_manifest(dir: &Path, manifest: &CorpusManifest) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<CorpusManifest> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: CorpusManifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    anyhow::ensure!(
        manifest.version == MANIFEST_VERSION,
        "unsupported manifest version {} (expected {MANIFEST_VERSION})",
        manifest.version
    );
    Ok(manifest)
}

/// One annotation per line, in the order given.
pub fn write_annotations_jsonl(path: &Path, annotations: &[ElementAnnotation]) -> Result<()> {
    let mut out = Vec::new();
    for ann in annotations {
        serde_json::to_writer(&mut out, ann)?;
        out.push(b'\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_annotations_jsonl(path: &Path) -> Result<Vec<ElementAnnotation>> {
    let file =
        fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut annotations = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ann: ElementAnnotation = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        annotations.push(ann);
    }
    Ok(annotations)
}

/// Sidecar convention: `figure.png` is annotated by `figure.jsonl`.
pub fn annotations_path_for(image_path: &Path) -> PathBuf {
    image_path.with_extension("jsonl")
}

/// The grounding reference for an image file is its stem.
pub fn image_ref_for(image_path: &Path) -> String {
    image_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_string())
}

/// Writes benchmark items, one JSON object per line.
pub fn write_items_jsonl(path: &Path, items: &[pictor_core::bench::BenchItem]) -> Result<()> {
    let mut file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    for item in items {
        serde_json::to_writer(&mut file, item)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_items_jsonl(path: &Path) -> Result<Vec<pictor_core::bench::BenchItem>> {
    let file =
        fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut items = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        items.push(item);
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pictor_core::{BBox, ElementAnnotation, ElementCategory};

    #[test]
    fn manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = CorpusManifest {
            version: MANIFEST_VERSION,
            seed: 42,
            entries: vec![ManifestEntry {
                image: "sample_0000.png".into(),
                annotations: "sample_0000.jsonl".into(),
                kind: EntryKind::Single,
            }],
        };
        let path = write_manifest(dir.path(), &manifest).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), manifest);
    }

    #[test]
    fn future_versions_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(MANIFEST_NAME);
        fs::write(&path, r#"{"version": 9, "seed": 1, "entries": []}"#).unwrap();
        assert!(read_manifest(&path).is_err());
    }

    #[test]
    fn annotations_jsonl_round_trips_and_skips_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.jsonl");
        let anns = vec![
            ElementAnnotation::boxed("title", ElementCategory::TextLabel, BBox::new(1.0, 2.0, 3.0, 4.0)),
            ElementAnnotation::boxed("plot_area", ElementCategory::Subplot, BBox::new(0.0, 0.0, 10.0, 10.0)),
        ];
        write_annotations_jsonl(&path, &anns).unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("\n\n");
        fs::write(&path, text).unwrap();
        assert_eq!(read_annotations_jsonl(&path).unwrap(), anns);
    }

    #[test]
    fn sidecar_paths_swap_the_extension() {
        assert_eq!(
            annotations_path_for(Path::new("/x/figure.png")),
            PathBuf::from("/x/figure.jsonl")
        );
        assert_eq!(image_ref_for(Path::new("/x/figure.png")), "figure");
    }

    #[test]
    fn bench_items_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("items.jsonl");
        let items = vec![pictor_core::bench::BenchItem {
            id: "q1".into(),
            image: "sample_0000.png".into(),
            question: "what is the peak?".into(),
            answer: "12".into(),
        }];
        write_items_jsonl(&path, &items).unwrap();
        assert_eq!(read_items_jsonl(&path).unwrap(), items);
    }
}
