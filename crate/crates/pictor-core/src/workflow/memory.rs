//! Tree-shaped store for the images produced during an episode.
//!
//! Every tool output is kept, whether or not the critic liked it, so later
//! steps can return to an earlier branch. Ids are assigned in insertion
//! order (`img_0`, `img_1`, ...) which keeps traces deterministic.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::raster::RasterImage;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MemoryEdge {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    pub description: String,
}

#[derive(Debug, Clone, Default)]
pub struct ImageMemory {
    edges: Vec<MemoryEdge>,
    images: Vec<RasterImage>,
}

impl ImageMemory {
    pub fn new() -> Self {
        Self::default()
    }

    fn next_id(&self) -> String {
        format!("img_{}", self.edges.len())
    }

    /// Adds a root node (no parent) and returns its id. The first root is
    /// `img_0`.
    pub fn insert_root(&mut self, image: RasterImage, description: impl Into<String>) -> String {
        let id = self.next_id();
        self.edges.push(MemoryEdge { id: id.clone(), parent: None, description: description.into() });
        self.images.push(image);
        id
    }

    /// Adds a derived image under `parent`. Returns `None` when the parent
    /// id is unknown.
    pub fn insert(
        &mut self,
        parent: &str,
        image: RasterImage,
        description: impl Into<String>,
    ) -> Option<String> {
        if !self.contains(parent) {
            return None;
        }
        let id = self.next_id();
        self.edges.push(MemoryEdge {
            id: id.clone(),
            parent: Some(parent.to_string()),
            description: description.into(),
        });
        self.images.push(image);
        Some(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.edges.iter().any(|e| e.id == id)
    }

    pub fn image(&self, id: &str) -> Option<&RasterImage> {
        let idx = self.edges.iter().position(|e| e.id == id)?;
        Some(&self.images[idx])
    }

    pub fn edge(&self, id: &str) -> Option<&MemoryEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn edges(&self) -> &[MemoryEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn children(&self, id: &str) -> Vec<&MemoryEdge> {
        self.edges.iter().filter(|e| e.parent.as_deref() == Some(id)).collect()
    }

    /// One line per image for the planner prompt:
    /// `img_1 (from img_0): crop of the subplot at row 1, column 2`.
    pub fn pool_listing(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            match &e.parent {
                Some(p) => out.push_str(&format!("{} (from {}): {}\n", e.id, p, e.description)),
                None => out.push_str(&format!("{}: {}\n", e.id, e.description)),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img() -> RasterImage {
        RasterImage::new(4, 4)
    }

    #[test]
    fn ids_are_assigned_in_insertion_order() {
        let mut m = ImageMemory::new();
        assert_eq!(m.insert_root(img(), "root"), "img_0");
        assert_eq!(m.insert("img_0", img(), "a").unwrap(), "img_1");
        assert_eq!(m.insert("img_0", img(), "b").unwrap(), "img_2");
        assert_eq!(m.insert("img_1", img(), "c").unwrap(), "img_3");
        assert_eq!(m.len(), 4);
    }

    #[test]
    fn unknown_parent_is_rejected() {
        let mut m = ImageMemory::new();
        m.insert_root(img(), "root");
        assert_eq!(m.insert("img_7", img(), "x"), None);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn children_and_edges_track_structure() {
        let mut m = ImageMemory::new();
        m.insert_root(img(), "root");
        m.insert("img_0", img(), "a");
        m.insert("img_0", img(), "b");
        let kids = m.children("img_0");
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0].id, "img_1");
        assert_eq!(m.edge("img_2").unwrap().parent.as_deref(), Some("img_0"));
        assert!(m.children("img_1").is_empty());
    }

    #[test]
    fn pool_listing_formats_parent_links() {
        let mut m = ImageMemory::new();
        m.insert_root(img(), "original chart");
        m.insert("img_0", img(), "magnified view");
        let listing = m.pool_listing();
        assert_eq!(listing, "img_0: original chart\nimg_1 (from img_0): magnified view\n");
    }
}
