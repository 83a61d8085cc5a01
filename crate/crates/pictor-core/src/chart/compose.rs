//! Grid composition of rendered charts into one multi-panel image.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{scoped_id, ElementAnnotation};
use crate::chart::ChartError;
use crate::mathf;
use crate::raster::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelLayout {
    pub rows: u32,
    pub cols: u32,
    /// Uniform outer and inter-panel margin, sampled from 4..=40 px.
    pub margin: u32,
    /// Grid cell size: the max panel width and height among the inputs.
    pub cell_w: u32,
    pub cell_h: u32,
}

#[derive(Debug, Clone)]
pub struct Composite {
    pub image: RasterImage,
    pub annotations: Vec<ElementAnnotation>,
    pub layout: PanelLayout,
}

/// Lays 2..=16 rendered panels onto a near-square grid, left to right then
/// top to bottom. Panel annotations are translated into composite
/// coordinates, their ids gain a `r{R}c{C}_` prefix, and every annotation
/// records its 1-based `grid_pos`.
pub fn compose_multipanel(
    panels: &[(&RasterImage, &[ElementAnnotation])],
    seed: u64,
) -> Result<Composite, ChartError> {
    let n = panels.len();
    if !(2..=16).contains(&n) {
        return Err(ChartError::PanelCount { got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin: u32 = rng.gen_range(4..=40);

    let cols = mathf::ceil(mathf::sqrt(n as f64)) as u32;
    let rows = (n as u32).div_ceil(cols);
    let cell_w = panels.iter().map(|(img, _)| img.width()).max().unwrap();
    let cell_h = panels.iter().map(|(img, _)| img.height()).max().unwrap();

    let width = cols * cell_w + (cols + 1) * margin;
    let height = rows * cell_h + (rows + 1) * margin;
    let mut image = RasterImage::new(width, height);
    let mut annotations = Vec::new();

    for (k, (panel, anns)) in panels.iter().enumerate() {
        let row = k as u32 / cols;
        let col = k as u32 % cols;
        let ox = margin + col * (cell_w + margin);
        let oy = margin + row * (cell_h + margin);
        image.blit(panel, ox, oy);
        for ann in anns.iter() {
            let mut moved = ann.clone();
            moved.element_id = scoped_id(row + 1, col + 1, &ann.element_id);
            moved.grid_pos = Some((row + 1, col + 1));
            if let Some(b) = ann.bbox {
                moved.bbox = Some(b.translated(ox as f64, oy as f64));
            }
            if let Some(p) = ann.point {
                moved.point = Some(crate::geom::Point::new(p.x + ox as f64, p.y + oy as f64));
            }
            annotations.push(moved);
        }
    }

    Ok(Composite {
        image,
        annotations,
        layout: PanelLayout { rows, cols, margin, cell_w, cell_h },
    })
}
