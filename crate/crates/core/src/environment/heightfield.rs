use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EnvironmentError;
use crate::geometry::GlobalCartesian;

/// On-disk layout of a height field. Key names are part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightFieldFile {
    pub cell_size: f64,
    pub origin: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub heights: Vec<f64>,
}

/// Grid of column heights standing in for a scanned environment.
///
/// Cell `(i, j)` covers `[origin.x + i*cell_size, origin.x + (i+1)*cell_size]`
/// by the matching `y` interval and is stored at `j * nx + i`, so row 0 is
/// the minimum-`y` row. A cell at height zero is floor; taller cells are
/// furniture or walls whose sides are vertical faces.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    origin: GlobalCartesian,
    cell_size: f64,
    nx: usize,
    ny: usize,
    heights: Vec<f64>,
    max_height: f64,
}

impl HeightField {
    pub fn new(
        origin: GlobalCartesian,
        cell_size: f64,
        nx: usize,
        ny: usize,
        heights: Vec<f64>,
    ) -> Result<Self, EnvironmentError> {
        if !origin.is_finite() {
            return Err(EnvironmentError::Invalid("origin must be finite".into()));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(EnvironmentError::Invalid(format!(
                "cell_size must be positive, got {cell_size}"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(EnvironmentError::Invalid(format!(
                "grid must be non-empty, got {nx}x{ny}"
            )));
        }
        if heights.len() != nx * ny {
            return Err(EnvironmentError::Invalid(format!(
                "expected {} heights for a {nx}x{ny} grid, found {}",
                nx * ny,
                heights.len()
            )));
        }
        if let Some(idx) = heights.iter().position(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(EnvironmentError::InvalidCell {
                i: idx % nx,
                j: idx / nx,
                value: heights[idx],
            });
        }
        let max_height = heights.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            origin,
            cell_size,
            nx,
            ny,
            heights,
            max_height,
        })
    }

    pub fn flat(origin: GlobalCartesian, cell_size: f64, nx: usize, ny: usize) -> Self {
        Self::new(origin, cell_size, nx, ny, vec![0.0; nx * ny]).expect("valid flat field")
    }

    pub fn from_file(file: HeightFieldFile) -> Result<Self, EnvironmentError> {
        Self::new(
            GlobalCartesian::new(file.origin[0], file.origin[1]),
            file.cell_size,
            file.nx,
            file.ny,
            file.heights,
        )
    }

    pub fn to_file(&self) -> HeightFieldFile {
        HeightFieldFile {
            cell_size: self.cell_size,
            origin: [self.origin.x, self.origin.y],
            nx: self.nx,
            ny: self.ny,
            heights: self.heights.clone(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, EnvironmentError> {
        let file: HeightFieldFile =
            toml::from_str(text).map_err(|e| EnvironmentError::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn origin(&self) -> GlobalCartesian {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn max_height(&self) -> f64 {
        self.max_height
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn height(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.nx + i]
    }

    /// Far corner of the field.
    pub fn extent(&self) -> GlobalCartesian {
        self.origin
            + GlobalCartesian::new(
                self.nx as f64 * self.cell_size,
                self.ny as f64 * self.cell_size,
            )
    }

    pub fn contains(&self, p: GlobalCartesian) -> bool {
        let far = self.extent();
        p.x >= self.origin.x && p.x <= far.x && p.y >= self.origin.y && p.y <= far.y
    }

    /// Cell containing `p`; points on the far edge belong to the last cell.
    pub fn cell_of(&self, p: GlobalCartesian) -> Option<(usize, usize)> {
        if !self.contains(p) {
            return None;
        }
        let i = ((p.x - self.origin.x) / self.cell_size).floor() as usize;
        let j = ((p.y - self.origin.y) / self.cell_size).floor() as usize;
        Some((i.min(self.nx - 1), j.min(self.ny - 1)))
    }

    pub fn height_at(&self, p: GlobalCartesian) -> Option<f64> {
        self.cell_of(p).map(|(i, j)| self.height(i, j))
    }

    /// Same geometry at half the cell size.
    pub fn refined(&self) -> Self {
        let (nx, ny) = (self.nx * 2, self.ny * 2);
        let mut heights = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                heights.push(self.height(i / 2, j / 2));
            }
        }
        Self::new(self.origin, self.cell_size / 2.0, nx, ny, heights).expect("refined field")
    }
}

pub fn load_heightfield(path: impl AsRef<Path>) -> Result<HeightField, EnvironmentError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EnvironmentError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    HeightField::parse(&text)
}
