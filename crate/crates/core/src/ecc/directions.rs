use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shapes::norm;

/// Maximum deviation from unit length tolerated in a grid.
pub const UNIT_TOL: f64 = 1e-12;
/// Maximum deviation from unit length accepted when reading a file; rows
/// within it are renormalised.
pub const FILE_UNIT_TOL: f64 = 1e-6;

/// An ordered list of unit directions on the sphere S^{d-1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    dim: usize,
    directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSource {
    /// `θ_p = (p - 1)·2π/Γ` on the unit circle.
    UniformCircle,
    /// `θ_p = (p - 1)·π/Γ`, the upper half circle (the simulation-study grid).
    HalfCircle,
    /// CSV file with one unit vector per row.
    File(PathBuf),
}

pub fn direction_grid(dim: usize, count: usize, source: &DirectionSource) -> Result<DirectionGrid> {
    if count == 0 {
        return Err(Error::InvalidArgument("direction count must be >= 1".into()));
    }
    match source {
        DirectionSource::File(path) => {
            let grid = DirectionGrid::from_csv_file(path, dim)?;
            if grid.len() != count {
                return Err(Error::Validation(format!(
                    "{} lists {} directions, expected {count}",
                    path.display(),
                    grid.len()
                )));
            }
            Ok(grid)
        }
        _ if dim != 2 => Err(Error::InvalidArgument(format!(
            "generated direction grids are planar; dimension {dim} needs a direction file"
        ))),
        DirectionSource::UniformCircle => Ok(DirectionGrid::circle(count, 2.0 * PI)),
        DirectionSource::HalfCircle => Ok(DirectionGrid::circle(count, PI)),
    }
}

impl DirectionGrid {
    pub fn new(dim: usize, directions: Vec<Vec<f64>>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Validation(format!("unsupported dimension {dim}")));
        }
        if directions.is_empty() {
            return Err(Error::Validation("a direction grid needs at least one direction".into()));
        }
        for (p, v) in directions.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Validation(format!(
                    "direction {} has {} components, expected {dim}",
                    p + 1,
                    v.len()
                )));
            }
            if (norm(v) - 1.0).abs() > UNIT_TOL {
                return Err(Error::Validation(format!(
                    "direction {} is not a unit vector (norm {})",
                    p + 1,
                    norm(v)
                )));
            }
        }
        Ok(Self { dim, directions })
    }

    /// Γ directions at angles `(p - 1)·span/Γ`.
    fn circle(count: usize, span: f64) -> Self {
        let directions = (0..count)
            .map(|p| {
                let theta = p as f64 * span / count as f64;
                vec![theta.cos(), theta.sin()]
            })
            .collect();
        Self { dim: 2, directions }
    }

    pub fn uniform_circle(count: usize) -> Result<Self> {
        direction_grid(2, count, &DirectionSource::UniformCircle)
    }

    pub fn half_circle(count: usize) -> Result<Self> {
        direction_grid(2, count, &DirectionSource::HalfCircle)
    }

    /// Parses comma- (or whitespace-) separated rows of `dim` numbers.
    pub fn from_csv_str(text: &str, dim: usize) -> Result<Self> {
        let mut directions = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().map(|f| f.parse::<f64>()).collect();
            let v = match parsed {
                Ok(v) => v,
                // A non-numeric first line is a header.
                Err(_) if directions.is_empty() && lineno == 0 => continue,
                Err(e) => {
                    return Err(Error::Parse(format!("direction row {}: {e}", lineno + 1)))
                }
            };
            if v.len() != dim {
                return Err(Error::Validation(format!(
                    "direction row {} has {} columns, expected {dim}",
                    lineno + 1,
                    v.len()
                )));
            }
            let n = norm(&v);
            if !((n - 1.0).abs() <= FILE_UNIT_TOL) {
                return Err(Error::Validation(format!(
                    "direction row {} is not a unit vector (norm {n})",
                    lineno + 1
                )));
            }
            directions.push(v.into_iter().map(|x| x / n).collect());
        }
        Self::new(dim, directions)
    }

    pub fn from_csv_file(path: &Path, dim: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_csv_str(&text, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    /// Direction `p` (0-based).
    pub fn get(&self, p: usize) -> &[f64] {
        &self.directions[p]
    }
}
