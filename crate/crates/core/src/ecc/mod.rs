//! Euler characteristic curves of sublevel-set filtrations.
//!
//! For a shape K in B(0, R) and a unit direction ν, the sublevel set at
//! level t ∈ [0, 2R] is `{x ∈ K : x·ν ≤ t − R}`. Meshes are filtered
//! exactly (lower-star). Planar ball unions are filtered exactly from the
//! boundary of the union, ball unions in any dimension through their Čech
//! nerve, and a pixel approximation is available as a cross-check.

mod curve;
mod directions;
mod disks;
mod mesh;
mod nerve;
mod raster;

use serde::{Deserialize, Serialize};

pub use curve::{ecc_bounds_check, ECCurve};
pub use directions::{direction_grid, DirectionGrid, DirectionSource, FILE_UNIT_TOL, UNIT_TOL};
pub use disks::DiskUnion;
pub use mesh::ecc_mesh;
pub use nerve::{min_enclosing_ball, Ball, CechNerve, DEFAULT_MAX_CLIQUE};
pub use raster::{ecc_raster, MAX_PIXELS};

use crate::error::{Error, Result};
use crate::shapes::BallUnion;

/// How a curve is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Exact lower-star filtration of a mesh.
    Mesh,
    /// Exact boundary computation for planar ball unions.
    Disks,
    /// Čech nerve of a ball union, with a cap on simplex size.
    Cech { max_clique: usize },
    /// Pixel approximation of a planar ball union with pixel size δ.
    Raster { delta: f64 },
}

impl Backend {
    pub fn cech() -> Self {
        Backend::Cech {
            max_clique: DEFAULT_MAX_CLIQUE,
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    /// `mesh`, `disks`, `cech`, `cech:<max clique>` or `raster:<δ>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let bad = || Error::InvalidArgument(format!("bad backend {s:?}"));
        match (name, arg) {
            ("mesh", None) => Ok(Backend::Mesh),
            ("disks", None) => Ok(Backend::Disks),
            ("cech", None) => Ok(Backend::cech()),
            ("cech", Some(a)) => Ok(Backend::Cech {
                max_clique: a.parse().map_err(|_| bad())?,
            }),
            ("raster", Some(a)) => {
                let delta: f64 = a.parse().map_err(|_| bad())?;
                if !(delta > 0.0) {
                    return Err(bad());
                }
                Ok(Backend::Raster { delta })
            }
            _ => Err(bad()),
        }
    }
}

/// Curve of a ball union in one direction. For many directions build the
/// [`DiskUnion`] or [`CechNerve`] once and query it per direction.
pub fn ecc_ball_union(
    balls: &BallUnion,
    direction: &[f64],
    radius: f64,
    backend: Backend,
) -> Result<ECCurve> {
    match backend {
        Backend::Disks => DiskUnion::build(balls)?.ecc(direction, radius),
        Backend::Cech { max_clique } => CechNerve::build(balls, max_clique)?.ecc(direction, radius),
        Backend::Raster { delta } => ecc_raster(balls, direction, radius, delta),
        Backend::Mesh => Err(Error::InvalidArgument(
            "the mesh backend does not apply to ball unions".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_backends() {
        assert_eq!("mesh".parse::<Backend>().unwrap(), Backend::Mesh);
        assert_eq!("disks".parse::<Backend>().unwrap(), Backend::Disks);
        assert_eq!("cech".parse::<Backend>().unwrap(), Backend::cech());
        assert_eq!(
            "cech:20".parse::<Backend>().unwrap(),
            Backend::Cech { max_clique: 20 }
        );
        assert_eq!(
            "raster:0.005".parse::<Backend>().unwrap(),
            Backend::Raster { delta: 0.005 }
        );
        assert!("raster".parse::<Backend>().is_err());
        assert!("raster:-1".parse::<Backend>().is_err());
        assert!("alpha".parse::<Backend>().is_err());
    }

    #[test]
    fn backends_agree_on_two_balls() {
        let balls = BallUnion::new(vec![vec![0.0, 0.0], vec![0.3, 0.1]], 0.2).unwrap();
        let a = ecc_ball_union(&balls, &[1.0, 0.0], 1.0, Backend::cech()).unwrap();
        let b = ecc_ball_union(&balls, &[1.0, 0.0], 1.0, Backend::Raster { delta: 0.005 }).unwrap();
        assert_eq!(a, b);
        let c = ecc_ball_union(&balls, &[1.0, 0.0], 1.0, Backend::Disks).unwrap();
        assert_eq!(a, c);
        assert!(ecc_ball_union(&balls, &[1.0, 0.0], 1.0, Backend::Mesh).is_err());
    }
}
