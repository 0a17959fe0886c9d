//! Exact curves of planar disk unions from the boundary of the union.
//!
//! For a union U of closed disks of radius r in general position,
//! Gauss–Bonnet gives `2πχ(U) = Σ θ_a − Σ γ_c`: θ_a runs over the angles of
//! the boundary arcs and γ_c over the corners where two circles meet on the
//! boundary, with `γ = 2·asin(d / 2r)` for centers at distance d. Adding a
//! disk only changes the boundary of that disk and of its neighbours, so the
//! whole filtration costs O(k²) per disk for k neighbours.

use std::f64::consts::TAU;

use crate::ecc::ECCurve;
use crate::error::{Error, Result};
use crate::shapes::{dot, BallUnion};

/// Largest distance of `2πχ` from a multiple of 2π before a curve is
/// reported as numerically unreliable.
const ROUNDING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
struct Cover {
    other: u32,
    /// Start of the covered arc on this circle, in [0, 2π).
    start: f64,
    end: f64,
    /// Corner angle where the two circles cross.
    corner: f64,
}

/// Planar disk union with precomputed pairwise overlaps.
#[derive(Debug, Clone)]
pub struct DiskUnion {
    centers: Vec<[f64; 2]>,
    radius: f64,
    /// Overlapping disks of each disk, sorted by `start`.
    covers: Vec<Vec<Cover>>,
}

impl DiskUnion {
    pub fn build(balls: &BallUnion) -> Result<Self> {
        if balls.dim() != 2 {
            return Err(Error::InvalidArgument(
                "the disk backend supports planar shapes only".into(),
            ));
        }
        let r = balls.radius();
        // Coincident disks add nothing to the union.
        let mut centers: Vec<[f64; 2]> = balls.centers().iter().map(|c| [c[0], c[1]]).collect();
        centers.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        centers.dedup();

        let n = centers.len();
        let mut by_x: Vec<usize> = (0..n).collect();
        by_x.sort_by(|&a, &b| centers[a][0].total_cmp(&centers[b][0]));
        let mut covers = vec![Vec::new(); n];
        for (k, &i) in by_x.iter().enumerate() {
            for &j in &by_x[k + 1..] {
                let dx = centers[j][0] - centers[i][0];
                if dx > 2.0 * r {
                    break;
                }
                let dy = centers[j][1] - centers[i][1];
                let d = dx.hypot(dy);
                if d > 2.0 * r {
                    continue;
                }
                let half = (d / (2.0 * r)).min(1.0).acos();
                let corner = 2.0 * (d / (2.0 * r)).min(1.0).asin();
                let toward = dy.atan2(dx);
                for (a, b, dir) in [(i, j, toward), (j, i, toward + std::f64::consts::PI)] {
                    let start = (dir - half).rem_euclid(TAU);
                    covers[a].push(Cover {
                        other: b as u32,
                        start,
                        end: start + 2.0 * half,
                        corner,
                    });
                }
            }
        }
        for c in &mut covers {
            c.sort_by(|a, b| a.start.total_cmp(&b.start));
        }
        Ok(Self {
            centers,
            radius: r,
            covers,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of distinct disks.
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `2π` times the share of χ carried by the boundary of disk `i`, given
    /// which other disks are present.
    fn boundary_turning(&self, i: usize, present: &[bool]) -> f64 {
        let covers = &self.covers[i];
        let mut far = f64::NEG_INFINITY;
        let mut far_corner = 0.0;
        for c in covers.iter().filter(|c| present[c.other as usize]) {
            if c.end > far {
                far = c.end;
                far_corner = c.corner;
            }
        }
        if far == f64::NEG_INFINITY {
            return TAU;
        }
        // Sweep once around the circle, starting from the part of the
        // farthest-reaching cover that wraps past 2π.
        far -= TAU;
        let mut total = 0.0;
        for c in covers.iter().filter(|c| present[c.other as usize]) {
            if c.start > far {
                total += c.start - far - 0.5 * (far_corner + c.corner);
            }
            if c.end > far {
                far = c.end;
                far_corner = c.corner;
            }
        }
        total
    }

    pub fn ecc(&self, direction: &[f64], radius: f64) -> Result<ECCurve> {
        if direction.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "direction has dimension {} but the disks are planar",
                direction.len()
            )));
        }
        let horizon = 2.0 * radius;
        let n = self.centers.len();
        let heights: Vec<f64> = self
            .centers
            .iter()
            .map(|c| (dot(c, direction) + radius).clamp(0.0, horizon))
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| heights[a].total_cmp(&heights[b]));
        let mut rank = vec![0usize; n];
        for (k, &i) in order.iter().enumerate() {
            rank[i] = k;
        }

        // turning[k]: change in 2πχ when the disk of rank k enters.
        let mut turning = vec![0.0f64; n];
        let mut present = vec![false; n];
        let mut later: Vec<usize> = Vec::new();
        for i in 0..n {
            let covers = &self.covers[i];
            later.clear();
            for c in covers {
                let j = c.other as usize;
                if rank[j] < rank[i] {
                    present[j] = true;
                } else {
                    later.push(j);
                }
            }
            later.sort_by_key(|&j| rank[j]);
            let mut current = self.boundary_turning(i, &present);
            turning[rank[i]] += current;
            for &j in &later {
                present[j] = true;
                let next = self.boundary_turning(i, &present);
                turning[rank[j]] += next - current;
                current = next;
            }
            for c in covers {
                present[c.other as usize] = false;
            }
        }

        let mut jumps = Vec::with_capacity(n);
        let mut running = 0.0;
        let mut chi = 0i64;
        for (k, &i) in order.iter().enumerate() {
            running += turning[k];
            let exact = running / TAU;
            let rounded = exact.round();
            if (exact - rounded).abs() > ROUNDING_TOL {
                return Err(Error::NumericalRank(format!(
                    "disk union is too close to degenerate: χ evaluated to {exact}"
                )));
            }
            jumps.push((heights[i], rounded as i64 - chi));
            chi = rounded as i64;
        }
        Ok(ECCurve::from_jumps(horizon, jumps))
    }
}
