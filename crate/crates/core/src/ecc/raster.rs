//! Pixel approximation of the ball-union filtration.
//!
//! A pixel is filled at level t when its center lies within r of a ball
//! center c with `c·ν + R ≤ t`. Pixels are vertices, 4-adjacent filled
//! pairs are edges and filled 2×2 blocks are squares, so the curve counts
//! 4-connected foreground against 8-connected background. Closed pixel
//! squares would seal diagonal gaps and invent holes. Only used as an
//! independent check on the exact backends.

use crate::ecc::ECCurve;
use crate::error::{Error, Result};
use crate::shapes::{dot, BallUnion};

/// Largest grid the raster backend will allocate.
pub const MAX_PIXELS: usize = 50_000_000;

const EMPTY: u32 = u32::MAX;

pub fn ecc_raster(balls: &BallUnion, direction: &[f64], radius: f64, delta: f64) -> Result<ECCurve> {
    if balls.dim() != 2 || direction.len() != 2 {
        return Err(Error::InvalidArgument(
            "the raster backend supports planar shapes only".into(),
        ));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("pixel size must be positive, got {delta}")));
    }
    let horizon = 2.0 * radius;
    let centers = balls.centers();
    let r = balls.radius();

    // Balls sorted by entry level; a pixel records the rank of the first ball
    // that covers it.
    let heights: Vec<f64> = centers
        .iter()
        .map(|c| (dot(c, direction) + radius).clamp(0.0, horizon))
        .collect();
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| heights[a].total_cmp(&heights[b]));

    let pad = r + delta;
    let lo_x = centers.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min) - pad;
    let lo_y = centers.iter().map(|c| c[1]).fold(f64::INFINITY, f64::min) - pad;
    let hi_x = centers.iter().map(|c| c[0]).fold(f64::NEG_INFINITY, f64::max) + pad;
    let hi_y = centers.iter().map(|c| c[1]).fold(f64::NEG_INFINITY, f64::max) + pad;
    let nx = ((hi_x - lo_x) / delta).ceil() as usize;
    let ny = ((hi_y - lo_y) / delta).ceil() as usize;
    if nx.saturating_mul(ny) > MAX_PIXELS {
        return Err(Error::Resource(format!(
            "raster grid of {nx}x{ny} pixels exceeds {MAX_PIXELS}; use a coarser pixel size"
        )));
    }

    let mut entry = vec![EMPTY; nx * ny];
    let r2 = r * r;
    for (rank, &b) in order.iter().enumerate() {
        let c = &centers[b];
        let ix0 = (((c[0] - r - lo_x) / delta).floor().max(0.0)) as usize;
        let ix1 = ((((c[0] + r - lo_x) / delta).ceil()) as usize).min(nx);
        let iy0 = (((c[1] - r - lo_y) / delta).floor().max(0.0)) as usize;
        let iy1 = ((((c[1] + r - lo_y) / delta).ceil()) as usize).min(ny);
        for iy in iy0..iy1 {
            let py = lo_y + (iy as f64 + 0.5) * delta - c[1];
            let row = iy * nx;
            for ix in ix0..ix1 {
                let px = lo_x + (ix as f64 + 0.5) * delta - c[0];
                if px * px + py * py <= r2 {
                    let e = &mut entry[row + ix];
                    if (rank as u32) < *e {
                        *e = rank as u32;
                    }
                }
            }
        }
    }

    let pixel = |ix: isize, iy: isize| -> u32 {
        if ix < 0 || iy < 0 || ix >= nx as isize || iy >= ny as isize {
            EMPTY
        } else {
            entry[iy as usize * nx + ix as usize]
        }
    };
    let mut jumps = vec![0i64; centers.len()];
    let mut bump = |e: u32, by: i64| {
        if e != EMPTY {
            jumps[e as usize] += by;
        }
    };
    for iy in 0..ny as isize {
        for ix in 0..nx as isize {
            let here = pixel(ix, iy);
            let right = pixel(ix + 1, iy);
            let up = pixel(ix, iy + 1);
            let diag = pixel(ix + 1, iy + 1);
            bump(here, 1);
            bump(here.max(right), -1);
            bump(here.max(up), -1);
            bump(here.max(right).max(up).max(diag), 1);
        }
    }
    Ok(ECCurve::from_jumps(
        horizon,
        order.iter().enumerate().map(|(rank, &b)| (heights[b], jumps[rank])),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_disk() {
        let balls = BallUnion::new(vec![vec![0.2, 0.1]], 0.2).unwrap();
        let c = ecc_raster(&balls, &[1.0, 0.0], 1.0, 0.01).unwrap();
        assert_eq!(c.breakpoints(), &[1.2]);
        assert_eq!(c.values(), &[1]);
    }

    #[test]
    fn ring_of_disks_has_a_hole() {
        let centers = (0..40)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 40.0;
                vec![0.8 * t.cos(), 0.8 * t.sin()]
            })
            .collect();
        let balls = BallUnion::new(centers, 0.1).unwrap();
        let c = ecc_raster(&balls, &[0.0, 1.0], 1.0, 0.01).unwrap();
        assert_eq!(c.terminal_value(), 0);
        assert_eq!(c.value_at(1.0), 1);
    }

    #[test]
    fn rejects_3d_and_bad_delta() {
        let b = BallUnion::new(vec![vec![0.0, 0.0, 0.0]], 0.1).unwrap();
        assert!(ecc_raster(&b, &[1.0, 0.0, 0.0], 1.0, 0.01).is_err());
        let b = BallUnion::new(vec![vec![0.0, 0.0]], 0.1).unwrap();
        assert!(ecc_raster(&b, &[1.0, 0.0], 1.0, 0.0).is_err());
        assert!(matches!(ecc_raster(&b, &[1.0, 0.0], 1.0, 1e-6), Err(Error::Resource(_))));
    }
}
