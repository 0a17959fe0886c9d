//! Čech nerve of a union of equal-radius balls.
//!
//! A set of centers spans a nerve simplex iff the balls share a point, which
//! for equal radii r means the minimum enclosing ball of the centers has
//! radius ≤ r. The nerve is built once per shape; the curve in a direction
//! only needs each simplex's highest vertex.

use crate::ecc::ECCurve;
use crate::error::{Error, Result};
use crate::shapes::{dot, BallUnion, Point};

/// Default cap on the number of vertices in a nerve simplex.
pub const DEFAULT_MAX_CLIQUE: usize = 16;

/// Relative slack on the intersection test so that tangent balls intersect.
const INTERSECT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn empty(dim: usize) -> Self {
        Ball {
            center: vec![0.0; dim],
            radius: -1.0,
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        if self.radius < 0.0 {
            return false;
        }
        let tol = 1e-12 * self.radius.max(1.0);
        dist(&self.center, p) <= self.radius + tol
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Smallest ball with all of `boundary` on its surface (the circumball within
/// their affine hull). Falls back to the ball about the farthest pair when the
/// points are affinely dependent.
fn ball_from_boundary(boundary: &[&[f64]], dim: usize) -> Ball {
    let k = boundary.len();
    match k {
        0 => return Ball::empty(dim),
        1 => {
            return Ball {
                center: boundary[0].to_vec(),
                radius: 0.0,
            }
        }
        _ => {}
    }
    let p0 = boundary[0];
    let a: Vec<Vec<f64>> = boundary[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(x, y)| x - y).collect())
        .collect();
    let m = k - 1;
    // Augmented Gram system  (a_i·a_j) λ = |a_i|²/2.
    let mut g = vec![vec![0.0; m + 1]; m];
    let mut scale: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            g[i][j] = dot(&a[i], &a[j]);
        }
        g[i][m] = 0.5 * g[i][i];
        scale = scale.max(g[i][i]);
    }
    let mut singular = false;
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&x, &y| g[x][col].abs().total_cmp(&g[y][col].abs()))
            .unwrap();
        if g[piv][col].abs() <= 1e-12 * scale {
            singular = true;
            break;
        }
        g.swap(col, piv);
        for row in 0..m {
            if row != col {
                let f = g[row][col] / g[col][col];
                for c in col..=m {
                    g[row][c] -= f * g[col][c];
                }
            }
        }
    }
    if !singular {
        let mut center = p0.to_vec();
        for (i, ai) in a.iter().enumerate() {
            let lambda = g[i][m] / g[i][i];
            for (c, x) in center.iter_mut().zip(ai) {
                *c += lambda * x;
            }
        }
        let radius = boundary
            .iter()
            .map(|p| dist(&center, p))
            .fold(0.0, f64::max);
        return Ball { center, radius };
    }
    let mut best = (0, 0, -1.0);
    for i in 0..k {
        for j in i + 1..k {
            let d = dist2(boundary[i], boundary[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let center: Vec<f64> = boundary[best.0]
        .iter()
        .zip(boundary[best.1])
        .map(|(x, y)| 0.5 * (x + y))
        .collect();
    let radius = boundary
        .iter()
        .map(|p| dist(&center, p))
        .fold(0.0, f64::max);
    Ball { center, radius }
}

fn welzl<'a>(points: &[&'a [f64]], boundary: &mut Vec<&'a [f64]>, dim: usize) -> Ball {
    if points.is_empty() || boundary.len() == dim + 1 {
        return ball_from_boundary(boundary, dim);
    }
    let (p, rest) = points.split_last().unwrap();
    let ball = welzl(rest, boundary, dim);
    if ball.contains(p) {
        return ball;
    }
    boundary.push(p);
    let ball = welzl(rest, boundary, dim);
    boundary.pop();
    ball
}

/// Minimum enclosing ball of a small point set (Welzl's recursion).
pub fn min_enclosing_ball(points: &[&[f64]]) -> Ball {
    let dim = points.first().map_or(0, |p| p.len());
    welzl(points, &mut Vec::with_capacity(dim + 1), dim)
}

/// The full Čech nerve of a ball union.
#[derive(Debug, Clone)]
pub struct CechNerve {
    centers: Vec<Point>,
    radius: f64,
    /// Vertex count of each stored simplex (all have at least two vertices).
    sizes: Vec<u8>,
    /// Concatenated vertex lists, ascending within each simplex.
    vertices: Vec<u32>,
}

struct Builder<'a> {
    centers: &'a [Point],
    radius: f64,
    max_clique: usize,
    neighbours: Vec<Vec<u32>>,
    sizes: Vec<u8>,
    vertices: Vec<u32>,
}

impl Builder<'_> {
    fn intersects(&self, simplex: &[u32], witness: &[f64], candidate: &[f64]) -> Option<Vec<f64>> {
        let limit = self.radius * (1.0 + INTERSECT_REL_TOL);
        if dist(witness, candidate) <= limit {
            return Some(witness.to_vec());
        }
        let mut pts: Vec<&[f64]> = simplex
            .iter()
            .map(|&v| self.centers[v as usize].as_slice())
            .collect();
        pts.push(candidate);
        let ball = min_enclosing_ball(&pts);
        (ball.radius <= limit).then_some(ball.center)
    }

    fn extend(&mut self, simplex: &mut Vec<u32>, witness: &[f64], candidates: &[u32]) -> Result<()> {
        for (k, &c) in candidates.iter().enumerate() {
            let Some(w) = self.intersects(simplex, witness, &self.centers[c as usize]) else {
                continue;
            };
            if simplex.len() + 1 > self.max_clique {
                return Err(Error::Resource(format!(
                    "Čech nerve has a simplex with more than {} vertices; \
                     raise the clique bound or use the raster backend",
                    self.max_clique
                )));
            }
            simplex.push(c);
            self.sizes.push(simplex.len() as u8);
            self.vertices.extend_from_slice(simplex);

            let nbrs = &self.neighbours[c as usize];
            let next: Vec<u32> = candidates[k + 1..]
                .iter()
                .copied()
                .filter(|v| nbrs.binary_search(v).is_ok())
                .collect();
            if !next.is_empty() {
                self.extend(simplex, &w, &next)?;
            }
            simplex.pop();
        }
        Ok(())
    }
}

impl CechNerve {
    pub fn build(balls: &BallUnion, max_clique: usize) -> Result<Self> {
        let centers = balls.centers();
        let radius = balls.radius();
        if centers.len() > u32::MAX as usize {
            return Err(Error::Resource("too many balls".into()));
        }
        if max_clique > u8::MAX as usize {
            return Err(Error::InvalidArgument("clique bound must be <= 255".into()));
        }

        // Pairs within 2r, found by sweeping along the first coordinate.
        let reach = 2.0 * radius * (1.0 + INTERSECT_REL_TOL);
        let mut order: Vec<usize> = (0..centers.len()).collect();
        order.sort_by(|&a, &b| centers[a][0].total_cmp(&centers[b][0]));
        let mut neighbours = vec![Vec::new(); centers.len()];
        for (i, &a) in order.iter().enumerate() {
            for &b in &order[i + 1..] {
                if centers[b][0] - centers[a][0] > reach {
                    break;
                }
                if dist(&centers[a], &centers[b]) <= reach {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    neighbours[lo].push(hi as u32);
                }
            }
        }
        for n in &mut neighbours {
            n.sort_unstable();
        }

        let mut builder = Builder {
            centers,
            radius,
            max_clique: max_clique.max(1),
            neighbours,
            sizes: Vec::new(),
            vertices: Vec::new(),
        };
        let mut simplex = Vec::with_capacity(max_clique);
        for v in 0..centers.len() {
            let cands = std::mem::take(&mut builder.neighbours[v]);
            simplex.clear();
            simplex.push(v as u32);
            let res = builder.extend(&mut simplex, &centers[v], &cands);
            builder.neighbours[v] = cands;
            res?;
        }
        Ok(Self {
            centers: centers.to_vec(),
            radius,
            sizes: builder.sizes,
            vertices: builder.vertices,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn num_vertices(&self) -> usize {
        self.centers.len()
    }

    /// Total number of simplices, vertices included.
    pub fn len(&self) -> usize {
        self.centers.len() + self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Simplices of two or more vertices.
    pub fn higher_simplices(&self) -> impl Iterator<Item = &[u32]> + '_ {
        let mut start = 0;
        self.sizes.iter().map(move |&s| {
            let s = s as usize;
            let out = &self.vertices[start..start + s];
            start += s;
            out
        })
    }

    /// Number of simplices of each dimension.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![self.centers.len()];
        for &s in &self.sizes {
            let d = s as usize - 1;
            if counts.len() <= d {
                counts.resize(d + 1, 0);
            }
            counts[d] += 1;
        }
        counts
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.counts_by_dim()
            .iter()
            .enumerate()
            .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Curve of the filtration in which ball `i` enters at `x_i·ν + R`.
    /// Heights are clamped into `[0, 2R]`.
    pub fn ecc(&self, direction: &[f64], radius: f64) -> Result<ECCurve> {
        if direction.len() != self.centers[0].len() {
            return Err(Error::InvalidArgument(format!(
                "direction has dimension {} but the balls live in R^{}",
                direction.len(),
                self.centers[0].len()
            )));
        }
        let horizon = 2.0 * radius;
        let heights: Vec<f64> = self
            .centers
            .iter()
            .map(|c| (dot(c, direction) + radius).clamp(0.0, horizon))
            .collect();
        let mut jumps = vec![1i64; heights.len()];
        for s in self.higher_simplices() {
            let top = s
                .iter()
                .copied()
                .max_by(|&a, &b| heights[a as usize].total_cmp(&heights[b as usize]))
                .unwrap();
            jumps[top as usize] += if s.len() % 2 == 0 { -1 } else { 1 };
        }
        Ok(ECCurve::from_jumps(
            horizon,
            heights.into_iter().zip(jumps),
        ))
    }
}
