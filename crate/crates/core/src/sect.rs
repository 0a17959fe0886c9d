//! Smooth Euler characteristic transform samples, the discrete shape
//! distance and the H-norm of SECT differences.
//!
//! `SECT(ν; t) = F(t) − (t/T)·F(T)` with `F(t) = ∫_0^t χ_τ^ν dτ`. The
//! antiderivative of a step function is piecewise linear, so every sample
//! is computed exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecc::{
    ecc_mesh, ecc_raster, Backend, CechNerve, DirectionGrid, DiskUnion, ECCurve,
};
use crate::error::{Error, Result};
use crate::shapes::{Geometry, ShapeSpec};

/// Relative tolerance when comparing horizons that were computed
/// independently (for example `2R` against a value read from a manifest).
const HORIZON_RTOL: f64 = 1e-12;

/// Levels `t_q = q·T/Δ` for `q = 1..Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelGrid {
    horizon: f64,
    count: usize,
}

impl LevelGrid {
    pub fn new(horizon: f64, count: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 levels, got {count}"
            )));
        }
        Ok(Self { horizon, count })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Δ.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Spacing `T/Δ`.
    pub fn step(&self) -> f64 {
        self.horizon / self.count as f64
    }

    /// `t_q` for `q` in `1..=Δ`; the last level is exactly T.
    pub fn level(&self, q: usize) -> f64 {
        if q == self.count {
            self.horizon
        } else {
            self.horizon * q as f64 / self.count as f64
        }
    }

    pub fn levels(&self) -> Vec<f64> {
        (1..=self.count).map(|q| self.level(q)).collect()
    }

    fn check(&self, curve: &ECCurve) -> Result<()> {
        same_horizon(self.horizon, curve.horizon())
    }
}

pub(crate) fn same_horizon(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() <= HORIZON_RTOL * a.abs().max(b.abs()) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("horizons differ: {a} vs {b}")))
    }
}

/// A Γ×Δ array of samples, one row per direction and one column per level,
/// stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field<T> {
    grid: DirectionGrid,
    levels: LevelGrid,
    values: Vec<T>,
}

/// SECT samples.
pub type SECTField = Field<f64>;
/// ECC samples χ at each level.
pub type ECTField = Field<i64>;

impl<T: Copy> Field<T> {
    pub fn new(grid: DirectionGrid, levels: LevelGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() * levels.count() {
            return Err(Error::Validation(format!(
                "field has {} values, expected {}x{}",
                values.len(),
                grid.len(),
                levels.count()
            )));
        }
        Ok(Self {
            grid,
            levels,
            values,
        })
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    pub fn levels(&self) -> &LevelGrid {
        &self.levels
    }

    /// Γ.
    pub fn directions(&self) -> usize {
        self.grid.len()
    }

    /// Δ.
    pub fn width(&self) -> usize {
        self.levels.count()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, p: usize) -> &[T] {
        let w = self.width();
        &self.values[p * w..(p + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.values.chunks(self.width())
    }

    pub fn get(&self, p: usize, q: usize) -> T {
        self.values[p * self.width() + q]
    }

    /// Errors unless both fields sit on the same directions and levels.
    pub fn check_same_grid<U>(&self, other: &Field<U>) -> Result<()> {
        same_grid(&self.grid, &self.levels, &other.grid, &other.levels)
    }
}

pub(crate) fn same_grid(
    g1: &DirectionGrid,
    l1: &LevelGrid,
    g2: &DirectionGrid,
    l2: &LevelGrid,
) -> Result<()> {
    if l1.count() != l2.count() {
        return Err(Error::GridMismatch(format!(
            "level counts differ: {} vs {}",
            l1.count(),
            l2.count()
        )));
    }
    same_horizon(l1.horizon(), l2.horizon())?;
    if g1.dim() != g2.dim() || g1.len() != g2.len() {
        return Err(Error::GridMismatch(format!(
            "direction grids differ: {} directions in R^{} vs {} in R^{}",
            g1.len(),
            g1.dim(),
            g2.len(),
            g2.dim()
        )));
    }
    for (p, (a, b)) in g1.directions().iter().zip(g2.directions()).enumerate() {
        if a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12) {
            return Err(Error::GridMismatch(format!("direction {} differs", p + 1)));
        }
    }
    Ok(())
}

/// SECT of one curve at every level.
pub fn sect_from_ecc(curve: &ECCurve, levels: &LevelGrid) -> Result<Vec<f64>> {
    levels.check(curve)?;
    let horizon = levels.horizon();
    let total = curve.integral_to(horizon);
    // Walk the pieces and the levels together; F is exact on each piece.
    let mut out = Vec::with_capacity(levels.count());
    let mut pieces = curve.segments().peekable();
    let mut done = 0.0;
    for q in 1..=levels.count() {
        let t = levels.level(q);
        let mut f = done;
        while let Some(&(a, b, v)) = pieces.peek() {
            if b <= t {
                done += v as f64 * (b - a);
                f = done;
                pieces.next();
            } else {
                if a < t {
                    f = done + v as f64 * (t - a);
                }
                break;
            }
        }
        out.push(f - t / horizon * total);
    }
    Ok(out)
}

/// SECT from an `n`-interval midpoint rule instead of exact integration.
pub fn sect_riemann(curve: &ECCurve, levels: &LevelGrid, n: usize) -> Result<Vec<f64>> {
    levels.check(curve)?;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one subinterval".into()));
    }
    let horizon = levels.horizon();
    let h = horizon / n as f64;
    let riemann = |t: f64| -> f64 {
        let full = ((t / h).floor() as usize).min(n);
        let mut acc: f64 = (0..full)
            .map(|k| curve.value_at((k as f64 + 0.5) * h) as f64)
            .sum::<f64>()
            * h;
        let rest = t - full as f64 * h;
        if rest > 0.0 {
            acc += rest * curve.value_at(full as f64 * h + 0.5 * rest) as f64;
        }
        acc
    };
    let total = riemann(horizon);
    Ok(levels
        .levels()
        .into_iter()
        .map(|t| riemann(t) - t / horizon * total)
        .collect())
}

/// χ at every level (right-continuous).
pub fn ect_samples(curve: &ECCurve, levels: &LevelGrid) -> Result<Vec<i64>> {
    levels.check(curve)?;
    Ok(levels.levels().into_iter().map(|t| curve.value_at(t)).collect())
}

/// The backend that suits a shape: exact lower-star for meshes, the disk
/// backend for planar ball unions and the Čech nerve otherwise.
pub fn default_backend(shape: &ShapeSpec) -> Backend {
    match shape.geometry() {
        Geometry::Mesh(_) => Backend::Mesh,
        Geometry::Balls(b) if b.dim() == 2 => Backend::Disks,
        Geometry::Balls(_) => Backend::cech(),
    }
}

/// The curve of `shape` in every direction of `grid`. Ball-union
/// structures are built once and shared across directions.
pub fn shape_curves(
    shape: &ShapeSpec,
    grid: &DirectionGrid,
    backend: Backend,
) -> Result<Vec<ECCurve>> {
    if grid.dim() != shape.dim() {
        return Err(Error::GridMismatch(format!(
            "directions live in R^{} but the shape in R^{}",
            grid.dim(),
            shape.dim()
        )));
    }
    let radius = shape.bounding_radius();
    let dirs = grid.directions();
    match (shape.geometry(), backend) {
        (Geometry::Mesh(m), Backend::Mesh) => {
            dirs.par_iter().map(|d| ecc_mesh(m, d, radius)).collect()
        }
        (Geometry::Balls(b), Backend::Disks) => {
            let u = DiskUnion::build(b)?;
            dirs.par_iter().map(|d| u.ecc(d, radius)).collect()
        }
        (Geometry::Balls(b), Backend::Cech { max_clique }) => {
            let nerve = CechNerve::build(b, max_clique)?;
            dirs.par_iter().map(|d| nerve.ecc(d, radius)).collect()
        }
        (Geometry::Balls(b), Backend::Raster { delta }) => dirs
            .par_iter()
            .map(|d| ecc_raster(b, d, radius, delta))
            .collect(),
        (Geometry::Mesh(_), _) => Err(Error::InvalidArgument(
            "meshes are computed with the mesh backend".into(),
        )),
        (Geometry::Balls(_), Backend::Mesh) => Err(Error::InvalidArgument(
            "the mesh backend does not apply to ball unions".into(),
        )),
    }
}

/// SECT and ECT fields of a list of curves, one per direction of `grid`.
pub fn fields_from_curves(
    curves: &[ECCurve],
    grid: &DirectionGrid,
    levels: &LevelGrid,
) -> Result<(SECTField, ECTField)> {
    if curves.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} curves for {} directions",
            curves.len(),
            grid.len()
        )));
    }
    let mut sect = Vec::with_capacity(grid.len() * levels.count());
    let mut ect = Vec::with_capacity(grid.len() * levels.count());
    for c in curves {
        sect.extend(sect_from_ecc(c, levels)?);
        ect.extend(ect_samples(c, levels)?);
    }
    Ok((
        Field::new(grid.clone(), *levels, sect)?,
        Field::new(grid.clone(), *levels, ect)?,
    ))
}

/// SECT and ECT fields of a shape.
pub fn sect_field(
    shape: &ShapeSpec,
    grid: &DirectionGrid,
    levels: &LevelGrid,
    backend: Backend,
) -> Result<(SECTField, ECTField)> {
    same_horizon(shape.horizon(), levels.horizon())?;
    let curves = shape_curves(shape, grid, backend)?;
    fields_from_curves(&curves, grid, levels)
}

/// `max_p (Σ_q (a_pq − b_pq)²)^{1/2}`, unscaled.
pub fn rho_discrete(a: &ECTField, b: &ECTField) -> Result<f64> {
    a.check_same_grid(b)?;
    Ok(rho_rows(a.values(), b.values(), a.width()))
}

pub(crate) fn rho_rows(a: &[i64], b: &[i64], width: usize) -> f64 {
    a.chunks(width)
        .zip(b.chunks(width))
        .map(|(x, y)| {
            x.iter()
                .zip(y)
                .map(|(u, v)| {
                    let d = (u - v) as f64;
                    d * d
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
        .sqrt()
}

/// `‖SECT₁ − SECT₂‖_H`: the L² norm on `[0, T]` of `(χ₁ − χ̄₁) − (χ₂ − χ̄₂)`,
/// where χ̄ is the mean of χ over `[0, T]`.
pub fn h_norm_diff(c1: &ECCurve, c2: &ECCurve) -> Result<f64> {
    same_horizon(c1.horizon(), c2.horizon())?;
    let horizon = c1.horizon();
    let diff = ECCurve::from_jumps(
        horizon,
        c1.jumps().chain(c2.jumps().map(|(t, j)| (t, -j))),
    );
    let mean = diff.integral_to(horizon) / horizon;
    let sq: f64 = diff
        .segments()
        .map(|(a, b, v)| {
            let g = v as f64 - mean;
            g * g * (b - a)
        })
        .sum();
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn levels(t: f64, n: usize) -> LevelGrid {
        LevelGrid::new(t, n).unwrap()
    }

    #[test]
    fn level_grid() {
        let g = levels(3.0, 50);
        assert_eq!(g.level(50), 3.0);
        assert!((g.level(1) - 0.06).abs() < 1e-15);
        assert!(LevelGrid::new(3.0, 1).is_err());
        assert!(LevelGrid::new(0.0, 5).is_err());
    }

    #[test]
    fn constant_curve_has_zero_sect() {
        let c = ECCurve::constant(2.0, 1);
        let s = sect_from_ecc(&c, &levels(2.0, 7)).unwrap();
        assert!(s.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn single_jump_closed_form() {
        let (t_max, s) = (2.0, 0.6);
        let c = ECCurve::from_jumps(t_max, [(s, 1)]);
        let g = levels(t_max, 10);
        let got = sect_from_ecc(&c, &g).unwrap();
        for (q, v) in got.iter().enumerate() {
            let t = g.level(q + 1);
            let want = (t - s).max(0.0) - t * (t_max - s) / t_max;
            assert!((v - want).abs() < 1e-14, "q={q}: {v} vs {want}");
        }
    }

    #[test]
    fn ect_is_right_continuous() {
        let g = levels(1.0, 10);
        let c = ECCurve::from_jumps(1.0, [(g.level(3), 1)]);
        let e = ect_samples(&c, &g).unwrap();
        assert_eq!(e[1], 0);
        assert_eq!(e[2], 1);
        assert_eq!(ect_samples(&ECCurve::zero(1.0), &g).unwrap(), vec![0; 10]);
    }

    #[test]
    fn horizon_mismatch() {
        let c = ECCurve::zero(2.0);
        assert!(matches!(
            sect_from_ecc(&c, &levels(3.0, 4)),
            Err(Error::GridMismatch(_))
        ));
        assert!(ect_samples(&c, &levels(3.0, 4)).is_err());
    }

    #[test]
    fn riemann_mode_converges() {
        let c = ECCurve::from_jumps(3.0, [(0.31, 1), (1.7, 2), (2.2, -2)]);
        let g = levels(3.0, 25);
        let exact = sect_from_ecc(&c, &g).unwrap();
        let approx = sect_riemann(&c, &g, 100_000).unwrap();
        for (a, b) in exact.iter().zip(&approx) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn rho_examples() {
        let grid = DirectionGrid::uniform_circle(1).unwrap();
        let a = ECTField::new(grid.clone(), levels(1.0, 2), vec![0, 0]).unwrap();
        let b = ECTField::new(grid.clone(), levels(1.0, 2), vec![3, 4]).unwrap();
        let c = ECTField::new(grid, levels(1.0, 2), vec![0, 2]).unwrap();
        assert_eq!(rho_discrete(&a, &a).unwrap(), 0.0);
        assert_eq!(rho_discrete(&a, &b).unwrap(), 5.0);
        assert_eq!(rho_discrete(&a, &c).unwrap(), 2.0);
        let other = ECTField::new(DirectionGrid::uniform_circle(2).unwrap(), levels(1.0, 2), vec![0; 4])
            .unwrap();
        assert!(rho_discrete(&a, &other).is_err());
    }

    #[test]
    fn h_norm_examples() {
        let one = ECCurve::constant(2.0, 1);
        let zero = ECCurve::zero(2.0);
        assert_eq!(h_norm_diff(&one, &one).unwrap(), 0.0);
        assert!(h_norm_diff(&one, &zero).unwrap().abs() < 1e-15);
        let step = ECCurve::from_jumps(2.0, [(1.0, 1)]);
        assert!((h_norm_diff(&step, &zero).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn field_shape_checks() {
        let grid = DirectionGrid::uniform_circle(2).unwrap();
        assert!(SECTField::new(grid.clone(), levels(1.0, 3), vec![0.0; 5]).is_err());
        let f = SECTField::new(grid, levels(1.0, 3), (0..6).map(f64::from).collect()).unwrap();
        assert_eq!(f.row(1), &[3.0, 4.0, 5.0]);
        assert_eq!(f.get(0, 2), 2.0);
        assert_eq!(f.rows().count(), 2);
    }
}
