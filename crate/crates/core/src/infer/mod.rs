//! Two-sample tests on collections of SECT (and ECT) fields.
//!
//! The χ² test projects the paired SECT differences along the estimated
//! distinguishing direction onto the Karhunen–Loève basis of the pooled
//! covariance. The permutation test recalibrates the same statistic by
//! relabeling, and the randomization test permutes a within-group distance
//! loss built from ECT samples.

pub mod chi2;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::sect::{rho_rows, Field, SECTField};

/// Fields of one group, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSample<T> {
    fields: Vec<Field<T>>,
}

pub type SectGroup = GroupSample<f64>;
pub type EctGroup = GroupSample<i64>;

impl<T: Copy> GroupSample<T> {
    pub fn new(fields: Vec<Field<T>>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidArgument("a group needs at least one field".into()))?;
        for (i, f) in fields.iter().enumerate().skip(1) {
            first
                .check_same_grid(f)
                .map_err(|e| Error::GridMismatch(format!("field {} of the group: {e}", i + 1)))?;
        }
        Ok(Self { fields })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[Field<T>] {
        &self.fields
    }

    fn slices(&self) -> Vec<&[T]> {
        self.fields.iter().map(|f| f.values()).collect()
    }

    fn dims(&self) -> Dims {
        let f = &self.fields[0];
        Dims {
            gamma: f.directions(),
            delta: f.width(),
            horizon: f.levels().horizon(),
        }
    }

    fn check_against(&self, other: &Self) -> Result<()> {
        self.fields[0]
            .check_same_grid(&other.fields[0])
            .map_err(|e| Error::GridMismatch(format!("the two groups differ: {e}")))
    }
}

#[derive(Debug, Clone, Copy)]
struct Dims {
    gamma: usize,
    delta: usize,
    horizon: f64,
}

fn row(field: &[f64], p: usize, delta: usize) -> &[f64] {
    &field[p * delta..(p + 1) * delta]
}

fn mean_flat(fields: &[&[f64]]) -> Vec<f64> {
    let mut m = vec![0.0; fields[0].len()];
    for f in fields {
        for (a, b) in m.iter_mut().zip(f.iter()) {
            *a += b;
        }
    }
    let n = fields.len() as f64;
    m.iter_mut().for_each(|v| *v /= n);
    m
}

fn argmax_gap(m1: &[f64], m2: &[f64], dims: Dims) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for p in 0..dims.gamma {
        let gap = row(m1, p, dims.delta)
            .iter()
            .zip(row(m2, p, dims.delta))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // Strict comparison keeps the lowest index on ties.
        if gap > best.1 {
            best = (p, gap);
        }
    }
    best.0
}

/// `Σ_i (x_i − m)(x_i − m)ᵀ` over the rows at direction `p`.
fn scatter<'a>(groups: impl IntoIterator<Item = (&'a [&'a [f64]], &'a [f64])>, p: usize, delta: usize) -> DMatrix<f64> {
    let mut centered: Vec<f64> = Vec::new();
    let mut rows = 0;
    for (fields, mean) in groups {
        let m = row(mean, p, delta);
        for f in fields {
            centered.extend(row(f, p, delta).iter().zip(m).map(|(x, y)| x - y));
            rows += 1;
        }
    }
    let x = DMatrix::from_row_slice(rows, delta, &centered);
    x.tr_mul(&x)
}

/// Entrywise mean of a group's fields.
pub fn mean_field(group: &SectGroup) -> Result<SECTField> {
    let first = &group.fields[0];
    Field::new(first.grid().clone(), *first.levels(), mean_flat(&group.slices()))
}

/// Index (0-based) of the direction whose mean curves are furthest apart in
/// sup norm. Ties go to the lowest index.
pub fn distinguishing_direction(m1: &SECTField, m2: &SECTField) -> Result<usize> {
    m1.check_same_grid(m2)?;
    let dims = Dims {
        gamma: m1.directions(),
        delta: m1.width(),
        horizon: m1.levels().horizon(),
    };
    Ok(argmax_gap(m1.values(), m2.values(), dims))
}

/// Sample covariance (divisor n − 1) of a group's rows at direction `p`.
pub fn covariance_group(group: &SectGroup, p: usize) -> Result<DMatrix<f64>> {
    let n = group.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a covariance needs at least 2 fields, got {n}"
        )));
    }
    let dims = group.dims();
    check_direction(p, dims)?;
    let fields = group.slices();
    let mean = mean_flat(&fields);
    Ok(scatter([(&fields[..], &mean[..])], p, dims.delta) / (n - 1) as f64)
}

fn check_direction(p: usize, dims: Dims) -> Result<()> {
    if p >= dims.gamma {
        return Err(Error::InvalidArgument(format!(
            "direction index {p} out of range for {} directions",
            dims.gamma
        )));
    }
    Ok(())
}

/// Pooled covariance at direction `p`: each row is centered by its own
/// group mean and the divisor is `n₁ + n₂ − 2`.
pub fn covariance_pooled(g1: &SectGroup, g2: &SectGroup, p: usize) -> Result<DMatrix<f64>> {
    g1.check_against(g2)?;
    if g1.len() < 2 || g2.len() < 2 {
        return Err(Error::InvalidArgument(
            "the pooled covariance needs at least 2 fields per group".into(),
        ));
    }
    let dims = g1.dims();
    check_direction(p, dims)?;
    let (f1, f2) = (g1.slices(), g2.slices());
    Ok(pooled(&f1, &f2, &mean_flat(&f1), &mean_flat(&f2), p, dims.delta))
}

fn pooled(f1: &[&[f64]], f2: &[&[f64]], m1: &[f64], m2: &[f64], p: usize, delta: usize) -> DMatrix<f64> {
    let dof = (f1.len() + f2.len() - 2) as f64;
    scatter([(f1, m1), (f2, m2)], p, delta) / dof
}

/// `(‖C₁ − C₂‖_F / ‖C₁‖_F, max|C₁ − C₂| / max|C₁|)`.
pub fn norm_ratios(c1: &DMatrix<f64>, c2: &DMatrix<f64>) -> Result<(f64, f64)> {
    if c1.shape() != c2.shape() {
        return Err(Error::InvalidArgument(format!(
            "matrix shapes differ: {:?} vs {:?}",
            c1.shape(),
            c2.shape()
        )));
    }
    let max_abs = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (f1, i1) = (c1.norm(), max_abs(c1));
    if f1 == 0.0 {
        return Err(Error::InvalidArgument("the first covariance is zero".into()));
    }
    let d = c1 - c2;
    Ok((d.norm() / f1, max_abs(&d) / i1))
}

/// Discretized Karhunen–Loève eigensystem of a covariance matrix.
#[derive(Debug, Clone)]
pub struct KLSystem {
    horizon: f64,
    /// λ̂_l = (T/Δ)·Λ_l, descending.
    eigenvalues: Vec<f64>,
    /// Column l holds φ̂_l(t_q) = √(Δ/T)·v_{l,q}.
    eigenfunctions: DMatrix<f64>,
}

impl KLSystem {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &DMatrix<f64> {
        &self.eigenfunctions
    }

    /// Δ.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Eigendecomposition of a symmetric Δ×Δ covariance on `[0, T]`. Each
/// eigenvector is signed so that its first nonzero component is positive.
pub fn kl_decompose(c: &DMatrix<f64>, horizon: f64) -> Result<KLSystem> {
    let delta = c.nrows();
    if delta == 0 || c.ncols() != delta {
        return Err(Error::InvalidArgument(format!(
            "covariance must be square and non-empty, got {:?}",
            c.shape()
        )));
    }
    let scale = c.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let asym = (0..delta)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (c[(i, j)] - c[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asym > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "covariance is not symmetric (asymmetry {asym})"
        )));
    }
    let eig = SymmetricEigen::new(c.clone());
    let mut order: Vec<usize> = (0..delta).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let step = horizon / delta as f64;
    let norm = step.recip().sqrt();
    let mut phi = DMatrix::zeros(delta, delta);
    for (l, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let sign = match v.iter().find(|x| x.abs() > 1e-12) {
            Some(x) if *x < 0.0 => -1.0,
            _ => 1.0,
        };
        phi.set_column(l, &(v * (sign * norm)));
    }
    Ok(KLSystem {
        horizon,
        eigenvalues: order.iter().map(|&k| step * eig.eigenvalues[k]).collect(),
        eigenfunctions: phi,
    })
}

/// Smallest L whose leading |eigenvalues| carry strictly more than
/// `threshold` of the total.
pub fn select_l(eigenvalues: &[f64], threshold: f64) -> Result<usize> {
    if eigenvalues.is_empty() {
        return Err(Error::InvalidArgument("no eigenvalues".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "variance threshold must be in (0, 1), got {threshold}"
        )));
    }
    let total: f64 = eigenvalues.iter().map(|v| v.abs()).sum();
    if !(total > 0.0) {
        return Err(Error::NumericalRank("all eigenvalues are zero".into()));
    }
    // Relative slack so that sums equal to the threshold up to rounding
    // (0.9 + 0.05 = 0.9500000000000001) are not counted as exceeding it.
    let bar = threshold * total * (1.0 + 1e-12);
    let mut acc = 0.0;
    for (l, v) in eigenvalues.iter().enumerate() {
        acc += v.abs();
        if acc > bar {
            return Ok(l + 1);
        }
    }
    Ok(eigenvalues.len())
}

fn xi_flat(f1: &[&[f64]], f2: &[&[f64]], p: usize, kl: &KLSystem, l: usize, delta: usize) -> Result<DMatrix<f64>> {
    let n = f1.len().min(f2.len());
    let lambda = kl.eigenvalues();
    if l == 0 || l > lambda.len() {
        return Err(Error::InvalidArgument(format!(
            "L = {l} out of range 1..={}",
            lambda.len()
        )));
    }
    let tol = 1e-12 * lambda[0].abs();
    if let Some(k) = (0..l).find(|&k| !(lambda[k] > tol)) {
        return Err(Error::NumericalRank(format!(
            "eigenvalue {} of the pooled covariance is {}; lower the variance threshold",
            k + 1,
            lambda[k]
        )));
    }
    let step = kl.horizon() / delta as f64;
    let mut diff = DMatrix::zeros(delta, n);
    for i in 0..n {
        let (a, b) = (row(f1[i], p, delta), row(f2[i], p, delta));
        for q in 0..delta {
            diff[(q, i)] = a[q] - b[q];
        }
    }
    let phi = kl.eigenfunctions().columns(0, l);
    let mut xi = phi.tr_mul(&diff) * step;
    for k in 0..l {
        let s = (2.0 * lambda[k]).sqrt().recip();
        xi.row_mut(k).iter_mut().for_each(|v| *v *= s);
    }
    Ok(xi)
}

/// ξ̂ statistics (L × n) of the paired differences at direction `p`. When
/// group sizes differ, the first `min(n₁, n₂)` fields of each are paired.
pub fn xi_statistics(g1: &SectGroup, g2: &SectGroup, p: usize, kl: &KLSystem, l: usize) -> Result<DMatrix<f64>> {
    g1.check_against(g2)?;
    let dims = g1.dims();
    check_direction(p, dims)?;
    if kl.len() != dims.delta {
        return Err(Error::GridMismatch(format!(
            "eigensystem has {} levels, fields have {}",
            kl.len(),
            dims.delta
        )));
    }
    xi_flat(&g1.slices(), &g2.slices(), p, kl, l, dims.delta)
}

fn chi2_statistic(xi: &DMatrix<f64>) -> f64 {
    let n = xi.ncols() as f64;
    xi.row_iter().map(|r| r.sum().powi(2) / n).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Chi2,
    Permutation,
    Nhst,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi2" => Ok(Method::Chi2),
            "perm" | "permutation" => Ok(Method::Permutation),
            "nhst" => Ok(Method::Nhst),
            _ => Err(Error::InvalidArgument(format!(
                "unknown method {s:?}; expected chi2, perm or nhst"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
}

/// How group labels are redrawn in the permutation tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relabeling {
    /// Uniform over assignments that keep both group sizes.
    #[default]
    Balanced,
    /// Swap the labels of each pair `(K_i^(1), K_i^(2))` with probability 1/2.
    PairSwap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: Method,
    pub statistic: f64,
    /// χ² quantile, or the k*-th order statistic of the permuted statistics.
    pub threshold: f64,
    pub k_star: Option<usize>,
    pub p_value: f64,
    pub l_hat: Option<usize>,
    /// 0-based index of the estimated distinguishing direction.
    pub direction_index: Option<usize>,
    pub decision: Decision,
    pub r_f: Option<f64>,
    pub r_inf: Option<f64>,
    pub alpha: f64,
    pub seed: Option<u64>,
    pub permutations: Option<usize>,
    /// Number of paired samples.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestSettings {
    pub alpha: f64,
    /// Share of |eigenvalue| mass that L̂ must exceed.
    pub variance_threshold: f64,
    pub permutations: usize,
    pub seed: u64,
    pub relabeling: Relabeling,
}

impl Default for TestSettings {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            variance_threshold: 0.95,
            permutations: 1000,
            seed: 0,
            relabeling: Relabeling::Balanced,
        }
    }
}

impl TestSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.variance_threshold > 0.0 && self.variance_threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "variance threshold must be in (0, 1), got {}",
                self.variance_threshold
            )));
        }
        if self.permutations == 0 {
            return Err(Error::InvalidArgument("need at least one permutation".into()));
        }
        Ok(())
    }
}

/// χ² test on ξ̂: `S₀ = Σ_l (n^{-1/2} Σ_i ξ̂_{l,i})²`, rejected when above
/// the `1 − α` quantile of χ²_L.
pub fn chi2_test(xi: &DMatrix<f64>, alpha: f64) -> Result<TestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let l = xi.nrows();
    if l == 0 || xi.ncols() == 0 {
        return Err(Error::InvalidArgument("ξ̂ is empty".into()));
    }
    let s0 = chi2_statistic(xi);
    let threshold = chi2::chi2_quantile(1.0 - alpha, l);
    Ok(TestReport {
        method: Method::Chi2,
        statistic: s0,
        threshold,
        k_star: None,
        p_value: chi2::chi2_sf(s0, l),
        l_hat: Some(l),
        direction_index: None,
        decision: if s0 > threshold {
            Decision::Reject
        } else {
            Decision::Accept
        },
        r_f: None,
        r_inf: None,
        alpha,
        seed: None,
        permutations: None,
        n: xi.ncols(),
    })
}

enum LChoice {
    Select(f64),
    Fixed(usize),
}

struct Core {
    s0: f64,
    l: usize,
    p: usize,
    xi: DMatrix<f64>,
}

fn chi2_core(f1: &[&[f64]], f2: &[&[f64]], dims: Dims, l: LChoice) -> Result<Core> {
    if f1.len() < 2 || f2.len() < 2 {
        return Err(Error::InvalidArgument(
            "each group needs at least 2 fields".into(),
        ));
    }
    let (m1, m2) = (mean_flat(f1), mean_flat(f2));
    let p = argmax_gap(&m1, &m2, dims);
    let c = pooled(f1, f2, &m1, &m2, p, dims.delta);
    let kl = kl_decompose(&c, dims.horizon)?;
    let l = match l {
        LChoice::Select(th) => select_l(kl.eigenvalues(), th)?,
        LChoice::Fixed(l) => l,
    };
    let xi = xi_flat(f1, f2, p, &kl, l, dims.delta)?;
    Ok(Core {
        s0: chi2_statistic(&xi),
        l,
        p,
        xi,
    })
}

fn diagnostics(f1: &[&[f64]], f2: &[&[f64]], p: usize, delta: usize) -> (Option<f64>, Option<f64>) {
    let cov = |f: &[&[f64]]| {
        let m = mean_flat(f);
        scatter([(f, &m[..])], p, delta) / (f.len() - 1) as f64
    };
    match norm_ratios(&cov(f1), &cov(f2)) {
        Ok((rf, ri)) => (Some(rf), Some(ri)),
        Err(_) => (None, None),
    }
}

/// Index of the distinguishing direction of the two mean fields and the
/// (R_F, R_∞) ratios of the per-group covariances along it. The ratios are
/// `None` when the second covariance vanishes.
pub fn covariance_diagnostics(g1: &SectGroup, g2: &SectGroup) -> Result<(usize, Option<f64>, Option<f64>)> {
    g1.check_against(g2)?;
    let dims = g1.dims();
    let (f1, f2) = (g1.slices(), g2.slices());
    let p = argmax_gap(&mean_flat(&f1), &mean_flat(&f2), dims);
    let (r_f, r_inf) = diagnostics(&f1, &f2, p, dims.delta);
    Ok((p, r_f, r_inf))
}

/// The asymptotic χ² test.
pub fn chi2_two_sample(g1: &SectGroup, g2: &SectGroup, settings: &TestSettings) -> Result<TestReport> {
    settings.validate()?;
    g1.check_against(g2)?;
    let dims = g1.dims();
    let (f1, f2) = (g1.slices(), g2.slices());
    let core = chi2_core(&f1, &f2, dims, LChoice::Select(settings.variance_threshold))?;
    let mut report = chi2_test(&core.xi, settings.alpha)?;
    let (r_f, r_inf) = diagnostics(&f1, &f2, core.p, dims.delta);
    report.direction_index = Some(core.p);
    report.r_f = r_f;
    report.r_inf = r_inf;
    Ok(report)
}

/// Largest integer strictly below `x`; values within rounding of an
/// integer count as that integer.
fn largest_integer_below(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as i64 - 1
    } else {
        x.floor() as i64
    }
}

/// k* of the permutation test: the largest integer strictly below (1 − α)Π.
pub fn permutation_k_star(alpha: f64, permutations: usize) -> Result<usize> {
    let k = largest_integer_below((1.0 - alpha) * permutations as f64);
    if k < 1 {
        return Err(Error::InvalidArgument(format!(
            "{permutations} permutations are too few for alpha = {alpha}"
        )));
    }
    Ok((k as usize).min(permutations))
}

/// k* of the randomization test: the largest integer strictly below αΠ,
/// raised to 1 (with a warning) when αΠ ≤ 1.
pub fn nhst_k_star(alpha: f64, permutations: usize) -> usize {
    let k = largest_integer_below(alpha * permutations as f64);
    if k < 1 {
        log::warn!(
            "alpha * permutations = {} leaves no order statistic below it; using k* = 1",
            alpha * permutations as f64
        );
        return 1;
    }
    (k as usize).min(permutations)
}

/// Index sets of the two groups after one relabeling of `n1 + n2` fields.
fn relabel<R: Rng>(n1: usize, n2: usize, scheme: Relabeling, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    match scheme {
        Relabeling::Balanced => {
            let mut idx: Vec<usize> = (0..n1 + n2).collect();
            idx.shuffle(rng);
            let b = idx.split_off(n1);
            (idx, b)
        }
        Relabeling::PairSwap => {
            let mut a: Vec<usize> = (0..n1).collect();
            let mut b: Vec<usize> = (n1..n1 + n2).collect();
            for i in 0..n1.min(n2) {
                if rng.gen::<bool>() {
                    std::mem::swap(&mut a[i], &mut b[i]);
                }
            }
            (a, b)
        }
    }
}

/// Runs `stat` on `permutations` relabelings in parallel. Relabeling k uses
/// the stream keyed by `(seed, k)`, so results do not depend on scheduling.
fn permuted<F>(n1: usize, n2: usize, settings: &TestSettings, stat: F) -> Result<Vec<f64>>
where
    F: Fn(&[usize], &[usize]) -> Result<f64> + Sync,
{
    (0..settings.permutations)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(settings.seed, &[k as u64]);
            let (a, b) = relabel(n1, n2, settings.relabeling, &mut rng);
            stat(&a, &b)
        })
        .collect()
}

/// The χ² statistic calibrated by permutation, with L̂ fixed
/// at its value on the observed labels.
pub fn permutation_test(g1: &SectGroup, g2: &SectGroup, settings: &TestSettings) -> Result<TestReport> {
    settings.validate()?;
    g1.check_against(g2)?;
    let k_star = permutation_k_star(settings.alpha, settings.permutations)?;
    let dims = g1.dims();
    let (f1, f2) = (g1.slices(), g2.slices());
    let core = chi2_core(&f1, &f2, dims, LChoice::Select(settings.variance_threshold))?;
    let all: Vec<&[f64]> = f1.iter().chain(&f2).copied().collect();
    let mut stats = permuted(f1.len(), f2.len(), settings, |a, b| {
        let pa: Vec<&[f64]> = a.iter().map(|&i| all[i]).collect();
        let pb: Vec<&[f64]> = b.iter().map(|&i| all[i]).collect();
        Ok(chi2_core(&pa, &pb, dims, LChoice::Fixed(core.l))?.s0)
    })?;
    let exceed = stats.iter().filter(|&&s| s >= core.s0).count();
    stats.sort_by(f64::total_cmp);
    let threshold = stats[k_star - 1];
    let (r_f, r_inf) = diagnostics(&f1, &f2, core.p, dims.delta);
    Ok(TestReport {
        method: Method::Permutation,
        statistic: core.s0,
        threshold,
        k_star: Some(k_star),
        p_value: (1 + exceed) as f64 / (settings.permutations + 1) as f64,
        l_hat: Some(core.l),
        direction_index: Some(core.p),
        decision: if core.s0 > threshold {
            Decision::Reject
        } else {
            Decision::Accept
        },
        r_f,
        r_inf,
        alpha: settings.alpha,
        seed: Some(settings.seed),
        permutations: Some(settings.permutations),
        n: f1.len().min(f2.len()),
    })
}

/// Within-group loss: for each group, the sum of ρ over ordered pairs of
/// its members divided by `2m(m − 1)`, summed over the two groups. With
/// equal sizes n this is `(2n(n−1))⁻¹ Σ_{k,l} {ρ(K_k¹, K_l¹) + ρ(K_k², K_l²)}`.
pub fn within_group_loss(dist: &DMatrix<f64>, a: &[usize], b: &[usize]) -> f64 {
    let part = |idx: &[usize]| {
        let m = idx.len() as f64;
        let mut s = 0.0;
        for (x, &i) in idx.iter().enumerate() {
            for &j in &idx[x + 1..] {
                s += dist[(i, j)];
            }
        }
        // Each unordered pair stands for two ordered ones.
        2.0 * s / (2.0 * m * (m - 1.0))
    };
    part(a) + part(b)
}

/// Pairwise ρ between all fields of both groups (group 1 first).
pub fn distance_matrix(e1: &EctGroup, e2: &EctGroup) -> Result<DMatrix<f64>> {
    e1.check_against(e2)?;
    let all: Vec<&[i64]> = e1.slices().into_iter().chain(e2.slices()).collect();
    let width = e1.dims().delta;
    let n = all.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { rho_rows(all[i], all[j], width) }).collect())
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Randomization test on the within-group ρ loss. Small
/// observed losses are evidence against the null.
pub fn randomization_nhst(e1: &EctGroup, e2: &EctGroup, settings: &TestSettings) -> Result<TestReport> {
    settings.validate()?;
    let dist = distance_matrix(e1, e2)?;
    randomization_nhst_from_distances(&dist, e1.len(), settings)
}

/// Same as [`randomization_nhst`] but on a precomputed distance matrix of
/// `n1 + n2` fields.
pub fn randomization_nhst_from_distances(
    dist: &DMatrix<f64>,
    n1: usize,
    settings: &TestSettings,
) -> Result<TestReport> {
    settings.validate()?;
    let n = dist.nrows();
    if dist.ncols() != n || n1 < 2 || n < n1 + 2 {
        return Err(Error::InvalidArgument(
            "distance matrix must be square with at least 2 fields per group".into(),
        ));
    }
    let n2 = n - n1;
    let k_star = nhst_k_star(settings.alpha, settings.permutations);
    let a: Vec<usize> = (0..n1).collect();
    let b: Vec<usize> = (n1..n).collect();
    let s0 = within_group_loss(dist, &a, &b);
    let mut stats = permuted(n1, n2, settings, |a, b| Ok(within_group_loss(dist, a, b)))?;
    let below = stats.iter().filter(|&&s| s <= s0).count();
    stats.sort_by(f64::total_cmp);
    let threshold = stats[k_star - 1];
    Ok(TestReport {
        method: Method::Nhst,
        statistic: s0,
        threshold,
        k_star: Some(k_star),
        p_value: (1 + below) as f64 / (settings.permutations + 1) as f64,
        l_hat: None,
        direction_index: None,
        decision: if s0 < threshold {
            Decision::Reject
        } else {
            Decision::Accept
        },
        r_f: None,
        r_inf: None,
        alpha: settings.alpha,
        seed: Some(settings.seed),
        permutations: Some(settings.permutations),
        n: n1.min(n2),
    })
}
