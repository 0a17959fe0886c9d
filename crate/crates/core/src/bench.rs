//! Simulation studies: rejection rates of the three tests over the two-arc
//! family, and runtime of the χ² and permutation tests over a grid of
//! (Γ, Δ, n).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecc::{DirectionGrid, ECCurve};
use crate::error::{Error, Result};
use crate::infer::{
    chi2_two_sample, covariance_diagnostics, distance_matrix, permutation_test,
    randomization_nhst_from_distances, Decision, EctGroup, SectGroup, TestSettings,
};
use crate::rng::stream;
use crate::sect::{fields_from_curves, shape_curves, ECTField, LevelGrid, SECTField};
use crate::shapes::{sample_random_shape, FamilyParams, FAMILY_BOUNDING_RADIUS};

const SHAPE_KEY: u64 = 1;
const TEST_KEY: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub epsilon_list: Vec<f64>,
    /// Shapes per group.
    pub n: usize,
    pub replicates: usize,
    pub gamma: usize,
    pub delta: usize,
    pub alpha: f64,
    pub permutations: usize,
    pub seed: u64,
    /// Subset of {1, 2, 3}.
    pub algorithms: Vec<u8>,
    pub noise_sd: f64,
    pub curve_points: usize,
    pub variance_threshold: f64,
}

impl Default for StudyConfig {
    /// Desk scale: 50 replicates, ε ∈ {0, 0.025, 0.05, 0.1}, Π = 500.
    fn default() -> Self {
        Self {
            epsilon_list: vec![0.0, 0.025, 0.05, 0.1],
            n: 100,
            replicates: 50,
            gamma: 4,
            delta: 50,
            alpha: 0.05,
            permutations: 500,
            seed: 20240601,
            algorithms: vec![1, 2, 3],
            noise_sd: 0.05,
            curve_points: 100,
            variance_threshold: 0.95,
        }
    }
}

impl StudyConfig {
    /// The full grid: seven values of ε, 100 replicates and Π = 1000.
    pub fn full_scale() -> Self {
        Self {
            epsilon_list: vec![0.0, 0.0125, 0.025, 0.0375, 0.05, 0.075, 0.1],
            replicates: 100,
            permutations: 1000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.epsilon_list.is_empty() {
            return bad("epsilon_list is empty".into());
        }
        for &e in &self.epsilon_list {
            self.family(e).validate()?;
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.replicates == 0 || self.gamma == 0 || self.permutations == 0 {
            return bad("replicates, gamma and permutations must be positive".into());
        }
        if self.delta < 2 {
            return bad(format!("delta must be at least 2, got {}", self.delta));
        }
        if self.algorithms.is_empty() || self.algorithms.iter().any(|a| !(1..=3).contains(a)) {
            return bad(format!("algorithms must be a non-empty subset of 1, 2, 3: {:?}", self.algorithms));
        }
        self.settings(0).validate()
    }

    fn family(&self, epsilon: f64) -> FamilyParams {
        FamilyParams {
            epsilon,
            noise_sd: self.noise_sd,
            curve_points: self.curve_points,
            ..FamilyParams::default()
        }
    }

    fn settings(&self, seed: u64) -> TestSettings {
        TestSettings {
            alpha: self.alpha,
            variance_threshold: self.variance_threshold,
            permutations: self.permutations,
            seed,
            ..TestSettings::default()
        }
    }
}

/// One algorithm on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub epsilon: f64,
    pub replicate: usize,
    pub algorithm: u8,
    pub decision: Decision,
    pub statistic: f64,
    pub p_value: f64,
    pub r_f: Option<f64>,
    pub r_inf: Option<f64>,
    pub runtime_s: f64,
}

/// One algorithm at one ε, aggregated over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub epsilon: f64,
    pub algorithm: u8,
    pub rejections: usize,
    pub replicates: usize,
    pub rejection_rate: f64,
    pub mean_r_f: Option<f64>,
    pub mean_r_inf: Option<f64>,
    pub mean_runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub summaries: Vec<RateSummary>,
    pub records: Vec<ReplicateRecord>,
}

impl StudyResult {
    pub fn summary(&self, epsilon: f64, algorithm: u8) -> Option<&RateSummary> {
        self.summaries
            .iter()
            .find(|s| s.epsilon == epsilon && s.algorithm == algorithm)
    }
}

/// Fields of `count` family shapes drawn from the streams
/// `(seed, SHAPE_KEY, key..., i)`.
fn family_fields(
    params: &FamilyParams,
    seed: u64,
    key: &[u64],
    count: usize,
    grids: &[DirectionGrid],
) -> Result<Vec<Vec<Vec<ECCurve>>>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut k = vec![SHAPE_KEY];
            k.extend_from_slice(key);
            k.push(i as u64);
            let shape = sample_random_shape(params, &mut stream(seed, &k))?;
            let backend = crate::sect::default_backend(&shape);
            grids
                .iter()
                .map(|g| shape_curves(&shape, g, backend))
                .collect()
        })
        .collect()
}

fn groups_from_curves(
    curves: &[Vec<ECCurve>],
    grid: &DirectionGrid,
    levels: &LevelGrid,
) -> Result<(SectGroup, EctGroup)> {
    let (sect, ect): (Vec<SECTField>, Vec<ECTField>) = curves
        .iter()
        .map(|c| fields_from_curves(c, grid, levels))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok((SectGroup::new(sect)?, EctGroup::new(ect)?))
}

fn one_replicate(cfg: &StudyConfig, e: usize, r: usize) -> Result<Vec<ReplicateRecord>> {
    let epsilon = cfg.epsilon_list[e];
    let grid = DirectionGrid::half_circle(cfg.gamma)?;
    let levels = LevelGrid::new(2.0 * FAMILY_BOUNDING_RADIUS, cfg.delta)?;
    let grids = [grid.clone()];
    let key = |g: u64| [e as u64, r as u64, g];
    let c1 = family_fields(&cfg.family(0.0), cfg.seed, &key(0), cfg.n, &grids)?;
    let c2 = family_fields(&cfg.family(epsilon), cfg.seed, &key(1), cfg.n, &grids)?;
    let first = |c: Vec<Vec<Vec<ECCurve>>>| c.into_iter().map(|mut v| v.remove(0)).collect::<Vec<_>>();
    let (s1, e1) = groups_from_curves(&first(c1), &grid, &levels)?;
    let (s2, e2) = groups_from_curves(&first(c2), &grid, &levels)?;

    let test_seed = stream(cfg.seed, &[TEST_KEY, e as u64, r as u64]).next_u64();
    let settings = cfg.settings(test_seed);
    let (_, r_f, r_inf) = covariance_diagnostics(&s1, &s2)?;
    let mut out = Vec::new();
    for &alg in &cfg.algorithms {
        let start = Instant::now();
        let report = match alg {
            1 => chi2_two_sample(&s1, &s2, &settings)?,
            2 => permutation_test(&s1, &s2, &settings)?,
            _ => {
                let dist = distance_matrix(&e1, &e2)?;
                randomization_nhst_from_distances(&dist, e1.len(), &settings)?
            }
        };
        out.push(ReplicateRecord {
            epsilon,
            replicate: r,
            algorithm: alg,
            decision: report.decision,
            statistic: report.statistic,
            p_value: report.p_value,
            r_f,
            r_inf,
            runtime_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Rejection rates of the selected algorithms at every ε. Replicates run in
/// parallel; every draw comes from a stream keyed by (seed, ε index,
/// replicate, ...), so results do not depend on the thread count.
pub fn run_rejection_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.epsilon_list.len())
        .flat_map(|e| (0..cfg.replicates).map(move |r| (e, r)))
        .collect();
    let records: Vec<ReplicateRecord> = jobs
        .par_iter()
        .map(|&(e, r)| {
            let recs = one_replicate(cfg, e, r)?;
            log::info!("epsilon {} replicate {} done", cfg.epsilon_list[e], r + 1);
            Ok(recs)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut summaries = Vec::new();
    for &epsilon in &cfg.epsilon_list {
        for &alg in &cfg.algorithms {
            let rs: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|x| x.epsilon == epsilon && x.algorithm == alg)
                .collect();
            let rejections = rs.iter().filter(|x| x.decision == Decision::Reject).count();
            summaries.push(RateSummary {
                epsilon,
                algorithm: alg,
                rejections,
                replicates: rs.len(),
                rejection_rate: rejections as f64 / rs.len() as f64,
                mean_r_f: mean(rs.iter().filter_map(|x| x.r_f)),
                mean_r_inf: mean(rs.iter().filter_map(|x| x.r_inf)),
                mean_runtime_s: mean(rs.iter().map(|x| x.runtime_s)).unwrap_or(0.0),
            });
        }
    }
    Ok(StudyResult {
        config: cfg.clone(),
        summaries,
        records,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::file(path, e))
}

/// Writes `rejection.csv`, `replicates.csv`, `rejection_vs_epsilon.csv`
/// and `summary.json` into `dir`.
pub fn write_rejection_outputs(result: &StudyResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let mut rates = String::from(
        "epsilon,algorithm,rejection_rate,rejections,replicates,mean_r_f,mean_r_inf,mean_runtime_s\n",
    );
    for s in &result.summaries {
        let _ = writeln!(
            rates,
            "{},{},{},{},{},{},{},{}",
            s.epsilon,
            s.algorithm,
            s.rejection_rate,
            s.rejections,
            s.replicates,
            opt(s.mean_r_f),
            opt(s.mean_r_inf),
            s.mean_runtime_s
        );
    }
    write_text(&dir.join("rejection.csv"), &rates)?;

    let mut reps = String::from("epsilon,replicate,algorithm,decision,statistic,p_value,r_f,r_inf,runtime_s\n");
    for x in &result.records {
        let _ = writeln!(
            reps,
            "{},{},{},{:?},{},{},{},{},{}",
            x.epsilon,
            x.replicate,
            x.algorithm,
            x.decision,
            x.statistic,
            x.p_value,
            opt(x.r_f),
            opt(x.r_inf),
            x.runtime_s
        );
    }
    write_text(&dir.join("replicates.csv"), &reps)?;

    let algs = &result.config.algorithms;
    let mut plot = String::from("epsilon");
    for a in algs {
        let _ = write!(plot, ",algorithm_{a}");
    }
    plot.push('\n');
    for &e in &result.config.epsilon_list {
        plot.push_str(&e.to_string());
        for &a in algs {
            let rate = result.summary(e, a).map(|s| s.rejection_rate).unwrap_or(f64::NAN);
            let _ = write!(plot, ",{rate}");
        }
        plot.push('\n');
    }
    write_text(&dir.join("rejection_vs_epsilon.csv"), &plot)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        config: &'a StudyConfig,
        summaries: &'a [RateSummary],
    }
    let json = serde_json::to_string_pretty(&Summary {
        config: &result.config,
        summaries: &result.summaries,
    })?;
    write_text(&dir.join("summary.json"), &(json + "\n"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuntimeConfig {
    pub gammas: Vec<usize>,
    pub deltas: Vec<usize>,
    pub ns: Vec<usize>,
    pub replicates: usize,
    /// Subset of {1, 2}.
    pub algorithms: Vec<u8>,
    pub permutations: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Each timed run is repeated in five batches that together take at
    /// least this long; the per-call mean of the fastest batch is recorded.
    pub min_timing_s: f64,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            gammas: vec![2, 4, 8],
            deltas: vec![25, 50, 100],
            ns: vec![25, 50, 100],
            replicates: 20,
            algorithms: vec![1, 2],
            permutations: 100,
            epsilon: 0.05,
            alpha: 0.05,
            seed: 20240601,
            min_timing_s: 0.005,
        }
    }
}

impl RuntimeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.gammas.is_empty() || self.deltas.is_empty() || self.ns.is_empty() {
            return bad("gammas, deltas and ns must be non-empty");
        }
        if self.gammas.contains(&0) || self.deltas.iter().any(|&d| d < 2) || self.ns.iter().any(|&n| n < 2) {
            return bad("need gamma >= 1, delta >= 2 and n >= 2");
        }
        if self.replicates == 0 || self.permutations == 0 {
            return bad("replicates and permutations must be positive");
        }
        if self.algorithms.is_empty() || self.algorithms.iter().any(|a| !(1..=2).contains(a)) {
            return bad("algorithms must be a non-empty subset of 1, 2");
        }
        if !(self.min_timing_s >= 0.0) {
            return bad("min_timing_s must be non-negative");
        }
        FamilyParams {
            epsilon: self.epsilon,
            ..FamilyParams::default()
        }
        .validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeCell {
    pub algorithm: u8,
    pub gamma: usize,
    pub delta: usize,
    pub n: usize,
    pub mean_s: f64,
    pub sd_s: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeResult {
    pub config: RuntimeConfig,
    pub cells: Vec<RuntimeCell>,
}

impl RuntimeResult {
    pub fn cell(&self, algorithm: u8, gamma: usize, delta: usize, n: usize) -> Option<&RuntimeCell> {
        self.cells
            .iter()
            .find(|c| c.algorithm == algorithm && c.gamma == gamma && c.delta == delta && c.n == n)
    }
}

const TIMING_BATCHES: u32 = 5;

/// Mean time per call within the fastest of several batches. Other
/// processes can only add time, so the fastest batch is the least disturbed.
fn time_run(min_s: f64, mut run: impl FnMut() -> Result<()>) -> Result<f64> {
    let per_batch = min_s / TIMING_BATCHES as f64;
    let mut best = f64::INFINITY;
    for _ in 0..TIMING_BATCHES {
        let start = Instant::now();
        let mut reps = 0u32;
        loop {
            run()?;
            reps += 1;
            let elapsed = start.elapsed().as_secs_f64();
            if elapsed >= per_batch {
                best = best.min(elapsed / reps as f64);
                break;
            }
        }
    }
    Ok(best)
}

/// Wall-clock time of the χ² and permutation tests on precomputed SECT
/// fields, per (Γ, Δ, n) cell. Shape generation and SECT computation are
/// not timed. Timing runs sequentially on the calling thread.
pub fn run_runtime_study(cfg: &RuntimeConfig) -> Result<RuntimeResult> {
    cfg.validate()?;
    let n_max = *cfg.ns.iter().max().unwrap();
    let grids: Vec<DirectionGrid> = cfg
        .gammas
        .iter()
        .map(|&g| DirectionGrid::half_circle(g))
        .collect::<Result<_>>()?;
    let horizon = 2.0 * FAMILY_BOUNDING_RADIUS;
    let family = |epsilon| FamilyParams {
        epsilon,
        ..FamilyParams::default()
    };

    // times[alg][gamma][delta][n] -> per-replicate seconds
    let (ng, nd, nn) = (cfg.gammas.len(), cfg.deltas.len(), cfg.ns.len());
    let mut times = vec![vec![Vec::new(); ng * nd * nn]; cfg.algorithms.len()];
    for r in 0..cfg.replicates {
        let c1 = family_fields(&family(0.0), cfg.seed, &[r as u64, 0], n_max, &grids)?;
        let c2 = family_fields(&family(cfg.epsilon), cfg.seed, &[r as u64, 1], n_max, &grids)?;
        for (gi, grid) in grids.iter().enumerate() {
            for (di, &delta) in cfg.deltas.iter().enumerate() {
                let levels = LevelGrid::new(horizon, delta)?;
                let pick = |c: &[Vec<Vec<ECCurve>>], n: usize| -> Vec<Vec<ECCurve>> {
                    c[..n].iter().map(|v| v[gi].clone()).collect()
                };
                for (ni, &n) in cfg.ns.iter().enumerate() {
                    let (s1, _) = groups_from_curves(&pick(&c1, n), grid, &levels)?;
                    let (s2, _) = groups_from_curves(&pick(&c2, n), grid, &levels)?;
                    let settings = TestSettings {
                        alpha: cfg.alpha,
                        permutations: cfg.permutations,
                        seed: stream(cfg.seed, &[TEST_KEY, r as u64]).next_u64(),
                        ..TestSettings::default()
                    };
                    for (ai, &alg) in cfg.algorithms.iter().enumerate() {
                        let t = time_run(cfg.min_timing_s, || {
                            match alg {
                                1 => chi2_two_sample(&s1, &s2, &settings)?,
                                _ => permutation_test(&s1, &s2, &settings)?,
                            };
                            Ok(())
                        })?;
                        times[ai][(gi * nd + di) * nn + ni].push(t);
                    }
                }
            }
        }
        log::info!("runtime replicate {} done", r + 1);
    }

    let mut cells = Vec::new();
    for (ai, &alg) in cfg.algorithms.iter().enumerate() {
        for (gi, &gamma) in cfg.gammas.iter().enumerate() {
            for (di, &delta) in cfg.deltas.iter().enumerate() {
                for (ni, &n) in cfg.ns.iter().enumerate() {
                    let ts = &times[ai][(gi * nd + di) * nn + ni];
                    let m = ts.iter().sum::<f64>() / ts.len() as f64;
                    let var = if ts.len() > 1 {
                        ts.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / (ts.len() - 1) as f64
                    } else {
                        0.0
                    };
                    cells.push(RuntimeCell {
                        algorithm: alg,
                        gamma,
                        delta,
                        n,
                        mean_s: m,
                        sd_s: var.sqrt(),
                        replicates: ts.len(),
                    });
                }
            }
        }
    }
    Ok(RuntimeResult {
        config: cfg.clone(),
        cells,
    })
}

/// Writes `runtime.csv` (long format), `runtime_table.csv` (one row per
/// (algorithm, Γ, Δ) with a "mean (sd)" column per n) and `runtime.json`.
pub fn write_runtime_outputs(result: &RuntimeResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let mut long = String::from("algorithm,gamma,delta,n,mean_s,sd_s,replicates\n");
    for c in &result.cells {
        let _ = writeln!(
            long,
            "{},{},{},{},{},{},{}",
            c.algorithm, c.gamma, c.delta, c.n, c.mean_s, c.sd_s, c.replicates
        );
    }
    write_text(&dir.join("runtime.csv"), &long)?;

    let cfg = &result.config;
    let mut table = String::from("algorithm,gamma,delta");
    for n in &cfg.ns {
        let _ = write!(table, ",n={n}");
    }
    table.push('\n');
    for &a in &cfg.algorithms {
        for &g in &cfg.gammas {
            for &d in &cfg.deltas {
                let _ = write!(table, "{a},{g},{d}");
                for &n in &cfg.ns {
                    if let Some(c) = result.cell(a, g, d, n) {
                        let _ = write!(table, ",{:.3e} ({:.1e})", c.mean_s, c.sd_s);
                    }
                }
                table.push('\n');
            }
        }
    }
    write_text(&dir.join("runtime_table.csv"), &table)?;
    let json = serde_json::to_string_pretty(result)?;
    write_text(&dir.join("runtime.json"), &(json + "\n"))
}
