use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sectkit::bench::{
    run_rejection_study, run_runtime_study, write_rejection_outputs, write_runtime_outputs,
    RuntimeConfig, StudyConfig,
};
use sectkit::ecc::{direction_grid, Backend, DirectionGrid, DirectionSource};
use sectkit::infer::{
    chi2_two_sample, permutation_test, randomization_nhst, Decision, EctGroup, Method, Relabeling,
    SectGroup, TestSettings,
};
use sectkit::io::{load_ect_group, load_sect_group, read_field, write_fields, AnyField};
use sectkit::sect::{default_backend, rho_discrete, sect_field, LevelGrid};
use sectkit::shapes::{
    load_mesh, make_deterministic_shape, sample_random_shape, BuiltinShape, FamilyParams,
    ShapeSpec,
};
use sectkit::{rng, Error};

const EXIT_REJECT: u8 = 3;
const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

/// Euler characteristic curves, SECT fields and two-sample shape tests.
#[derive(Parser)]
#[command(name = "sectkit", version)]
struct Cli {
    /// Worker threads (falls back to SECTKIT_THREADS, then all cores).
    /// Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute SECT and ECT fields of a shape.
    Compute(ComputeArgs),
    /// Two-sample test between two directories of fields.
    Test(TestArgs),
    /// Run the rejection-rate or runtime study.
    Simulate(SimulateArgs),
    /// Discrete ρ distance between two ECT fields.
    Distance(DistanceArgs),
}

#[derive(Args)]
struct ComputeArgs {
    /// `path.off`, `builtin:K1`, `builtin:K2` or `family:eps=X,seed=S`.
    #[arg(long)]
    shape: String,
    /// Number of directions, or a CSV file with one unit vector per row.
    #[arg(long)]
    directions: String,
    /// Use the half circle θ_p = (p − 1)π/Γ instead of the full circle.
    #[arg(long)]
    half_circle: bool,
    /// Number of sublevel sets Δ.
    #[arg(long)]
    levels: usize,
    /// Bounding radius R (default: 3/2 for generated shapes, the largest
    /// vertex norm for meshes).
    #[arg(long)]
    radius: Option<f64>,
    /// `mesh`, `disks`, `cech`, `cech:<max clique>` or `raster:<δ>`.
    #[arg(long)]
    backend: Option<String>,
    /// Centers per arc for generated shapes.
    #[arg(long, default_value_t = 100)]
    curve_points: usize,
    /// For `family:` shapes, draw this many shapes with seeds S, S+1, ...
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// File stem of the outputs (default derived from --shape).
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelabelArg {
    Balanced,
    PairSwap,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    group1: PathBuf,
    #[arg(long)]
    group2: PathBuf,
    /// `chi2`, `perm` or `nhst`.
    #[arg(long, default_value = "chi2")]
    method: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    permutations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    variance_threshold: f64,
    #[arg(long, value_enum, default_value_t = RelabelArg::Balanced)]
    relabeling: RelabelArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Study {
    Rejection,
    Runtime,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    study: Study,
    /// JSON config; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the full seven-ε, 100-replicate grid instead of the desk
    /// defaults (rejection study only).
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var("SECTKIT_THREADS") {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| usage(format!("SECTKIT_THREADS must be a count, got {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    match cli.command {
        Command::Compute(a) => compute(a),
        Command::Test(a) => test(a),
        Command::Simulate(a) => simulate(a),
        Command::Distance(a) => distance(a),
    }
}

enum ShapeArg {
    Off(PathBuf),
    Builtin(BuiltinShape),
    Family { epsilon: f64, seed: u64 },
}

fn parse_shape(s: &str) -> Result<ShapeArg, Failure> {
    if let Some(name) = s.strip_prefix("builtin:") {
        return Ok(ShapeArg::Builtin(name.parse()?));
    }
    if let Some(rest) = s.strip_prefix("family:") {
        let (mut epsilon, mut seed) = (None, None);
        for kv in rest.split(',') {
            let bad = || usage(format!("bad family parameter {kv:?} in {s:?}"));
            match kv.split_once('=').ok_or_else(bad)? {
                ("eps", v) => epsilon = Some(v.parse::<f64>().map_err(|_| bad())?),
                ("seed", v) => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        return Ok(ShapeArg::Family {
            epsilon: epsilon.ok_or_else(|| usage("family shape needs eps=X"))?,
            seed: seed.unwrap_or(0),
        });
    }
    Ok(ShapeArg::Off(PathBuf::from(s)))
}

fn with_radius(shape: ShapeSpec, radius: Option<f64>) -> sectkit::Result<ShapeSpec> {
    match radius {
        Some(r) => ShapeSpec::new(shape.geometry().clone(), r),
        None => Ok(shape),
    }
}

fn compute(a: ComputeArgs) -> Result<u8, Failure> {
    let shape_arg = parse_shape(&a.shape)?;
    if a.levels < 2 {
        return Err(usage("--levels must be at least 2"));
    }
    if a.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    if a.count > 1 && !matches!(shape_arg, ShapeArg::Family { .. }) {
        return Err(usage("--count applies to family: shapes only"));
    }
    if let Some(r) = a.radius {
        if !(r > 0.0 && r.is_finite()) {
            return Err(usage("--radius must be positive"));
        }
    }
    let backend: Option<Backend> = a.backend.as_deref().map(str::parse).transpose()?;
    let source = match a.directions.parse::<usize>() {
        Ok(_) if a.half_circle => DirectionSource::HalfCircle,
        Ok(_) => DirectionSource::UniformCircle,
        Err(_) => DirectionSource::File(PathBuf::from(&a.directions)),
    };

    let mut shapes: Vec<(String, ShapeSpec)> = Vec::new();
    match &shape_arg {
        ShapeArg::Off(path) => {
            let mesh = load_mesh(path)?;
            let shape = match a.radius {
                Some(r) => ShapeSpec::new(sectkit::shapes::Geometry::Mesh(mesh), r)?,
                None => ShapeSpec::from_mesh(mesh)?,
            };
            let id = a.id.clone().unwrap_or_else(|| stem(path));
            shapes.push((id, shape));
        }
        ShapeArg::Builtin(which) => {
            let shape = with_radius(make_deterministic_shape(*which, a.curve_points)?, a.radius)?;
            shapes.push((a.id.clone().unwrap_or_else(|| format!("{which:?}")), shape));
        }
        ShapeArg::Family { epsilon, seed } => {
            let params = FamilyParams {
                epsilon: *epsilon,
                curve_points: a.curve_points,
                ..FamilyParams::default()
            };
            params.validate()?;
            let base = a.id.clone().unwrap_or_else(|| "family".into());
            for k in 0..a.count as u64 {
                let s = seed + k;
                let shape = sample_random_shape(&params, &mut rng::stream(s, &[]))?;
                let id = if a.count == 1 {
                    a.id.clone().unwrap_or_else(|| format!("family-eps{epsilon}-seed{s}"))
                } else {
                    format!("{base}-{k:04}")
                };
                shapes.push((id, with_radius(shape, a.radius)?));
            }
        }
    }

    let dim = shapes[0].1.dim();
    let grid = match &source {
        DirectionSource::File(path) => DirectionGrid::from_csv_file(path, dim)?,
        _ => direction_grid(dim, a.directions.parse().unwrap_or(0), &source)?,
    };
    for (id, shape) in &shapes {
        let levels = LevelGrid::new(shape.horizon(), a.levels)?;
        let backend = backend.unwrap_or_else(|| default_backend(shape));
        let (sect, ect) = sect_field(shape, &grid, &levels, backend)?;
        write_fields(&a.out, id, &sect, &ect)?;
        let mut terminal: Vec<i64> = ect.rows().map(|r| r[r.len() - 1]).collect();
        terminal.sort_unstable();
        terminal.dedup();
        let terminal: Vec<String> = terminal.iter().map(i64::to_string).collect();
        println!(
            "{id}: gamma={} delta={} T={} terminal_chi={}",
            grid.len(),
            levels.count(),
            levels.horizon(),
            terminal.join("|")
        );
    }
    Ok(0)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "shape".into())
}

fn test(a: TestArgs) -> Result<u8, Failure> {
    let method: Method = a.method.parse()?;
    let settings = TestSettings {
        alpha: a.alpha,
        variance_threshold: a.variance_threshold,
        permutations: a.permutations,
        seed: a.seed,
        relabeling: match a.relabeling {
            RelabelArg::Balanced => Relabeling::Balanced,
            RelabelArg::PairSwap => Relabeling::PairSwap,
        },
    };
    settings.validate()?;
    let report = match method {
        Method::Chi2 | Method::Permutation => {
            let (f1, f2) = (load_sect_group(&a.group1)?, load_sect_group(&a.group2)?);
            check_groups(&f1.fields[0], &f2.fields[0], &f1.manifests[0], &f2.manifests[0])?;
            let (g1, g2) = (SectGroup::new(f1.fields)?, SectGroup::new(f2.fields)?);
            if method == Method::Chi2 {
                chi2_two_sample(&g1, &g2, &settings)?
            } else {
                permutation_test(&g1, &g2, &settings)?
            }
        }
        Method::Nhst => {
            let (f1, f2) = (load_ect_group(&a.group1)?, load_ect_group(&a.group2)?);
            check_groups(&f1.fields[0], &f2.fields[0], &f1.manifests[0], &f2.manifests[0])?;
            let (g1, g2) = (EctGroup::new(f1.fields)?, EctGroup::new(f2.fields)?);
            randomization_nhst(&g1, &g2, &settings)?
        }
    };
    let json = serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n";
    match &a.out {
        Some(path) => {
            std::fs::write(path, json).map_err(|e| Error::File {
                path: path.clone(),
                source: e,
            })?;
            println!(
                "{:?}: statistic={} threshold={} p={}",
                report.decision, report.statistic, report.threshold, report.p_value
            );
        }
        None => print!("{json}"),
    }
    Ok(match report.decision {
        Decision::Accept => 0,
        Decision::Reject => EXIT_REJECT,
    })
}

fn check_groups<T: Copy>(
    a: &sectkit::sect::Field<T>,
    b: &sectkit::sect::Field<T>,
    pa: &Path,
    pb: &Path,
) -> Result<(), Failure> {
    a.check_same_grid(b).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("{} vs {}: {e}", pa.display(), pb.display()),
    })
}

fn read_json<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn simulate(a: SimulateArgs) -> Result<u8, Failure> {
    match a.study {
        Study::Rejection => {
            let cfg: StudyConfig = match (&a.config, a.full_scale) {
                (Some(p), false) => read_json(Some(p))?,
                (None, true) => StudyConfig::full_scale(),
                (None, false) => StudyConfig::default(),
                (Some(_), true) => return Err(usage("--config and --full-scale are exclusive")),
            };
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let result = run_rejection_study(&cfg)?;
            write_rejection_outputs(&result, &a.out)?;
            for s in &result.summaries {
                println!(
                    "epsilon={} algorithm={} rejection_rate={}",
                    s.epsilon, s.algorithm, s.rejection_rate
                );
            }
        }
        Study::Runtime => {
            if a.full_scale {
                return Err(usage("--full-scale applies to the rejection study"));
            }
            let cfg: RuntimeConfig = read_json(a.config.as_deref())?;
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let result = run_runtime_study(&cfg)?;
            write_runtime_outputs(&result, &a.out)?;
            for c in &result.cells {
                println!(
                    "algorithm={} gamma={} delta={} n={} mean_s={:.3e} sd_s={:.1e}",
                    c.algorithm, c.gamma, c.delta, c.n, c.mean_s, c.sd_s
                );
            }
        }
    }
    Ok(0)
}

fn distance(a: DistanceArgs) -> Result<u8, Failure> {
    let load = |p: &Path| -> Result<_, Failure> {
        match read_field(p)? {
            (_, AnyField::Ect(f)) => Ok(f),
            (_, AnyField::Sect(_)) => Err(Failure {
                code: EXIT_DATA,
                message: format!("{} is a SECT field; distances use ECT fields", p.display()),
            }),
        }
    };
    let (fa, fb) = (load(&a.a)?, load(&a.b)?);
    fa.check_same_grid(&fb).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("{} vs {}: {e}", a.a.display(), a.b.display()),
    })?;
    println!("{:.9}", rho_discrete(&fa, &fb)?);
    Ok(0)
}
