use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use schro_ldp_core::dynamics::{euler_maruyama, langevin_cost, FollmerModel, PotentialField};
use schro_ldp_core::eot::{eot_plan, normalize_potentials, sinkhorn, Coupling, DEFAULT_MAX_ITER};
use schro_ldp_core::ldp::{run_ldp_experiment, EventConfig, ExperimentConfig};
use schro_ldp_core::ot_dual::{ot_solve_exact, primal_value};
use schro_ldp_core::paths::{sample_schrodinger_bridge, Grid, Path, DEFAULT_GRID_INTERVALS};
use schro_ldp_core::rates::{inf_rate_over_event, rate_i, rate_j_mix, rate_j_xy, support_pairs, RateSpec};
use schro_ldp_core::{DiscreteMeasure, Error};

const THREADS_ENV: &str = "SCHRO_LDP_THREADS";

#[derive(Parser)]
#[command(name = "schro-ldp", version, about = "Schrödinger bridges, entropic transport and large-deviation rates")]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropic potentials and plan by log-domain Sinkhorn.
    Sinkhorn(SinkhornArgs),
    /// Exact optimal plan and Kantorovich potentials.
    Ot(OtArgs),
    /// Evaluate a rate functional on a path.
    Rate(RateArgs),
    /// Minimise a rate functional over an event.
    InfRate(InfRateArgs),
    /// Sample Schrödinger bridge paths.
    Sample(SampleArgs),
    /// Simulate the Föllmer SDE by Euler–Maruyama.
    Follmer(FollmerArgs),
    /// Estimate the Langevin cost c_eps(x, y).
    LangevinCost(LangevinArgs),
    /// Run an LDP slope experiment from a TOML config.
    Ldp(LdpArgs),
}

#[derive(Args)]
struct Pair {
    /// Source measure CSV (`w,x1,..,xd`).
    #[arg(long)]
    mu0: PathBuf,
    /// Target measure CSV.
    #[arg(long)]
    mu1: PathBuf,
}

#[derive(Args)]
struct OutArg {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gauge {
    /// `∫φ dμ0 = ∫ψ dμ1`.
    Balanced,
    /// `φ = 0` at the first source atom.
    Phi0,
}

#[derive(Args)]
struct SinkhornArgs {
    #[command(flatten)]
    pair: Pair,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = Gauge::Balanced)]
    gauge: Gauge,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct OtArgs {
    #[command(flatten)]
    pair: Pair,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum RateKind {
    #[value(name = "I")]
    I,
    #[value(name = "Jxy")]
    Jxy,
    #[value(name = "Jmix")]
    Jmix,
}

#[derive(Args)]
struct RateTarget {
    #[arg(long, value_enum)]
    kind: RateKind,
    /// Bridge start for Jxy, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// Bridge end for Jxy, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y: Option<Vec<f64>>,
    /// Source measure CSV for I and Jmix.
    #[arg(long)]
    mu0: Option<PathBuf>,
    /// Target measure CSV for I and Jmix.
    #[arg(long)]
    mu1: Option<PathBuf>,
}

#[derive(Args)]
struct RateArgs {
    #[command(flatten)]
    target: RateTarget,
    /// Path CSV (`t,x1,..,xd`).
    #[arg(long)]
    path: PathBuf,
}

#[derive(Args)]
struct InfRateArgs {
    #[command(flatten)]
    target: RateTarget,
    /// Event JSON, with the same keys as the `[event]` table of an experiment.
    #[arg(long)]
    event: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    pair: Pair,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_INTERVALS)]
    grid: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct FollmerArgs {
    #[command(flatten)]
    pair: Pair,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    n: usize,
    /// Record every k-th step.
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct LangevinArgs {
    /// `zero`, `cosine:A,w[,phase]` or `bump:A,width,c1,..,cd`.
    #[arg(long = "V")]
    potential: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y: Vec<f64>,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    grid: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct LdpArgs {
    /// Experiment TOML.
    #[arg(long)]
    config: PathBuf,
    /// Output directory when the config names none.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Self { code: if error.is_numerical() { 2 } else { 1 }, error }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let kind = if f.code == 2 { "numerical" } else { "usage" };
            eprintln!("{}", json!({ "error": f.error.to_string(), "kind": kind }));
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let seed = cli.seed;
    match cli.command {
        Command::Sinkhorn(a) => cmd_sinkhorn(a),
        Command::Ot(a) => cmd_ot(a),
        Command::Rate(a) => cmd_rate(a),
        Command::InfRate(a) => cmd_inf_rate(a),
        Command::Sample(a) => cmd_sample(a, seed),
        Command::Follmer(a) => cmd_follmer(a, seed),
        Command::LangevinCost(a) => cmd_langevin(a, seed),
        Command::Ldp(a) => cmd_ldp(a),
    }
}

/// Writes `contents` via a temporary file in the target directory and a rename.
fn write_atomic(path: &FsPath, contents: &str) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => FsPath::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn emit(out: &OutArg, contents: &str) -> Result<(), Failure> {
    match &out.out {
        Some(p) => write_atomic(p, contents)?,
        None => print!("{contents}"),
    }
    Ok(())
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// JSON has no infinity; infinite rates are written as null.
fn finite_or_null(v: f64) -> Value {
    if v.is_finite() { json!(v) } else { Value::Null }
}

fn load_pair(p: &Pair) -> Result<(DiscreteMeasure, DiscreteMeasure), Error> {
    Ok((DiscreteMeasure::from_csv_path(&p.mu0)?, DiscreteMeasure::from_csv_path(&p.mu1)?))
}

fn cmd_sinkhorn(a: SinkhornArgs) -> Result<(), Failure> {
    let (mu0, mu1) = load_pair(&a.pair)?;
    let sol = sinkhorn(&mu0, &mu1, a.eps, a.tol, a.max_iter)?;
    let plan = eot_plan(&sol.potentials, &mu0, &mu1, a.tol)?;
    let pot = match a.gauge {
        Gauge::Balanced => normalize_potentials(&sol.potentials, &mu0, &mu1),
        Gauge::Phi0 => sol.potentials.shifted(-sol.potentials.phi[0]),
    };
    let v = json!({
        "epsilon": a.eps,
        "phi": pot.phi,
        "psi": pot.psi,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "plan": plan.to_rows(),
    });
    emit(&a.out, &to_json(&v))
}

fn cmd_ot(a: OtArgs) -> Result<(), Failure> {
    let (mu0, mu1) = load_pair(&a.pair)?;
    let (plan, duals) = ot_solve_exact(&mu0, &mu1)?;
    let v = json!({
        "plan": plan.to_rows(),
        "psi": duals.psi,
        "psi_c": duals.psi_c,
        "primal": primal_value(&plan)?,
        "dual": duals.dual_value(&mu0, &mu1),
    });
    emit(&a.out, &to_json(&v))
}

enum LoadedRate {
    Jxy(Vec<f64>, Vec<f64>),
    Jmix(Vec<(Vec<f64>, Vec<f64>)>),
    I(DiscreteMeasure, DiscreteMeasure, schro_ldp_core::ot_dual::DualPotentials),
}

impl LoadedRate {
    fn spec(&self) -> RateSpec<'_> {
        match self {
            LoadedRate::Jxy(x, y) => RateSpec::Jxy { x, y },
            LoadedRate::Jmix(s) => RateSpec::Jmix { support: s },
            LoadedRate::I(mu0, mu1, duals) => RateSpec::I { duals, mu0, mu1 },
        }
    }
}

fn load_rate(t: &RateTarget) -> Result<LoadedRate, Error> {
    let measures = || -> Result<(DiscreteMeasure, DiscreteMeasure), Error> {
        match (&t.mu0, &t.mu1) {
            (Some(a), Some(b)) => Ok((DiscreteMeasure::from_csv_path(a)?, DiscreteMeasure::from_csv_path(b)?)),
            _ => Err(Error::InvalidArgument("this rate needs --mu0 and --mu1".into())),
        }
    };
    match t.kind {
        RateKind::Jxy => match (&t.x, &t.y) {
            (Some(x), Some(y)) => Ok(LoadedRate::Jxy(x.clone(), y.clone())),
            _ => Err(Error::InvalidArgument("Jxy needs --x and --y".into())),
        },
        RateKind::Jmix => {
            let (mu0, mu1) = measures()?;
            Ok(LoadedRate::Jmix(support_pairs(&Coupling::product(&mu0, &mu1)?)))
        }
        RateKind::I => {
            let (mu0, mu1) = measures()?;
            let (_, duals) = ot_solve_exact(&mu0, &mu1)?;
            Ok(LoadedRate::I(mu0, mu1, duals))
        }
    }
}

fn cmd_rate(a: RateArgs) -> Result<(), Failure> {
    let rate = load_rate(&a.target)?;
    let file = std::fs::File::open(&a.path).map_err(Error::from)?;
    let path = Path::from_csv_reader(file)?;
    let value = match &rate {
        LoadedRate::Jxy(x, y) => rate_j_xy(&path, x, y),
        LoadedRate::Jmix(s) => rate_j_mix(&path, s),
        LoadedRate::I(mu0, mu1, duals) => rate_i(&path, duals, mu0, mu1),
    };
    println!("{}", if value.is_finite() { value.to_string() } else { "inf".to_string() });
    Ok(())
}

fn cmd_inf_rate(a: InfRateArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.event).map_err(Error::from)?;
    let cfg: EventConfig = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let event = cfg.build()?;
    let rate = load_rate(&a.target)?;
    let r = inf_rate_over_event(&event, rate.spec())?;
    let v = json!({
        "value": finite_or_null(r.value),
        "argmin_path_csv": r.argmin.as_ref().map(Path::to_csv_string),
    });
    emit(&a.out, &to_json(&v))
}

fn cmd_sample(a: SampleArgs, seed: u64) -> Result<(), Failure> {
    let (mu0, mu1) = load_pair(&a.pair)?;
    let plan = if a.eps == 0.0 {
        ot_solve_exact(&mu0, &mu1)?.0
    } else {
        let sol = sinkhorn(&mu0, &mu1, a.eps, 1e-10, DEFAULT_MAX_ITER)?;
        eot_plan(&sol.potentials, &mu0, &mu1, 1e-10)?
    };
    let ens = sample_schrodinger_bridge(&plan, a.eps, &Grid::uniform(a.grid)?, a.n, seed)?;
    emit(&a.out, &ens.to_csv_string())
}

fn cmd_follmer(a: FollmerArgs, seed: u64) -> Result<(), Failure> {
    let (mu0, mu1) = load_pair(&a.pair)?;
    let sol = sinkhorn(&mu0, &mu1, a.eps, 1e-10, DEFAULT_MAX_ITER)?;
    let model = FollmerModel::new(mu0, mu1, a.eps, sol.potentials.psi)?;
    let ens = euler_maruyama(&model, a.n, a.steps, a.record_every, seed)?;
    emit(&a.out, &ens.to_csv_string())
}

fn cmd_langevin(a: LangevinArgs, seed: u64) -> Result<(), Failure> {
    let v = PotentialField::parse(&a.potential)?;
    let r = langevin_cost(&a.x, &a.y, &v, a.eps, &Grid::uniform(a.grid)?, a.n, seed)?;
    if let Some(w) = &r.warning {
        eprintln!("warning: {w}");
    }
    emit(&a.out, &to_json(&serde_json::to_value(&r).expect("serializable")))
}

fn cmd_ldp(a: LdpArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.config).map_err(Error::from)?;
    let cfg = ExperimentConfig::from_toml_str(&text)?;
    let base = a.config.parent().map(FsPath::to_path_buf).unwrap_or_default();
    let report = run_ldp_experiment(&cfg, Some(&base))?;

    let dir = match (&cfg.output.dir, &a.out_dir) {
        (Some(d), _) => base.join(d),
        (None, Some(d)) => d.clone(),
        (None, None) => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    let name = cfg.output.name.as_deref().unwrap_or("report");
    let json = to_json(&serde_json::to_value(&report).expect("serializable"));
    write_atomic(&dir.join(format!("{name}.json")), &json)?;
    write_atomic(&dir.join(format!("{name}.csv")), &report.to_csv_string())?;
    println!(
        "verdict={} slope={:.6} ci=[{:.6}, {:.6}] rate_inf={:.6} report={}",
        report.verdict,
        report.slope,
        report.slope_ci.0,
        report.slope_ci.1,
        report.rate_inf,
        dir.join(format!("{name}.json")).display()
    );
    Ok(())
}
