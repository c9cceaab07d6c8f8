//! Monte Carlo estimates of `ε log P(A)` along a noise schedule, importance
//! sampling by deterministic path shifts, slope extrapolation and the
//! experiment runner that compares slopes with rate infima.

use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eot::{eot_plan, sinkhorn, Coupling, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::ot_dual::ot_solve_exact;
use crate::paths::{add_geodesic, bridge_noise, geodesic, h_inner, h_norm_sq, Grid, Path, PairSampler};
use crate::rates::{event_argmin_for_pair, inf_rate_over_event, two_point_grid, EventSet, PairRegion, RateSpec};
use crate::rng::{derive_seed, par_chunks};

/// Unweighted estimates below this trigger the shifted estimator in auto mode.
pub const AUTO_SHIFT_THRESHOLD: f64 = 1e-4;
/// Minimum `p̂·n` for an unweighted estimate to enter the regression.
pub const MIN_HITS: f64 = 20.0;
/// Minimum effective sample size for a shifted estimate to enter the regression.
pub const MIN_ESS: f64 = 100.0;
const SINKHORN_TOL: f64 = 1e-10;

/// Path-space law to sample: a mixture of Brownian bridges over a coupling.
#[derive(Debug, Clone)]
pub enum Sampler {
    /// Brownian bridge from `x` to `y`.
    Bridge { x: Vec<f64>, y: Vec<f64> },
    /// Schrödinger bridge with the given entropic plan.
    Schrodinger { plan: Coupling },
    /// Bridges mixed over `μ0 ⊗ μ1`.
    Mixture { mu0: DiscreteMeasure, mu1: DiscreteMeasure },
}

impl Sampler {
    pub fn coupling(&self) -> Result<Coupling> {
        match self {
            Sampler::Bridge { x, y } => Coupling::pinned(x.clone(), y.clone()),
            Sampler::Schrodinger { plan } => Ok(plan.clone()),
            Sampler::Mixture { mu0, mu1 } => Coupling::product(mu0, mu1),
        }
    }
}

/// Mean shifts `g = h − σ^{xy}` per positive-mass pair of the sampled coupling,
/// in the order of [`Coupling::support`]. Pairs without a shift are sampled as is.
#[derive(Debug, Clone)]
pub struct ShiftSet {
    shifts: Vec<Option<Path>>,
}

impl ShiftSet {
    /// A single shift for a pinned sampler; `path` must run from `x` to `y`.
    pub fn single(sampler: &Sampler, path: &Path) -> Result<Self> {
        let plan = sampler.coupling()?;
        let support = plan.support();
        if support.len() != 1 {
            return Err(Error::InvalidArgument("a single shift needs a pinned sampler".into()));
        }
        let (i, j, _) = support[0];
        let (x, y) = (plan.source().point(i), plan.target().point(j));
        if path.start() != x || path.end() != y {
            return Err(Error::InvalidArgument(format!(
                "shift runs from {:?} to {:?}, sampler from {x:?} to {y:?}",
                path.start(),
                path.end()
            )));
        }
        Ok(Self { shifts: vec![Some(path.minus(&geodesic(x, y, path.grid())?)?)] })
    }

    /// Shifts towards the cheapest path of `event` for every pair of `plan`.
    pub fn from_event(plan: &Coupling, event: &EventSet) -> Result<Self> {
        let grid = sampling_grid(event)?;
        let shifts = plan
            .support()
            .into_iter()
            .map(|(i, j, _)| {
                let (x, y) = (plan.source().point(i), plan.target().point(j));
                match event_argmin_for_pair(event, x, y)? {
                    Some((h, _)) if h.grid() == &grid => Ok(Some(h.minus(&geodesic(x, y, &grid)?)?)),
                    _ => Ok(None),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { shifts })
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }
}

/// Grid on which paths are sampled for an event.
fn sampling_grid(event: &EventSet) -> Result<Grid> {
    match event {
        EventSet::Tube { center, .. } => Ok(center.grid().clone()),
        EventSet::TwoPoint { s, t, .. } => two_point_grid(*s, *t),
        EventSet::Endpoint { .. } => Grid::uniform(1),
    }
}

/// One point of an ε-schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub epsilon: f64,
    pub p_hat: f64,
    pub se: f64,
    pub log_p_hat: f64,
    /// `se / p_hat`, computed in log space.
    pub rel_se: f64,
    pub n: usize,
    pub hits: usize,
    pub ess: f64,
    pub shifted: bool,
    /// Set when `p̂ = 0`, i.e. `log p̂` is undefined.
    pub flagged: bool,
}

impl Estimate {
    pub fn eps_log_p(&self) -> f64 {
        self.epsilon * self.log_p_hat
    }

    pub fn resolvable(&self) -> bool {
        if self.flagged {
            return false;
        }
        if self.shifted {
            self.ess >= MIN_ESS
        } else {
            self.p_hat * self.n as f64 >= MIN_HITS
        }
    }

    fn exact(epsilon: f64, p: f64, n: usize) -> Self {
        Self {
            epsilon,
            p_hat: p,
            se: 0.0,
            log_p_hat: p.ln(),
            rel_se: 0.0,
            n,
            hits: if p > 0.0 { n } else { 0 },
            ess: n as f64,
            shifted: false,
            flagged: p == 0.0,
        }
    }
}

/// Estimates `P(A)` under `sampler` with noise `ε` from `n` paths. With a shift
/// set, each path is `σ^{xy} + g + ξ` and carries the likelihood ratio
/// `exp{−(g, ξ)_H/ε − ‖g‖²_H/(2ε)}`. Endpoint events are evaluated exactly
/// from the plan.
pub fn event_probability(
    sampler: &Sampler,
    event: &EventSet,
    epsilon: f64,
    n: usize,
    shift: Option<&ShiftSet>,
    seed: u64,
) -> Result<Estimate> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let plan = sampler.coupling()?;
    let d = plan.source().dim();
    event.validate(d)?;

    if let EventSet::Endpoint { region } = event {
        let p: f64 = plan
            .support()
            .into_iter()
            .filter(|&(i, j, _)| region.contains(plan.source().point(i), plan.target().point(j)))
            .map(|(_, _, m)| m)
            .sum();
        return Ok(Estimate::exact(epsilon, p.min(1.0), n));
    }
    if let EventSet::TwoPoint { region: PairRegion::Points { .. }, .. } = event {
        return Err(Error::InvalidArgument("a finite set of two-time pairs has probability zero; use a rectangle".into()));
    }

    let grid = sampling_grid(event)?;
    let pairs = PairSampler::new(&plan)?;
    if let Some(s) = shift {
        if s.len() != pairs.pairs.len() {
            return Err(Error::InvalidArgument(format!("{} shifts for {} sampled pairs", s.len(), pairs.pairs.len())));
        }
        if s.shifts.iter().flatten().any(|g| g.grid() != &grid || g.dim() != d) {
            return Err(Error::InvalidArgument("shift lives on a different grid".into()));
        }
    }
    let norms: Vec<f64> = shift.map_or_else(Vec::new, |s| s.shifts.iter().map(|g| g.as_ref().map_or(0.0, h_norm_sq)).collect());
    let times = grid.times();

    // Per chunk: log-weights of the hits.
    let chunks = par_chunks(n, seed, |rng, _, len| {
        let mut hits = Vec::new();
        let mut buf = vec![0.0; times.len() * d];
        for _ in 0..len {
            let k = pairs.sample(rng);
            let (i, j) = pairs.pairs[k];
            bridge_noise(times, d, epsilon, rng, &mut buf);
            let g = shift.and_then(|s| s.shifts[k].as_ref());
            let mut logw = 0.0;
            if let Some(g) = g {
                let xi = Path::new(grid.clone(), d, buf.clone()).expect("finite noise");
                logw = -h_inner(g, &xi).expect("shared grid") / epsilon - norms[k] / (2.0 * epsilon);
                for (b, v) in buf.iter_mut().zip(g.values()) {
                    *b += v;
                }
            }
            add_geodesic(times, plan.source().point(i), plan.target().point(j), &mut buf);
            let path = Path::new(grid.clone(), d, buf.clone()).expect("finite path");
            if event.contains(&path) {
                hits.push(logw);
            }
        }
        hits
    });
    let logw: Vec<f64> = chunks.into_iter().flatten().collect();
    Ok(summarize(epsilon, n, &logw, shift.is_some()))
}

fn summarize(epsilon: f64, n: usize, logw: &[f64], shifted: bool) -> Estimate {
    let nf = n as f64;
    if logw.is_empty() {
        return Estimate {
            epsilon,
            p_hat: 0.0,
            se: 0.0,
            log_p_hat: f64::NEG_INFINITY,
            rel_se: f64::INFINITY,
            n,
            hits: 0,
            ess: 0.0,
            shifted,
            flagged: true,
        };
    }
    let m = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = logw.iter().map(|l| (l - m).exp()).collect();
    let sum: f64 = scaled.iter().sum();
    let sum_sq: f64 = scaled.iter().map(|w| w * w).sum();
    let mean = sum / nf;
    // Misses contribute zeros to the sample variance.
    let var = if n > 1 { (sum_sq - nf * mean * mean).max(0.0) / (nf - 1.0) } else { 0.0 };
    let rel_se = (var / nf).sqrt() / mean;
    let log_p_hat = m + mean.ln();
    let p_hat = log_p_hat.exp();
    Estimate {
        epsilon,
        p_hat,
        se: p_hat * rel_se,
        log_p_hat,
        rel_se,
        n,
        hits: logw.len(),
        ess: if shifted { sum * sum / sum_sq } else { nf },
        shifted,
        flagged: false,
    }
}

/// `−lim ε log P` extrapolated from an ε-schedule, with a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub ci: (f64, f64),
    /// Fitted coefficient of `ε`.
    pub correction: f64,
    pub points: usize,
}

/// Weighted least squares of `ε log p̂` on `ε` with variances `(ε · se/p̂)²`;
/// the intercept at `ε = 0` is reported as `−slope`.
pub fn ldp_slope(schedule: &[f64], estimates: &[(f64, f64)]) -> Result<SlopeFit> {
    if schedule.len() != estimates.len() {
        return Err(Error::InvalidArgument("schedule and estimates differ in length".into()));
    }
    let log_p: Vec<f64> = estimates.iter().map(|(p, _)| p.ln()).collect();
    let rel: Vec<f64> = estimates.iter().map(|(p, se)| se / p).collect();
    ldp_slope_log(schedule, &log_p, &rel)
}

/// [`ldp_slope`] with probabilities given by `log p̂` and relative standard errors.
pub fn ldp_slope_log(schedule: &[f64], log_p: &[f64], rel_se: &[f64]) -> Result<SlopeFit> {
    let k = schedule.len();
    if log_p.len() != k || rel_se.len() != k {
        return Err(Error::InvalidArgument("schedule and estimates differ in length".into()));
    }
    if k < 3 {
        return Err(Error::InvalidArgument(format!("slope needs at least 3 points, got {k}")));
    }
    if log_p.iter().chain(rel_se).any(|v| !v.is_finite()) || schedule.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("slope needs positive estimates and finite errors".into()));
    }
    let y: Vec<f64> = schedule.iter().zip(log_p).map(|(e, l)| e * l).collect();
    let var: Vec<f64> = schedule.iter().zip(rel_se).map(|(e, r)| (e * r).powi(2)).collect();
    let weighted = var.iter().all(|v| *v > 0.0);
    let w: Vec<f64> = if weighted { var.iter().map(|v| 1.0 / v).collect() } else { vec![1.0; k] };

    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(schedule).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(&y).map(|(w, y)| w * y).sum();
    let xbar = sx / sw;
    let ybar = sy / sw;
    let sxx: f64 = w.iter().zip(schedule).map(|(w, x)| w * (x - xbar).powi(2)).sum();
    let sxy: f64 = w.iter().zip(schedule).zip(&y).map(|((w, x), y)| w * (x - xbar) * (y - ybar)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument("slope needs at least two distinct epsilons".into()));
    }
    let b = sxy / sxx;
    let a = ybar - b * xbar;
    // Var(a) = 1/Σw + x̄²/Sxx for known variances; OLS scales by the residual variance.
    let mut var_a = 1.0 / sw + xbar * xbar / sxx;
    if !weighted {
        let rss: f64 = schedule.iter().zip(&y).map(|(x, y)| (y - a - b * x).powi(2)).sum();
        var_a *= rss / (k as f64 - 2.0);
    }
    let half = 1.96 * var_a.sqrt();
    let slope = -a;
    Ok(SlopeFit { slope, ci: (slope - half, slope + half), correction: b, points: k })
}

/// `β⁻¹ log Σ_i e^{β v_i}`.
pub fn smooth_max(v: &[f64], beta: f64) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("smooth max of an empty list".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
    }
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Ok(m);
    }
    let s: f64 = v.iter().map(|x| (beta * (x - m)).exp()).sum();
    Ok(m + s.ln() / beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceMode {
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Bridge,
    Schrodinger,
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMeasure {
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

/// A measure given as a CSV file (relative to the config) or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSource {
    File(String),
    Inline(InlineMeasure),
}

impl MeasureSource {
    pub fn load(&self, base: Option<&FsPath>) -> Result<DiscreteMeasure> {
        match self {
            MeasureSource::File(f) => {
                let p = PathBuf::from(f);
                let p = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p,
                };
                DiscreteMeasure::from_csv_path(p)
            }
            MeasureSource::Inline(m) => match &m.weights {
                Some(w) => DiscreteMeasure::new(m.points.clone(), w.clone()),
                None => DiscreteMeasure::uniform(m.points.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub sampler: SamplerKind,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub y: Option<Vec<f64>>,
    #[serde(default)]
    pub mu0: Option<MeasureSource>,
    #[serde(default)]
    pub mu1: Option<MeasureSource>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Tube,
    Endpoint,
    TwoPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    pub kind: EventKind,
    /// Tube center as knots `[t, x1, .., xd]`, linear in between.
    #[serde(default)]
    pub center: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub radius: Option<f64>,
    /// Number of grid intervals for tubes.
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub region: Option<PairRegion>,
}

impl EventConfig {
    pub fn build(&self) -> Result<EventSet> {
        let missing = |what: &str| Error::Config(format!("{:?} event needs `{what}`", self.kind));
        match self.kind {
            EventKind::Tube => {
                let knots = self.center.as_ref().ok_or_else(|| missing("center"))?;
                let radius = self.radius.ok_or_else(|| missing("radius"))?;
                if knots.iter().any(|k| k.len() < 2) {
                    return Err(Error::Config("center knots are [t, x1, .., xd]".into()));
                }
                let knots: Vec<(f64, Vec<f64>)> = knots.iter().map(|k| (k[0], k[1..].to_vec())).collect();
                let interior: Vec<f64> = knots.iter().map(|k| k.0).collect();
                let grid = Grid::uniform(self.grid.unwrap_or(crate::paths::DEFAULT_GRID_INTERVALS))?.with_knots(&interior)?;
                let center = Path::from_knots(grid, &knots)?;
                Ok(EventSet::Tube { center, radius })
            }
            EventKind::Endpoint => Ok(EventSet::Endpoint { region: self.region.clone().ok_or_else(|| missing("region"))? }),
            EventKind::TwoPoint => Ok(EventSet::TwoPoint {
                s: self.s.ok_or_else(|| missing("s"))?,
                t: self.t.ok_or_else(|| missing("t"))?,
                region: self.region.clone().ok_or_else(|| missing("region"))?,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
}

/// An experiment as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceConfig,
    pub event: EventConfig,
    pub schedule: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    #[serde(default)]
    pub importance: ImportanceMode,
    #[serde(default)]
    pub output: OutputConfig,
    /// SHA-256 of the source text.
    #[serde(skip)]
    pub hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.hash = sha256_hex(text.as_bytes());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.len() < 3 {
            return Err(Error::Config("schedule needs at least 3 epsilons".into()));
        }
        if self.schedule.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Config("schedule entries must be positive".into()));
        }
        if self.schedule.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("schedule must be strictly decreasing".into()));
        }
        if self.n < 1000 {
            return Err(Error::Config(format!("n must be at least 1000, got {}", self.n)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config("tol must be positive".into()));
        }
        let inst = &self.instance;
        match inst.sampler {
            SamplerKind::Bridge => {
                let (x, y) = inst.x.as_ref().zip(inst.y.as_ref()).ok_or_else(|| Error::Config("bridge sampler needs `x` and `y`".into()))?;
                if x.len() != y.len() || x.is_empty() {
                    return Err(Error::Config("bridge endpoints must share a positive dimension".into()));
                }
            }
            SamplerKind::Schrodinger | SamplerKind::Mixture => {
                if inst.mu0.is_none() || inst.mu1.is_none() {
                    return Err(Error::Config("sampler needs `mu0` and `mu1`".into()));
                }
            }
        }
        self.event.build()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    #[serde(flatten)]
    pub estimate: Estimate,
    pub eps_log_p: f64,
    pub resolvable: bool,
}

/// Outcome of an LDP experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub sampler: SamplerKind,
    pub rate_kind: String,
    pub event: EventConfig,
    pub eps_schedule: Vec<f64>,
    pub estimates: Vec<EstimateRow>,
    pub slope: f64,
    pub slope_ci: (f64, f64),
    pub correction: f64,
    pub rate_inf: f64,
    pub tol: f64,
    pub verdict: String,
}

impl RateReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    /// Rows `eps,p_hat,se,eps_log_p`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("eps,p_hat,se,eps_log_p\n");
        for r in &self.estimates {
            out.push_str(&format!("{},{},{},{}\n", r.estimate.epsilon, r.estimate.p_hat, r.estimate.se, r.eps_log_p));
        }
        out
    }
}

fn estimate_at(sampler: &Sampler, event: &EventSet, eps: f64, cfg: &ExperimentConfig, k: usize) -> Result<Estimate> {
    let shifted = |sampler: &Sampler| -> Result<Estimate> {
        let shifts = ShiftSet::from_event(&sampler.coupling()?, event)?;
        event_probability(sampler, event, eps, cfg.n, Some(&shifts), derive_seed(cfg.seed, 2 * k as u64 + 1))
    };
    if matches!(event, EventSet::Endpoint { .. }) {
        return event_probability(sampler, event, eps, cfg.n, None, derive_seed(cfg.seed, 2 * k as u64));
    }
    match cfg.importance {
        ImportanceMode::Always => shifted(sampler),
        ImportanceMode::Never => event_probability(sampler, event, eps, cfg.n, None, derive_seed(cfg.seed, 2 * k as u64)),
        ImportanceMode::Auto => {
            let plain = event_probability(sampler, event, eps, cfg.n, None, derive_seed(cfg.seed, 2 * k as u64))?;
            if plain.p_hat < AUTO_SHIFT_THRESHOLD { shifted(sampler) } else { Ok(plain) }
        }
    }
}

/// Solves the transport problems the sampler and rate need, estimates the
/// event probability at every ε (concurrently), fits the slope and compares
/// it with the rate infimum.
pub fn run_ldp_experiment(cfg: &ExperimentConfig, base_dir: Option<&FsPath>) -> Result<RateReport> {
    cfg.validate()?;
    let event = cfg.event.build()?;
    let inst = &cfg.instance;
    let measures = match inst.sampler {
        SamplerKind::Bridge => None,
        _ => Some((
            inst.mu0.as_ref().expect("validated").load(base_dir)?,
            inst.mu1.as_ref().expect("validated").load(base_dir)?,
        )),
    };

    let (rate_inf, rate_kind) = match (inst.sampler, &measures) {
        (SamplerKind::Bridge, _) => {
            let (x, y) = (inst.x.as_ref().expect("validated"), inst.y.as_ref().expect("validated"));
            (inf_rate_over_event(&event, RateSpec::Jxy { x, y })?.value, "Jxy")
        }
        (SamplerKind::Schrodinger, Some((mu0, mu1))) => {
            let (_, duals) = ot_solve_exact(mu0, mu1)?;
            (inf_rate_over_event(&event, RateSpec::I { duals: &duals, mu0, mu1 })?.value, "I")
        }
        (SamplerKind::Mixture, Some((mu0, mu1))) => {
            let support = crate::rates::support_pairs(&Coupling::product(mu0, mu1)?);
            (inf_rate_over_event(&event, RateSpec::Jmix { support: &support })?.value, "Jmix")
        }
        _ => unreachable!("measures loaded for transport samplers"),
    };

    let estimates = cfg
        .schedule
        .par_iter()
        .enumerate()
        .map(|(k, &eps)| {
            let sampler = match (inst.sampler, &measures) {
                (SamplerKind::Bridge, _) => Sampler::Bridge {
                    x: inst.x.clone().expect("validated"),
                    y: inst.y.clone().expect("validated"),
                },
                (SamplerKind::Schrodinger, Some((mu0, mu1))) => {
                    let sol = sinkhorn(mu0, mu1, eps, SINKHORN_TOL, DEFAULT_MAX_ITER)?;
                    Sampler::Schrodinger { plan: eot_plan(&sol.potentials, mu0, mu1, SINKHORN_TOL)? }
                }
                (SamplerKind::Mixture, Some((mu0, mu1))) => Sampler::Mixture { mu0: mu0.clone(), mu1: mu1.clone() },
                _ => unreachable!("measures loaded for transport samplers"),
            };
            estimate_at(&sampler, &event, eps, cfg, k)
        })
        .collect::<Result<Vec<_>>>()?;

    let usable: Vec<&Estimate> = estimates.iter().filter(|e| e.resolvable()).collect();
    if usable.len() < 3 {
        return Err(Error::Solver(format!(
            "only {} of {} epsilons give resolvable estimates",
            usable.len(),
            estimates.len()
        )));
    }
    let fit = ldp_slope_log(
        &usable.iter().map(|e| e.epsilon).collect::<Vec<_>>(),
        &usable.iter().map(|e| e.log_p_hat).collect::<Vec<_>>(),
        &usable.iter().map(|e| e.rel_se).collect::<Vec<_>>(),
    )?;
    let pass = rate_inf.is_finite() && (fit.slope - rate_inf).abs() <= cfg.tol * rate_inf.max(1.0);
    Ok(RateReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_hash: cfg.hash.clone(),
        sampler: inst.sampler,
        rate_kind: rate_kind.to_string(),
        event: cfg.event.clone(),
        eps_schedule: cfg.schedule.clone(),
        estimates: estimates
            .into_iter()
            .map(|e| EstimateRow { eps_log_p: e.eps_log_p(), resolvable: e.resolvable(), estimate: e })
            .collect(),
        slope: fit.slope,
        slope_ci: fit.ci,
        correction: fit.correction,
        rate_inf,
        tol: cfg.tol,
        verdict: if pass { "pass" } else { "fail" }.to_string(),
    })
}
