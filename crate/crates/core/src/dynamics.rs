//! Föllmer drift and Euler–Maruyama simulation of the Schrödinger bridge SDE,
//! plus Girsanov reweighting of Brownian bridges towards a Langevin reference.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{quad_cost_unchecked, sq_dist, DiscreteMeasure};
use crate::paths::{add_geodesic, bridge_noise, Grid, Path, PathEnsemble};
use crate::rng::par_chunks;

/// Number of final Euler steps replaced by an exact bridge to a sampled atom.
pub const CLAMP_STEPS: usize = 10;

/// Data for `ℏ_ε(t, y) = Σ_j w_j e^{ψ_j/ε} N(y; y_j, ε(1−t))`.
#[derive(Debug, Clone)]
pub struct FollmerModel {
    pub mu0: DiscreteMeasure,
    pub mu1: DiscreteMeasure,
    pub epsilon: f64,
    /// Terminal potential on the atoms of `mu1`.
    pub psi: Vec<f64>,
    log_w: Vec<f64>,
}

impl FollmerModel {
    pub fn new(mu0: DiscreteMeasure, mu1: DiscreteMeasure, epsilon: f64, psi: Vec<f64>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
        }
        if psi.len() != mu1.len() {
            return Err(Error::DimensionMismatch { expected: mu1.len(), found: psi.len() });
        }
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("psi must be finite".into()));
        }
        if mu0.dim() != mu1.dim() {
            return Err(Error::DimensionMismatch { expected: mu0.dim(), found: mu1.dim() });
        }
        let log_w = mu1.weights().iter().zip(&psi).map(|(w, p)| w.ln() + p / epsilon).collect();
        Ok(Self { mu0, mu1, epsilon, psi, log_w })
    }

    /// Last time at which the drift may be evaluated for a `steps`-step scheme.
    pub fn clamp_time(steps: usize) -> f64 {
        if steps <= CLAMP_STEPS { 0.0 } else { 1.0 - CLAMP_STEPS as f64 / steps as f64 }
    }

    /// Unnormalised log-probabilities of the terminal atoms given `X(t) = y`.
    fn atom_logits(&self, t: f64, y: &[f64], out: &mut Vec<f64>) {
        let s = self.epsilon * (1.0 - t);
        out.clear();
        out.extend(self.log_w.iter().zip(self.mu1.points()).map(|(lw, yj)| lw - 0.5 * sq_dist(y, yj) / s));
    }
}

fn softmax_in_place(v: &mut [f64]) {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for x in v.iter_mut() {
        *x = (*x - m).exp();
        z += *x;
    }
    for x in v.iter_mut() {
        *x /= z;
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("drift needs t in [0, 1), got {t}")));
    }
    Ok(())
}

/// `log ℏ_ε(t, y)`, the log of the explicit atom sum.
pub fn log_h(model: &FollmerModel, t: f64, y: &[f64]) -> Result<f64> {
    check_time(t)?;
    if y.len() != model.mu1.dim() {
        return Err(Error::DimensionMismatch { expected: model.mu1.dim(), found: y.len() });
    }
    let mut l = Vec::new();
    model.atom_logits(t, y, &mut l);
    let m = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + l.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    let var = model.epsilon * (1.0 - t);
    Ok(lse - 0.5 * y.len() as f64 * (2.0 * std::f64::consts::PI * var).ln())
}

/// `b_ε(t, y) = ε ∇_y log ℏ_ε(t, y) = Σ_j p_j (y_j − y)/(1 − t)`.
pub fn follmer_drift(model: &FollmerModel, t: f64, y: &[f64]) -> Result<Vec<f64>> {
    check_time(t)?;
    if y.len() != model.mu1.dim() {
        return Err(Error::DimensionMismatch { expected: model.mu1.dim(), found: y.len() });
    }
    let mut p = Vec::new();
    let mut out = vec![0.0; y.len()];
    drift_into(model, t, y, &mut p, &mut out);
    Ok(out)
}

fn drift_into(model: &FollmerModel, t: f64, y: &[f64], p: &mut Vec<f64>, out: &mut [f64]) {
    model.atom_logits(t, y, p);
    softmax_in_place(p);
    out.fill(0.0);
    for (pj, yj) in p.iter().zip(model.mu1.points()) {
        for c in 0..y.len() {
            out[c] += pj * (yj[c] - y[c]);
        }
    }
    let inv = 1.0 / (1.0 - t);
    out.iter_mut().for_each(|v| *v *= inv);
}

/// Simulates `dX = b_ε dt + √ε dW`, `X(0) ~ μ0`, with the explicit scheme on
/// `steps` equal intervals until the clamp time, after which the terminal atom is
/// drawn from the softmax and the remaining interval is an exact Brownian bridge to
/// it. Paths are recorded every `record_every` steps.
pub fn euler_maruyama(model: &FollmerModel, n: usize, steps: usize, record_every: usize, seed: u64) -> Result<PathEnsemble> {
    if steps < 2 {
        return Err(Error::InvalidArgument("need at least two steps".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    if record_every == 0 || !steps.is_multiple_of(record_every) {
        return Err(Error::InvalidArgument(format!("record_every={record_every} must divide steps={steps}")));
    }
    let fine = Grid::uniform(steps)?;
    let recorded = Grid::uniform(steps / record_every)?;
    let times = fine.times();
    let d = model.mu0.dim();
    let k_clamp = steps.saturating_sub(CLAMP_STEPS);
    let dt = 1.0 / steps as f64;
    let sd = (model.epsilon * dt).sqrt();
    let start = rand_distr::weighted::WeightedIndex::new(model.mu0.weights()).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let chunks = par_chunks(n, seed, |rng, _, len| {
        let mut p = Vec::with_capacity(model.mu1.len());
        let mut drift = vec![0.0; d];
        let mut x = vec![0.0; d];
        let mut tail = vec![0.0; (steps - k_clamp + 1) * d];
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let mut values = Vec::with_capacity(recorded.len() * d);
            x.copy_from_slice(model.mu0.point(start.sample(rng)));
            values.extend_from_slice(&x);
            for k in 0..k_clamp {
                drift_into(model, times[k], &x, &mut p, &mut drift);
                for c in 0..d {
                    let z: f64 = StandardNormal.sample(rng);
                    x[c] += drift[c] * dt + sd * z;
                }
                if (k + 1) % record_every == 0 {
                    values.extend_from_slice(&x);
                }
            }
            model.atom_logits(times[k_clamp], &x, &mut p);
            softmax_in_place(&mut p);
            let j = sample_categorical(&p, rng);
            let rest: Vec<f64> = times[k_clamp..].iter().map(|t| (t - times[k_clamp]) / (1.0 - times[k_clamp])).collect();
            let scaled_eps = model.epsilon * (1.0 - times[k_clamp]);
            bridge_noise(&rest, d, scaled_eps, rng, &mut tail);
            add_geodesic(&rest, &x, model.mu1.point(j), &mut tail);
            for k in k_clamp + 1..=steps {
                if k % record_every == 0 {
                    values.extend_from_slice(&tail[(k - k_clamp) * d..(k - k_clamp + 1) * d]);
                }
            }
            out.push(Path::new(recorded.clone(), d, values).expect("finite recorded path"));
        }
        out
    });
    Ok(PathEnsemble {
        grid: recorded,
        dim: d,
        epsilon: model.epsilon,
        seed,
        paths: chunks.into_iter().flatten().collect(),
        weights: None,
        normalizer: None,
    })
}

fn sample_categorical<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, pj) in p.iter().enumerate() {
        acc += pj;
        if u < acc {
            return j;
        }
    }
    p.iter().rposition(|v| *v > 0.0).unwrap_or(p.len() - 1)
}

/// Bounded smooth potentials `V: R^d → R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PotentialField {
    Zero,
    /// `V(x) = A Σ_k cos(ω x_k + phase)`.
    Cosine { amplitude: f64, frequency: f64, phase: f64 },
    /// `V(x) = A exp(−|x − center|² / (2 width²))`.
    GaussianBump { amplitude: f64, center: Vec<f64>, width: f64 },
}

impl PotentialField {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match self {
            PotentialField::Zero => Ok(()),
            PotentialField::Cosine { amplitude, frequency, phase } => {
                if finite(*amplitude) && finite(*frequency) && finite(*phase) {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument("non-finite cosine parameters".into()))
                }
            }
            PotentialField::GaussianBump { amplitude, center, width } => {
                if center.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: center.len() });
                }
                if !(finite(*amplitude) && *width > 0.0 && finite(*width)) || !center.iter().all(|c| finite(*c)) {
                    return Err(Error::InvalidArgument("bump needs finite amplitude and width > 0".into()));
                }
                Ok(())
            }
        }
    }

    /// Parses `zero`, `cosine:A,w[,phase]` or `bump:A,width,c1,..,cd`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let nums = || -> Result<Vec<f64>> {
            rest.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
                .collect()
        };
        match name.trim() {
            "zero" => Ok(PotentialField::Zero),
            "cosine" | "cos" => match nums()?.as_slice() {
                [a, w] => Ok(PotentialField::Cosine { amplitude: *a, frequency: *w, phase: 0.0 }),
                [a, w, p] => Ok(PotentialField::Cosine { amplitude: *a, frequency: *w, phase: *p }),
                _ => Err(Error::Parse("cosine takes A,w[,phase]".into())),
            },
            "bump" | "gaussian-bump" => {
                let v = nums()?;
                if v.len() < 3 {
                    return Err(Error::Parse("bump takes A,width,c1,..,cd".into()));
                }
                Ok(PotentialField::GaussianBump { amplitude: v[0], width: v[1], center: v[2..].to_vec() })
            }
            other => Err(Error::Parse(format!("unknown potential family {other:?}"))),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            PotentialField::Zero => 0.0,
            PotentialField::Cosine { amplitude, frequency, phase } => {
                amplitude * x.iter().map(|v| (frequency * v + phase).cos()).sum::<f64>()
            }
            PotentialField::GaussianBump { amplitude, center, width } => {
                amplitude * (-sq_dist(x, center) / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            PotentialField::Zero => vec![0.0; x.len()],
            PotentialField::Cosine { amplitude, frequency, phase } => {
                x.iter().map(|v| -amplitude * frequency * (frequency * v + phase).sin()).collect()
            }
            PotentialField::GaussianBump { center, width, .. } => {
                let v = self.value(x);
                x.iter().zip(center).map(|(a, c)| -v * (a - c) / (width * width)).collect()
            }
        }
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        match self {
            PotentialField::Zero => 0.0,
            PotentialField::Cosine { amplitude, frequency, phase } => {
                -amplitude * frequency * frequency * x.iter().map(|v| (frequency * v + phase).cos()).sum::<f64>()
            }
            PotentialField::GaussianBump { center, width, .. } => {
                let w2 = width * width;
                self.value(x) * (sq_dist(x, center) / (w2 * w2) - x.len() as f64 / w2)
            }
        }
    }

    /// `|∇V(x)|² − ΔV(x)`.
    pub fn girsanov_integrand(&self, x: &[f64]) -> f64 {
        match self {
            PotentialField::Zero => 0.0,
            _ => self.gradient(x).iter().map(|g| g * g).sum::<f64>() - self.laplacian(x),
        }
    }
}

/// `−(ε/2) ∫_{t_a}^{t_b} (|∇V|² − ΔV)(ω(t)) dt` by the trapezoid rule over knots `a..=b`.
pub fn langevin_log_weight_range(path: &Path, v: &PotentialField, epsilon: f64, a: usize, b: usize) -> f64 {
    if matches!(v, PotentialField::Zero) || a >= b {
        return 0.0;
    }
    let t = path.grid().times();
    let f: Vec<f64> = (a..=b).map(|k| v.girsanov_integrand(path.at(k))).collect();
    let integral: f64 = (a..b).map(|k| 0.5 * (t[k + 1] - t[k]) * (f[k - a] + f[k + 1 - a])).sum();
    -0.5 * epsilon * integral
}

pub fn langevin_log_weight(path: &Path, v: &PotentialField, epsilon: f64) -> f64 {
    langevin_log_weight_range(path, v, epsilon, 0, path.grid().intervals())
}

/// `exp{−(ε/2) ∫_0^1 (|∇V|² − ΔV)(ω(t)) dt}`, unnormalised.
pub fn langevin_weight(path: &Path, v: &PotentialField, epsilon: f64) -> f64 {
    langevin_log_weight(path, v, epsilon).exp()
}

/// Monte Carlo estimate of `c_ε(x, y) = −ε log p_ε(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LangevinCost {
    pub value: f64,
    pub se: f64,
    /// `(d ε / 2) log(2π ε)`, the contribution of the Gaussian kernel normaliser.
    pub log_normalizer: f64,
    pub n: usize,
    pub warning: Option<String>,
}

/// Estimates `c_ε(x, y)` from `p_ε = q_ε e^{V(x) − V(y)} E[exp{(ε/2)∫(ΔV − |∇V|²)}]`,
/// the expectation taken over Brownian bridges from `x` to `y` on `grid`.
pub fn langevin_cost(
    x: &[f64],
    y: &[f64],
    v: &PotentialField,
    epsilon: f64,
    grid: &Grid,
    n: usize,
    seed: u64,
) -> Result<LangevinCost> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    v.validate(x.len())?;
    let d = x.len() as f64;
    let log_normalizer = 0.5 * d * epsilon * (2.0 * std::f64::consts::PI * epsilon).ln();
    let base = quad_cost_unchecked(x, y) + log_normalizer - epsilon * (v.value(x) - v.value(y));
    if matches!(v, PotentialField::Zero) {
        return Ok(LangevinCost { value: base, se: 0.0, log_normalizer, n, warning: None });
    }
    let logw = bridge_log_weights(x, y, v, epsilon, grid, n, seed);
    let (log_mean, rel_se) = log_mean_and_rel_se(&logw);
    let value = base - epsilon * log_mean;
    let se = epsilon * rel_se;
    let warning = (se > value.abs() / 10.0).then(|| format!("standard error {se:.3e} exceeds a tenth of |c_eps| = {:.3e}", value.abs()));
    Ok(LangevinCost { value, se, log_normalizer, n, warning })
}

fn bridge_log_weights(x: &[f64], y: &[f64], v: &PotentialField, epsilon: f64, grid: &Grid, n: usize, seed: u64) -> Vec<f64> {
    let times = grid.times();
    let dim = x.len();
    par_chunks(n, seed, |rng, _, len| {
        let mut values = vec![0.0; times.len() * dim];
        (0..len)
            .map(|_| {
                bridge_noise(times, dim, epsilon, rng, &mut values);
                add_geodesic(times, x, y, &mut values);
                let path = Path::new(grid.clone(), dim, values.clone()).expect("finite bridge");
                langevin_log_weight(&path, v, epsilon)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// `log mean(e^l)` and the relative standard error of the mean of `e^l`.
fn log_mean_and_rel_se(l: &[f64]) -> (f64, f64) {
    let m = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = l.len() as f64;
    let scaled: Vec<f64> = l.iter().map(|v| (v - m).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / n;
    let var = if l.len() > 1 { scaled.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m + mean.ln(), (var / n).sqrt() / mean)
}

/// Self-normalised importance sample of the Langevin bridge.
#[derive(Debug, Clone)]
pub struct LangevinBridgeSample {
    pub ensemble: PathEnsemble,
    pub ess: f64,
    pub warning: Option<String>,
}

/// Brownian bridges from `x` to `y` weighted by [`langevin_weight`], normalised to sum to one.
pub fn sample_langevin_bridge(
    x: &[f64],
    y: &[f64],
    v: &PotentialField,
    epsilon: f64,
    grid: &Grid,
    n: usize,
    seed: u64,
) -> Result<LangevinBridgeSample> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    v.validate(x.len())?;
    let plan = crate::eot::Coupling::pinned(x.to_vec(), y.to_vec())?;
    let mut ensemble = crate::paths::sample_schrodinger_bridge(&plan, epsilon, grid, n, seed)?;
    let logw: Vec<f64> = ensemble.paths.iter().map(|p| langevin_log_weight(p, v, epsilon)).collect();
    let m = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logw.iter().map(|l| (l - m).exp()).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    ensemble.normalizer = Some(m.exp() * total / n as f64);
    ensemble.weights = Some(weights);
    let warning = (ess < n as f64 / 100.0).then(|| format!("effective sample size {ess:.1} below n/100"));
    Ok(LangevinBridgeSample { ensemble, ess, warning })
}
