//! Rate functionals on path space, Hopf-Lax propagation of Kantorovich
//! potentials, and rate infima over tubes, endpoint sets and two-time sets.

use serde::{Deserialize, Serialize};

use crate::eot::Coupling;
use crate::error::{Error, Result};
use crate::measures::{quad_cost_unchecked, sq_dist, DiscreteMeasure, SNAP_TOL};
use crate::ot_dual::DualPotentials;
use crate::paths::{h_norm_sq, Grid, Path};

/// Stationarity target of the clamped quadratic program.
pub const QP_STATIONARITY_TOL: f64 = 1e-10;
const QP_MAX_SWEEPS: usize = 500_000;

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && sq_dist(a, b).sqrt() <= SNAP_TOL
}

/// `‖h‖²_H/2 − c(x, y)` when `h` runs from `x` to `y`, otherwise `+∞`.
pub fn rate_j_xy(path: &Path, x: &[f64], y: &[f64]) -> f64 {
    if !same_point(path.start(), x) || !same_point(path.end(), y) {
        return f64::INFINITY;
    }
    (0.5 * h_norm_sq(path) - quad_cost_unchecked(x, y)).max(0.0)
}

/// `J_xy` with `(x, y) = (h(0), h(1))` required to be one of `support`.
pub fn rate_j_mix(path: &Path, support: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let (h0, h1) = (path.start(), path.end());
    if support.iter().any(|(x, y)| same_point(h0, x) && same_point(h1, y)) {
        (0.5 * h_norm_sq(path) - quad_cost_unchecked(h0, h1)).max(0.0)
    } else {
        f64::INFINITY
    }
}

/// Atom pairs carrying positive mass under `plan`.
pub fn support_pairs(plan: &Coupling) -> Vec<(Vec<f64>, Vec<f64>)> {
    plan.support()
        .into_iter()
        .map(|(i, j, _)| (plan.source().point(i).to_vec(), plan.target().point(j).to_vec()))
        .collect()
}

/// `‖h‖²_H/2 − ψ^c(h(0)) − ψ(h(1))`, infinite unless both endpoints are atoms.
pub fn rate_i(path: &Path, duals: &DualPotentials, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> f64 {
    match (mu0.snap(path.start()), mu1.snap(path.end())) {
        (Some(i), Some(j)) => 0.5 * h_norm_sq(path) - duals.psi_c[i] - duals.psi[j],
        _ => f64::INFINITY,
    }
}

/// `c(x_i, y_j) − ψ^c(x_i) − ψ(y_j)`.
pub fn phi_gap(i: usize, j: usize, duals: &DualPotentials, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<f64> {
    crate::ot_dual::c_superdiff_residual(duals, mu0, mu1, (i, j))
}

/// `Q_t f(y) = min_x { c(x, y)/t + f(x) }` over `atoms`. Entries of `f` equal to
/// `+∞` drop out. At `t = 0` every query must be an atom and `f` is returned there.
pub fn hopf_lax(f: &[f64], atoms: &[Vec<f64>], t: f64, queries: &[Vec<f64>]) -> Result<Vec<f64>> {
    if f.len() != atoms.len() {
        return Err(Error::InvalidArgument(format!("{} values for {} atoms", f.len(), atoms.len())));
    }
    if !f.iter().any(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("f is not finite on any atom".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    let dim = atoms[0].len();
    queries
        .iter()
        .map(|y| {
            if y.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: y.len() });
            }
            if t == 0.0 {
                return atoms
                    .iter()
                    .position(|x| same_point(x, y))
                    .map(|i| f[i])
                    .ok_or_else(|| Error::InvalidArgument(format!("Q_0 queried off the atoms at {y:?}")));
            }
            Ok(atoms
                .iter()
                .zip(f)
                .filter(|(_, v)| **v != f64::INFINITY)
                .map(|(x, v)| quad_cost_unchecked(x, y) / t + v)
                .fold(f64::INFINITY, f64::min))
        })
        .collect()
}

/// `φ_s(x) = −Q_s(−ψ^c)(x)`; at `s = 0`, `ψ^c` on atoms and `−∞` elsewhere.
pub fn propagated_phi(s: f64, x: &[f64], duals: &DualPotentials, mu0: &DiscreteMeasure) -> Result<f64> {
    if s == 0.0 {
        return Ok(mu0.snap(x).map_or(f64::NEG_INFINITY, |i| duals.psi_c[i]));
    }
    let neg: Vec<f64> = duals.psi_c.iter().map(|v| -v).collect();
    Ok(-hopf_lax(&neg, mu0.points(), s, &[x.to_vec()])?[0])
}

/// `ψ_t(y) = −Q_{1−t}(−ψ)(y)`; at `t = 1`, `ψ` on atoms and `−∞` elsewhere.
pub fn propagated_psi(t: f64, y: &[f64], duals: &DualPotentials, mu1: &DiscreteMeasure) -> Result<f64> {
    if t == 1.0 {
        return Ok(mu1.snap(y).map_or(f64::NEG_INFINITY, |j| duals.psi[j]));
    }
    let neg: Vec<f64> = duals.psi.iter().map(|v| -v).collect();
    Ok(-hopf_lax(&neg, mu1.points(), 1.0 - t, &[y.to_vec()])?[0])
}

fn check_times(s: f64, t: f64) -> Result<()> {
    if !(0.0 <= s && s < t && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 <= s < t <= 1, got s={s}, t={t}")));
    }
    Ok(())
}

/// `I_st(x, y) = c(x, y)/(t − s) − φ_s(x) − ψ_t(y)`.
pub fn two_point_rate(
    s: f64,
    t: f64,
    x: &[f64],
    y: &[f64],
    duals: &DualPotentials,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
) -> Result<f64> {
    check_times(s, t)?;
    if x.len() != mu0.dim() || y.len() != mu1.dim() {
        return Err(Error::DimensionMismatch { expected: mu0.dim(), found: x.len().max(y.len()) });
    }
    let phi = propagated_phi(s, x, duals, mu0)?;
    let psi = propagated_psi(t, y, duals, mu1)?;
    if phi == f64::NEG_INFINITY || psi == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(quad_cost_unchecked(x, y) / (t - s) - phi - psi)
}

/// `|u − v|² / (2 dt)`, with a zero-length leg costing 0 only when `u = v`.
fn leg_cost(u: &[f64], v: &[f64], dt: f64) -> f64 {
    if dt > 0.0 {
        quad_cost_unchecked(u, v) / dt
    } else if same_point(u, v) {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Three-leg energy `c^{0,s}(x', x) + c^{s,t}(x, y) + c^{t,1}(y, y')`.
pub fn three_leg_cost(xp: &[f64], x: &[f64], y: &[f64], yp: &[f64], s: f64, t: f64) -> f64 {
    leg_cost(xp, x, s) + leg_cost(x, y, t - s) + leg_cost(y, yp, 1.0 - t)
}

/// The piecewise-linear path through `(0, x'), (s, x), (t, y), (1, y')`.
pub fn constrained_optimal_path(
    xp: &[f64],
    x: &[f64],
    y: &[f64],
    yp: &[f64],
    s: f64,
    t: f64,
    grid: &Grid,
) -> Result<Path> {
    check_times(s, t)?;
    let d = xp.len();
    if x.len() != d || y.len() != d || yp.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.len().max(y.len()).max(yp.len()) });
    }
    if grid.index_of(s).is_none() || grid.index_of(t).is_none() {
        return Err(Error::InvalidArgument(format!("grid lacks knot s={s} or t={t}")));
    }
    if (s == 0.0 && !same_point(xp, x)) || (t == 1.0 && !same_point(y, yp)) {
        return Err(Error::InvalidArgument("zero-length leg with distinct endpoints".into()));
    }
    let mut knots = vec![(0.0, xp.to_vec())];
    if s > 0.0 {
        knots.push((s, x.to_vec()));
    }
    knots.push((t, y.to_vec()));
    if t < 1.0 {
        knots.push((1.0, yp.to_vec()));
    }
    Path::from_knots(grid.clone(), &knots)
}

/// A set of endpoint (or two-time) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PairRegion {
    /// Finite list of `(x, y)` pairs.
    Points { pairs: Vec<(Vec<f64>, Vec<f64>)> },
    /// `[x_lo, x_hi] × [y_lo, y_hi]`, componentwise.
    Rect { x_lo: Vec<f64>, x_hi: Vec<f64>, y_lo: Vec<f64>, y_hi: Vec<f64> },
}

impl PairRegion {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            PairRegion::Points { pairs } => {
                if pairs.is_empty() {
                    return Err(Error::InvalidArgument("empty pair list".into()));
                }
                if pairs.iter().any(|(x, y)| x.len() != dim || y.len() != dim) {
                    return Err(Error::DimensionMismatch { expected: dim, found: 0 });
                }
            }
            PairRegion::Rect { x_lo, x_hi, y_lo, y_hi } => {
                for v in [x_lo, x_hi, y_lo, y_hi] {
                    if v.len() != dim {
                        return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
                    }
                }
                if x_lo.iter().zip(x_hi).chain(y_lo.iter().zip(y_hi)).any(|(a, b)| !(a <= b)) {
                    return Err(Error::InvalidArgument("rectangle with lo > hi".into()));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64], y: &[f64]) -> bool {
        match self {
            PairRegion::Points { pairs } => pairs.iter().any(|(a, b)| same_point(a, x) && same_point(b, y)),
            PairRegion::Rect { x_lo, x_hi, y_lo, y_hi } => {
                in_box(x, x_lo, x_hi) && in_box(y, y_lo, y_hi)
            }
        }
    }
}

fn in_box(x: &[f64], lo: &[f64], hi: &[f64]) -> bool {
    x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l - SNAP_TOL <= *v && *v <= *h + SNAP_TOL)
}

/// Path events.
#[derive(Debug, Clone, PartialEq)]
pub enum EventSet {
    /// `{h : |h(t_k) − center(t_k)|_∞ < radius}` on the center's grid.
    Tube { center: Path, radius: f64 },
    /// `{h : (h(0), h(1)) ∈ region}`.
    Endpoint { region: PairRegion },
    /// `{h : (h(s), h(t)) ∈ region}`.
    TwoPoint { s: f64, t: f64, region: PairRegion },
}

impl EventSet {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            EventSet::Tube { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidArgument(format!("tube radius must be > 0, got {radius}")));
                }
                if center.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: center.dim() });
                }
                Ok(())
            }
            EventSet::Endpoint { region } => region.validate(dim),
            EventSet::TwoPoint { s, t, region } => {
                check_times(*s, *t)?;
                region.validate(dim)
            }
        }
    }

    /// Whether `path` lies in the event; two-time events evaluate the path by
    /// interpolation.
    pub fn contains(&self, path: &Path) -> bool {
        match self {
            EventSet::Tube { center, radius } => {
                center.grid().len() == path.grid().len()
                    && center
                        .values()
                        .iter()
                        .zip(path.values())
                        .all(|(c, v)| (c - v).abs() < *radius)
            }
            EventSet::Endpoint { region } => region.contains(path.start(), path.end()),
            EventSet::TwoPoint { s, t, region } => region.contains(&path.eval(*s), &path.eval(*t)),
        }
    }
}

/// Which rate functional to minimise.
#[derive(Debug, Clone, Copy)]
pub enum RateSpec<'a> {
    /// Pinned bridge from `x` to `y`.
    Jxy { x: &'a [f64], y: &'a [f64] },
    /// Mixture of bridges over a finite support.
    Jmix { support: &'a [(Vec<f64>, Vec<f64>)] },
    /// Schrödinger bridge rate built from Kantorovich potentials.
    I { duals: &'a DualPotentials, mu0: &'a DiscreteMeasure, mu1: &'a DiscreteMeasure },
}

impl RateSpec<'_> {
    /// Admissible endpoint pairs with offsets: the rate of `h` between `(x, y)`
    /// is `‖h‖²_H/2 − offset`.
    fn candidates(&self) -> Vec<(Vec<f64>, Vec<f64>, f64)> {
        match *self {
            RateSpec::Jxy { x, y } => vec![(x.to_vec(), y.to_vec(), quad_cost_unchecked(x, y))],
            RateSpec::Jmix { support } => support
                .iter()
                .map(|(x, y)| (x.clone(), y.clone(), quad_cost_unchecked(x, y)))
                .collect(),
            RateSpec::I { duals, mu0, mu1 } => {
                let mut out = Vec::with_capacity(mu0.len() * mu1.len());
                for i in 0..mu0.len() {
                    for j in 0..mu1.len() {
                        out.push((mu0.point(i).to_vec(), mu1.point(j).to_vec(), duals.psi_c[i] + duals.psi[j]));
                    }
                }
                out
            }
        }
    }

    fn dim(&self) -> usize {
        match *self {
            RateSpec::Jxy { x, .. } => x.len(),
            RateSpec::Jmix { support } => support.first().map_or(0, |p| p.0.len()),
            RateSpec::I { mu0, .. } => mu0.dim(),
        }
    }
}

/// Rate infimum over an event with a minimising path.
#[derive(Debug, Clone, PartialEq)]
pub struct InfRate {
    pub value: f64,
    pub argmin: Option<Path>,
    /// Endpoints `(h(0), h(1))` of the minimiser.
    pub endpoints: Option<(Vec<f64>, Vec<f64>)>,
}

impl InfRate {
    fn infeasible() -> Self {
        Self { value: f64::INFINITY, argmin: None, endpoints: None }
    }
}

/// Grid on which a two-time event is resolved: `{0, s, t, 1}` without repeats.
pub fn two_point_grid(s: f64, t: f64) -> Result<Grid> {
    let mut knots = vec![0.0];
    for k in [s, t, 1.0] {
        if *knots.last().unwrap() != k {
            knots.push(k);
        }
    }
    Grid::new(knots)
}

/// Cheapest path in `event` from `x` to `y` and its action `‖h‖²_H/2`, or
/// `None` if no path of the event joins `x` to `y`.
pub fn event_argmin_for_pair(event: &EventSet, x: &[f64], y: &[f64]) -> Result<Option<(Path, f64)>> {
    let dim = x.len();
    event.validate(dim)?;
    if y.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: y.len() });
    }
    match event {
        EventSet::Tube { center, radius } => {
            let inside = |p: &[f64], c: &[f64]| p.iter().zip(c).all(|(a, b)| (a - b).abs() < *radius);
            if !inside(x, center.start()) || !inside(y, center.end()) {
                return Ok(None);
            }
            let lo: Vec<f64> = center.values().iter().map(|c| c - radius).collect();
            let hi: Vec<f64> = center.values().iter().map(|c| c + radius).collect();
            let (values, energy) = box_qp(center.grid().times(), dim, &lo, &hi, x, y)?;
            Ok(Some((Path::new(center.grid().clone(), dim, values)?, 0.5 * energy)))
        }
        EventSet::Endpoint { region } => {
            if !region.contains(x, y) {
                return Ok(None);
            }
            let path = Path::from_points(Grid::uniform(1)?, &[x.to_vec(), y.to_vec()])?;
            Ok(Some((path, quad_cost_unchecked(x, y))))
        }
        EventSet::TwoPoint { s, t, region } => {
            let (s, t) = (*s, *t);
            let grid = two_point_grid(s, t)?;
            match region {
                PairRegion::Points { pairs } => {
                    let mut best: Option<(usize, f64)> = None;
                    for (k, (bx, by)) in pairs.iter().enumerate() {
                        let v = three_leg_cost(x, bx, by, y, s, t);
                        if v.is_finite() && best.is_none_or(|b| v < b.1) {
                            best = Some((k, v));
                        }
                    }
                    match best {
                        Some((k, v)) => {
                            let (bx, by) = &pairs[k];
                            Ok(Some((constrained_optimal_path(x, bx, by, y, s, t, &grid)?, v)))
                        }
                        None => Ok(None),
                    }
                }
                PairRegion::Rect { x_lo, x_hi, y_lo, y_hi } => {
                    let times = grid.times();
                    let mut lo = Vec::with_capacity(times.len() * dim);
                    let mut hi = Vec::with_capacity(times.len() * dim);
                    for &k in times {
                        for c in 0..dim {
                            let (l, h) = if k == s {
                                (x_lo[c], x_hi[c])
                            } else if k == t {
                                (y_lo[c], y_hi[c])
                            } else {
                                (f64::NEG_INFINITY, f64::INFINITY)
                            };
                            lo.push(l);
                            hi.push(h);
                        }
                    }
                    let last = times.len() - 1;
                    let fits = |p: &[f64], row: usize| {
                        p.iter().enumerate().all(|(c, v)| lo[row * dim + c] - SNAP_TOL <= *v && *v <= hi[row * dim + c] + SNAP_TOL)
                    };
                    if !fits(x, 0) || !fits(y, last) {
                        return Ok(None);
                    }
                    let (values, energy) = box_qp(times, dim, &lo, &hi, x, y)?;
                    Ok(Some((Path::new(grid.clone(), dim, values)?, 0.5 * energy)))
                }
            }
        }
    }
}

/// `inf_{h ∈ A} rate(h)`. Infeasible events give `+∞`.
pub fn inf_rate_over_event(event: &EventSet, rate: RateSpec<'_>) -> Result<InfRate> {
    let dim = rate.dim();
    if dim == 0 {
        return Err(Error::InvalidArgument("rate has an empty support".into()));
    }
    event.validate(dim)?;
    let mut best = InfRate::infeasible();
    for (x, y, offset) in rate.candidates() {
        if let Some((path, action)) = event_argmin_for_pair(event, &x, &y)? {
            let v = action - offset;
            if v < best.value {
                best = InfRate { value: v, argmin: Some(path), endpoints: Some((x, y)) };
            }
        }
    }
    Ok(best)
}
/// `min Σ_k |h_{k+1} − h_k|²/Δt_k` subject to `lo ≤ h ≤ hi` componentwise at
/// interior knots and `h(0) = x`, `h(1) = y`. Returns the knot-major values and
/// the minimal energy.
pub fn box_qp(times: &[f64], dim: usize, lo: &[f64], hi: &[f64], x: &[f64], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = times.len();
    if lo.len() != n * dim || hi.len() != n * dim || x.len() != dim || y.len() != dim {
        return Err(Error::InvalidArgument("box bounds do not match the grid".into()));
    }
    let mut values = vec![0.0; n * dim];
    let mut energy = 0.0;
    let mut l = vec![0.0; n];
    let mut u = vec![0.0; n];
    for c in 0..dim {
        for k in 0..n {
            l[k] = lo[k * dim + c];
            u[k] = hi[k * dim + c];
            if l[k] > u[k] {
                return Err(Error::InvalidArgument("box with lo > hi".into()));
            }
        }
        let h = box_qp_1d(times, &l, &u, x[c], y[c])?;
        for k in 0..n {
            values[k * dim + c] = h[k];
        }
        energy += energy_1d(times, &h);
    }
    Ok((values, energy))
}

fn energy_1d(times: &[f64], h: &[f64]) -> f64 {
    (1..h.len()).map(|k| (h[k] - h[k - 1]).powi(2) / (times[k] - times[k - 1])).sum()
}

fn box_qp_1d(times: &[f64], lo: &[f64], hi: &[f64], a: f64, b: f64) -> Result<Vec<f64>> {
    let n = times.len();
    let m = n - 1;
    let mut h: Vec<f64> = times.iter().map(|t| (1.0 - t) * a + t * b).collect();
    h[0] = a;
    h[m] = b;
    if m == 1 {
        return Ok(h);
    }
    for k in 1..m {
        h[k] = h[k].clamp(lo[k], hi[k]);
    }
    let inv: Vec<f64> = (1..n).map(|k| 1.0 / (times[k] - times[k - 1])).collect();
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / m as f64).sin());
    let scale = 1.0 + h.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let target = |h: &[f64], k: usize| (h[k - 1] * inv[k - 1] + h[k + 1] * inv[k]) / (inv[k - 1] + inv[k]);

    let mut converged = false;
    for _ in 0..QP_MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for k in 1..m {
            let next = (h[k] + omega * (target(&h, k) - h[k])).clamp(lo[k], hi[k]);
            change = change.max((next - h[k]).abs());
            h[k] = next;
        }
        if change <= 1e-14 * scale {
            let stat = (1..m)
                .map(|k| {
                    let step = target(&h, k) - h[k];
                    if (step > 0.0 && h[k] >= hi[k]) || (step < 0.0 && h[k] <= lo[k]) { 0.0 } else { step.abs() }
                })
                .fold(0.0, f64::max);
            if stat <= QP_STATIONARITY_TOL * scale {
                converged = true;
                break;
            }
        }
    }
    for tol in [1e-9, 1e-7, 1e-5] {
        if let Some(p) = polish(times, lo, hi, &h, tol * scale) {
            if energy_1d(times, &p) <= energy_1d(times, &h) + 1e-12 * scale * scale {
                return Ok(p);
            }
        }
    }
    if converged {
        Ok(h)
    } else {
        Err(Error::NotConverged { iterations: QP_MAX_SWEEPS, residual: f64::NAN })
    }
}

/// Rebuilds the solution from its active set: fixed knots sit on their bound,
/// free knots interpolate linearly. Returns it if it satisfies the KKT conditions.
fn polish(times: &[f64], lo: &[f64], hi: &[f64], h: &[f64], tol: f64) -> Option<Vec<f64>> {
    let m = times.len() - 1;
    let mut p = h.to_vec();
    let mut fixed = vec![0usize];
    for k in 1..m {
        if (h[k] - hi[k]).abs() <= tol {
            p[k] = hi[k];
            fixed.push(k);
        } else if (h[k] - lo[k]).abs() <= tol {
            p[k] = lo[k];
            fixed.push(k);
        }
    }
    fixed.push(m);
    for w in fixed.windows(2) {
        let (i, j) = (w[0], w[1]);
        for k in i + 1..j {
            let r = (times[k] - times[i]) / (times[j] - times[i]);
            p[k] = p[i] + r * (p[j] - p[i]);
        }
    }
    let slack = 1e-12 * (1.0 + p.iter().fold(0.0f64, |s, v| s.max(v.abs())));
    for k in 1..m {
        if p[k] < lo[k] - slack || p[k] > hi[k] + slack {
            return None;
        }
        p[k] = p[k].clamp(lo[k], hi[k]);
    }
    for &k in &fixed[1..fixed.len() - 1] {
        let left = (p[k] - p[k - 1]) / (times[k] - times[k - 1]);
        let right = (p[k + 1] - p[k]) / (times[k + 1] - times[k]);
        let g = left - right;
        let kkt_tol = 1e-9 * (1.0 + left.abs() + right.abs());
        let ok = if lo[k] == hi[k] {
            true
        } else if p[k] == hi[k] {
            g <= kkt_tol
        } else {
            g >= -kkt_tol
        };
        if !ok {
            return None;
        }
    }
    Some(p)
}
