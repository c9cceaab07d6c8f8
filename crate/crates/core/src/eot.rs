//! Entropic optimal transport by log-domain Sinkhorn iteration.
//!
//! The potentials `(φ, ψ)` solve the Schrödinger system
//!
//! ```text
//! Σ_j v_j exp((φ_i + ψ_j − c_ij)/ε) = 1   for every source atom i
//! Σ_i u_i exp((φ_i + ψ_j − c_ij)/ε) = 1   for every target atom j
//! ```
//!
//! and the plan is `π_ij = u_i v_j exp((φ_i + ψ_j − c_ij)/ε)`. The stopping
//! rule is the largest absolute log-residual of either identity, so the
//! returned pair satisfies both to the requested tolerance at every atom.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{cost_matrix, CostMatrix, DiscreteMeasure};
use crate::ot_dual::DualPotentials;

/// Default cap on Sinkhorn sweeps (summed over the annealing stages).
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Plan entries above this are treated as carrying mass.
pub const SUPPORT_MASS_TOL: f64 = 1e-13;

/// Entropic potentials for one noise level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialPair {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub epsilon: f64,
}

impl PotentialPair {
    /// `(φ + a, ψ − a)`; leaves the plan unchanged.
    pub fn shifted(&self, a: f64) -> Self {
        Self {
            phi: self.phi.iter().map(|v| v + a).collect(),
            psi: self.psi.iter().map(|v| v - a).collect(),
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornSolution {
    pub potentials: PotentialPair,
    /// Max over atoms of both Schrödinger-system log-residuals.
    pub residual: f64,
    /// Total sweeps including the annealing stages.
    pub iterations: usize,
}

/// A transport plan between two discrete measures, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    plan: Vec<f64>,
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    epsilon: Option<f64>,
}

impl Coupling {
    pub fn new(
        plan: Vec<f64>,
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        epsilon: Option<f64>,
    ) -> Result<Self> {
        if plan.len() != source.len() * target.len() {
            return Err(Error::InvalidArgument(format!(
                "plan has {} entries, expected {}x{}",
                plan.len(),
                source.len(),
                target.len()
            )));
        }
        if source.dim() != target.dim() {
            return Err(Error::DimensionMismatch { expected: source.dim(), found: target.dim() });
        }
        if plan.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidArgument("plan entries must be finite and nonnegative".into()));
        }
        Ok(Self { plan, source, target, epsilon })
    }

    /// The independent coupling `μ0 ⊗ μ1`.
    pub fn product(source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<Self> {
        let plan = source
            .weights()
            .iter()
            .flat_map(|u| target.weights().iter().map(move |v| u * v))
            .collect();
        Self::new(plan, source.clone(), target.clone(), None)
    }

    /// The one-pair plan `δ_(x, y)`.
    pub fn pinned(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0], DiscreteMeasure::dirac(x)?, DiscreteMeasure::dirac(y)?, None)
    }

    pub fn rows(&self) -> usize {
        self.source.len()
    }

    pub fn cols(&self) -> usize {
        self.target.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.target.len() + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.plan
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.chunks(self.cols()).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        for row in self.plan.chunks(self.cols()) {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        out
    }

    /// Largest deviation of either marginal from the prescribed weights.
    pub fn marginal_error(&self) -> f64 {
        let r = self.row_sums().iter().zip(self.source.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let c = self.col_sums().iter().zip(self.target.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.max(c)
    }

    /// `(i, j, mass)` for entries above [`SUPPORT_MASS_TOL`].
    pub fn support(&self) -> Vec<(usize, usize, f64)> {
        let n = self.cols();
        self.plan
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > SUPPORT_MASS_TOL)
            .map(|(k, &p)| (k / n, k % n, p))
            .collect()
    }

    /// `Σ π_ij c_ij`.
    pub fn transport_cost(&self, cost: &CostMatrix) -> f64 {
        self.plan.iter().zip(cost.as_slice()).map(|(p, c)| p * c).sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.plan.chunks(self.cols()).map(|r| r.to_vec()).collect()
    }
}

#[inline]
fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|a| (a - m).exp()).sum::<f64>().ln()
}

struct Workspace<'a> {
    cost: &'a CostMatrix,
    log_u: Vec<f64>,
    log_v: Vec<f64>,
}

impl Workspace<'_> {
    /// `φ_i = −ε log Σ_j v_j exp((ψ_j − c_ij)/ε)`.
    fn phi_from_psi(&self, psi: &[f64], eps: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.cost.row(i);
            let terms = self.log_v.iter().zip(psi).zip(row).map(|((lv, p), c)| lv + (p - c) / eps);
            *o = -eps * log_sum_exp(terms);
        }
    }

    /// `ψ_j = −ε log Σ_i u_i exp((φ_i − c_ij)/ε)`.
    fn psi_from_phi(&self, phi: &[f64], eps: f64, out: &mut [f64]) {
        let cols = self.cost.cols();
        for (j, o) in out.iter_mut().enumerate() {
            let terms = self
                .log_u
                .iter()
                .zip(phi)
                .enumerate()
                .map(|(i, (lu, p))| lu + (p - self.cost.as_slice()[i * cols + j]) / eps);
            *o = -eps * log_sum_exp(terms);
        }
    }
}

/// Max over atoms of the log-residuals of both Schrödinger identities.
pub fn schrodinger_residuals(
    pot: &PotentialPair,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
) -> Result<(f64, f64)> {
    check_shapes(pot, mu0, mu1)?;
    let cost = cost_matrix(mu0, mu1)?;
    Ok(residuals_with(&cost, pot, mu0, mu1))
}

fn residuals_with(cost: &CostMatrix, pot: &PotentialPair, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> (f64, f64) {
    let ws = Workspace {
        cost,
        log_u: mu0.weights().iter().map(|w| w.ln()).collect(),
        log_v: mu1.weights().iter().map(|w| w.ln()).collect(),
    };
    let eps = pot.epsilon;
    let mut phi_star = vec![0.0; mu0.len()];
    ws.phi_from_psi(&pot.psi, eps, &mut phi_star);
    let mut psi_star = vec![0.0; mu1.len()];
    ws.psi_from_phi(&pot.phi, eps, &mut psi_star);
    // log Σ_j v_j e^{(φ_i+ψ_j−c_ij)/ε} = (φ_i − φ*_i)/ε, likewise for columns.
    let row = pot.phi.iter().zip(&phi_star).map(|(a, b)| ((a - b) / eps).abs()).fold(0.0, f64::max);
    let col = pot.psi.iter().zip(&psi_star).map(|(a, b)| ((a - b) / eps).abs()).fold(0.0, f64::max);
    (row, col)
}

fn check_shapes(pot: &PotentialPair, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<()> {
    if pot.phi.len() != mu0.len() || pot.psi.len() != mu1.len() {
        return Err(Error::InvalidArgument(format!(
            "potentials of length ({}, {}) for measures with ({}, {}) atoms",
            pot.phi.len(),
            pot.psi.len(),
            mu0.len(),
            mu1.len()
        )));
    }
    if !(pot.epsilon > 0.0 && pot.epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", pot.epsilon)));
    }
    if pot.phi.iter().chain(&pot.psi).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite potential".into()));
    }
    Ok(())
}

/// Solves the Schrödinger system at noise level `epsilon`.
///
/// Without a warm start the solver anneals: it begins at `max(ε, max c)`
/// and halves ε until the target is reached, warm-starting every stage.
pub fn sinkhorn(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SinkhornSolution> {
    sinkhorn_warm(mu0, mu1, epsilon, None, tol, max_iter)
}

pub fn sinkhorn_warm(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    epsilon: f64,
    init: Option<&PotentialPair>,
    tol: f64,
    max_iter: usize,
) -> Result<SinkhornSolution> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let cost = cost_matrix(mu0, mu1)?;
    let ws = Workspace {
        cost: &cost,
        log_u: mu0.weights().iter().map(|w| w.ln()).collect(),
        log_v: mu1.weights().iter().map(|w| w.ln()).collect(),
    };

    let mut phi = vec![0.0; mu0.len()];
    let mut psi = vec![0.0; mu1.len()];
    let mut stages = Vec::new();
    match init {
        Some(p) => {
            if p.phi.len() != mu0.len() || p.psi.len() != mu1.len() {
                return Err(Error::InvalidArgument("warm start has the wrong shape".into()));
            }
            phi.copy_from_slice(&p.phi);
        }
        None => {
            let mut e = cost.max().max(epsilon);
            while e > 2.0 * epsilon {
                stages.push(e);
                e *= 0.5;
            }
        }
    }
    stages.push(epsilon);

    let mut iterations = 0;
    let mut phi_next = vec![0.0; mu0.len()];
    let last = stages.len() - 1;
    for (k, &eps) in stages.iter().enumerate() {
        let stage_tol = if k == last { tol } else { tol.max(1e-6) };
        ws.psi_from_phi(&phi, eps, &mut psi);
        loop {
            ws.phi_from_psi(&psi, eps, &mut phi_next);
            let residual = phi.iter().zip(&phi_next).map(|(a, b)| ((a - b) / eps).abs()).fold(0.0, f64::max);
            if !residual.is_finite() {
                return Err(Error::NotConverged { iterations, residual });
            }
            if residual <= stage_tol {
                break;
            }
            if iterations >= max_iter {
                return Err(Error::NotConverged { iterations, residual });
            }
            std::mem::swap(&mut phi, &mut phi_next);
            ws.psi_from_phi(&phi, eps, &mut psi);
            iterations += 1;
        }
    }

    let potentials = PotentialPair { phi, psi, epsilon };
    let (row, col) = residuals_with(&cost, &potentials, mu0, mu1);
    let residual = row.max(col);
    if residual > tol {
        return Err(Error::NotConverged { iterations, residual });
    }
    Ok(SinkhornSolution { potentials, residual, iterations })
}

/// Solves along a schedule, warm-starting each ε from the previous one.
pub fn sinkhorn_schedule(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    schedule: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<SinkhornSolution>> {
    let mut out: Vec<SinkhornSolution> = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let prev = out.last().map(|s| &s.potentials);
        let sol = match prev {
            Some(p) if eps <= p.epsilon => sinkhorn_warm(mu0, mu1, eps, Some(p), tol, max_iter)?,
            _ => sinkhorn(mu0, mu1, eps, tol, max_iter)?,
        };
        out.push(sol);
    }
    Ok(out)
}

/// Builds `π_ij = u_i v_j exp((φ_i + ψ_j − c_ij)/ε)` after checking that the
/// potentials solve the Schrödinger system to `tol`.
pub fn eot_plan(pot: &PotentialPair, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, tol: f64) -> Result<Coupling> {
    check_shapes(pot, mu0, mu1)?;
    let cost = cost_matrix(mu0, mu1)?;
    let (row, col) = residuals_with(&cost, pot, mu0, mu1);
    let residual = row.max(col);
    if residual > tol {
        return Err(Error::ResidualTooLarge { residual, tol });
    }
    let eps = pot.epsilon;
    let mut plan = Vec::with_capacity(mu0.len() * mu1.len());
    for (i, (u, phi)) in mu0.weights().iter().zip(&pot.phi).enumerate() {
        for (j, (v, psi)) in mu1.weights().iter().zip(&pot.psi).enumerate() {
            plan.push(u * v * ((phi + psi - cost.get(i, j)) / eps).exp());
        }
    }
    Coupling::new(plan, mu0.clone(), mu1.clone(), Some(eps))
}

/// Shifts `(φ, ψ)` by a constant so that `∫φ dμ0 = ∫ψ dμ1`.
pub fn normalize_potentials(pot: &PotentialPair, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> PotentialPair {
    let a = 0.5 * (mu1.integrate(&pot.psi) - mu0.integrate(&pot.phi));
    pot.shifted(a)
}

/// One row of [`potential_convergence_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    /// `max_i |φ_ε(x_i) − ψ^c(x_i)|` after normalisation.
    pub phi_gap: f64,
    /// `max_j |ψ_ε(y_j) − ψ(y_j)|` after normalisation.
    pub psi_gap: f64,
}

/// Sup-norm distance between normalised entropic potentials and normalised
/// zero-noise potentials along a strictly decreasing schedule.
pub fn potential_convergence_curve(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    eps_schedule: &[f64],
    duals: &DualPotentials,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<ConvergenceRow>> {
    if eps_schedule.is_empty() {
        return Err(Error::InvalidArgument("empty schedule".into()));
    }
    if eps_schedule.iter().any(|e| !(*e > 0.0)) || eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("schedule must be positive and strictly decreasing".into()));
    }
    let duals = duals.normalized(mu0, mu1);
    let sols = sinkhorn_schedule(mu0, mu1, eps_schedule, tol, max_iter)?;
    Ok(sols
        .iter()
        .map(|s| {
            let p = normalize_potentials(&s.potentials, mu0, mu1);
            let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            ConvergenceRow { epsilon: s.potentials.epsilon, phi_gap: sup(&p.phi, &duals.psi_c), psi_gap: sup(&p.psi, &duals.psi) }
        })
        .collect())
}
