//! Exact zero-noise quadratic transport between discrete measures.
//!
//! The plan comes from a transportation simplex (spanning-tree bases,
//! Dantzig pricing, supply perturbation against degenerate pivots). The
//! simplex multipliers are dual-optimal but not unique when the support graph
//! of the plan is disconnected; [`ot_solve_exact`] then picks the midpoint of
//! the componentwise-largest and componentwise-smallest optimal dual with the
//! first source potential pinned, applies `ψ ← (ψ^c)^c`, and normalises so
//! that `∫ψ^c dμ0 = ∫ψ dμ1`.

use serde::Serialize;

use crate::eot::{Coupling, SUPPORT_MASS_TOL};
use crate::error::{Error, Result};
use crate::measures::{cost_matrix, quad_cost_unchecked, CostMatrix, DiscreteMeasure};

/// Feasibility slack allowed in `ψ^c(x) + ψ(y) ≤ c(x, y)`.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// Required agreement of primal and dual objective values.
pub const DUALITY_GAP_TOL: f64 = 1e-9;

/// Kantorovich potentials: `psi` on target atoms and its c-transform `psi_c`
/// on source atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualPotentials {
    pub psi: Vec<f64>,
    pub psi_c: Vec<f64>,
    pub normalized: bool,
}

impl DualPotentials {
    /// Shifted copy with `∫ψ^c dμ0 = ∫ψ dμ1`.
    pub fn normalized(&self, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Self {
        let a = 0.5 * (mu1.integrate(&self.psi) - mu0.integrate(&self.psi_c));
        Self {
            psi: self.psi.iter().map(|v| v - a).collect(),
            psi_c: self.psi_c.iter().map(|v| v + a).collect(),
            normalized: true,
        }
    }

    /// `∫ψ^c dμ0 + ∫ψ dμ1`.
    pub fn dual_value(&self, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> f64 {
        mu0.integrate(&self.psi_c) + mu1.integrate(&self.psi)
    }

    /// Largest violation of `ψ^c(x_i) + ψ(y_j) ≤ c_ij`, or zero.
    pub fn max_violation(&self, cost: &CostMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, f) in self.psi_c.iter().enumerate() {
            for (j, g) in self.psi.iter().enumerate() {
                worst = worst.max(f + g - cost.get(i, j));
            }
        }
        worst
    }
}

/// `ψ^c(x) = min_j { c(x, y_j) − ψ_j }` at every query, with the minimising
/// atom (lowest index on ties). Entries of `psi` equal to `−∞` are excluded.
pub fn c_transform_argmin(psi: &[f64], atoms: &[Vec<f64>], queries: &[Vec<f64>]) -> Result<Vec<(f64, usize)>> {
    if atoms.is_empty() {
        return Err(Error::InvalidArgument("c-transform over an empty atom set".into()));
    }
    if psi.len() != atoms.len() {
        return Err(Error::InvalidArgument(format!("{} potential values for {} atoms", psi.len(), atoms.len())));
    }
    if !psi.iter().any(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("potential is -inf on every atom".into()));
    }
    let dim = atoms[0].len();
    queries
        .iter()
        .map(|x| {
            if x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: x.len() });
            }
            let mut best = (f64::INFINITY, 0);
            for (j, (y, p)) in atoms.iter().zip(psi).enumerate() {
                let v = quad_cost_unchecked(x, y) - p;
                if v < best.0 {
                    best = (v, j);
                }
            }
            Ok(best)
        })
        .collect()
}

pub fn c_transform(psi: &[f64], atoms: &[Vec<f64>], queries: &[Vec<f64>]) -> Result<Vec<f64>> {
    Ok(c_transform_argmin(psi, atoms, queries)?.into_iter().map(|(v, _)| v).collect())
}

/// `c(x_i, y_j) − ψ^c(x_i) − ψ(y_j)`; nonnegative, zero on the plan's support.
pub fn c_superdiff_residual(
    duals: &DualPotentials,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    pair: (usize, usize),
) -> Result<f64> {
    let (i, j) = pair;
    if i >= mu0.len() || i >= duals.psi_c.len() {
        return Err(Error::IndexOutOfRange { index: i, len: mu0.len() });
    }
    if j >= mu1.len() || j >= duals.psi.len() {
        return Err(Error::IndexOutOfRange { index: j, len: mu1.len() });
    }
    Ok(quad_cost_unchecked(mu0.point(i), mu1.point(j)) - duals.psi_c[i] - duals.psi[j])
}

/// Solves `min Σ π_ij c_ij` over couplings of `(μ0, μ1)` exactly and returns
/// the optimal plan with normalised, c-concave Kantorovich potentials.
pub fn ot_solve_exact(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<(Coupling, DualPotentials)> {
    let cost = cost_matrix(mu0, mu1)?;
    let simplex = TransportSimplex::solve(&cost, mu0.weights(), mu1.weights())?;
    let plan = Coupling::new(simplex.flows_dense(), mu0.clone(), mu1.clone(), None)?;

    let support: Vec<(usize, usize)> = plan.support().into_iter().map(|(i, j, _)| (i, j)).collect();
    let (f, g) = centered_duals(&cost, &support, &simplex.u, &simplex.v);

    // ψ ← (ψ^c)^c, then recompute ψ^c from the polished ψ.
    let psi_c = c_transform(&g, mu1.points(), mu0.points())?;
    let psi = c_transform(&psi_c, mu0.points(), mu1.points())?;
    let psi_c = c_transform(&psi, mu1.points(), mu0.points())?;
    debug_assert!(f.iter().zip(&psi_c).all(|(a, b)| (a - b).abs() < 1e-8));
    let duals = DualPotentials { psi, psi_c, normalized: false }.normalized(mu0, mu1);

    let primal = plan.transport_cost(&cost);
    let dual = duals.dual_value(mu0, mu1);
    let violation = duals.max_violation(&cost);
    if (primal - dual).abs() > DUALITY_GAP_TOL || violation > FEASIBILITY_TOL || plan.marginal_error() > 1e-12 {
        return Err(Error::Solver(format!(
            "certificate failed: primal {primal:e}, dual {dual:e}, max violation {violation:e}, marginal error {:e}",
            plan.marginal_error()
        )));
    }
    Ok((plan, duals))
}

/// Midpoint of the largest and smallest optimal duals (first source pinned).
///
/// Optimal duals are the solutions of the difference constraints
/// `f_i + g_j ≤ c_ij` everywhere and `f_i + g_j = c_ij` on the support. In the
/// variables `(f, h = −g)` these are shortest-path constraints; the simplex
/// multipliers are a feasible potential, so Dijkstra runs on reduced weights.
fn centered_duals(cost: &CostMatrix, support: &[(usize, usize)], u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = cost.rows();
    let n = cost.cols();
    let mut sup_of_row: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut sup_of_col: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in support {
        sup_of_row[i].push(j);
        sup_of_col[j].push(i);
    }
    // Node potential x: rows k < m carry f = u, columns m + j carry h = −v.
    let x = |k: usize| if k < m { u[k] } else { -v[k - m] };
    let reduced = |i: usize, j: usize| (cost.get(i, j) - u[i] - v[j]).max(0.0);

    // Edges: h_j → f_i with reduced weight c_ij − u_i − v_j (all pairs),
    //        f_i → h_j with reduced weight 0 (support pairs).
    let dijkstra = |forward: bool| -> Vec<f64> {
        let total = m + n;
        let mut dist = vec![f64::INFINITY; total];
        let mut done = vec![false; total];
        dist[0] = 0.0;
        for _ in 0..total {
            let mut k = usize::MAX;
            let mut best = f64::INFINITY;
            for (node, (&d, &fin)) in dist.iter().zip(&done).enumerate() {
                if !fin && d < best {
                    best = d;
                    k = node;
                }
            }
            if k == usize::MAX {
                break;
            }
            done[k] = true;
            if k < m {
                let i = k;
                if forward {
                    for &j in &sup_of_row[i] {
                        let t = m + j;
                        dist[t] = dist[t].min(best);
                    }
                } else {
                    for j in 0..n {
                        let t = m + j;
                        dist[t] = dist[t].min(best + reduced(i, j));
                    }
                }
            } else {
                let j = k - m;
                if forward {
                    for i in 0..m {
                        dist[i] = dist[i].min(best + reduced(i, j));
                    }
                } else {
                    for &i in &sup_of_col[j] {
                        dist[i] = dist[i].min(best);
                    }
                }
            }
        }
        dist
    };

    let fwd = dijkstra(true);
    let bwd = dijkstra(false);
    let x0 = x(0);
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    for k in 0..m + n {
        // largest solution: shortest distance from node 0; smallest: minus the
        // shortest distance to node 0.
        let hi = fwd[k] - x0 + x(k);
        let lo = -(bwd[k] - x(k) + x0);
        let mid = 0.5 * (hi + lo);
        if k < m {
            f[k] = mid;
        } else {
            g[k - m] = -mid;
        }
    }
    (f, g)
}

/// Transportation simplex on a spanning-tree basis.
struct TransportSimplex {
    rows: usize,
    cols: usize,
    basis: Vec<(usize, usize)>,
    flow: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl TransportSimplex {
    fn solve(cost: &CostMatrix, a: &[f64], b: &[f64]) -> Result<Self> {
        let m = a.len();
        let n = b.len();
        // Perturbed supplies: a_i + δ, last demand + mδ. Rules out degenerate
        // pivots; flows are recomputed from the true marginals at the end.
        let min_w = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
        let delta = (min_w * 1e-9 / (m + n) as f64).max(1e-300);
        let ap: Vec<f64> = a.iter().map(|w| w + delta).collect();
        let mut bp = b.to_vec();
        bp[n - 1] += delta * m as f64;

        let mut s = Self::northwest_corner(&ap, &bp);
        let scale = 1.0 + cost.max();
        let max_pivots = 50 * (m + n) * (m + n) + 1000;
        let mut in_basis = vec![usize::MAX; m * n];
        for (k, &(i, j)) in s.basis.iter().enumerate() {
            in_basis[i * n + j] = k;
        }
        for _ in 0..max_pivots {
            s.compute_duals(cost);
            let mut enter = None;
            let mut best = -1e-13 * scale;
            for i in 0..m {
                let row = cost.row(i);
                let ui = s.u[i];
                for j in 0..n {
                    let d = row[j] - ui - s.v[j];
                    if d < best && in_basis[i * n + j] == usize::MAX {
                        best = d;
                        enter = Some((i, j));
                    }
                }
            }
            let Some((ei, ej)) = enter else {
                s.recompute_flows(a, b);
                s.compute_duals(cost);
                return Ok(s);
            };
            let cycle = s.tree_path(ei, ej);
            // cycle[k] alternates −, +, −, ... starting at the column end.
            let mut theta = f64::INFINITY;
            let mut leave = usize::MAX;
            for (k, &cell) in cycle.iter().enumerate() {
                if k % 2 == 0 && s.flow[cell] < theta {
                    theta = s.flow[cell];
                    leave = cell;
                }
            }
            for (k, &cell) in cycle.iter().enumerate() {
                if k % 2 == 0 {
                    s.flow[cell] -= theta;
                } else {
                    s.flow[cell] += theta;
                }
            }
            let (li, lj) = s.basis[leave];
            in_basis[li * n + lj] = usize::MAX;
            s.basis[leave] = (ei, ej);
            s.flow[leave] = theta;
            in_basis[ei * n + ej] = leave;
        }
        Err(Error::Solver(format!("no optimal basis after {max_pivots} pivots")))
    }

    fn northwest_corner(a: &[f64], b: &[f64]) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut ra = a.to_vec();
        let mut rb = b.to_vec();
        let (mut i, mut j) = (0, 0);
        let mut basis = Vec::with_capacity(m + n - 1);
        let mut flow = Vec::with_capacity(m + n - 1);
        loop {
            let q = ra[i].min(rb[j]);
            basis.push((i, j));
            flow.push(q);
            ra[i] -= q;
            rb[j] -= q;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && ra[i] <= rb[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { rows: m, cols: n, basis, flow, u: vec![0.0; m], v: vec![0.0; n] }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.rows + self.cols];
        for (k, &(i, j)) in self.basis.iter().enumerate() {
            adj[i].push(k);
            adj[self.rows + j].push(k);
        }
        adj
    }

    /// `u_i + v_j = c_ij` on the basis with `u_0 = 0`.
    fn compute_duals(&mut self, cost: &CostMatrix) {
        let m = self.rows;
        let adj = self.adjacency();
        let mut seen = vec![false; m + self.cols];
        let mut stack = vec![0usize];
        seen[0] = true;
        self.u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &k in &adj[node] {
                let (i, j) = self.basis[k];
                let (other, is_col) = if node < m { (m + j, true) } else { (i, false) };
                if seen[other] {
                    continue;
                }
                seen[other] = true;
                if is_col {
                    self.v[j] = cost.get(i, j) - self.u[i];
                } else {
                    self.u[i] = cost.get(i, j) - self.v[j];
                }
                stack.push(other);
            }
        }
    }

    /// Basis cells on the tree path from column `j` to row `i`, in order.
    fn tree_path(&self, i: usize, j: usize) -> Vec<usize> {
        let m = self.rows;
        let adj = self.adjacency();
        let start = m + j;
        let mut parent = vec![usize::MAX; m + self.cols];
        let mut parent_cell = vec![usize::MAX; m + self.cols];
        let mut stack = vec![start];
        parent[start] = start;
        while let Some(node) = stack.pop() {
            if node == i {
                break;
            }
            for &k in &adj[node] {
                let (r, c) = self.basis[k];
                let other = if node < m { m + c } else { r };
                if parent[other] == usize::MAX {
                    parent[other] = node;
                    parent_cell[other] = k;
                    stack.push(other);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = i;
        while node != start {
            path.push(parent_cell[node]);
            node = parent[node];
        }
        path.reverse();
        path
    }

    /// Flows on the current tree for the unperturbed marginals.
    fn recompute_flows(&mut self, a: &[f64], b: &[f64]) {
        let m = self.rows;
        let mut rem: Vec<f64> = a.iter().chain(b).copied().collect();
        let adj = self.adjacency();
        let mut deg: Vec<usize> = adj.iter().map(|e| e.len()).collect();
        let mut used = vec![false; self.basis.len()];
        let mut leaves: Vec<usize> = (0..deg.len()).filter(|&k| deg[k] == 1).collect();
        while let Some(node) = leaves.pop() {
            if deg[node] != 1 {
                continue;
            }
            let Some(&k) = adj[node].iter().find(|&&k| !used[k]) else { continue };
            used[k] = true;
            let (i, j) = self.basis[k];
            let other = if node < m { m + j } else { i };
            let f = rem[node].max(0.0);
            self.flow[k] = f;
            rem[node] = 0.0;
            rem[other] -= f;
            deg[node] = 0;
            deg[other] -= 1;
            if deg[other] == 1 {
                leaves.push(other);
            }
        }
    }

    fn flows_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (&(i, j), &f) in self.basis.iter().zip(&self.flow) {
            out[i * self.cols + j] = f.max(0.0);
        }
        out
    }
}

/// Primal objective `Σ π_ij c_ij` for a plan between its own marginals.
pub fn primal_value(plan: &Coupling) -> Result<f64> {
    Ok(plan.transport_cost(&cost_matrix(plan.source(), plan.target())?))
}

/// Marks entries whose mass exceeds [`SUPPORT_MASS_TOL`].
pub fn support_mask(plan: &Coupling) -> Vec<bool> {
    plan.as_slice().iter().map(|&p| p > SUPPORT_MASS_TOL).collect()
}
