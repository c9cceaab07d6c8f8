//! Piecewise-linear paths on a time grid, Brownian bridges and Schrödinger
//! bridges sampled as plan-weighted mixtures of Brownian bridges.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, weighted::WeightedIndex};

use crate::eot::Coupling;
use crate::error::{Error, Result};
use crate::measures::sq_dist;
use crate::rng::par_chunks;

/// Default number of grid intervals.
pub const DEFAULT_GRID_INTERVALS: usize = 200;

/// Strictly increasing times from exactly 0 to exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(Arc<[f64]>);

impl Grid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidArgument("a grid needs at least two knots".into()));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("grid must start at 0 and end at 1".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        Ok(Self(times.into()))
    }

    /// `M` equal intervals.
    pub fn uniform(intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::InvalidArgument("grid needs at least one interval".into()));
        }
        let mut t: Vec<f64> = (0..=intervals).map(|k| k as f64 / intervals as f64).collect();
        t[intervals] = 1.0;
        Self::new(t)
    }

    /// This grid with extra knots merged in (knots within 1e-12 of an existing one are dropped).
    pub fn with_knots(&self, extra: &[f64]) -> Result<Self> {
        let mut t = self.0.to_vec();
        for &k in extra {
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::InvalidArgument(format!("knot {k} outside [0, 1]")));
            }
            if self.index_of(k).is_none() {
                t.push(k);
            }
        }
        t.sort_by(f64::total_cmp);
        Self::new(t)
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.0.len() - 1
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the knot within 1e-12 of `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.0.iter().position(|&s| (s - t).abs() <= 1e-12)
    }
}

/// A path `[0, 1] → R^d`, linear between grid knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    grid: Grid,
    dim: usize,
    values: Vec<f64>,
}

impl Path {
    /// `values` holds one `d`-vector per knot, flattened knot-major.
    pub fn new(grid: Grid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("paths need dimension >= 1".into()));
        }
        if values.len() != grid.len() * dim {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} knots of dimension {dim}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite path value".into()));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn from_points(grid: Grid, points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidArgument("ragged path values".into()));
        }
        Self::new(grid, dim, points.concat())
    }

    /// Piecewise-linear interpolation of `(t, value)` knots, sampled on `grid`.
    pub fn from_knots(grid: Grid, knots: &[(f64, Vec<f64>)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidArgument("need at least two knots".into()));
        }
        if knots[0].0 != 0.0 || knots.last().unwrap().0 != 1.0 {
            return Err(Error::InvalidArgument("knots must span [0, 1]".into()));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument("knot times must increase".into()));
        }
        let dim = knots[0].1.len();
        if knots.iter().any(|k| k.1.len() != dim) {
            return Err(Error::InvalidArgument("ragged knot values".into()));
        }
        let mut values = Vec::with_capacity(grid.len() * dim);
        let mut seg = 0;
        for &t in grid.times() {
            while seg + 2 < knots.len() && t > knots[seg + 1].0 {
                seg += 1;
            }
            let (t0, ref a) = knots[seg];
            let (t1, ref b) = knots[seg + 1];
            let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
            for c in 0..dim {
                values.push(if w == 1.0 { b[c] } else { a[c] + w * (b[c] - a[c]) });
            }
        }
        Self::new(grid, dim, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at knot `k`.
    pub fn at(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn start(&self) -> &[f64] {
        self.at(0)
    }

    pub fn end(&self) -> &[f64] {
        self.at(self.grid.intervals())
    }

    /// Linear interpolation at an arbitrary time in `[0, 1]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let times = self.grid.times();
        let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
        let (t0, t1) = (times[k - 1], times[k]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let (a, b) = (self.at(k - 1), self.at(k));
        if w == 0.0 {
            return a.to_vec();
        }
        if w == 1.0 {
            return b.to_vec();
        }
        a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect()
    }

    /// Knot-wise difference `self − other` on a shared grid.
    pub fn minus(&self, other: &Path) -> Result<Path> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::InvalidArgument("paths live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Path::new(self.grid.clone(), self.dim, values)
    }

    /// Sup over knots of the Euclidean distance to `other`.
    pub fn sup_distance(&self, other: &Path) -> Result<f64> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::InvalidArgument("paths live on different grids".into()));
        }
        Ok((0..self.grid.len()).map(|k| sq_dist(self.at(k), other.at(k)).sqrt()).fold(0.0, f64::max))
    }

    /// Rows `t, x1..xd`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t");
        for c in 1..=self.dim {
            let _ = write!(out, ",x{c}");
        }
        out.push('\n');
        for (k, t) in self.grid.times().iter().enumerate() {
            let _ = write!(out, "{t}");
            for v in self.at(k) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`Path::to_csv_string`].
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Path> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("t") || headers.len() < 2 {
            return Err(Error::Parse("path CSV header must be `t,x1,..,xd`".into()));
        }
        let dim = headers.len() - 1;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(e.to_string()))?;
            if row.len() != dim + 1 {
                return Err(Error::Parse("ragged path CSV".into()));
            }
            times.push(row[0]);
            values.extend_from_slice(&row[1..]);
        }
        Path::new(Grid::new(times)?, dim, values)
    }
}

/// Paths sharing a grid, with the noise level and seed that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub grid: Grid,
    pub dim: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub paths: Vec<Path>,
    /// Self-normalised weights (summing to one), when the ensemble is weighted.
    pub weights: Option<Vec<f64>>,
    /// Mean raw weight, i.e. the estimate of the normalising constant.
    pub normalizer: Option<f64>,
}

impl PathEnsemble {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Empirical (weighted, if weights exist) mean of the value at knot `k`.
    pub fn mean_at(&self, k: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        let n = self.paths.len() as f64;
        for (idx, p) in self.paths.iter().enumerate() {
            let w = self.weights.as_ref().map_or(1.0 / n, |w| w[idx]);
            for (a, b) in m.iter_mut().zip(p.at(k)) {
                *a += w * b;
            }
        }
        m
    }

    /// CSV with columns `path_id, t, x1..xd, weight`, preceded by
    /// `# eps=<ε>, seed=<seed>`.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!("# eps={}, seed={}\npath_id,t", self.epsilon, self.seed);
        for c in 1..=self.dim {
            let _ = write!(out, ",x{c}");
        }
        out.push_str(",weight\n");
        for (id, p) in self.paths.iter().enumerate() {
            let w = self.weights.as_ref().map_or(1.0, |w| w[id]);
            for (k, t) in self.grid.times().iter().enumerate() {
                let _ = write!(out, "{id},{t}");
                for v in p.at(k) {
                    let _ = write!(out, ",{v}");
                }
                let _ = writeln!(out, ",{w}");
            }
        }
        out
    }
}

/// `σ^{xy}(t) = (1 − t)x + ty` on `grid`; endpoints are exactly `x` and `y`.
pub fn geodesic(x: &[f64], y: &[f64], grid: &Grid) -> Result<Path> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let d = x.len();
    let m = grid.intervals();
    let mut values = Vec::with_capacity(grid.len() * d);
    for (k, &t) in grid.times().iter().enumerate() {
        for c in 0..d {
            values.push(if k == 0 {
                x[c]
            } else if k == m {
                y[c]
            } else {
                (1.0 - t) * x[c] + t * y[c]
            });
        }
    }
    Path::new(grid.clone(), d, values)
}

/// `∫|ḣ|² dt = Σ |Δh|² / Δt`, exact for piecewise-linear paths.
pub fn h_norm_sq(path: &Path) -> f64 {
    let t = path.grid.times();
    (1..t.len()).map(|k| sq_dist(path.at(k), path.at(k - 1)) / (t[k] - t[k - 1])).sum()
}

/// `(g, h)_H = Σ Δg·Δh / Δt` on a shared grid.
pub fn h_inner(g: &Path, h: &Path) -> Result<f64> {
    if g.grid != h.grid || g.dim != h.dim {
        return Err(Error::InvalidArgument("paths live on different grids".into()));
    }
    let t = g.grid.times();
    let d = g.dim;
    Ok((1..t.len())
        .map(|k| {
            let dt = t[k] - t[k - 1];
            (0..d)
                .map(|c| (g.values[k * d + c] - g.values[(k - 1) * d + c]) * (h.values[k * d + c] - h.values[(k - 1) * d + c]))
                .sum::<f64>()
                / dt
        })
        .sum())
}

/// Fills `out` (knot-major, `d` per knot) with `√ε` times a standard Brownian
/// bridge from 0 to 0, using the exact sequential conditional law
/// `B(t_{k+1}) | B(t_k) = b  ~  N(b (1−t_{k+1})/(1−t_k), Δt (1−t_{k+1})/(1−t_k))`.
pub(crate) fn bridge_noise<R: Rng + ?Sized>(times: &[f64], dim: usize, eps: f64, rng: &mut R, out: &mut [f64]) {
    let m = times.len() - 1;
    out[..dim].fill(0.0);
    out[m * dim..].fill(0.0);
    if eps == 0.0 {
        out.fill(0.0);
        return;
    }
    let s = eps.sqrt();
    for k in 0..m - 1 {
        let (t0, t1) = (times[k], times[k + 1]);
        let rest0 = 1.0 - t0;
        let rest1 = 1.0 - t1;
        let shrink = rest1 / rest0;
        let sd = s * ((t1 - t0) * shrink).sqrt();
        for c in 0..dim {
            let z: f64 = StandardNormal.sample(rng);
            out[(k + 1) * dim + c] = out[k * dim + c] * shrink + sd * z;
        }
    }
}

/// Adds the geodesic from `x` to `y` to pinned noise and writes the exact endpoints.
pub(crate) fn add_geodesic(times: &[f64], x: &[f64], y: &[f64], values: &mut [f64]) {
    let d = x.len();
    let m = times.len() - 1;
    for (k, &t) in times.iter().enumerate().take(m).skip(1) {
        for c in 0..d {
            values[k * d + c] += (1.0 - t) * x[c] + t * y[c];
        }
    }
    values[..d].copy_from_slice(x);
    values[m * d..].copy_from_slice(y);
}

/// One Brownian bridge from `x` to `y` with variance scale `ε` on `grid`.
pub fn sample_brownian_bridge<R: Rng + ?Sized>(x: &[f64], y: &[f64], epsilon: f64, grid: &Grid, rng: &mut R) -> Result<Path> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let d = x.len();
    let mut values = vec![0.0; grid.len() * d];
    bridge_noise(grid.times(), d, epsilon, rng, &mut values);
    add_geodesic(grid.times(), x, y, &mut values);
    Path::new(grid.clone(), d, values)
}

/// Sampler over the positive-mass pairs of a plan.
pub(crate) struct PairSampler {
    pub pairs: Vec<(usize, usize)>,
    index: WeightedIndex<f64>,
}

impl PairSampler {
    pub fn new(plan: &Coupling) -> Result<Self> {
        let support = plan.support();
        if support.is_empty() {
            return Err(Error::InvalidArgument("plan has no positive-mass pair".into()));
        }
        let index = WeightedIndex::new(support.iter().map(|s| s.2)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(Self { pairs: support.iter().map(|s| (s.0, s.1)).collect(), index })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

/// `n` paths of the mixture `∫ R^{ε,xy} dπ(x, y)`: each draws an atom pair
/// from the plan and then a Brownian bridge between the pair.
pub fn sample_schrodinger_bridge(plan: &Coupling, epsilon: f64, grid: &Grid, n: usize, seed: u64) -> Result<PathEnsemble> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let sampler = PairSampler::new(plan)?;
    let d = plan.source().dim();
    let times = grid.times();
    let chunks = par_chunks(n, seed, |rng, _, len| {
        (0..len)
            .map(|_| {
                let (i, j) = sampler.pairs[sampler.sample(rng)];
                let mut values = vec![0.0; times.len() * d];
                bridge_noise(times, d, epsilon, rng, &mut values);
                add_geodesic(times, plan.source().point(i), plan.target().point(j), &mut values);
                Path { grid: grid.clone(), dim: d, values }
            })
            .collect::<Vec<_>>()
    });
    Ok(PathEnsemble {
        grid: grid.clone(),
        dim: d,
        epsilon,
        seed,
        paths: chunks.into_iter().flatten().collect(),
        weights: None,
        normalizer: None,
    })
}

/// `min` over positive-mass pairs `(x, y)` of `max_k |path(t_k) − σ^{xy}(t_k)|`.
pub fn support_distance(path: &Path, plan: &Coupling) -> Result<f64> {
    let support = plan.support();
    if support.is_empty() {
        return Err(Error::InvalidArgument("plan has no positive-mass pair".into()));
    }
    if path.dim() != plan.source().dim() {
        return Err(Error::DimensionMismatch { expected: plan.source().dim(), found: path.dim() });
    }
    let times = path.grid().times();
    let mut best = f64::INFINITY;
    for (i, j, _) in support {
        let (x, y) = (plan.source().point(i), plan.target().point(j));
        let mut worst: f64 = 0.0;
        for (k, &t) in times.iter().enumerate() {
            let d2: f64 = path.at(k).iter().zip(x.iter().zip(y)).map(|(p, (a, b))| {
                let g = (1.0 - t) * a + t * b;
                (p - g) * (p - g)
            }).sum();
            worst = worst.max(d2);
            if worst >= best * best {
                break;
            }
        }
        best = best.min(worst.sqrt());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DiscreteMeasure;
    use crate::rng::stream;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![0.0, 0.5, 1.0]).is_ok());
        assert!(Grid::new(vec![0.0]).is_err());
        assert!(Grid::new(vec![0.1, 1.0]).is_err());
        assert!(Grid::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        let g = Grid::uniform(4).unwrap().with_knots(&[0.3, 0.5]).unwrap();
        assert_eq!(g.times(), &[0.0, 0.25, 0.3, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn geodesic_examples() {
        let g = Grid::uniform(4).unwrap();
        let p = geodesic(&[0.0], &[1.0], &g).unwrap();
        assert_eq!(p.values(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let z = geodesic(&[0.0, 0.0], &[0.0, 0.0], &g).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
        let x = [0.123456789, -3.3];
        let y = [7.1, 1.0 / 3.0];
        let q = geodesic(&x, &y, &Grid::uniform(7).unwrap()).unwrap();
        assert_eq!(q.start(), &x);
        assert_eq!(q.end(), &y);
    }

    #[test]
    fn h_norm_examples() {
        let g = Grid::uniform(10).unwrap();
        let p = geodesic(&[0.0, 1.0], &[2.0, -1.0], &g).unwrap();
        assert!((h_norm_sq(&p) - 8.0).abs() < 1e-12);
        let tent = Path::from_knots(Grid::uniform(2).unwrap(), &[(0.0, vec![0.0]), (0.5, vec![1.0]), (1.0, vec![0.0])]).unwrap();
        assert_eq!(h_norm_sq(&tent), 4.0);
        // midpoint refinement
        let fine = Path::from_knots(Grid::uniform(8).unwrap(), &[(0.0, vec![0.0]), (0.5, vec![1.0]), (1.0, vec![0.0])]).unwrap();
        assert!((h_norm_sq(&fine) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_bridge_is_geodesic() {
        let g = Grid::uniform(16).unwrap();
        let mut rng = stream(1, 0);
        let b = sample_brownian_bridge(&[0.5, -1.0], &[2.0, 3.0], 0.0, &g, &mut rng).unwrap();
        assert_eq!(b, geodesic(&[0.5, -1.0], &[2.0, 3.0], &g).unwrap());
    }

    #[test]
    fn bridge_endpoints_exact() {
        let g = Grid::uniform(33).unwrap();
        let mut rng = stream(9, 3);
        let x = [0.1, 0.7];
        let y = [-2.3, 0.3];
        for _ in 0..20 {
            let b = sample_brownian_bridge(&x, &y, 0.7, &g, &mut rng).unwrap();
            assert_eq!(b.start(), &x);
            assert_eq!(b.end(), &y);
        }
    }

    #[test]
    fn bridge_midpoint_moments() {
        // x=0, y=1, ε=0.04: mean 0.5 and variance ε/4 = 0.01 at t = 1/2.
        let g = Grid::uniform(8).unwrap();
        let mut rng = stream(2024, 0);
        let n = 100_000;
        let vals: Vec<f64> = (0..n).map(|_| sample_brownian_bridge(&[0.0], &[1.0], 0.04, &g, &mut rng).unwrap().at(4)[0]).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.5).abs() < 3.0 * (0.01f64 / n as f64).sqrt());
        // SE of the sample variance of a Gaussian: σ² √(2/(n−1))
        assert!((var - 0.01).abs() < 3.0 * 0.01 * (2.0 / (n - 1) as f64).sqrt());
    }

    #[test]
    fn schrodinger_samples() {
        let g = Grid::uniform(8).unwrap();
        let pinned = Coupling::pinned(vec![0.0], vec![2.0]).unwrap();
        let ens = sample_schrodinger_bridge(&pinned, 0.5, &g, 50, 3).unwrap();
        assert!(ens.paths.iter().all(|p| p.start() == [0.0] && p.end() == [2.0]));
        assert!(sample_schrodinger_bridge(&pinned, 0.5, &g, 0, 3).is_err());

        let mu0 = DiscreteMeasure::dirac(vec![0.0]).unwrap();
        let mu1 = DiscreteMeasure::uniform(vec![vec![-1.0], vec![1.0]]).unwrap();
        let plan = Coupling::product(&mu0, &mu1).unwrap();
        let zero = sample_schrodinger_bridge(&plan, 0.0, &g, 100, 5).unwrap();
        for p in &zero.paths {
            assert_eq!(support_distance(p, &plan).unwrap(), 0.0);
        }
        let again = sample_schrodinger_bridge(&plan, 0.3, &g, 5000, 5).unwrap();
        let once_more = sample_schrodinger_bridge(&plan, 0.3, &g, 5000, 5).unwrap();
        assert_eq!(again.to_csv_string(), once_more.to_csv_string());
    }

    #[test]
    fn support_distance_examples() {
        let g = Grid::uniform(10).unwrap();
        let plan = Coupling::pinned(vec![0.0], vec![1.0]).unwrap();
        let geo = geodesic(&[0.0], &[1.0], &g).unwrap();
        assert_eq!(support_distance(&geo, &plan).unwrap(), 0.0);
        let zero = geodesic(&[0.0], &[0.0], &g).unwrap();
        assert_eq!(support_distance(&zero, &plan).unwrap(), 1.0);
    }

    #[test]
    fn csv_formats() {
        let g = Grid::uniform(2).unwrap();
        let p = Path::from_points(g.clone(), &[vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let back = Path::from_csv_reader(p.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back, p);
        let ens = PathEnsemble { grid: g, dim: 2, epsilon: 0.25, seed: 7, paths: vec![p], weights: None, normalizer: None };
        let text = ens.to_csv_string();
        assert!(text.starts_with("# eps=0.25, seed=7\npath_id,t,x1,x2,weight\n0,0,0,1,1\n"));
    }

    #[test]
    fn eval_interpolates() {
        let p = Path::from_knots(Grid::uniform(2).unwrap(), &[(0.0, vec![0.0]), (0.5, vec![1.0]), (1.0, vec![0.0])]).unwrap();
        assert_eq!(p.eval(0.25), vec![0.5]);
        assert_eq!(p.eval(0.5), vec![1.0]);
        assert_eq!(p.eval(1.0), vec![0.0]);
    }
}
