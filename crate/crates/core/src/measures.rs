//! Discrete measures on `R^d` and the quadratic transport cost.

use std::io::Read;
use std::path::Path as FsPath;

use crate::error::{Error, Result};

/// Tolerance on `|sum(weights) - 1|` for a valid probability vector.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Looser tolerance accepted when reading weights from text; such inputs are
/// renormalised exactly after the check.
pub const CSV_WEIGHT_SUM_TOL: f64 = 1e-6;

/// Distance under which a point is identified with an atom.
pub const SNAP_TOL: f64 = 1e-9;

/// `c(x, y) = |x - y|^2 / 2`.
pub fn quad_cost(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    Ok(quad_cost_unchecked(x, y))
}

#[inline]
pub(crate) fn quad_cost_unchecked(x: &[f64], y: &[f64]) -> f64 {
    0.5 * sq_dist(x, y)
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// A probability measure with finitely many atoms.
///
/// Weights are strictly positive: an atom of zero mass is not part of the
/// support and is rejected, as are duplicate atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidMeasure("zero-dimensional atoms".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidMeasure("non-finite coordinate".into()));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            points[a]
                .iter()
                .zip(&points[b])
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(Error::InvalidMeasure(format!(
                    "duplicate atom {:?} (indices {} and {})",
                    points[w[0]], w[0], w[1]
                )));
            }
        }
        Ok(Self { points, weights, dim })
    }

    /// Equal weights on the given atoms.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let weights = vec![1.0 / n as f64; n];
        // 1/n summed n times can miss 1 by a few ulps; fix up the last weight.
        let mut weights = weights;
        let head: f64 = weights[..n - 1].iter().sum();
        weights[n - 1] = 1.0 - head;
        Self::new(points, weights)
    }

    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        Self::new(vec![point], vec![1.0])
    }

    /// Reads atoms from CSV with a header row `w, x1, ..., xd`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || headers.get(0) != Some("w") {
            return Err(Error::Parse(format!(
                "measure CSV header must be `w,x1,..,xd`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        for (k, h) in headers.iter().enumerate().skip(1) {
            if h != format!("x{k}") {
                return Err(Error::Parse(format!("unexpected column `{h}`, expected `x{k}`")));
            }
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
            if vals.len() != headers.len() {
                return Err(Error::Parse(format!("row {} has {} fields", line + 1, vals.len())));
            }
            weights.push(vals[0]);
            points.push(vals[1..].to_vec());
        }
        let total: f64 = weights.iter().sum();
        if !((total - 1.0).abs() <= CSV_WEIGHT_SUM_TOL) {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        for w in &mut weights {
            *w /= total;
        }
        if let Some(last) = weights.len().checked_sub(1) {
            let head: f64 = weights[..last].iter().sum();
            if head < 1.0 {
                weights[last] = 1.0 - head;
            }
        }
        Self::new(points, weights)
    }

    pub fn from_csv_path(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file).map_err(|e| match e {
            Error::InvalidMeasure(m) => Error::InvalidMeasure(format!("{}: {m}", path.display())),
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("w");
        for k in 1..=self.dim {
            out.push_str(&format!(",x{k}"));
        }
        out.push('\n');
        for (p, w) in self.points.iter().zip(&self.weights) {
            out.push_str(&format!("{w:e}"));
            for v in p {
                out.push_str(&format!(",{v:e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f dμ` for values given per atom.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Index of the atom within [`SNAP_TOL`] of `x`, if any.
    pub fn snap(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim {
            return None;
        }
        self.points
            .iter()
            .position(|p| sq_dist(p, x).sqrt() <= SNAP_TOL)
    }
}

/// Dense matrix of `c(x_i, y_j)` for source atoms `x_i` and target atoms `y_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

pub fn cost_matrix(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<CostMatrix> {
    if mu0.dim() != mu1.dim() {
        return Err(Error::DimensionMismatch { expected: mu0.dim(), found: mu1.dim() });
    }
    let mut data = Vec::with_capacity(mu0.len() * mu1.len());
    for x in mu0.points() {
        for y in mu1.points() {
            data.push(quad_cost_unchecked(x, y));
        }
    }
    Ok(CostMatrix { rows: mu0.len(), cols: mu1.len(), data })
}
