//! Null vector of the discrete operator and its marginals.

use faer::linalg::solvers::SolveCore;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat};
use serde::Serialize;

use crate::error::{FdError, Result};
use crate::grid::{assemble, GridSpec, Operator};

/// Inverse-iteration controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterSpec {
    pub max_iter: usize,
    /// Stop when the normalized iterate moves less than this (max norm,
    /// relative to its maximum).
    pub tol: f64,
}

impl Default for IterSpec {
    fn default() -> Self {
        Self { max_iter: 30, tol: 1e-12 }
    }
}

/// Normalized discrete density on the cell centres.
#[derive(Clone, Debug, Serialize)]
pub struct OracleGrid {
    pub spec: GridSpec,
    /// `values[spec.index(i, k)]` is `F` at `(x_i, eta_k)`.
    pub values: Vec<f64>,
    /// `max |A F| / max sum |A||F|` over rows away from the edges.
    pub residual_interior: f64,
    /// Same over rows touching an edge.
    pub residual_boundary: f64,
    /// Factor applied to the unit-norm iterate to get unit mass.
    pub normalization: f64,
    pub iterations: usize,
    /// Most negative value relative to the maximum (0 when positive).
    pub min_relative: f64,
}

impl OracleGrid {
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[self.spec.index(i, k)]
    }

    /// Midpoint-rule mass, which is the rule used for normalization.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_area()
    }

    /// Bilinear interpolation between cell centres; `None` outside the
    /// centre lattice.
    pub fn interpolate(&self, x: f64, eta: f64) -> Option<f64> {
        let g = &self.spec;
        let u = x / g.hx() - 0.5;
        let w = (eta - g.eta_min) / g.heta() - 0.5;
        if !(u >= 0.0 && w >= 0.0) {
            return None;
        }
        let (i, k) = (u.floor() as usize, w.floor() as usize);
        if i + 1 >= g.n_x || k + 1 >= g.n_eta {
            return None;
        }
        let (a, b) = (u - i as f64, w - k as f64);
        Some(
            (1.0 - a) * (1.0 - b) * self.at(i, k)
                + a * (1.0 - b) * self.at(i + 1, k)
                + (1.0 - a) * b * self.at(i, k + 1)
                + a * b * self.at(i + 1, k + 1),
        )
    }
}

fn factorize(op: &Operator) -> Result<faer::sparse::linalg::solvers::Lu<usize, f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = op.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(op.n, op.n, &trip)
        .map_err(|e| FdError::Factorization(format!("{e:?}")))?;
    mat.sp_lu().map_err(|e| FdError::Factorization(format!("{e:?}")))
}

fn residuals(op: &Operator, f: &[f64]) -> (f64, f64) {
    let r = op.apply(f);
    let s = op.abs_apply(f);
    let (mut ri, mut si, mut rb, mut sb) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for j in 0..op.n {
        if op.boundary[j] {
            rb = rb.max(r[j].abs());
            sb = sb.max(s[j]);
        } else {
            ri = ri.max(r[j].abs());
            si = si.max(s[j]);
        }
    }
    let rel = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    (rel(ri, si), rel(rb, sb))
}

/// Solves the homogeneous problem by inverse iteration with zero shift and
/// scales the result to unit mass.
pub fn solve_fd(spec: &GridSpec) -> Result<OracleGrid> {
    solve_fd_with(spec, &IterSpec::default())
}

pub fn solve_fd_with(spec: &GridSpec, it: &IterSpec) -> Result<OracleGrid> {
    let op = assemble(spec)?;
    let lu = factorize(&op)?;
    let n = op.n;

    let mut v = Mat::<f64>::from_fn(n, 1, |_, _| 1.0 / (n as f64).sqrt());
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < it.max_iter {
        let prev: Vec<f64> = (0..n).map(|j| v[(j, 0)]).collect();
        lu.solve_in_place_with_conj(Conj::No, v.as_mut());
        iterations += 1;
        let norm = (0..n).map(|j| v[(j, 0)].powi(2)).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(FdError::Factorization(format!("iterate norm {norm}")));
        }
        // Fix the sign so that successive iterates are comparable.
        let sign = if (0..n).map(|j| v[(j, 0)]).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        let scale = sign / norm;
        let mut vmax = 0.0f64;
        change = 0.0;
        for j in 0..n {
            v[(j, 0)] *= scale;
            vmax = vmax.max(v[(j, 0)].abs());
            change = change.max((v[(j, 0)] - prev[j]).abs());
        }
        change /= vmax;
        if change < it.tol {
            break;
        }
    }

    let mut values: Vec<f64> = (0..n).map(|j| v[(j, 0)]).collect();
    let (ri, rb) = residuals(&op, &values);
    if change >= it.tol && ri.max(rb) > 1e-8 {
        return Err(FdError::NotConverged { iterations, change, residual: ri.max(rb) });
    }

    let vmax = values.iter().cloned().fold(f64::MIN, f64::max);
    let vmin = values.iter().cloned().fold(f64::MAX, f64::min);
    let min_relative = (vmin / vmax).min(0.0);
    if min_relative < -1e-8 {
        return Err(FdError::SignChange { ratio: min_relative });
    }
    let normalization = 1.0 / (values.iter().sum::<f64>() * spec.cell_area());
    for x in values.iter_mut() {
        *x *= normalization;
    }

    Ok(OracleGrid {
        spec: *spec,
        values,
        residual_interior: ri,
        residual_boundary: rb,
        normalization,
        iterations,
        min_relative,
    })
}

/// `(x_i, M_i)`: the `eta` sum of each `x` column, midpoint rule.
pub fn oracle_marginal_x(grid: &OracleGrid) -> Vec<(f64, f64)> {
    let g = &grid.spec;
    (0..g.n_x)
        .map(|i| {
            let m: f64 = (0..g.n_eta).map(|k| grid.at(i, k)).sum::<f64>() * g.heta();
            (g.x_center(i), m)
        })
        .collect()
}

/// `(eta_k, G_k)`: the `x` sum of each `eta` row.
pub fn oracle_marginal_eta(grid: &OracleGrid) -> Vec<(f64, f64)> {
    let g = &grid.spec;
    (0..g.n_eta)
        .map(|k| {
            let m: f64 = (0..g.n_x).map(|i| grid.at(i, k)).sum::<f64>() * g.hx();
            (g.eta_center(k), m)
        })
        .collect()
}

/// `sum |G - N(0, eps)| h_eta` over the grid rows.
pub fn eta_gaussian_l1(grid: &OracleGrid) -> f64 {
    let eps = grid.spec.eps;
    let norm = (2.0 * std::f64::consts::PI * eps).sqrt();
    oracle_marginal_eta(grid)
        .iter()
        .map(|&(eta, g)| (g - (-eta * eta / (2.0 * eps)).exp() / norm).abs())
        .sum::<f64>()
        * grid.spec.heta()
}
