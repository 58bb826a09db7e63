//! Grid description and assembly of the discrete operator.
//!
//! The equation is written in conservation form,
//! `d/dx [eps D F_x + (1 - eta) F] + d/deta [eps F_eta + eta F] = 0`,
//! and discretized by cell-centred finite volumes. Unknowns sit at cell
//! centres; every face carries a two-point flux `G = c_r F_r - c_l F_l`.
//! The face at `x = 0` has zero total flux, which is the Robin condition
//! in flux form. The other three edges hold `F = 0` on the face itself.

use serde::{Deserialize, Serialize};

use crate::error::{FdError, Result};

/// Two-point flux approximation for `G = a F' + v F`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Exponentially fitted (Scharfetter-Gummel) flux.
    #[default]
    ScharfetterGummel,
    /// Central diffusion with first-order upwind convection.
    Upwind,
    /// Central diffusion and central convection.
    Centered,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ScharfetterGummel => "sg",
            Scheme::Upwind => "upwind",
            Scheme::Centered => "centered",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "sg" | "scharfetter-gummel" => Some(Scheme::ScharfetterGummel),
            "upwind" => Some(Scheme::Upwind),
            "centered" | "centred" => Some(Scheme::Centered),
            _ => None,
        }
    }

    /// Coefficients `(c_l, c_r)` of the flux across a gap `h` with
    /// diffusivity `a` and velocity `v`.
    pub fn face(self, a: f64, v: f64, h: f64) -> (f64, f64) {
        let k = a / h;
        match self {
            Scheme::ScharfetterGummel => {
                let z = v * h / a;
                (k * bernoulli(z), k * bernoulli(-z))
            }
            Scheme::Upwind => (k - v.min(0.0), k + v.max(0.0)),
            Scheme::Centered => (k - 0.5 * v, k + 0.5 * v),
        }
    }
}

/// `B(z) = z / (e^z - 1)`, with `B(0) = 1`.
pub fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// Truncated box, resolution, model parameters and flux scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub n_x: usize,
    pub n_eta: usize,
    pub eps: f64,
    pub d: f64,
    pub scheme: Scheme,
}

impl GridSpec {
    /// The standard box `[0, 3] x [-2, 3]` at 300 x 400 cells.
    pub fn standard(eps: f64, d: f64) -> Self {
        Self {
            x_max: 3.0,
            eta_min: -2.0,
            eta_max: 3.0,
            n_x: 300,
            n_eta: 400,
            eps,
            d,
            scheme: Scheme::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FdError::InvalidSpec(m));
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return bad(format!("x_max must be positive, got {}", self.x_max));
        }
        if !(self.eta_min < 0.0 && self.eta_max > 1.0) || !self.eta_min.is_finite() || !self.eta_max.is_finite() {
            return bad(format!(
                "need eta_min < 0 < 1 < eta_max, got [{}, {}]",
                self.eta_min, self.eta_max
            ));
        }
        if self.n_x < 2 || self.n_eta < 2 {
            return bad(format!("need at least 2 cells per direction, got {} x {}", self.n_x, self.n_eta));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return bad(format!("D must be positive, got {}", self.d));
        }
        if self.scheme == Scheme::Centered && self.max_peclet() > 2.0 {
            return bad(format!(
                "centered fluxes need cell Peclet <= 2, got {:.3}; refine or pick another scheme",
                self.max_peclet()
            ));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        self.x_max / self.n_x as f64
    }

    pub fn heta(&self) -> f64 {
        (self.eta_max - self.eta_min) / self.n_eta as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.heta()
    }

    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hx()
    }

    pub fn eta_center(&self, k: usize) -> f64 {
        self.eta_min + (k as f64 + 0.5) * self.heta()
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_eta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.n_eta + k
    }

    /// Largest cell Peclet number `h |v| / a` over both directions.
    pub fn max_peclet(&self) -> f64 {
        let vx = (1.0 - self.eta_min).abs().max((1.0 - self.eta_max).abs());
        let ve = self.eta_min.abs().max(self.eta_max.abs());
        (self.hx() * vx / (self.eps * self.d)).max(self.heta() * ve / self.eps)
    }

    /// Same spacing, box enlarged by about `factor` in every truncated
    /// direction (rounded up to whole cells).
    pub fn enlarged(&self, factor: f64) -> Self {
        let (hx, he) = (self.hx(), self.heta());
        let nx = (self.n_x as f64 * factor).ceil() as usize;
        let grow = ((factor - 1.0) * self.n_eta as f64 / 2.0).ceil() as usize;
        Self {
            x_max: nx as f64 * hx,
            eta_min: self.eta_min - grow as f64 * he,
            eta_max: self.eta_max + grow as f64 * he,
            n_x: nx,
            n_eta: self.n_eta + 2 * grow,
            ..*self
        }
    }

    /// Both spacings halved.
    pub fn refined(&self) -> Self {
        Self { n_x: 2 * self.n_x, n_eta: 2 * self.n_eta, ..*self }
    }
}

/// Row-compressed operator. Each row is the flux balance of one cell.
#[derive(Clone, Debug)]
pub struct Operator {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    /// Rows of cells that touch a truncation edge or `x = 0`.
    pub boundary: Vec<bool>,
}

impl Operator {
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|j| self.vals[j] * f[self.cols[j]])
                    .sum()
            })
            .collect()
    }

    /// `sum_c |A_rc| |f_c|` for each row, the natural scale of a residual.
    pub fn abs_apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|j| (self.vals[j] * f[self.cols[j]]).abs())
                    .sum()
            })
            .collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |j| (r, self.cols[j], self.vals[j])))
    }
}

/// Builds the cell balances `(G_right - G_left)/h_x + (G_top - G_bottom)/h_eta`.
pub fn assemble(spec: &GridSpec) -> Result<Operator> {
    spec.validate()?;
    let (hx, he) = (spec.hx(), spec.heta());
    let ax = spec.eps * spec.d;
    let ae = spec.eps;
    let sch = spec.scheme;
    let n = spec.len();

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(5 * n);
    let mut vals = Vec::with_capacity(5 * n);
    let mut boundary = vec![false; n];
    row_ptr.push(0);

    for i in 0..spec.n_x {
        for k in 0..spec.n_eta {
            let r = spec.index(i, k);
            let eta = spec.eta_center(k);
            let mut diag = 0.0;
            let mut push = |c: usize, v: f64| {
                cols.push(c);
                vals.push(v);
            };

            // x direction: velocity 1 - eta is constant along the row.
            let vx = 1.0 - eta;
            if i + 1 < spec.n_x {
                let (cl, cr) = sch.face(ax, vx, hx);
                push(spec.index(i + 1, k), cr / hx);
                diag -= cl / hx;
            } else {
                let (cl, _) = sch.face(ax, vx, 0.5 * hx);
                diag -= cl / hx;
                boundary[r] = true;
            }
            if i > 0 {
                let (cl, cr) = sch.face(ax, vx, hx);
                push(spec.index(i - 1, k), cl / hx);
                diag -= cr / hx;
            } else {
                boundary[r] = true;
            }

            // eta direction: velocity eta evaluated on the face.
            if k + 1 < spec.n_eta {
                let (cl, cr) = sch.face(ae, eta + 0.5 * he, he);
                push(spec.index(i, k + 1), cr / he);
                diag -= cl / he;
            } else {
                let (cl, _) = sch.face(ae, eta + 0.5 * he, 0.5 * he);
                diag -= cl / he;
                boundary[r] = true;
            }
            if k > 0 {
                let (cl, cr) = sch.face(ae, eta - 0.5 * he, he);
                push(spec.index(i, k - 1), cl / he);
                diag -= cr / he;
            } else {
                let (_, cr) = sch.face(ae, eta - 0.5 * he, 0.5 * he);
                diag -= cr / he;
                boundary[r] = true;
            }

            push(r, diag);
            row_ptr.push(cols.len());
        }
    }
    Ok(Operator { n, row_ptr, cols, vals, boundary })
}
