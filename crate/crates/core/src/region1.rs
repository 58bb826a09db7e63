//! Region I: rays launched from the `eta`-axis with `s < 1`.
//!
//! Along a ray `Psi_x = A = (s-1)/D` is constant and `Psi_eta = (B-A)e^t + A`
//! with `B = -s`. Inside the caustic region a point has three preimages.

use serde::Serialize;

use crate::caustics;
use crate::error::{domain, Error, Result};
use crate::eval::{nu, LayerEval};
use crate::model::{in_region_one, x0_boundary, LayerThresholds, ModelParams, PhysPoint, Region, RegionTag, ScaledCoords};
use crate::numeric::{brent_min, brent_root};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RayCoordI {
    pub t: f64,
    pub s: f64,
}

impl RayCoordI {
    pub fn a(&self, d: f64) -> f64 {
        (self.s - 1.0) / d
    }

    pub fn b(&self) -> f64 {
        -self.s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RayStateI {
    pub x: f64,
    pub eta: f64,
    pub psi: f64,
    pub psi_x: f64,
    pub psi_eta: f64,
    pub jac: f64,
    /// `None` where the amplitude is not defined (`J <= 0` or `s >= 1`).
    pub amp: Option<f64>,
}

// x = e^t - 1 - t - P(t)(s-1)/D,  eta = e^t + Q(t)(s-1)/D
fn p_fn(t: f64, d: f64) -> f64 {
    (d + 1.0) * (2.0 * t - t.exp_m1()) + (-t).exp_m1()
}

fn q_fn(t: f64, d: f64) -> f64 {
    // e^{-t} + (D+1)e^t - 2, written to keep accuracy as t -> 0.
    2.0 * (t.cosh() - 1.0) + d * t.exp()
}

pub fn ray1_position(t: f64, s: f64, d: f64) -> (f64, f64) {
    let x = t.exp_m1() - t - p_fn(t, d) * (s - 1.0) / d;
    let eta = t.exp() + q_fn(t, d) * (s - 1.0) / d;
    (x, eta)
}

pub fn psi_i(t: f64, s: f64, d: f64) -> f64 {
    let e = t.exp();
    let u = s - 1.0;
    -0.5 * e * e + (2.0 * e - (d + 1.0) * e * e - 1.0) / d * u
        + (-1.0 + (4.0 * e - 2.0 * (t + 1.0)) * (d + 1.0) - e * e * (d + 1.0) * (d + 1.0)) / (2.0 * d * d) * u * u
}

/// `[[x_t, x_s], [eta_t, eta_s]]`.
pub fn ray1_partials(t: f64, s: f64, d: f64) -> [[f64; 2]; 2] {
    let e = t.exp();
    let ei = (-t).exp();
    let u = s - 1.0;
    let dp = (d + 1.0) * (2.0 - e) - ei;
    let dq = -ei + (d + 1.0) * e;
    [
        [e - 1.0 - dp * u / d, -p_fn(t, d) / d],
        [e + dq * u / d, q_fn(t, d) / d],
    ]
}

/// Closed-form Jacobian `x_t eta_s - x_s eta_t`.
pub fn jacobian_i(t: f64, s: f64, d: f64) -> f64 {
    let e = t.exp();
    let ei = (-t).exp();
    let d2 = d * d;
    (2.0 * (t - 2.0) * (s - 1.0) / d2 + (-2.0 * t - 5.0 * s + 4.0 * t * s + 2.0) / d - s + 2.0 * t * s + 1.0) * e
        + (-2.0 * (t + 2.0) * (s - 1.0) / d2 + (2.0 * t - 2.0 * t * s + 2.0 - 3.0 * s) / d) * ei
        + 8.0 * (s - 1.0) / d2
        + 4.0 * (2.0 * s - 1.0) / d
}

/// `K = (1-s)^{3/2} e^{t/2} / (D sqrt(2 pi) sqrt(J))`.
pub fn amplitude_k(t: f64, s: f64, d: f64) -> Result<f64> {
    if !(s < 1.0) {
        return domain(format!("amplitude K needs s < 1, got {s}"));
    }
    let j = jacobian_i(t, s, d);
    if !(j > 0.0) {
        return Err(Error::Caustic { jac: j });
    }
    Ok((1.0 - s).powf(1.5) * (0.5 * t).exp() / (d * (2.0 * std::f64::consts::PI).sqrt() * j.sqrt()))
}

pub fn ray1_forward(t: f64, s: f64, d: f64) -> RayStateI {
    let (x, eta) = ray1_position(t, s, d);
    let a = (s - 1.0) / d;
    let b = -s;
    RayStateI {
        x,
        eta,
        psi: psi_i(t, s, d),
        psi_x: a,
        psi_eta: (b - a) * t.exp() + a,
        jac: jacobian_i(t, s, d),
        amp: amplitude_k(t, s, d).ok(),
    }
}

/// Launch point of the ray through height `eta` at parameter `t`.
pub fn s_from_eta(t: f64, eta: f64, d: f64) -> f64 {
    (2.0 * (t.cosh() - 1.0) + d * eta) / q_fn(t, d)
}

/// Launch point of the ray through abscissa `x` at parameter `t`.
pub fn s_from_x(t: f64, x: f64, d: f64) -> f64 {
    let e = t.exp();
    let ei = (-t).exp();
    (-e + ei + d * t + 2.0 * t - d * x) / (-d * e - e + ei + 2.0 * d * t + 2.0 * t + d)
}

/// The implicit ray relation `R(x, eta, t)`; zero exactly when some ray
/// reaches `(x, eta)` at parameter `t`.
pub fn ray1_relation(x: f64, eta: f64, t: f64, d: f64) -> f64 {
    let e = t.exp();
    let ei = (-t).exp();
    q_fn(t, d) * x + (3.0 - d * eta - t - d * t - eta) * e + (1.0 + t + eta) * ei - 4.0 - 2.0 * t
        + d * eta
        + 2.0 * t * eta
        + 2.0 * d * eta * t
}

fn relation_scale(x: f64, eta: f64, t: f64, d: f64) -> f64 {
    let e = t.exp();
    let ei = (-t).exp();
    q_fn(t, d) * x.abs()
        + (3.0 + (d + 1.0) * (eta.abs() + t)) * e
        + (1.0 + t + eta.abs()) * ei
        + 4.0
        + 2.0 * t
        + (d + 2.0 * t + 2.0 * d * t) * eta.abs()
}

/// Parameter at which the ray from `s` reaches its largest `x`; rays with
/// `s >= 1/(D+1)` never turn.
pub fn t_x_max(s: f64, d: f64) -> Result<f64> {
    let den = 1.0 - s - d * s;
    if !(den > 0.0) {
        return domain(format!("rays with s >= 1/(D+1) have no x maximum (s = {s})"));
    }
    let disc = d * (4.0 * s * s * d - 4.0 * s * d - 8.0 * s + 4.0 * s * s + d + 4.0);
    Ok(((-2.0 * s * d + d + 2.0 - 2.0 * s + disc.sqrt()) / (2.0 * den)).ln())
}

/// Parameter at which the ray from `0 < s < 1/(D+1)` reaches its largest `eta`.
pub fn t_eta_max(s: f64, d: f64) -> Result<f64> {
    let den = 1.0 - s - d * s;
    if !(s > 0.0 && den > 0.0) {
        return domain(format!("eta maximum exists only for 0 < s < 1/(D+1), got {s}"));
    }
    Ok(0.5 * ((1.0 - s) / den).ln())
}

/// The positive parameter at which a turning ray (`s < 1/(D+1)`) returns
/// to `x = 0`.
pub fn return_time(s: f64, d: f64) -> Result<f64> {
    let tm = t_x_max(s, d)?;
    let x_of = |t: f64| ray1_position(t, s, d).0;
    let mut hi = tm + 1.0;
    let mut k = 0;
    while x_of(hi) > 0.0 {
        hi = tm + 2.0 * (hi - tm);
        k += 1;
        if k > 60 {
            return Err(Error::Search(format!("no return to x = 0 for s = {s}")));
        }
    }
    brent_root(x_of, tm, hi, 1e-15)
}

/// True when the ray from `s` is still in `x >= 0` at parameter `t`.
pub fn ray_alive(t: f64, s: f64, d: f64) -> bool {
    if s * (d + 1.0) < 1.0 {
        match return_time(s, d) {
            Ok(ts) => t <= ts * (1.0 + 1e-12) + 1e-14,
            Err(_) => false,
        }
    } else {
        true
    }
}

/// A root of the ray relation in `t` with its multiplicity (1 or 2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TRoot {
    pub t: f64,
    pub s: f64,
    pub double: bool,
}

fn scan_nodes(x: f64, eta: f64) -> Vec<f64> {
    let t_max = 8.0 + x + eta.abs();
    let mut nodes = vec![0.0];
    let n_geo = 120;
    for k in 0..n_geo {
        nodes.push(1e-14 * (0.05f64 / 1e-14).powf(k as f64 / (n_geo - 1) as f64));
    }
    let n_lin = ((t_max - 0.05) / 0.004).ceil() as usize;
    for k in 1..=n_lin {
        nodes.push(0.05 + (t_max - 0.05) * k as f64 / n_lin as f64);
    }
    nodes
}

/// All roots of `R(x, eta, .)` on `t >= 0` that belong to valid rays
/// (`s <= 1`, still inside `x >= 0`). Tangential (double) roots are
/// detected from local extrema of `R` that reach zero within rounding.
pub fn relation_roots(x: f64, eta: f64, d: f64) -> Vec<TRoot> {
    let f = |t: f64| ray1_relation(x, eta, t, d);
    let nodes = scan_nodes(x, eta);
    let vals: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
    let mut found: Vec<(f64, bool)> = Vec::new();
    let zero_tol = |t: f64| 1e-11 * relation_scale(x, eta, t, d);

    for k in 0..nodes.len() - 1 {
        let (a, b) = (vals[k], vals[k + 1]);
        if a == 0.0 {
            found.push((nodes[k], false));
        } else if a.signum() != b.signum() && b != 0.0 {
            if let Ok(r) = brent_root(f, nodes[k], nodes[k + 1], 1e-15) {
                found.push((r, false));
            }
        }
    }
    if vals.last() == Some(&0.0) {
        found.push((*nodes.last().unwrap(), false));
    }
    for k in 1..nodes.len() - 1 {
        let (dl, dr) = (vals[k] - vals[k - 1], vals[k + 1] - vals[k]);
        if dl.signum() == dr.signum() || dl == 0.0 || dr == 0.0 {
            continue;
        }
        // Local extremum near node k: turn it into a minimum.
        let sg = if dl < 0.0 { 1.0 } else { -1.0 };
        let (lo, hi) = (nodes[k - 1], nodes[k + 1]);
        let (te, fe) = brent_min(|t| sg * f(t), lo, hi, 1e-12);
        let fe = sg * fe;
        let (fl, fh) = (vals[k - 1], vals[k + 1]);
        if fe.abs() <= zero_tol(te) {
            found.push((te, true));
        } else if fe.signum() != fl.signum() && fe.signum() != fh.signum() && fl.signum() == fh.signum() {
            // Two close simple roots inside one cell.
            for (p, q) in [(lo, te), (te, hi)] {
                if let Ok(r) = brent_root(f, p, q, 1e-15) {
                    found.push((r, false));
                }
            }
        }
    }

    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<TRoot> = Vec::new();
    for (t, double) in found {
        let s = if t == 0.0 { eta } else { s_from_eta(t, eta, d) };
        if let Some(last) = out.last_mut() {
            if (last.t - t).abs() < 1e-6 && (last.s - s).abs() < 1e-6 {
                last.double |= double;
                continue;
            }
        }
        out.push(TRoot { t, s, double });
    }
    out.retain(|r| r.t >= 0.0 && r.s <= 1.0 + 1e-12 && ray_alive(r.t, r.s, d));
    out
}

/// Distinct ray preimages of `(x, eta)`, ordered by launch point.
pub fn ray1_invert(x: f64, eta: f64, d: f64, hint: Option<RayCoordI>) -> Result<Vec<RayCoordI>> {
    if !in_region_one(x, eta) {
        return domain(format!("({x}, {eta}) is not in Region I"));
    }
    let mut out: Vec<RayCoordI> = relation_roots(x, eta, d)
        .into_iter()
        .map(|r| RayCoordI { t: r.t, s: r.s.min(1.0) })
        .collect();
    if let Some(h) = hint {
        if let Ok(c) = newton_polish(x, eta, d, h) {
            if !out.iter().any(|o| (o.t - c.t).abs() < 1e-6 && (o.s - c.s).abs() < 1e-6) {
                out.push(c);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoConvergence { what: "ray1_invert", residual: f64::NAN });
    }
    for c in &out {
        let (xr, er) = ray1_position(c.t, c.s, d);
        let res = (xr - x).abs() + (er - eta).abs();
        if res > 1e-8 * (1.0 + x.abs() + eta.abs()) {
            return Err(Error::NoConvergence { what: "ray1_invert", residual: res });
        }
    }
    out.sort_by(|a, b| a.s.total_cmp(&b.s));
    Ok(out)
}

/// Damped Newton on the forward map from a nearby `(t, s)`.
pub fn newton_polish(x: f64, eta: f64, d: f64, seed: RayCoordI) -> Result<RayCoordI> {
    let (mut t, mut s) = (seed.t, seed.s);
    let scale = 1.0 + x.abs() + eta.abs();
    for _ in 0..60 {
        let (xr, er) = ray1_position(t, s, d);
        let (fx, fe) = (xr - x, er - eta);
        if fx.abs() + fe.abs() < 1e-14 * scale {
            break;
        }
        let m = ray1_partials(t, s, d);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Caustic { jac: det });
        }
        let dt = (m[1][1] * fx - m[0][1] * fe) / det;
        let ds = (-m[1][0] * fx + m[0][0] * fe) / det;
        let mut lam = 1.0;
        let r0 = fx.abs() + fe.abs();
        loop {
            let (tn, sn) = (t - lam * dt, s - lam * ds);
            let (a, b) = ray1_position(tn, sn, d);
            if (a - x).abs() + (b - eta).abs() < r0 || lam < 1e-6 {
                t = tn;
                s = sn;
                break;
            }
            lam *= 0.5;
        }
    }
    let (xr, er) = ray1_position(t, s, d);
    let res = (xr - x).abs() + (er - eta).abs();
    if res > 1e-10 * scale || t < 0.0 {
        return Err(Error::NoConvergence { what: "newton_polish", residual: res });
    }
    Ok(RayCoordI { t, s })
}

/// Number of distinct ray preimages of a Region I point (1, 2 or 3).
pub fn branch_count(x: f64, eta: f64, d: f64) -> usize {
    relation_roots(x, eta, d).len()
}

/// Singularity threshold below which a branch is dropped from the sum.
pub fn jacobian_threshold(t: f64) -> f64 {
    1e-8 * (1.0 + t.abs())
}

/// `eps^{-3/2} sum_j K_j exp(Psi_j/eps)` over the finite-amplitude branches.
pub fn eval_f_region_i(p: PhysPoint, params: ModelParams) -> Result<LayerEval> {
    let p = PhysPoint::new(p.x, p.eta)?;
    let d = params.d;
    if let Ok(c) = caustics::find_cusp(d) {
        if (p.x - c.x).hypot(p.eta - c.eta) <= LayerThresholds::default().cusp_radius {
            return Err(Error::Unsupported("the neighbourhood of the cusp"));
        }
    }
    if p.eta > 1.0 && p.x < x0_boundary(p.eta)? {
        return domain(format!("({}, {}) lies in Region II", p.x, p.eta));
    }
    let tag = RegionTag { region: Region::RegionI, coords: ScaledCoords::of(p, params) };
    let mut out = LayerEval::new(tag, params.eps, nu::REGION_I);
    let branches = ray1_invert(p.x, p.eta, d, None)?;
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for c in &branches {
        let j = jacobian_i(c.t, c.s, d);
        if j > jacobian_threshold(c.t) && c.s < 1.0 {
            kept.push((psi_i(c.t, c.s, d), amplitude_k(c.t, c.s, d)?));
        } else if c.s >= 1.0 {
            // The limiting s = 1 ray on X0 carries zero amplitude.
            kept.push((psi_i(c.t, 1.0, d), 0.0));
        } else {
            out.diagnostics
                .push(format!("dropped branch t={:.6e} s={:.6e} with J={j:.3e}", c.t, c.s));
        }
    }
    if kept.is_empty() {
        return Err(Error::Caustic { jac: 0.0 });
    }
    let pmax = kept.iter().map(|k| k.0).fold(f64::NEG_INFINITY, f64::max);
    let amp: f64 = kept.iter().map(|(ps, k)| k * ((ps - pmax) / params.eps).exp()).sum();
    out.phase_1 = pmax;
    out.amplitude = amp;
    if branches.len() > 1 {
        out.diagnostics.push(format!("{} ray branches", branches.len()));
    }
    Ok(out)
}
