//! Interior caustics of the Region I ray field and their cusp.
//!
//! `J(t, s)` is linear in `s`, so `J = 0` gives the launch point `S0(t)` in
//! closed form. The caustic `(x_ca, eta_ca)(t)` has a pole at some
//! `t_pole > 0`; for `t_pole < t < t_c` it traces `C+` (from `x -> inf`,
//! `eta -> -inf`) and for `t_c <= t <= t_*` it traces `C-` down to the
//! `eta`-axis. The cusp `t_c` is where `eta_ca` is stationary.

use serde::Serialize;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::numeric::brent_root;
use crate::region1::{jacobian_i, psi_i, ray1_partials, ray1_position, relation_roots};

const T_SCAN_MAX: f64 = 6.0;
const N_SCAN: usize = 10_000;

/// Common denominator of the closed forms.
pub fn caustic_den(t: f64, d: f64) -> f64 {
    let e = t.exp();
    (2.0 * d * d * t + 4.0 * d * t - 4.0 + 2.0 * t - d * d - 5.0 * d) * e * e + 8.0 * (d + 1.0) * e
        - (3.0 * d + 4.0)
        - 2.0 * (d + 1.0) * t
}

fn pole_check(t: f64, d: f64) -> Result<f64> {
    let den = caustic_den(t, d);
    if !(den.abs() > 1e-300) || !den.is_finite() {
        return Err(Error::Domain(format!("caustic parametrization has a pole at t = {t}")));
    }
    Ok(den)
}

/// Launch point of the ray that touches the caustic at parameter `t`.
pub fn s0_of_t(t: f64, d: f64) -> Result<f64> {
    let den = pole_check(t, d)?;
    let e = t.exp();
    let num = (-2.0 * d - d * d - 4.0 + 2.0 * d * t + 2.0 * t) * e * e + 4.0 * (d + 2.0) * e
        - 2.0 * (2.0 + d + d * t + t);
    Ok(num / den)
}

/// Closed-form caustic point at parameter `t`.
pub fn caustic_point(t: f64, d: f64) -> Result<(f64, f64)> {
    let den = pole_check(t, d)?;
    let e = t.exp();
    let ei = (-t).exp();
    let (d2, t2) = (d * d, t * t);
    let xn = -(d + 1.0).powi(2) * e * e * e
        + (2.0 * d2 * t2 - 3.0 * t * d + d2 * t + 2.0 * t2 - 4.0 * t + d2 + 4.0 * t2 * d + 6.0 * d + 8.0) * e * e
        - 2.0 * (3.0 * d + 7.0) * e
        - ei
        + 2.0 * (d + 1.0) * t2
        + (3.0 * d + 4.0) * t
        + 2.0 * (d + 4.0);
    let en = -(d + 1.0).powi(2) * e * e * e + 2.0 * (2.0 * t * d + 2.0 * t + 2.0 * d - 1.0) * e * e
        + 2.0 * (4.0 - 2.0 * t - 2.0 * t * d - d) * e
        + ei
        - 6.0;
    Ok((xn / den, en / den))
}

fn d_dt(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = 1e-5;
    (f(t + h) - f(t - h)) / (2.0 * h)
}

fn eta_ca(t: f64, d: f64) -> f64 {
    caustic_point(t, d).map(|p| p.1).unwrap_or(f64::NAN)
}

fn x_ca(t: f64, d: f64) -> f64 {
    caustic_point(t, d).map(|p| p.0).unwrap_or(f64::NAN)
}

/// The pole of the parametrization, i.e. the start of `C+`.
pub fn caustic_pole(d: f64) -> Result<f64> {
    let h = T_SCAN_MAX / N_SCAN as f64;
    let mut prev = caustic_den(h, d);
    for k in 2..=N_SCAN {
        let t = h * k as f64;
        let cur = caustic_den(t, d);
        if cur.signum() != prev.signum() {
            return brent_root(|t| caustic_den(t, d), t - h, t, 1e-15);
        }
        prev = cur;
    }
    Err(Error::Search(format!("no caustic pole in (0, {T_SCAN_MAX}] for D = {d}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cusp {
    pub t: f64,
    pub s: f64,
    pub x: f64,
    pub eta: f64,
    /// Common tangent slope `d eta / d x` of both caustics at the cusp.
    pub slope: f64,
}

fn compute_cusp(d: f64) -> Result<Cusp> {
    let tp = caustic_pole(d)?;
    // Keep the difference stencil clear of the pole.
    let lo = tp + 1e-4;
    let h = (T_SCAN_MAX - lo) / N_SCAN as f64;
    let deta = |t: f64| d_dt(|u| eta_ca(u, d), t);
    let mut prev = deta(lo);
    for k in 1..=N_SCAN {
        let t = lo + h * k as f64;
        let cur = deta(t);
        if cur.is_finite() && prev.is_finite() && cur.signum() != prev.signum() {
            let tc = brent_root(deta, t - h, t, 1e-13)?;
            let (x, eta) = caustic_point(tc, d)?;
            let dx = d_dt(|u| x_ca(u, d), tc);
            if dx.abs() > 1e-5 * (1.0 + x.abs()) {
                return Err(Error::Search(format!("stationary eta_ca at t = {tc} is not a cusp (dx/dt = {dx:e})")));
            }
            let s = s0_of_t(tc, d)?;
            let m = ray1_partials(tc, s, d);
            return Ok(Cusp { t: tc, s, x, eta, slope: m[1][0] / m[0][0] });
        }
        prev = cur;
    }
    Err(Error::Search(format!("no cusp in ({lo}, {T_SCAN_MAX}] for D = {d}")))
}

/// The cusp where `C+` and `C-` meet. Results are cached per `D`.
pub fn find_cusp(d: f64) -> Result<Cusp> {
    static CACHE: Mutex<Vec<(u64, Cusp)>> = Mutex::new(Vec::new());
    let key = d.to_bits();
    if let Some(c) = CACHE.lock().unwrap().iter().find(|e| e.0 == key) {
        return Ok(c.1);
    }
    let c = compute_cusp(d)?;
    let mut cache = CACHE.lock().unwrap();
    if cache.len() > 64 {
        cache.clear();
    }
    cache.push((key, c));
    Ok(c)
}

/// Parameter `t_*` and height `eta_*` where `C-` reaches `x = 0`.
pub fn find_eta_star(d: f64) -> Result<(f64, f64)> {
    let tc = find_cusp(d)?.t;
    let h = (T_SCAN_MAX - tc) / N_SCAN as f64;
    let mut prev = x_ca(tc, d);
    for k in 1..=N_SCAN {
        let t = tc + h * k as f64;
        let cur = x_ca(t, d);
        if cur <= 0.0 && prev > 0.0 {
            let ts = brent_root(|u| x_ca(u, d), t - h, t, 1e-15)?;
            return Ok((ts, eta_ca(ts, d)));
        }
        prev = cur;
    }
    Err(Error::Search(format!("C- does not reach x = 0 before t = {T_SCAN_MAX} (D = {d})")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CausticBranch {
    #[serde(rename = "C+")]
    Plus,
    #[serde(rename = "C-")]
    Minus,
}

impl CausticBranch {
    pub fn label(self) -> &'static str {
        match self {
            CausticBranch::Plus => "C+",
            CausticBranch::Minus => "C-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CausticSample {
    pub t: f64,
    pub s0: f64,
    pub x_ca: f64,
    pub eta_ca: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CausticCurve {
    pub branch: CausticBranch,
    pub samples: Vec<CausticSample>,
}

/// The `t`-interval of a caustic branch. `C+` is cut where `x_ca` first
/// drops below `x_cap`.
pub fn branch_interval(branch: CausticBranch, d: f64, x_cap: f64) -> Result<(f64, f64)> {
    let cusp = find_cusp(d)?;
    match branch {
        CausticBranch::Plus => {
            let tp = caustic_pole(d)?;
            if cusp.x >= x_cap {
                return Ok((cusp.t, cusp.t));
            }
            let lo = brent_root(|t| x_ca(t, d) - x_cap, tp + 1e-12, cusp.t, 1e-15)?;
            Ok((lo, cusp.t))
        }
        CausticBranch::Minus => Ok((cusp.t, find_eta_star(d)?.0)),
    }
}

/// `n` samples of a caustic branch, uniform in `t`.
pub fn caustic_curve(branch: CausticBranch, d: f64, n: usize, x_cap: f64) -> Result<CausticCurve> {
    let (a, b) = branch_interval(branch, d, x_cap)?;
    let n = n.max(2);
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = a + (b - a) * k as f64 / (n - 1) as f64;
        let s0 = s0_of_t(t, d)?;
        let (x, eta) = caustic_point(t, d)?;
        samples.push(CausticSample { t, s0, x_ca: x, eta_ca: eta });
    }
    Ok(CausticCurve { branch, samples })
}

/// Number of distinct ray preimages of `(x, eta)` (1, 2 or 3).
pub fn branch_count(x: f64, eta: f64, d: f64) -> usize {
    relation_roots(x, eta, d).len()
}

/// What happens to the ray branches at one caustic point: the colliding
/// (double) branch and the surviving one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Collision {
    pub t: f64,
    pub s_double: f64,
    pub psi_double: f64,
    pub s_other: f64,
    pub psi_other: f64,
    pub jac_other: f64,
}

/// Branches at the caustic point with parameter `t`. Errors if the point
/// does not show exactly one double and one simple preimage.
pub fn collision_at(t: f64, d: f64) -> Result<Collision> {
    let (x, eta) = caustic_point(t, d)?;
    let s_d = s0_of_t(t, d)?;
    let roots = relation_roots(x, eta, d);
    if roots.len() != 2 {
        return Err(Error::Search(format!("{} preimages at caustic point t = {t}", roots.len())));
    }
    let (dbl, other) = if (roots[0].s - s_d).abs() < (roots[1].s - s_d).abs() {
        (roots[0], roots[1])
    } else {
        (roots[1], roots[0])
    };
    Ok(Collision {
        t,
        s_double: dbl.s,
        psi_double: psi_i(dbl.t, dbl.s, d),
        s_other: other.s,
        psi_other: psi_i(other.t, other.s, d),
        jac_other: jacobian_i(other.t, other.s, d),
    })
}

/// Check that `(x, eta)` is the ray point `(t, S0(t))`; used by tests and
/// the verification suite.
pub fn substitution_gap(t: f64, d: f64) -> Result<f64> {
    let (x, eta) = caustic_point(t, d)?;
    let (xr, er) = ray1_position(t, s0_of_t(t, d)?, d);
    Ok((x - xr).abs().max((eta - er).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s0_zeroes_the_jacobian() {
        for &(t, d) in &[(1.0, 1.0), (0.5, 1.0), (2.0, 0.5), (1.5, 2.0), (3.0, 1.0)] {
            let s = s0_of_t(t, d).unwrap();
            assert!(jacobian_i(t, s, d).abs() < 1e-9, "t={t} D={d}");
            // J is linear in s: bisect on [-50, 50] as an independent oracle.
            let (mut a, mut b) = (-50.0, 50.0);
            let fa = jacobian_i(t, a, d);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if jacobian_i(t, m, d).signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            assert!((0.5 * (a + b) - s).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_form_equals_substitution() {
        for &(t, d) in &[(1.0, 1.0), (0.3, 1.0), (1.5, 2.0), (2.2, 0.5)] {
            let gap = substitution_gap(t, d).unwrap();
            let (x, e) = caustic_point(t, d).unwrap();
            assert!(gap < 1e-9 * (1.0 + x.abs() + e.abs()), "t={t} D={d} gap={gap:e}");
        }
    }

    #[test]
    fn pole_locations() {
        for &(d, want) in &[(0.5, 0.3224), (1.0, 0.3808), (2.0, 0.4272)] {
            let tp = caustic_pole(d).unwrap();
            assert!((tp - want).abs() < 5e-4, "D={d}: {tp}");
        }
    }

    #[test]
    fn cusp_for_three_diffusivities() {
        for &(d, tc, xc, ec) in &[(1.0, 1.1105, 0.6520, -0.9698), (0.5, 0.924, 0.4428, -0.4948), (2.0, 1.261, 0.8572, -1.4117)] {
            let c = find_cusp(d).unwrap();
            assert!((c.t - tc).abs() < 2e-3, "D={d}: t_c={}", c.t);
            assert!((c.x - xc).abs() < 1e-3 && (c.eta - ec).abs() < 1e-3, "D={d}: {c:?}");
            assert!(jacobian_i(c.t, c.s, d).abs() < 1e-9);
        }
    }

    #[test]
    fn curve_is_stationary_at_cusp() {
        let c = find_cusp(1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..4 {
            let dl = 1e-2 / 2f64.powi(k);
            let (x, e) = caustic_point(c.t + dl, 1.0).unwrap();
            let dist = (x - c.x).hypot(e - c.eta);
            if k > 0 {
                // Quadratic: halving delta quarters the distance.
                assert!((prev / dist - 4.0).abs() < 0.3, "{prev} {dist}");
            }
            prev = dist;
            // Both sides leave along the common tangent.
            let (xm, em) = caustic_point(c.t - dl, 1.0).unwrap();
            for (px, pe) in [(x, e), (xm, em)] {
                let slope = (pe - c.eta) / (px - c.x);
                assert!((slope - c.slope).abs() < 20.0 * dl * (1.0 + c.slope.abs()));
            }
        }
    }

    #[test]
    fn eta_star_values() {
        for &(d, ts, es) in &[(1.0, 2.4986, -2.4901), (0.5, 2.133, -1.697), (2.0, 2.78, -3.221)] {
            let (t, e) = find_eta_star(d).unwrap();
            assert!((t - ts).abs() < 2e-3 && (e - es).abs() < 2e-3, "D={d}: {t} {e}");
            assert!(x_ca(t, d).abs() < 1e-8);
        }
    }

    #[test]
    fn branch_counts() {
        assert_eq!(branch_count(3.0, -3.0, 1.0), 1);
        assert_eq!(branch_count(0.5, 0.0, 1.0), 1);
        for &t in &[0.6, 0.9, 1.5, 2.0] {
            let (x, e) = caustic_point(t, 1.0).unwrap();
            assert_eq!(branch_count(x, e, 1.0), 2, "t={t} ({x}, {e})");
        }
        // Midpoint between the two branches at eta = -2. (C+ doubles back
        // in x just before the cusp, so a fixed-x cut is nearly degenerate.)
        let c = find_cusp(1.0).unwrap();
        let tp = brent_root(|t| eta_ca(t, 1.0) + 2.0, caustic_pole(1.0).unwrap() + 1e-9, c.t, 1e-14).unwrap();
        let tm = brent_root(|t| eta_ca(t, 1.0) + 2.0, c.t, find_eta_star(1.0).unwrap().0, 1e-14).unwrap();
        let mid = 0.5 * (x_ca(tp, 1.0) + x_ca(tm, 1.0));
        assert_eq!(branch_count(mid, -2.0, 1.0), 3);
        assert_eq!(branch_count(x_ca(tp, 1.0) + 0.05, -2.0, 1.0), 1);
        assert_eq!(branch_count(x_ca(tm, 1.0) - 0.05, -2.0, 1.0), 1);
    }

    #[test]
    fn cusp_circle_signature() {
        // On a small circle around the cusp the three-branch arc is a
        // single contiguous wedge, entered and left once.
        let c = find_cusp(1.0).unwrap();
        let n = 240;
        let counts: Vec<usize> = (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                branch_count(c.x + 0.03 * th.cos(), c.eta + 0.03 * th.sin(), 1.0)
            })
            .collect();
        let changes = (0..n).filter(|&k| (counts[k] == 3) != (counts[(k + 1) % n] == 3)).count();
        assert_eq!(changes, 2, "{counts:?}");
        assert!(counts.iter().all(|&m| m == 1 || m == 3 || m == 2));
    }

    #[test]
    fn collision_pattern() {
        for &d in &[0.5, 1.0, 2.0] {
            let c = find_cusp(d).unwrap();
            let (lo, _) = branch_interval(CausticBranch::Plus, d, 4.0).unwrap();
            let (_, ts) = branch_interval(CausticBranch::Minus, d, 4.0).unwrap();
            for k in 1..6 {
                let f = k as f64 / 6.0;
                let p = collision_at(lo + f * (c.t - lo), d).unwrap();
                assert!(p.s_other > p.s_double && p.psi_other > p.psi_double, "C+ D={d} {p:?}");
                let m = collision_at(c.t + f * (ts - c.t), d).unwrap();
                assert!(m.s_other < m.s_double && m.psi_other > m.psi_double, "C- D={d} {m:?}");
            }
        }
    }

    #[test]
    fn curves_sample_the_zero_set() {
        for br in [CausticBranch::Plus, CausticBranch::Minus] {
            let cv = caustic_curve(br, 1.0, 50, 4.0).unwrap();
            assert!(cv.samples.windows(2).all(|w| w[0].t < w[1].t));
            for s in &cv.samples {
                assert!(jacobian_i(s.t, s.s0, 1.0).abs() < 1e-9);
                assert!(crate::model::in_region_one(s.x_ca + 1e-12, s.eta_ca));
            }
        }
    }
}
