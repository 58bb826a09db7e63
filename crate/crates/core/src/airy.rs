//! Airy function Ai and its derivative for complex argument.
//!
//! Three regimes are stitched together:
//!
//! * `|z| <= 2.5`: Taylor series about the origin;
//! * `|z| >= 9`: the large-argument expansion in powers of `1/zeta`,
//!   `zeta = 2/3 z^{3/2}`, with the connection formula
//!   `Ai(z) = -w Ai(w z) - w^2 Ai(w^2 z)` (`w = e^{2 pi i/3}`) near the
//!   negative real axis;
//! * the annulus in between: Taylor stepping of `y'' = z y`, inward from the
//!   outer circle where Ai is recessive (`|arg z| < pi/3`) and outward from
//!   the inner disc elsewhere, so the integration never runs against the
//!   dominant solution.
//!
//! [`ln_ai`] and [`ai_scaled`] stay finite where Ai itself under- or
//! overflows.

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_3, PI};
use std::sync::OnceLock;

use crate::numeric::brent_root;

/// Ai(0) = 3^{-2/3} / Gamma(2/3).
pub const AI0: f64 = 0.355_028_053_887_817_24;
/// Ai'(0) = -3^{-1/3} / Gamma(1/3).
pub const AIP0: f64 = -0.258_819_403_792_806_8;

const R_SERIES: f64 = 2.5;
const R_ASYMP: f64 = 9.0;
const STEP: f64 = 0.75;

/// Sum the local Taylor expansion of a solution of `y'' = z y` about `z0`
/// and return `(y, y')` at `z0 + h`.
fn taylor_step(z0: C64, y0: C64, yp0: C64, h: C64) -> (C64, C64) {
    // (k+2)(k+1) a_{k+2} = z0 a_k + a_{k-1}
    let mut a_km1 = y0; // a_{k-1}
    let mut a_k = yp0; // a_k, starting at k = 1
    let a2 = z0 * y0 * 0.5;
    let mut y = y0 + yp0 * h + a2 * h * h;
    let mut yp = yp0 + a2 * h * 2.0;
    let mut a_kp1 = a2;
    let scale = y0.norm().max(yp0.norm() * h.norm()).max(1e-300);
    let mut hk = h * h; // h^{k+1}
    let mut quiet = 0;
    for k in 1..400usize {
        let kk = k as f64;
        let next = (z0 * a_k + a_km1) / ((kk + 2.0) * (kk + 1.0));
        a_km1 = a_k;
        a_k = a_kp1;
        a_kp1 = next;
        let dterm = next * hk * (kk + 2.0);
        hk *= h;
        let term = next * hk;
        y += term;
        yp += dterm;
        let small = 1e-17 * scale.max(y.norm());
        if term.norm() < small && dterm.norm() * h.norm() < small {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    (y, yp)
}

fn integrate_line(z0: C64, y0: C64, yp0: C64, z1: C64) -> (C64, C64) {
    let n = ((z1 - z0).norm() / STEP).ceil().max(1.0) as usize;
    let h = (z1 - z0) / n as f64;
    let (mut y, mut yp) = (y0, yp0);
    let mut z = z0;
    for _ in 0..n {
        let (a, b) = taylor_step(z, y, yp, h);
        y = a;
        yp = b;
        z += h;
    }
    (y, yp)
}

/// Logarithms of Ai and Ai' from the large-argument expansion, valid for
/// `|arg z| <= 2 pi / 3` and large `|z|`.
fn asymptotic_ln(z: C64) -> (C64, C64) {
    let zeta = z.powf(1.5) * (2.0 / 3.0);
    let inv = zeta.inv();
    let mut u = 1.0f64;
    let mut p = C64::new(1.0, 0.0);
    let mut s_ai = C64::new(1.0, 0.0);
    let mut s_aip = C64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..200usize {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        p *= -inv;
        let t_ai = p * u;
        let mag = t_ai.norm();
        if mag > last {
            break;
        }
        s_ai += t_ai;
        s_aip += p * v;
        last = mag;
        if mag < 1e-17 {
            break;
        }
    }
    let ln_pref = -zeta - (2.0 * PI.sqrt()).ln();
    let quarter = z.ln() * 0.25;
    (ln_pref - quarter + s_ai.ln(), ln_pref + quarter + (-s_aip).ln())
}

fn log_add(a: C64, b: C64) -> C64 {
    let m = a.re.max(b.re);
    if m == f64::NEG_INFINITY {
        return a;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// (ln Ai, ln Ai') for `|z| >= R_ASYMP`.
fn outer_ln(z: C64) -> (C64, C64) {
    if z.arg().abs() <= 2.0 * FRAC_PI_3 {
        return asymptotic_ln(z);
    }
    if z.im < 0.0 {
        let (a, b) = outer_ln(z.conj());
        return (a.conj(), b.conj());
    }
    let w = C64::from_polar(1.0, 2.0 * FRAC_PI_3);
    let w2 = w * w;
    let (la1, lp1) = asymptotic_ln(w * z);
    let (la2, lp2) = asymptotic_ln(w2 * z);
    // Ai(z) = -w Ai(wz) - w^2 Ai(w^2 z);  Ai'(z) = -w^2 Ai'(wz) - w Ai'(w^2 z)
    let lai = log_add(la1 + (-w).ln(), la2 + (-w2).ln());
    let laip = log_add(lp1 + (-w2).ln(), lp2 + (-w).ln());
    (lai, laip)
}

/// Ai and Ai' as `(value, value)` for moderate `|z|`, or `None` when the
/// outer expansion should be used.
fn inner_pair(z: C64) -> Option<(C64, C64)> {
    let r = z.norm();
    if r <= R_SERIES {
        return Some(taylor_step(C64::new(0.0, 0.0), AI0.into(), AIP0.into(), z));
    }
    if r >= R_ASYMP {
        return None;
    }
    if z.arg().abs() < FRAC_PI_3 {
        let zs = z * (R_ASYMP / r);
        let (la, lp) = outer_ln(zs);
        Some(integrate_line(zs, la.exp(), lp.exp(), z))
    } else {
        let zs = z * (R_SERIES / r);
        let (y, yp) = taylor_step(C64::new(0.0, 0.0), AI0.into(), AIP0.into(), zs);
        Some(integrate_line(zs, y, yp, z))
    }
}

/// `(Ai(z), Ai'(z))`.
pub fn ai_pair(z: C64) -> (C64, C64) {
    match inner_pair(z) {
        Some(p) => p,
        None => {
            let (a, b) = outer_ln(z);
            (a.exp(), b.exp())
        }
    }
}

pub fn ai(z: C64) -> C64 {
    ai_pair(z).0
}

pub fn ai_prime(z: C64) -> C64 {
    ai_pair(z).1
}

/// A logarithm of Ai(z) (branch unspecified). Finite wherever Ai(z) != 0,
/// including arguments where Ai under- or overflows.
pub fn ln_ai(z: C64) -> C64 {
    match inner_pair(z) {
        Some((a, _)) => a.ln(),
        None => outer_ln(z).0,
    }
}

/// Ai(z) split as `mantissa * exp(ln_scale)` with `|mantissa| = 1` (or 0).
pub fn ai_scaled(z: C64) -> (C64, f64) {
    let l = ln_ai(z);
    if l.re == f64::NEG_INFINITY {
        return (C64::new(0.0, 0.0), 0.0);
    }
    (C64::from_polar(1.0, l.im), l.re)
}

pub fn ai_real(x: f64) -> f64 {
    ai(C64::new(x, 0.0)).re
}

pub fn ai_prime_real(x: f64) -> f64 {
    ai_prime(C64::new(x, 0.0)).re
}

/// The largest real zero of Ai, found by bracketed root finding.
pub fn airy_root_r0() -> f64 {
    static R0: OnceLock<f64> = OnceLock::new();
    *R0.get_or_init(|| brent_root(ai_real, -2.4, -2.3, 1e-16).expect("Ai changes sign on [-2.4, -2.3]"))
}

/// Ai'(r0).
pub fn ai_prime_r0() -> f64 {
    static V: OnceLock<f64> = OnceLock::new();
    *V.get_or_init(|| ai_prime_real(airy_root_r0()))
}
