//! Region II: rays launched tangentially from the boundary `x = 0` at
//! height `sigma > 1`, filling `0 < x < X0(eta)`.

use serde::Serialize;
use std::f64::consts::PI;

use crate::airy::{ai_prime_r0, airy_root_r0};
use crate::error::{domain, Error, Result};
use crate::eval::{nu, LayerEval};
use crate::model::{alpha_fn, beta_fn, x0_boundary, ModelParams, PhysPoint, Region, RegionTag, ScaledCoords};
use crate::numeric::{asinh, brent_root, integrate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RayCoordII {
    pub tau: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RayStateII {
    pub x: f64,
    pub eta: f64,
    pub phi: f64,
    pub phi_x: f64,
    pub phi_eta: f64,
    pub gamma_phase: f64,
    pub jac_tilde: f64,
    /// `None` on the boundary `tau = 0`, where `J~` vanishes.
    pub amp: Option<f64>,
}

/// `a = (1-sigma)/(2D)` and the inward root `b = sigma/2 + sqrt(beta)/(2 sqrt D)`.
pub fn ab_of_sigma(sigma: f64, d: f64) -> (f64, f64) {
    ((1.0 - sigma) / (2.0 * d), 0.5 * sigma + beta_fn(sigma, d).sqrt() / (2.0 * d.sqrt()))
}

/// The eikonal equation at `x = 0` with `Phi_x = -a`, `Phi_eta = -b`.
pub fn boundary_eikonal_residual(sigma: f64, d: f64) -> f64 {
    let (a, b) = ab_of_sigma(sigma, d);
    d * a * a + b * b - sigma * (b - a) - a
}

// e^t - 1 - t without cancellation for small t.
fn expm1_minus_t(t: f64) -> f64 {
    if t.abs() < 0.5 {
        let mut term = 0.5 * t * t;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() {
            k += 1.0;
            term *= t / k;
            sum += term;
        }
        sum
    } else {
        t.exp_m1() - t
    }
}

/// Position on the ray. The constant and linear terms cancel identically,
/// so the map is written in `e^{+-tau} - 1 -+ tau` form.
pub fn ray2_position(tau: f64, sigma: f64, d: f64) -> (f64, f64) {
    let (a, b) = ab_of_sigma(sigma, d);
    let c = a + b - sigma;
    let x = (b - a) * expm1_minus_t(tau) + c * expm1_minus_t(-tau);
    let eta = sigma + (b - a) * tau.exp_m1() - c * (-tau).exp_m1();
    (x, eta)
}

/// Boundary value `Phi0(sigma) = -1/2 - int_1^sigma b(u) du` in closed form.
pub fn phi0(sigma: f64, d: f64) -> f64 {
    let sd = d.sqrt();
    let dp = d + 1.0;
    let w = d / dp.powf(1.5);
    -0.25 - 0.25 * sigma * sigma
        - (1.0 / (4.0 * sd))
            * ((sigma - 1.0 / dp) * beta_fn(sigma, d).sqrt() + w * asinh(alpha_fn(sigma, d) / sd)
                - d.powf(1.5) / dp
                - w * asinh(sd))
}

pub fn phi_ii(tau: f64, sigma: f64, d: f64) -> f64 {
    let (a, b) = ab_of_sigma(sigma, d);
    -a * a * (d + 1.0) * tau + 2.0 * a * (a - b) * tau.exp_m1() - 0.5 * (a - b).powi(2) * (2.0 * tau).exp_m1()
        + phi0(sigma, d)
}

/// `Gamma(sigma) = 2^{-2/3} D^{-1/6} r0 int_1^sigma beta^{-1/6}`; negative for `sigma > 1`.
pub fn gamma_phase(sigma: f64, d: f64) -> Result<f64> {
    if !(sigma >= 1.0) {
        return domain(format!("Gamma needs sigma >= 1, got {sigma}"));
    }
    let (v, _) = integrate(|u| beta_fn(u, d).powf(-1.0 / 6.0), 1.0, sigma, 1e-15, 1e-13)?;
    Ok(2f64.powf(-2.0 / 3.0) * d.powf(-1.0 / 6.0) * airy_root_r0() * v)
}

pub fn gamma_phase_derivative(sigma: f64, d: f64) -> f64 {
    2f64.powf(-2.0 / 3.0) * d.powf(-1.0 / 6.0) * airy_root_r0() * beta_fn(sigma, d).powf(-1.0 / 6.0)
}

/// Closed-form `J~ = x_tau eta_sigma - x_sigma eta_tau`.
pub fn jacobian_ii(tau: f64, sigma: f64, d: f64) -> f64 {
    let sb = beta_fn(sigma, d).sqrt();
    let (d2, d15, sd) = (d * d, d.powf(1.5), d.sqrt());
    let e = tau.exp();
    let ei = (-tau).exp();
    ((-sigma + 1.0 + 0.5 * tau * (sigma - 1.0)) / d2
        + 0.5 * sb * (tau - 1.0) / d15
        + (-sigma - 0.5 * tau + tau * sigma) / d
        + 0.5 * tau * sb / sd
        + 0.5 * tau * sigma)
        * e
        + ((0.5 * tau + 1.0) * (1.0 - sigma) / d2
            + 0.5 * sb * (tau + 1.0) / d15
            + (-sigma + 0.5 * tau - tau * sigma) / d
            + 0.5 * tau * sb / sd
            - 0.5 * tau * sigma)
            * ei
        + 2.0 * (sigma - 1.0) / d2
        + 2.0 * sigma / d
}

/// `[alpha + sqrt(beta (D+1))] / [D + sqrt(D (D+1))]` raised to `sqrt(D)/(2 sqrt(D+1))`.
pub fn ratio_power(sigma: f64, d: f64) -> f64 {
    let p = d.sqrt() / (2.0 * (d + 1.0).sqrt());
    ((alpha_fn(sigma, d) + (beta_fn(sigma, d) * (d + 1.0)).sqrt()) / (d + (d * (d + 1.0)).sqrt())).powf(p)
}

/// Amplitude along the boundary, `L = L0(sigma) e^{tau/2}/sqrt(J~)`.
pub fn l0(sigma: f64, d: f64) -> f64 {
    let aip = ai_prime_r0();
    d.powf(-0.75) * (sigma - 1.0) / PI * 2f64.powf(-13.0 / 6.0) * beta_fn(sigma, d).powf(-1.0 / 12.0)
        * ratio_power(sigma, d)
        / (aip * aip)
}

pub fn amplitude_l(tau: f64, sigma: f64, d: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Caustic { jac: 0.0 });
    }
    let j = jacobian_ii(tau, sigma, d);
    if !(j > 0.0) {
        return Err(Error::Caustic { jac: j });
    }
    Ok(l0(sigma, d) * (0.5 * tau).exp() / j.sqrt())
}

/// The constant fixed by matching with the corner layer.
pub fn k0(d: f64) -> f64 {
    let aip = ai_prime_r0();
    d.powf(-5.0 / 6.0) / PI.sqrt() / (aip * aip) * 2f64.powf(-1.5)
        * (d / (d + 1.0).sqrt() + d.sqrt()).powf(-d.sqrt() / (2.0 * (d + 1.0).sqrt()))
}

pub fn ray2_forward(tau: f64, sigma: f64, d: f64) -> Result<RayStateII> {
    if !(tau >= 0.0 && sigma >= 1.0) {
        return domain(format!("Region II rays need tau >= 0 and sigma >= 1, got ({tau}, {sigma})"));
    }
    let (a, b) = ab_of_sigma(sigma, d);
    let (x, eta) = ray2_position(tau, sigma, d);
    Ok(RayStateII {
        x,
        eta,
        phi: phi_ii(tau, sigma, d),
        phi_x: -a,
        phi_eta: (a - b) * tau.exp() - a,
        gamma_phase: gamma_phase(sigma, d)?,
        jac_tilde: jacobian_ii(tau, sigma, d),
        amp: amplitude_l(tau, sigma, d).ok(),
    })
}

/// Small-`x` inversion at fixed `eta` through `O(x^{3/2})`.
pub fn small_x_seed(x: f64, eta: f64, d: f64) -> RayCoordII {
    let (al, be) = (alpha_fn(eta, d), beta_fn(eta, d));
    let sq = (2.0 * x).sqrt();
    let x32 = x * x.sqrt();
    let c = 2f64.sqrt() / 36.0;
    RayCoordII {
        tau: sq * d.powf(0.25) * be.powf(-0.25) + 2.0 / 3.0 * al / be * x
            + c * be.powf(-1.75) * d.powf(-0.25) * (14.0 * be + 11.0 * d * be - 20.0 * d) * x32,
        sigma: eta - sq * be.powf(0.25) * d.powf(-0.25) + al / (3.0 * (d * be).sqrt()) * x
            + c * be.powf(-1.25) * d.powf(-0.75) * (10.0 * be + d * be - 4.0 * d) * x32,
    }
}

fn tau_on_level(sigma: f64, eta: f64, d: f64) -> Result<f64> {
    if eta <= sigma {
        return Ok(0.0);
    }
    let f = |t: f64| ray2_position(t, sigma, d).1 - eta;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::Search(format!("eta = {eta} not reached on ray sigma = {sigma}")));
        }
    }
    brent_root(f, 0.0, hi, 1e-16)
}

/// The unique Region II ray through `(x, eta)`.
pub fn ray2_invert(x: f64, eta: f64, d: f64) -> Result<RayCoordII> {
    if !(eta > 1.0) {
        return domain(format!("Region II needs eta > 1, got {eta}"));
    }
    let x0 = x0_boundary(eta)?;
    if !(x > 0.0 && x < x0) {
        return domain(format!("({x}, {eta}) is not inside Region II (0 < x < {x0})"));
    }
    let g = |s: f64| match tau_on_level(s, eta, d) {
        Ok(t) => ray2_position(t, s, d).0 - x,
        Err(_) => f64::NAN,
    };
    let sigma = brent_root(g, 1.0, eta, 1e-16)?;
    let tau = tau_on_level(sigma, eta, d)?;
    let c = newton_polish(x, eta, d, RayCoordII { tau, sigma });
    let (xr, er) = ray2_position(c.tau, c.sigma, d);
    let res = ((xr - x) / x).abs().max(((er - eta) / eta).abs());
    if res > 1e-8 {
        return Err(Error::NoConvergence { what: "ray2_invert", residual: res });
    }
    Ok(c)
}

fn newton_polish(x: f64, eta: f64, d: f64, c: RayCoordII) -> RayCoordII {
    let (mut tau, mut sigma) = (c.tau, c.sigma);
    let err = |t: f64, s: f64| {
        let (xr, er) = ray2_position(t, s, d);
        ((xr - x) / x).abs() + ((er - eta) / eta).abs()
    };
    for _ in 0..4 {
        let e0 = err(tau, sigma);
        let h = 1e-7 * (1.0 + tau);
        let (xr, er) = ray2_position(tau, sigma, d);
        let (xp, ep) = ray2_position(tau + h, sigma, d);
        let (xq, eq) = ray2_position(tau, sigma + h, d);
        let (xt, et, xs, es) = ((xp - xr) / h, (ep - er) / h, (xq - xr) / h, (eq - er) / h);
        let det = xt * es - xs * et;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let (fx, fe) = (xr - x, er - eta);
        let nt = tau - (es * fx - xs * fe) / det;
        let ns = sigma - (-et * fx + xt * fe) / det;
        if nt > 0.0 && ns >= 1.0 && err(nt, ns) < e0 {
            tau = nt;
            sigma = ns;
        } else {
            break;
        }
    }
    RayCoordII { tau, sigma }
}

/// `eps^{-4/3} exp(Phi/eps + Gamma/eps^{1/3}) L`.
pub fn eval_f_region_ii(p: PhysPoint, params: ModelParams) -> Result<LayerEval> {
    let p = PhysPoint::new(p.x, p.eta)?;
    let d = params.d;
    let c = ray2_invert(p.x, p.eta, d)?;
    let tag = RegionTag { region: Region::RegionII, coords: ScaledCoords::of(p, params) };
    let mut out = LayerEval::new(tag, params.eps, nu::REGION_II);
    out.phase_1 = phi_ii(c.tau, c.sigma, d);
    out.phase_13 = gamma_phase(c.sigma, d)?;
    out.amplitude = amplitude_l(c.tau, c.sigma, d)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn launch_constants() {
        let (a, b) = ab_of_sigma(1.0, 0.7);
        assert_eq!(a, 0.0);
        assert!((b - 1.0).abs() < 1e-15);
        let (a, b) = ab_of_sigma(2.0, 1.0);
        assert_eq!(a, -0.5);
        assert!((b - (1.0 + 5f64.sqrt() / 2.0)).abs() < 1e-15);
        for &d in &[0.3, 1.0, 4.0] {
            for &s in &[1.0, 1.3, 2.0, 7.5] {
                assert!(boundary_eikonal_residual(s, d).abs() < 1e-12 * (1.0 + s * s));
            }
        }
    }

    #[test]
    fn forward_map_basics() {
        let st = ray2_forward(0.0, 1.7, 1.0).unwrap();
        assert_eq!((st.x, st.eta), (0.0, 1.7));
        assert!((st.phi - phi0(1.7, 1.0)).abs() < 1e-15);
        assert!(st.amp.is_none());
        // sigma = 1 continues the limiting Region I ray.
        let st = ray2_forward(1.0, 1.0, 2.0).unwrap();
        assert!((st.x - (E - 2.0)).abs() < 1e-14 && (st.eta - E).abs() < 1e-14);
        assert!((st.phi + E * E / 2.0).abs() < 1e-13);
        // x ~ (b - sigma/2) tau^2 near the boundary.
        let (_, b) = ab_of_sigma(2.5, 1.0);
        let (x, _) = ray2_position(1e-4, 2.5, 1.0);
        assert!((x / ((b - 1.25) * 1e-8) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn eikonal_on_rays() {
        for &d in &[0.5, 1.0, 2.0] {
            for &(tau, s) in &[(0.1, 1.2), (1.0, 2.0), (2.5, 4.0)] {
                let st = ray2_forward(tau, s, d).unwrap();
                let (px, pe) = (st.phi_x, st.phi_eta);
                let r = d * px * px + pe * pe + px + st.eta * (pe - px);
                assert!(r.abs() < 1e-12 * (1.0 + pe * pe), "{r:e}");
                assert!(pe < 0.0);
            }
        }
    }

    #[test]
    fn phi0_closed_form_matches_quadrature() {
        assert_eq!(phi0(1.0, 1.0), -0.5);
        for &(s, d) in &[(2.0, 1.0), (1.5, 0.5), (3.0, 2.0)] {
            let (v, _) = integrate(|u| ab_of_sigma(u, d).1, 1.0, s, 1e-15, 1e-14).unwrap();
            assert!((phi0(s, d) - (-0.5 - v)).abs() < 1e-10, "{s} {d}");
            let h = 1e-5;
            let fd = (phi0(s + h, d) - phi0(s - h, d)) / (2.0 * h);
            assert!((fd + ab_of_sigma(s, d).1).abs() < 1e-7);
        }
    }

    #[test]
    fn gamma_phase_properties() {
        assert_eq!(gamma_phase(1.0, 1.0).unwrap(), 0.0);
        let g2 = gamma_phase(2.0, 1.0).unwrap();
        // Composite Simpson with 2000 panels as the oracle.
        let n = 2000;
        let f = |u: f64| (u * u + (u - 1.0) * (u - 1.0)).powf(-1.0 / 6.0);
        let h = 1.0 / n as f64;
        let mut s = f(1.0) + f(2.0);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(1.0 + k as f64 * h);
        }
        let want = 2f64.powf(-2.0 / 3.0) * airy_root_r0() * s * h / 3.0;
        assert!((g2 - want).abs() < 1e-12);
        let mut prev = 0.0;
        for k in 1..10 {
            let g = gamma_phase(1.0 + 0.3 * k as f64, 0.7).unwrap();
            assert!(g < prev);
            prev = g;
        }
        let h = 1e-5;
        let fd = (gamma_phase(1.8 + h, 0.7).unwrap() - gamma_phase(1.8 - h, 0.7).unwrap()) / (2.0 * h);
        assert!((fd - gamma_phase_derivative(1.8, 0.7)).abs() < 1e-7);
    }

    #[test]
    fn jacobian_matches_differences() {
        for &(tau, s, d) in &[(1.0, 2.0, 1.0), (0.3, 1.5, 0.5), (2.0, 4.0, 2.0)] {
            let h = 1e-6;
            let (xp, ep) = ray2_position(tau + h, s, d);
            let (xm, em) = ray2_position(tau - h, s, d);
            let (xq, eq) = ray2_position(tau, s + h, d);
            let (xr, er) = ray2_position(tau, s - h, d);
            let fd = (xp - xm) * (eq - er) / (4.0 * h * h) - (xq - xr) * (ep - em) / (4.0 * h * h);
            let j = jacobian_ii(tau, s, d);
            assert!((fd / j - 1.0).abs() < 1e-6, "{fd} {j}");
        }
        assert!(jacobian_ii(0.0, 2.0, 1.0).abs() < 1e-14);
        assert!(jacobian_ii(1e-3, 2.0, 1.0) > 0.0);
    }

    #[test]
    fn amplitude_pieces() {
        assert!((ratio_power(1.0, 0.7) - 1.0).abs() < 1e-15);
        assert!(amplitude_l(0.0, 2.0, 1.0).is_err());
        assert_eq!(l0(1.0, 1.0), 0.0);
        assert!(amplitude_l(0.5, 2.0, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn inversion_round_trip() {
        let (x, e) = ray2_position(0.5, 1.5, 1.0);
        let c = ray2_invert(x, e, 1.0).unwrap();
        assert!((c.tau - 0.5).abs() < 1e-8 && (c.sigma - 1.5).abs() < 1e-8, "{c:?}");
        assert!(ray2_invert(0.5, 2.0, 1.0).is_err());
        assert!(ray2_invert(0.1, 0.9, 1.0).is_err());
    }

    #[test]
    fn small_x_inversion_follows_expansion() {
        for &d in &[0.5, 1.0, 2.0] {
            for &x in &[1e-3, 1e-4, 1e-6] {
                let c = ray2_invert(x, 2.0, d).unwrap();
                let seed = small_x_seed(x, 2.0, d);
                assert!((c.tau - seed.tau).abs() < x * x + 1e-13, "D={d} x={x}: {c:?} {seed:?}");
                assert!((c.sigma - seed.sigma).abs() < x * x + 1e-13, "D={d} x={x}: {c:?} {seed:?}");
            }
        }
    }

    #[test]
    fn near_boundary_curve_sigma_tends_to_one() {
        let x0 = x0_boundary(2.0).unwrap();
        let c = ray2_invert(x0 - 1e-6, 2.0, 1.0).unwrap();
        assert!((c.sigma - 1.0) < 1e-4 && (c.tau - 2f64.ln()).abs() < 1e-4, "{c:?}");
    }

    #[test]
    fn phases_near_the_corner() {
        let r0 = airy_root_r0();
        for &d in &[0.5, 1.0, 2.0] {
            for &g in &[1e-2, 5e-3] {
                let x = 0.1 * g * g;
                let eta = 1.0 + g;
                let c = ray2_invert(x, eta, d).unwrap();
                let phi = phi_ii(c.tau, c.sigma, d);
                let want = -0.5 - g - 0.5 * g * g - g.powi(3) / (12.0 * d) + x * g / (2.0 * d)
                    - 2f64.sqrt() * x.powf(1.5) / (3.0 * d);
                assert!((phi - want).abs() < 10.0 * g.powi(4), "D={d}: {phi} {want}");
                let gw = 0.5 * 2f64.cbrt() * d.powf(-1.0 / 3.0) * r0 * g
                    - 2f64.powf(-1.0 / 6.0) * d.powf(-1.0 / 3.0) * r0 * x.sqrt();
                let gv = gamma_phase(c.sigma, d).unwrap();
                assert!((gv - gw).abs() < g * g, "{gv} {gw}");
            }
        }
    }
}
