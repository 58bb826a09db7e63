//! Marginal distributions: `M(x)` by Laplace's method in `eta`, and the
//! ratio of the integrated composite to the Gaussian `eta`-marginal.
//!
//! The implicit function `E(x)` is solved in `w = ln[(1-(D+1)E)/(1-E)]`,
//! which stays well conditioned as `E` approaches `1/(D+1)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernels::{lambda_integral_ln, BromwichSpec};
use crate::layers::{eval_small_x, eval_transition};
use crate::model::{j_factor, x0_boundary, LayerThresholds, ModelParams, PhysPoint};
use crate::numeric::integrate;
use crate::region1::eval_f_region_i;

/// Gap `1/(D+1) - E` below which `M` switches to its large-`x` form.
pub const LARGE_X_GAP: f64 = 1e-12;

/// `X1(eta)` for `0 <= eta < 1/(D+1)`.
pub fn x1_of_eta(eta: f64, d: f64) -> Result<f64> {
    let lim = 1.0 / (d + 1.0);
    if !(0.0..lim).contains(&eta) {
        return domain(format!("eta = {eta} outside [0, {lim})"));
    }
    let w = -(d * eta / (1.0 - (d + 1.0) * eta)).ln_1p();
    Ok(x_of_w(w, d))
}

fn e_of_w(w: f64, d: f64) -> f64 {
    -w.exp_m1() / (d + 1.0 - w.exp())
}

/// `1/(D+1) - E(w)` without cancellation.
fn gap_of_w(w: f64, d: f64) -> f64 {
    d * w.exp() / ((d + 1.0) * (d + 1.0 - w.exp()))
}

fn x_of_w(w: f64, d: f64) -> f64 {
    let e = e_of_w(w, d);
    -2.0 * e + (2.0 * (d + 1.0) * e - d - 2.0) * w / d
}

fn dx_dw(w: f64, d: f64) -> f64 {
    let e = e_of_w(w, d);
    let ew = w.exp();
    let de = -d * ew / ((d + 1.0 - ew) * (d + 1.0 - ew));
    -2.0 * de + (2.0 * (d + 1.0) * de * w + 2.0 * (d + 1.0) * e - d - 2.0) / d
}

fn w_seed(x: f64, d: f64) -> f64 {
    if x < 1.0 {
        let e = x / d - 0.5 * x * x / d + (d - 4.0) / (6.0 * d * d) * x.powi(3);
        let e = e.clamp(0.0, 0.5 / (d + 1.0));
        -(d * e / (1.0 - (d + 1.0) * e)).ln_1p()
    } else {
        // E ~ 1/(D+1) - D/(D+1)^2 exp(-x - 2/(D+1)), and w ~ ln[(D+1) gap (D+1)/D].
        -x - 2.0 / (d + 1.0)
    }
}

/// Solve the defining relation for `w` by Newton steps kept inside a bracket.
fn solve_w(x: f64, d: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (-(x + 10.0), 0.0);
    while x_of_w(lo, d) < x {
        lo *= 2.0;
    }
    let mut w = w_seed(x, d).clamp(lo, hi);
    for _ in 0..200 {
        let f = x_of_w(w, d) - x;
        if f.abs() <= 1e-15 * (1.0 + x) {
            break;
        }
        // x decreases in w.
        if f > 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let mut next = w - f / dx_dw(w, d);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= 1e-16 * (1.0 + w.abs()) {
            w = next;
            break;
        }
        w = next;
    }
    w
}

/// `E(x)`, the `eta` at which the Region I phase is maximal along `x`.
pub fn e_of_x(x: f64, d: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("x must be finite and >= 0, got {x}"));
    }
    Ok(e_of_w(solve_w(x, d), d))
}

/// Residual of the defining relation at `(x, e)`.
pub fn e_residual(x: f64, e: f64, d: f64) -> f64 {
    let w = ((1.0 - (d + 1.0) * e) / (1.0 - e)).ln();
    -2.0 * e + (2.0 * (d + 1.0) * e - d - 2.0) * w / d - x
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginalSample {
    pub x: f64,
    pub e: f64,
    pub psi1: f64,
    pub delta: f64,
    pub ln_m: f64,
    pub ln_m_small: f64,
    pub ln_m_large: f64,
    /// True when `ln_m` comes from the large-`x` form.
    pub asymptotic: bool,
}

impl MarginalSample {
    pub fn m(&self) -> f64 {
        self.ln_m.exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalCurve {
    pub eps: f64,
    pub d: f64,
    pub samples: Vec<MarginalSample>,
}

pub fn ln_m_small_x(x: f64, params: ModelParams) -> f64 {
    let d = params.d;
    let eps = params.eps;
    (1.0 / (eps * d) * (1.0 - x / d)).ln() + (-x / d + x * x / (2.0 * d * d)) / eps
}

pub fn ln_m_large_x(x: f64, params: ModelParams) -> f64 {
    let d = params.d;
    let eps = params.eps;
    let dp = 1.0 + d;
    let pre = d / (dp * dp) + (2.0 * d + 1.0) / (d * dp * dp) * (-x - 2.0 / dp).exp();
    (pre / eps).ln() - (x / dp + 1.0 / (dp * dp)) / eps
}

/// `M(x)` with its ingredients.
pub fn m_of_x(x: f64, params: ModelParams) -> Result<MarginalSample> {
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("x must be finite and >= 0, got {x}"));
    }
    let d = params.d;
    let eps = params.eps;
    let w = solve_w(x, d);
    let e = e_of_w(w, d);
    let q = (d + 1.0) * gap_of_w(w, d);
    let psi1 = e * (1.0 - e) / d + (d + 1.0) / (d * d) * (1.0 - e) * (1.0 - e) * w;
    let delta = 2.0 * q * (1.0 - e) * (x + 2.0 * e) * (d + 1.0) * d / (2.0 * (d + 1.0) * e - d - 2.0)
        + d * (d + 2.0 * e - 2.0 * (d + 1.0) * e * e);
    let ln_m_small = ln_m_small_x(x, params);
    let ln_m_large = ln_m_large_x(x, params);
    let asymptotic = gap_of_w(w, d) < LARGE_X_GAP;
    let ln_m = if asymptotic {
        ln_m_large
    } else {
        -eps.ln() + 2.0 * (1.0 - e).ln() - 0.5 * delta.ln() + psi1 / eps
    };
    Ok(MarginalSample { x, e, psi1, delta, ln_m, ln_m_small, ln_m_large, asymptotic })
}

/// `n + 1` equispaced samples on `[0, x_max]`.
pub fn marginal_curve(params: ModelParams, x_max: f64, n: usize) -> Result<MarginalCurve> {
    if !(x_max > 0.0) || n == 0 {
        return domain(format!("need x_max > 0 and n > 0, got {x_max}, {n}"));
    }
    let samples = (0..=n)
        .map(|k| m_of_x(x_max * k as f64 / n as f64, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalCurve { eps: params.eps, d: params.d, samples })
}

/// `int_0^inf M dx`; the integrand is negligible beyond `60 (1+D) eps`.
pub fn m_mass(params: ModelParams) -> Result<f64> {
    let hi = 60.0 * (1.0 + params.d) * params.eps;
    let f = |x: f64| m_of_x(x, params).map(|m| m.m()).unwrap_or(f64::NAN);
    let (a, _) = integrate(f, 0.0, hi, 1e-12, 1e-10)?;
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    /// Integration window in units of the natural decay length.
    pub half_width: f64,
    pub bromwich: BromwichSpec,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-8, half_width: 12.0, bromwich: BromwichSpec::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EtaMethod {
    /// Small-`x` layer plus Region I, integrated in `v`.
    BoundaryLayer,
    /// Corner layer through the `Lambda` reduction.
    Corner,
    /// Transition layer, integrated in `omega`.
    Transition,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaMarginal {
    pub eta: f64,
    pub ratio: f64,
    pub method: EtaMethod,
}

/// `int_0^inf F(x, eta) dx` over the Gaussian `(2 pi eps)^{-1/2} exp(-eta^2/(2 eps))`.
pub fn eta_marginal_ratio(eta: f64, params: ModelParams, th: &LayerThresholds, quad: &QuadSpec) -> Result<EtaMarginal> {
    if !eta.is_finite() {
        return domain(format!("eta must be finite, got {eta}"));
    }
    let (d, eps) = (params.d, params.eps);
    let e13 = params.eps13();
    let ln_gauss = -0.5 * (2.0 * PI * eps).ln() - eta * eta / (2.0 * eps);
    let gamma = (eta - 1.0) / e13;
    let acc = |e: Error| match e {
        Error::NoConvergence { residual, .. } => Error::Accuracy { tail: residual, tol: quad.rel_tol },
        e => e,
    };

    if gamma.abs() <= th.corner_gamma {
        // The mu-integral of the corner kernel is Lambda(gamma).
        let lam = lambda_integral_ln(gamma, d, &quad.bromwich)?;
        let ln_r = lam.ln_abs - gamma.powi(3) / (12.0 * d) - (2f64.cbrt() * d.powf(2.0 / 3.0)).ln();
        return Ok(EtaMarginal { eta, ratio: lam.sign * ln_r.exp(), method: EtaMethod::Corner });
    }

    if eta < 1.0 {
        let v_split = th.inner_v;
        let v_hi = v_split + quad.half_width * 5.0 * d / (1.0 - eta);
        let layer = |v: f64| -> f64 {
            eval_small_x(v, eta, params).map(|e| (e.ln_value() - ln_gauss).exp()).unwrap_or(f64::NAN)
        };
        let outer = |v: f64| -> f64 {
            eval_f_region_i(PhysPoint { x: v * eps, eta }, params)
                .map(|e| (e.ln_value() - ln_gauss).exp())
                .unwrap_or(f64::NAN)
        };
        let (a, _) = integrate(layer, 0.0, v_split, 1e-14, quad.rel_tol).map_err(acc)?;
        let (b, _) = integrate(outer, v_split, v_hi, 1e-14, quad.rel_tol).map_err(acc)?;
        return Ok(EtaMarginal { eta, ratio: eps * (a + b), method: EtaMethod::BoundaryLayer });
    }

    // Above the corner the mass sits in a Gaussian of width sqrt(D j eps^{1/3}/eta) in omega.
    let (j, _) = j_factor(eta, d)?;
    let width = (d * j * e13 / eta).sqrt();
    let lo = (-quad.half_width * width).max(-x0_boundary(eta)? / e13);
    let hi = quad.half_width * width;
    let mut first_err = None;
    let f = |w: f64| -> f64 {
        match eval_transition(w, eta, params, &quad.bromwich) {
            Ok(e) => (e.ln_value() - ln_gauss).exp(),
            Err(e) => {
                first_err.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let r = integrate(f, lo, hi, 1e-14, quad.rel_tol);
    if let Some(e) = first_err {
        return Err(e);
    }
    let (a, _) = r.map_err(acc)?;
    Ok(EtaMarginal { eta, ratio: e13 * a, method: EtaMethod::Transition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region1::{psi_i, ray1_invert, ray1_partials};

    fn params(d: f64, eps: f64) -> ModelParams {
        ModelParams::new(d, eps).unwrap()
    }

    #[test]
    fn x1_values() {
        assert_eq!(x1_of_eta(0.0, 1.0).unwrap(), 0.0);
        // Direct evaluation of the closed form.
        let (eta, d) = (0.25f64, 1.0f64);
        let want = -2.0 * eta - (2.0 * d * eta - d + 2.0 * eta - 2.0) / d * ((1.0 - eta) / (1.0 - (d + 1.0) * eta)).ln();
        assert!((x1_of_eta(eta, d).unwrap() - want).abs() < 1e-15);
        assert!((e_of_x(want, d).unwrap() - eta).abs() < 1e-13);
        assert!(x1_of_eta(0.5 - 1e-12, 1.0).unwrap() > 20.0);
        assert!(x1_of_eta(0.5, 1.0).is_err());
        assert!(x1_of_eta(-0.1, 1.0).is_err());
    }

    #[test]
    fn inverse_pair() {
        for &d in &[0.5, 1.0, 2.0] {
            let lim = 1.0 / (d + 1.0);
            for k in 0..=200 {
                let eta = (lim - 1e-3) * k as f64 / 200.0;
                let x = x1_of_eta(eta, d).unwrap();
                assert!((e_of_x(x, d).unwrap() - eta).abs() < 1e-10, "d={d} eta={eta}");
            }
        }
    }

    #[test]
    fn e_residual_and_range() {
        for &d in &[0.5, 1.0, 2.0] {
            let mut prev = -1.0;
            for k in 0..300 {
                let x = 0.1 * k as f64;
                let e = e_of_x(x, d).unwrap();
                assert!(e >= 0.0 && e < 1.0 / (d + 1.0));
                assert!(e >= prev);
                prev = e;
                assert!((x_of_w(solve_w(x, d), d) - x).abs() <= 1e-12 * (1.0 + x), "d={d} x={x}");
                // Recovering w from E cancels as E approaches 1/(D+1).
                if 1.0 / (d + 1.0) - e > 1e-3 {
                    assert!(e_residual(x, e, d).abs() < 1e-12 * (1.0 + x), "d={d} x={x}");
                }
            }
        }
    }

    #[test]
    fn e_asymptotics() {
        assert_eq!(e_of_x(0.0, 1.0).unwrap(), 0.0);
        for &d in &[0.5, 1.0, 2.0] {
            let x: f64 = 0.01;
            let series = x / d - 0.5 * x * x / d + (d - 4.0) / (6.0 * d * d) * x.powi(3);
            assert!((e_of_x(x, d).unwrap() - series).abs() < 10.0 * x.powi(4));
        }
        let x = 10.0;
        let large = 0.5 - 0.25 * (-x - 1.0f64).exp();
        assert!((e_of_x(x, 1.0).unwrap() - large).abs() < 1e-6);
    }

    #[test]
    fn m_values_and_forms() {
        let p = params(1.0, 1e-2);
        let m0 = m_of_x(0.0, p).unwrap();
        assert!((m0.m() - 100.0).abs() < 1e-9);
        assert_eq!(m0.psi1, 0.0);
        for k in 1..=5 {
            let x = 0.01 * k as f64;
            let m = m_of_x(x, p).unwrap();
            assert!((m.ln_m - m.ln_m_small).abs() < 0.02, "x={x}");
        }
        // The large-x form converges once e^{-x}/eps is small.
        for &x in &[8.0, 12.0, 20.0] {
            let m = m_of_x(x, p).unwrap();
            assert!((m.ln_m - m.ln_m_large).abs() < 0.02, "x={x}");
        }
        let m = m_of_x(40.0, p).unwrap();
        assert!(m.asymptotic);
    }

    #[test]
    fn m_decreases_and_normalizes() {
        for &(d, eps) in &[(1.0, 1e-2), (0.5, 1e-2), (2.0, 1e-3)] {
            let c = marginal_curve(params(d, eps), 3.0, 300).unwrap();
            for w in c.samples.windows(2) {
                assert!(w[1].ln_m < w[0].ln_m);
                assert!(w[1].psi1 < w[0].psi1);
            }
        }
        let mass = m_mass(params(1.0, 1e-2)).unwrap();
        assert!((mass - 1.0).abs() < 0.05, "{mass}");
    }

    #[test]
    fn saddle_matches_region_one() {
        let d = 1.0;
        for &x in &[0.05, 0.3, 1.0, 2.5] {
            let e = e_of_x(x, d).unwrap();
            let roots = ray1_invert(x, e, d, None).unwrap();
            assert_eq!(roots.len(), 1);
            let r = roots[0];
            // Psi_eta = (B - A)e^t + A and the Psi_1 identity.
            let a = r.a(d);
            let psi_eta = (r.b() - a) * r.t.exp() + a;
            assert!(psi_eta.abs() < 1e-8, "x={x}");
            assert!((psi_i(r.t, r.s, d) - m_of_x(x, params(d, 1e-2)).unwrap().psi1).abs() < 1e-8);
            // Psi_eta_eta = d(Psi_eta)/d(eta) at fixed x through the ray map.
            let [[xt, xs], [et, es]] = ray1_partials(r.t, r.s, d);
            let det = xt * es - xs * et;
            let dpe_dt = (r.b() - a) * r.t.exp();
            let dpe_ds = (-1.0 - 1.0 / d) * r.t.exp() + 1.0 / d;
            let psi_ee = (dpe_dt * (-xs) + dpe_ds * xt) / det;
            assert!(psi_ee < 0.0);
        }
    }

    #[test]
    fn eta_marginal_pieces() {
        let th = LayerThresholds::default();
        let q = QuadSpec::default();
        let p = params(1.0, 1e-3);
        let r = eta_marginal_ratio(0.5, p, &th, &q).unwrap();
        assert_eq!(r.method, EtaMethod::BoundaryLayer);
        assert!((r.ratio - 1.0).abs() < 0.02, "{}", r.ratio);
        let r = eta_marginal_ratio(1.0, p, &th, &q).unwrap();
        assert_eq!(r.method, EtaMethod::Corner);
        assert!((r.ratio - 1.0).abs() < 1e-4, "{}", r.ratio);
        let r = eta_marginal_ratio(2.0, p, &th, &q).unwrap();
        assert_eq!(r.method, EtaMethod::Transition);
        let r2 = eta_marginal_ratio(2.0, params(1.0, 1e-4), &th, &q).unwrap();
        assert!((r2.ratio - 1.0).abs() < (r.ratio - 1.0).abs());
    }
}
