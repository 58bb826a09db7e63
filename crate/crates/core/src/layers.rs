//! Boundary, corner and transition layers, and the composite evaluator that
//! routes a point to the expansion owning it.

use std::f64::consts::PI;

use crate::airy::{ai_prime_r0, airy_root_r0, ln_ai};
use crate::error::{domain, Error, Result};
use crate::eval::{nu, LayerEval};
use crate::kernels::{corner_kernel_ln, wp_kernel_ln, BromwichSpec};
use crate::model::{
    beta_fn, classify_point, j_factor, x0_boundary, LayerThresholds, ModelParams, PhysPoint, Region, RegionTag,
    ScaledCoords,
};
use crate::region1::eval_f_region_i;
use crate::region2::{gamma_phase, phi0, ratio_power};
use num_complex::Complex64 as C64;

fn tagged(region: Region, x: f64, eta: f64, params: ModelParams) -> RegionTag {
    RegionTag { region, coords: ScaledCoords::of(PhysPoint { x, eta }, params) }
}

/// Small-`x` layer below `eta = 1`, in `v = x/eps`.
pub fn eval_small_x(v: f64, eta: f64, params: ModelParams) -> Result<LayerEval> {
    if !(eta < 1.0) {
        return domain(format!("small-x layer needs eta < 1, got {eta}"));
    }
    if !(v >= 0.0) {
        return domain(format!("v must be >= 0, got {v}"));
    }
    let d = params.d;
    let mut out = LayerEval::new(tagged(Region::SmallX, v * params.eps, eta, params), params.eps, nu::SMALL_X);
    out.phase_1 = -0.5 * eta * eta;
    out.phase_0 = -(1.0 - eta) * v / d;
    out.amplitude = (1.0 - eta) / (d * (2.0 * PI).sqrt());
    Ok(out)
}

fn inner_phases(out: &mut LayerEval, x: f64, eta: f64, d: f64) -> Result<()> {
    out.phase_1 = phi0(eta, d) + (eta - 1.0) * x / (2.0 * d);
    out.phase_13 = gamma_phase(eta, d)?;
    Ok(())
}

/// Inner layer `x = O(eps^{2/3})` above `eta = 1`, in `mu = x/eps^{2/3}`.
pub fn eval_inner(mu: f64, eta: f64, params: ModelParams) -> Result<LayerEval> {
    if !(eta > 1.0) {
        return domain(format!("inner layer needs eta > 1, got {eta}"));
    }
    if !(mu >= 0.0) {
        return domain(format!("mu must be >= 0, got {mu}"));
    }
    let d = params.d;
    let x = mu * params.eps13() * params.eps13();
    let mut out = LayerEval::new(tagged(Region::Inner, x, eta, params), params.eps, nu::INNER);
    inner_phases(&mut out, x, eta, d)?;
    if mu == 0.0 {
        out.amplitude = 0.0;
        return Ok(out);
    }
    let be = beta_fn(eta, d);
    let aip = ai_prime_r0();
    let arg = 2f64.powf(-1.0 / 3.0) * d.powf(-5.0 / 6.0) * be.powf(1.0 / 6.0) * mu + airy_root_r0();
    let ln_pref = ((eta - 1.0) * d.powf(-5.0 / 6.0) / PI.sqrt() * 2f64.powf(-1.5) * be.powf(-1.0 / 6.0)
        * ratio_power(eta, d)
        / (aip * aip))
        .ln();
    let la = ln_ai(C64::new(arg, 0.0));
    // Ai is real on the real axis; a negative value shows up as an imaginary part of pi.
    let sign = if la.im.abs() > 1.0 { -1.0 } else { 1.0 };
    out.set_ln_amplitude(ln_pref + la.re, sign);
    Ok(out)
}

/// Inner-inner layer `x = O(eps)` above `eta = 1`, in `v = x/eps`.
pub fn eval_inner_inner(v: f64, eta: f64, params: ModelParams) -> Result<LayerEval> {
    if !(eta > 1.0) {
        return domain(format!("inner-inner layer needs eta > 1, got {eta}"));
    }
    if !(v >= 0.0) {
        return domain(format!("v must be >= 0, got {v}"));
    }
    let d = params.d;
    let x = v * params.eps;
    let mut out = LayerEval::new(tagged(Region::InnerInner, x, eta, params), params.eps, nu::INNER_INNER);
    inner_phases(&mut out, x, eta, d)?;
    out.amplitude = 2f64.powf(-5.0 / 6.0) / PI.sqrt() * d.powf(-2.0 / 3.0) * ratio_power(eta, d) / ai_prime_r0()
        * ((eta - 1.0) * v / (2.0 * d) + 1.0);
    Ok(out)
}

/// Corner layer around `(0, 1)` in `mu = x/eps^{2/3}`, `gamma = (eta-1)/eps^{1/3}`.
pub fn eval_corner(mu: f64, gamma: f64, params: ModelParams, spec: &BromwichSpec) -> Result<LayerEval> {
    if !(mu >= 0.0) {
        return domain(format!("mu must be >= 0, got {mu}"));
    }
    let d = params.d;
    let e13 = params.eps13();
    let eta = 1.0 + gamma * e13;
    let mut out = LayerEval::new(tagged(Region::Corner, mu * e13 * e13, eta, params), params.eps, nu::CORNER);
    out.phase_1 = -0.5 * eta * eta;
    out.phase_0 = mu * gamma / (2.0 * d) - gamma.powi(3) / (12.0 * d);
    let kv = corner_kernel_ln(mu, gamma, d, spec)?;
    out.set_ln_amplitude(kv.ln_abs, kv.sign);
    Ok(out)
}

/// Transition layer around `x = X0(eta)` in `omega = (x - X0)/eps^{1/3}`.
pub fn eval_transition(omega: f64, eta: f64, params: ModelParams, spec: &BromwichSpec) -> Result<LayerEval> {
    if !(eta > 1.0) {
        return domain(format!("transition layer needs eta > 1, got {eta}"));
    }
    let d = params.d;
    let e13 = params.eps13();
    let x = x0_boundary(eta)? + omega * e13;
    if x < 0.0 {
        return domain(format!("omega = {omega} puts x below 0 at eta = {eta}"));
    }
    let (j, _) = j_factor(eta, d)?;
    let mut out = LayerEval::new(tagged(Region::Transition, x, eta, params), params.eps, nu::TRANSITION);
    out.phase_1 = -0.5 * eta * eta;
    out.phase_13 = -eta * omega * omega / (2.0 * d * j);
    let r = eta * omega / (d * j);
    let cubic = (4.0 * d * d + 6.0 * d + 3.0) * r.powi(3) / 6.0
        - omega.powi(3) * (2.0 * eta - 1.0) * (2.0 * d * eta * eta + 2.0 * eta * eta - 2.0 * eta + 1.0)
            / (2.0 * eta * d.powi(3) * j.powi(3));
    out.phase_0 = cubic;
    if cubic.abs() > 0.5 * out.phase_13.abs() / e13 {
        out.diagnostics
            .push(format!("cubic exponent terms ({cubic:.3e}) are not subdominant at omega = {omega}"));
    }
    let big_omega = 2f64.powf(2.0 / 3.0) * eta * omega / (d.cbrt() * j);
    let kv = wp_kernel_ln(big_omega, spec)?;
    let ln_pref = (2f64.powf(-2.0 / 3.0) / PI * (eta / (d * j)).sqrt()).ln();
    out.set_ln_amplitude(ln_pref + kv.ln_abs, kv.sign);
    Ok(out)
}

/// Evaluate the expansion named by `region` at `p`, regardless of where the
/// classifier would put the point.
pub fn eval_layer(region: Region, p: PhysPoint, params: ModelParams, spec: &BromwichSpec) -> Result<LayerEval> {
    let p = PhysPoint::new(p.x, p.eta)?;
    let c = ScaledCoords::of(p, params);
    match region {
        Region::RegionI => eval_f_region_i(p, params),
        Region::RegionII => crate::region2::eval_f_region_ii(p, params),
        Region::SmallX => eval_small_x(c.v, p.eta, params),
        Region::Inner => eval_inner(c.mu, p.eta, params),
        Region::InnerInner => eval_inner_inner(c.v, p.eta, params),
        Region::Corner => eval_corner(c.mu, c.gamma, params, spec),
        Region::Transition => match c.omega {
            Some(w) => eval_transition(w, p.eta, params, spec),
            None => domain(format!("transition layer needs eta > 1, got {}", p.eta)),
        },
        Region::NearCusp => Err(Error::Unsupported("the neighbourhood of the cusp")),
    }
}

/// Classify `p` and evaluate the owning expansion.
pub fn eval_composite(p: PhysPoint, params: ModelParams, th: &LayerThresholds, spec: &BromwichSpec) -> Result<LayerEval> {
    let tag = classify_point(p, params, th)?;
    eval_layer(tag.region, p, params, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::ai_real;

    fn params(d: f64, eps: f64) -> ModelParams {
        ModelParams::new(d, eps).unwrap()
    }

    #[test]
    fn small_x_values() {
        let e = eval_small_x(0.0, 0.0, params(1.0, 1e-3)).unwrap();
        assert!((e.amplitude - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert_eq!((e.phase_1, e.phase_0), (0.0, 0.0));
        assert!(eval_small_x(0.0, 1.0, params(1.0, 1e-3)).is_err());
        // Robin condition D F_v + (1 - eta) F = 0 at v = 0, by differencing.
        let (d, eta) = (0.7, 0.3);
        let p = params(d, 1e-2);
        let f = |v: f64| eval_small_x(v, eta, p).unwrap().ln_value().exp();
        let h = 1e-6;
        let fv = (f(h) - f(0.0)) / h;
        assert!((d * fv + (1.0 - eta) * f(0.0)).abs() < 1e-5 * f(0.0));
    }

    #[test]
    fn small_x_gaussian_factorization() {
        // eta = ebar sqrt(eps): value / (Gaussian in ebar) depends on v alone
        // as exp(-v/D)/D up to the (1 - eta) factor.
        let eps = 1e-4;
        let p = params(2.0, eps);
        for &eb in &[-1.0, 0.5] {
            let eta = eb * eps.sqrt();
            let e = eval_small_x(3.0, eta, p).unwrap();
            let want = (1.0 - eta) / (2.0 * (2.0 * PI).sqrt()) * (-0.5 * eb * eb).exp() * (-(1.0 - eta) * 3.0 / 2.0f64).exp();
            let got = e.ln_value() + 1.5 * eps.ln();
            assert!((got - want.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_layer_values() {
        let p = params(1.0, 1e-3);
        let e = eval_inner(0.0, 2.0, p).unwrap();
        assert_eq!(e.amplitude, 0.0);
        assert!((e.phase_1 - phi0(2.0, 1.0)).abs() < 1e-15);
        for k in 1..=40 {
            let mu = 0.1 * k as f64;
            let e = eval_inner(mu, 1.5, p).unwrap();
            assert!(e.amplitude > 0.0, "mu={mu}");
        }
        // Direct evaluation against the plain Airy value.
        let (d, eta, mu) = (0.5, 2.0, 1.3);
        let e = eval_inner(mu, eta, params(d, 1e-3)).unwrap();
        let be = beta_fn(eta, d);
        let arg = 2f64.powf(-1.0 / 3.0) * d.powf(-5.0 / 6.0) * be.powf(1.0 / 6.0) * mu + airy_root_r0();
        let want = (eta - 1.0) * d.powf(-5.0 / 6.0) / PI.sqrt() * 2f64.powf(-1.5) * be.powf(-1.0 / 6.0)
            * ratio_power(eta, d)
            * ai_real(arg)
            / ai_prime_r0().powi(2);
        assert!((e.amplitude / want - 1.0).abs() < 1e-12);
        assert!(eval_inner(1.0, 1.0, p).is_err());
    }

    #[test]
    fn inner_layer_large_mu_decay() {
        // ln R0 follows the Airy decay -2/3 z^{3/2} with z the Airy argument.
        let (d, eta) = (1.0, 2.0);
        let p = params(d, 1e-3);
        let be = beta_fn(eta, d);
        let c = 2f64.powf(-1.0 / 3.0) * d.powf(-5.0 / 6.0) * be.powf(1.0 / 6.0);
        let l = |mu: f64| {
            let e = eval_inner(mu, eta, p).unwrap();
            e.amplitude.ln() + e.phase_0
        };
        let (m1, m2) = (200.0, 400.0);
        let slope = l(m2) - l(m1);
        let z = |m: f64| c * m + airy_root_r0();
        let want = -2.0 / 3.0 * (z(m2).powf(1.5) - z(m1).powf(1.5)) - 0.25 * (z(m2) / z(m1)).ln();
        assert!((slope - want).abs() < 1e-3 * want.abs());
    }

    #[test]
    fn inner_inner_values() {
        let (d, eta) = (1.0, 2.0);
        let p = params(d, 1e-3);
        let e0 = eval_inner_inner(0.0, eta, p).unwrap();
        let want = 2f64.powf(-5.0 / 6.0) / PI.sqrt() * ratio_power(eta, d) / ai_prime_r0();
        assert!((e0.amplitude - want).abs() < 1e-15);
        let e1 = eval_inner_inner(1.0, eta, p).unwrap();
        assert!((e1.amplitude - e0.amplitude * (1.0 + (eta - 1.0) / (2.0 * d))).abs() < 1e-15);
        // Robin row with the exp((eta-1)v/(2D)) factor included.
        let f = |v: f64| {
            let e = eval_inner_inner(v, eta, p).unwrap();
            e.amplitude * ((eta - 1.0) * v / (2.0 * d)).exp()
        };
        let h = 1e-7;
        let fv = (f(h) - f(-0.0)) / h;
        assert!((d * fv + (1.0 - eta) * f(0.0)).abs() < 1e-6);
    }

    #[test]
    fn corner_small_x_limit() {
        // gamma -> -inf at mu = 0 gives the small-x layer at v = 0.
        let eps = 1e-6;
        let p = params(1.0, eps);
        let g = -8.0;
        let c = eval_corner(0.0, g, p, &BromwichSpec::default()).unwrap();
        let eta = 1.0 + g * eps.cbrt();
        let s = eval_small_x(0.0, eta, p).unwrap();
        // The two expansions differ by eps^{1/3} in their prefactors, which the
        // amplitude ratio (1 - eta) = -gamma eps^{1/3} absorbs.
        assert!((c.ln_value() - s.ln_value()).abs() < 0.02, "{} {}", c.ln_value(), s.ln_value());
    }

    #[test]
    fn transition_at_center() {
        let (d, eta) = (1.0, 2.0);
        let p = params(d, 1e-3);
        let e = eval_transition(0.0, eta, p, &BromwichSpec::default()).unwrap();
        let (j, _) = j_factor(eta, d).unwrap();
        let want = 2f64.powf(-2.0 / 3.0) / PI * (eta / (d * j)).sqrt() * 2f64.powf(-1.0 / 3.0);
        assert!((e.amplitude - want).abs() < 1e-9);
        assert_eq!((e.phase_13, e.phase_0), (0.0, 0.0));
        assert!((e.phase_1 + 2.0).abs() < 1e-15);
        assert!(eval_transition(0.0, 1.0, p, &BromwichSpec::default()).is_err());
    }

    #[test]
    fn transition_tails_match_ray_limits() {
        let (d, eta) = (1.0, 2.0);
        let p = params(d, 1e-6);
        let spec = BromwichSpec::default();
        let (j, _) = j_factor(eta, d).unwrap();
        // omega -> +inf: amplitude (eta/j)^2 omega^{3/2}/(D sqrt(2 pi)) once
        // the wp exponent is put back.
        let w: f64 = 12.0;
        let e = eval_transition(w, eta, p, &spec).unwrap();
        let big = 2f64.powf(2.0 / 3.0) * eta * w / (d.cbrt() * j);
        let lhs = e.amplitude.ln() + e.phase_0 + big.powi(3) / 24.0 - e.phase_0;
        let rhs = ((eta / j).powi(2) * w.powf(1.5) / (d * (2.0 * PI).sqrt())).ln();
        assert!((lhs - rhs).abs() < 0.05, "{lhs} {rhs}");
        // omega -> -inf: -(1/pi) 2^{-2/3} D^{-5/6} (eta/j)^{3/2} omega Ai'(r0)^{-2} exp(-2^{1/3} D^{-1/3} r0 eta omega / j).
        let w: f64 = -12.0;
        let e = eval_transition(w, eta, p, &spec).unwrap();
        let r0 = airy_root_r0();
        let rhs = (-(1.0 / PI) * 2f64.powf(-2.0 / 3.0) * d.powf(-5.0 / 6.0) * (eta / j).powf(1.5) * w
            / ai_prime_r0().powi(2))
        .ln()
            - 2f64.cbrt() * d.powf(-1.0 / 3.0) * r0 * eta * w / j;
        let lhs = e.amplitude.ln() + e.phase_0 - e.phase_0;
        assert!((lhs - rhs).abs() < 0.05, "{lhs} {rhs}");
    }

    #[test]
    fn composite_dispatch() {
        let p = params(1.0, 1e-3);
        let th = LayerThresholds::default();
        let spec = BromwichSpec::default();
        let e = eval_composite(PhysPoint { x: 0.5, eta: 0.0 }, p, &th, &spec).unwrap();
        assert_eq!(e.tag.region, Region::RegionI);
        let e = eval_composite(PhysPoint { x: 0.0, eta: 1.0 }, p, &th, &spec).unwrap();
        assert_eq!(e.tag.region, Region::Corner);
        let x0 = x0_boundary(2.0).unwrap();
        let e = eval_composite(PhysPoint { x: x0, eta: 2.0 }, p, &th, &spec).unwrap();
        assert_eq!(e.tag.region, Region::Transition);
        assert!(e.tag.coords.omega.unwrap().abs() < 1e-12);
        assert!(matches!(
            eval_composite(PhysPoint { x: 0.65, eta: -0.97 }, p, &th, &spec),
            Err(Error::Unsupported(_))
        ));
    }
}
