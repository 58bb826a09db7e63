//! Inverse-Laplace (Bromwich) integrals built on Airy functions: the
//! `wp` kernel of the transition layer, the corner-layer kernel `L_C`, and
//! the integral `Lambda(gamma)` of the corner solution over `mu`.
//!
//! All integrands are conjugate-symmetric, so only `Im(lambda) >= 0` is
//! integrated. Values are carried as logarithms because the kernels span
//! hundreds of orders of magnitude over their useful range.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::airy::{ai_prime_r0, airy_root_r0, ln_ai};
use crate::error::{Error, Result};
use crate::numeric::brent_min;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContourMode {
    /// Abscissa at the real-axis saddle of the integrand, right of all poles.
    Auto,
    /// Abscissa `re_offset` as given.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BromwichSpec {
    pub re_offset: f64,
    pub half_length: f64,
    pub n_nodes: usize,
    pub mode: ContourMode,
}

impl Default for BromwichSpec {
    fn default() -> Self {
        Self { re_offset: 1.0, half_length: 30.0, n_nodes: 200, mode: ContourMode::Auto }
    }
}

impl BromwichSpec {
    pub fn new(re_offset: f64, half_length: f64, n_nodes: usize, mode: ContourMode) -> Result<Self> {
        if !(re_offset > 0.0 && re_offset.is_finite()) {
            return Err(Error::Domain(format!("re_offset must be positive, got {re_offset}")));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::Domain(format!("half_length must be positive, got {half_length}")));
        }
        if n_nodes < 3 {
            return Err(Error::Domain(format!("n_nodes must be at least 3, got {n_nodes}")));
        }
        Ok(Self { re_offset, half_length, n_nodes, mode })
    }

    pub fn fixed(re_offset: f64) -> Result<Self> {
        Self::new(re_offset, 30.0, 200, ContourMode::Fixed)
    }
}

/// A real number stored as `sign * exp(ln_abs)` plus quadrature bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelValue {
    pub sign: f64,
    pub ln_abs: f64,
    pub abscissa: f64,
    pub half_length: f64,
    pub n_nodes: usize,
    /// Relative error estimate from the trapezoid rule at half resolution.
    pub rel_err: f64,
}

impl KernelValue {
    pub fn value(&self) -> Result<f64> {
        if !(-708.0..=709.0).contains(&self.ln_abs) {
            return Err(Error::Overflow { log10: self.ln_abs / std::f64::consts::LN_10 });
        }
        Ok(self.sign * self.ln_abs.exp())
    }

    fn shifted(mut self, ln_factor: f64) -> Self {
        self.ln_abs += ln_factor;
        self
    }
}

const REL_TOL: f64 = 1e-9;
const TAIL_TOL: f64 = 1e-13;

/// `(1/2 pi i) int_Br exp(lnf(lambda)) d lambda` for a conjugate-symmetric
/// integrand analytic right of `pole`. `scan_hi` bounds the saddle search.
pub fn bromwich<F: Fn(C64) -> C64>(lnf: F, pole: f64, scan_hi: f64, spec: &BromwichSpec) -> Result<KernelValue> {
    let c = match spec.mode {
        ContourMode::Fixed => {
            if spec.re_offset <= pole {
                return Err(Error::Domain(format!("abscissa {} is not right of the pole at {pole}", spec.re_offset)));
            }
            spec.re_offset
        }
        ContourMode::Auto => saddle_abscissa(&lnf, pole, scan_hi),
    };
    let re = |y: f64| lnf(C64::new(c, y));
    let reference = re(0.0).re;
    let term = |y: f64| (re(y) - reference).exp();

    let mut h_len = spec.half_length;
    let mut n = spec.n_nodes;
    let mut last_err = Error::Accuracy { tail: f64::NAN, tol: TAIL_TOL };
    for _ in 0..4 {
        let h = h_len / n as f64;
        let mut full = 0.5 * (term(0.0) + term(h_len)).re;
        let mut half = full;
        for k in 1..n {
            let v = term(k as f64 * h).re;
            full += v;
            if k % 2 == 0 {
                half += v;
            }
        }
        let t_full = full * h / PI;
        // Nodes of the coarse rule are the even ones; endpoints only when n is even.
        let t_half = if n % 2 == 0 { half * 2.0 * h / PI } else { f64::NAN };
        let tail = term(h_len).norm();
        let rel_err = ((t_full - t_half) / t_full).abs();
        let tail_rel = tail / (PI * t_full.abs());
        if t_full.is_finite() && t_full != 0.0 && tail_rel <= TAIL_TOL && rel_err <= REL_TOL {
            return Ok(KernelValue {
                sign: t_full.signum(),
                ln_abs: reference + t_full.abs().ln(),
                abscissa: c,
                half_length: h_len,
                n_nodes: n,
                rel_err,
            });
        }
        last_err = Error::Accuracy { tail: tail_rel.max(rel_err), tol: TAIL_TOL.max(REL_TOL) };
        if tail_rel > TAIL_TOL {
            h_len *= 2.0;
        }
        n *= 2;
    }
    Err(last_err)
}

fn saddle_abscissa<F: Fn(C64) -> C64>(lnf: &F, pole: f64, scan_hi: f64) -> f64 {
    let g = |c: f64| {
        let v = lnf(C64::new(c, 0.0)).re;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let lo = pole + 0.02;
    let mut hi = scan_hi.max(lo + 5.0);
    loop {
        // The real-axis profile is unimodal; the grid only brackets the minimum.
        let n = 60;
        let step = (hi - lo) / n as f64;
        let (mut best, mut kb) = (f64::INFINITY, 0usize);
        for k in 0..=n {
            let v = g(lo + step * k as f64);
            if v < best {
                best = v;
                kb = k;
            }
        }
        if kb == n && hi < 1e4 {
            hi *= 2.0;
            continue;
        }
        let a = lo + step * kb.saturating_sub(1) as f64;
        let b = (lo + step * (kb + 1) as f64).min(hi);
        let (c, _) = brent_min(g, a.max(pole + 1e-3), b, 1e-10);
        return c;
    }
}

fn k_coef(d: f64) -> f64 {
    2f64.powf(-2.0 / 3.0) * d.powf(-1.0 / 3.0)
}

/// `wp(Omega) = (1/2 pi i) int_Br exp(-lambda Omega) / Ai(2^{1/3} lambda)^2`.
pub fn wp_kernel_ln(omega: f64, spec: &BromwichSpec) -> Result<KernelValue> {
    let s = 2f64.cbrt();
    let pole = airy_root_r0() / s;
    let lnf = |l: C64| -l * omega - 2.0 * ln_ai(l * s);
    bromwich(lnf, pole, 10.0 + omega * omega / 4.0, spec)
}

pub fn wp_kernel(omega: f64, spec: &BromwichSpec) -> Result<f64> {
    wp_kernel_ln(omega, spec)?.value()
}

/// Corner-layer kernel `L_C(mu, gamma)` in log form.
/// Leading behaviour of `wp(Omega)` as `Omega -> +inf`.
pub fn wp_tail_plus(omega: f64) -> f64 {
    omega.powf(1.5) * PI.sqrt() * 2f64.powf(-5.0 / 6.0) * (-omega.powi(3) / 24.0).exp()
}

/// Leading behaviour of `wp(Omega)` as `Omega -> -inf`.
pub fn wp_tail_minus(omega: f64) -> f64 {
    let aip = ai_prime_r0();
    -omega * 2f64.powf(-2.0 / 3.0) / (aip * aip) * (-2f64.powf(-1.0 / 3.0) * airy_root_r0() * omega).exp()
}

pub fn corner_kernel_ln(mu: f64, gamma: f64, d: f64, spec: &BromwichSpec) -> Result<KernelValue> {
    if !(mu >= 0.0) {
        return Err(Error::Domain(format!("corner kernel needs mu >= 0, got {mu}")));
    }
    let k = k_coef(d);
    let m = 2f64.powf(-1.0 / 3.0) * d.powf(-2.0 / 3.0) * mu;
    let lnf = |l: C64| l * (k * gamma) + ln_ai(l + m) - 2.0 * ln_ai(l);
    let scan_hi = 10.0 + 2.0 * ((k * gamma).abs() + m.sqrt()).powi(2);
    let pref = -((2.0 * PI).sqrt() * 2f64.cbrt() * d.powf(2.0 / 3.0)).ln();
    Ok(bromwich(lnf, airy_root_r0(), scan_hi, spec)?.shifted(pref))
}

pub fn corner_kernel(mu: f64, gamma: f64, d: f64, spec: &BromwichSpec) -> Result<f64> {
    corner_kernel_ln(mu, gamma, d, spec)?.value()
}

/// `int_0^inf exp(a u) Ai(lambda + u)/Ai(lambda) du`, by 15-point
/// Gauss-Kronrod on panels of width 1/2 until the integrand is negligible.
fn airy_tail_integral(lambda: C64, a: f64) -> C64 {
    const X: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const W: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    let l0 = ln_ai(lambda);
    let f = |u: f64| (ln_ai(lambda + u) - l0 + a * u).exp();
    let mut sum = C64::new(0.0, 0.0);
    let mut peak: f64 = 0.0;
    let width = 0.5;
    for panel in 0..4000 {
        let c = (panel as f64 + 0.5) * width;
        let h = 0.5 * width;
        let mut part = f(c) * W[7];
        for j in 0..7 {
            part += (f(c - h * X[j]) + f(c + h * X[j])) * W[j];
        }
        part *= h;
        sum += part;
        peak = peak.max(part.norm());
        if panel > 4 && part.norm() < 1e-17 * peak {
            break;
        }
    }
    sum
}

/// `Lambda(gamma)`: the corner solution integrated over `mu`, evaluated as a
/// single Bromwich integral with the `mu`-integral done inside.
pub fn lambda_integral_ln(gamma: f64, d: f64, spec: &BromwichSpec) -> Result<KernelValue> {
    let k = k_coef(d);
    let a = k * gamma;
    let lnf = |l: C64| l * a - ln_ai(l) + airy_tail_integral(l, a).ln();
    let scan_hi = 10.0 + 4.0 * a * a;
    let pref = (2f64.cbrt() * d.powf(2.0 / 3.0)).ln();
    Ok(bromwich(lnf, airy_root_r0(), scan_hi, spec)?.shifted(pref))
}

pub fn lambda_integral(gamma: f64, d: f64, spec: &BromwichSpec) -> Result<f64> {
    lambda_integral_ln(gamma, d, spec)?.value()
}

/// The closed form `2^{1/3} D^{2/3} exp(gamma^3/(12 D))`.
pub fn lambda_closed_form(gamma: f64, d: f64) -> f64 {
    2f64.cbrt() * d.powf(2.0 / 3.0) * (gamma.powi(3) / (12.0 * d)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(BromwichSpec::new(0.0, 30.0, 4000, ContourMode::Fixed).is_err());
        assert!(BromwichSpec::new(1.0, -1.0, 4000, ContourMode::Fixed).is_err());
        assert!(BromwichSpec::new(1.0, 30.0, 2, ContourMode::Fixed).is_err());
        assert!(BromwichSpec::new(1.0, 30.0, 3, ContourMode::Auto).is_ok());
    }

    #[test]
    fn wp_at_zero() {
        let v = wp_kernel(0.0, &BromwichSpec::default()).unwrap();
        assert!((v - 2f64.powf(-1.0 / 3.0)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn wp_tails() {
        let spec = BromwichSpec::default();
        for o in [8.0, -8.0] {
            let v = wp_kernel(o, &spec).unwrap();
            let a = if o > 0.0 { wp_tail_plus(o) } else { wp_tail_minus(o) };
            assert!((v / a - 1.0).abs() < 0.05, "{o}: {v} {a}");
        }
    }

    #[test]
    fn wp_contour_independence() {
        for &o in &[-2.0, 0.0, 1.5] {
            let base = wp_kernel(o, &BromwichSpec::default()).unwrap();
            for &c in &[0.25, 1.0, 2.0] {
                let v = wp_kernel(o, &BromwichSpec::fixed(c).unwrap()).unwrap();
                assert!((v / base - 1.0).abs() < 1e-8, "Omega={o} c={c}: {v} {base}");
            }
        }
    }

    #[test]
    fn corner_contour_independence_and_sign() {
        for &(mu, g) in &[(0.0, 0.0), (1.0, 0.5), (3.0, -1.0)] {
            let base = corner_kernel(mu, g, 1.0, &BromwichSpec::default()).unwrap();
            assert!(base > 0.0);
            for &c in &[0.25, 2.0] {
                let v = corner_kernel(mu, g, 1.0, &BromwichSpec::fixed(c).unwrap()).unwrap();
                assert!((v / base - 1.0).abs() < 1e-8, "({mu},{g}) c={c}: {v} {base}");
            }
        }
    }

    #[test]
    fn corner_small_x_limit() {
        // mu = 0, gamma -> -inf: L_C exp(-gamma^3/12D) -> -gamma/(D sqrt(2 pi)).
        for &d in &[0.5, 1.0, 2.0] {
            let g = -8.0;
            let kv = corner_kernel_ln(0.0, g, d, &BromwichSpec::default()).unwrap();
            let lhs = kv.ln_abs - g.powi(3) / (12.0 * d);
            let rhs = (-g / (d * (2.0 * PI).sqrt())).ln();
            assert!((lhs - rhs).abs() < 0.02, "D={d}: {lhs} {rhs}");
        }
    }

    #[test]
    fn lambda_matches_closed_form() {
        let spec = BromwichSpec::default();
        for &(g, d) in &[(0.0, 1.0), (1.0, 1.0), (-2.0, 0.5)] {
            let v = lambda_integral(g, d, &spec).unwrap();
            let w = lambda_closed_form(g, d);
            assert!((v / w - 1.0).abs() < 1e-4, "gamma={g} D={d}: {v} {w}");
        }
        assert!((lambda_closed_form(0.0, 1.0) - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn kernel_value_overflow_path() {
        let kv = KernelValue { sign: 1.0, ln_abs: 800.0, abscissa: 0.0, half_length: 30.0, n_nodes: 10, rel_err: 0.0 };
        assert!(matches!(kv.value(), Err(Error::Overflow { .. })));
    }
}
