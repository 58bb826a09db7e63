//! Model parameters, elementary scalar functions and the region atlas.

use serde::{Deserialize, Serialize};

use crate::caustics;
use crate::error::{domain, Result};

/// Diffusion coefficient `D` and perturbation parameter `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: f64,
    pub eps: f64,
}

impl ModelParams {
    pub fn new(d: f64, eps: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return domain(format!("D must be positive and finite, got {d}"));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return domain(format!("eps must be positive and finite, got {eps}"));
        }
        Ok(Self { d, eps })
    }

    /// `c = eps^{-1/2}`.
    pub fn c(&self) -> f64 {
        self.eps.sqrt().recip()
    }

    pub fn eps13(&self) -> f64 {
        self.eps.cbrt()
    }
}

/// A point of the half-plane `x >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysPoint {
    pub x: f64,
    pub eta: f64,
}

impl PhysPoint {
    pub fn new(x: f64, eta: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return domain(format!("x must be finite and >= 0, got {x}"));
        }
        if !eta.is_finite() {
            return domain(format!("eta must be finite, got {eta}"));
        }
        Ok(Self { x, eta })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    RegionI,
    RegionII,
    SmallX,
    Inner,
    InnerInner,
    Corner,
    Transition,
    NearCusp,
}

impl Region {
    pub const ALL: [Region; 8] = [
        Region::RegionI,
        Region::RegionII,
        Region::SmallX,
        Region::Inner,
        Region::InnerInner,
        Region::Corner,
        Region::Transition,
        Region::NearCusp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Region::RegionI => "region1",
            Region::RegionII => "region2",
            Region::SmallX => "small_x",
            Region::Inner => "inner",
            Region::InnerInner => "inner_inner",
            Region::Corner => "corner",
            Region::Transition => "transition",
            Region::NearCusp => "near_cusp",
        }
    }

    pub fn from_name(s: &str) -> Option<Region> {
        Region::ALL.into_iter().find(|r| r.name() == s)
    }
}

/// Stretched coordinates of a point. `omega` exists only for `eta >= 1`,
/// where the boundary curve `X0` is defined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledCoords {
    pub v: f64,
    pub mu: f64,
    pub gamma: f64,
    pub omega: Option<f64>,
}

impl ScaledCoords {
    pub fn of(p: PhysPoint, params: ModelParams) -> Self {
        let e13 = params.eps13();
        let omega = if p.eta >= 1.0 {
            Some((p.x - x0_unchecked(p.eta)) / e13)
        } else {
            None
        };
        Self {
            v: p.x / params.eps,
            mu: p.x / (e13 * e13),
            gamma: (p.eta - 1.0) / e13,
            omega,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionTag {
    pub region: Region,
    pub coords: ScaledCoords,
}

/// Cutoffs in the stretched variables that decide which expansion owns a
/// point. All are multiples of the natural layer width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerThresholds {
    /// Corner: `mu <= corner_mu` and `|gamma| <= corner_gamma`.
    pub corner_mu: f64,
    pub corner_gamma: f64,
    /// Layers attached to `eta > 1` (or `eta < 1`) need
    /// `|eta - 1| > eta_band * eps^{1/3}`.
    pub eta_band: f64,
    /// Transition: `|omega| <= transition_omega`.
    pub transition_omega: f64,
    /// Inner-inner / small-x: `v <= inner_v`.
    pub inner_v: f64,
    /// Inner: `mu <= inner_mu`.
    pub inner_mu: f64,
    /// Radius of the excluded disc around the cusp in the `(x, eta)` plane.
    pub cusp_radius: f64,
}

impl Default for LayerThresholds {
    fn default() -> Self {
        Self {
            corner_mu: 8.0,
            corner_gamma: 4.0,
            eta_band: 4.0,
            transition_omega: 4.0,
            inner_v: 8.0,
            inner_mu: 8.0,
            cusp_radius: 0.1,
        }
    }
}

fn x0_unchecked(eta: f64) -> f64 {
    // eta - ln(eta) - 1 loses everything to cancellation near eta = 1.
    let u = eta - 1.0;
    u - u.ln_1p()
}

/// The curve `X0(eta) = eta - ln(eta) - 1` separating the two ray regions.
pub fn x0_boundary(eta: f64) -> Result<f64> {
    if !(eta >= 1.0) {
        return domain(format!("X0 is defined for eta >= 1, got {eta}"));
    }
    Ok(x0_unchecked(eta))
}

pub fn alpha_fn(sigma: f64, d: f64) -> f64 {
    (d + 1.0) * sigma - 1.0
}

pub fn beta_fn(sigma: f64, d: f64) -> f64 {
    d * sigma * sigma + (sigma - 1.0) * (sigma - 1.0)
}

/// `j(eta)` and `j1 = j/2`: the Region I Jacobian along the `s = 1` ray,
/// evaluated at `t = ln eta`.
pub fn j_factor(eta: f64, d: f64) -> Result<(f64, f64)> {
    if !(eta >= 1.0) {
        return domain(format!("j is defined for eta >= 1, got {eta}"));
    }
    let j = 2.0 * (1.0 + 1.0 / d) * eta * eta.ln() + (4.0 - 3.0 * eta - 1.0 / eta) / d;
    Ok((j, 0.5 * j))
}

/// Assign `p` to the expansion whose validity zone contains it.
///
/// Precedence: corner, transition, the `x`-layers (inner, inner-inner,
/// small-x), the cusp disc, and finally Region I or Region II.
pub fn classify_point(p: PhysPoint, params: ModelParams, th: &LayerThresholds) -> Result<RegionTag> {
    let p = PhysPoint::new(p.x, p.eta)?;
    let coords = ScaledCoords::of(p, params);
    let band = th.eta_band * params.eps13();
    let above = p.eta > 1.0 + band;
    let below = p.eta < 1.0 - band;
    let tag = |region| Ok(RegionTag { region, coords });

    if coords.mu <= th.corner_mu && coords.gamma.abs() <= th.corner_gamma {
        return tag(Region::Corner);
    }
    if above {
        if let Some(w) = coords.omega {
            if w.abs() <= th.transition_omega {
                return tag(Region::Transition);
            }
        }
        if coords.v <= th.inner_v {
            return tag(Region::InnerInner);
        }
        if coords.mu <= th.inner_mu {
            return tag(Region::Inner);
        }
    }
    if below && coords.v <= th.inner_v {
        return tag(Region::SmallX);
    }
    if p.eta <= 1.0 || p.x > x0_unchecked(p.eta) {
        if let Ok(c) = caustics::find_cusp(params.d) {
            if (p.x - c.x).hypot(p.eta - c.eta) <= th.cusp_radius {
                return tag(Region::NearCusp);
            }
        }
        return tag(Region::RegionI);
    }
    tag(Region::RegionII)
}

/// True when `(x, eta)` lies in the closure of Region I.
pub fn in_region_one(x: f64, eta: f64) -> bool {
    x >= 0.0 && (eta <= 1.0 || x >= x0_unchecked(eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn x0_values() {
        assert_eq!(x0_boundary(1.0).unwrap(), 0.0);
        assert!((x0_boundary(E).unwrap() - (E - 2.0)).abs() < 1e-15);
        assert!((x0_boundary(2.0).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!(x0_boundary(0.99).is_err());
        // Near eta = 1 the value is (eta-1)^2/2 to leading order.
        let u = 1e-6;
        let x = x0_boundary(1.0 + u).unwrap();
        assert!((x / (u * u / 2.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn alpha_beta_values() {
        assert_eq!(alpha_fn(1.0, 1.0), 1.0);
        assert_eq!(alpha_fn(1.0 / 3.0, 2.0), 0.0);
        assert_eq!(alpha_fn(2.0, 1.0), 3.0);
        assert_eq!(beta_fn(1.0, 0.7), 0.7);
        assert_eq!(beta_fn(0.0, 0.7), 1.0);
        assert_eq!(beta_fn(2.0, 1.0), 5.0);
    }

    #[test]
    fn j_values() {
        assert_eq!(j_factor(1.0, 0.3).unwrap().0, 0.0);
        let (j, j1) = j_factor(E, 1.0).unwrap();
        assert!((j - (E + 4.0 - 1.0 / E)).abs() < 1e-13);
        assert_eq!(j1, j / 2.0);
        let (j, _) = j_factor(2.0, 1.0).unwrap();
        assert!((j - (8.0 * 2f64.ln() - 2.5)).abs() < 1e-13);
        assert!(j_factor(0.5, 1.0).is_err());
    }

    #[test]
    fn classification_examples() {
        let th = LayerThresholds::default();
        let q = |x, eta, eps| {
            classify_point(PhysPoint { x, eta }, ModelParams::new(1.0, eps).unwrap(), &th)
                .unwrap()
                .region
        };
        // With the default omega cutoff these points sit inside the
        // transition band at eps = 1e-3; they leave it at eps = 1e-6.
        assert_eq!(q(0.5, 2.0, 1e-3), Region::Transition);
        assert_eq!(q(0.1, 2.0, 1e-3), Region::Transition);
        assert_eq!(q(0.5, 2.0, 1e-6), Region::RegionI);
        assert_eq!(q(0.1, 2.0, 1e-6), Region::RegionII);
        assert_eq!(q(0.0, 1.0, 1e-3), Region::Corner);
        assert_eq!(q(0.0, 1.0, 0.5), Region::Corner);
        assert_eq!(q(1e-3, 0.0, 1e-3), Region::SmallX);
        assert_eq!(q(1e-3, 3.0, 1e-3), Region::InnerInner);
        assert_eq!(q(5e-2, 3.0, 1e-3), Region::Inner);
        assert_eq!(q(1e-3, 2.0, 1e-3), Region::Transition);
        assert_eq!(q(0.5, 0.0, 1e-3), Region::RegionI);
        assert_eq!(q(0.65, -0.97, 1e-3), Region::NearCusp);
        assert!(classify_point(PhysPoint { x: -1.0, eta: 0.0 }, ModelParams::new(1.0, 1e-3).unwrap(), &th).is_err());
    }

    #[test]
    fn scaled_coordinates_are_exact() {
        let p = PhysPoint { x: 0.3, eta: 1.7 };
        let params = ModelParams::new(2.0, 1e-3).unwrap();
        let c = ScaledCoords::of(p, params);
        assert!((c.v / 300.0 - 1.0).abs() < 1e-14);
        assert!((c.mu / 30.0 - 1.0).abs() < 1e-14);
        assert!((c.gamma - 0.7 / 0.1).abs() < 1e-12);
        assert!((c.omega.unwrap() - (0.3 - x0_boundary(1.7).unwrap()) / 0.1).abs() < 1e-12);
    }

    #[test]
    fn c_is_derived() {
        let p = ModelParams::new(1.0, 0.01).unwrap();
        assert!((p.c() - 10.0).abs() < 1e-12);
        assert!(ModelParams::new(0.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, -0.1).is_err());
    }
}
