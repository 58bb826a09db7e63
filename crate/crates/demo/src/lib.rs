//! Thin browser bindings. Each export returns a JSON string so the page
//! needs no generated TypeScript types; the plain functions underneath are
//! what the tests exercise.

use mmq_core::caustics::{caustic_curve, find_cusp, CausticBranch};
use mmq_core::kernels::BromwichSpec;
use mmq_core::layers::eval_composite;
use mmq_core::marginals::m_of_x;
use mmq_core::model::{LayerThresholds, ModelParams, PhysPoint};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const LOG10_E: f64 = std::f64::consts::LOG10_E;

#[derive(Debug, Serialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub log10_m: Vec<f64>,
    pub log10_small: Vec<f64>,
    pub log10_large: Vec<f64>,
}

/// `log10 M(x)` with its two limiting forms on `n` evenly spaced points.
pub fn marginal(d: f64, eps: f64, x_max: f64, n: usize) -> mmq_core::Result<Curve> {
    let params = ModelParams::new(d, eps)?;
    if !(x_max > 0.0) || n < 2 || n > 20_000 {
        return Err(mmq_core::Error::Domain(format!("need x_max > 0 and 2 <= n <= 20000, got {x_max}, {n}")));
    }
    let mut c = Curve { x: Vec::with_capacity(n), log10_m: vec![], log10_small: vec![], log10_large: vec![] };
    for k in 0..n {
        let x = x_max * k as f64 / (n - 1) as f64;
        let s = m_of_x(x, params)?;
        c.x.push(x);
        c.log10_m.push(s.ln_m * LOG10_E);
        c.log10_small.push(s.ln_m_small * LOG10_E);
        c.log10_large.push(s.ln_m_large * LOG10_E);
    }
    Ok(c)
}

#[derive(Debug, Serialize)]
pub struct Point {
    pub region: &'static str,
    pub log10_value: f64,
    pub diagnostics: Vec<String>,
}

/// Composite evaluation at one point with default thresholds and contour.
pub fn point(x: f64, eta: f64, d: f64, eps: f64) -> mmq_core::Result<Point> {
    let params = ModelParams::new(d, eps)?;
    let p = PhysPoint::new(x, eta)?;
    let e = eval_composite(p, params, &LayerThresholds::default(), &BromwichSpec::default())?;
    Ok(Point { region: e.tag.region.name(), log10_value: e.log10_value(), diagnostics: e.diagnostics })
}

#[derive(Debug, Serialize)]
pub struct Branch {
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Caustics {
    pub plus: Branch,
    pub minus: Branch,
    pub cusp: (f64, f64),
}

/// Both caustic branches in the physical plane, clipped at `x_cap`.
pub fn caustics(d: f64, n: usize, x_cap: f64) -> mmq_core::Result<Caustics> {
    let branch = |b| -> mmq_core::Result<Branch> {
        let c = caustic_curve(b, d, n, x_cap)?;
        Ok(Branch {
            x: c.samples.iter().map(|s| s.x_ca).collect(),
            eta: c.samples.iter().map(|s| s.eta_ca).collect(),
        })
    };
    let cusp = find_cusp(d)?;
    Ok(Caustics { plus: branch(CausticBranch::Plus)?, minus: branch(CausticBranch::Minus)?, cusp: (cusp.x, cusp.eta) })
}

fn to_js<T: Serialize>(r: mmq_core::Result<T>) -> Result<String, JsValue> {
    match r {
        Ok(v) => serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())),
        Err(e) => Err(JsValue::from_str(&e.to_string())),
    }
}

#[wasm_bindgen]
pub fn marginal_json(d: f64, eps: f64, x_max: f64, n: usize) -> Result<String, JsValue> {
    to_js(marginal(d, eps, x_max, n))
}

#[wasm_bindgen]
pub fn point_json(x: f64, eta: f64, d: f64, eps: f64) -> Result<String, JsValue> {
    to_js(point(x, eta, d, eps))
}

#[wasm_bindgen]
pub fn caustics_json(d: f64, n: usize, x_cap: f64) -> Result<String, JsValue> {
    to_js(caustics(d, n, x_cap))
}
