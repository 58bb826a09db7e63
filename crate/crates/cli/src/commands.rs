//! Command implementations. Each returns the process exit status.

use std::path::{Path, PathBuf};

use mmq_core::caustics::{caustic_curve, find_cusp, find_eta_star, CausticBranch};
use mmq_core::eval::LayerEval;
use mmq_core::kernels::BromwichSpec;
use mmq_core::layers::{eval_composite, eval_layer};
use mmq_core::marginals::{m_of_x, MarginalSample};
use mmq_core::model::{classify_point, LayerThresholds, ModelParams, PhysPoint, Region, ScaledCoords};
use mmq_core::region1::{ray1_forward, ray_alive};
use mmq_core::region2::ray2_forward;
use mmq_core::verify::{run_suite, CheckReport, Suite, SuiteConfig};
use mmq_fd::compare::{oracle_report, CompareSpec};
use mmq_fd::export::write_csv;
use mmq_fd::{check_oracle, oracle_marginal_x, GridSpec, Scheme};
use clap::ValueEnum;
use serde_json::{json, Value};

use crate::cli::*;
use crate::error::{CliError, Result};
use crate::output::{emit_to, json as render_json, num, write_atomic, Table};

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

fn thresholds(t: &Thresholds) -> LayerThresholds {
    let d = LayerThresholds::default();
    LayerThresholds {
        corner_mu: t.corner_mu.unwrap_or(d.corner_mu),
        corner_gamma: t.corner_gamma.unwrap_or(d.corner_gamma),
        eta_band: t.eta_band.unwrap_or(d.eta_band),
        transition_omega: t.transition_omega.unwrap_or(d.transition_omega),
        inner_v: t.inner_v.unwrap_or(d.inner_v),
        inner_mu: t.inner_mu.unwrap_or(d.inner_mu),
        cusp_radius: t.cusp_radius.unwrap_or(d.cusp_radius),
    }
}

fn contour(c: &Contour) -> Result<BromwichSpec> {
    let d = BromwichSpec::default();
    Ok(BromwichSpec::new(
        d.re_offset,
        c.bromwich_half_length.unwrap_or(d.half_length),
        c.bromwich_nodes.unwrap_or(d.n_nodes),
        d.mode,
    )?)
}

fn version() -> Value {
    json!(format!("mmq {}", env!("CARGO_PKG_VERSION")))
}

/// Writes the data and, for file output, a `.meta.json` sidecar.
fn deliver(out: Option<&Path>, body: &str, meta: &Value) -> Result<()> {
    emit_to(out, body)?;
    if let Some(p) = out {
        let mut side = p.as_os_str().to_owned();
        side.push(".meta.json");
        write_atomic(Path::new(&side), &render_json(meta))?;
    }
    Ok(())
}

fn coords_json(c: &ScaledCoords) -> Value {
    json!({"v": c.v, "mu": c.mu, "gamma": c.gamma, "omega": c.omega})
}

fn raw_value(log10: f64) -> Option<f64> {
    let v = 10f64.powf(log10);
    (v.is_finite() && v > 0.0 && v >= f64::MIN_POSITIVE).then_some(v)
}

fn eval_record(e: &LayerEval, raw: bool, config: Value) -> Value {
    let mut rec = json!({
        "tag": e.tag.region.name(),
        "coords": coords_json(&e.tag.coords),
        "nu": e.nu,
        "phase_1": e.phase_1,
        "phase_13": e.phase_13,
        "phase_0": e.phase_0,
        "amplitude": e.amplitude,
        "value_log10": e.log10_value(),
        "diagnostics": e.diagnostics,
        "config": config,
    });
    if raw {
        rec["value"] = json!(raw_value(e.log10_value()));
    }
    rec
}

pub fn eval(a: &EvalArgs) -> Result<i32> {
    let params = ModelParams::new(a.d, a.eps)?;
    let p = PhysPoint::new(a.x, a.eta)?;
    let th = thresholds(&a.thresholds);
    let spec = contour(&a.contour)?;
    let e = if a.layer == "auto" {
        eval_composite(p, params, &th, &spec)?
    } else {
        let Some(r) = Region::from_name(&a.layer) else {
            return usage(format!("unknown layer '{}'", a.layer));
        };
        eval_layer(r, p, params, &spec)?
    };
    let config = json!({
        "x": a.x, "eta": a.eta, "eps": a.eps, "D": a.d, "layer": a.layer,
        "thresholds": th, "bromwich": spec, "version": version(),
    });
    emit_to(a.out.as_deref(), &render_json(&eval_record(&e, a.raw, config)))?;
    Ok(0)
}

fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

pub fn grid(a: &GridArgs) -> Result<i32> {
    let params = ModelParams::new(a.d, a.eps)?;
    let th = thresholds(&a.thresholds);
    let spec = contour(&a.contour)?;
    if a.nx == 0 || a.neta == 0 || a.x_min < 0.0 || a.x_max < a.x_min || a.eta_max < a.eta_min {
        return usage("need nx, neta >= 1, 0 <= x-min <= x-max and eta-min <= eta-max");
    }
    let config = json!({
        "eps": a.eps, "D": a.d, "x_min": a.x_min, "x_max": a.x_max, "nx": a.nx,
        "eta_min": a.eta_min, "eta_max": a.eta_max, "neta": a.neta,
        "thresholds": th, "bromwich": spec, "version": version(),
    });
    let mut header = vec!["x", "eta", "region", "log10_F", "status"];
    if a.raw {
        header.push("F");
    }
    let mut table = Table::new(&header);
    let mut records = Vec::new();
    for &x in &lattice(a.x_min, a.x_max, a.nx) {
        for &eta in &lattice(a.eta_min, a.eta_max, a.neta) {
            let p = PhysPoint::new(x, eta)?;
            let region = classify_point(p, params, &th).map(|t| t.region.name()).unwrap_or("none");
            let (lg, status) = match eval_composite(p, params, &th, &spec) {
                Ok(e) => (e.log10_value(), "ok".to_string()),
                Err(err) => (f64::NAN, err.to_string()),
            };
            let mut row = vec![num(x), num(eta), region.to_string(), num(lg), status.clone()];
            if a.raw {
                row.push(num(raw_value(lg).unwrap_or(f64::NAN)));
            }
            table.push(row);
            records.push(json!({"x": x, "eta": eta, "region": region, "log10_F": lg, "status": status}));
        }
    }
    match a.format {
        Format::Csv => deliver(a.out.as_deref(), &table.render()?, &config)?,
        Format::Json => emit_to(a.out.as_deref(), &render_json(&json!({"config": config, "points": records})))?,
    }
    Ok(0)
}

pub fn rays(a: &RaysArgs) -> Result<i32> {
    ModelParams::new(a.d, 1.0)?;
    if a.n < 2 || !(a.t_max > 0.0) {
        return usage("need n >= 2 and t-max > 0");
    }
    let header = ["region", "start", "time", "x", "eta", "phase", "phase_x", "phase_eta", "jac", "amp"];
    let mut table = Table::new(&header);
    for &s in &a.starts {
        for k in 0..a.n {
            let t = a.t_max * k as f64 / (a.n - 1) as f64;
            let row = match a.region {
                RayFamily::One => {
                    if s > 1.0 {
                        return usage(format!("region 1 rays need s <= 1, got {s}"));
                    }
                    if !ray_alive(t, s, a.d) {
                        break;
                    }
                    let r = ray1_forward(t, s, a.d);
                    [1.0, s, t, r.x, r.eta, r.psi, r.psi_x, r.psi_eta, r.jac, r.amp.unwrap_or(f64::NAN)]
                }
                RayFamily::Two => {
                    if !(s > 1.0) {
                        return usage(format!("region 2 rays need sigma > 1, got {s}"));
                    }
                    let r = ray2_forward(t, s, a.d)?;
                    [2.0, s, t, r.x, r.eta, r.phi, r.phi_x, r.phi_eta, r.jac_tilde, r.amp.unwrap_or(f64::NAN)]
                }
            };
            let mut cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
            cells[0] = if row[0] == 1.0 { "1".into() } else { "2".into() };
            table.push(cells);
        }
    }
    let config = json!({"D": a.d, "region": format!("{:?}", a.region), "starts": a.starts, "t_max": a.t_max, "n": a.n, "version": version()});
    match a.format {
        Format::Csv => deliver(a.out.as_deref(), &table.render()?, &config)?,
        Format::Json => {
            let csv = table.render()?;
            let rows: Vec<&str> = csv.lines().skip(1).collect();
            emit_to(a.out.as_deref(), &render_json(&json!({"config": config, "header": header, "rows": rows})))?
        }
    }
    Ok(0)
}

pub fn caustics(a: &CausticsArgs) -> Result<i32> {
    ModelParams::new(a.d, 1.0)?;
    if a.n < 2 {
        return usage("need n >= 2");
    }
    std::fs::create_dir_all(&a.out_dir)?;
    let mut files: Vec<PathBuf> = Vec::new();
    for (branch, name) in [(CausticBranch::Plus, "caustic_plus.csv"), (CausticBranch::Minus, "caustic_minus.csv")] {
        let c = caustic_curve(branch, a.d, a.n, a.x_cap)?;
        let mut t = Table::new(&["t", "s0", "x_ca", "eta_ca"]);
        for s in &c.samples {
            t.push_nums(&[s.t, s.s0, s.x_ca, s.eta_ca]);
        }
        let p = a.out_dir.join(name);
        write_atomic(&p, &t.render()?)?;
        files.push(p);
    }
    let cusp = find_cusp(a.d)?;
    let (t_star, eta_star) = find_eta_star(a.d)?;
    let rec = json!({
        "D": a.d,
        "cusp": {"t": cusp.t, "s": cusp.s, "x_c": cusp.x, "eta_c": cusp.eta, "A_c": cusp.slope},
        "eta_star": eta_star,
        "t_star": t_star,
        "config": {"n": a.n, "x_cap": a.x_cap, "version": version()},
    });
    let p = a.out_dir.join("cusp.json");
    write_atomic(&p, &render_json(&rec))?;
    files.push(p);
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(0)
}

fn marginal_row(s: &MarginalSample, raw: bool) -> Vec<f64> {
    let l = std::f64::consts::LN_10;
    let mut r = vec![s.x, s.e, s.psi1, s.delta, s.ln_m / l, s.ln_m_small / l, s.ln_m_large / l];
    if raw {
        r.push(raw_value(s.ln_m / l).unwrap_or(f64::NAN));
    }
    r
}

pub fn marginal(a: &MarginalArgs) -> Result<i32> {
    let params = ModelParams::new(a.d, a.eps)?;
    if a.n == 0 || !(a.x_max > 0.0) {
        return usage("need n >= 1 and x-max > 0");
    }
    let mut header = vec!["x", "E", "psi1", "delta", "M_log10", "M_smallx_log10", "M_largex_log10"];
    if a.raw {
        header.push("M");
    }
    let mut t = Table::new(&header);
    for k in 0..=a.n {
        let x = a.x_max * k as f64 / a.n as f64;
        t.push_nums(&marginal_row(&m_of_x(x, params)?, a.raw));
    }
    let config = json!({"eps": a.eps, "D": a.d, "x_max": a.x_max, "n": a.n, "version": version()});
    match a.format {
        Format::Csv => deliver(a.out.as_deref(), &t.render()?, &config)?,
        Format::Json => {
            let csv = t.render()?;
            let rows: Vec<Vec<f64>> = csv
                .lines()
                .skip(1)
                .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
                .collect();
            emit_to(a.out.as_deref(), &render_json(&json!({"config": config, "header": header, "rows": rows})))?
        }
    }
    Ok(0)
}

fn report_text(r: &CheckReport) -> String {
    let mut s = format!("suite {}: {}\n", r.suite, if r.passed { "PASS" } else { "FAIL" });
    for l in &r.lines {
        let tol = if l.tol.is_nan() { String::new() } else { format!(" (tol {:.3e})", l.tol) };
        s.push_str(&format!("  {} {}: {:.6e}{}\n", if l.pass { "ok  " } else { "FAIL" }, l.label, l.value, tol));
    }
    s
}

pub fn run_check(a: &CheckArgs) -> Result<CheckReport> {
    let spec = contour(&a.contour)?;
    if let Some(d) = a.d {
        ModelParams::new(d, 1.0)?;
    }
    let mut cfg = SuiteConfig { n_samples: a.n, seed: a.seed, spec, ..SuiteConfig::default() };
    if let Some(d) = a.d {
        cfg.ds = vec![d];
    }
    let one_d = a.d.unwrap_or(1.0);
    let eta_cfg = |cfg: &SuiteConfig| {
        let eps = a.eps.unwrap_or(1e-3);
        SuiteConfig { ds: vec![one_d], eta_eps: (eps, a.eps_fine.unwrap_or(eps / 10.0)), ..cfg.clone() }
    };
    let oracle = || -> CheckReport {
        let eps = a.eps.unwrap_or(0.1);
        match check_oracle(one_d, eps, a.eps_fine.unwrap_or(eps / 2.0)) {
            Ok(r) => r,
            Err(e) => {
                let mut r = CheckReport::new("oracle");
                r.flag(format!("D={one_d}: {e}"), f64::NAN, false);
                r
            }
        }
    };
    let rep = match a.suite {
        SuiteName::Oracle => oracle(),
        SuiteName::EtaMarginal => run_suite(Suite::EtaMarginal, &eta_cfg(&cfg)),
        SuiteName::All => {
            let mut all = CheckReport::new("all");
            for s in Suite::ALL {
                let c = if s == Suite::EtaMarginal { eta_cfg(&cfg) } else { cfg.clone() };
                all.merge(run_suite(s, &c));
            }
            all.merge(oracle());
            all
        }
        other => {
            let s = Suite::from_name(other.to_possible_value().expect("named").get_name()).expect("suite names agree");
            run_suite(s, &cfg)
        }
    };
    Ok(rep)
}

pub fn check(a: &CheckArgs) -> Result<i32> {
    let rep = run_check(a)?;
    let js = render_json(&serde_json::to_value(&rep).expect("report is plain data"));
    match a.format {
        ReportFormat::Text => emit_to(None, &report_text(&rep))?,
        ReportFormat::Json => emit_to(None, &js)?,
    }
    if let Some(p) = &a.json {
        write_atomic(p, &js)?;
    }
    if rep.passed {
        Ok(0)
    } else {
        for l in rep.failures() {
            eprintln!("failed: {}", l.label);
        }
        Ok(1)
    }
}

pub fn oracle(a: &OracleArgs) -> Result<i32> {
    let Some(scheme) = Scheme::from_name(&a.scheme) else {
        return usage(format!("unknown scheme '{}' (sg, upwind, centered)", a.scheme));
    };
    let spec = GridSpec {
        x_max: a.x_max,
        eta_min: a.eta_min,
        eta_max: a.eta_max,
        n_x: a.nx,
        n_eta: a.neta,
        eps: a.eps,
        d: a.d,
        scheme,
    };
    let (grid, rep) = oracle_report(&spec, &CompareSpec::default(), a.truncation)?;
    if let Some(p) = &a.grid_out {
        let mut buf = Vec::new();
        write_csv(&grid, &mut buf)?;
        write_atomic(p, std::str::from_utf8(&buf).expect("csv is utf-8"))?;
    }
    if let Some(p) = &a.marginal_out {
        let params = ModelParams::new(a.d, a.eps)?;
        let mut t = Table::new(&["x", "M_grid", "M_asymptotic"]);
        for (x, m) in oracle_marginal_x(&grid) {
            t.push_nums(&[x, m, m_of_x(x, params)?.m()]);
        }
        write_atomic(p, &t.render()?)?;
    }
    let mut v = serde_json::to_value(&rep).expect("report is plain data");
    v["version"] = version();
    emit_to(a.out.as_deref(), &render_json(&v))?;
    Ok(0)
}

pub fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Eval(a) => eval(a),
        Command::Grid(a) => grid(a),
        Command::Rays(a) => rays(a),
        Command::Caustics(a) => caustics(a),
        Command::Marginal(a) => marginal(a),
        Command::Check(a) => check(a),
        Command::Oracle(a) => oracle(a),
    }
}
