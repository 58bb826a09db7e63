//! The acceptance criteria as one runnable list.

use std::time::Instant;

use mmq_core::airy::airy_root_r0;
use mmq_core::kernels::{wp_kernel, wp_tail_minus, wp_tail_plus, BromwichSpec};
use mmq_core::marginals::{e_of_x, ln_m_large_x, ln_m_small_x, m_mass, m_of_x, x1_of_eta, QuadSpec};
use mmq_core::model::ModelParams;
use mmq_core::region1::ray1_invert;
use mmq_core::region2::{gamma_phase, phi0};
use mmq_core::verify::{
    brute_force_count, caustic_region_probe, check_eta_marginal, check_jacobians, run_suite, CheckReport, Suite,
    SuiteConfig,
};
use mmq_core::Result;

pub const DS: [f64; 3] = [0.5, 1.0, 2.0];

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub run: fn() -> CheckReport,
}

pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub report: CheckReport,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {} ({:.1}s)",
            if self.report.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds
        )
    }
}

fn guarded(name: &str, f: impl FnOnce(&mut CheckReport) -> Result<()>) -> CheckReport {
    let mut rep = CheckReport::new(name);
    if let Err(e) = f(&mut rep) {
        rep.error("aborted", &e);
    }
    rep
}

fn suite(s: Suite) -> CheckReport {
    run_suite(s, &SuiteConfig::default())
}

pub fn constants() -> CheckReport {
    guarded("constants", |rep| {
        let r0 = airy_root_r0();
        rep.le(format!("r0 = {r0:.10}, |r0 + 2.33810741|"), (r0 + 2.338_107_41).abs(), 5e-9);
        let wp0 = wp_kernel(0.0, &BromwichSpec::default())?;
        rep.le("|wp(0) - 2^(-1/3)|", (wp0 - 2f64.powf(-1.0 / 3.0)).abs(), 1e-8);
        for d in DS {
            rep.le(format!("D={d} |Phi0(1) + 1/2|"), (phi0(1.0, d) + 0.5).abs(), 0.0);
            rep.le(format!("D={d} |Gamma(1)|"), gamma_phase(1.0, d)?.abs(), 0.0);
        }
        Ok(())
    })
}

pub fn eikonal_transport() -> CheckReport {
    let mut rep = CheckReport::new("eikonal-transport");
    rep.merge(suite(Suite::Eikonal));
    rep.merge(suite(Suite::Transport));
    rep
}

pub fn inversion() -> CheckReport {
    let mut rep = CheckReport::new("inversion");
    let cfg = SuiteConfig::default();
    rep.merge(guarded("roundtrip", |r| {
        for d in DS {
            for (reg, lbl) in [(mmq_core::verify::RayRegion::I, "I"), (mmq_core::verify::RayRegion::II, "II")] {
                let st = mmq_core::verify::check_roundtrip(reg, cfg.n_samples, d, cfg.seed)?;
                r.le(format!("region {lbl} D={d} max relative error over {}", st.n), st.max, 1e-8);
            }
        }
        Ok(())
    }));
    rep.merge(guarded("caustic-region", |r| {
        for d in DS {
            let (x, eta) = caustic_region_probe(d)?;
            let inv = ray1_invert(x, eta, d, None)?.len();
            let brute = brute_force_count(x, eta, d, 10.0 + x + eta.abs(), 400_000);
            r.flag(format!("D={d} ({x:.5}, {eta:.5}) branches by inversion"), inv as f64, inv == 3);
            r.flag(format!("D={d} ({x:.5}, {eta:.5}) branches by brute-force scan"), brute as f64, brute == 3);
        }
        Ok(())
    }));
    rep
}

pub fn jacobians() -> CheckReport {
    guarded("jacobians", |rep| {
        let cfg = SuiteConfig::default();
        for d in DS {
            let (j1, j2, j0) = check_jacobians(cfg.n_samples, d, cfg.seed)?;
            rep.le(format!("D={d} region I closed form vs differences"), j1.max, 1e-6);
            rep.le(format!("D={d} region II closed form vs differences"), j2.max, 1e-6);
            rep.le(format!("D={d} J(0, s)/(1 - s) - 1"), j0, 1e-13);
        }
        Ok(())
    })
}

pub fn caustic_structure() -> CheckReport {
    suite(Suite::CausticBranches)
}

pub fn lambda_identity() -> CheckReport {
    suite(Suite::Lambda)
}

pub fn wp_tails() -> CheckReport {
    guarded("wp-tails", |rep| {
        let spec = BromwichSpec::default();
        for o in [8.0, -8.0] {
            let v = wp_kernel(o, &spec)?;
            let a = if o > 0.0 { wp_tail_plus(o) } else { wp_tail_minus(o) };
            rep.le(format!("Omega={o}: wp {v:.6e} vs tail {a:.6e}"), (v / a - 1.0).abs(), 0.05);
        }
        Ok(())
    })
}

pub fn matching() -> CheckReport {
    suite(Suite::Matching)
}

pub fn eta_marginal() -> CheckReport {
    guarded("eta-marginal", |rep| {
        rep.merge(check_eta_marginal(1.0, 1e-3, 1e-4, &QuadSpec::default())?);
        Ok(())
    })
}

pub fn x_marginal() -> CheckReport {
    guarded("x-marginal", |rep| {
        let p = ModelParams::new(1.0, 1e-2)?;
        let mass = m_mass(p)?;
        rep.le(format!("eps=1e-2 D=1 mass {mass:.6}, |mass - 1|"), (mass - 1.0).abs(), 0.05);
        let (mut small, mut large) = (0.0f64, 0.0f64);
        for k in 0..=50 {
            let x = 0.05 * k as f64 / 50.0;
            small = small.max((ln_m_small_x(x, p) - m_of_x(x, p)?.ln_m).exp_m1().abs());
        }
        // The large-x form drops a term of relative size e^{-x}/eps.
        let x_lo = (1.0 / p.eps).ln() + 3.0;
        for k in 0..=50 {
            let x = x_lo + 3.0 * k as f64 / 50.0;
            let s = m_of_x(x, p)?;
            if !s.asymptotic {
                large = large.max((ln_m_large_x(x, p) - s.ln_m).exp_m1().abs());
            }
        }
        rep.le("small-x form on [0, 0.05], max relative gap", small, 0.02);
        rep.le(format!("large-x form on [{x_lo:.2}, {:.2}], max relative gap", x_lo + 3.0), large, 0.02);
        let mut worst = 0.0f64;
        for d in DS {
            for k in 0..=200 {
                let x = 8.0 * k as f64 / 200.0;
                let e = e_of_x(x, d)?;
                worst = worst.max((x1_of_eta(e, d)? - x).abs() / x.max(1.0));
            }
        }
        rep.le("E/X1 inverse pair, max residual", worst, 1e-10);
        Ok(())
    })
}

pub fn oracle() -> CheckReport {
    match mmq_fd::check_oracle(1.0, 0.1, 0.05) {
        Ok(r) => r,
        Err(e) => {
            let mut r = CheckReport::new("oracle");
            r.flag(format!("solve failed: {e}"), f64::NAN, false);
            r
        }
    }
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, name: "constants", run: constants },
    Criterion { id: 2, name: "eikonal and transport residuals", run: eikonal_transport },
    Criterion { id: 3, name: "inversion round trips and branch counts", run: inversion },
    Criterion { id: 4, name: "Jacobian identities", run: jacobians },
    Criterion { id: 5, name: "caustic structure", run: caustic_structure },
    Criterion { id: 6, name: "Lambda identity", run: lambda_identity },
    Criterion { id: 7, name: "wp tails", run: wp_tails },
    Criterion { id: 8, name: "matching ladder", run: matching },
    Criterion { id: 9, name: "eta marginal", run: eta_marginal },
    Criterion { id: 10, name: "x marginal", run: x_marginal },
    Criterion { id: 11, name: "finite-volume oracle", run: oracle },
];

pub fn run_one(c: &Criterion) -> Outcome {
    let t0 = Instant::now();
    let report = (c.run)();
    Outcome { id: c.id, name: c.name, report, seconds: t0.elapsed().as_secs_f64() }
}
