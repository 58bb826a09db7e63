//! Grid solution against the asymptotic formulas.

use mmq_core::kernels::BromwichSpec;
use mmq_core::layers::eval_composite;
use mmq_core::marginals::m_of_x;
use mmq_core::model::{LayerThresholds, ModelParams, PhysPoint};
use mmq_core::verify::CheckReport;
use serde::Serialize;

use crate::error::Result;
use crate::grid::GridSpec;
use crate::oracle::{eta_gaussian_l1, oracle_marginal_x, solve_fd, OracleGrid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareSpec {
    /// `M(x)` is compared on cell centres in `[0, m_x_max]`.
    pub m_x_max: f64,
    /// Field window `[x_lo, x_hi] x [eta_lo, eta_hi]` and sample counts.
    pub window: [f64; 4],
    pub samples: (usize, usize),
    /// Grid values below this fraction of the maximum are skipped.
    pub floor: f64,
    pub thresholds: LayerThresholds,
    pub bromwich: BromwichSpec,
}

impl Default for CompareSpec {
    fn default() -> Self {
        Self {
            m_x_max: 1.0,
            window: [0.05, 1.5, -1.0, 2.0],
            samples: (12, 13),
            floor: 1e-10,
            thresholds: LayerThresholds::default(),
            bromwich: BromwichSpec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub eps: f64,
    pub d: f64,
    /// `|M_grid / M - 1|` over the `M` window.
    pub m_median_rel: f64,
    pub m_max_rel: f64,
    pub m_points: usize,
    /// `sum |G - N(0, eps)| h_eta`.
    pub eta_l1: f64,
    /// `M_grid(0) eps D`, extrapolated linearly from the first two cells.
    pub m0_scaled: f64,
    /// Slope of `ln M_grid` between `x = 1` and `x = 2`, times `(1 + D) eps`
    /// and negated, so that the large-`x` rate gives 1.
    pub decay_scaled: Option<f64>,
    /// `|ln F_grid - ln F| / max(1, |ln F|)` over the field window.
    pub field_median_log_gap: f64,
    pub field_max_log_gap: f64,
    pub field_points: usize,
    /// Window points where no expansion applies or the grid value is
    /// below the floor.
    pub field_skipped: usize,
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn lerp_curve(curve: &[(f64, f64)], x: f64) -> Option<f64> {
    let j = curve.windows(2).position(|w| w[0].0 <= x && x <= w[1].0)?;
    let ((x0, y0), (x1, y1)) = (curve[j], curve[j + 1]);
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

pub fn compare_to_asymptotics(grid: &OracleGrid, cs: &CompareSpec) -> Result<Comparison> {
    let g = &grid.spec;
    let params = ModelParams::new(g.d, g.eps)?;
    let curve = oracle_marginal_x(grid);

    let mut mrel = Vec::new();
    for &(x, m) in curve.iter().filter(|p| p.0 <= cs.m_x_max) {
        let ma = m_of_x(x, params)?.m();
        mrel.push((m / ma - 1.0).abs());
    }
    let m_points = mrel.len();
    let m_max_rel = mrel.iter().cloned().fold(0.0, f64::max);
    let m_median_rel = median(&mut mrel);

    let (x0, m0) = curve[0];
    let (x1, m1) = curve[1];
    let m0_scaled = (m0 - x0 * (m1 - m0) / (x1 - x0)) * g.eps * g.d;

    let decay_scaled = match (lerp_curve(&curve, 1.0), lerp_curve(&curve, 2.0)) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some(-(b.ln() - a.ln()) * (1.0 + g.d) * g.eps),
        _ => None,
    };

    let fmax = grid.values.iter().cloned().fold(0.0, f64::max);
    let [xl, xh, el, eh] = cs.window;
    let (nx, ne) = cs.samples;
    let mut gaps = Vec::new();
    let mut skipped = 0;
    for a in 0..nx {
        let x = xl + (xh - xl) * a as f64 / (nx.max(2) - 1) as f64;
        for b in 0..ne {
            let eta = el + (eh - el) * b as f64 / (ne.max(2) - 1) as f64;
            let fg = match grid.interpolate(x, eta) {
                Some(v) if v > cs.floor * fmax => v,
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            let asy = PhysPoint::new(x, eta)
                .and_then(|p| eval_composite(p, params, &cs.thresholds, &cs.bromwich))
                .map(|e| e.ln_value());
            match asy {
                Ok(la) if la.is_finite() => gaps.push((fg.ln() - la).abs() / la.abs().max(1.0)),
                _ => skipped += 1,
            }
        }
    }
    let field_points = gaps.len();
    let field_max_log_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let field_median_log_gap = median(&mut gaps);

    Ok(Comparison {
        eps: g.eps,
        d: g.d,
        m_median_rel,
        m_max_rel,
        m_points,
        eta_l1: eta_gaussian_l1(grid),
        m0_scaled,
        decay_scaled,
        field_median_log_gap,
        field_max_log_gap,
        field_points,
        field_skipped: skipped,
    })
}

/// Largest relative change of `M_grid` on `[0, x_max_cmp]` when the box is
/// enlarged by `factor` at the same spacing.
pub fn truncation_sensitivity(base: &OracleGrid, factor: f64, x_max_cmp: f64) -> Result<f64> {
    let big = solve_fd(&base.spec.enlarged(factor))?;
    Ok(marginal_change(&oracle_marginal_x(base), &oracle_marginal_x(&big), x_max_cmp))
}

fn marginal_change(a: &[(f64, f64)], b: &[(f64, f64)], x_max: f64) -> f64 {
    a.iter()
        .filter(|p| p.0 <= x_max)
        .filter_map(|&(x, m)| lerp_curve(b, x).map(|mb| (mb / m - 1.0).abs()))
        .fold(0.0, f64::max)
}

/// Everything the oracle reports for one grid.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub spec: GridSpec,
    pub residual_interior: f64,
    pub residual_boundary: f64,
    pub normalization: f64,
    pub iterations: usize,
    pub comparison: Comparison,
    pub truncation_change: Option<f64>,
}

pub fn oracle_report(spec: &GridSpec, cs: &CompareSpec, truncation: bool) -> Result<(OracleGrid, OracleReport)> {
    let grid = solve_fd(spec)?;
    let comparison = compare_to_asymptotics(&grid, cs)?;
    let truncation_change = if truncation { Some(truncation_sensitivity(&grid, 1.25, cs.m_x_max)?) } else { None };
    let rep = OracleReport {
        spec: *spec,
        residual_interior: grid.residual_interior,
        residual_boundary: grid.residual_boundary,
        normalization: grid.normalization,
        iterations: grid.iterations,
        comparison,
        truncation_change,
    };
    Ok((grid, rep))
}

/// Tolerances of the end-to-end comparison.
pub const M_MEDIAN_TOL: f64 = 0.2;
pub const ETA_L1_TOL: f64 = 0.1;

/// Standard-box solves at `eps` and `eps_fine`: `M(x)` median error and
/// `eta`-marginal L1 error within tolerance at `eps`, both smaller at
/// `eps_fine`.
pub fn check_oracle(d: f64, eps: f64, eps_fine: f64) -> Result<CheckReport> {
    let cs = CompareSpec { samples: (6, 7), ..CompareSpec::default() };
    let a = compare_to_asymptotics(&solve_fd(&GridSpec::standard(eps, d))?, &cs)?;
    let b = compare_to_asymptotics(&solve_fd(&GridSpec::standard(eps_fine, d))?, &cs)?;
    let mut rep = CheckReport::new("oracle");
    rep.le(format!("D={d} eps={eps} M(x) median relative error on [0, 1]"), a.m_median_rel, M_MEDIAN_TOL);
    rep.le(format!("D={d} eps={eps} eta marginal L1 vs Gaussian"), a.eta_l1, ETA_L1_TOL);
    rep.flag(
        format!("D={d} M(x) median error at eps={eps_fine} below eps={eps} ({:.4})", a.m_median_rel),
        b.m_median_rel,
        b.m_median_rel < a.m_median_rel,
    );
    rep.flag(
        format!("D={d} eta L1 at eps={eps_fine} not above eps={eps} ({:.3e})", a.eta_l1),
        b.eta_l1,
        b.eta_l1 <= a.eta_l1,
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn lerp_inside_and_outside() {
        let c = [(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)];
        assert_eq!(lerp_curve(&c, 0.5), Some(1.0));
        assert_eq!(lerp_curve(&c, 1.5), Some(2.5));
        assert_eq!(lerp_curve(&c, 2.5), None);
    }

    #[test]
    fn coarse_grid_tracks_the_asymptotic_marginal() {
        let spec = GridSpec { n_x: 120, n_eta: 160, ..GridSpec::standard(0.1, 1.0) };
        let grid = solve_fd(&spec).unwrap();
        let cs = CompareSpec { samples: (4, 4), ..CompareSpec::default() };
        let c = compare_to_asymptotics(&grid, &cs).unwrap();
        assert!(c.m_median_rel < 0.3, "{c:?}");
        assert!(c.eta_l1 < 0.1, "{c:?}");
        assert!(c.field_points > 0);
    }
}
