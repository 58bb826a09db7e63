//! CSV and JSON output of a grid.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::grid::GridSpec;
use crate::oracle::OracleGrid;

/// `x,eta,F` rows in `x`-major order, 17 significant digits.
pub fn write_csv<W: Write>(grid: &OracleGrid, mut w: W) -> Result<()> {
    let g = &grid.spec;
    writeln!(w, "x,eta,F")?;
    for i in 0..g.n_x {
        for k in 0..g.n_eta {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", g.x_center(i), g.eta_center(k), grid.at(i, k))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Metadata<'a> {
    spec: &'a GridSpec,
    scheme: &'static str,
    robin: &'static str,
    residual_interior: f64,
    residual_boundary: f64,
    normalization: f64,
    iterations: usize,
    mass: f64,
}

pub fn metadata_json(grid: &OracleGrid) -> serde_json::Value {
    let m = Metadata {
        spec: &grid.spec,
        scheme: grid.spec.scheme.name(),
        robin: "zero total flux on the x = 0 face",
        residual_interior: grid.residual_interior,
        residual_boundary: grid.residual_boundary,
        normalization: grid.normalization,
        iterations: grid.iterations,
        mass: grid.mass(),
    };
    serde_json::to_value(m).expect("metadata is plain data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::solve_fd;

    #[test]
    fn csv_has_header_and_one_row_per_cell() {
        let spec = GridSpec { n_x: 5, n_eta: 6, ..GridSpec::standard(0.5, 1.0) };
        let g = solve_fd(&spec).unwrap();
        let mut buf = Vec::new();
        write_csv(&g, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "x,eta,F");
        assert_eq!(lines.len(), 31);
        let v: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(v, g.at(0, 0));
        let meta = metadata_json(&g);
        assert_eq!(meta["scheme"], "sg");
    }
}
