//! CSV + JSON persistence of Pekar solutions.
//!
//! The CSV carries one row per grid node with columns
//! `r, psi, phi, b, laplace_log_psi`, written with 17 significant digits so
//! that every value reads back bit-for-bit. The JSON header carries the grid
//! parameters and the energy split.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{drift_field, hartree_potential, laplace_log_psi, PekarSolution, WaveFunction};
use crate::radial::{RadialGrid, Spacing};
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 5] = ["r", "psi", "phi", "b", "laplace_log_psi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionHeader {
    pub r_max: f64,
    pub n_points: usize,
    pub spacing: Spacing,
    pub coulomb: f64,
    pub kinetic: f64,
    pub g: f64,
    pub mu: f64,
    pub residual: f64,
    pub iterations: usize,
    pub virial_defect: f64,
}

impl SolutionHeader {
    pub fn of(sol: &PekarSolution) -> Self {
        let grid = sol.psi.grid();
        Self {
            r_max: grid.r_max(),
            n_points: grid.len(),
            spacing: grid.spacing(),
            coulomb: sol.coulomb,
            kinetic: sol.kinetic,
            g: sol.g,
            mu: sol.mu,
            residual: sol.residual,
            iterations: sol.iterations,
            virial_defect: sol.virial_defect(),
        }
    }
}

pub fn write_wave_csv(path: &Path, psi: &WaveFunction) -> Result<()> {
    let phi = hartree_potential(psi);
    let b = drift_field(psi).map(|f| f.into_values()).unwrap_or_else(|_| vec![f64::NAN; psi.values().len()]);
    let lap = laplace_log_psi(psi).map(|f| f.into_values()).unwrap_or_else(|_| vec![f64::NAN; psi.values().len()]);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for i in 0..psi.values().len() {
        let row = [psi.grid().nodes()[i], psi.values()[i], phi.values()[i], b[i], lap[i]];
        w.write_record(row.iter().map(|x| format!("{x:.16e}"))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `r` and `psi` columns back; the grid is recovered from `r`.
pub fn read_wave_csv(path: &Path) -> Result<WaveFunction> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = rd.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Parse(format!("missing column {name}")))
    };
    let (ir, ip) = (col("r")?, col("psi")?);
    let mut r = Vec::new();
    let mut psi = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("bad value in row {}", line + 2)))
        };
        r.push(parse(ir)?);
        psi.push(parse(ip)?);
    }
    let grid = Arc::new(infer_grid(&r)?);
    WaveFunction::from_normalized_values(grid, psi)
}

fn infer_grid(r: &[f64]) -> Result<RadialGrid> {
    let n = r.len();
    if n < 8 {
        return Err(Error::Parse(format!("only {n} grid rows")));
    }
    let r_max = r[n - 1];
    if let Ok(g) = RadialGrid::uniform(r_max, n) {
        if g.nodes() == r {
            return Ok(g);
        }
    }
    if let Ok(g) = RadialGrid::geometric(r_max, n, r[0]) {
        if g.nodes() == r {
            return Ok(g);
        }
    }
    Err(Error::Parse("grid column matches neither a uniform nor a geometric grid".into()))
}

pub fn write_solution(csv_path: &Path, json_path: &Path, sol: &PekarSolution) -> Result<()> {
    write_wave_csv(csv_path, &sol.psi)?;
    std::fs::write(json_path, serde_json::to_string_pretty(&SolutionHeader::of(sol))?)?;
    Ok(())
}

pub fn read_solution(csv_path: &Path, json_path: &Path) -> Result<PekarSolution> {
    let header: SolutionHeader = serde_json::from_str(&std::fs::read_to_string(json_path)?)?;
    let psi = read_wave_csv(csv_path)?;
    let grid = psi.grid();
    if grid.len() != header.n_points || grid.r_max() != header.r_max || grid.spacing() != header.spacing {
        return Err(Error::Parse("CSV grid disagrees with the JSON header".into()));
    }
    Ok(PekarSolution {
        psi,
        coulomb: header.coulomb,
        kinetic: header.kinetic,
        g: header.g,
        mu: header.mu,
        residual: header.residual,
        iterations: header.iterations,
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pekar::gaussian;

    #[test]
    fn wave_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psi.csv");
        for grid in [RadialGrid::uniform(20.0, 2000).unwrap(), RadialGrid::geometric(20.0, 500, 1e-3).unwrap()] {
            let psi = gaussian(Arc::new(grid), 0.31).unwrap();
            write_wave_csv(&path, &psi).unwrap();
            let back = read_wave_csv(&path).unwrap();
            assert_eq!(back.grid().nodes(), psi.grid().nodes());
            assert_eq!(back.values(), psi.values());
            write_wave_csv(&path, &back).unwrap();
            let again = read_wave_csv(&path).unwrap();
            assert_eq!(again.values(), psi.values());
        }
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "r,psi\n0.1,abc\n").unwrap();
        assert!(matches!(read_wave_csv(&path), Err(Error::Parse(_))));
        std::fs::write(&path, "x,y\n").unwrap();
        assert!(matches!(read_wave_csv(&path), Err(Error::Parse(_))));
    }
}
