//! Run configuration: a TOML file, then `--set key=value` overrides, then
//! validation. Errors point at the offending line of the file when there is
//! one.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use polaron_core::gibbs::{Kernel, KappaQuadrature, PathLattice, SamplerConfig};
use polaron_core::pekar::{InitialGuess, SolverConfig};
use polaron_core::radial::RadialGrid;
use polaron_core::sde::{DiffusionConfig, Source};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub r_max: f64,
    pub n_points: usize,
    /// Geometric spacing starting here; uniform when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_first: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { r_max: 20.0, n_points: 2000, r_first: None }
    }
}

impl GridSection {
    pub fn build(&self) -> polaron_core::Result<Arc<RadialGrid>> {
        let grid = match self.r_first {
            Some(r1) => RadialGrid::geometric(self.r_max, self.n_points, r1)?,
            None => RadialGrid::uniform(self.r_max, self.n_points)?,
        };
        Ok(Arc::new(grid))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    pub kernel: Kernel,
    pub eps: f64,
    /// Half-horizon; `8/eps` (polaron) or 8 (mean field) when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Time steps; derived from `dt` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    pub dt: f64,
    pub eta: f64,
    pub kappa: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self { kernel: Kernel::Polaron, eps: 0.5, horizon: None, n_steps: None, dt: 0.25, eta: 0.1, kappa: 1.0 }
    }
}

impl LatticeSection {
    pub fn build(&self) -> polaron_core::Result<PathLattice> {
        let horizon = self.horizon.unwrap_or(match self.kernel {
            Kernel::Polaron => 8.0 / self.eps,
            Kernel::MeanField => 8.0,
        });
        if !(self.dt > 0.0) {
            return Err(polaron_core::Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        let n_steps = self.n_steps.unwrap_or_else(|| {
            let n = (2.0 * horizon / self.dt).round() as usize;
            n + n % 2
        });
        let lat = match self.kernel {
            Kernel::Polaron => PathLattice::polaron(self.eps, horizon, n_steps, self.eta, self.kappa),
            Kernel::MeanField => PathLattice::mean_field(horizon, n_steps, self.eta, self.kappa),
        };
        lat.validate()?;
        Ok(lat)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateSection {
    /// Gauss–Legendre nodes in `κ`.
    pub nodes: usize,
    /// Explicit trapezoid nodes from 0 to 1, replacing Gauss–Legendre.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_nodes: Option<Vec<f64>>,
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self { nodes: 6, kappa_nodes: None }
    }
}

impl EstimateSection {
    pub fn quadrature(&self) -> polaron_core::Result<KappaQuadrature> {
        match &self.kappa_nodes {
            Some(nodes) => KappaQuadrature::trapezoid(nodes.clone()),
            None if self.nodes == 0 => {
                Err(polaron_core::Error::InvalidParameter("nodes must be at least 1".into()))
            }
            None => Ok(KappaQuadrature::gauss_legendre(self.nodes)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// `pekar` uses the solver output, `ou_test` a Gaussian ψ with exponent
    /// `ou_lambda`, `brownian` drops the drift.
    pub source: Source,
    pub ou_lambda: f64,
    pub lags: Vec<f64>,
    /// Number of paths written to `trajectories.csv`.
    pub trajectory_paths: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_dir: Option<PathBuf>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { source: Source::Pekar, ou_lambda: 1.0, lags: vec![0.5, 1.0, 2.0, 3.0, 5.0], trajectory_paths: 10, solver_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pekar_dir: Option<PathBuf>,
    /// `sample-polaron` output directories, one per `ε`.
    pub polaron_runs: Vec<PathBuf>,
    /// `estimate-g` output directories.
    pub g_runs: Vec<PathBuf>,
    pub level: f64,
    pub n_permutations: usize,
    pub max_per_side: usize,
    pub jackknife_blocks: usize,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            solver_dir: None,
            pekar_dir: None,
            polaron_runs: Vec::new(),
            g_runs: Vec::new(),
            level: 0.01,
            n_permutations: 999,
            max_per_side: 1000,
            jackknife_blocks: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Root seed; replaces the `seed` fields of `sampler` and `diffusion`.
    pub seed: u64,
    pub grid: GridSection,
    pub solver: SolverConfig,
    pub initial: InitialGuess,
    pub lattice: LatticeSection,
    pub sampler: SamplerConfig,
    pub estimate: EstimateSection,
    pub diffusion: DiffusionConfig,
    pub simulate: SimulateSection,
    pub compare: CompareSection,
}

/// The configuration together with the text it came from, for error lines.
pub struct Loaded {
    pub config: RunConfig,
    source: Option<(PathBuf, String)>,
}

impl Loaded {
    pub fn load(path: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<Self, CliError> {
        let source = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::MissingInput(format!("{}: {e}", p.display())))?;
                Some((p.to_path_buf(), text))
            }
            None => None,
        };
        let mut table: toml::Table = match &source {
            Some((p, text)) => {
                // typed parse of the file alone keeps line numbers in the messages
                toml::from_str::<RunConfig>(text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut config = RunConfig::deserialize(toml::Value::Table(table))
            .map_err(|e| CliError::Config(format!("after --set overrides: {e}")))?;
        if let Some(s) = seed {
            config.seed = s;
        }
        config.sampler.seed = config.seed;
        config.diffusion.seed = config.seed;
        Ok(Self { config, source })
    }

    /// Wraps a validation failure of `section` with the file line of the
    /// field it names, if any.
    pub fn invalid(&self, section: &str, err: polaron_core::Error) -> CliError {
        let msg = err.to_string();
        let Some((path, text)) = &self.source else {
            return CliError::Config(format!("[{section}] {msg}"));
        };
        match locate(text, section, &msg) {
            Some((line, key)) => CliError::Config(format!("{}:{line}: [{section}] {key}: {msg}", path.display())),
            None => CliError::Config(format!("{}: [{section}] {msg}", path.display())),
        }
    }
}

/// `a.b.c=value`; the value is read as a TOML literal and falls back to a
/// bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{spec}`")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("--set has an empty key segment in `{key}`")));
    }
    let mut t = table;
    for p in &parts[..parts.len() - 1] {
        let entry = t.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set {key}: `{p}` is not a table")))?;
    }
    t.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Line (1-based) and name of the first key of `[section]` mentioned in
/// `msg`, falling back to the section header.
fn locate(text: &str, section: &str, msg: &str) -> Option<(usize, String)> {
    let mut current = String::new();
    let mut header = None;
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if let Some(name) = l.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some((i + 1, section.to_string()));
            }
            continue;
        }
        if current != section {
            continue;
        }
        if let Some((k, _)) = l.split_once('=') {
            let k = k.trim();
            let mentioned = msg
                .split(|c: char| !(c.is_alphanumeric() || c == '_'))
                .any(|w| w == k);
            if !k.is_empty() && mentioned {
                return Some((i + 1, k.to_string()));
            }
        }
    }
    header
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig::default();
        c.grid.r_first = Some(1e-3);
        c.lattice.horizon = Some(4.0);
        c.solver.tol = 3.3e-11;
        c.estimate.kappa_nodes = Some(vec![0.0, 0.3, 1.0]);
        c.initial = InitialGuess::Hydrogenic { decay: 0.7 };
        let text = toml::to_string(&c).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn overrides_nest_and_parse_literals() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "lattice.eps=0.25").unwrap();
        apply_override(&mut t, "simulate.source=ou_test").unwrap();
        apply_override(&mut t, "sampler.lags=[1.0, 2.0]").unwrap();
        let c = RunConfig::deserialize(toml::Value::Table(t)).unwrap();
        assert_eq!(c.lattice.eps, 0.25);
        assert_eq!(c.simulate.source, Source::OuTest);
        assert_eq!(c.sampler.lags, vec![1.0, 2.0]);
        assert!(apply_override(&mut toml::Table::new(), "novalue").is_err());
    }

    #[test]
    fn locates_the_named_key() {
        let text = "seed = 1\n\n[grid]\nn_points = 100\nr_max = -1.0\n\n[lattice]\neps = 1\n";
        assert_eq!(locate(text, "grid", "r_max must be positive, got -1"), Some((5, "r_max".into())));
        assert_eq!(locate(text, "lattice", "something else"), Some((7, "lattice".into())));
        assert_eq!(locate(text, "sampler", "x"), None);
    }

    #[test]
    fn lattice_defaults_follow_eps() {
        let lat = LatticeSection { eps: 0.25, ..Default::default() }.build().unwrap();
        assert_eq!(lat.horizon, 32.0);
        assert_eq!(lat.n_steps, 256);
        assert_eq!(lat.dt(), 0.25);
    }
}
