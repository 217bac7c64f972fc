use std::path::{Path, PathBuf};

use polaron_core::diagnostics::{
    assemble_report, mean_localization, msd_curve, two_sample_distance, DistanceRow, GRow, IncrementSample,
    LocalizationKernel, LocalizationRow, MsdPoint, PermutationTest, Sigma2Row,
};
use polaron_core::gibbs::{clt_variance, sample_polaron, thermo_integrate, Acceptance, ChainOutput, GEstimate, PathLattice};
use polaron_core::io::{read_increments, write_energies, write_increments, write_table, write_trajectories, FileDigest, Manifest};
use polaron_core::pekar::io::{read_solution, write_solution};
use polaron_core::pekar::{gaussian, solve_pekar_with, PekarSolution, PsiField};
use polaron_core::sde::{increments, simulate_pekar, Source, TrajectorySample};
use polaron_core::stats::Estimate;
use polaron_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::config::Loaded;
use crate::error::CliError;

pub const PEKAR_CSV: &str = "pekar.csv";
pub const PEKAR_JSON: &str = "pekar.json";
pub const INCREMENTS_CSV: &str = "increments.csv";
pub const SIGMA2_JSON: &str = "sigma2.json";
pub const LOCALIZATION_JSON: &str = "localization.json";
pub const G_ESTIMATE_JSON: &str = "g_estimate.json";
pub const MANIFEST_JSON: &str = "manifest.json";

pub struct Ctx {
    pub loaded: Loaded,
    pub out: PathBuf,
}

impl Ctx {
    fn dir(&self, command: &str) -> Result<PathBuf, CliError> {
        let d = self.out.join(command);
        std::fs::create_dir_all(&d).map_err(polaron_core::Error::from)?;
        Ok(d)
    }

    fn manifest(&self, command: &str) -> Result<Manifest, CliError> {
        let cfg = &self.loaded.config;
        Ok(Manifest::new(command, cfg.seed, serde_json::to_value(cfg).map_err(polaron_core::Error::from)?))
    }
}

/// Per-run summary of `sample-polaron`, read back by `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaronSummary {
    pub lattice: PathLattice,
    pub n_samples_per_chain: usize,
    pub sigma2: Estimate,
    pub acceptance: Vec<Acceptance>,
    pub mean_energy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationSummary {
    pub kernel: LocalizationKernel,
    pub polaron: Estimate,
    pub brownian: Estimate,
}

fn require(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::MissingInput(path.display().to_string()))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(polaron_core::Error::from)?;
    std::fs::write(path, text).map_err(polaron_core::Error::from)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    require(path)?;
    let text = std::fs::read_to_string(path).map_err(polaron_core::Error::from)?;
    Ok(serde_json::from_str(&text).map_err(polaron_core::Error::from)?)
}

fn finish(mut m: Manifest, dir: &Path, outputs: &[&str]) -> Result<(), CliError> {
    for o in outputs {
        m.outputs.push(FileDigest::of(&dir.join(o))?);
    }
    m.write(&dir.join(MANIFEST_JSON))?;
    Ok(())
}

fn load_solution(dir: &Path) -> Result<(PekarSolution, Vec<FileDigest>), CliError> {
    let (csv, json) = (dir.join(PEKAR_CSV), dir.join(PEKAR_JSON));
    require(&csv)?;
    require(&json)?;
    let sol = read_solution(&csv, &json)?;
    Ok((sol, vec![FileDigest::of(&csv)?, FileDigest::of(&json)?]))
}

pub fn solve_pekar(ctx: &Ctx) -> Result<(), CliError> {
    let cfg = &ctx.loaded.config;
    let grid = cfg.grid.build().map_err(|e| ctx.loaded.invalid("grid", e))?;
    cfg.solver.validate().map_err(|e| ctx.loaded.invalid("solver", e))?;
    cfg.initial.build(&grid).map_err(|e| ctx.loaded.invalid("initial", e))?;
    let sol = solve_pekar_with(&grid, &cfg.solver, &cfg.initial)?;

    let dir = ctx.dir("solve-pekar")?;
    write_solution(&dir.join(PEKAR_CSV), &dir.join(PEKAR_JSON), &sol)?;
    let mut m = ctx.manifest("solve-pekar")?;
    let virial_pass = sol.virial_defect() <= 1e-4;
    m.summary.insert("g".into(), sol.g.into());
    m.summary.insert("virial_defect".into(), sol.virial_defect().into());
    m.summary.insert("virial_pass".into(), virial_pass.into());
    m.summary.insert("iterations".into(), sol.iterations.into());
    finish(m, &dir, &[PEKAR_CSV, PEKAR_JSON])?;
    println!(
        "g = {:.10}  coulomb = {:.10}  kinetic = {:.10}  mu = {:.10}",
        sol.g, sol.coulomb, sol.kinetic, sol.mu
    );
    println!(
        "virial defect = {:.3e} ({})  residual = {:.3e} after {} iterations",
        sol.virial_defect(),
        if virial_pass { "pass" } else { "fail" },
        sol.residual,
        sol.iterations
    );
    Ok(())
}

fn lattice_and_sampler(ctx: &Ctx) -> Result<PathLattice, CliError> {
    let cfg = &ctx.loaded.config;
    let lat = cfg.lattice.build().map_err(|e| ctx.loaded.invalid("lattice", e))?;
    cfg.sampler.validate().map_err(|e| ctx.loaded.invalid("sampler", e))?;
    for &lag in &cfg.sampler.lags {
        lat.lag_steps(lag).map_err(|e| ctx.loaded.invalid("sampler", e))?;
    }
    Ok(lat)
}

fn clouds(chains: &[ChainOutput]) -> Vec<Vec<Vec3>> {
    chains.iter().flat_map(|c| c.occupation.iter().cloned()).collect()
}

pub fn sample_polaron_cmd(ctx: &Ctx) -> Result<(), CliError> {
    let cfg = &ctx.loaded.config;
    let lat = lattice_and_sampler(ctx)?;
    let chains = sample_polaron(&lat, &cfg.sampler)?;

    let dir = ctx.dir("sample-polaron")?;
    write_energies(&dir.join("energies.csv"), &chains)?;
    let inc: Vec<IncrementSample> =
        cfg.sampler.lags.iter().map(|&l| IncrementSample::from_chains(&chains, l, "polaron")).collect::<Result<_, _>>()?;
    write_increments(&dir.join(INCREMENTS_CSV), &inc)?;
    let rows: Vec<Vec<f64>> = chains
        .iter()
        .flat_map(|c| c.endpoint.iter().map(move |e| vec![c.chain_id as f64, e[0], e[1], e[2]]))
        .collect();
    write_table(&dir.join("endpoints.csv"), &["chain", "dx", "dy", "dz"], &rows)?;

    let sigma2 = if chains.len() >= 2 { clt_variance(&chains, None)? } else { Estimate::new(f64::NAN, f64::NAN) };
    let summary = PolaronSummary {
        lattice: lat,
        n_samples_per_chain: cfg.sampler.n_samples(),
        sigma2,
        acceptance: chains.iter().map(|c| c.acceptance).collect(),
        mean_energy: chains.iter().map(|c| c.mean_energy()).collect(),
    };
    write_json(&dir.join(SIGMA2_JSON), &summary)?;
    let mut outputs = vec!["energies.csv", INCREMENTS_CSV, "endpoints.csv", SIGMA2_JSON];

    if cfg.sampler.occupation_points > 0 {
        // Brownian control on the same lattice: the κ = 0 chain samples the prior exactly
        let control = sample_polaron(&lat.with_kappa(0.0), &cfg.sampler)?;
        let kernels = [LocalizationKernel::GaussianBump { width: 1.0 }, LocalizationKernel::Coulomb { eta: lat.eta.max(1e-3) }];
        let loc: Vec<LocalizationSummary> = kernels
            .iter()
            .map(|&k| LocalizationSummary {
                kernel: k,
                polaron: mean_localization(&clouds(&chains), k),
                brownian: mean_localization(&clouds(&control), k),
            })
            .collect();
        write_json(&dir.join(LOCALIZATION_JSON), &loc)?;
        outputs.push(LOCALIZATION_JSON);
    }

    let mut m = ctx.manifest("sample-polaron")?;
    m.summary.insert("sigma2".into(), serde_json::to_value(sigma2).map_err(polaron_core::Error::from)?);
    m.summary.insert("lattice".into(), serde_json::to_value(lat).map_err(polaron_core::Error::from)?);
    finish(m, &dir, &outputs)?;
    for c in &chains {
        println!("chain {}: acceptance pcn {:.3} local {:.3}", c.chain_id, c.acceptance.pcn, c.acceptance.local);
    }
    println!("sigma2 = {:.4} ± {:.4}", sigma2.value, sigma2.stderr);
    Ok(())
}

pub fn estimate_g(ctx: &Ctx) -> Result<(), CliError> {
    let cfg = &ctx.loaded.config;
    let lat = lattice_and_sampler(ctx)?;
    let quad = cfg.estimate.quadrature().map_err(|e| ctx.loaded.invalid("estimate", e))?;
    if cfg.sampler.n_chains < 2 {
        return Err(ctx.loaded.invalid(
            "sampler",
            polaron_core::Error::InvalidParameter("n_chains must be at least 2 for error bars".into()),
        ));
    }
    let est = thermo_integrate(&lat, &quad, &cfg.sampler)?;
    let dir = ctx.dir("estimate-g")?;
    write_json(&dir.join(G_ESTIMATE_JSON), &est)?;
    let mut m = ctx.manifest("estimate-g")?;
    m.summary.insert("g".into(), serde_json::to_value(est.g).map_err(polaron_core::Error::from)?);
    finish(m, &dir, &[G_ESTIMATE_JSON])?;
    println!("g({}) = {:.5} ± {:.5}", lat.eps, est.g.value, est.g.stderr);
    Ok(())
}

fn thin(traj: &TrajectorySample, n_paths: usize) -> TrajectorySample {
    let n = n_paths.min(traj.n_paths());
    TrajectorySample {
        starts: traj.starts[..n].to_vec(),
        displacements: traj.displacements[..n].to_vec(),
        ..traj.clone()
    }
}

pub fn simulate_pekar_cmd(ctx: &Ctx) -> Result<(), CliError> {
    let cfg = &ctx.loaded.config;
    let sim = &cfg.simulate;
    let mut dcfg = cfg.diffusion.clone();
    let mut inputs = Vec::new();
    let field = match sim.source {
        Source::OuTest => {
            if !(sim.ou_lambda > 0.0) {
                return Err(ctx.loaded.invalid(
                    "simulate",
                    polaron_core::Error::InvalidParameter(format!("ou_lambda must be positive, got {}", sim.ou_lambda)),
                ));
            }
            let grid = cfg.grid.build().map_err(|e| ctx.loaded.invalid("grid", e))?;
            PsiField::new(&gaussian(grid, sim.ou_lambda)?)?
        }
        Source::Pekar | Source::Brownian => {
            let dir = sim.solver_dir.clone().unwrap_or_else(|| ctx.out.join("solve-pekar"));
            let (sol, digests) = load_solution(&dir)?;
            inputs = digests;
            dcfg.zero_drift |= sim.source == Source::Brownian;
            PsiField::for_solution(&sol.psi)?
        }
    };
    dcfg.validate().map_err(|e| ctx.loaded.invalid("diffusion", e))?;
    if let Some(&lag) = sim.lags.iter().find(|&&l| !(l >= 0.0 && l <= dcfg.total_time())) {
        return Err(ctx.loaded.invalid(
            "simulate",
            polaron_core::Error::InvalidParameter(format!("lags must lie in [0, {}], got {lag}", dcfg.total_time())),
        ));
    }
    let traj = simulate_pekar(&field, &dcfg)?;
    let traj = if sim.source == Source::OuTest { traj.with_source(Source::OuTest) } else { traj };
    let inc = increments(&traj, &sim.lags)?;

    let dir = ctx.dir("simulate-pekar")?;
    write_trajectories(&dir.join("trajectories.csv"), &thin(&traj, sim.trajectory_paths))?;
    write_increments(&dir.join(INCREMENTS_CSV), &inc)?;
    let mut m = ctx.manifest("simulate-pekar")?;
    m.inputs = inputs;
    m.summary.insert("clamped_steps".into(), traj.clamped.into());
    finish(m, &dir, &["trajectories.csv", INCREMENTS_CSV])?;
    if traj.clamped > 0 {
        eprintln!("warning: drift clamped in {} Euler steps", traj.clamped);
    }
    for p in msd_curve(&inc)? {
        println!("lag {:>6}: MSD = {:.4} ± {:.4} (n = {})", p.lag, p.mean, p.stderr, p.n);
    }
    Ok(())
}

pub fn compare(ctx: &Ctx) -> Result<(), CliError> {
    let cfg = &ctx.loaded.config;
    let cmp = &cfg.compare;
    let solver_dir = cmp.solver_dir.clone().unwrap_or_else(|| ctx.out.join("solve-pekar"));
    let pekar_dir = cmp.pekar_dir.clone().unwrap_or_else(|| ctx.out.join("simulate-pekar"));
    let polaron_runs =
        if cmp.polaron_runs.is_empty() { vec![ctx.out.join("sample-polaron")] } else { cmp.polaron_runs.clone() };
    let g_runs = if cmp.g_runs.is_empty() {
        let d = ctx.out.join("estimate-g");
        if d.join(G_ESTIMATE_JSON).is_file() { vec![d] } else { Vec::new() }
    } else {
        cmp.g_runs.clone()
    };

    let pekar_csv = pekar_dir.join(INCREMENTS_CSV);
    let mut required = vec![solver_dir.join(PEKAR_CSV), solver_dir.join(PEKAR_JSON), pekar_csv.clone()];
    for d in &polaron_runs {
        required.push(d.join(INCREMENTS_CSV));
        required.push(d.join(SIGMA2_JSON));
    }
    required.extend(g_runs.iter().map(|d| d.join(G_ESTIMATE_JSON)));
    for p in &required {
        require(p)?;
    }
    if !(cmp.level > 0.0 && cmp.level < 1.0) {
        return Err(ctx.loaded.invalid(
            "compare",
            polaron_core::Error::InvalidParameter(format!("level must lie in (0, 1), got {}", cmp.level)),
        ));
    }

    let (sol, mut inputs) = load_solution(&solver_dir)?;
    let pekar = read_increments(&pekar_csv, "pekar")?;
    inputs.push(FileDigest::of(&pekar_csv)?);
    let test = PermutationTest {
        n_permutations: cmp.n_permutations,
        max_per_side: cmp.max_per_side,
        seed: cfg.seed,
        jackknife_blocks: cmp.jackknife_blocks,
    };

    let mut msd: Vec<(String, Vec<MsdPoint>)> = vec![("pekar".into(), msd_curve(&pekar)?)];
    let mut sigma2_table = Vec::new();
    let mut distances = Vec::new();
    let mut localization = Vec::new();
    for d in &polaron_runs {
        let summary: PolaronSummary = read_json(&d.join(SIGMA2_JSON))?;
        let eps = summary.lattice.eps;
        let inc = read_increments(&d.join(INCREMENTS_CSV), "polaron")?;
        inputs.push(FileDigest::of(&d.join(INCREMENTS_CSV))?);
        inputs.push(FileDigest::of(&d.join(SIGMA2_JSON))?);
        sigma2_table.push(Sigma2Row { eps, sigma2: summary.sigma2 });
        msd.push((format!("polaron eps={eps}"), msd_curve(&inc)?));
        for a in &inc {
            let Some(b) = pekar.iter().find(|b| b.lag == a.lag) else { continue };
            if a.lag == 0.0 {
                continue;
            }
            let r = two_sample_distance(a, b, &test)?;
            distances.push(DistanceRow {
                eps,
                lag: a.lag,
                energy_distance: r.energy_distance,
                energy_distance_unbiased: r.energy_distance_unbiased,
                stderr: r.energy_distance_stderr,
                energy_p_value: r.energy_p_value,
                ks_radial: r.ks_radial,
                ks_p_value: r.ks_p_value,
            });
        }
        let loc_path = d.join(LOCALIZATION_JSON);
        if loc_path.is_file() {
            let loc: Vec<LocalizationSummary> = read_json(&loc_path)?;
            inputs.push(FileDigest::of(&loc_path)?);
            for l in loc {
                let kernel = serde_json::to_string(&l.kernel).map_err(polaron_core::Error::from)?;
                let horizon = summary.lattice.horizon;
                localization.push(LocalizationRow { label: format!("polaron eps={eps} {kernel}"), horizon, value: l.polaron });
                localization.push(LocalizationRow { label: format!("brownian eps={eps} {kernel}"), horizon, value: l.brownian });
            }
        }
    }
    let mut g_table = Vec::new();
    for d in &g_runs {
        let est: GEstimate = read_json(&d.join(G_ESTIMATE_JSON))?;
        inputs.push(FileDigest::of(&d.join(G_ESTIMATE_JSON))?);
        g_table.push(GRow { eps: est.lattice.eps, g: est.g });
    }
    // table order is decreasing ε
    g_table.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    sigma2_table.sort_by(|a, b| b.eps.total_cmp(&a.eps));

    let report = assemble_report(&sol, g_table, sigma2_table, distances, msd, localization, None);
    let dir = ctx.dir("compare")?;
    write_json(&dir.join("report.json"), &report)?;
    let rows: Vec<Vec<f64>> = report
        .distances
        .iter()
        .map(|r| {
            vec![r.eps, r.lag, r.energy_distance, r.energy_distance_unbiased, r.stderr, r.energy_p_value, r.ks_radial, r.ks_p_value]
        })
        .collect();
    write_table(
        &dir.join("report.csv"),
        &["eps", "lag", "energy_distance", "energy_distance_unbiased", "stderr", "energy_p_value", "ks_radial", "ks_p_value"],
        &rows,
    )?;
    let g_rows: Vec<Vec<f64>> = report.g_table.iter().map(|r| vec![r.eps, r.g.value, r.g.stderr, report.g0]).collect();
    write_table(&dir.join("g_table.csv"), &["eps", "g", "stderr", "g0"], &g_rows)?;
    let s_rows: Vec<Vec<f64>> = report.sigma2_table.iter().map(|r| vec![r.eps, r.sigma2.value, r.sigma2.stderr]).collect();
    write_table(&dir.join("sigma2.csv"), &["eps", "sigma2", "stderr"], &s_rows)?;

    let mut m = ctx.manifest("compare")?;
    m.inputs = inputs;
    m.summary.insert("flags".into(), serde_json::to_value(report.flags).map_err(polaron_core::Error::from)?);
    finish(m, &dir, &["report.json", "report.csv", "g_table.csv", "sigma2.csv"])?;

    println!("g0 = {:.10} (virial defect {:.2e})", report.g0, report.virial_defect);
    for r in &report.g_table {
        println!("g({}) = {:.5} ± {:.5}", r.eps, r.g.value, r.g.stderr);
    }
    for r in &report.sigma2_table {
        println!("sigma2({}) = {:.4} ± {:.4}", r.eps, r.sigma2.value, r.sigma2.stderr);
    }
    for r in &report.distances {
        println!(
            "eps {} lag {}: energy distance {:.4} ± {:.4} (p = {:.3}), radial KS {:.4} (p = {:.3})",
            r.eps, r.lag, r.energy_distance_unbiased, r.stderr, r.energy_p_value, r.ks_radial, r.ks_p_value
        );
    }
    println!("g trend: {:?}  distance trend: {:?}", report.flags.g_trend, report.flags.distance_trend);
    Ok(())
}
