use serde::{Deserialize, Serialize};

use super::{MsdPoint, ScalingReport};
use crate::pekar::PekarSolution;
use crate::stats::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Pass,
    Fail,
    InsufficientLevels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GRow {
    pub eps: f64,
    pub g: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma2Row {
    pub eps: f64,
    pub sigma2: Estimate,
}

/// Distance between Polaron increments at coupling `eps` and the Pekar
/// process increments at `lag`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub eps: f64,
    pub lag: f64,
    pub energy_distance: f64,
    pub energy_distance_unbiased: f64,
    pub stderr: f64,
    pub energy_p_value: f64,
    pub ks_radial: f64,
    pub ks_p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRow {
    pub label: String,
    pub horizon: f64,
    pub value: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendFlags {
    /// `|ĝ(ε) − g₀|` strictly decreasing along the table.
    pub g_trend: Flag,
    /// Distance to the Pekar increments decreasing with `ε` at every lag.
    pub distance_trend: Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub g0: f64,
    pub virial_defect: f64,
    pub g_table: Vec<GRow>,
    pub sigma2_table: Vec<Sigma2Row>,
    pub distances: Vec<DistanceRow>,
    pub msd: Vec<(String, Vec<MsdPoint>)>,
    pub localization: Vec<LocalizationRow>,
    pub scaling: Option<ScalingReport>,
    pub flags: TrendFlags,
}

/// `true` when `next` lies below `prev` by more than their combined standard error.
fn clearly_below(prev: Estimate, next: Estimate) -> bool {
    let s = (prev.stderr.powi(2) + next.stderr.powi(2)).sqrt();
    prev.value - next.value > s
}

fn g_trend(g0: f64, table: &[GRow]) -> Flag {
    if table.len() < 2 {
        return Flag::InsufficientLevels;
    }
    let gap = |r: &GRow| Estimate::new((r.g.value - g0).abs(), r.g.stderr);
    if table.windows(2).all(|w| clearly_below(gap(&w[0]), gap(&w[1]))) {
        Flag::Pass
    } else {
        Flag::Fail
    }
}

fn distance_trend(rows: &[DistanceRow]) -> Flag {
    let mut lags: Vec<f64> = rows.iter().map(|r| r.lag).collect();
    lags.sort_by(f64::total_cmp);
    lags.dedup();
    let mut any = false;
    for lag in lags {
        let mut at: Vec<&DistanceRow> = rows.iter().filter(|r| r.lag == lag).collect();
        if at.len() < 2 {
            continue;
        }
        any = true;
        // largest ε first
        at.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        let est = |r: &DistanceRow| Estimate::new(r.energy_distance_unbiased, r.stderr);
        if !at.windows(2).all(|w| clearly_below(est(w[0]), est(w[1]))) {
            return Flag::Fail;
        }
    }
    if any {
        Flag::Pass
    } else {
        Flag::InsufficientLevels
    }
}

/// Collects the tables and evaluates the trend flags. Statistical outcomes
/// only set flags; nothing here fails.
pub fn assemble_report(
    solver: &PekarSolution,
    g_table: Vec<GRow>,
    sigma2_table: Vec<Sigma2Row>,
    distances: Vec<DistanceRow>,
    msd: Vec<(String, Vec<MsdPoint>)>,
    localization: Vec<LocalizationRow>,
    scaling: Option<ScalingReport>,
) -> ComparisonReport {
    let flags = TrendFlags { g_trend: g_trend(solver.g, &g_table), distance_trend: distance_trend(&distances) };
    ComparisonReport {
        g0: solver.g,
        virial_defect: solver.virial_defect(),
        g_table,
        sigma2_table,
        distances,
        msd,
        localization,
        scaling,
        flags,
    }
}
