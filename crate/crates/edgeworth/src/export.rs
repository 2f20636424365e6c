//! Plot-ready flat-file output: one comma-separated table per artifact plus
//! a structured JSON summary. All numbers are printed with Rust's shortest
//! round-trip formatting, so files are byte-identical across runs and
//! worker counts.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::compare::WalrasComparison;
use crate::economy::Allocation;
use crate::error::{Error, Result};
use crate::integrate::{EquilibriumRecord, RunInvariantReport, Trajectory};
use crate::sweep::ManifoldDataset;

/// Trajectory table: `t, x_<good>_<agent>.., U_<agent>.., potential`, with
/// state columns ordered agent-major (agent 1's goods first).
pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let (m, n) = match trajectory.states.first() {
        Some(s) => (s.goods(), s.agents()),
        None => return String::new(),
    };
    let mut out = String::from("t");
    for i in 1..=n {
        for k in 1..=m {
            let _ = write!(out, ",x_{k}_{i}");
        }
    }
    for i in 1..=n {
        let _ = write!(out, ",U_{i}");
    }
    out.push_str(",potential\n");
    for (idx, state) in trajectory.states.iter().enumerate() {
        let _ = write!(out, "{}", trajectory.times[idx]);
        for i in 0..n {
            for k in 0..m {
                let _ = write!(out, ",{}", state.entry(k, i));
            }
        }
        for u in &trajectory.utilities[idx] {
            let _ = write!(out, ",{u}");
        }
        let _ = writeln!(out, ",{}", trajectory.potentials[idx]);
    }
    out
}

/// Sweep table: `index, p_1..p_n, r, g, b, u_1..u_n, gain_1..gain_n,
/// mrs_residual, steps, status`. Color channels are zero when the sweep is
/// not over three agents.
pub fn manifold_csv(dataset: &ManifoldDataset) -> String {
    let n = dataset
        .points
        .first()
        .map(|p| p.probabilities.len())
        .unwrap_or_default();
    let mut out = String::from("index");
    for i in 1..=n {
        let _ = write!(out, ",p_{i}");
    }
    out.push_str(",r,g,b");
    for i in 1..=n {
        let _ = write!(out, ",u_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",gain_{i}");
    }
    out.push_str(",mrs_residual,steps,status\n");
    for point in &dataset.points {
        let _ = write!(out, "{}", point.index);
        for p in &point.probabilities {
            let _ = write!(out, ",{p}");
        }
        match point.color {
            Some(c) => {
                let _ = write!(out, ",{},{},{}", c.r, c.g, c.b);
            }
            None => out.push_str(",0,0,0"),
        }
        for u in &point.record.final_utilities {
            let _ = write!(out, ",{u}");
        }
        for g in &point.record.utility_gains {
            let _ = write!(out, ",{g}");
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            point.record.mrs_residual, point.record.steps, point.record.status
        );
    }
    out
}

#[derive(Serialize)]
struct AllocationDto {
    bundles: Vec<Vec<f64>>,
    totals: Vec<f64>,
}

impl From<&Allocation> for AllocationDto {
    fn from(a: &Allocation) -> Self {
        Self {
            bundles: (0..a.agents()).map(|i| a.bundle(i).to_vec()).collect(),
            totals: a.totals().to_vec(),
        }
    }
}

/// Machine-readable form of one equilibrium record.
pub fn record_json(record: &EquilibriumRecord) -> serde_json::Value {
    json!({
        "probabilities": record.probabilities,
        "initial": AllocationDto::from(&record.initial),
        "terminal": AllocationDto::from(&record.terminal),
        "initial_utilities": record.initial_utilities,
        "final_utilities": record.final_utilities,
        "utility_gains": record.utility_gains,
        "mrs_residual": record.mrs_residual,
        "final_field_norm": record.final_field_norm,
        "steps": record.steps,
        "elapsed_time": record.elapsed_time,
        "status": record.status.to_string(),
    })
}

/// Per-agent ranges, argmax points, and map statistics of a sweep.
pub fn sweep_summary_json(dataset: &ManifoldDataset) -> serde_json::Value {
    json!({
        "scenario": dataset.scenario_name,
        "resolution": dataset.resolution,
        "grid_points": dataset.points.len(),
        "non_converged": dataset.non_converged,
        "all_converged": dataset.all_converged(),
        "vertex_dominance_holds": dataset.vertex_dominance_holds(),
        "min_pairwise_utility_distance": dataset.min_pairwise_utility_distance,
        "max_adjacent_utility_distance": dataset.max_adjacent_utility_distance,
        "agents": dataset.agents.iter().map(|a| json!({
            "label": a.label,
            "min_utility": a.min_utility,
            "max_utility": a.max_utility,
            "argmax_index": a.argmax_index,
            "argmax_probabilities": a.argmax_probabilities,
            "vertex_attains_max": a.vertex_attains_max,
        })).collect::<Vec<_>>(),
    })
}

/// Invariant report of one run as JSON.
pub fn invariants_json(report: &RunInvariantReport) -> serde_json::Value {
    serde_json::to_value(report).expect("report serializes")
}

/// Straight price-taking path table:
/// `lambda, x_1_1, x_2_1, x_1_2, x_2_2, U_1, U_2`.
pub fn walras_path_csv(comparison: &WalrasComparison) -> String {
    let mut out = String::from("lambda,x_1_1,x_2_1,x_1_2,x_2_2,U_1,U_2\n");
    for s in &comparison.walras_path {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.lambda,
            s.bundle_agent1[0],
            s.bundle_agent1[1],
            s.bundle_agent2[0],
            s.bundle_agent2[1],
            s.utilities[0],
            s.utilities[1]
        );
    }
    out
}

/// Headline numbers of the comparison.
pub fn compare_summary_json(comparison: &WalrasComparison) -> serde_json::Value {
    json!({
        "price_ratio": comparison.walras.price_ratio,
        "walras_allocation": AllocationDto::from(&comparison.walras.allocation),
        "walras_utilities": comparison.walras_utilities,
        "fair_record": record_json(&comparison.fair_record),
        "equilibrium_distance": comparison.equilibrium_distance,
        "mean_fair_slope": comparison.mean_fair_slope,
        "equal_gains": {
            "max_deviation": comparison.equal_gains.max_deviation,
            "total_gain": comparison.equal_gains.total_gain,
            "passes": comparison.equal_gains.passes,
        },
    })
}

/// Writes text to `dir/name`, creating `dir` first.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io(format!("create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::Io(format!("write {}: {e}", path.display())))?;
    Ok(path)
}

/// Pretty-printed JSON with a trailing newline.
pub fn json_to_string(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("valid json");
    s.push('\n');
    s
}
