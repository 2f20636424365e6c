//! Side-by-side comparison of the fair-trading path with the price-taking
//! benchmark on a two-agent, two-good economy.
//!
//! The price-taking path is a straight line in goods space (trade happens
//! at the final prices only); the fair path is generally curved there but
//! is a 45-degree line in utility space, because both agents bank the same
//! gain at every instant. Unless the scenario is symmetric the two
//! equilibria differ.

use crate::economy::{utilities, Allocation};
use crate::error::{Error, Result};
use crate::integrate::{
    equal_gains_check, integrate_to_equilibrium, EqualGainsReport, EquilibriumRecord, Trajectory,
};
use crate::oracles::{walras_two_agent_cd, WalrasResult};
use crate::scenario::Scenario;

/// One sample of the straight price-taking path.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WalrasPathSample {
    /// Position along the segment, 0 at the endowment, 1 at equilibrium.
    pub lambda: f64,
    /// Agent 1's holdings.
    pub bundle_agent1: [f64; 2],
    /// Agent 2's holdings (the rest of the totals).
    pub bundle_agent2: [f64; 2],
    pub utilities: [f64; 2],
}

/// Everything the `walras-compare` command reports.
#[derive(Debug, Clone)]
pub struct WalrasComparison {
    pub walras: WalrasResult,
    pub fair_record: EquilibriumRecord,
    pub fair_trajectory: Trajectory,
    pub walras_path: Vec<WalrasPathSample>,
    /// Frobenius distance between the two equilibrium allocations.
    pub equilibrium_distance: f64,
    /// Mean slope `ΔU_2 / ΔU_1` over fair-path segments; 1 for a fair path.
    pub mean_fair_slope: f64,
    pub equal_gains: EqualGainsReport,
    /// Utilities at the price-taking equilibrium, for the utility-space
    /// panel.
    pub walras_utilities: Vec<f64>,
}

/// Integrates the fair dynamics and solves the price-taking equilibrium on
/// the same scenario.
pub fn walras_compare(scenario: &Scenario, stride: u64) -> Result<WalrasComparison> {
    if scenario.agent_count() != 2 || scenario.good_count() != 2 {
        return Err(Error::Dimension {
            context: "walras comparison".into(),
            expected: 2,
            actual: scenario.agent_count().max(scenario.good_count()),
        });
    }
    let walras = walras_two_agent_cd(&scenario.endowments, &scenario.params)?;
    let walras_utilities = utilities(&walras.allocation, &scenario.params)?;
    let (fair_trajectory, fair_record) = integrate_to_equilibrium(scenario, stride)?;
    let equal_gains = equal_gains_check(&fair_trajectory)?;

    let equilibrium_distance =
        (fair_record.terminal.entries() - walras.allocation.entries()).norm();

    let mut slopes = Vec::new();
    for pair in fair_trajectory.utilities.windows(2) {
        let d1 = pair[1][0] - pair[0][0];
        let d2 = pair[1][1] - pair[0][1];
        if d1.abs() > 1e-12 {
            slopes.push(d2 / d1);
        }
    }
    let mean_fair_slope = if slopes.is_empty() {
        1.0
    } else {
        slopes.iter().sum::<f64>() / slopes.len() as f64
    };

    let walras_path = sample_walras_path(scenario, &walras, 100)?;

    Ok(WalrasComparison {
        walras,
        fair_record,
        fair_trajectory,
        walras_path,
        equilibrium_distance,
        mean_fair_slope,
        equal_gains,
        walras_utilities,
    })
}

fn sample_walras_path(
    scenario: &Scenario,
    walras: &WalrasResult,
    segments: usize,
) -> Result<Vec<WalrasPathSample>> {
    let (from, to) = walras.path_endpoints;
    let totals = scenario.endowments.totals();
    let mut out = Vec::with_capacity(segments + 1);
    for s in 0..=segments {
        let lambda = s as f64 / segments as f64;
        let bundle_agent1 = [
            from[0] + lambda * (to[0] - from[0]),
            from[1] + lambda * (to[1] - from[1]),
        ];
        let bundle_agent2 = [totals[0] - bundle_agent1[0], totals[1] - bundle_agent1[1]];
        let alloc = Allocation::from_bundles(&[bundle_agent1.to_vec(), bundle_agent2.to_vec()])?;
        let u = utilities(&alloc, &scenario.params)?;
        out.push(WalrasPathSample {
            lambda,
            bundle_agent1,
            bundle_agent2,
            utilities: [u[0], u[1]],
        });
    }
    Ok(out)
}
