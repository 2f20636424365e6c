//! Simplex sweeps: integrate one scenario from the same endowment under
//! every network on a grid of the probability simplex, materializing the
//! map from networks to equilibria.
//!
//! The sweep is embarrassingly parallel; results are merged by grid index,
//! so the output is identical for any worker count. The grid itself comes
//! from [`crate::networks::simplex_grid`] and is lexicographic, making the
//! exported tables byte-for-byte reproducible.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::{integrate_to_equilibrium, EquilibriumRecord};
use crate::networks::{barycentric_color, simplex_grid, Rgb};
use crate::scenario::Scenario;

/// One grid point of the sweep.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub index: usize,
    pub probabilities: Vec<f64>,
    /// Barycentric color label; only defined on the 2-simplex (three
    /// agents).
    pub color: Option<Rgb>,
    pub record: EquilibriumRecord,
}

/// Where an agent's equilibrium utility peaks over the grid.
#[derive(Debug, Clone)]
pub struct AgentSweepSummary {
    pub label: String,
    pub min_utility: f64,
    pub max_utility: f64,
    pub argmax_index: usize,
    pub argmax_probabilities: Vec<f64>,
    /// Whether the agent's own vertex grid point attains the maximum
    /// (within rounding): the empirical network effect.
    pub vertex_attains_max: bool,
}

/// The sampled network-to-equilibrium map of one scenario.
#[derive(Debug, Clone)]
pub struct ManifoldDataset {
    pub scenario_name: String,
    pub resolution: u32,
    pub points: Vec<GridPoint>,
    pub agents: Vec<AgentSweepSummary>,
    /// Grid indices whose run did not converge.
    pub non_converged: Vec<usize>,
    /// Smallest pairwise distance between equilibrium utility vectors: an
    /// empirical injectivity measure of the map.
    pub min_pairwise_utility_distance: f64,
    /// Largest equilibrium-utility distance across adjacent grid points: an
    /// empirical continuity measure that shrinks under refinement.
    pub max_adjacent_utility_distance: f64,
}

impl ManifoldDataset {
    pub fn all_converged(&self) -> bool {
        self.non_converged.is_empty()
    }

    /// True when every agent's utility peaks at her own vertex.
    pub fn vertex_dominance_holds(&self) -> bool {
        self.agents.iter().all(|a| a.vertex_attains_max)
    }
}

/// Runs the sweep at `resolution`, optionally inside a dedicated pool of
/// `workers` threads. The scenario's own `network.probabilities` field is
/// ignored; the grid supplies every network.
pub fn run_sweep(
    scenario: &Scenario,
    resolution: u32,
    workers: Option<usize>,
) -> Result<ManifoldDataset> {
    match workers {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Integration(format!("worker pool: {e}")))?;
            pool.install(|| sweep_inner(scenario, resolution))
        }
        None => sweep_inner(scenario, resolution),
    }
}

fn sweep_inner(scenario: &Scenario, resolution: u32) -> Result<ManifoldDataset> {
    let n = scenario.agent_count();
    let grid = simplex_grid(n, resolution)?;

    let records: Vec<EquilibriumRecord> = grid
        .par_iter()
        .map(|p| {
            let pointwise = scenario.with_probabilities(p)?;
            let (_, record) = integrate_to_equilibrium(&pointwise, u64::MAX)?;
            Ok(record)
        })
        .collect::<Result<_>>()?;

    let points: Vec<GridPoint> = grid
        .into_iter()
        .zip(records)
        .enumerate()
        .map(|(index, (probabilities, record))| {
            let color = if n == 3 {
                Some(barycentric_color(&probabilities).expect("grid points are valid"))
            } else {
                None
            };
            GridPoint {
                index,
                probabilities,
                color,
                record,
            }
        })
        .collect();

    let non_converged: Vec<usize> = points
        .iter()
        .filter(|p| !p.record.status.is_success())
        .map(|p| p.index)
        .collect();

    let agents = summarize_agents(scenario, &points, resolution);
    let min_pairwise_utility_distance = min_pairwise_distance(&points);
    let max_adjacent_utility_distance = max_adjacent_distance(&points, resolution);

    Ok(ManifoldDataset {
        scenario_name: scenario.name.clone(),
        resolution,
        points,
        agents,
        non_converged,
        min_pairwise_utility_distance,
        max_adjacent_utility_distance,
    })
}

fn summarize_agents(
    scenario: &Scenario,
    points: &[GridPoint],
    resolution: u32,
) -> Vec<AgentSweepSummary> {
    let n = scenario.agent_count();
    (0..n)
        .map(|agent| {
            let mut min_utility = f64::INFINITY;
            let mut max_utility = f64::NEG_INFINITY;
            let mut argmax_index = 0;
            for p in points {
                let u = p.record.final_utilities[agent];
                min_utility = min_utility.min(u);
                if u > max_utility {
                    max_utility = u;
                    argmax_index = p.index;
                }
            }
            let vertex_index = vertex_grid_index(points, agent, resolution);
            let vertex_attains_max = vertex_index
                .map(|vi| {
                    points[vi].record.final_utilities[agent]
                        >= max_utility - 1e-12 * max_utility.abs().max(1.0)
                })
                .unwrap_or(false);
            AgentSweepSummary {
                label: scenario.labels[agent].clone(),
                min_utility,
                max_utility,
                argmax_index,
                argmax_probabilities: points[argmax_index].probabilities.clone(),
                vertex_attains_max,
            }
        })
        .collect()
}

/// Grid index of the vertex `p = e_agent` (present at every resolution).
fn vertex_grid_index(points: &[GridPoint], agent: usize, _resolution: u32) -> Option<usize> {
    points
        .iter()
        .find(|p| p.probabilities[agent] == 1.0)
        .map(|p| p.index)
}

fn utility_distance(a: &EquilibriumRecord, b: &EquilibriumRecord) -> f64 {
    a.final_utilities
        .iter()
        .zip(&b.final_utilities)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn min_pairwise_distance(points: &[GridPoint]) -> f64 {
    let mut min = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in points.iter().skip(i + 1) {
            min = min.min(utility_distance(&a.record, &b.record));
        }
    }
    min
}

/// Adjacent means the underlying integer compositions differ by moving one
/// unit of probability mass between two coordinates.
fn max_adjacent_distance(points: &[GridPoint], resolution: u32) -> f64 {
    use std::collections::HashMap;
    let r = resolution as f64;
    let key = |p: &[f64]| -> Vec<u32> { p.iter().map(|&q| (q * r).round() as u32).collect() };
    let by_composition: HashMap<Vec<u32>, usize> = points
        .iter()
        .map(|p| (key(&p.probabilities), p.index))
        .collect();
    let n = points
        .first()
        .map(|p| p.probabilities.len())
        .unwrap_or_default();
    let mut max = 0.0f64;
    for p in points {
        let k = key(&p.probabilities);
        for a in 0..n {
            if k[a] == 0 {
                continue;
            }
            for b in 0..n {
                if a == b {
                    continue;
                }
                let mut neighbor = k.clone();
                neighbor[a] -= 1;
                neighbor[b] += 1;
                if let Some(&j) = by_composition.get(&neighbor) {
                    if j > p.index {
                        max = max.max(utility_distance(&p.record, &points[j].record));
                    }
                }
            }
        }
    }
    max
}

/// One row of the refinement table: resolution and the worst
/// adjacent-pair equilibrium distance at that resolution.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RefinementRow {
    pub resolution: u32,
    pub max_adjacent_utility_distance: f64,
}

/// Sweeps the scenario at each resolution and tabulates how the worst
/// adjacent-pair equilibrium distance shrinks: the empirical continuity of
/// the network-to-equilibrium map.
pub fn refinement_table(
    scenario: &Scenario,
    resolutions: &[u32],
    workers: Option<usize>,
) -> Result<Vec<RefinementRow>> {
    resolutions
        .iter()
        .map(|&resolution| {
            let dataset = run_sweep(scenario, resolution, workers)?;
            Ok(RefinementRow {
                resolution,
                max_adjacent_utility_distance: dataset.max_adjacent_utility_distance,
            })
        })
        .collect()
}
