//! Independent references the dynamics is validated against: the two-agent
//! Cobb-Douglas price-taking (Walrasian) equilibrium in closed form, the
//! two-agent contract-curve parametrization, and a seeded random search for
//! Pareto improvements.
//!
//! None of these share code with the trade dynamics; that independence is
//! the point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::economy::{eval_utility, Allocation, UtilityParams};
use crate::error::{Error, Result};

/// Price-taking equilibrium of a 2-agent, 2-good Cobb-Douglas economy.
#[derive(Debug, Clone)]
pub struct WalrasResult {
    /// Price of good 1 with good 2 as the numeraire.
    pub price_ratio: f64,
    /// Market-clearing allocation.
    pub allocation: Allocation,
    /// The trade path in goods space is the straight budget-line segment
    /// from the endowment to the equilibrium (agent 1's coordinates).
    pub path_endpoints: ([f64; 2], [f64; 2]),
}

/// Closed-form Walrasian equilibrium for `n = m = 2`.
///
/// With good 2 as numeraire and `α_i` agent `i`'s exponent on good 1,
/// market clearing for good 1 gives
/// `p_1 = (α_1 ω_12 + α_2 ω_22) / ((1−α_1) ω_11 + (1−α_2) ω_21)`,
/// and demands `x_i1 = α_i (p_1 ω_i1 + ω_i2)/p_1`,
/// `x_i2 = (1−α_i)(p_1 ω_i1 + ω_i2)`.
pub fn walras_two_agent_cd(
    endowments: &Allocation,
    params: &UtilityParams,
) -> Result<WalrasResult> {
    require_two_by_two(endowments, params, "walras oracle")?;
    if !endowments.is_interior(0.0) {
        return Err(Error::Boundary(
            "the price-taking oracle needs strictly positive endowments".into(),
        ));
    }
    let a = [params.agent(0)[0], params.agent(1)[0]];
    let w = [
        [endowments.entry(0, 0), endowments.entry(1, 0)],
        [endowments.entry(0, 1), endowments.entry(1, 1)],
    ];
    let numerator = a[0] * w[0][1] + a[1] * w[1][1];
    let denominator = (1.0 - a[0]) * w[0][0] + (1.0 - a[1]) * w[1][0];
    let p1 = numerator / denominator;

    let mut bundles = Vec::with_capacity(2);
    for i in 0..2 {
        let wealth = p1 * w[i][0] + w[i][1];
        bundles.push(vec![a[i] * wealth / p1, (1.0 - a[i]) * wealth]);
    }
    let path_endpoints = ([w[0][0], w[0][1]], [bundles[0][0], bundles[0][1]]);
    let allocation = Allocation::with_totals(
        nalgebra::DMatrix::from_column_slice(
            2,
            2,
            &[bundles[0][0], bundles[0][1], bundles[1][0], bundles[1][1]],
        ),
        endowments.totals().to_vec(),
    )?;
    Ok(WalrasResult {
        price_ratio: p1,
        allocation,
        path_endpoints,
    })
}

/// The 2-agent, 2-good contract curve, parametrized by agent 1's share of
/// good 1.
///
/// Writing `a = α_1/(1−α_1)` and `b = α_2/(1−α_2)`, equality of the
/// marginal rates of substitution pins agent 1's good-2 holding to
/// `x_12 = b·x_11·W_2 / (a(W_1−x_11) + b·x_11)`; for `α_1 = α_2` the curve
/// is the straight diagonal of the box.
pub fn contract_curve_two_agent_cd(
    params: &UtilityParams,
    totals: &[f64],
    share: f64,
) -> Result<Allocation> {
    if params.agent_count() != 2 || params.good_count() != 2 || totals.len() != 2 {
        return Err(Error::Dimension {
            context: "contract curve oracle".into(),
            expected: 2,
            actual: params.agent_count(),
        });
    }
    if !(share > 0.0 && share < 1.0) {
        return Err(Error::Range(format!(
            "contract curve share must lie in (0,1), got {share}"
        )));
    }
    let a = params.agent(0)[0] / (1.0 - params.agent(0)[0]);
    let b = params.agent(1)[0] / (1.0 - params.agent(1)[0]);
    let x11 = share * totals[0];
    let x12 = b * x11 * totals[1] / (a * (totals[0] - x11) + b * x11);
    Allocation::from_bundles(&[vec![x11, x12], vec![totals[0] - x11, totals[1] - x12]])
}

/// Outcome of the randomized Pareto-improvement search.
#[derive(Debug, Clone)]
pub struct ParetoSearchReport {
    pub improvement_found: bool,
    /// Utility gains of the first improving perturbation found, if any.
    pub improving_gains: Option<Vec<f64>>,
    pub samples: u32,
    /// Samples discarded for leaving the nonnegative orthant.
    pub infeasible_samples: u32,
}

/// Searches for a weak Pareto improvement near `allocation` by sampling
/// zero-sum perturbations of norm at most `radius` (uniform direction in
/// the zero-sum subspace, ball-uniform radius, seeded counter-based RNG so
/// results do not depend on scheduling).
///
/// A sample counts as an improvement when every agent's utility changes by
/// at least `−1e-12` and some agent's utility rises by more than `1e-12`.
/// At a converged equilibrium the report must come back empty-handed.
pub fn brute_force_pareto_check(
    allocation: &Allocation,
    params: &UtilityParams,
    radius: f64,
    samples: u32,
    seed: u64,
) -> Result<ParetoSearchReport> {
    if radius < 0.0 {
        return Err(Error::Range(format!(
            "search radius must be nonnegative, got {radius}"
        )));
    }
    let m = allocation.goods();
    let n = allocation.agents();
    let base: Vec<f64> = (0..n)
        .map(|i| eval_utility(allocation.bundle(i), params.agent(i)))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dof = (m * (n - 1)) as f64;
    let mut infeasible = 0u32;

    for _ in 0..samples {
        // Gaussian entries projected onto the zero-sum subspace give a
        // uniform direction there.
        let mut delta = vec![0.0f64; m * n];
        for v in delta.iter_mut() {
            *v = normal_sample(&mut rng);
        }
        for k in 0..m {
            let mean: f64 = (0..n).map(|i| delta[i * m + k]).sum::<f64>() / n as f64;
            for i in 0..n {
                delta[i * m + k] -= mean;
            }
        }
        let norm: f64 = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let scale = radius * rng.gen::<f64>().powf(1.0 / dof) / norm;

        let mut feasible = true;
        let mut gains = Vec::with_capacity(n);
        for i in 0..n {
            let bundle: Vec<f64> = allocation
                .bundle(i)
                .iter()
                .enumerate()
                .map(|(k, &q)| q + scale * delta[i * m + k])
                .collect();
            if bundle.iter().any(|&q| q < 0.0) {
                feasible = false;
                break;
            }
            gains.push(eval_utility(&bundle, params.agent(i))? - base[i]);
        }
        if !feasible {
            infeasible += 1;
            continue;
        }
        let min = gains.iter().copied().fold(f64::INFINITY, f64::min);
        let max = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min >= -1e-12 && max > 1e-12 {
            return Ok(ParetoSearchReport {
                improvement_found: true,
                improving_gains: Some(gains),
                samples,
                infeasible_samples: infeasible,
            });
        }
    }
    Ok(ParetoSearchReport {
        improvement_found: false,
        improving_gains: None,
        samples,
        infeasible_samples: infeasible,
    })
}

/// Box-Muller from two uniform draws.
fn normal_sample(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn require_two_by_two(
    allocation: &Allocation,
    params: &UtilityParams,
    context: &str,
) -> Result<()> {
    if allocation.agents() != 2 || allocation.goods() != 2 || params.agent_count() != 2 {
        return Err(Error::Dimension {
            context: context.into(),
            expected: 2,
            actual: allocation.agents().max(allocation.goods()),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::mrs_dispersion;
    use approx::assert_relative_eq;

    fn symmetric() -> (Allocation, UtilityParams) {
        (
            Allocation::from_bundles(&[vec![3.0, 1.0], vec![1.0, 3.0]]).unwrap(),
            UtilityParams::two_goods(&[0.5, 0.5]).unwrap(),
        )
    }

    #[test]
    fn walras_symmetric_case() {
        let (alloc, params) = symmetric();
        let w = walras_two_agent_cd(&alloc, &params).unwrap();
        assert_relative_eq!(w.price_ratio, 1.0, max_relative = 1e-14);
        for i in 0..2 {
            for k in 0..2 {
                assert_relative_eq!(w.allocation.entry(k, i), 2.0, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn walras_hand_computed_case() {
        let alloc = Allocation::from_bundles(&[vec![4.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let params = UtilityParams::two_goods(&[0.5, 0.5]).unwrap();
        let w = walras_two_agent_cd(&alloc, &params).unwrap();
        assert_relative_eq!(w.price_ratio, 0.4, max_relative = 1e-14);
        assert_relative_eq!(w.allocation.entry(0, 0), 3.25, max_relative = 1e-14);
        assert_relative_eq!(w.allocation.entry(1, 0), 1.3, max_relative = 1e-14);
        assert_relative_eq!(w.allocation.entry(0, 1), 1.75, max_relative = 1e-14);
        assert_relative_eq!(w.allocation.entry(1, 1), 0.7, max_relative = 1e-14);
        // Market clearing.
        assert_relative_eq!(
            w.allocation.entry(0, 0) + w.allocation.entry(0, 1),
            5.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn walras_no_trade_at_equilibrium_endowment() {
        let (alloc, params) = symmetric();
        let w = walras_two_agent_cd(&alloc, &params).unwrap();
        let again = walras_two_agent_cd(&w.allocation, &params).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                assert_relative_eq!(
                    again.allocation.entry(k, i),
                    w.allocation.entry(k, i),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn walras_budget_balance() {
        let alloc = Allocation::from_bundles(&[vec![2.5, 0.7], vec![1.3, 4.2]]).unwrap();
        let params = UtilityParams::two_goods(&[0.35, 0.6]).unwrap();
        let w = walras_two_agent_cd(&alloc, &params).unwrap();
        for i in 0..2 {
            let value_before = w.price_ratio * alloc.entry(0, i) + alloc.entry(1, i);
            let value_after = w.price_ratio * w.allocation.entry(0, i) + w.allocation.entry(1, i);
            assert_relative_eq!(value_before, value_after, max_relative = 1e-10);
        }
    }

    #[test]
    fn walras_lands_on_the_contract_curve() {
        let alloc = Allocation::from_bundles(&[vec![2.5, 0.7], vec![1.3, 4.2]]).unwrap();
        let params = UtilityParams::two_goods(&[0.35, 0.6]).unwrap();
        let w = walras_two_agent_cd(&alloc, &params).unwrap();
        assert!(mrs_dispersion(&w.allocation, &params).unwrap() <= 1e-10);
    }

    #[test]
    fn walras_is_numeraire_invariant() {
        // Relabel the goods, solve, and relabel back: demands are
        // homogeneous of degree zero in prices, so the allocation agrees.
        let alloc = Allocation::from_bundles(&[vec![2.5, 0.7], vec![1.3, 4.2]]).unwrap();
        let params = UtilityParams::two_goods(&[0.35, 0.6]).unwrap();
        let w = walras_two_agent_cd(&alloc, &params).unwrap();

        let swapped_alloc = Allocation::from_bundles(&[vec![0.7, 2.5], vec![4.2, 1.3]]).unwrap();
        let swapped_params = UtilityParams::new(vec![vec![0.65, 0.35], vec![0.4, 0.6]]).unwrap();
        let v = walras_two_agent_cd(&swapped_alloc, &swapped_params).unwrap();
        assert_relative_eq!(v.price_ratio, 1.0 / w.price_ratio, max_relative = 1e-12);
        for i in 0..2 {
            assert_relative_eq!(
                v.allocation.entry(0, i),
                w.allocation.entry(1, i),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                v.allocation.entry(1, i),
                w.allocation.entry(0, i),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn contract_curve_symmetric_diagonal() {
        let params = UtilityParams::two_goods(&[0.5, 0.5]).unwrap();
        let mid = contract_curve_two_agent_cd(&params, &[4.0, 4.0], 0.5).unwrap();
        assert_relative_eq!(mid.entry(0, 0), 2.0);
        assert_relative_eq!(mid.entry(1, 0), 2.0);
        let quarter = contract_curve_two_agent_cd(&params, &[4.0, 4.0], 0.25).unwrap();
        assert_relative_eq!(quarter.entry(0, 0), 1.0);
        assert_relative_eq!(quarter.entry(1, 0), 1.0);
        assert_relative_eq!(quarter.entry(0, 1), 3.0);
        assert_relative_eq!(quarter.entry(1, 1), 3.0);
    }

    #[test]
    fn contract_curve_has_zero_dispersion() {
        let params = UtilityParams::two_goods(&[0.3, 0.7]).unwrap();
        for share in [0.1, 0.35, 0.6, 0.9] {
            let point = contract_curve_two_agent_cd(&params, &[5.0, 2.0], share).unwrap();
            assert!(
                mrs_dispersion(&point, &params).unwrap() <= 1e-12,
                "share {share}"
            );
        }
    }

    #[test]
    fn contract_curve_sweeps_to_the_corners() {
        let params = UtilityParams::two_goods(&[0.4, 0.55]).unwrap();
        let totals = [3.0, 7.0];
        let lo = contract_curve_two_agent_cd(&params, &totals, 1e-6).unwrap();
        let hi = contract_curve_two_agent_cd(&params, &totals, 1.0 - 1e-6).unwrap();
        assert!(lo.entry(0, 0) < 1e-5 && lo.entry(1, 0) < 1e-4);
        assert!((totals[0] - hi.entry(0, 0)) < 1e-5 && (totals[1] - hi.entry(1, 0)) < 1e-4);
        // Connectedness: shares along a grid give monotone good-1 holdings.
        let mut prev = 0.0;
        for s in 1..20 {
            let p = contract_curve_two_agent_cd(&params, &totals, s as f64 / 20.0).unwrap();
            assert!(p.entry(0, 0) > prev);
            prev = p.entry(0, 0);
        }
    }

    #[test]
    fn contract_curve_rejects_out_of_range_share() {
        let params = UtilityParams::two_goods(&[0.5, 0.5]).unwrap();
        assert!(matches!(
            contract_curve_two_agent_cd(&params, &[4.0, 4.0], 0.0),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            contract_curve_two_agent_cd(&params, &[4.0, 4.0], 1.2),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn search_confirms_the_symmetric_equilibrium() {
        let params = UtilityParams::two_goods(&[0.5, 0.5]).unwrap();
        let equilibrium = Allocation::from_bundles(&[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        let report = brute_force_pareto_check(&equilibrium, &params, 0.05, 10_000, 7).unwrap();
        assert!(!report.improvement_found);
    }

    #[test]
    fn search_improves_the_initial_allocation() {
        let params = UtilityParams::two_goods(&[0.5, 0.5]).unwrap();
        let start = Allocation::from_bundles(&[vec![3.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let report = brute_force_pareto_check(&start, &params, 0.05, 10_000, 7).unwrap();
        assert!(report.improvement_found);
        let gains = report.improving_gains.unwrap();
        assert!(gains.iter().all(|&g| g >= -1e-12));
        assert!(gains.iter().any(|&g| g > 1e-12));
    }

    #[test]
    fn zero_radius_finds_nothing() {
        let params = UtilityParams::two_goods(&[0.5, 0.5]).unwrap();
        let start = Allocation::from_bundles(&[vec![3.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let report = brute_force_pareto_check(&start, &params, 0.0, 1000, 7).unwrap();
        assert!(!report.improvement_found);
    }

    #[test]
    fn search_is_reproducible() {
        let params = UtilityParams::two_goods(&[0.5, 0.5]).unwrap();
        let start = Allocation::from_bundles(&[vec![3.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let a = brute_force_pareto_check(&start, &params, 0.02, 500, 42).unwrap();
        let b = brute_force_pareto_check(&start, &params, 0.02, 500, 42).unwrap();
        assert_eq!(a.improvement_found, b.improvement_found);
        assert_eq!(a.improving_gains, b.improving_gains);
        assert_eq!(a.infeasible_samples, b.infeasible_samples);
    }
}
