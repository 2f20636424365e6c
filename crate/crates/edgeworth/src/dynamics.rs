//! Instantaneous fair-trade directions and the axioms they satisfy.
//!
//! A trading process assigns each agent a velocity `f_i` in goods space as a
//! function of everyone's marginal utilities, subject to three axioms:
//!
//! * **zero sum** — `Σ_i f_i = 0` (pure exchange, nothing created or lost);
//! * **trade** — if two gradients are linearly independent, somebody moves;
//! * **positive gradient** — `μ_i · f_i ≥ 0`, strictly when there is trade,
//!   so every instant of trade is a Pareto improvement.
//!
//! Fair trading is the egalitarian member of this family: in a bilateral
//! trade both agents receive the same instantaneous utility gain, which
//! forces the trade direction to be orthogonal to `μ_i + μ_j`. Within that
//! orthogonal subspace we take the single element in the plane spanned by
//! the two gradients: the vector rejection of `μ_i` from `μ_i + μ_j`,
//!
//! ```text
//! f'_ij = μ_i − [μ_i·(μ_i+μ_j) / |μ_i+μ_j|²] (μ_i+μ_j)
//! ```
//!
//! On a weighted network, each agent's velocity is the weight-averaged sum
//! of her pairwise directions. Without a network, requiring all pairwise
//! orthogonality constraints plus zero sum simultaneously yields a linear
//! system whose nullspace decides whether any multilateral fair trade exists
//! at all ([`multilateral_fair_solver`]); generically it is nontrivial only
//! when goods outnumber agents (`m ≥ n+1`).

use nalgebra::DMatrix;

use crate::economy::{dot, norm, GradientMatrix};
use crate::error::{Error, Result};

/// Gradient pairs closer than this angle (radians) are treated as
/// proportional: the rejection formula returns numerically tiny vectors
/// there and thresholding prevents drift at fixed points.
pub const PAIR_ANGLE_FLOOR: f64 = 1e-8;

/// Relative singular-value cutoff for nullspace extraction.
pub const NULLSPACE_REL_TOL: f64 = 1e-10;

/// The instantaneous trade directions of all agents: column `i` is `f_i`,
/// in goods per unit time. Columns sum to zero by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeField {
    directions: DMatrix<f64>,
}

impl TradeField {
    pub fn goods(&self) -> usize {
        self.directions.nrows()
    }

    pub fn agents(&self) -> usize {
        self.directions.ncols()
    }

    /// Agent `i`'s velocity in goods space.
    pub fn direction(&self, agent: usize) -> &[f64] {
        let m = self.goods();
        &self.directions.as_slice()[agent * m..(agent + 1) * m]
    }

    pub fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    /// Frobenius norm of the whole field; the stopping quantity of the
    /// integrator.
    pub fn norm(&self) -> f64 {
        self.directions.norm()
    }

    /// Worst absolute component of `Σ_i f_i` (should be ~0).
    pub fn zero_sum_residual(&self) -> f64 {
        let m = self.goods();
        let mut worst = 0.0f64;
        for k in 0..m {
            let s: f64 = (0..self.agents()).map(|i| self.directions[(k, i)]).sum();
            worst = worst.max(s.abs());
        }
        worst
    }

    /// Largest per-agent direction norm, the scale against which the
    /// zero-sum residual is judged.
    pub fn max_direction_norm(&self) -> f64 {
        (0..self.agents())
            .map(|i| norm(self.direction(i)))
            .fold(0.0, f64::max)
    }
}

/// Angle between two strictly positive vectors, computed through the unit
/// rejection so that tiny angles are not lost to cancellation.
pub fn gradient_angle(mu_i: &[f64], mu_j: &[f64]) -> f64 {
    let (ni, nj) = (norm(mu_i), norm(mu_j));
    let c = dot(mu_i, mu_j) / (ni * nj);
    // sin θ = |u − (u·v)v| for unit u, v; positive vectors keep θ < π/2.
    let s2: f64 = mu_i
        .iter()
        .zip(mu_j)
        .map(|(&a, &b)| {
            let r = a / ni - c * b / nj;
            r * r
        })
        .sum();
    s2.sqrt().clamp(-1.0, 1.0).asin()
}

/// Fair bilateral trade direction for the agent holding `mu_i` against a
/// partner holding `mu_j`: the rejection of `mu_i` from `mu_i + mu_j`.
///
/// Returns the zero vector exactly when the gradients are (numerically)
/// linearly dependent, i.e. their angle is below [`PAIR_ANGLE_FLOOR`].
pub fn pairwise_fair_direction(mu_i: &[f64], mu_j: &[f64]) -> Result<Vec<f64>> {
    check_pair(mu_i, mu_j)?;
    if gradient_angle(mu_i, mu_j) < PAIR_ANGLE_FLOOR {
        return Ok(vec![0.0; mu_i.len()]);
    }
    let sum: Vec<f64> = mu_i.iter().zip(mu_j).map(|(a, b)| a + b).collect();
    let coeff = dot(mu_i, &sum) / dot(&sum, &sum);
    Ok(mu_i.iter().zip(&sum).map(|(a, s)| a - coeff * s).collect())
}

/// Checks that the two pairwise directions cancel: `f'_ij + f'_ji = 0`
/// within 1e-12 per component.
pub fn pairwise_additive_inverse_check(mu_i: &[f64], mu_j: &[f64]) -> Result<bool> {
    let fij = pairwise_fair_direction(mu_i, mu_j)?;
    let fji = pairwise_fair_direction(mu_j, mu_i)?;
    Ok(fij.iter().zip(&fji).all(|(a, b)| (a + b).abs() <= 1e-12))
}

/// Fair trading on a weighted network: agent `i` moves along
/// `f_i = Σ_{j≠i} w_ij f'_ij`, with the self-term convention
/// `f'(μ_i, μ_i) = 0`.
///
/// Each unordered pair is evaluated once and applied antisymmetrically, so
/// the zero-sum axiom holds to the last bit.
pub fn network_trade_field(
    gradients: &GradientMatrix,
    weights: &DMatrix<f64>,
) -> Result<TradeField> {
    let n = gradients.agents();
    validate_weights(weights, n)?;
    let m = gradients.goods();
    let mut directions = DMatrix::zeros(m, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weights[(i, j)];
            if w == 0.0 {
                continue;
            }
            let d = pairwise_fair_direction(gradients.agent(i), gradients.agent(j))?;
            for k in 0..m {
                directions[(k, i)] += w * d[k];
                directions[(k, j)] -= w * d[k];
            }
        }
    }
    Ok(TradeField { directions })
}

/// Result of asking whether some joint trade satisfies every pairwise
/// fairness constraint and zero sum simultaneously, with no network.
#[derive(Debug, Clone)]
pub struct MultilateralSolution {
    /// Dimension of the solution space of the joint linear system.
    pub nullspace_dimension: usize,
    /// Orthonormal basis of that space; each element is an `m×n` matrix of
    /// per-agent trade directions (columns are agents).
    pub basis: Vec<DMatrix<f64>>,
    /// Whether a nonzero fair multilateral trade exists.
    pub trade_exists: bool,
    /// For each agent, an orthonormal basis (columns) of the directions
    /// compatible with all of her own pairwise orthogonality constraints.
    pub agent_bases: Vec<DMatrix<f64>>,
}

/// Assembles and solves the joint system
/// `{(μ_i+μ_j)·f_i = 0 for all i≠j;  Σ_i f_i = 0}`
/// over the stacked unknown `(f_1,…,f_n) ∈ R^{nm}`.
///
/// This is a diagnostic: the network dynamics never calls it. It exists to
/// check the existence law (generically, trade requires `m ≥ n+1` once
/// `n ≥ 3`) on concrete gradient sets.
pub fn multilateral_fair_solver(gradients: &GradientMatrix) -> Result<MultilateralSolution> {
    let n = gradients.agents();
    let m = gradients.goods();
    if n < 2 {
        return Err(Error::Dimension {
            context: "multilateral solver agents".into(),
            expected: 2,
            actual: n,
        });
    }
    let unknowns = n * m;
    let rows = n * (n - 1) + m;
    let mut a = DMatrix::zeros(rows.max(unknowns), unknowns);
    let mut row = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..m {
                a[(row, i * m + k)] = gradients.agent(i)[k] + gradients.agent(j)[k];
            }
            row += 1;
        }
    }
    for k in 0..m {
        for i in 0..n {
            a[(row + k, i * m + k)] = 1.0;
        }
    }

    let null = nullspace(&a);
    let basis: Vec<DMatrix<f64>> = null
        .iter()
        .map(|v| DMatrix::from_column_slice(m, n, v))
        .collect();

    let mut agent_bases = Vec::with_capacity(n);
    for i in 0..n {
        let mut c = DMatrix::zeros((n - 1).max(m), m);
        let mut r = 0;
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..m {
                c[(r, k)] = gradients.agent(i)[k] + gradients.agent(j)[k];
            }
            r += 1;
        }
        let vectors = nullspace(&c);
        let mut b = DMatrix::zeros(m, vectors.len());
        for (col, v) in vectors.iter().enumerate() {
            for k in 0..m {
                b[(k, col)] = v[k];
            }
        }
        agent_bases.push(b);
    }

    Ok(MultilateralSolution {
        nullspace_dimension: null.len(),
        trade_exists: !null.is_empty(),
        basis,
        agent_bases,
    })
}

/// Orthonormal nullspace basis of `a` via SVD. The matrix must have at
/// least as many rows as columns (pad with zero rows beforehand); singular
/// values below [`NULLSPACE_REL_TOL`] times the largest are treated as zero.
fn nullspace(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let cols = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("SVD with v_t requested");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let cutoff = NULLSPACE_REL_TOL * sigma_max;
    let mut out = Vec::new();
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            out.push((0..cols).map(|c| v_t[(idx, c)]).collect());
        }
    }
    out
}

/// Diagnostics of the three axioms for a concrete field at concrete
/// gradients. Findings are reported, never raised.
#[derive(Debug, Clone)]
pub struct AxiomReport {
    /// `max_k |Σ_i f_ik|`.
    pub zero_sum_residual: f64,
    /// Instantaneous utility derivative `μ_i · f_i` per agent; the positive
    /// gradient axiom demands each `≥ −1e-12`.
    pub utility_derivatives: Vec<f64>,
    /// Largest pairwise gradient angle found.
    pub max_pair_angle: f64,
    /// Whether some gradient pair is linearly independent (angle above
    /// [`PAIR_ANGLE_FLOOR`]), i.e. the trade axiom applies at all.
    pub independent_pair_present: bool,
    /// Whether some agent has a nonzero direction.
    pub trade_present: bool,
}

impl AxiomReport {
    pub fn min_utility_derivative(&self) -> f64 {
        self.utility_derivatives
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// All three axioms hold at the reported tolerances.
    pub fn axioms_hold(&self) -> bool {
        self.zero_sum_residual <= 1e-12 * self.scale().max(1e-300)
            && self.min_utility_derivative() >= -1e-12
            && (!self.independent_pair_present || self.trade_present)
    }

    fn scale(&self) -> f64 {
        self.utility_derivatives
            .iter()
            .map(|d| d.abs())
            .fold(1.0, f64::max)
    }
}

/// Evaluates the axiom diagnostics for `field` at `gradients`.
pub fn invariant_report(gradients: &GradientMatrix, field: &TradeField) -> Result<AxiomReport> {
    if gradients.agents() != field.agents() || gradients.goods() != field.goods() {
        return Err(Error::Dimension {
            context: "gradients vs trade field".into(),
            expected: gradients.agents() * gradients.goods(),
            actual: field.agents() * field.goods(),
        });
    }
    let n = gradients.agents();
    let utility_derivatives: Vec<f64> = (0..n)
        .map(|i| dot(gradients.agent(i), field.direction(i)))
        .collect();
    let mut max_pair_angle = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_pair_angle =
                max_pair_angle.max(gradient_angle(gradients.agent(i), gradients.agent(j)));
        }
    }
    let trade_present = (0..n).any(|i| norm(field.direction(i)) > 0.0);
    Ok(AxiomReport {
        zero_sum_residual: field.zero_sum_residual(),
        utility_derivatives,
        max_pair_angle,
        independent_pair_present: max_pair_angle > PAIR_ANGLE_FLOOR,
        trade_present,
    })
}

fn check_pair(mu_i: &[f64], mu_j: &[f64]) -> Result<()> {
    if mu_i.len() < 2 || mu_i.len() != mu_j.len() {
        return Err(Error::Dimension {
            context: "gradient pair".into(),
            expected: mu_i.len().max(2),
            actual: mu_j.len(),
        });
    }
    // Zero components are allowed here (unit-vector corner cases); negative
    // marginal utilities are not.
    if mu_i
        .iter()
        .chain(mu_j.iter())
        .any(|&g| g < 0.0 || !g.is_finite())
    {
        return Err(Error::Boundary(
            "marginal utilities must be nonnegative and finite".into(),
        ));
    }
    Ok(())
}

fn validate_weights(weights: &DMatrix<f64>, n: usize) -> Result<()> {
    if weights.nrows() != n || weights.ncols() != n {
        return Err(Error::Dimension {
            context: "weight matrix".into(),
            expected: n,
            actual: weights.nrows(),
        });
    }
    for i in 0..n {
        if weights[(i, i)].abs() > 1e-12 {
            return Err(Error::Network(format!(
                "diagonal weight w[{i}][{i}] = {} must be zero",
                weights[(i, i)]
            )));
        }
        for j in 0..n {
            let w = weights[(i, j)];
            if w < 0.0 || !w.is_finite() {
                return Err(Error::Network(format!(
                    "weight w[{i}][{j}] = {w} is negative"
                )));
            }
            if (w - weights[(j, i)]).abs() > 1e-12 {
                return Err(Error::Network(format!(
                    "weights are asymmetric at ({i},{j}): {w} vs {}",
                    weights[(j, i)]
                )));
            }
        }
    }
    Ok(())
}
