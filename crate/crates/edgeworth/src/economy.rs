//! Pure-exchange economy state: allocations, Cobb-Douglas utilities,
//! gradients, and Pareto-optimality residuals.
//!
//! The economy has `n ≥ 2` agents and `m ≥ 2` goods. An [`Allocation`] is an
//! `m×n` matrix (rows are goods, columns are agents) whose per-good row sums
//! are conserved: the economy neither produces nor disposes of anything, so
//! the feasible set is a product of simplices (one per good). Each agent `i`
//! carries a Cobb-Douglas utility
//!
//! ```text
//! U_i(x) = Π_k x_k^{α_ik},     α_ik ∈ (0,1),  Σ_k α_ik = 1
//! ```
//!
//! with constant returns to scale. The contract curve is the set of
//! allocations where all utility gradients are pairwise proportional;
//! [`mrs_dispersion`] measures the distance from it as the worst pairwise
//! cosine defect, which extends to any number of goods without picking a
//! numeraire.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Holdings below this floor are refused by gradient evaluation: marginal
/// utilities diverge at the axes and the dynamics stops being Lipschitz
/// there, so failure is made explicit instead of silent.
pub const BOUNDARY_FLOOR: f64 = 1e-9;

/// Relative tolerance on per-good totals (pure exchange, no production).
pub const CONSERVATION_REL_TOL: f64 = 1e-9;

/// Tolerance on exponent sums (constant returns to scale).
pub const EXPONENT_SUM_TOL: f64 = 1e-12;

/// One agent's holdings: a nonnegative quantity of each good.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodsBundle {
    quantities: Vec<f64>,
}

impl GoodsBundle {
    pub fn new(quantities: Vec<f64>) -> Result<Self> {
        if quantities.len() < 2 {
            return Err(Error::Dimension {
                context: "goods bundle".into(),
                expected: 2,
                actual: quantities.len(),
            });
        }
        for (k, &q) in quantities.iter().enumerate() {
            if !q.is_finite() || q < 0.0 {
                return Err(Error::Validation(format!(
                    "bundle quantity for good {k} must be finite and nonnegative, got {q}"
                )));
            }
        }
        Ok(Self { quantities })
    }

    pub fn quantities(&self) -> &[f64] {
        &self.quantities
    }

    pub fn goods(&self) -> usize {
        self.quantities.len()
    }
}

/// Per-agent Cobb-Douglas exponent vectors.
///
/// Each agent has `m` strictly positive exponents in `(0,1)` summing to one.
/// The two-good case is the familiar `(α, 1−α)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityParams {
    exponents: Vec<Vec<f64>>,
}

impl UtilityParams {
    pub fn new(exponents: Vec<Vec<f64>>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::Validation(
                "utility parameters need at least one agent".into(),
            ));
        }
        let m = exponents[0].len();
        if m < 2 {
            return Err(Error::Dimension {
                context: "utility exponents per agent".into(),
                expected: 2,
                actual: m,
            });
        }
        for (i, row) in exponents.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension {
                    context: format!("exponents of agent {i}"),
                    expected: m,
                    actual: row.len(),
                });
            }
            let mut sum = 0.0;
            for (k, &a) in row.iter().enumerate() {
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::Validation(format!(
                        "exponents[{i}][{k}] must lie in (0,1), got {a}"
                    )));
                }
                sum += a;
            }
            if (sum - 1.0).abs() > EXPONENT_SUM_TOL {
                return Err(Error::Validation(format!(
                    "exponents[{i}] must sum to 1 within {EXPONENT_SUM_TOL:e}, got {sum}"
                )));
            }
        }
        Ok(Self { exponents })
    }

    /// Convenience constructor for two-good agents from their good-1
    /// exponents: agent `i` gets `(α_i, 1−α_i)`.
    pub fn two_goods(alphas: &[f64]) -> Result<Self> {
        Self::new(alphas.iter().map(|&a| vec![a, 1.0 - a]).collect())
    }

    pub fn agent_count(&self) -> usize {
        self.exponents.len()
    }

    pub fn good_count(&self) -> usize {
        self.exponents[0].len()
    }

    pub fn agent(&self, i: usize) -> &[f64] {
        &self.exponents[i]
    }

    pub fn exponents(&self) -> &[Vec<f64>] {
        &self.exponents
    }
}

/// The state of the economy: an `m×n` matrix of holdings together with the
/// fixed resource point (per-good totals) it must conserve.
///
/// Columns are agents; `bundle(i)` is agent `i`'s holdings. The totals are
/// captured once at construction and carried through a run unchanged, so
/// that integrator drift is measured against the initial resources.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    entries: DMatrix<f64>,
    totals: Vec<f64>,
}

impl Allocation {
    /// Builds an allocation from per-agent bundles; totals are the implied
    /// row sums.
    pub fn from_bundles(bundles: &[Vec<f64>]) -> Result<Self> {
        if bundles.len() < 2 {
            return Err(Error::Dimension {
                context: "allocation agents".into(),
                expected: 2,
                actual: bundles.len(),
            });
        }
        let m = bundles[0].len();
        if m < 2 {
            return Err(Error::Dimension {
                context: "allocation goods".into(),
                expected: 2,
                actual: m,
            });
        }
        let n = bundles.len();
        let mut flat = Vec::with_capacity(m * n);
        for (i, b) in bundles.iter().enumerate() {
            if b.len() != m {
                return Err(Error::Dimension {
                    context: format!("bundle of agent {i}"),
                    expected: m,
                    actual: b.len(),
                });
            }
            for (k, &q) in b.iter().enumerate() {
                if !q.is_finite() || q < 0.0 {
                    return Err(Error::Validation(format!(
                        "entry for good {k}, agent {i} must be finite and nonnegative, got {q}"
                    )));
                }
                flat.push(q);
            }
        }
        let entries = DMatrix::from_column_slice(m, n, &flat);
        let totals = row_sums(&entries);
        Ok(Self { entries, totals })
    }

    /// Builds an allocation that must match externally fixed totals within
    /// [`CONSERVATION_REL_TOL`].
    pub fn with_totals(entries: DMatrix<f64>, totals: Vec<f64>) -> Result<Self> {
        if entries.nrows() != totals.len() {
            return Err(Error::Dimension {
                context: "allocation totals".into(),
                expected: entries.nrows(),
                actual: totals.len(),
            });
        }
        let candidate = Self { entries, totals };
        let report = feasibility_check(&candidate);
        if !report.feasible {
            return Err(Error::Validation(format!(
                "allocation violates feasibility: {report}"
            )));
        }
        Ok(candidate)
    }

    /// Same state, new totals check skipped: used by the integrator which
    /// guarantees conservation structurally. Debug builds still assert.
    pub(crate) fn carrying_totals(entries: DMatrix<f64>, totals: Vec<f64>) -> Self {
        debug_assert_eq!(entries.nrows(), totals.len());
        Self { entries, totals }
    }

    pub fn goods(&self) -> usize {
        self.entries.nrows()
    }

    pub fn agents(&self) -> usize {
        self.entries.ncols()
    }

    /// Agent `i`'s holdings as a contiguous slice (goods in order).
    pub fn bundle(&self, agent: usize) -> &[f64] {
        let m = self.goods();
        &self.entries.as_slice()[agent * m..(agent + 1) * m]
    }

    pub fn entry(&self, good: usize, agent: usize) -> f64 {
        self.entries[(good, agent)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    /// True when every holding is strictly above `floor`.
    pub fn is_interior(&self, floor: f64) -> bool {
        self.entries.iter().all(|&q| q > floor)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Matrix of marginal utilities, one strictly positive column per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrix {
    entries: DMatrix<f64>,
}

impl GradientMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() < 2 || entries.ncols() < 1 {
            return Err(Error::Dimension {
                context: "gradient matrix".into(),
                expected: 2,
                actual: entries.nrows(),
            });
        }
        if entries.iter().any(|&g| g <= 0.0 || !g.is_finite()) {
            return Err(Error::Boundary(
                "marginal utilities must be strictly positive and finite".into(),
            ));
        }
        Ok(Self { entries })
    }

    /// Builds the matrix from per-agent gradient vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Dimension {
                context: "gradient matrix agents".into(),
                expected: 1,
                actual: 0,
            });
        }
        let m = columns[0].len();
        for (i, c) in columns.iter().enumerate() {
            if c.len() != m {
                return Err(Error::Dimension {
                    context: format!("gradient of agent {i}"),
                    expected: m,
                    actual: c.len(),
                });
            }
        }
        let flat: Vec<f64> = columns.iter().flatten().copied().collect();
        Self::new(DMatrix::from_column_slice(m, columns.len(), &flat))
    }

    pub fn goods(&self) -> usize {
        self.entries.nrows()
    }

    pub fn agents(&self) -> usize {
        self.entries.ncols()
    }

    pub fn agent(&self, i: usize) -> &[f64] {
        let m = self.goods();
        &self.entries.as_slice()[i * m..(i + 1) * m]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Cobb-Douglas utility `Π_k x_k^{α_k}`. Returns 0 when any holding is 0.
pub fn eval_utility(quantities: &[f64], exponents: &[f64]) -> Result<f64> {
    if quantities.len() != exponents.len() {
        return Err(Error::Dimension {
            context: "utility evaluation".into(),
            expected: exponents.len(),
            actual: quantities.len(),
        });
    }
    let mut u = 1.0;
    for (&x, &a) in quantities.iter().zip(exponents) {
        if x < 0.0 {
            return Err(Error::Boundary(format!(
                "utility is undefined for negative holding {x}"
            )));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        u *= x.powf(a);
    }
    Ok(u)
}

/// Gradient of the Cobb-Douglas utility: entry `k` is `α_k · U(x) / x_k`.
///
/// Refuses bundles with any holding at or below [`BOUNDARY_FLOOR`], where
/// the gradient blows up.
pub fn eval_gradient(quantities: &[f64], exponents: &[f64]) -> Result<Vec<f64>> {
    if quantities.len() != exponents.len() {
        return Err(Error::Dimension {
            context: "gradient evaluation".into(),
            expected: exponents.len(),
            actual: quantities.len(),
        });
    }
    if let Some((k, &x)) = quantities
        .iter()
        .enumerate()
        .find(|(_, &x)| x <= BOUNDARY_FLOOR)
    {
        return Err(Error::Boundary(format!(
            "holding of good {k} is {x}, at or below the floor {BOUNDARY_FLOOR:e}"
        )));
    }
    let u = eval_utility(quantities, exponents)?;
    Ok(quantities
        .iter()
        .zip(exponents)
        .map(|(&x, &a)| a * u / x)
        .collect())
}

/// Marginal utilities of every agent at `allocation`, one column per agent.
pub fn gradient_matrix(allocation: &Allocation, params: &UtilityParams) -> Result<GradientMatrix> {
    check_shapes(allocation, params)?;
    let m = allocation.goods();
    let n = allocation.agents();
    let mut entries = DMatrix::zeros(m, n);
    for i in 0..n {
        let g = eval_gradient(allocation.bundle(i), params.agent(i))?;
        for k in 0..m {
            entries[(k, i)] = g[k];
        }
    }
    GradientMatrix::new(entries)
}

/// Utility of every agent at `allocation`.
pub fn utilities(allocation: &Allocation, params: &UtilityParams) -> Result<Vec<f64>> {
    check_shapes(allocation, params)?;
    (0..allocation.agents())
        .map(|i| eval_utility(allocation.bundle(i), params.agent(i)))
        .collect()
}

/// The potential `Ū = Σ_i U_i`: bounded on the feasible set and strictly
/// increasing along any trajectory with trade, which is what certifies
/// convergence of the dynamics.
pub fn potential(allocation: &Allocation, params: &UtilityParams) -> Result<f64> {
    Ok(utilities(allocation, params)?.iter().sum())
}

/// Distance of `allocation` from the contract curve: the maximum over agent
/// pairs of `1 − cos(μ_i, μ_j)`.
///
/// Zero exactly when all gradients are pairwise proportional, i.e. the
/// allocation is Pareto optimal.
pub fn mrs_dispersion(allocation: &Allocation, params: &UtilityParams) -> Result<f64> {
    let gradients = gradient_matrix(allocation, params)?;
    Ok(mrs_dispersion_of(&gradients))
}

/// Same residual, computed from an already-evaluated gradient matrix.
pub fn mrs_dispersion_of(gradients: &GradientMatrix) -> f64 {
    let n = gradients.agents();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let defect = 1.0 - cosine(gradients.agent(i), gradients.agent(j));
            worst = worst.max(defect);
        }
    }
    worst
}

/// One violated constraint of the simplotope membership check.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityViolation {
    NegativeEntry {
        good: usize,
        agent: usize,
        value: f64,
    },
    Conservation {
        good: usize,
        expected: f64,
        actual: f64,
        relative_residual: f64,
    },
}

/// Outcome of [`feasibility_check`]: violations are reported, not raised.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<FeasibilityViolation>,
}

impl std::fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.feasible {
            return write!(f, "feasible");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| match v {
                FeasibilityViolation::NegativeEntry { good, agent, value } => {
                    format!("negative entry {value} at good {good}, agent {agent}")
                }
                FeasibilityViolation::Conservation {
                    good,
                    expected,
                    actual,
                    relative_residual,
                } => {
                    format!(
                        "good {good} total {actual} differs from {expected} \
                         (relative residual {relative_residual:e})"
                    )
                }
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Membership test for the multidimensional Edgeworth box: all entries
/// nonnegative and every per-good sum equal to its total within
/// [`CONSERVATION_REL_TOL`].
pub fn feasibility_check(allocation: &Allocation) -> FeasibilityReport {
    let mut violations = Vec::new();
    let m = allocation.goods();
    let n = allocation.agents();
    for i in 0..n {
        for k in 0..m {
            let value = allocation.entry(k, i);
            if value < 0.0 {
                violations.push(FeasibilityViolation::NegativeEntry {
                    good: k,
                    agent: i,
                    value,
                });
            }
        }
    }
    let sums = row_sums(allocation.entries());
    for (k, (&actual, &expected)) in sums.iter().zip(allocation.totals()).enumerate() {
        let scale = expected.abs().max(f64::MIN_POSITIVE);
        let relative_residual = (actual - expected).abs() / scale;
        if relative_residual > CONSERVATION_REL_TOL {
            violations.push(FeasibilityViolation::Conservation {
                good: k,
                expected,
                actual,
                relative_residual,
            });
        }
    }
    FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    }
}

/// Gradient matrix straight from a raw entries matrix (columns = agents).
/// Hot path of the integrator; same floor rules as [`eval_gradient`].
pub(crate) fn gradient_matrix_raw(
    entries: &DMatrix<f64>,
    params: &UtilityParams,
) -> Result<GradientMatrix> {
    let m = entries.nrows();
    let n = entries.ncols();
    if n != params.agent_count() || m != params.good_count() {
        return Err(Error::Dimension {
            context: "entries vs utility parameters".into(),
            expected: params.agent_count() * params.good_count(),
            actual: m * n,
        });
    }
    let mut out = DMatrix::zeros(m, n);
    let flat = entries.as_slice();
    for i in 0..n {
        let bundle = &flat[i * m..(i + 1) * m];
        let g = eval_gradient(bundle, params.agent(i))?;
        for k in 0..m {
            out[(k, i)] = g[k];
        }
    }
    GradientMatrix::new(out)
}

/// Per-agent utilities straight from a raw entries matrix. Callers must
/// have checked nonnegativity (the integrator floor-guards every state).
pub(crate) fn utilities_raw(entries: &DMatrix<f64>, params: &UtilityParams) -> Vec<f64> {
    let m = entries.nrows();
    let flat = entries.as_slice();
    (0..entries.ncols())
        .map(|i| {
            let bundle = &flat[i * m..(i + 1) * m];
            debug_assert!(bundle.iter().all(|&q| q >= 0.0));
            bundle
                .iter()
                .zip(params.agent(i))
                .map(|(&x, &a)| x.powf(a))
                .product()
        })
        .collect()
}

fn check_shapes(allocation: &Allocation, params: &UtilityParams) -> Result<()> {
    if allocation.agents() != params.agent_count() {
        return Err(Error::Dimension {
            context: "agents of allocation vs utility parameters".into(),
            expected: params.agent_count(),
            actual: allocation.agents(),
        });
    }
    if allocation.goods() != params.good_count() {
        return Err(Error::Dimension {
            context: "goods of allocation vs utility parameters".into(),
            expected: params.good_count(),
            actual: allocation.goods(),
        });
    }
    Ok(())
}

pub(crate) fn row_sums(entries: &DMatrix<f64>) -> Vec<f64> {
    (0..entries.nrows())
        .map(|k| (0..entries.ncols()).map(|i| entries[(k, i)]).sum())
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}
