//! Adaptive integration of the trading dynamics to its Pareto fixed points.
//!
//! The state evolves by `dX/dt = F(X)` where `F` is the network trade field
//! of [`crate::dynamics::network_trade_field`] evaluated at the current
//! marginal utilities, optionally scaled by the speed parameter
//! (`time_scale`): speed rescales time, never trajectories. The field is
//! smooth on the interior of the feasible set, so an explicit embedded
//! Runge-Kutta 5(4) pair with proportional step control does the work;
//! stiffness only ever appears near the boundary of the goods space, where
//! the dynamics stops being Lipschitz. Steps that would cross the boundary
//! floor, decrease the potential, or decrease any agent's utility beyond
//! tiny slack are halved and retried, so every accepted step is a Pareto
//! improvement and conservation of each good holds to rounding.
//!
//! Termination is a dual criterion: the field norm falls below
//! `stop_field_norm` or the gradient-proportionality residual falls below
//! `stop_mrs_dispersion`. Runs that exhaust the boundary retries end with
//! [`Status::BoundaryApproach`] instead of silently clamping: such a
//! scenario violates the standing assumption that Pareto-improving paths
//! stay interior, and that must be visible.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{invariant_report, network_trade_field, AxiomReport, TradeField};
use crate::economy::{
    gradient_matrix, mrs_dispersion_of, utilities, Allocation, GradientMatrix, UtilityParams,
};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Per accepted step, the potential may not drop by more than this.
const POTENTIAL_STEP_SLACK: f64 = 1e-12;
/// Per accepted step, no agent's utility may drop by more than this.
const AGENT_UTILITY_STEP_SLACK: f64 = 1e-10;
/// Retry budget for constraint violations within one step.
const MAX_HALVINGS: u32 = 40;
/// Retry budget for error-controller rejections within one step.
const MAX_ERROR_REJECTS: u32 = 200;

/// Tunables of one integration run. Defaults terminate at a field norm of
/// `1e-8` or a gradient-proportionality residual of `1e-6`, whichever comes
/// first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// First attempted step size (time units).
    pub initial_step: f64,
    /// Per-component relative target for the embedded error estimate.
    pub relative_error_target: f64,
    /// Stop when the Frobenius norm of the trade field falls below this.
    pub stop_field_norm: f64,
    /// Stop when the pairwise gradient cosine defect falls below this.
    pub stop_mrs_dispersion: f64,
    /// Give up (status `MaxStepsReached`) past this simulation time.
    pub max_time: f64,
    /// Give up (status `MaxStepsReached`) past this many accepted steps.
    pub max_steps: u64,
    /// Holdings may never fall to or below this floor.
    pub boundary_floor: f64,
    /// Speed multiplier on the field; a pure time reparametrization.
    pub time_scale: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.01,
            relative_error_target: 1e-10,
            stop_field_norm: 1e-8,
            stop_mrs_dispersion: 1e-6,
            max_time: 1e6,
            max_steps: 2_000_000,
            boundary_floor: 1e-9,
            time_scale: 1.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("initial_step", self.initial_step),
            ("relative_error_target", self.relative_error_target),
            ("stop_field_norm", self.stop_field_norm),
            ("stop_mrs_dispersion", self.stop_mrs_dispersion),
            ("max_time", self.max_time),
            ("boundary_floor", self.boundary_floor),
            ("time_scale", self.time_scale),
        ];
        for (name, v) in positives {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "integrator.{name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        if self.max_steps < 1 {
            return Err(Error::Validation(
                "integrator.max_steps must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Applies `key=value` overrides, as accepted on the command line.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        let parse = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Validation(format!("cannot parse `{v}` as a number for {key}")))
        };
        match key {
            "initial_step" => self.initial_step = parse(value)?,
            "relative_error_target" => self.relative_error_target = parse(value)?,
            "stop_field_norm" => self.stop_field_norm = parse(value)?,
            "stop_mrs_dispersion" => self.stop_mrs_dispersion = parse(value)?,
            "max_time" => self.max_time = parse(value)?,
            "max_steps" => {
                self.max_steps = value.parse::<u64>().map_err(|_| {
                    Error::Validation(format!(
                        "cannot parse `{value}` as an integer for max_steps"
                    ))
                })?
            }
            "boundary_floor" => self.boundary_floor = parse(value)?,
            "time_scale" => self.time_scale = parse(value)?,
            other => {
                return Err(Error::Validation(format!(
                    "unknown integrator setting `{other}`"
                )))
            }
        }
        self.validate()
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// Stopping criterion met after at least one step.
    Converged,
    /// The initial allocation already satisfied the stopping criterion.
    AlreadyOptimal,
    /// Step or time budget exhausted first.
    MaxStepsReached,
    /// A step could not stay above the boundary floor after 40 halvings.
    BoundaryApproach,
}

impl Status {
    pub fn is_success(self) -> bool {
        matches!(self, Status::Converged | Status::AlreadyOptimal)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Per-step record kept alongside the sampled trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct StepDiagnostics {
    pub time: f64,
    pub step_size: f64,
    pub error_estimate: f64,
    pub field_norm: f64,
    pub potential_delta: f64,
    pub min_utility_delta: f64,
    pub halvings: u32,
    pub zero_sum_residual: f64,
    pub min_utility_derivative: f64,
}

/// The sampled path of one run: times, states, per-agent utilities, the
/// potential, and one diagnostics entry per recorded transition.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Allocation>,
    pub utilities: Vec<Vec<f64>>,
    pub potentials: Vec<f64>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &Allocation {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }
}

/// One solved point of the network-to-equilibrium map.
#[derive(Debug, Clone)]
pub struct EquilibriumRecord {
    pub probabilities: Vec<f64>,
    pub initial: Allocation,
    pub terminal: Allocation,
    pub initial_utilities: Vec<f64>,
    pub final_utilities: Vec<f64>,
    pub utility_gains: Vec<f64>,
    pub mrs_residual: f64,
    pub final_field_norm: f64,
    pub steps: u64,
    pub elapsed_time: f64,
    pub status: Status,
}

impl EquilibriumRecord {
    pub fn total_gain(&self) -> f64 {
        self.utility_gains.iter().sum()
    }
}

/// Dormand-Prince 5(4) tableau. Stage times are omitted: the field is
/// autonomous.
mod dp54 {
    pub const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    /// Fifth-order weights (identical to the last tableau row).
    pub const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    /// Embedded fourth-order weights.
    pub const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
}

enum StepFailure {
    /// The boundary floor could not be respected within the retry budget.
    Boundary { halvings: u32 },
    /// The controller shrank the step into oblivion.
    Diverged(String),
}

struct Accepted {
    state: DMatrix<f64>,
    utilities: Vec<f64>,
    potential: f64,
    h_used: f64,
    h_next: f64,
    error_estimate: f64,
    halvings: u32,
}

struct Engine<'a> {
    params: &'a UtilityParams,
    weights: &'a DMatrix<f64>,
    config: &'a IntegratorConfig,
    /// Per-good error scale: the average holding of that good.
    good_scale: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(
        params: &'a UtilityParams,
        weights: &'a DMatrix<f64>,
        config: &'a IntegratorConfig,
        totals: &[f64],
    ) -> Self {
        let n = params.agent_count() as f64;
        let good_scale = totals.iter().map(|t| t / n).collect();
        Self {
            params,
            weights,
            config,
            good_scale,
        }
    }

    fn gradients(&self, entries: &DMatrix<f64>) -> Result<GradientMatrix> {
        crate::economy::gradient_matrix_raw(entries, self.params)
    }

    /// Unscaled trade field at `entries`.
    fn field(&self, entries: &DMatrix<f64>) -> Result<TradeField> {
        network_trade_field(&self.gradients(entries)?, self.weights)
    }

    /// Right-hand side `time_scale · F(entries)`.
    fn rhs(&self, entries: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.field(entries)?.directions().clone() * self.config.time_scale)
    }

    fn utilities_of(&self, entries: &DMatrix<f64>) -> Vec<f64> {
        crate::economy::utilities_raw(entries, self.params)
    }

    /// One full tableau evaluation. `k1` is the precomputed RHS at `y`.
    /// Fails with `Err` when a stage leaves the domain of the gradients.
    fn rk_pair(
        &self,
        y: &DMatrix<f64>,
        k1: &DMatrix<f64>,
        h: f64,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let mut stages: Vec<DMatrix<f64>> = Vec::with_capacity(7);
        stages.push(k1.clone());
        for s in 1..7 {
            let mut y_stage = y.clone();
            for (j, k) in stages.iter().enumerate() {
                let a = dp54::A[s][j];
                if a != 0.0 {
                    y_stage += k * (a * h);
                }
            }
            stages.push(self.rhs(&y_stage)?);
        }
        let mut y5 = y.clone();
        let mut err = DMatrix::zeros(y.nrows(), y.ncols());
        for (j, k) in stages.iter().enumerate() {
            if dp54::B5[j] != 0.0 {
                y5 += k * (dp54::B5[j] * h);
            }
            let d = dp54::B5[j] - dp54::B4[j];
            if d != 0.0 {
                err += k * (d * h);
            }
        }
        Ok((y5, err))
    }

    fn error_norm(&self, y: &DMatrix<f64>, y5: &DMatrix<f64>, err: &DMatrix<f64>) -> f64 {
        let rtol = self.config.relative_error_target;
        let mut worst = 0.0f64;
        for i in 0..y.ncols() {
            for k in 0..y.nrows() {
                let scale = rtol * (self.good_scale[k] + y[(k, i)].abs().max(y5[(k, i)].abs()));
                worst = worst.max((err[(k, i)] / scale).abs());
            }
        }
        worst
    }

    /// Advances one accepted step from `y`, starting from the proposed step
    /// size `h` and never stepping past the remaining time budget.
    ///
    /// `elapsed` scales the smallest resolvable step: once the boundary
    /// keeps forcing `h` below that resolution the state is pinned against
    /// the floor and the run must surface `BoundaryApproach` instead of
    /// crawling one ulp at a time.
    #[allow(clippy::too_many_arguments)]
    fn advance(
        &self,
        y: &DMatrix<f64>,
        k1: &DMatrix<f64>,
        old_utilities: &[f64],
        old_potential: f64,
        mut h: f64,
        time_left: f64,
        elapsed: f64,
    ) -> std::result::Result<Accepted, StepFailure> {
        let mut halvings = 0u32;
        let mut error_rejects = 0u32;
        let h_min = 1e-13 * elapsed.abs().max(1.0);
        let halve_at_boundary = |h: &mut f64, halvings: &mut u32| {
            *halvings += 1;
            if *halvings > MAX_HALVINGS || *h * 0.5 < h_min {
                return Err(StepFailure::Boundary {
                    halvings: *halvings,
                });
            }
            *h *= 0.5;
            Ok(())
        };
        loop {
            h = h.min(time_left);
            if h <= 0.0 || !h.is_finite() {
                return Err(StepFailure::Diverged(format!(
                    "step size degenerated to {h}"
                )));
            }
            match self.rk_pair(y, k1, h) {
                Err(_) => {
                    // A stage left the domain of the gradients: treat like a
                    // boundary violation.
                    halve_at_boundary(&mut h, &mut halvings)?;
                }
                Ok((y5, err)) => {
                    let err_norm = self.error_norm(y, &y5, &err);
                    if err_norm > 1.0 {
                        error_rejects += 1;
                        if error_rejects > MAX_ERROR_REJECTS {
                            return Err(StepFailure::Diverged(
                                "error controller rejected the step 200 times".into(),
                            ));
                        }
                        let shrink = (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
                        h *= shrink;
                        continue;
                    }

                    if y5.iter().any(|&q| q <= self.config.boundary_floor) {
                        halve_at_boundary(&mut h, &mut halvings)?;
                        continue;
                    }

                    let new_utilities = self.utilities_of(&y5);
                    let new_potential: f64 = new_utilities.iter().sum();
                    let min_delta = new_utilities
                        .iter()
                        .zip(old_utilities)
                        .map(|(a, b)| a - b)
                        .fold(f64::INFINITY, f64::min);
                    if new_potential - old_potential < -POTENTIAL_STEP_SLACK
                        || min_delta < -AGENT_UTILITY_STEP_SLACK
                    {
                        halvings += 1;
                        if halvings > MAX_HALVINGS {
                            return Err(StepFailure::Diverged(format!(
                                "monotonicity could not be restored by halving \
                                 (potential delta {}, worst utility delta {min_delta})",
                                new_potential - old_potential
                            )));
                        }
                        h *= 0.5;
                        continue;
                    }

                    let grow = if err_norm > 0.0 {
                        (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                    } else {
                        5.0
                    };
                    return Ok(Accepted {
                        state: y5,
                        utilities: new_utilities,
                        potential: new_potential,
                        h_used: h,
                        h_next: h * grow,
                        error_estimate: err_norm,
                        halvings,
                    });
                }
            }
        }
    }
}

/// One adaptive step of the dynamics from `state`, starting at proposed
/// step size `h`.
///
/// Returns the new state, the accepted step size, and diagnostics. Totals
/// are carried over from `state` unchanged; the Runge-Kutta update combines
/// zero-sum fields linearly, so per-good sums are preserved to rounding.
pub fn step(
    state: &Allocation,
    params: &UtilityParams,
    network: &crate::networks::NetworkSpec,
    config: &IntegratorConfig,
    h: f64,
) -> Result<(Allocation, f64, StepDiagnostics)> {
    config.validate()?;
    if !state.is_interior(config.boundary_floor) {
        return Err(Error::Boundary(format!(
            "state is not strictly interior to the floor {:e}",
            config.boundary_floor
        )));
    }
    let engine = Engine::new(params, network.weights(), config, state.totals());
    let field = engine.field(state.entries())?;
    let k1 = field.directions() * config.time_scale;
    let old_utilities = engine.utilities_of(state.entries());
    let old_potential: f64 = old_utilities.iter().sum();
    let gradients = engine.gradients(state.entries())?;
    let report = invariant_report(&gradients, &field)?;
    match engine.advance(
        state.entries(),
        &k1,
        &old_utilities,
        old_potential,
        h,
        f64::INFINITY,
        0.0,
    ) {
        Ok(acc) => {
            let diag = StepDiagnostics {
                time: acc.h_used,
                step_size: acc.h_used,
                error_estimate: acc.error_estimate,
                field_norm: field.norm(),
                potential_delta: acc.potential - old_potential,
                min_utility_delta: acc
                    .utilities
                    .iter()
                    .zip(&old_utilities)
                    .map(|(a, b)| a - b)
                    .fold(f64::INFINITY, f64::min),
                halvings: acc.halvings,
                zero_sum_residual: report.zero_sum_residual,
                min_utility_derivative: report.min_utility_derivative(),
            };
            let new_state = Allocation::carrying_totals(acc.state, state.totals().to_vec());
            Ok((new_state, acc.h_used, diag))
        }
        Err(StepFailure::Boundary { halvings }) => Err(Error::Boundary(format!(
            "boundary approach: floor {:e} violated after {halvings} halvings",
            config.boundary_floor
        ))),
        Err(StepFailure::Diverged(msg)) => Err(Error::Integration(msg)),
    }
}

/// Integrates a scenario until the trade field vanishes, recording every
/// `stride`-th accepted step (the initial and final states always).
pub fn integrate_to_equilibrium(
    scenario: &Scenario,
    stride: u64,
) -> Result<(Trajectory, EquilibriumRecord)> {
    let config = &scenario.integrator;
    config.validate()?;
    let stride = stride.max(1);
    let initial = &scenario.endowments;
    if !initial.is_interior(config.boundary_floor) {
        return Err(Error::Boundary(format!(
            "initial allocation not strictly interior to the floor {:e} \
             (smallest holding {})",
            config.boundary_floor,
            initial.min_entry()
        )));
    }

    let engine = Engine::new(
        &scenario.params,
        scenario.network.weights(),
        config,
        initial.totals(),
    );
    let totals = initial.totals().to_vec();

    let mut y = initial.entries().clone();
    let mut current_utilities = engine.utilities_of(&y);
    let mut current_potential: f64 = current_utilities.iter().sum();
    let mut t = 0.0;
    let mut h = config.initial_step;
    let mut steps: u64 = 0;

    let mut trajectory = Trajectory {
        times: vec![0.0],
        states: vec![initial.clone()],
        utilities: vec![current_utilities.clone()],
        potentials: vec![current_potential],
        diagnostics: Vec::new(),
    };
    let mut last_recorded_step = 0u64;

    let initial_utilities = current_utilities.clone();
    let status;
    let final_field_norm;
    let mrs_residual;

    loop {
        let gradients = engine.gradients(&y)?;
        let field = network_trade_field(&gradients, scenario.network.weights())?;
        let norm = field.norm();
        let mrs = mrs_dispersion_of(&gradients);
        if norm <= config.stop_field_norm || mrs <= config.stop_mrs_dispersion {
            status = if steps == 0 {
                Status::AlreadyOptimal
            } else {
                Status::Converged
            };
            final_field_norm = norm;
            mrs_residual = mrs;
            break;
        }
        if steps >= config.max_steps || t >= config.max_time {
            status = Status::MaxStepsReached;
            final_field_norm = norm;
            mrs_residual = mrs;
            break;
        }

        let k1 = field.directions() * config.time_scale;
        let report = invariant_report(&gradients, &field)?;
        match engine.advance(
            &y,
            &k1,
            &current_utilities,
            current_potential,
            h,
            config.max_time - t,
            t,
        ) {
            Ok(acc) => {
                t += acc.h_used;
                steps += 1;
                h = acc.h_next;
                let record_now = steps.is_multiple_of(stride);
                if record_now {
                    trajectory.times.push(t);
                    trajectory.states.push(Allocation::carrying_totals(
                        acc.state.clone(),
                        totals.clone(),
                    ));
                    trajectory.utilities.push(acc.utilities.clone());
                    trajectory.potentials.push(acc.potential);
                    trajectory.diagnostics.push(StepDiagnostics {
                        time: t,
                        step_size: acc.h_used,
                        error_estimate: acc.error_estimate,
                        field_norm: norm,
                        potential_delta: acc.potential - current_potential,
                        min_utility_delta: acc
                            .utilities
                            .iter()
                            .zip(&current_utilities)
                            .map(|(a, b)| a - b)
                            .fold(f64::INFINITY, f64::min),
                        halvings: acc.halvings,
                        zero_sum_residual: report.zero_sum_residual,
                        min_utility_derivative: report.min_utility_derivative(),
                    });
                    last_recorded_step = steps;
                }
                y = acc.state;
                current_utilities = acc.utilities;
                current_potential = acc.potential;
            }
            Err(StepFailure::Boundary { .. }) => {
                status = Status::BoundaryApproach;
                final_field_norm = norm;
                mrs_residual = mrs;
                break;
            }
            Err(StepFailure::Diverged(msg)) => {
                return Err(Error::Integration(msg));
            }
        }
    }

    if last_recorded_step != steps {
        trajectory.times.push(t);
        trajectory
            .states
            .push(Allocation::carrying_totals(y.clone(), totals.clone()));
        trajectory.utilities.push(current_utilities.clone());
        trajectory.potentials.push(current_potential);
    }

    let terminal = Allocation::carrying_totals(y, totals);
    let utility_gains: Vec<f64> = current_utilities
        .iter()
        .zip(&initial_utilities)
        .map(|(a, b)| a - b)
        .collect();
    let record = EquilibriumRecord {
        probabilities: scenario.network.probabilities().to_vec(),
        initial: initial.clone(),
        terminal,
        initial_utilities,
        final_utilities: current_utilities,
        utility_gains,
        mrs_residual,
        final_field_norm,
        steps,
        elapsed_time: t,
        status,
    };
    Ok((trajectory, record))
}

/// Outcome of the equal-gains test on a two-agent trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct EqualGainsReport {
    /// `max_t |ΔU_1(t) − ΔU_2(t)|` over the recorded samples.
    pub max_deviation: f64,
    /// `ΔU_1 + ΔU_2` at the end of the run.
    pub total_gain: f64,
    /// Whether the deviation stays within `1e-6` of the total gain.
    pub passes: bool,
}

/// Checks that the two agents' running utility gains coincide: the fair
/// path is the 45-degree line in utility space.
pub fn equal_gains_check(trajectory: &Trajectory) -> Result<EqualGainsReport> {
    let agents = trajectory
        .utilities
        .first()
        .map(|u| u.len())
        .unwrap_or_default();
    if agents != 2 {
        return Err(Error::Dimension {
            context: "equal-gains check".into(),
            expected: 2,
            actual: agents,
        });
    }
    let u0 = &trajectory.utilities[0];
    let mut max_deviation = 0.0f64;
    for u in &trajectory.utilities {
        let d1 = u[0] - u0[0];
        let d2 = u[1] - u0[1];
        max_deviation = max_deviation.max((d1 - d2).abs());
    }
    let last = trajectory.utilities.last().unwrap();
    let total_gain = (last[0] - u0[0]) + (last[1] - u0[1]);
    Ok(EqualGainsReport {
        max_deviation,
        total_gain,
        passes: max_deviation <= 1e-6 * total_gain.max(0.0),
    })
}

/// Conservation, monotonicity, and axiom residuals over a whole run.
#[derive(Debug, Clone, Serialize)]
pub struct RunInvariantReport {
    /// Worst relative drift of any per-good total across recorded states.
    pub conservation_max_rel_drift: f64,
    /// Smallest per-transition potential change (must stay above `−1e-10`).
    pub min_potential_step_delta: f64,
    /// Smallest per-transition per-agent utility change (above `−1e-8`).
    pub min_utility_step_delta: f64,
    /// Worst zero-sum residual of the field over recorded transitions.
    pub max_zero_sum_residual: f64,
    /// Smallest instantaneous utility derivative seen (must be `≥ −1e-12`).
    pub min_utility_derivative: f64,
    pub monotone_potential: bool,
    pub individually_rational: bool,
    pub conserved: bool,
}

impl RunInvariantReport {
    pub fn all_hold(&self) -> bool {
        self.monotone_potential && self.individually_rational && self.conserved
    }
}

/// Audits a recorded trajectory against the conservation and monotonicity
/// guarantees.
pub fn run_invariant_report(trajectory: &Trajectory) -> RunInvariantReport {
    let mut conservation_max_rel_drift = 0.0f64;
    for state in &trajectory.states {
        let report = crate::economy::feasibility_check(state);
        for violation in &report.violations {
            if let crate::economy::FeasibilityViolation::Conservation {
                relative_residual, ..
            } = violation
            {
                conservation_max_rel_drift = conservation_max_rel_drift.max(*relative_residual);
            }
        }
        // The check has a hard tolerance; also track sub-tolerance drift.
        for (k, &total) in state.totals().iter().enumerate() {
            let sum: f64 = (0..state.agents()).map(|i| state.entry(k, i)).sum();
            conservation_max_rel_drift = conservation_max_rel_drift
                .max((sum - total).abs() / total.abs().max(f64::MIN_POSITIVE));
        }
    }

    let mut min_potential_step_delta = f64::INFINITY;
    for pair in trajectory.potentials.windows(2) {
        min_potential_step_delta = min_potential_step_delta.min(pair[1] - pair[0]);
    }
    let mut min_utility_step_delta = f64::INFINITY;
    for pair in trajectory.utilities.windows(2) {
        for (after, before) in pair[1].iter().zip(&pair[0]) {
            min_utility_step_delta = min_utility_step_delta.min(after - before);
        }
    }
    let max_zero_sum_residual = trajectory
        .diagnostics
        .iter()
        .map(|d| d.zero_sum_residual)
        .fold(0.0, f64::max);
    let min_utility_derivative = trajectory
        .diagnostics
        .iter()
        .map(|d| d.min_utility_derivative)
        .fold(f64::INFINITY, f64::min);

    RunInvariantReport {
        conservation_max_rel_drift,
        min_potential_step_delta,
        min_utility_step_delta,
        max_zero_sum_residual,
        min_utility_derivative: if min_utility_derivative.is_finite() {
            min_utility_derivative
        } else {
            0.0
        },
        monotone_potential: min_potential_step_delta == f64::INFINITY
            || min_potential_step_delta >= -1e-10,
        individually_rational: min_utility_step_delta == f64::INFINITY
            || min_utility_step_delta >= -1e-8,
        conserved: conservation_max_rel_drift <= 1e-9,
    }
}

/// Replays the axiom diagnostics at an arbitrary allocation of a scenario.
pub fn invariant_report_at(
    allocation: &Allocation,
    params: &UtilityParams,
    network: &crate::networks::NetworkSpec,
) -> Result<AxiomReport> {
    let gradients = gradient_matrix(allocation, params)?;
    let field = network_trade_field(&gradients, network.weights())?;
    invariant_report(&gradients, &field)
}

/// Utilities of a scenario's endowment, a convenience for reports.
pub fn initial_utilities(scenario: &Scenario) -> Result<Vec<f64>> {
    utilities(&scenario.endowments, &scenario.params)
}
