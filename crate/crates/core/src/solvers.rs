//! The five projection iterations and the run engine.
//!
//! | name  | update |
//! |-------|--------|
//! | EGM   | `y = P_C(x − λAx)`, `x⁺ = P_C(x − λAy)` |
//! | TEGM  | `y = P_C(x − λAx)`, `x⁺ = y − λ(Ay − Ax)` |
//! | VSEGM | `y = P_C(x − λₙAx)`, `z = P_T(x − λₙAy)`, `x⁺ = αₙf(x) + (1 − αₙ)z` |
//! | THEGM | `y = P_C(x − λₙAx)`, `z = y − λₙ(Ay − Ax)`, `x⁺ = αₙf(x) + (1 − αₙ)z` |
//! | VTEGM | `y = P_C(x − λAx)`, `z = y − λ(Ay − Ax)`, `x⁺ = αₙf(x) + βₙz + eₙ` |
//!
//! where `T = {w : ⟨x − λₙAx − y, w − y⟩ ≤ 0}` in VSEGM. VSEGM picks `λₙ` by
//! the residual line search, THEGM by the Tseng line search.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Result, ViError};
use crate::hilbert::{Space, Vector};
use crate::operators::{Contraction, Operator};
use crate::schedules::{
    add_error, eval_schedule, in_unit, linesearch_residual, linesearch_tseng, scalars, ScheduleSpec,
    StepPolicy,
};
use crate::sets::ConvexSet;

/// Consecutive iterations of large residual and growing norm that trigger
/// the "possibly empty" diagnostic.
pub const EMPTINESS_WINDOW: u64 = 100;
/// Over the window, `‖x‖` must grow by at least this fraction of the summed
/// residuals (escape at a linear rate, not a slow approach to a far solution).
const ESCAPE_RATE: f64 = 0.1;
/// Over the window, the residual must keep at least this fraction of its
/// starting value.
const RESIDUAL_RETENTION: f64 = 0.9;
const REFERENCE_RESIDUAL_TOL: f64 = 1e-6;

/// Problem data for `VI(C, A)` plus the contraction used by the viscosity
/// methods.
#[derive(Debug, Clone)]
pub struct VIProblem {
    space: Arc<Space>,
    operator: Operator,
    set: ConvexSet,
    contraction: Contraction,
    lipschitz: f64,
    initial: Vector,
    reference: Option<Vector>,
}

impl VIProblem {
    /// Checks that every piece lives in `space` and that `A` is monotone.
    /// The Lipschitz constant is taken from
    /// [`Operator::lipschitz_upper_bound`].
    pub fn new(
        space: Arc<Space>,
        operator: Operator,
        set: ConvexSet,
        contraction: Contraction,
        initial: Vector,
    ) -> Result<VIProblem> {
        operator.check_space(&space)?;
        set.check_space(&space)?;
        contraction.check_space(&space)?;
        if !initial.in_space(&space) {
            return Err(ViError::DimensionMismatch {
                expected: space.dim(),
                found: initial.dim(),
            });
        }
        if !operator.is_monotone() {
            return Err(ViError::InvalidProblem("operator is not monotone".into()));
        }
        let lipschitz = operator.lipschitz_upper_bound()?;
        Ok(VIProblem {
            space,
            operator,
            set,
            contraction,
            lipschitz,
            initial,
            reference: None,
        })
    }

    /// Attaches a known solution, used for distance columns in traces. Its
    /// natural residual (at `λ = 1`) must be at most `1e-6`.
    pub fn with_reference(mut self, reference: Vector) -> Result<VIProblem> {
        if !reference.in_space(&self.space) {
            return Err(ViError::DimensionMismatch {
                expected: self.space.dim(),
                found: reference.dim(),
            });
        }
        let r = natural_residual(&self, &reference, 1.0);
        if r > REFERENCE_RESIDUAL_TOL {
            return Err(ViError::InvalidProblem(format!(
                "reference solution has natural residual {r:e}"
            )));
        }
        self.reference = Some(reference);
        Ok(self)
    }

    pub fn with_initial(mut self, initial: Vector) -> Result<VIProblem> {
        if !initial.in_space(&self.space) {
            return Err(ViError::DimensionMismatch {
                expected: self.space.dim(),
                found: initial.dim(),
            });
        }
        self.initial = initial;
        Ok(self)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn contraction(&self) -> &Contraction {
        &self.contraction
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn initial(&self) -> &Vector {
        &self.initial
    }

    pub fn reference(&self) -> Option<&Vector> {
        self.reference.as_ref()
    }

    fn forward_project(&self, lambda: f64, x: &Vector, ax: &Vector) -> Vector {
        self.set.project(&x.add_scaled(-lambda, ax))
    }
}

/// `‖x − P_C(x − λAx)‖`, zero exactly on solutions.
pub fn natural_residual(problem: &VIProblem, x: &Vector, lambda: f64) -> f64 {
    let ax = problem.operator.apply(x);
    x.distance(&problem.forward_project(lambda, x, &ax))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Egm,
    Tegm,
    Vsegm,
    Thegm,
    Vtegm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Egm,
        Algorithm::Tegm,
        Algorithm::Vsegm,
        Algorithm::Thegm,
        Algorithm::Vtegm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Egm => "egm",
            Algorithm::Tegm => "tegm",
            Algorithm::Vsegm => "vsegm",
            Algorithm::Thegm => "thegm",
            Algorithm::Vtegm => "vtegm",
        }
    }

    pub fn needs_schedule(&self) -> bool {
        matches!(self, Algorithm::Vsegm | Algorithm::Thegm | Algorithm::Vtegm)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = ViError;

    fn from_str(s: &str) -> Result<Algorithm> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                ViError::Usage(format!(
                    "unknown algorithm {s:?} (expected egm, tegm, vsegm, thegm or vtegm)"
                ))
            })
    }
}

/// Everything one iteration produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub lambda: f64,
    pub y: Vector,
    /// Intermediate point; equals `next` for EGM and TEGM.
    pub z: Vector,
    pub next: Vector,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub error_norm: Option<f64>,
    pub beta_out_of_range: bool,
    pub linesearch_trials: u32,
}

/// Korpelevich extragradient step.
pub fn step_egm(problem: &VIProblem, lambda: f64, x: &Vector) -> Vector {
    let y = problem.forward_project(lambda, x, &problem.operator.apply(x));
    problem.forward_project(lambda, x, &problem.operator.apply(&y))
}

/// Tseng forward-backward-forward step; returns `(y, x⁺)`.
pub fn step_tegm(problem: &VIProblem, lambda: f64, x: &Vector) -> (Vector, Vector) {
    let ax = problem.operator.apply(x);
    let y = problem.forward_project(lambda, x, &ax);
    let ay = problem.operator.apply(&y);
    let coords = y
        .coords()
        .iter()
        .zip(ay.coords().iter().zip(ax.coords()))
        .map(|(yc, (a, b))| yc - lambda * (a - b))
        .collect();
    let next = Vector::from_raw(&problem.space, coords);
    (y, next)
}

fn viscosity_mix(problem: &VIProblem, alpha: f64, x: &Vector, z: &Vector) -> Vector {
    problem.contraction.apply(x).lin_comb(alpha, z, 1.0 - alpha)
}

/// Viscosity subgradient extragradient step with the residual line search.
pub fn step_vsegm(
    problem: &VIProblem,
    policy: &StepPolicy,
    schedule: &ScheduleSpec,
    n: u64,
    x: &Vector,
) -> Result<Step> {
    let coeffs = eval_schedule(schedule, n, &problem.space)?;
    let search = linesearch_residual(policy, &problem.operator, &problem.set, x)?;
    let lambda = search.lambda;
    let y = search.y;
    let ax = problem.operator.apply(x);
    let ay = problem.operator.apply(&y);
    let target = x.add_scaled(-lambda, &ay);
    let normal = &x.add_scaled(-lambda, &ax) - &y;
    let z = if normal.norm_squared() == 0.0 {
        target
    } else {
        ConvexSet::halfspace(normal, y.clone())?.project(&target)
    };
    let next = viscosity_mix(problem, coeffs.alpha, x, &z);
    Ok(Step {
        lambda,
        y,
        z,
        next,
        alpha: Some(coeffs.alpha),
        beta: Some(1.0 - coeffs.alpha),
        error_norm: Some(0.0),
        beta_out_of_range: !(0.0..=1.0).contains(&coeffs.alpha),
        linesearch_trials: search.trials,
    })
}

/// Viscosity Tseng step with the Tseng line search. A fixed policy is
/// accepted as an extension and simply uses its `λ`.
pub fn step_thegm(
    problem: &VIProblem,
    policy: &StepPolicy,
    schedule: &ScheduleSpec,
    n: u64,
    x: &Vector,
) -> Result<Step> {
    let coeffs = eval_schedule(schedule, n, &problem.space)?;
    let ax = problem.operator.apply(x);
    let (lambda, y, trials) = match *policy {
        StepPolicy::Fixed { lambda } => (lambda, problem.forward_project(lambda, x, &ax), 0),
        _ => {
            let s = linesearch_tseng(policy, &problem.operator, &problem.set, x)?;
            (s.lambda, s.y, s.trials)
        }
    };
    let ay = problem.operator.apply(&y);
    let z = y.add_scaled(-lambda, &(&ay - &ax));
    let next = viscosity_mix(problem, coeffs.alpha, x, &z);
    Ok(Step {
        lambda,
        y,
        z,
        next,
        alpha: Some(coeffs.alpha),
        beta: Some(1.0 - coeffs.alpha),
        error_norm: Some(0.0),
        beta_out_of_range: !(0.0..=1.0).contains(&coeffs.alpha),
        linesearch_trials: trials,
    })
}

/// Viscosity Tseng step with computational errors:
/// `x⁺ = αₙ f(x) + βₙ z + eₙ`.
pub fn step_vtegm(
    problem: &VIProblem,
    lambda: f64,
    schedule: &ScheduleSpec,
    n: u64,
    x: &Vector,
) -> Result<Step> {
    let (alpha, beta, _, error_norm) = scalars(schedule, n)?;
    let (y, z) = step_tegm(problem, lambda, x);
    let fx = problem.contraction.apply(x);
    let mut coords: Vec<f64> = fx
        .coords()
        .iter()
        .zip(z.coords())
        .map(|(f, zc)| alpha * f + beta * zc)
        .collect();
    add_error(schedule, error_norm, &mut coords, &problem.space)?;
    Ok(Step {
        lambda,
        y,
        z,
        next: Vector::from_raw(&problem.space, coords),
        alpha: Some(alpha),
        beta: Some(beta),
        error_norm: Some(error_norm),
        beta_out_of_range: !(in_unit(alpha) && in_unit(beta)),
        linesearch_trials: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub residual_tol: f64,
    pub max_iters: u64,
    /// Iterate-norm blow-up threshold.
    pub divergence_norm: f64,
    /// Stop with [`RunStatus::Diverged`] once the emptiness diagnostic fires.
    pub halt_on_empty_hint: bool,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            residual_tol: 1e-8,
            max_iters: 10_000,
            divergence_norm: 1e12,
            halt_on_empty_hint: true,
        }
    }
}

impl StoppingRule {
    fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(ViError::Usage("residual tolerance must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(ViError::Usage("max_iters must be positive".into()));
        }
        if !(self.divergence_norm > 0.0) {
            return Err(ViError::Usage("divergence norm must be positive".into()));
        }
        Ok(())
    }

    fn emptiness_threshold(&self) -> f64 {
        (10.0 * self.residual_tol).max(1e-6)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIters,
    Diverged,
    LinesearchFailed,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max_iters",
            RunStatus::Diverged => "diverged",
            RunStatus::LinesearchFailed => "linesearch_failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: u64,
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub err_norm: Option<f64>,
    /// `‖x_n − y_n‖`.
    pub residual: f64,
    /// `‖x_{n+1} − x_n‖`.
    pub step_norm: f64,
    /// `‖x_n‖`.
    pub iterate_norm: f64,
    /// `‖x_n − x*‖` when a reference solution is known.
    pub dist_to_reference: Option<f64>,
}

/// Heuristic evidence that `VI(C, A)` is empty: bounded iterates with
/// vanishing residual along a subsequence are necessary for a solution to
/// exist, so a residual bounded away from zero while `‖x_n‖` keeps growing
/// points the other way. The diagnostic also asks that `‖x_n‖` grow at a
/// rate comparable to the residual and that the residual not decay over the
/// window, which screens out slow approaches to a distant solution. Never a
/// certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct EmptinessDiagnostic {
    pub min_residual: f64,
    pub residual_floor: f64,
    /// Length of the final run of iterations with residual above the floor
    /// and increasing iterate norm.
    pub growth_streak: u64,
    pub possibly_empty: bool,
}

impl fmt::Display for EmptinessDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.possibly_empty {
            write!(
                f,
                "VI(C,A) possibly empty: residual >= {:e} with growing iterate norm for {} consecutive iterations (min residual {})",
                self.residual_floor, self.growth_streak, self.min_residual
            )
        } else {
            write!(
                f,
                "no emptiness evidence (min residual {}, growth streak {})",
                self.min_residual, self.growth_streak
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub algorithm: Algorithm,
    pub rows: Vec<TraceRow>,
    pub status: RunStatus,
    /// Last iterate reached; for a converged run, the certified point.
    pub final_iterate: Vector,
    /// Present when the run diverged.
    pub diagnostic: Option<EmptinessDiagnostic>,
    /// Iteration index where a non-finite value appeared.
    pub non_finite_at: Option<u64>,
    pub warnings: Vec<String>,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.rows.last().map(|r| r.residual)
    }

    pub fn min_residual(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.residual).reduce(f64::min)
    }

    /// First iteration whose residual is at most `tol`.
    pub fn iterations_to(&self, tol: f64) -> Option<u64> {
        self.rows.iter().find(|r| r.residual <= tol).map(|r| r.iter)
    }
}

fn check_compatibility(
    problem: &VIProblem,
    algorithm: Algorithm,
    policy: &StepPolicy,
    schedule: Option<&ScheduleSpec>,
) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    let fixed_lambda = |policy: &StepPolicy| -> Result<()> {
        if let StepPolicy::Fixed { lambda } = *policy {
            if lambda * problem.lipschitz >= 1.0 {
                return Err(ViError::Usage(format!(
                    "fixed step needs lambda*L < 1, got {lambda} * {} = {}",
                    problem.lipschitz,
                    lambda * problem.lipschitz
                )));
            }
        }
        Ok(())
    };
    match (algorithm, policy) {
        (Algorithm::Egm | Algorithm::Tegm | Algorithm::Vtegm, StepPolicy::Fixed { .. }) => {
            fixed_lambda(policy)?
        }
        (Algorithm::Vsegm, StepPolicy::ResidualLinesearch { .. }) => {}
        (Algorithm::Thegm, StepPolicy::TsengLinesearch { .. }) => {}
        (Algorithm::Thegm, StepPolicy::Fixed { .. }) => {
            fixed_lambda(policy)?;
            warnings.push("thegm with a fixed step size (extension, no line search)".to_string());
        }
        (a, p) => {
            return Err(ViError::Usage(format!(
                "{a} cannot run with a {} step policy",
                p.name()
            )))
        }
    }
    if algorithm.needs_schedule() {
        let s = schedule.ok_or_else(|| ViError::Usage(format!("{algorithm} needs a schedule")))?;
        s.check_space(&problem.space)?;
    }
    Ok(warnings)
}

fn advance(
    problem: &VIProblem,
    algorithm: Algorithm,
    policy: &StepPolicy,
    schedule: Option<&ScheduleSpec>,
    n: u64,
    x: &Vector,
) -> Result<Step> {
    let fixed = match *policy {
        StepPolicy::Fixed { lambda } => lambda,
        _ => f64::NAN,
    };
    match algorithm {
        Algorithm::Egm => {
            let ax = problem.operator.apply(x);
            let y = problem.forward_project(fixed, x, &ax);
            let next = problem.forward_project(fixed, x, &problem.operator.apply(&y));
            Ok(Step {
                lambda: fixed,
                y,
                z: next.clone(),
                next,
                alpha: None,
                beta: None,
                error_norm: None,
                beta_out_of_range: false,
                linesearch_trials: 0,
            })
        }
        Algorithm::Tegm => {
            let (y, next) = step_tegm(problem, fixed, x);
            Ok(Step {
                lambda: fixed,
                y,
                z: next.clone(),
                next,
                alpha: None,
                beta: None,
                error_norm: None,
                beta_out_of_range: false,
                linesearch_trials: 0,
            })
        }
        // schedules are checked present by check_compatibility
        Algorithm::Vsegm => step_vsegm(problem, policy, schedule.unwrap(), n, x),
        Algorithm::Thegm => step_thegm(problem, policy, schedule.unwrap(), n, x),
        Algorithm::Vtegm => step_vtegm(problem, fixed, schedule.unwrap(), n, x),
    }
}

/// Sliding window over the current growth streak.
#[derive(Default)]
struct EscapeWindow {
    /// `(‖x_n‖, ‖x_{n+1}‖, residual_n)`
    entries: VecDeque<(f64, f64, f64)>,
    residual_sum: f64,
}

impl EscapeWindow {
    fn push(&mut self, norm: f64, next_norm: f64, residual: f64) {
        self.entries.push_back((norm, next_norm, residual));
        self.residual_sum += residual;
        if self.entries.len() as u64 > EMPTINESS_WINDOW {
            let (_, _, r) = self.entries.pop_front().unwrap();
            self.residual_sum -= r;
        }
    }

    fn clear(&mut self) {
        self.entries.clear();
        self.residual_sum = 0.0;
    }

    fn fired(&self) -> bool {
        if (self.entries.len() as u64) < EMPTINESS_WINDOW {
            return false;
        }
        let (first_norm, _, first_res) = self.entries[0];
        let (_, last_norm, last_res) = self.entries[self.entries.len() - 1];
        last_norm - first_norm >= ESCAPE_RATE * self.residual_sum
            && last_res >= RESIDUAL_RETENTION * first_res
    }
}

/// Iterates `algorithm` from the problem's initial point.
///
/// Each iteration computes `y_n` first and records `‖x_n − y_n‖`; the run
/// stops as converged once that residual is at most `residual_tol`, with
/// `x_n` as the final iterate. It stops as diverged when `‖x_n‖` exceeds
/// `divergence_norm`, when a non-finite value appears, or (if enabled) when
/// the emptiness diagnostic fires.
pub fn run(
    problem: &VIProblem,
    algorithm: Algorithm,
    policy: &StepPolicy,
    schedule: Option<&ScheduleSpec>,
    stopping: &StoppingRule,
) -> Result<SolverTrace> {
    stopping.validate()?;
    let mut warnings = check_compatibility(problem, algorithm, policy, schedule)?;
    let start = if algorithm.needs_schedule() {
        schedule.map_or(1, |s| s.start_index())
    } else {
        1
    };
    let floor = stopping.emptiness_threshold();
    let mut rows = Vec::new();
    let mut x = problem.initial.clone();
    let mut status = RunStatus::MaxIters;
    let mut non_finite_at = None;
    let mut streak = 0u64;
    let mut escape = EscapeWindow::default();
    let mut min_residual = f64::INFINITY;
    let mut warned_range = false;

    for n in start..start + stopping.max_iters {
        let step = match advance(problem, algorithm, policy, schedule, n, &x) {
            Ok(step) => step,
            Err(ViError::LineSearchFailed { trials }) => {
                warnings.push(format!("line search failed at n = {n} after {trials} trials"));
                status = RunStatus::LinesearchFailed;
                break;
            }
            Err(e) => return Err(e),
        };
        if step.beta_out_of_range && !warned_range {
            warned_range = true;
            warnings.push(format!(
                "alpha_n or beta_n outside [0, 1] at n = {n} (alpha = {}, beta = {})",
                step.alpha.unwrap_or(f64::NAN),
                step.beta.unwrap_or(f64::NAN)
            ));
        }
        let residual = x.distance(&step.y);
        let iterate_norm = x.norm();
        let next_norm = step.next.norm();
        rows.push(TraceRow {
            iter: n,
            lambda: step.lambda,
            alpha: step.alpha,
            beta: step.beta,
            err_norm: step.error_norm,
            residual,
            step_norm: step.next.distance(&x),
            iterate_norm,
            dist_to_reference: problem.reference.as_ref().map(|r| x.distance(r)),
        });
        if !residual.is_finite() || !next_norm.is_finite() {
            non_finite_at = Some(if residual.is_finite() { n + 1 } else { n });
            status = RunStatus::Diverged;
            break;
        }
        min_residual = min_residual.min(residual);
        if residual <= stopping.residual_tol {
            status = RunStatus::Converged;
            break;
        }
        if residual >= floor && next_norm > iterate_norm {
            streak += 1;
            escape.push(iterate_norm, next_norm, residual);
        } else {
            streak = 0;
            escape.clear();
        }
        x = step.next;
        if next_norm > stopping.divergence_norm || (stopping.halt_on_empty_hint && escape.fired()) {
            status = RunStatus::Diverged;
            break;
        }
    }

    let diagnostic = (status == RunStatus::Diverged).then(|| EmptinessDiagnostic {
        min_residual,
        residual_floor: floor,
        growth_streak: streak,
        possibly_empty: escape.fired(),
    });
    Ok(SolverTrace {
        algorithm,
        rows,
        status,
        final_iterate: x,
        diagnostic,
        non_finite_at,
        warnings,
    })
}
