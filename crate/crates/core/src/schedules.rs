//! Coefficient schedules, step-size policies and the two Armijo-type line
//! searches.
//!
//! The viscosity-Tseng update is `x_{n+1} = α_n f(x_n) + β_n z_n + e_n`.
//! Instead of `β_n` a schedule stores the tail `τ_n = 1 − α_n − β_n`, since
//! the summability conditions are phrased in terms of it. Error terms are
//! `e_n = ‖e_n‖·d` for a fixed unit direction `d`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, ViError};
use crate::hilbert::{Space, Vector};
use crate::operators::Operator;
use crate::sets::ConvexSet;

/// Upper index of the `α_n, β_n ∈ [0, 1]` scan and of partial-sum heuristics.
pub const RANGE_SCAN_LIMIT: u64 = 1_000_000;
/// Maximum number of trial step sizes tried by a line search.
pub const MAX_LINESEARCH_TRIALS: u32 = 200;

/// `coeff · (n + shift)^(−exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSequence {
    coeff: f64,
    exponent: f64,
    shift: f64,
}

impl PowerSequence {
    pub fn new(coeff: f64, exponent: f64) -> Result<PowerSequence> {
        PowerSequence::shifted(coeff, exponent, 0.0)
    }

    /// With an index shift, e.g. `1/(n + 1)` is `shifted(1, 1, 1)`.
    pub fn shifted(coeff: f64, exponent: f64, shift: f64) -> Result<PowerSequence> {
        if !(coeff > 0.0 && coeff.is_finite()) {
            return Err(ViError::InvalidSchedule(format!(
                "power sequence coefficient must be positive, got {coeff}"
            )));
        }
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(ViError::InvalidSchedule(format!(
                "power sequence exponent must be nonnegative, got {exponent}"
            )));
        }
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(ViError::InvalidSchedule(format!(
                "power sequence shift must be nonnegative, got {shift}"
            )));
        }
        Ok(PowerSequence {
            coeff,
            exponent,
            shift,
        })
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn value(&self, n: u64) -> f64 {
        let m = n as f64 + self.shift;
        let p = self.exponent;
        if p == 0.0 {
            self.coeff
        } else if p == 0.5 {
            self.coeff / m.sqrt()
        } else if p == 1.0 {
            self.coeff / m
        } else if p == 2.0 {
            self.coeff / (m * m)
        } else {
            self.coeff * m.powf(-p)
        }
    }
}

/// A nonnegative real sequence indexed from `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sequence {
    Zero,
    Power(PowerSequence),
    /// `coeff · ratio^n`. Outside the power family, so the condition checker
    /// falls back to partial sums.
    Geometric { coeff: f64, ratio: f64 },
}

impl Sequence {
    pub fn power(coeff: f64, exponent: f64) -> Result<Sequence> {
        Ok(Sequence::Power(PowerSequence::new(coeff, exponent)?))
    }

    pub fn geometric(coeff: f64, ratio: f64) -> Result<Sequence> {
        if !(coeff > 0.0 && coeff.is_finite() && ratio > 0.0 && ratio <= 1.0) {
            return Err(ViError::InvalidSchedule(format!(
                "geometric sequence needs coeff > 0 and ratio in (0, 1], got {coeff}, {ratio}"
            )));
        }
        Ok(Sequence::Geometric { coeff, ratio })
    }

    pub fn value(&self, n: u64) -> f64 {
        match self {
            Sequence::Zero => 0.0,
            Sequence::Power(p) => p.value(n),
            Sequence::Geometric { coeff, ratio } => coeff * ratio.powf(n as f64),
        }
    }
}

/// Coefficient schedule for the viscosity iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    alpha: Sequence,
    tail: Sequence,
    error: Sequence,
    error_direction: Option<Vector>,
    start_index: u64,
    strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleValues {
    pub alpha: f64,
    pub beta: f64,
    pub tail: f64,
    pub error_norm: f64,
    /// `None` when `‖e_n‖ = 0`.
    pub error: Option<Vector>,
    /// Set when `α_n` or `β_n` falls outside `[0, 1]`.
    pub out_of_range: bool,
}

/// Indices `n ≤ limit` at which `α_n ∉ [0, 1]` or `β_n ∉ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeScan {
    pub checked_up_to: u64,
    pub count: u64,
    /// The first few offending indices.
    pub first: Vec<u64>,
}

impl RangeScan {
    pub fn is_clean(&self) -> bool {
        self.count == 0
    }
}

impl ScheduleSpec {
    /// A faithful-mode schedule starting at `n = 1`.
    pub fn new(alpha: Sequence, tail: Sequence, error: Sequence) -> ScheduleSpec {
        ScheduleSpec {
            alpha,
            tail,
            error,
            error_direction: None,
            start_index: 1,
            strict: false,
        }
    }

    pub fn start_at(mut self, start_index: u64) -> Result<ScheduleSpec> {
        if start_index == 0 {
            return Err(ViError::InvalidSchedule("start index must be positive".into()));
        }
        self.start_index = start_index;
        if self.strict {
            self.strict = false;
            return self.into_strict();
        }
        Ok(self)
    }

    /// Error direction, normalized to unit length.
    pub fn with_error_direction(mut self, direction: Vector) -> Result<ScheduleSpec> {
        let n = direction.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(ViError::InvalidSchedule("error direction must be nonzero".into()));
        }
        self.error_direction = Some(direction.scale(1.0 / n));
        Ok(self)
    }

    /// Strict mode: rejects the schedule if any `α_n` or `β_n` with
    /// `start ≤ n ≤ 10⁶` leaves `[0, 1]`.
    pub fn into_strict(mut self) -> Result<ScheduleSpec> {
        let scan = self.range_scan(RANGE_SCAN_LIMIT);
        if !scan.is_clean() {
            return Err(ViError::InvalidSchedule(format!(
                "α_n or β_n outside [0, 1] at {} indices (first n = {})",
                scan.count, scan.first[0]
            )));
        }
        self.strict = true;
        Ok(self)
    }

    pub fn alpha(&self) -> &Sequence {
        &self.alpha
    }

    pub fn tail(&self) -> &Sequence {
        &self.tail
    }

    pub fn error(&self) -> &Sequence {
        &self.error
    }

    pub fn error_direction(&self) -> Option<&Vector> {
        self.error_direction.as_ref()
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn check_space(&self, space: &Arc<Space>) -> Result<()> {
        match &self.error_direction {
            Some(d) if !d.in_space(space) => Err(ViError::DimensionMismatch {
                expected: space.dim(),
                found: d.dim(),
            }),
            _ => Ok(()),
        }
    }

    fn coefficients(&self, n: u64) -> (f64, f64, f64) {
        let alpha = self.alpha.value(n);
        let tail = self.tail.value(n);
        (alpha, 1.0 - alpha - tail, tail)
    }

    pub fn range_scan(&self, limit: u64) -> RangeScan {
        let mut scan = RangeScan {
            checked_up_to: limit,
            count: 0,
            first: Vec::new(),
        };
        for n in self.start_index..=limit {
            let (a, b, _) = self.coefficients(n);
            if !(in_unit(a) && in_unit(b)) {
                scan.count += 1;
                if scan.first.len() < 10 {
                    scan.first.push(n);
                }
            }
        }
        scan
    }
}

pub(crate) fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

/// `(α_n, β_n, τ_n, ‖e_n‖)`, checking `n` against the start index.
pub(crate) fn scalars(spec: &ScheduleSpec, n: u64) -> Result<(f64, f64, f64, f64)> {
    if n < spec.start_index {
        return Err(ViError::Usage(format!(
            "schedule starts at n = {}, asked for n = {n}",
            spec.start_index
        )));
    }
    let (alpha, beta, tail) = spec.coefficients(n);
    Ok((alpha, beta, tail, spec.error.value(n)))
}

/// Adds `e_n` with norm `error_norm` to `coords` in place, along the error
/// direction or the first unit basis vector.
pub(crate) fn add_error(spec: &ScheduleSpec, error_norm: f64, coords: &mut [f64], space: &Arc<Space>) -> Result<()> {
    if error_norm == 0.0 {
        return Ok(());
    }
    match &spec.error_direction {
        Some(d) => {
            spec.check_space(space)?;
            for (c, dc) in coords.iter_mut().zip(d.coords()) {
                *c += error_norm * dc;
            }
        }
        None => {
            // first coordinate of the unit basis vector, 1/sqrt(w_0)
            let w0 = space.weights().map_or(1.0, |w| w[0]);
            if w0 == 0.0 {
                return Err(ViError::InvalidSpace("basis direction 0 has zero weight".into()));
            }
            coords[0] += error_norm * (1.0 / w0.sqrt());
        }
    }
    Ok(())
}

/// `(α_n, β_n, e_n)` for iteration `n` in `space`.
pub fn eval_schedule(spec: &ScheduleSpec, n: u64, space: &Arc<Space>) -> Result<ScheduleValues> {
    let (alpha, beta, tail, error_norm) = scalars(spec, n)?;
    let error = if error_norm == 0.0 {
        None
    } else {
        let mut coords = vec![0.0; space.dim()];
        add_error(spec, error_norm, &mut coords, space)?;
        Some(Vector::new(space, coords)?)
    };
    Ok(ScheduleValues {
        alpha,
        beta,
        tail,
        error_norm,
        error,
        out_of_range: !(in_unit(alpha) && in_unit(beta)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// (a) `Σ α_n β_n = ∞`.
    DivergentWeightedSum,
    /// (b) `Σ (1 − α_n − β_n) < ∞`.
    SummableTail,
    /// (c) `(1 − α_n − β_n)/α_n → 0` and `α_n → 0`.
    VanishingRatios,
    /// (d) `Σ ‖e_n‖ < ∞`.
    SummableErrors,
    /// `‖e_n‖/α_n → 0`, needed for strong convergence.
    ErrorsOverAlpha,
    /// `λ ∈ (0, 1)` with `λL < 1`.
    StepSize,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::DivergentWeightedSum => "(a) sum alpha_n*beta_n = inf",
            Condition::SummableTail => "(b) sum (1-alpha_n-beta_n) < inf",
            Condition::VanishingRatios => "(c) (1-alpha_n-beta_n)/alpha_n -> 0 and alpha_n -> 0",
            Condition::SummableErrors => "(d) sum ||e_n|| < inf",
            Condition::ErrorsOverAlpha => "(ii) ||e_n||/alpha_n -> 0",
            Condition::StepSize => "lambda in (0,1) and lambda*L < 1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Outside the power family; `likely` is a partial-sum guess only.
    Indeterminate { likely: bool },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail => f.write_str("FAIL"),
            Verdict::Indeterminate { likely: true } => f.write_str("indeterminate (likely holds)"),
            Verdict::Indeterminate { likely: false } => f.write_str("indeterminate (likely fails)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub verdict: Verdict,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
    pub range: RangeScan,
    pub warnings: Vec<String>,
}

impl ConditionReport {
    pub fn get(&self, condition: Condition) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    pub fn passes(&self, condition: Condition) -> bool {
        self.get(condition).is_some_and(|c| c.verdict == Verdict::Pass)
    }

    /// Every condition passed and the range scan is clean.
    pub fn all_pass(&self) -> bool {
        self.range.is_clean() && self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }
}

/// Asymptotic shape of a sequence: zero, `c·n^(−p)`, or unknown.
#[derive(Clone, Copy)]
enum Shape {
    Zero,
    Power { coeff: f64, exp: f64 },
    Other,
}

fn shape(seq: &Sequence) -> Shape {
    match seq {
        Sequence::Zero => Shape::Zero,
        Sequence::Power(p) => Shape::Power {
            coeff: p.coeff,
            exp: p.exponent,
        },
        Sequence::Geometric { .. } => Shape::Other,
    }
}

fn limit_of(s: Shape) -> f64 {
    match s {
        Shape::Zero => 0.0,
        Shape::Power { coeff, exp } if exp == 0.0 => coeff,
        _ => 0.0,
    }
}

fn check(condition: Condition, verdict: Verdict, rule: impl Into<String>) -> ConditionCheck {
    ConditionCheck {
        condition,
        verdict,
        rule: rule.into(),
    }
}

fn heuristic_summable(term: impl Fn(u64) -> f64, start: u64) -> bool {
    let decade = RANGE_SCAN_LIMIT / 10;
    let mut head = 0.0;
    let mut last_decade = 0.0;
    for n in start..=RANGE_SCAN_LIMIT {
        let t = term(n).abs();
        if n > decade {
            last_decade += t;
        } else {
            head += t;
        }
    }
    last_decade <= 1e-3 * (head + last_decade).max(f64::MIN_POSITIVE)
}

fn heuristic_vanishes(term: impl Fn(u64) -> f64, start: u64) -> bool {
    let early = (start..start + 10).map(&term).fold(0.0f64, |m, t| m.max(t.abs()));
    term(RANGE_SCAN_LIMIT).abs() <= 1e-3 * early.max(f64::MIN_POSITIVE)
}

const HEURISTIC_NOTE: &str = "partial-sum heuristic over n <= 1e6; unreliable";

/// Checks the convergence hypotheses on `(α_n, β_n, e_n)` by p-series rules.
///
/// With `α_n ~ a·n^(−p)`, `τ_n ~ t·n^(−q)` and `‖e_n‖ ~ c·n^(−r)`:
/// (a) holds iff `p ≤ 1` and `β_n` stays bounded away from 0, (b) iff
/// `q > 1`, (c) iff `q > p > 0`, (d) iff `r > 1`, and the error hypothesis
/// iff `r > p`. A zero tail or error sequence satisfies its conditions
/// trivially.
pub fn validate_conditions(spec: &ScheduleSpec) -> ConditionReport {
    let alpha = shape(&spec.alpha);
    let tail = shape(&spec.tail);
    let err = shape(&spec.error);
    let start = spec.start_index;
    let mut checks = Vec::with_capacity(5);
    let mut warnings = Vec::new();

    // (a)
    checks.push(match alpha {
        Shape::Zero => check(Condition::DivergentWeightedSum, Verdict::Fail, "alpha_n = 0"),
        Shape::Power { exp: p, .. } if p > 1.0 => check(
            Condition::DivergentWeightedSum,
            Verdict::Fail,
            format!("p = {p} > 1, so sum alpha_n converges"),
        ),
        Shape::Power { exp: p, .. } if !matches!(tail, Shape::Other) => {
            let beta_limit = 1.0 - limit_of(alpha) - limit_of(tail);
            if beta_limit > 0.0 {
                check(
                    Condition::DivergentWeightedSum,
                    Verdict::Pass,
                    format!("p = {p} <= 1 and beta_n -> {beta_limit} > 0"),
                )
            } else {
                check(
                    Condition::DivergentWeightedSum,
                    Verdict::Fail,
                    format!("beta_n -> {beta_limit}, not bounded away from 0"),
                )
            }
        }
        _ => {
            let likely = !heuristic_summable(
                |n| {
                    let (a, b, _) = spec.coefficients(n);
                    a * b
                },
                start,
            );
            check(
                Condition::DivergentWeightedSum,
                Verdict::Indeterminate { likely },
                HEURISTIC_NOTE,
            )
        }
    });

    // (b)
    checks.push(match tail {
        Shape::Zero => check(Condition::SummableTail, Verdict::Pass, "tail is zero"),
        Shape::Power { exp: q, .. } if q > 1.0 => {
            check(Condition::SummableTail, Verdict::Pass, format!("q = {q} > 1"))
        }
        Shape::Power { exp: q, .. } => {
            check(Condition::SummableTail, Verdict::Fail, format!("q = {q} <= 1"))
        }
        Shape::Other => {
            let likely = heuristic_summable(|n| spec.tail.value(n), start);
            check(
                Condition::SummableTail,
                Verdict::Indeterminate { likely },
                HEURISTIC_NOTE,
            )
        }
    });

    // (c)
    checks.push(match (alpha, tail) {
        (Shape::Zero, _) => check(
            Condition::VanishingRatios,
            Verdict::Fail,
            "alpha_n = 0, ratio undefined",
        ),
        (Shape::Power { exp: p, .. }, _) if p == 0.0 => check(
            Condition::VanishingRatios,
            Verdict::Fail,
            "p = 0, alpha_n does not vanish",
        ),
        (Shape::Power { exp: p, .. }, Shape::Zero) => check(
            Condition::VanishingRatios,
            Verdict::Pass,
            format!("p = {p} > 0 and tail is zero"),
        ),
        (Shape::Power { exp: p, .. }, Shape::Power { exp: q, .. }) => {
            let verdict = if q > p { Verdict::Pass } else { Verdict::Fail };
            let cmp = if q > p { ">" } else { "<=" };
            check(
                Condition::VanishingRatios,
                verdict,
                format!("q = {q} {cmp} p = {p} > 0"),
            )
        }
        _ => {
            let likely = heuristic_vanishes(|n| spec.alpha.value(n), start)
                && heuristic_vanishes(|n| spec.tail.value(n) / spec.alpha.value(n), start);
            check(
                Condition::VanishingRatios,
                Verdict::Indeterminate { likely },
                HEURISTIC_NOTE,
            )
        }
    });

    // (d)
    checks.push(match err {
        Shape::Zero => check(Condition::SummableErrors, Verdict::Pass, "errors are zero"),
        Shape::Power { exp: r, .. } if r > 1.0 => {
            check(Condition::SummableErrors, Verdict::Pass, format!("r = {r} > 1"))
        }
        Shape::Power { exp: r, .. } => {
            check(Condition::SummableErrors, Verdict::Fail, format!("r = {r} <= 1"))
        }
        Shape::Other => {
            let likely = heuristic_summable(|n| spec.error.value(n), start);
            check(
                Condition::SummableErrors,
                Verdict::Indeterminate { likely },
                HEURISTIC_NOTE,
            )
        }
    });

    // (ii)
    checks.push(match (err, alpha) {
        (Shape::Zero, _) => check(Condition::ErrorsOverAlpha, Verdict::Pass, "errors are zero"),
        (_, Shape::Zero) => check(Condition::ErrorsOverAlpha, Verdict::Fail, "alpha_n = 0"),
        (Shape::Power { exp: r, .. }, Shape::Power { exp: p, .. }) => {
            let verdict = if r > p { Verdict::Pass } else { Verdict::Fail };
            let cmp = if r > p { ">" } else { "<=" };
            check(
                Condition::ErrorsOverAlpha,
                verdict,
                format!("r = {r} {cmp} p = {p}"),
            )
        }
        _ => {
            let likely =
                heuristic_vanishes(|n| spec.error.value(n) / spec.alpha.value(n), start);
            check(
                Condition::ErrorsOverAlpha,
                Verdict::Indeterminate { likely },
                HEURISTIC_NOTE,
            )
        }
    });

    if checks
        .iter()
        .any(|c| matches!(c.verdict, Verdict::Indeterminate { .. }))
    {
        warnings.push(
            "some sequences are outside the power family; indeterminate verdicts are heuristic"
                .to_string(),
        );
    }
    let range = spec.range_scan(RANGE_SCAN_LIMIT);
    if !range.is_clean() {
        warnings.push(format!(
            "alpha_n or beta_n outside [0, 1] at {} indices, first at n = {}",
            range.count, range.first[0]
        ));
    }
    ConditionReport {
        checks,
        range,
        warnings,
    }
}

/// `λ ∈ (0, 1)` and `λL < 1`.
pub fn check_step_size(lambda: f64, lipschitz: f64) -> ConditionCheck {
    let ok = lambda > 0.0 && lambda < 1.0 && lambda * lipschitz < 1.0;
    check(
        Condition::StepSize,
        if ok { Verdict::Pass } else { Verdict::Fail },
        format!("lambda = {lambda}, L = {lipschitz}, lambda*L = {}", lambda * lipschitz),
    )
}

/// How the step size `λ_n` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    Fixed { lambda: f64 },
    /// Largest `λ ∈ {γ, γl, γl², …}` with `λ‖Ax − Ay‖ ≤ μ‖x − y‖`.
    TsengLinesearch { gamma: f64, l: f64, mu: f64 },
    /// `λ = l^m` for the smallest `m ≥ 0` with `λ‖Ax − Ay‖ ≤ μ‖r_λ(x)‖`.
    ResidualLinesearch { l: f64, mu: f64 },
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(ViError::InvalidPolicy(format!("{name} must lie in (0, 1), got {v}")))
    }
}

impl StepPolicy {
    pub fn fixed(lambda: f64) -> Result<StepPolicy> {
        open_unit("lambda", lambda)?;
        Ok(StepPolicy::Fixed { lambda })
    }

    pub fn tseng(gamma: f64, l: f64, mu: f64) -> Result<StepPolicy> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ViError::InvalidPolicy(format!("gamma must be positive, got {gamma}")));
        }
        open_unit("l", l)?;
        open_unit("mu", mu)?;
        Ok(StepPolicy::TsengLinesearch { gamma, l, mu })
    }

    pub fn residual(l: f64, mu: f64) -> Result<StepPolicy> {
        open_unit("l", l)?;
        open_unit("mu", mu)?;
        Ok(StepPolicy::ResidualLinesearch { l, mu })
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepPolicy::Fixed { .. } => "fixed",
            StepPolicy::TsengLinesearch { .. } => "tseng_linesearch",
            StepPolicy::ResidualLinesearch { .. } => "residual_linesearch",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub lambda: f64,
    /// `P_C(x − λAx)` at the accepted `λ`.
    pub y: Vector,
    /// Number of step sizes evaluated, including the accepted one.
    pub trials: u32,
}

fn backtrack(
    gamma: f64,
    l: f64,
    mu: f64,
    op: &Operator,
    set: &ConvexSet,
    x: &Vector,
) -> Result<LineSearchOutcome> {
    let ax = op.apply(x);
    let mut lambda = gamma;
    for trial in 1..=MAX_LINESEARCH_TRIALS {
        let y = set.project(&x.add_scaled(-lambda, &ax));
        let lhs = lambda * op.apply(&y).distance(&ax);
        let rhs = mu * x.distance(&y);
        if lhs <= rhs {
            return Ok(LineSearchOutcome {
                lambda,
                y,
                trials: trial,
            });
        }
        lambda *= l;
    }
    Err(ViError::LineSearchFailed {
        trials: MAX_LINESEARCH_TRIALS,
    })
}

/// Tseng-type search: the largest `λ ∈ {γ, γl, γl², …}` satisfying
/// `λ‖Ax − Ay‖ ≤ μ‖x − y‖` with `y = P_C(x − λAx)`.
pub fn linesearch_tseng(
    policy: &StepPolicy,
    op: &Operator,
    set: &ConvexSet,
    x: &Vector,
) -> Result<LineSearchOutcome> {
    match *policy {
        StepPolicy::TsengLinesearch { gamma, l, mu } => backtrack(gamma, l, mu, op, set, x),
        other => Err(ViError::Usage(format!(
            "Tseng line search needs a tseng_linesearch policy, got {}",
            other.name()
        ))),
    }
}

/// Residual-type search: `λ = l^m` for the smallest `m` with
/// `λ‖Ax − Ay‖ ≤ μ‖x − P_C(x − λAx)‖`. The returned trial count is `m + 1`.
pub fn linesearch_residual(
    policy: &StepPolicy,
    op: &Operator,
    set: &ConvexSet,
    x: &Vector,
) -> Result<LineSearchOutcome> {
    match *policy {
        StepPolicy::ResidualLinesearch { l, mu } => backtrack(1.0, l, mu, op, set, x),
        other => Err(ViError::Usage(format!(
            "residual line search needs a residual_linesearch policy, got {}",
            other.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(dim: usize) -> Arc<Space> {
        Space::euclidean(dim).unwrap()
    }

    fn example3() -> ScheduleSpec {
        ScheduleSpec::new(
            Sequence::power(1.0, 0.5).unwrap(),
            Sequence::power(1.0, 2.0).unwrap(),
            Sequence::power(1.0, 2.0).unwrap(),
        )
    }

    fn example1() -> ScheduleSpec {
        ScheduleSpec::new(
            Sequence::Power(PowerSequence::shifted(1.0, 1.0, 1.0).unwrap()),
            Sequence::Zero,
            Sequence::Zero,
        )
    }

    #[test]
    fn eval_examples() {
        let s = r(1);
        let v = eval_schedule(&example3(), 4, &s).unwrap();
        assert_eq!(v.alpha, 0.5);
        assert_eq!(v.beta, 0.4375);
        assert_eq!(v.error_norm, 1.0 / 16.0);
        assert_eq!(v.error.unwrap().coords(), &[0.0625]);
        assert!(!v.out_of_range);

        let v = eval_schedule(&example1(), 1, &s).unwrap();
        assert_eq!((v.alpha, v.beta, v.error_norm), (0.5, 0.5, 0.0));
        assert!(v.error.is_none());

        let v = eval_schedule(&example3(), 1, &s).unwrap();
        assert_eq!((v.alpha, v.beta), (1.0, -1.0));
        assert!(v.out_of_range);
    }

    #[test]
    fn eval_is_deterministic_and_respects_start() {
        let s = r(3);
        let spec = example3().start_at(2).unwrap();
        assert!(eval_schedule(&spec, 1, &s).is_err());
        for n in [2, 17, 12345] {
            assert_eq!(
                eval_schedule(&spec, n, &s).unwrap(),
                eval_schedule(&spec, n, &s).unwrap()
            );
        }
    }

    #[test]
    fn error_direction_is_normalized() {
        let s = r(2);
        let spec = example3()
            .with_error_direction(Vector::new(&s, vec![3.0, 4.0]).unwrap())
            .unwrap();
        let e = eval_schedule(&spec, 2, &s).unwrap().error.unwrap();
        assert!((e.norm() - 0.25).abs() < 1e-15);
        assert!(example3().with_error_direction(Vector::zeros(&s)).is_err());
    }

    #[test]
    fn strict_mode_rejects_negative_beta() {
        assert!(example3().into_strict().is_err());
        let strict = example3().start_at(2).unwrap().into_strict().unwrap();
        assert!(strict.is_strict());
        assert!(example1().into_strict().is_ok());
    }

    #[test]
    fn validator_examples() {
        for spec in [example3(), example1()] {
            let rep = validate_conditions(&spec);
            for c in [
                Condition::DivergentWeightedSum,
                Condition::SummableTail,
                Condition::VanishingRatios,
                Condition::SummableErrors,
                Condition::ErrorsOverAlpha,
            ] {
                assert!(rep.passes(c), "{c:?}: {:?}", rep.get(c));
            }
        }
        let rep = validate_conditions(&example3());
        assert_eq!(rep.range.first, vec![1]);
        assert_eq!(rep.range.count, 1);
        assert!(!rep.all_pass());
        assert!(validate_conditions(&example1()).all_pass());

        let fast = ScheduleSpec::new(Sequence::power(1.0, 2.0).unwrap(), Sequence::Zero, Sequence::Zero);
        let rep = validate_conditions(&fast);
        assert_eq!(rep.get(Condition::DivergentWeightedSum).unwrap().verdict, Verdict::Fail);
        assert!(rep.passes(Condition::SummableErrors));
    }

    #[test]
    fn validator_failures() {
        let slow_tail = ScheduleSpec::new(
            Sequence::power(0.5, 0.5).unwrap(),
            Sequence::power(0.1, 0.4).unwrap(),
            Sequence::power(1.0, 0.9).unwrap(),
        );
        let rep = validate_conditions(&slow_tail);
        assert!(rep.passes(Condition::DivergentWeightedSum));
        assert!(!rep.passes(Condition::SummableTail));
        assert!(!rep.passes(Condition::VanishingRatios));
        assert!(!rep.passes(Condition::SummableErrors));
        assert!(rep.passes(Condition::ErrorsOverAlpha));

        let constant_alpha = ScheduleSpec::new(Sequence::power(0.3, 0.0).unwrap(), Sequence::Zero, Sequence::Zero);
        let rep = validate_conditions(&constant_alpha);
        assert!(rep.passes(Condition::DivergentWeightedSum));
        assert!(!rep.passes(Condition::VanishingRatios));
    }

    #[test]
    fn geometric_sequences_are_indeterminate() {
        let spec = ScheduleSpec::new(
            Sequence::power(1.0, 0.5).unwrap(),
            Sequence::Zero,
            Sequence::geometric(1.0, 0.5).unwrap(),
        );
        let rep = validate_conditions(&spec);
        assert_eq!(
            rep.get(Condition::SummableErrors).unwrap().verdict,
            Verdict::Indeterminate { likely: true }
        );
        assert!(!rep.warnings.is_empty());
        assert!(!rep.all_pass());
    }

    #[test]
    fn tseng_search_on_identity() {
        let s = r(2);
        let x = Vector::new(&s, vec![1.0, -2.0]).unwrap();
        let policy = StepPolicy::tseng(1.0, 0.5, 0.4).unwrap();
        let out = linesearch_tseng(&policy, &Operator::identity(), &ConvexSet::whole(), &x).unwrap();
        assert_eq!(out.lambda, 0.25);
        assert_eq!(out.trials, 3);
        assert_eq!(out.y.coords(), &[0.75, -1.5]);
    }

    #[test]
    fn tseng_search_trivial_acceptance() {
        let s = r(1);
        let c = ConvexSet::nonnegative(&s);
        let policy = StepPolicy::tseng(2.0, 0.5, 0.4).unwrap();
        // x = 0 is fixed by P_C(x − γx)
        let out = linesearch_tseng(&policy, &Operator::identity(), &c, &Vector::zeros(&s)).unwrap();
        assert_eq!((out.lambda, out.trials), (2.0, 1));
        let konst = Operator::constant(Vector::new(&s, vec![-1.0]).unwrap());
        let out = linesearch_tseng(&policy, &konst, &c, &Vector::new(&s, vec![3.0]).unwrap()).unwrap();
        assert_eq!((out.lambda, out.trials), (2.0, 1));
    }

    #[test]
    fn residual_search_examples() {
        let s = r(1);
        let x = Vector::new(&s, vec![2.0]).unwrap();
        let policy = StepPolicy::residual(0.5, 0.6).unwrap();
        let out = linesearch_residual(&policy, &Operator::identity(), &ConvexSet::whole(), &x).unwrap();
        assert_eq!((out.lambda, out.trials), (0.5, 2));
        let konst = Operator::constant(Vector::new(&s, vec![1.0]).unwrap());
        let out = linesearch_residual(&policy, &konst, &ConvexSet::whole(), &x).unwrap();
        assert_eq!((out.lambda, out.trials), (1.0, 1));
        // a VI solution: r = 0 and ‖Ax − Ay‖ = 0 at m = 0
        let c = ConvexSet::nonnegative(&s);
        let out = linesearch_residual(&policy, &Operator::identity(), &c, &Vector::zeros(&s)).unwrap();
        assert_eq!((out.lambda, out.trials), (1.0, 1));
        assert_eq!(out.y.coords(), &[0.0]);
    }

    #[test]
    fn policy_mismatch_and_failure() {
        let s = r(1);
        let x = Vector::new(&s, vec![1.0]).unwrap();
        let fixed = StepPolicy::fixed(0.5).unwrap();
        assert!(matches!(
            linesearch_tseng(&fixed, &Operator::identity(), &ConvexSet::whole(), &x),
            Err(ViError::Usage(_))
        ));
        // a declared-steep operator no finite search satisfies in 200 halvings
        let steep = Operator::scalar_affine(1e300, 0.0).unwrap();
        let policy = StepPolicy::tseng(1e10, 0.9, 0.1).unwrap();
        assert_eq!(
            linesearch_tseng(&policy, &steep, &ConvexSet::nonnegative(&s), &x),
            Err(ViError::LineSearchFailed { trials: 200 })
        );
        assert!(StepPolicy::fixed(1.5).is_err());
        assert!(StepPolicy::tseng(0.0, 0.5, 0.5).is_err());
        assert!(StepPolicy::residual(0.5, 1.0).is_err());
    }

    #[test]
    fn step_size_check() {
        assert_eq!(check_step_size(0.5, 1.0).verdict, Verdict::Pass);
        assert_eq!(check_step_size(1.5, 0.1).verdict, Verdict::Fail);
        assert_eq!(check_step_size(0.5, 2.0).verdict, Verdict::Fail);
    }
}
