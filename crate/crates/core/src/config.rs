//! JSON problem files and the built-in presets.
//!
//! A problem file looks like
//!
//! ```json
//! {
//!   "space": {"kind": "euclidean", "dim": 1},
//!   "operator": {"kind": "identity"},
//!   "set": {"kind": "box", "lower": [0.0], "upper": [null]},
//!   "contraction": {"kind": "affine_scale", "scale": 0.5, "offset": 0.0},
//!   "initial": [2.0],
//!   "lambda": 0.5,
//!   "schedules": {
//!     "alpha": {"kind": "power", "coeff": 1.0, "exponent": 0.5},
//!     "tail": {"kind": "power", "coeff": 1.0, "exponent": 2.0},
//!     "error": {"kind": "zero"}
//!   },
//!   "reference_solution": [0.0]
//! }
//! ```
//!
//! Vectors are either coordinate arrays or a single number, meaning the
//! constant vector (a constant function on the `L2` grid). `null` box bounds
//! are infinite. Unknown keys are rejected everywhere.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ViError};
use crate::hilbert::{Space, Vector};
use crate::operators::{Contraction, Operator};
use crate::schedules::{PowerSequence, ScheduleSpec, Sequence, StepPolicy};
use crate::sets::ConvexSet;
use crate::solvers::{Algorithm, VIProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDesc {
    Euclidean { dim: usize },
    GridL2 { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorDesc {
    Constant(f64),
    Coords(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorDesc {
    Identity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    Constant {
        value: VectorDesc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: VectorDesc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    ScalarAffine {
        slope: f64,
        offset: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDesc {
    Whole,
    Box {
        lower: Vec<Option<f64>>,
        upper: Vec<Option<f64>>,
    },
    Ball {
        center: VectorDesc,
        radius: f64,
    },
    Halfspace {
        normal: VectorDesc,
        anchor: VectorDesc,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContractionDesc {
    Constant {
        value: VectorDesc,
    },
    AffineScale {
        scale: f64,
        offset: VectorDesc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceDesc {
    Zero,
    Power {
        coeff: f64,
        exponent: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<f64>,
    },
    Geometric {
        coeff: f64,
        ratio: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulesDesc {
    pub alpha: SequenceDesc,
    pub tail: SequenceDesc,
    pub error: SequenceDesc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_direction: Option<VectorDesc>,
}

/// Line-search parameters for VSEGM (`l`, `mu`) and THEGM (`gamma`, `l`,
/// `mu`). Missing entries take the defaults `γ = 1`, `l = 0.5`, `μ = 0.9`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDesc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub space: SpaceDesc,
    pub operator: OperatorDesc,
    pub set: SetDesc,
    pub contraction: ContractionDesc,
    pub initial: VectorDesc,
    pub lambda: f64,
    pub schedules: SchedulesDesc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_solution: Option<VectorDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_index: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    pub gamma: f64,
    pub l: f64,
    pub mu: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        LineSearchParams {
            gamma: 1.0,
            l: 0.5,
            mu: 0.9,
        }
    }
}

/// A parsed problem file turned into solver inputs.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: VIProblem,
    pub schedule: ScheduleSpec,
    pub lambda: f64,
    pub linesearch: LineSearchParams,
}

impl LoadedProblem {
    /// The step policy each algorithm runs with: a fixed `λ` for EGM, TEGM
    /// and VTEGM (and THEGM when `fixed_thegm`), otherwise the matching line
    /// search.
    pub fn policy_for(&self, algorithm: Algorithm, fixed_thegm: bool) -> Result<StepPolicy> {
        let LineSearchParams { gamma, l, mu } = self.linesearch;
        match algorithm {
            Algorithm::Vsegm => StepPolicy::residual(l, mu),
            Algorithm::Thegm if !fixed_thegm => StepPolicy::tseng(gamma, l, mu),
            _ => StepPolicy::fixed(self.lambda),
        }
    }
}

impl VectorDesc {
    fn build(&self, space: &Arc<Space>) -> Result<Vector> {
        match self {
            VectorDesc::Constant(c) => Vector::new(space, vec![*c; space.dim()]),
            VectorDesc::Coords(v) => Vector::new(space, v.clone()),
        }
    }
}

impl SequenceDesc {
    fn build(&self) -> Result<Sequence> {
        match *self {
            SequenceDesc::Zero => Ok(Sequence::Zero),
            SequenceDesc::Power {
                coeff,
                exponent,
                shift,
            } => Ok(Sequence::Power(PowerSequence::shifted(
                coeff,
                exponent,
                shift.unwrap_or(0.0),
            )?)),
            SequenceDesc::Geometric { coeff, ratio } => Sequence::geometric(coeff, ratio),
        }
    }

    fn power(coeff: f64, exponent: f64) -> SequenceDesc {
        SequenceDesc::Power {
            coeff,
            exponent,
            shift: None,
        }
    }
}

impl FromStr for ProblemFile {
    type Err = ViError;

    fn from_str(s: &str) -> Result<ProblemFile> {
        serde_json::from_str(s).map_err(|e| ViError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

impl ProblemFile {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Builds the problem, schedule and step parameters. In strict mode the
    /// schedule is rejected if any `α_n, β_n` leaves `[0, 1]`.
    pub fn load(&self, strict: bool) -> Result<LoadedProblem> {
        let space = match self.space {
            SpaceDesc::Euclidean { dim } => Space::euclidean(dim)?,
            SpaceDesc::GridL2 { dim } => Space::grid_l2(dim)?,
        };
        let with_bound = |op: Operator, l: Option<f64>| match l {
            Some(l) => op.with_lipschitz(l),
            None => Ok(op),
        };
        let operator = match &self.operator {
            OperatorDesc::Identity { lipschitz } => with_bound(Operator::identity(), *lipschitz)?,
            OperatorDesc::Constant { value, lipschitz } => {
                with_bound(Operator::constant(value.build(&space)?), *lipschitz)?
            }
            OperatorDesc::Affine {
                matrix,
                offset,
                lipschitz,
            } => with_bound(
                Operator::affine(matrix.clone(), offset.build(&space)?)?,
                *lipschitz,
            )?,
            OperatorDesc::ScalarAffine {
                slope,
                offset,
                lipschitz,
            } => with_bound(Operator::scalar_affine(*slope, *offset)?, *lipschitz)?,
        };
        let set = match &self.set {
            SetDesc::Whole => ConvexSet::whole(),
            SetDesc::Box { lower, upper } => ConvexSet::boxed(
                lower.iter().map(|b| b.unwrap_or(f64::NEG_INFINITY)).collect(),
                upper.iter().map(|b| b.unwrap_or(f64::INFINITY)).collect(),
            )?,
            SetDesc::Ball { center, radius } => ConvexSet::ball(center.build(&space)?, *radius)?,
            SetDesc::Halfspace { normal, anchor } => {
                ConvexSet::halfspace(normal.build(&space)?, anchor.build(&space)?)?
            }
        };
        let contraction = match &self.contraction {
            ContractionDesc::Constant { value } => Contraction::constant(value.build(&space)?),
            ContractionDesc::AffineScale { scale, offset, rho } => {
                let offset = offset.build(&space)?;
                match rho {
                    Some(rho) => Contraction::affine_scale_with_rho(*scale, offset, *rho)?,
                    None => Contraction::affine_scale(*scale, offset)?,
                }
            }
        };
        let mut problem = VIProblem::new(
            space.clone(),
            operator,
            set,
            contraction,
            self.initial.build(&space)?,
        )?;
        if let Some(r) = &self.reference_solution {
            problem = problem.with_reference(r.build(&space)?)?;
        }

        if !self.lambda.is_finite() {
            return Err(ViError::InvalidPolicy("lambda must be finite".into()));
        }
        let sched = &self.schedules;
        let mut schedule = ScheduleSpec::new(sched.alpha.build()?, sched.tail.build()?, sched.error.build()?)
            .start_at(self.start_index.unwrap_or(1))?;
        if let Some(d) = &sched.error_direction {
            schedule = schedule.with_error_direction(d.build(&space)?)?;
        }
        if strict {
            schedule = schedule.into_strict()?;
        }
        let defaults = LineSearchParams::default();
        let p = self.policy.clone().unwrap_or_default();
        Ok(LoadedProblem {
            problem,
            schedule,
            lambda: self.lambda,
            linesearch: LineSearchParams {
                gamma: p.gamma.unwrap_or(defaults.gamma),
                l: p.l.unwrap_or(defaults.l),
                mu: p.mu.unwrap_or(defaults.mu),
            },
        })
    }
}

/// The four reference configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Example1,
    Example2,
    Example3,
    Example4,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Example1,
        Preset::Example2,
        Preset::Example3,
        Preset::Example4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Example1 => "example1",
            Preset::Example2 => "example2",
            Preset::Example3 => "example3",
            Preset::Example4 => "example4",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Preset::Example1 => {
                "L2[0,1] (257-pt trapezoid grid), A = I, C = unit ball, f = 1, x1 = 2, \
                 lambda = 1/2, alpha_n = 1/(n+1), beta_n = n/(n+1), e_n = 0; VI = {0}"
            }
            Preset::Example2 => {
                "R, A = I, C = [0,inf), f(x) = x/2, x1 = 2, lambda = 1/2, \
                 alpha_n = 1/sqrt(n), beta_n = 1 - 1/sqrt(n) - 1/n^2, e_n = 0; VI = {0}"
            }
            Preset::Example3 => {
                "R, A = I, C = [0,inf), f = 1, x1 = 2, lambda = 1/2, \
                 alpha_n = 1/sqrt(n), beta_n = 1 - 1/sqrt(n) - 1/n^2, e_n = 1/n^2; VI = {0}"
            }
            Preset::Example4 => {
                "R, A = -1, C = [0,inf), f = 1, x1 = 2, lambda = 1/2, \
                 alpha_n = 1/n, beta_n = 1 - 1/n, e_n = 0; VI empty, iterates unbounded"
            }
        }
    }

    pub fn problem_file(&self) -> ProblemFile {
        let half_line = SetDesc::Box {
            lower: vec![Some(0.0)],
            upper: vec![None],
        };
        let one = ContractionDesc::Constant {
            value: VectorDesc::Coords(vec![1.0]),
        };
        let sqrt_alpha = SequenceDesc::power(1.0, 0.5);
        let inv_square = SequenceDesc::power(1.0, 2.0);
        let scalar = |v: f64| VectorDesc::Coords(vec![v]);
        let base = ProblemFile {
            space: SpaceDesc::Euclidean { dim: 1 },
            operator: OperatorDesc::Identity { lipschitz: None },
            set: half_line,
            contraction: one,
            initial: scalar(2.0),
            lambda: 0.5,
            schedules: SchedulesDesc {
                alpha: sqrt_alpha,
                tail: inv_square.clone(),
                error: SequenceDesc::Zero,
                error_direction: None,
            },
            policy: None,
            reference_solution: Some(scalar(0.0)),
            start_index: None,
        };
        match self {
            Preset::Example1 => ProblemFile {
                space: SpaceDesc::GridL2 {
                    dim: crate::hilbert::DEFAULT_GRID_POINTS,
                },
                set: SetDesc::Ball {
                    center: VectorDesc::Constant(0.0),
                    radius: 1.0,
                },
                contraction: ContractionDesc::Constant {
                    value: VectorDesc::Constant(1.0),
                },
                initial: VectorDesc::Constant(2.0),
                schedules: SchedulesDesc {
                    alpha: SequenceDesc::Power {
                        coeff: 1.0,
                        exponent: 1.0,
                        shift: Some(1.0),
                    },
                    tail: SequenceDesc::Zero,
                    error: SequenceDesc::Zero,
                    error_direction: None,
                },
                reference_solution: Some(VectorDesc::Constant(0.0)),
                ..base
            },
            Preset::Example2 => ProblemFile {
                contraction: ContractionDesc::AffineScale {
                    scale: 0.5,
                    offset: scalar(0.0),
                    rho: None,
                },
                ..base
            },
            Preset::Example3 => ProblemFile {
                schedules: SchedulesDesc {
                    error: inv_square,
                    ..base.schedules.clone()
                },
                ..base
            },
            Preset::Example4 => ProblemFile {
                operator: OperatorDesc::Constant {
                    value: scalar(-1.0),
                    lipschitz: None,
                },
                schedules: SchedulesDesc {
                    alpha: SequenceDesc::power(1.0, 1.0),
                    tail: SequenceDesc::Zero,
                    error: SequenceDesc::Zero,
                    error_direction: None,
                },
                reference_solution: None,
                ..base
            },
        }
    }

    /// Whether `VI(C, A)` is known to be nonempty.
    pub fn has_solution(&self) -> bool {
        !matches!(self, Preset::Example4)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = ViError;

    fn from_str(s: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| {
                ViError::Usage(format!(
                    "unknown preset {s:?} (expected example1, example2, example3 or example4)"
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_json() {
        for p in Preset::ALL {
            let file = p.problem_file();
            let json = file.to_json_pretty();
            let back: ProblemFile = json.parse().unwrap();
            assert_eq!(back, file, "{p}");
            back.load(false).unwrap();
        }
    }

    #[test]
    fn preset_contents() {
        let ex1 = Preset::Example1.problem_file().load(false).unwrap();
        assert_eq!(ex1.problem.space().dim(), 257);
        assert!((ex1.problem.initial().norm() - 2.0).abs() < 1e-12);
        assert_eq!(ex1.lambda, 0.5);
        let ex4 = Preset::Example4.problem_file().load(false).unwrap();
        assert_eq!(ex4.problem.lipschitz(), 0.0);
        assert!(ex4.problem.reference().is_none());
        // β_1 = −1 in examples 2 and 3
        assert!(Preset::Example3.problem_file().load(true).is_err());
        assert!(Preset::Example2.problem_file().load(true).is_err());
        assert!(Preset::Example1.problem_file().load(true).is_ok());
        assert_eq!("example3".parse::<Preset>().unwrap(), Preset::Example3);
        assert!("example5".parse::<Preset>().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(&Preset::Example2.problem_file().to_json_pretty()).unwrap();
        v["colour"] = serde_json::json!("blue");
        assert!(v.to_string().parse::<ProblemFile>().is_err());

        let mut v: serde_json::Value =
            serde_json::from_str(&Preset::Example2.problem_file().to_json_pretty()).unwrap();
        v["operator"]["slope"] = serde_json::json!(2.0);
        assert!(v.to_string().parse::<ProblemFile>().is_err());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = "{\n  \"space\": {\"kind\": \"euclidean\", \"dim\": 1},\n  oops\n}"
            .parse::<ProblemFile>()
            .unwrap_err();
        match err {
            ViError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn custom_problem_loads() {
        let json = r#"{
            "space": {"kind": "euclidean", "dim": 2},
            "operator": {"kind": "affine", "matrix": [[2, 1], [-1, 2]], "offset": [-1, 0]},
            "set": {"kind": "halfspace", "normal": [1, 1], "anchor": [0, 0]},
            "contraction": {"kind": "affine_scale", "scale": 0.25, "offset": 0},
            "initial": [3, -1],
            "lambda": 0.2,
            "schedules": {
                "alpha": {"kind": "power", "coeff": 1, "exponent": 0.75},
                "tail": {"kind": "zero"},
                "error": {"kind": "geometric", "coeff": 0.5, "ratio": 0.5},
                "error_direction": [0, 2]
            },
            "policy": {"mu": 0.5},
            "start_index": 3
        }"#;
        let loaded = json.parse::<ProblemFile>().unwrap().load(true).unwrap();
        assert_eq!(loaded.schedule.start_index(), 3);
        assert_eq!(loaded.linesearch, LineSearchParams { gamma: 1.0, l: 0.5, mu: 0.5 });
        assert_eq!(loaded.schedule.error_direction().unwrap().coords(), &[0.0, 1.0]);
        assert_eq!(
            loaded.policy_for(Algorithm::Thegm, false).unwrap(),
            StepPolicy::TsengLinesearch { gamma: 1.0, l: 0.5, mu: 0.5 }
        );
        assert_eq!(
            loaded.policy_for(Algorithm::Thegm, true).unwrap(),
            StepPolicy::Fixed { lambda: 0.2 }
        );
    }

    #[test]
    fn invalid_data_is_rejected() {
        let mut f = Preset::Example2.problem_file();
        f.initial = VectorDesc::Coords(vec![1.0, 2.0]);
        assert!(matches!(f.load(false), Err(ViError::DimensionMismatch { .. })));
        let mut f = Preset::Example2.problem_file();
        f.reference_solution = Some(VectorDesc::Coords(vec![3.0]));
        assert!(f.load(false).is_err());
        let mut f = Preset::Example2.problem_file();
        f.operator = OperatorDesc::ScalarAffine { slope: -1.0, offset: 0.0, lipschitz: None };
        assert!(f.load(false).is_err());
    }
}
