//! Closed convex sets with exact metric projections.

use std::sync::Arc;

use crate::error::{Result, ViError};
use crate::hilbert::{Space, Vector};

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    Whole,
    /// Per-coordinate bounds; infinite bounds are allowed.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vector, radius: f64 },
    /// `{z : ⟨normal, z − anchor⟩ ≤ 0}`.
    Halfspace { normal: Vector, anchor: Vector },
}

/// A nonempty closed convex set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet {
    kind: SetKind,
}

impl ConvexSet {
    pub fn whole() -> ConvexSet {
        ConvexSet {
            kind: SetKind::Whole,
        }
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<ConvexSet> {
        if lower.len() != upper.len() {
            return Err(ViError::InvalidSet(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || *lo == f64::INFINITY || *hi == f64::NEG_INFINITY {
                return Err(ViError::InvalidSet(format!(
                    "box coordinate {i} has empty range [{lo}, {hi}]"
                )));
            }
        }
        Ok(ConvexSet {
            kind: SetKind::Box { lower, upper },
        })
    }

    /// The nonnegative orthant of `space`.
    pub fn nonnegative(space: &Arc<Space>) -> ConvexSet {
        ConvexSet {
            kind: SetKind::Box {
                lower: vec![0.0; space.dim()],
                upper: vec![f64::INFINITY; space.dim()],
            },
        }
    }

    pub fn ball(center: Vector, radius: f64) -> Result<ConvexSet> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(ViError::InvalidSet(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(ConvexSet {
            kind: SetKind::Ball { center, radius },
        })
    }

    pub fn halfspace(normal: Vector, anchor: Vector) -> Result<ConvexSet> {
        normal.check_same_space(&anchor)?;
        if normal.norm_squared() == 0.0 {
            return Err(ViError::InvalidSet("halfspace normal is zero".into()));
        }
        Ok(ConvexSet {
            kind: SetKind::Halfspace { normal, anchor },
        })
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// Checks that the set's data lives in `space`.
    pub fn check_space(&self, space: &Arc<Space>) -> Result<()> {
        let mismatch = |found| ViError::DimensionMismatch {
            expected: space.dim(),
            found,
        };
        match &self.kind {
            SetKind::Whole => Ok(()),
            SetKind::Box { lower, .. } if lower.len() != space.dim() => Err(mismatch(lower.len())),
            SetKind::Box { .. } => Ok(()),
            SetKind::Ball { center, .. } if !center.in_space(space) => {
                Err(mismatch(center.dim()))
            }
            SetKind::Halfspace { normal, .. } if !normal.in_space(space) => {
                Err(mismatch(normal.dim()))
            }
            _ => Ok(()),
        }
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: &Vector) -> Vector {
        match &self.kind {
            SetKind::Whole => x.clone(),
            SetKind::Box { lower, upper } => {
                let coords = x
                    .coords()
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&c, (&lo, &hi))| c.max(lo).min(hi))
                    .collect();
                Vector::from_raw(x.space(), coords)
            }
            SetKind::Ball { center, radius } => {
                let dist = x.distance(center);
                if dist <= *radius {
                    x.clone()
                } else {
                    center.lin_comb(1.0 - radius / dist, x, radius / dist)
                }
            }
            SetKind::Halfspace { normal, anchor } => {
                let excess = normal.dot(x) - normal.dot(anchor);
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x.add_scaled(-excess / normal.norm_squared(), normal)
                }
            }
        }
    }

    /// True iff `‖x − P(x)‖ ≤ tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.distance(&self.project(x)) <= tol
    }
}
