//! Independent solution finders for small problems.
//!
//! Nothing here calls into [`crate::solvers`]; both finders work directly
//! with the projection and the operator so they can serve as ground truth
//! for the iterative methods.

use nalgebra::DMatrix;

use crate::error::{Result, ViError};
use crate::hilbert::Vector;
use crate::operators::OperatorKind;
use crate::solvers::VIProblem;

/// Residual level at or below which a point is reported as a solution.
pub const SOLUTION_RESIDUAL: f64 = 1e-8;
const EMPTY_HINT_RESIDUAL: f64 = 0.1;
const EMPTY_HINT_SPACING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    FixedPoint,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Present only when its natural residual is at most [`SOLUTION_RESIDUAL`].
    pub solution: Option<Vector>,
    /// Best point found, solution or not.
    pub best: Option<Vector>,
    pub min_residual: f64,
    pub method: OracleMethod,
    pub certified_empty_hint: bool,
    pub iterations: u64,
}

fn residual(problem: &VIProblem, lambda: f64, x: &Vector) -> f64 {
    let ax = problem.operator().apply(x);
    let y = problem.set().project(&x.add_scaled(-lambda, &ax));
    x.distance(&y)
}

/// Lipschitz constant of `x ↦ x − λAx` in the space norm, if it can be
/// computed in closed form.
fn forward_map_contraction(problem: &VIProblem, lambda: f64) -> Option<f64> {
    match problem.operator().kind() {
        OperatorKind::Identity => Some((1.0 - lambda).abs()),
        OperatorKind::ScalarAffine { slope, .. } => Some((1.0 - lambda * slope).abs()),
        OperatorKind::Constant(_) => None,
        OperatorKind::Affine { matrix, .. } => {
            let n = problem.space().dim();
            let m = DMatrix::from_row_slice(n, n, matrix);
            let mut g = DMatrix::identity(n, n) - m * lambda;
            // conjugate by W^{1/2} so the Euclidean spectral norm matches the
            // weighted norm
            if let Some(w) = problem.space().weights() {
                for i in 0..n {
                    for j in 0..n {
                        g[(i, j)] *= (w[i] / w[j]).sqrt();
                    }
                }
            }
            Some(g.singular_values().max())
        }
    }
}

/// Picard iteration of `x ↦ P_C(x − λAx)` from the problem's initial point.
///
/// Refuses unless that map is a strict contraction, which holds for
/// strongly monotone affine data with small enough `λ`.
pub fn solve_fixed_point(
    problem: &VIProblem,
    lambda: f64,
    tol: f64,
    max_iters: u64,
) -> Result<OracleResult> {
    if !(lambda > 0.0) {
        return Err(ViError::OracleRefused(format!("lambda must be positive, got {lambda}")));
    }
    let q = forward_map_contraction(problem, lambda).ok_or_else(|| {
        ViError::OracleRefused("operator is not strongly monotone".into())
    })?;
    if !(q < 1.0 - 1e-12) {
        return Err(ViError::OracleRefused(format!(
            "x - lambda*A(x) is not a contraction (factor {q})"
        )));
    }
    let tol = tol.min(SOLUTION_RESIDUAL);
    let mut x = problem.initial().clone();
    let mut best = f64::INFINITY;
    for k in 0..max_iters {
        let ax = problem.operator().apply(&x);
        let next = problem.set().project(&x.add_scaled(-lambda, &ax));
        let r = x.distance(&next);
        best = best.min(r);
        if r <= tol {
            return Ok(OracleResult {
                solution: Some(x.clone()),
                best: Some(x),
                min_residual: r,
                method: OracleMethod::FixedPoint,
                certified_empty_hint: false,
                iterations: k,
            });
        }
        x = next;
    }
    Ok(OracleResult {
        solution: None,
        best: Some(x),
        min_residual: best,
        method: OracleMethod::FixedPoint,
        certified_empty_hint: false,
        iterations: max_iters,
    })
}

/// Minimizes the natural residual over a uniform grid on `bounds ∩ C`.
///
/// Works in dimension 1 or 2. `certified_empty_hint` is set when the grid
/// spacing is at most `1e-3` and no node has residual below `0.1`; it flags
/// likely emptiness and proves nothing.
pub fn solve_grid_search(
    problem: &VIProblem,
    lambda: f64,
    bounds: &[(f64, f64)],
    points_per_dim: usize,
) -> Result<OracleResult> {
    let dim = problem.space().dim();
    if dim > 2 {
        return Err(ViError::Usage(format!("grid search supports dim <= 2, got {dim}")));
    }
    if bounds.len() != dim {
        return Err(ViError::DimensionMismatch {
            expected: dim,
            found: bounds.len(),
        });
    }
    if points_per_dim < 2 {
        return Err(ViError::Usage("grid search needs at least 2 points per dimension".into()));
    }
    if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(ViError::Usage("grid bounds must be finite with lo <= hi".into()));
    }
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        let h = (hi - lo) / (points_per_dim - 1) as f64;
        (0..points_per_dim).map(|i| lo + h * i as f64).collect()
    };
    let axes: Vec<Vec<f64>> = bounds.iter().copied().map(axis).collect();
    let spacing = bounds
        .iter()
        .map(|(lo, hi)| (hi - lo) / (points_per_dim - 1) as f64)
        .fold(0.0, f64::max);

    let space = problem.space();
    let mut best: Option<(f64, Vector)> = None;
    let mut visit = |coords: Vec<f64>| {
        let x = Vector::from_raw(space, coords);
        if !problem.set().contains(&x, 1e-12) {
            return;
        }
        let r = residual(problem, lambda, &x);
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, x));
        }
    };
    match dim {
        1 => axes[0].iter().for_each(|&a| visit(vec![a])),
        _ => {
            for &a in &axes[0] {
                for &b in &axes[1] {
                    visit(vec![a, b]);
                }
            }
        }
    }
    let (min_residual, best) = match best {
        Some((r, x)) => (r, Some(x)),
        None => (f64::INFINITY, None),
    };
    Ok(OracleResult {
        solution: best.clone().filter(|_| min_residual <= SOLUTION_RESIDUAL),
        best,
        min_residual,
        method: OracleMethod::Grid,
        certified_empty_hint: spacing <= EMPTY_HINT_SPACING && min_residual > EMPTY_HINT_RESIDUAL,
        iterations: axes.iter().map(|a| a.len() as u64).product(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Space;
    use crate::operators::{Contraction, Operator};
    use crate::sets::ConvexSet;
    use std::sync::Arc;

    fn half_line(op: Operator, x0: f64) -> VIProblem {
        let s = Space::euclidean(1).unwrap();
        VIProblem::new(
            s.clone(),
            op,
            ConvexSet::nonnegative(&s),
            Contraction::constant(Vector::zeros(&s)),
            Vector::new(&s, vec![x0]).unwrap(),
        )
        .unwrap()
    }

    fn one_d(s: &Arc<Space>, v: f64) -> Vector {
        Vector::new(s, vec![v]).unwrap()
    }

    #[test]
    fn fixed_point_identity_half_line() {
        let p = half_line(Operator::identity(), 2.0);
        let res = solve_fixed_point(&p, 0.5, 1e-12, 10_000).unwrap();
        assert!(res.solution.unwrap().coords()[0].abs() <= 1e-8);
    }

    #[test]
    fn fixed_point_identity_ball() {
        let s = Space::euclidean(3).unwrap();
        let p = VIProblem::new(
            s.clone(),
            Operator::identity(),
            ConvexSet::ball(Vector::zeros(&s), 1.0).unwrap(),
            Contraction::constant(Vector::zeros(&s)),
            Vector::new(&s, vec![5.0, -3.0, 0.25]).unwrap(),
        )
        .unwrap();
        let sol = solve_fixed_point(&p, 0.5, 1e-12, 10_000).unwrap().solution.unwrap();
        assert!(sol.norm() <= 1e-8);
    }

    #[test]
    fn fixed_point_affine() {
        let s = Space::euclidean(2).unwrap();
        let p = VIProblem::new(
            s.clone(),
            Operator::affine(
                vec![vec![2.0, 0.0], vec![0.0, 3.0]],
                Vector::new(&s, vec![-2.0, -3.0]).unwrap(),
            )
            .unwrap(),
            ConvexSet::whole(),
            Contraction::constant(Vector::zeros(&s)),
            Vector::zeros(&s),
        )
        .unwrap();
        let sol = solve_fixed_point(&p, 0.25, 1e-12, 10_000).unwrap().solution.unwrap();
        assert!(sol.distance(&Vector::new(&s, vec![1.0, 1.0]).unwrap()) < 1e-9);
        // λ = 1 makes I − λM = diag(−1, −2), not a contraction
        assert!(matches!(
            solve_fixed_point(&p, 1.0, 1e-12, 10),
            Err(ViError::OracleRefused(_))
        ));
    }

    #[test]
    fn fixed_point_refuses_constant_operator() {
        let s = Space::euclidean(1).unwrap();
        let p = half_line(Operator::constant(one_d(&s, -1.0)), 2.0);
        assert!(matches!(
            solve_fixed_point(&p, 0.5, 1e-12, 10),
            Err(ViError::OracleRefused(_))
        ));
    }

    #[test]
    fn grid_detects_empty_vi() {
        let s = Space::euclidean(1).unwrap();
        let p = half_line(Operator::constant(one_d(&s, -1.0)), 2.0);
        let res = solve_grid_search(&p, 0.5, &[(0.0, 100.0)], 100_001).unwrap();
        assert!((res.min_residual - 0.5).abs() < 1e-9);
        assert!(res.certified_empty_hint);
        assert!(res.solution.is_none());
        // a coarse grid gives no hint
        let coarse = solve_grid_search(&p, 0.5, &[(0.0, 100.0)], 11).unwrap();
        assert!(!coarse.certified_empty_hint);
    }

    #[test]
    fn grid_finds_origin() {
        let p = half_line(Operator::identity(), 2.0);
        let res = solve_grid_search(&p, 0.5, &[(0.0, 10.0)], 1001).unwrap();
        // residual is x/2 on the grid, minimized at the node 0
        assert_eq!(res.best.as_ref().unwrap().coords(), &[0.0]);
        assert!(res.min_residual <= 1e-2);
        assert!(res.solution.is_some());
        // nodes outside C are skipped
        let res = solve_grid_search(&p, 0.5, &[(-5.0, 10.0)], 16).unwrap();
        assert_eq!(res.best.unwrap().coords(), &[0.0]);
    }

    #[test]
    fn grid_hits_node_solution() {
        let s = Space::euclidean(2).unwrap();
        let p = VIProblem::new(
            s.clone(),
            Operator::affine(
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                Vector::new(&s, vec![-1.0, 0.5]).unwrap(),
            )
            .unwrap(),
            ConvexSet::boxed(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap(),
            Contraction::constant(Vector::zeros(&s)),
            Vector::zeros(&s),
        )
        .unwrap();
        let res = solve_grid_search(&p, 0.5, &[(-2.0, 2.0), (-2.0, 2.0)], 9).unwrap();
        let sol = res.solution.unwrap();
        assert_eq!(sol.coords(), &[1.0, -0.5]);
        assert!(res.min_residual <= 1e-8);
    }

    #[test]
    fn grid_rejects_high_dimension() {
        let s = Space::euclidean(3).unwrap();
        let p = VIProblem::new(
            s.clone(),
            Operator::identity(),
            ConvexSet::whole(),
            Contraction::constant(Vector::zeros(&s)),
            Vector::zeros(&s),
        )
        .unwrap();
        assert!(matches!(
            solve_grid_search(&p, 0.5, &[(0.0, 1.0); 3], 3),
            Err(ViError::Usage(_))
        ));
    }
}
