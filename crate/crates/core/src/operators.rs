//! Monotone operators `A` and contractions `f`.
//!
//! Only closed forms are supported so that a Lipschitz bound can always be
//! certified: identity, constant, affine `Mx + b` and the coordinatewise
//! scalar map `s·x + c`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, ViError};
use crate::hilbert::{Space, Vector};

const POWER_ITERATIONS: usize = 200;
const POWER_TOLERANCE: f64 = 1e-10;
const LIPSCHITZ_SAFETY: f64 = 1.01;
const MONOTONE_EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Identity,
    Constant(Vector),
    /// `Mx + offset` with `M` stored row-major.
    Affine { matrix: Vec<f64>, offset: Vector },
    /// `slope·x_i + offset` in every coordinate.
    ScalarAffine { slope: f64, offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    kind: OperatorKind,
    lipschitz: Option<f64>,
    monotone: bool,
}

impl Operator {
    pub fn identity() -> Operator {
        Operator {
            kind: OperatorKind::Identity,
            lipschitz: None,
            monotone: true,
        }
    }

    pub fn constant(value: Vector) -> Operator {
        Operator {
            kind: OperatorKind::Constant(value),
            lipschitz: None,
            monotone: true,
        }
    }

    pub fn scalar_affine(slope: f64, offset: f64) -> Result<Operator> {
        if !slope.is_finite() || !offset.is_finite() {
            return Err(ViError::InvalidOperator(
                "scalar_affine coefficients must be finite".into(),
            ));
        }
        Ok(Operator {
            kind: OperatorKind::ScalarAffine { slope, offset },
            lipschitz: None,
            monotone: slope >= 0.0,
        })
    }

    /// `Mx + offset` for a row-major `dim × dim` matrix. Monotonicity is
    /// decided from the spectrum of the symmetrized matrix in the space's
    /// inner product.
    pub fn affine(rows: Vec<Vec<f64>>, offset: Vector) -> Result<Operator> {
        let dim = offset.dim();
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(ViError::InvalidOperator(format!(
                "affine matrix must be {dim}×{dim}"
            )));
        }
        let matrix: Vec<f64> = rows.into_iter().flatten().collect();
        if matrix.iter().any(|m| !m.is_finite()) {
            return Err(ViError::InvalidOperator("affine matrix has non-finite entries".into()));
        }
        let monotone = is_monotone(&matrix, offset.space());
        Ok(Operator {
            kind: OperatorKind::Affine { matrix, offset },
            lipschitz: None,
            monotone,
        })
    }

    /// Attaches a declared Lipschitz bound, which then takes precedence over
    /// the computed one.
    pub fn with_lipschitz(mut self, bound: f64) -> Result<Operator> {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(ViError::InvalidOperator(format!(
                "Lipschitz bound must be a nonnegative finite number, got {bound}"
            )));
        }
        self.lipschitz = Some(bound);
        Ok(self)
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn declared_lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn check_space(&self, space: &Arc<Space>) -> Result<()> {
        let data = match &self.kind {
            OperatorKind::Constant(v) => v,
            OperatorKind::Affine { offset, .. } => offset,
            _ => return Ok(()),
        };
        if data.in_space(space) {
            Ok(())
        } else {
            Err(ViError::DimensionMismatch {
                expected: space.dim(),
                found: data.dim(),
            })
        }
    }

    /// Evaluates `Ax`. Panics if `x` is not in the operator's space; problem
    /// construction checks this once up front.
    pub fn apply(&self, x: &Vector) -> Vector {
        match &self.kind {
            OperatorKind::Identity => x.clone(),
            OperatorKind::Constant(v) => {
                assert!(v.same_space(x), "operator applied across spaces");
                v.clone()
            }
            OperatorKind::Affine { matrix, offset } => {
                assert!(offset.same_space(x), "operator applied across spaces");
                let n = x.dim();
                let coords = matrix
                    .chunks_exact(n)
                    .zip(offset.coords())
                    .map(|(row, b)| row.iter().zip(x.coords()).map(|(m, c)| m * c).sum::<f64>() + b)
                    .collect();
                Vector::from_raw(x.space(), coords)
            }
            OperatorKind::ScalarAffine { slope, offset } => x.map(|c| slope * c + offset),
        }
    }

    /// A Lipschitz constant `L` with `‖Ax − Ay‖ ≤ L‖x − y‖`.
    ///
    /// Uses the declared bound when present. For affine operators the norm of
    /// `M` in the space's inner product is estimated by power iteration on
    /// `M*M` and inflated by 1%.
    pub fn lipschitz_upper_bound(&self) -> Result<f64> {
        if let Some(l) = self.lipschitz {
            return Ok(l);
        }
        Ok(match &self.kind {
            OperatorKind::Identity => 1.0,
            OperatorKind::Constant(_) => 0.0,
            OperatorKind::ScalarAffine { slope, .. } => slope.abs(),
            OperatorKind::Affine { matrix, offset } => {
                LIPSCHITZ_SAFETY * power_iteration_norm(matrix, offset.space())
            }
        })
    }
}

fn mat_vec(matrix: &[f64], x: &[f64]) -> Vec<f64> {
    matrix
        .chunks_exact(x.len())
        .map(|row| row.iter().zip(x).map(|(m, c)| m * c).sum())
        .collect()
}

fn mat_t_vec(matrix: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for (row, xi) in matrix.chunks_exact(n).zip(x) {
        for (o, m) in out.iter_mut().zip(row) {
            *o += m * xi;
        }
    }
    out
}

/// Operator norm of `M` w.r.t. the weighted inner product `⟨a, b⟩ = aᵀWb`.
/// The adjoint is `W⁻¹MᵀW`.
fn power_iteration_norm(matrix: &[f64], space: &Arc<Space>) -> f64 {
    let n = space.dim();
    let weights: Vec<f64> = space
        .weights()
        .map(|w| w.to_vec())
        .unwrap_or_else(|| vec![1.0; n]);
    let wnorm = |v: &[f64]| {
        v.iter()
            .zip(&weights)
            .map(|(c, w)| w * c * c)
            .sum::<f64>()
            .sqrt()
    };
    // deterministic start with no special symmetry
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7).sin()).collect();
    let n0 = wnorm(&v);
    v.iter_mut().for_each(|c| *c /= n0);
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let mv = mat_vec(matrix, &v);
        let sigma = wnorm(&mv);
        if sigma == 0.0 {
            return 0.0;
        }
        let wmv: Vec<f64> = mv.iter().zip(&weights).map(|(c, w)| c * w).collect();
        let mut next = mat_t_vec(matrix, &wmv);
        next.iter_mut().zip(&weights).for_each(|(c, w)| *c /= w);
        let len = wnorm(&next);
        if len == 0.0 {
            return sigma;
        }
        next.iter_mut().for_each(|c| *c /= len);
        let converged = (sigma - estimate).abs() <= POWER_TOLERANCE * sigma;
        estimate = sigma;
        v = next;
        if converged {
            break;
        }
    }
    estimate
}

fn is_monotone(matrix: &[f64], space: &Arc<Space>) -> bool {
    let n = space.dim();
    let m = DMatrix::from_row_slice(n, n, matrix);
    let w = match space.weights() {
        Some(w) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(w)),
        None => DMatrix::identity(n, n),
    };
    let wm = &w * &m;
    let sym = &wm + wm.transpose();
    let eig = SymmetricEigen::new(sym);
    eig.eigenvalues.iter().all(|&l| l >= -MONOTONE_EIGEN_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContractionKind {
    Constant(Vector),
    /// `scale·x + offset`.
    AffineScale { scale: f64, offset: Vector },
}

/// A strict contraction `f` with constant `rho ∈ [0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    kind: ContractionKind,
    rho: f64,
}

impl Contraction {
    pub fn constant(value: Vector) -> Contraction {
        Contraction {
            kind: ContractionKind::Constant(value),
            rho: 0.0,
        }
    }

    /// `scale·x + offset` with contraction constant `|scale|`.
    pub fn affine_scale(scale: f64, offset: Vector) -> Result<Contraction> {
        Contraction::affine_scale_with_rho(scale, offset, scale.abs())
    }

    pub fn affine_scale_with_rho(scale: f64, offset: Vector, rho: f64) -> Result<Contraction> {
        if !(rho < 1.0 && scale.abs() <= rho) {
            return Err(ViError::InvalidContraction(format!(
                "need |scale| ≤ rho < 1, got scale {scale}, rho {rho}"
            )));
        }
        Ok(Contraction {
            kind: ContractionKind::AffineScale { scale, offset },
            rho,
        })
    }

    pub fn kind(&self) -> &ContractionKind {
        &self.kind
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn check_space(&self, space: &Arc<Space>) -> Result<()> {
        let data = match &self.kind {
            ContractionKind::Constant(v) => v,
            ContractionKind::AffineScale { offset, .. } => offset,
        };
        if data.in_space(space) {
            Ok(())
        } else {
            Err(ViError::DimensionMismatch {
                expected: space.dim(),
                found: data.dim(),
            })
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        match &self.kind {
            ContractionKind::Constant(v) => v.clone(),
            ContractionKind::AffineScale { scale, offset } => offset.add_scaled(*scale, x),
        }
    }
}

/// Free-function form of [`Operator::apply`].
pub fn apply_operator(op: &Operator, x: &Vector) -> Vector {
    op.apply(x)
}

/// Free-function form of [`Contraction::apply`].
pub fn apply_contraction(f: &Contraction, x: &Vector) -> Vector {
    f.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(dim: usize) -> Arc<Space> {
        Space::euclidean(dim).unwrap()
    }

    fn v(s: &Arc<Space>, c: &[f64]) -> Vector {
        Vector::new(s, c.to_vec()).unwrap()
    }

    #[test]
    fn apply_examples() {
        let s2 = r(2);
        let s1 = r(1);
        assert_eq!(
            apply_operator(&Operator::identity(), &v(&s2, &[1.0, 2.0])).coords(),
            &[1.0, 2.0]
        );
        let minus_one = Operator::constant(v(&s1, &[-1.0]));
        assert_eq!(minus_one.apply(&v(&s1, &[7.0])).coords(), &[-1.0]);
        let diag = Operator::affine(vec![vec![2.0, 0.0], vec![0.0, 3.0]], Vector::zeros(&s2)).unwrap();
        assert_eq!(diag.apply(&v(&s2, &[1.0, 1.0])).coords(), &[2.0, 3.0]);
        let sa = Operator::scalar_affine(-2.0, 1.0).unwrap();
        assert_eq!(sa.apply(&v(&s1, &[3.0])).coords(), &[-5.0]);
        assert!(!sa.is_monotone());
    }

    #[test]
    fn contraction_examples() {
        let s = r(1);
        let one = Contraction::constant(v(&s, &[1.0]));
        assert_eq!(apply_contraction(&one, &v(&s, &[5.0])).coords(), &[1.0]);
        assert_eq!(one.rho(), 0.0);
        let half = Contraction::affine_scale(0.5, Vector::zeros(&s)).unwrap();
        assert_eq!(half.apply(&v(&s, &[2.0])).coords(), &[1.0]);
        assert_eq!(half.apply(&v(&s, &[0.0])).coords(), &[0.0]);
        assert!(Contraction::affine_scale(1.0, Vector::zeros(&s)).is_err());
        assert!(Contraction::affine_scale_with_rho(0.5, Vector::zeros(&s), 0.4).is_err());
    }

    #[test]
    fn lipschitz_bounds() {
        let s = r(2);
        assert_eq!(Operator::identity().lipschitz_upper_bound().unwrap(), 1.0);
        assert_eq!(
            Operator::constant(v(&s, &[3.0, 4.0])).lipschitz_upper_bound().unwrap(),
            0.0
        );
        let diag = Operator::affine(vec![vec![2.0, 0.0], vec![0.0, 3.0]], Vector::zeros(&s)).unwrap();
        let l = diag.lipschitz_upper_bound().unwrap();
        assert!((l - 3.03).abs() <= 0.01, "{l}");
        let declared = diag.clone().with_lipschitz(10.0).unwrap();
        assert_eq!(declared.lipschitz_upper_bound().unwrap(), 10.0);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=8 {
            let s = r(dim);
            let rows: Vec<Vec<f64>> = (0..dim)
                .map(|_| (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect())
                .collect();
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            let exact = DMatrix::from_row_slice(dim, dim, &flat).singular_values().max();
            let op = Operator::affine(rows, Vector::zeros(&s)).unwrap();
            let l = op.lipschitz_upper_bound().unwrap();
            assert!(l >= exact, "dim {dim}: {l} < {exact}");
            assert!(l <= 1.01 * exact + 1e-9, "dim {dim}: {l} vs {exact}");
        }
    }

    #[test]
    fn monotonicity_flag() {
        let s = r(2);
        let skew = Operator::affine(vec![vec![0.0, 1.0], vec![-1.0, 0.0]], Vector::zeros(&s)).unwrap();
        assert!(skew.is_monotone());
        let indefinite =
            Operator::affine(vec![vec![1.0, 0.0], vec![0.0, -0.5]], Vector::zeros(&s)).unwrap();
        assert!(!indefinite.is_monotone());
        assert!(Operator::affine(vec![vec![1.0]], Vector::zeros(&s)).is_err());
    }

    #[test]
    fn sampled_operator_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dim = 4;
        let s = r(dim);
        let rand_vec = |rng: &mut ChaCha8Rng| {
            Vector::new(&s, (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()).unwrap()
        };
        // B Bᵀ + skew is monotone
        let b: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let k: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let bbt: f64 = (0..dim).map(|t| b[i * dim + t] * b[j * dim + t]).sum();
                        bbt + k[i * dim + j] - k[j * dim + i]
                    })
                    .collect()
            })
            .collect();
        let offset = rand_vec(&mut rng);
        let ops = vec![
            Operator::identity(),
            Operator::constant(rand_vec(&mut rng)),
            Operator::affine(rows, offset).unwrap(),
            Operator::scalar_affine(2.5, -1.0).unwrap(),
        ];
        let f = Contraction::affine_scale(-0.7, rand_vec(&mut rng)).unwrap();
        for op in &ops {
            assert!(op.is_monotone());
            let l = op.lipschitz_upper_bound().unwrap();
            for _ in 0..1000 {
                let x = rand_vec(&mut rng);
                let y = rand_vec(&mut rng);
                let d = &op.apply(&x) - &op.apply(&y);
                assert!(d.dot(&(&x - &y)) >= -1e-10);
                assert!(d.norm() <= l * x.distance(&y) + 1e-10);
                assert!(f.apply(&x).distance(&f.apply(&y)) <= f.rho() * x.distance(&y) + 1e-10);
            }
        }
    }

    #[test]
    fn weighted_norm_on_grid() {
        // diag(1, 2, 3) on a 3-point grid: the weighted operator norm is still 3
        let g = Space::grid_l2(3).unwrap();
        let op = Operator::affine(
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]],
            Vector::zeros(&g),
        )
        .unwrap();
        assert!((op.lipschitz_upper_bound().unwrap() - 3.03).abs() < 1e-6);
        assert!(op.is_monotone());
    }
}
