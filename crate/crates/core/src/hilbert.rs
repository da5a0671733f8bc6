//! Real Hilbert spaces used by the solvers.
//!
//! Two instances are provided: `ℝ^d` with the dot product, and `L2[0, 1]`
//! discretized on a uniform grid with composite-trapezoid quadrature
//! weights. A grid function is stored by its point values; the inner product
//! is `Σ w_i a_i b_i`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Result, ViError};

/// Grid size used for `L2[0, 1]` when none is given.
pub const DEFAULT_GRID_POINTS: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Euclidean,
    GridL2,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Euclidean => f.write_str("euclidean"),
            SpaceKind::GridL2 => f.write_str("grid_l2"),
        }
    }
}

/// An immutable coordinate space with an inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct Space {
    kind: SpaceKind,
    dim: usize,
    weights: Option<Vec<f64>>,
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Arc<Space>> {
        if dim == 0 {
            return Err(ViError::InvalidSpace("dimension must be at least 1".into()));
        }
        Ok(Arc::new(Space {
            kind: SpaceKind::Euclidean,
            dim,
            weights: None,
        }))
    }

    /// `L2[0, 1]` sampled at `points` equispaced nodes `t_i = i / (points − 1)`.
    pub fn grid_l2(points: usize) -> Result<Arc<Space>> {
        if points < 2 {
            return Err(ViError::InvalidSpace(
                "grid_l2 needs at least 2 grid points".into(),
            ));
        }
        let h = 1.0 / (points - 1) as f64;
        let mut weights = vec![h; points];
        weights[0] = 0.5 * h;
        weights[points - 1] = 0.5 * h;
        Ok(Arc::new(Space {
            kind: SpaceKind::GridL2,
            dim: points,
            weights: Some(weights),
        }))
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Quadrature weights; `None` for Euclidean space.
    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        match &self.weights {
            None => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Some(w) => a
                .iter()
                .zip(b)
                .zip(w)
                .map(|((x, y), w)| w * x * y)
                .sum(),
        }
    }
}

/// An element of a [`Space`].
#[derive(Clone)]
pub struct Vector {
    space: Arc<Space>,
    coords: Vec<f64>,
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Vector")
            .field("space", &self.space.kind)
            .field("coords", &self.coords)
            .finish()
    }
}

impl PartialEq for Vector {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other) && self.coords == other.coords
    }
}

impl Vector {
    /// Builds a vector, rejecting wrong lengths and non-finite entries.
    pub fn new(space: &Arc<Space>, coords: Vec<f64>) -> Result<Vector> {
        if coords.len() != space.dim {
            return Err(ViError::DimensionMismatch {
                expected: space.dim,
                found: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(ViError::NonFinite(i));
        }
        Ok(Vector {
            space: Arc::clone(space),
            coords,
        })
    }

    /// Skips the finiteness check; iterates may legitimately blow up and the
    /// run engine reports that separately.
    pub(crate) fn from_raw(space: &Arc<Space>, coords: Vec<f64>) -> Vector {
        debug_assert_eq!(coords.len(), space.dim);
        Vector {
            space: Arc::clone(space),
            coords,
        }
    }

    pub fn zeros(space: &Arc<Space>) -> Vector {
        Vector::from_raw(space, vec![0.0; space.dim])
    }

    /// Every coordinate equal to `value`; a constant function on the grid.
    pub fn constant(space: &Arc<Space>, value: f64) -> Vector {
        Vector::from_raw(space, vec![value; space.dim])
    }

    /// The `index`-th coordinate direction scaled to unit norm.
    pub fn unit_basis(space: &Arc<Space>, index: usize) -> Result<Vector> {
        if index >= space.dim {
            return Err(ViError::DimensionMismatch {
                expected: space.dim,
                found: index + 1,
            });
        }
        let mut coords = vec![0.0; space.dim];
        coords[index] = 1.0;
        let v = Vector::from_raw(space, coords);
        let n = v.norm();
        if n == 0.0 {
            return Err(ViError::InvalidSpace(format!(
                "basis direction {index} has zero weight"
            )));
        }
        Ok(v.scale(1.0 / n))
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn same_space(&self, other: &Vector) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    pub fn in_space(&self, space: &Arc<Space>) -> bool {
        Arc::ptr_eq(&self.space, space) || *self.space == **space
    }

    pub fn check_same_space(&self, other: &Vector) -> Result<()> {
        if self.coords.len() != other.coords.len() {
            Err(ViError::DimensionMismatch {
                expected: self.coords.len(),
                found: other.coords.len(),
            })
        } else if !self.same_space(other) {
            Err(ViError::SpaceMismatch)
        } else {
            Ok(())
        }
    }

    /// Inner product. Panics on mismatched spaces; use [`inner`] for a
    /// checked version.
    pub fn dot(&self, other: &Vector) -> f64 {
        assert!(self.same_space(other), "inner product across spaces");
        self.space.dot(&self.coords, &other.coords)
    }

    pub fn norm_squared(&self) -> f64 {
        self.space.dot(&self.coords, &self.coords)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        assert!(self.same_space(other), "distance across spaces");
        let diff: Vec<f64> = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a - b)
            .collect();
        self.space.dot(&diff, &diff).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        self.map(|c| s * c)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector {
            space: Arc::clone(&self.space),
            coords: self.coords.iter().map(|&c| f(c)).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &Vector, b: f64) -> Vector {
        assert!(self.same_space(other), "linear combination across spaces");
        Vector {
            space: Arc::clone(&self.space),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Vector) -> Vector {
        self.lin_comb(1.0, other, s)
    }

    /// Largest absolute deviation of the coordinates from their mean; zero
    /// for constant grid functions.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .coords
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                (lo.min(c), hi.max(c))
            });
        hi - lo
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.lin_comb(1.0, rhs, 1.0)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.lin_comb(1.0, rhs, -1.0)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

/// Checked inner product.
pub fn inner(a: &Vector, b: &Vector) -> Result<f64> {
    a.check_same_space(b)?;
    Ok(a.dot(b))
}

pub fn norm(a: &Vector) -> f64 {
    a.norm()
}

/// Coordinatewise `Σ c_k v_k`.
pub fn combine(terms: &[(f64, &Vector)]) -> Result<Vector> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| ViError::Usage("combine needs at least one term".into()))?;
    let mut coords = vec![0.0; first.dim()];
    for (c, v) in terms {
        first.check_same_space(v)?;
        for (acc, x) in coords.iter_mut().zip(v.coords()) {
            *acc += c * x;
        }
    }
    Ok(Vector::from_raw(first.space(), coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e2(coords: &[f64]) -> Vector {
        Vector::new(&Space::euclidean(coords.len()).unwrap(), coords.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_inner_and_norm() {
        let s = Space::euclidean(2).unwrap();
        let a = Vector::new(&s, vec![1.0, 2.0]).unwrap();
        let b = Vector::new(&s, vec![3.0, 4.0]).unwrap();
        assert_eq!(inner(&a, &b).unwrap(), 11.0);
        assert_eq!(inner(&a, &Vector::zeros(&s)).unwrap(), 0.0);
        assert_eq!(norm(&b), 5.0);
        assert_eq!(norm(&Vector::zeros(&s)), 0.0);
    }

    #[test]
    fn grid_constants() {
        let s = Space::grid_l2(DEFAULT_GRID_POINTS).unwrap();
        let w: f64 = s.weights().unwrap().iter().sum();
        assert!((w - 1.0).abs() <= 1e-12);
        assert!(s.weights().unwrap().iter().all(|&w| w >= 0.0));
        let a = Vector::constant(&s, 2.0);
        let b = Vector::constant(&s, 3.0);
        assert!((inner(&a, &b).unwrap() - 6.0).abs() < 1e-12);
        assert!((norm(&a) - 2.0).abs() < 1e-12);
        for c in [-7.5, -1.0, 0.25, 3.0, 1e3] {
            let v = Vector::constant(&s, c);
            assert!((v.norm() - c.abs()).abs() <= 1e-12 * c.abs().max(1.0));
        }
    }

    #[test]
    fn combine_examples() {
        let x = e2(&[1.0, 0.0]);
        let y = e2(&[0.0, 1.0]);
        assert_eq!(combine(&[(1.0, &x), (2.0, &y)]).unwrap().coords(), &[1.0, 2.0]);
        let v = e2(&[3.5, -2.0]);
        assert_eq!(combine(&[(0.5, &v), (0.5, &v)]).unwrap(), v);
        assert_eq!(combine(&[(1.0, &v), (-1.0, &v)]).unwrap().coords(), &[0.0, 0.0]);
    }

    #[test]
    fn mismatches_are_errors() {
        let a = e2(&[1.0, 2.0]);
        let b = e2(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            inner(&a, &b),
            Err(ViError::DimensionMismatch { .. })
        ));
        assert!(combine(&[(1.0, &a), (1.0, &b)]).is_err());
        let g = Vector::constant(&Space::grid_l2(2).unwrap(), 1.0);
        assert_eq!(inner(&a, &g), Err(ViError::SpaceMismatch));
    }

    #[test]
    fn construction_checks() {
        let s = Space::euclidean(2).unwrap();
        assert!(Space::euclidean(0).is_err());
        assert!(Space::grid_l2(1).is_err());
        assert_eq!(
            Vector::new(&s, vec![1.0, f64::NAN]).unwrap_err(),
            ViError::NonFinite(1)
        );
        assert!(Vector::new(&s, vec![1.0]).is_err());
        let g = Space::grid_l2(5).unwrap();
        assert!((Vector::unit_basis(&g, 0).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    fn vec_pair(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-100.0..100.0f64, dim),
            prop::collection::vec(-100.0..100.0f64, dim),
        )
    }

    proptest! {
        #[test]
        fn norm_identities((a, b) in vec_pair(6), grid in any::<bool>()) {
            let s = if grid { Space::grid_l2(6).unwrap() } else { Space::euclidean(6).unwrap() };
            let x = Vector::new(&s, a).unwrap();
            let y = Vector::new(&s, b).unwrap();
            let sum = &x + &y;
            let lhs = sum.norm_squared();
            let rhs = x.norm_squared() + 2.0 * x.dot(&y) + y.norm_squared();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0));
            prop_assert!(lhs <= x.norm_squared() + 2.0 * y.dot(&sum) + 1e-10 * lhs.max(1.0));
            prop_assert!(x.dot(&y).abs() <= x.norm() * y.norm() + 1e-10);
        }
    }
}
