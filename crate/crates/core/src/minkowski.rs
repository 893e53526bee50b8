//! Null vectors, Minkowski pairings and plane-wave backgrounds.
//!
//! Spacetime covectors are stored as `[T; 4]` with the time component first and
//! unused spatial slots zero, so pairings never need the dimension.

use crate::constants::UNIT_NORM_TOL;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::profile::Profile;

/// Spacetime covector `(c0, c1, c2, c3)`; components past `n` are zero.
pub type Covector<T> = [T; 4];

/// Spatial dimension, 1 to 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Dim(usize);

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if (1..=3).contains(&n) {
            Ok(Dim(n))
        } else {
            Err(Error::InvalidInput(format!("spatial dimension must be 1, 2 or 3, got {n}")))
        }
    }
    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimePoint<T> {
    pub x0: T,
    xp: [T; 3],
    dim: usize,
}

impl<T: Real> SpacetimePoint<T> {
    pub fn new(x0: T, xp: &[T]) -> Result<Self> {
        let dim = Dim::new(xp.len())?.get();
        let mut a = [T::zero(); 3];
        a[..dim].copy_from_slice(xp);
        Ok(SpacetimePoint { x0, xp: a, dim })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn xp(&self) -> &[T] {
        &self.xp[..self.dim]
    }

    /// `(x0, x1, x2, x3)` padded with zeros.
    #[inline]
    pub fn coords(&self) -> [T; 4] {
        [self.x0, self.xp[0], self.xp[1], self.xp[2]]
    }

    pub fn from_coords(c: [T; 4], dim: usize) -> Self {
        SpacetimePoint { x0: c[0], xp: [c[1], c[2], c[3]], dim }
    }
}

/// The constant metric `diag(-1, 1, ..., 1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinkowskiMetric;

impl MinkowskiMetric {
    #[inline]
    pub fn entry<T: Real>(j: usize, k: usize) -> T {
        match (j, k) {
            (0, 0) => -T::one(),
            (a, b) if a == b => T::one(),
            _ => T::zero(),
        }
    }
}

/// `<a, b>_M = -a0 b0 + sum_j a_j b_j`.
#[inline]
pub fn pairing<T: Real>(a: &Covector<T>, b: &Covector<T>) -> T {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Pairing of two complex covectors, bilinear (no conjugation).
#[inline]
pub fn pairing_c<T: Real>(a: &[num_complex::Complex<T>; 4], b: &[num_complex::Complex<T>; 4]) -> num_complex::Complex<T> {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// A null covector `V = (sign, direction)` with `|direction| = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightVector<T> {
    sign: i8,
    dir: [T; 3],
    dim: usize,
}

impl<T: Real> LightVector<T> {
    pub fn new(sign: i8, direction: &[T]) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidInput(format!("light vector sign must be +1 or -1, got {sign}")));
        }
        let dim = Dim::new(direction.len())?.get();
        let norm = crate::num::norm2(direction);
        if (norm - T::one()).abs().to_f64_lossy() > UNIT_NORM_TOL.max(4.0 * T::eps().to_f64_lossy()) {
            return Err(Error::InvalidInput(format!("light vector direction must have unit length, |theta| = {norm}")));
        }
        let mut dir = [T::zero(); 3];
        dir[..dim].copy_from_slice(direction);
        Ok(LightVector { sign, dir, dim })
    }

    /// Normalizes `direction` before building the vector.
    pub fn normalized(sign: i8, direction: &[T]) -> Result<Self> {
        let norm = crate::num::norm2(direction);
        if norm == T::zero() {
            return Err(Error::InvalidInput("zero light vector direction".into()));
        }
        let d: Vec<T> = direction.iter().map(|&x| x / norm).collect();
        Self::new(sign, &d)
    }

    /// Forward vector `W = (-1, omega)` used for the carrier.
    pub fn forward(omega: &[T]) -> Result<Self> {
        Self::new(-1, omega)
    }

    /// Unit vector at angle `alpha` in the plane.
    pub fn planar(sign: i8, alpha: T) -> Self {
        LightVector { sign, dir: [alpha.cos(), alpha.sin(), T::zero()], dim: 2 }
    }

    #[inline]
    pub fn sign(&self) -> i8 {
        self.sign
    }
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    pub fn direction(&self) -> &[T] {
        &self.dir[..self.dim]
    }
    #[inline]
    pub fn time_component(&self) -> T {
        T::lit(self.sign as f64)
    }

    #[inline]
    pub fn covector(&self) -> Covector<T> {
        [self.time_component(), self.dir[0], self.dir[1], self.dir[2]]
    }

    pub fn twin(&self) -> Self {
        LightVector { sign: -self.sign, ..*self }
    }

    /// `V~` as a covector.
    #[inline]
    pub fn twin_covector(&self) -> Covector<T> {
        [-self.time_component(), self.dir[0], self.dir[1], self.dir[2]]
    }

    /// `<x, V>_M` with no dimension check, for hot loops over padded coordinates.
    #[inline]
    pub fn dot_coords(&self, c: &[T; 4]) -> T {
        -self.time_component() * c[0] + c[1] * self.dir[0] + c[2] * self.dir[1] + c[3] * self.dir[2]
    }
}

/// `<x, V>_M = -V0 x0 + x'.theta`.
pub fn minkowski_dot<T: Real>(x: &SpacetimePoint<T>, v: &LightVector<T>) -> Result<T> {
    if x.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim(), got: x.dim() });
    }
    Ok(v.dot_coords(&x.coords()))
}

/// Value, spacetime gradient and d'Alembertian of `phi_V(x) = phi(<x,V>_M)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Background<T> {
    pub value: T,
    pub gradient: Covector<T>,
    pub dalembertian: T,
}

pub fn eval_background<T: Real>(phi: &Profile<T>, v: &LightVector<T>, x: &SpacetimePoint<T>) -> Result<Background<T>> {
    let s = minkowski_dot(x, v)?;
    Ok(background_at(phi, v, s))
}

/// Background evaluated from the scalar argument `s = <x,V>_M`.
#[inline]
pub fn background_at<T: Real>(phi: &Profile<T>, v: &LightVector<T>, s: T) -> Background<T> {
    let d1 = phi.d1(s);
    let vt = v.twin_covector();
    Background {
        value: phi.value(s),
        gradient: [d1 * vt[0], d1 * vt[1], d1 * vt[2], d1 * vt[3]],
        // phi'' <V~, V~>_M vanishes identically because V~ is null.
        dalembertian: T::zero(),
    }
}

/// Real or complex quantity with time derivative and spatial gradient at a point.
pub trait Differentiable<T: Real> {
    /// `(d_t f, grad_x' f)` at `x` as a covector.
    fn gradient(&self, x: &SpacetimePoint<T>) -> Covector<T>;
}

impl<T: Real, F: Fn(&SpacetimePoint<T>) -> Covector<T>> Differentiable<T> for F {
    fn gradient(&self, x: &SpacetimePoint<T>) -> Covector<T> {
        self(x)
    }
}

/// `T f = d_t f - omega . grad_x' f` for a field with known gradient.
pub fn transport_operator_apply<T: Real>(field: &impl Differentiable<T>, omega: &LightVector<T>, x: &SpacetimePoint<T>) -> T {
    let g = field.gradient(x);
    transport_from_gradient(&g, omega.direction())
}

#[inline]
pub fn transport_from_gradient<T: Real>(g: &Covector<T>, omega: &[T]) -> T {
    let mut r = g[0];
    for (j, &w) in omega.iter().enumerate() {
        r -= w * g[j + 1];
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_examples() {
        let v = LightVector::new(1, &[1.0, 0.0]).unwrap();
        let x = SpacetimePoint::new(1.0, &[1.0, 0.0]).unwrap();
        assert_eq!(minkowski_dot(&x, &v).unwrap(), 0.0);
        let v = LightVector::new(-1, &[0.0, 1.0]).unwrap();
        let x = SpacetimePoint::new(2.0, &[1.0, 0.0]).unwrap();
        assert_eq!(minkowski_dot(&x, &v).unwrap(), 2.0);
        let x1 = SpacetimePoint::new(2.0, &[1.0]).unwrap();
        assert!(matches!(minkowski_dot(&x1, &v), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn twin_is_involution_and_null() {
        let v = LightVector::<f64>::normalized(1, &[0.3, -0.4, 0.5]).unwrap();
        assert_eq!(v.twin().twin(), v);
        let c = v.covector();
        let t = v.twin_covector();
        assert!(pairing(&c, &c).abs() < 1e-15);
        assert!(pairing(&t, &t).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_unit_direction() {
        assert!(LightVector::new(1, &[1.0, 1.0]).is_err());
        assert!(LightVector::new(2, &[1.0]).is_err());
    }

    #[test]
    fn metric_signature() {
        assert_eq!(MinkowskiMetric::entry::<f64>(0, 0), -1.0);
        assert_eq!(MinkowskiMetric::entry::<f64>(2, 2), 1.0);
        assert_eq!(MinkowskiMetric::entry::<f64>(0, 2), 0.0);
    }

    #[test]
    fn transport_of_time_coordinate() {
        let w = LightVector::forward(&[0.6, 0.8]).unwrap();
        let f = |_: &SpacetimePoint<f64>| [1.0, 0.0, 0.0, 0.0];
        let x = SpacetimePoint::new(0.3, &[0.1, 0.2]).unwrap();
        assert_eq!(transport_operator_apply(&f, &w, &x), 1.0);
    }
}
