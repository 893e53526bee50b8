//! Semilinear potentials `q(x, u)`.

mod catalog;
mod grid;

pub use catalog::{catalog, catalog_keys, Separable, SpatialFactor};
pub use grid::GridPotential;

use crate::num::Real;

/// Where a potential can be nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support<T> {
    /// `|(t - c0, x' - c')| <= radius`.
    SpacetimeBall { center: [T; 4], radius: T },
    /// `|x' - c'| <= radius` for all times.
    SpatialCylinder { center: [T; 3], radius: T },
    /// Identically zero.
    Empty,
}

impl<T: Real> Support<T> {
    /// Spatial radius bound `R` with `q = 0` for `|x'| > R`.
    pub fn spatial_radius(&self) -> T {
        match self {
            Support::SpacetimeBall { center, radius } => {
                let c = (center[1] * center[1] + center[2] * center[2] + center[3] * center[3]).sqrt();
                c + *radius
            }
            Support::SpatialCylinder { center, radius } => crate::num::norm2(center) + *radius,
            Support::Empty => T::zero(),
        }
    }

    pub fn contains(&self, x: &[T; 4]) -> bool {
        match self {
            Support::SpacetimeBall { center, radius } => {
                let d: T = (0..4).map(|j| (x[j] - center[j]) * (x[j] - center[j])).sum();
                d <= *radius * *radius
            }
            Support::SpatialCylinder { center, radius } => {
                let d: T = (0..3).map(|j| (x[j + 1] - center[j]) * (x[j + 1] - center[j])).sum();
                d <= *radius * *radius
            }
            Support::Empty => false,
        }
    }

    /// Parameter interval `[a, b]` on which `x0 + s dir` may lie in the support.
    pub fn clip_line(&self, x0: &[T; 4], dir: &[T; 4]) -> Option<(T, T)> {
        let (c, r, mask): ([T; 4], T, [bool; 4]) = match self {
            Support::SpacetimeBall { center, radius } => (*center, *radius, [true; 4]),
            Support::SpatialCylinder { center, radius } => {
                ([T::zero(), center[0], center[1], center[2]], *radius, [false, true, true, true])
            }
            Support::Empty => return None,
        };
        let mut a = T::zero();
        let mut b = T::zero();
        let mut cc = -r * r;
        for j in 0..4 {
            if mask[j] {
                let d = x0[j] - c[j];
                a += dir[j] * dir[j];
                b += T::lit(2.0) * d * dir[j];
                cc += d * d;
            }
        }
        if a == T::zero() {
            return if cc <= T::zero() { Some((T::neg_infinity(), T::infinity())) } else { None };
        }
        let disc = b * b - T::lit(4.0) * a * cc;
        if disc < T::zero() {
            return None;
        }
        let sq = disc.sqrt();
        let two_a = T::lit(2.0) * a;
        Some(((-b - sq) / two_a, (-b + sq) / two_a))
    }
}

/// A potential `q(x, u)` with its partial derivatives.
///
/// Points are padded spacetime coordinates `(t, x1, x2, x3)`.
pub trait Potential<T: Real>: Send + Sync {
    fn eval(&self, x: &[T; 4], u: T) -> T;

    /// `(d_t q, d_x1 q, d_x2 q, d_x3 q)`.
    fn grad_x(&self, x: &[T; 4], u: T) -> [T; 4];

    /// `d^k q / du^k` at `(x, u)`; `k = 0` is the value.
    fn du(&self, x: &[T; 4], u: T, k: usize) -> T;

    fn support(&self) -> Support<T>;

    fn time_independent(&self) -> bool;

    /// True when `q` does not depend on `u`.
    fn u_independent(&self) -> bool;

    /// Short description used in reports.
    fn describe(&self) -> String;

    fn is_zero(&self) -> bool {
        matches!(self.support(), Support::Empty)
    }
}

impl<T: Real, P: Potential<T> + ?Sized> Potential<T> for Box<P> {
    fn eval(&self, x: &[T; 4], u: T) -> T {
        (**self).eval(x, u)
    }
    fn grad_x(&self, x: &[T; 4], u: T) -> [T; 4] {
        (**self).grad_x(x, u)
    }
    fn du(&self, x: &[T; 4], u: T, k: usize) -> T {
        (**self).du(x, u, k)
    }
    fn support(&self) -> Support<T> {
        (**self).support()
    }
    fn time_independent(&self) -> bool {
        (**self).time_independent()
    }
    fn u_independent(&self) -> bool {
        (**self).u_independent()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// The potential `q = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroPotential;

impl<T: Real> Potential<T> for ZeroPotential {
    fn eval(&self, _: &[T; 4], _: T) -> T {
        T::zero()
    }
    fn grad_x(&self, _: &[T; 4], _: T) -> [T; 4] {
        [T::zero(); 4]
    }
    fn du(&self, _: &[T; 4], _: T, _: usize) -> T {
        T::zero()
    }
    fn support(&self) -> Support<T> {
        Support::Empty
    }
    fn time_independent(&self) -> bool {
        true
    }
    fn u_independent(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        "zero".into()
    }
}

/// `q` seen in a planar frame rotated by `alpha`: frame point `y` is the physical point
/// `y1 omega + y2 theta` with `omega = (cos a, sin a)` and `theta = (-sin a, cos a)`.
pub struct Rotated<'a, T> {
    pub inner: &'a dyn Potential<T>,
    pub omega: [T; 2],
}

impl<'a, T: Real> Rotated<'a, T> {
    pub fn new(inner: &'a dyn Potential<T>, alpha: T) -> Self {
        Rotated { inner, omega: [alpha.cos(), alpha.sin()] }
    }

    #[inline]
    fn to_physical(&self, y: &[T; 4]) -> [T; 4] {
        let [c, s] = self.omega;
        [y[0], y[1] * c - y[2] * s, y[1] * s + y[2] * c, y[3]]
    }

    #[inline]
    fn to_frame(&self, x: &[T; 3]) -> [T; 3] {
        let [c, s] = self.omega;
        [x[0] * c + x[1] * s, -x[0] * s + x[1] * c, x[2]]
    }
}

impl<'a, T: Real> Potential<T> for Rotated<'a, T> {
    fn eval(&self, y: &[T; 4], u: T) -> T {
        self.inner.eval(&self.to_physical(y), u)
    }
    fn grad_x(&self, y: &[T; 4], u: T) -> [T; 4] {
        let g = self.inner.grad_x(&self.to_physical(y), u);
        let [c, s] = self.omega;
        [g[0], g[1] * c + g[2] * s, -g[1] * s + g[2] * c, g[3]]
    }
    fn du(&self, y: &[T; 4], u: T, k: usize) -> T {
        self.inner.du(&self.to_physical(y), u, k)
    }
    fn support(&self) -> Support<T> {
        match self.inner.support() {
            Support::SpatialCylinder { center, radius } => Support::SpatialCylinder { center: self.to_frame(&center), radius },
            Support::SpacetimeBall { center, radius } => {
                let c = self.to_frame(&[center[1], center[2], center[3]]);
                Support::SpacetimeBall { center: [center[0], c[0], c[1], c[2]], radius }
            }
            Support::Empty => Support::Empty,
        }
    }
    fn time_independent(&self) -> bool {
        self.inner.time_independent()
    }
    fn u_independent(&self) -> bool {
        self.inner.u_independent()
    }
    fn describe(&self) -> String {
        format!("{} (rotated)", self.inner.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_line_ball() {
        let s = Support::<f64>::SpacetimeBall { center: [0.0; 4], radius: 1.0 };
        let (a, b) = s.clip_line(&[0.0, 0.0, 0.5, 0.0], &[1.0, -1.0, 0.0, 0.0]).unwrap();
        // 2 s^2 + 0.25 = 1
        let r = (0.375f64).sqrt();
        assert!((a + r).abs() < 1e-14 && (b - r).abs() < 1e-14);
        let c = Support::<f64>::SpatialCylinder { center: [0.0; 3], radius: 0.5 };
        assert!(c.clip_line(&[0.0, 0.0, 0.6, 0.0], &[1.0, -1.0, 0.0, 0.0]).is_none());
        let (a, b) = c.clip_line(&[3.0, 0.0, 0.0, 0.0], &[1.0, 0.0, -1.0, 0.0]).unwrap();
        assert!((a + 0.5).abs() < 1e-14 && (b - 0.5).abs() < 1e-14);
    }
}
