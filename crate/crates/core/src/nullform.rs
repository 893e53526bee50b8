//! The null form, the induced vector field and its one-form.

use crate::error::{Error, Result};
use crate::minkowski::{pairing, Covector, LightVector};
use crate::num::Real;
use crate::potential::{Potential, Support};
use crate::profile::Profile;

/// `q(x,u) ((d_t u)^2 - |grad_x' u|^2) = -q <grad u, grad u>_M`.
#[inline]
pub fn null_form<T: Real>(q: &(impl Potential<T> + ?Sized), x: &[T; 4], u: T, grad_u: &Covector<T>) -> T {
    let qv = q.eval(x, u);
    if qv == T::zero() {
        return T::zero();
    }
    -qv * pairing(grad_u, grad_u)
}

/// Everything needed to evaluate `F(V, W, x)` and the vector field it pairs.
pub struct Interaction<'a, T: Real> {
    pub q: &'a dyn Potential<T>,
    pub phi: &'a Profile<T>,
    pub v: LightVector<T>,
    pub w: LightVector<T>,
    /// `<V~, W~>_M`.
    pub pair: T,
    supp: Support<T>,
}

impl<'a, T: Real> Interaction<'a, T> {
    pub fn new(q: &'a dyn Potential<T>, phi: &'a Profile<T>, v: LightVector<T>, w: LightVector<T>) -> Result<Self> {
        if w.sign() != -1 {
            return Err(Error::InvalidInput("W must be a forward light vector (-1, omega)".into()));
        }
        if v.dim() != w.dim() {
            return Err(Error::DimensionMismatch { expected: v.dim(), got: w.dim() });
        }
        let pair = pairing(&v.twin_covector(), &w.twin_covector());
        Ok(Interaction { q, phi, v, w, pair, supp: q.support() })
    }

    /// `F(V, W, x) = <q(x, phi_V) phi_V' V~, W~>_M`.
    #[inline]
    pub fn f(&self, x: &[T; 4]) -> T {
        if !self.supp.contains(x) {
            return T::zero();
        }
        let (phi, d1, _) = self.phi.eval(self.v.dot_coords(x));
        if d1 == T::zero() {
            return T::zero();
        }
        self.q.eval(x, phi) * d1 * self.pair
    }

    /// The covector `q(x, phi_V) phi_V' V~`.
    pub fn vector_field(&self, x: &[T; 4]) -> Covector<T> {
        vector_field_f(self.q, self.phi, &self.v, x)
    }
}

pub fn vector_field_f<T: Real>(q: &(impl Potential<T> + ?Sized), phi: &Profile<T>, v: &LightVector<T>, x: &[T; 4]) -> Covector<T> {
    let s = v.dot_coords(x);
    let k = q.eval(x, phi.value(s)) * phi.d1(s);
    let t = v.twin_covector();
    [k * t[0], k * t[1], k * t[2], k * t[3]]
}

/// `F(V, W, x)`; `W` must have time component `-1`.
pub fn scalar_f<T: Real>(q: &dyn Potential<T>, phi: &Profile<T>, v: &LightVector<T>, w: &LightVector<T>, x: &[T; 4]) -> Result<T> {
    Ok(Interaction::new(q, phi, *v, *w)?.f(x))
}

/// The one-form `eta = q(x, phi_V) phi_V' V~_j dx_j`.
pub struct OneForm<'a, T: Real> {
    pub q: &'a dyn Potential<T>,
    pub phi: &'a Profile<T>,
    pub v: LightVector<T>,
}

pub type Matrix4<T> = [[T; 4]; 4];

impl<'a, T: Real> OneForm<'a, T> {
    #[inline]
    pub fn components(&self, x: &[T; 4]) -> Covector<T> {
        vector_field_f(self.q, self.phi, &self.v, x)
    }

    /// `d eta` by centered differences with step `delta`; only the leading
    /// `(n+1) x (n+1)` block is filled.
    pub fn exterior_derivative(&self, x: &[T; 4], delta: T) -> Matrix4<T> {
        let n1 = self.v.dim() + 1;
        let mut partial = [[T::zero(); 4]; 4]; // partial[m][j] = d_m eta_j
        for m in 0..n1 {
            let mut xp = *x;
            let mut xm = *x;
            xp[m] += delta;
            xm[m] -= delta;
            let ep = self.components(&xp);
            let em = self.components(&xm);
            for j in 0..n1 {
                partial[m][j] = (ep[j] - em[j]) / (T::lit(2.0) * delta);
            }
        }
        antisymmetrize(&partial, n1)
    }

    /// `d eta` from the analytic partials: only `d_m q phi' V~_j - d_j q phi' V~_m` survives.
    pub fn exterior_derivative_exact(&self, x: &[T; 4]) -> Matrix4<T> {
        let n1 = self.v.dim() + 1;
        let s = self.v.dot_coords(x);
        let (val, d1, d2) = self.phi.eval(s);
        let t = self.v.twin_covector();
        let g = self.q.grad_x(x, val);
        let qu = self.q.du(x, val, 1);
        let qv = self.q.eval(x, val);
        let mut partial = [[T::zero(); 4]; 4];
        for m in 0..n1 {
            // d_m of the scalar q(x, phi_V) phi_V'
            let dk = (g[m] + qu * d1 * t[m]) * d1 + qv * d2 * t[m];
            for j in 0..n1 {
                partial[m][j] = dk * t[j];
            }
        }
        antisymmetrize(&partial, n1)
    }
}

fn antisymmetrize<T: Real>(p: &Matrix4<T>, n1: usize) -> Matrix4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for m in 0..n1 {
        for j in (m + 1)..n1 {
            let v = p[m][j] - p[j][m];
            out[m][j] = v;
            out[j][m] = -v;
        }
    }
    out
}

/// Largest absolute entry of a matrix.
pub fn max_abs<T: Real>(m: &Matrix4<T>) -> T {
    m.iter().flatten().fold(T::zero(), |a, &b| a.max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{catalog, ZeroPotential};

    #[test]
    fn null_form_examples() {
        let q = catalog::<f64>("bump_const_u", 1.0, 10.0, [0.0; 3]).unwrap();
        let x = [0.0; 4];
        assert!((null_form(q.as_ref(), &x, 0.0, &[2.0, 1.0, 0.0, 0.0]) - 3.0).abs() < 1e-14);
        assert_eq!(null_form(&ZeroPotential, &x, 1.0, &[2.0, 1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn exterior_derivative_matches_exact() {
        let q = catalog::<f64>("gaussian_xy_cubic_u", 1.0, 0.8, [0.0; 3]).unwrap();
        let phi = Profile::bump(0.0, 1.0);
        let v = LightVector::normalized(1, &[0.6, 0.8]).unwrap();
        let eta = OneForm { q: q.as_ref(), phi: &phi, v };
        let x = [0.1, 0.2, -0.1, 0.0];
        let a = eta.exterior_derivative_exact(&x);
        for d in [1e-3, 5e-4] {
            let b = eta.exterior_derivative(&x, d);
            for m in 0..3 {
                for j in 0..3 {
                    assert!((a[m][j] - b[m][j]).abs() < 50.0 * d * d, "{m}{j}");
                    assert_eq!(b[m][j], -b[j][m]);
                }
            }
        }
        assert!(max_abs(&a) > 1e-3);
    }

    #[test]
    fn forward_vector_required() {
        let phi = Profile::bump(0.0, 1.0);
        let v = LightVector::new(-1, &[1.0]).unwrap();
        assert!(scalar_f(&ZeroPotential, &phi, &v, &v.twin(), &[0.0; 4]).is_err());
        assert_eq!(scalar_f(&ZeroPotential, &phi, &v, &v, &[0.0; 4]).unwrap(), 0.0);
    }
}
