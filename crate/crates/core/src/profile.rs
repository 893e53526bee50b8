//! One-variable profiles with exact first and second derivatives.

use crate::error::{Error, Result};
use crate::num::Real;

/// Compactly supported smooth profile used for `phi` and `chi`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile<T> {
    /// `P(s - c) b((s - c)/r)` with `b(t) = exp(1 - 1/(1 - t^2))` and polynomial `P`
    /// given by ascending coefficients.
    Bump { center: T, radius: T, poly: Vec<T> },
    /// `cos^(2k)(pi (s - c) / (2r))` on `|s - c| < r`.
    CosineWindow { center: T, radius: T, power: u32 },
    /// Antiderivative of a smoothed positive plateau on `[c - L, c + L]` followed by the
    /// matching negative plateau, so the profile is flat with slope 1 on the first
    /// window and returns to zero after the second. `delta` is the edge width.
    Ramp { center: T, half_width: T, delta: T },
    /// Constant value; infinite support, zero derivative.
    Constant { value: T },
}

// Degree-7 smoothstep on [0, 1] with three vanishing derivatives at both ends,
// its antiderivative and its first derivative.
#[inline]
fn smoothstep<T: Real>(t: T) -> T {
    let t4 = t * t * t * t;
    t4 * (T::lit(35.0) + t * (T::lit(-84.0) + t * (T::lit(70.0) + t * T::lit(-20.0))))
}
#[inline]
fn smoothstep_int<T: Real>(t: T) -> T {
    let t5 = t * t * t * t * t;
    t5 * (T::lit(7.0) + t * (T::lit(-14.0) + t * (T::lit(10.0) + t * T::lit(-2.5))))
}
#[inline]
fn smoothstep_d<T: Real>(t: T) -> T {
    let t3 = t * t * t;
    t3 * (T::lit(140.0) + t * (T::lit(-420.0) + t * (T::lit(420.0) + t * T::lit(-140.0))))
}

impl<T: Real> Profile<T> {
    pub fn bump(center: T, radius: T) -> Self {
        Profile::Bump { center, radius, poly: vec![T::one()] }
    }

    pub fn cosine(center: T, radius: T, power: u32) -> Self {
        Profile::CosineWindow { center, radius, power }
    }

    pub fn ramp(center: T, half_width: T, delta: T) -> Self {
        Profile::Ramp { center, half_width, delta }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        match self {
            Profile::Bump { radius, poly, .. } => {
                if !(*radius > T::zero()) {
                    return bad("bump radius must be positive");
                }
                if poly.is_empty() {
                    return bad("bump polynomial must have at least one coefficient");
                }
            }
            Profile::CosineWindow { radius, power, .. } => {
                if !(*radius > T::zero()) || *power == 0 {
                    return bad("cosine window needs positive radius and power");
                }
            }
            Profile::Ramp { half_width, delta, .. } => {
                if !(*half_width >= T::zero()) || !(*delta > T::zero()) {
                    return bad("ramp needs non-negative half width and positive edge");
                }
            }
            Profile::Constant { .. } => {}
        }
        Ok(())
    }

    /// Closed support interval, `None` for the constant profile.
    pub fn support(&self) -> Option<(T, T)> {
        match self {
            Profile::Bump { center, radius, .. } | Profile::CosineWindow { center, radius, .. } => {
                Some((*center - *radius, *center + *radius))
            }
            Profile::Ramp { center, half_width, delta } => {
                let e = *half_width + *delta;
                Some((*center - e, *center + T::lit(3.0) * e))
            }
            Profile::Constant { .. } => None,
        }
    }

    /// Support interval of the derivative (the constant profile has empty derivative support).
    pub fn derivative_support(&self) -> Option<(T, T)> {
        match self {
            Profile::Constant { .. } => None,
            _ => self.support(),
        }
    }

    /// Radius of the smallest interval centred at zero holding the support.
    pub fn support_radius(&self) -> T {
        match self.support() {
            Some((a, b)) => a.abs().max(b.abs()),
            None => T::infinity(),
        }
    }

    #[inline]
    pub fn value(&self, s: T) -> T {
        self.eval(s).0
    }
    #[inline]
    pub fn d1(&self, s: T) -> T {
        self.eval(s).1
    }
    #[inline]
    pub fn d2(&self, s: T) -> T {
        self.eval(s).2
    }

    /// `(f, f', f'')` at `s`.
    pub fn eval(&self, s: T) -> (T, T, T) {
        let z = T::zero();
        match self {
            Profile::Bump { center, radius, poly } => {
                let r = *radius;
                let y = s - *center;
                let t = y / r;
                if t.abs() >= T::one() {
                    return (z, z, z);
                }
                let one = T::one();
                let two = T::lit(2.0);
                let w = one - t * t;
                let b = (one - one / w).exp();
                // b = exp(g), derivatives with respect to y
                let g1 = -two * t / (w * w) / r;
                let g2 = (-two / (w * w) - T::lit(8.0) * t * t / (w * w * w)) / (r * r);
                let b1 = b * g1;
                let b2 = b * (g1 * g1 + g2);
                let (p, p1, p2) = horner2(poly, y);
                (p * b, p1 * b + p * b1, p2 * b + two * p1 * b1 + p * b2)
            }
            Profile::CosineWindow { center, radius, power } => {
                let y = s - *center;
                if y.abs() >= *radius {
                    return (z, z, z);
                }
                let a = T::PI() / (T::lit(2.0) * *radius);
                let c = (a * y).cos();
                let sn = (a * y).sin();
                let k2 = 2 * *power as i32;
                let kk = T::lit(k2 as f64);
                let f = c.powi(k2);
                let f1 = -kk * a * c.powi(k2 - 1) * sn;
                let f2 = kk * (kk - T::one()) * a * a * c.powi(k2 - 2) * sn * sn - kk * a * a * f;
                (f, f1, f2)
            }
            Profile::Ramp { center, half_width, delta } => {
                let y = s - *center;
                let e = *half_width + *delta;
                let shift = T::lit(2.0) * e;
                let (i1, p1, d1) = plateau(y, *half_width, *delta);
                let (i2, p2, d2) = plateau(y - shift, *half_width, *delta);
                (i1 - i2, p1 - p2, d1 - d2)
            }
            Profile::Constant { value } => (*value, z, z),
        }
    }
}

/// Polynomial value and first two derivatives.
fn horner2<T: Real>(c: &[T], y: T) -> (T, T, T) {
    let mut p = T::zero();
    let mut p1 = T::zero();
    let mut p2 = T::zero();
    for &a in c.iter().rev() {
        p2 = p2 * y + T::lit(2.0) * p1;
        p1 = p1 * y + p;
        p = p * y + a;
    }
    (p, p1, p2)
}

/// Antiderivative, value and derivative of the plateau `Pi` with flat top on `[-L, L]`
/// and smoothstep edges of width `delta`.
fn plateau<T: Real>(y: T, l: T, delta: T) -> (T, T, T) {
    let z = T::zero();
    let half = T::lit(0.5);
    if y <= -l - delta {
        (z, z, z)
    } else if y < -l {
        let t = (y + l + delta) / delta;
        (delta * smoothstep_int(t), smoothstep(t), smoothstep_d(t) / delta)
    } else if y <= l {
        (delta * half + (y + l), T::one(), z)
    } else if y < l + delta {
        let t = (l + delta - y) / delta;
        (delta * half + T::lit(2.0) * l + delta * (half - smoothstep_int(t)), smoothstep(t), -smoothstep_d(t) / delta)
    } else {
        (T::lit(2.0) * l + delta, z, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(p: &Profile<f64>, lo: f64, hi: f64) {
        for i in 0..=200 {
            let s = lo + (hi - lo) * i as f64 / 200.0;
            let errs: Vec<f64> =
                crate::constants::FD_CHECK_STEPS.iter().map(|&d| ((p.value(s + d) - p.value(s - d)) / (2.0 * d) - p.d1(s)).abs()).collect();
            assert!(errs[0] < 1e-3, "s={s} err={}", errs[0]);
            let e2 = ((p.d1(s + 1e-4) - p.d1(s - 1e-4)) / 2e-4 - p.d2(s)).abs();
            assert!(e2 < 1e-2 * (1.0 + p.d2(s).abs()), "s={s} e2={e2}");
        }
    }

    #[test]
    fn bump_derivatives() {
        let p = Profile::Bump { center: 0.2, radius: 0.7, poly: vec![1.0, -0.5, 0.3] };
        fd_check(&p, -0.6, 0.9);
        assert_eq!(p.value(0.2), 1.0);
        assert_eq!(p.eval(1.0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn cosine_derivatives() {
        let p = Profile::cosine(-0.1, 0.5, 3);
        fd_check(&p, -0.6, 0.4);
        assert!((p.value(-0.1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ramp_shape() {
        let p = Profile::ramp(0.0, 1.0, 0.25);
        fd_check(&p, -1.3, 3.8);
        for s in [-0.9, 0.0, 0.5, 0.99] {
            assert_eq!(p.d1(s), 1.0);
        }
        // integral of the plateau is 2L + delta; profile vanishes past the second plateau
        assert!((p.value(1.25) - 2.25).abs() < 1e-14);
        let (_, b) = p.support().unwrap();
        assert!(p.value(b + 1e-9).abs() < 1e-14);
        assert!(p.value(b - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep(1.0_f64), 1.0);
        assert!((smoothstep_int(1.0_f64) - 0.5).abs() < 1e-15);
        assert_eq!(smoothstep_d(1.0_f64), 0.0);
    }
}
