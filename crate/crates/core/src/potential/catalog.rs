use super::{Potential, Support, ZeroPotential};
use crate::error::{Error, Result};
use crate::num::Real;

/// Spatial (or spacetime) factor of a separable potential.
#[derive(Clone, Debug, PartialEq)]
pub enum SpatialFactor<T> {
    /// `b(|x' - c| / R)`, time independent.
    RadialBump { center: [T; 3], radius: T },
    /// `b(|x - c| / R)` over spacetime.
    SpacetimeBump { center: [T; 4], radius: T },
    /// `exp(-|x' - c|^2 / sigma^2) b(|x' - c| / R)`, time independent.
    GaussianCutoff { center: [T; 3], sigma: T, radius: T },
}

/// `q(x, u) = a S(x) P(u)` with `P` a polynomial (ascending coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct Separable<T> {
    pub amplitude: T,
    pub spatial: SpatialFactor<T>,
    pub upoly: Vec<T>,
    pub name: String,
}

// b(t) = exp(1 - 1/(1 - t^2)) for |t| < 1; returns (b, b'(t)/t) from the squared argument.
#[inline]
fn bump_sq<T: Real>(t2: T) -> Option<(T, T)> {
    if t2 >= T::one() {
        return None;
    }
    let w = T::one() - t2;
    let b = (T::one() - T::one() / w).exp();
    Some((b, -T::lit(2.0) * b / (w * w)))
}

impl<T: Real> SpatialFactor<T> {
    /// Value and gradient `(d_t, d_x1, d_x2, d_x3)`.
    fn eval(&self, x: &[T; 4]) -> (T, [T; 4]) {
        let z = T::zero();
        match self {
            SpatialFactor::RadialBump { center, radius } => {
                let y = [x[1] - center[0], x[2] - center[1], x[3] - center[2]];
                let r2 = *radius * *radius;
                let t2 = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / r2;
                match bump_sq(t2) {
                    None => (z, [z; 4]),
                    Some((b, bt)) => {
                        let k = bt / r2;
                        (b, [z, k * y[0], k * y[1], k * y[2]])
                    }
                }
            }
            SpatialFactor::SpacetimeBump { center, radius } => {
                let y = [x[0] - center[0], x[1] - center[1], x[2] - center[2], x[3] - center[3]];
                let r2 = *radius * *radius;
                let t2 = y.iter().map(|&a| a * a).sum::<T>() / r2;
                match bump_sq(t2) {
                    None => (z, [z; 4]),
                    Some((b, bt)) => {
                        let k = bt / r2;
                        (b, [k * y[0], k * y[1], k * y[2], k * y[3]])
                    }
                }
            }
            SpatialFactor::GaussianCutoff { center, sigma, radius } => {
                let y = [x[1] - center[0], x[2] - center[1], x[3] - center[2]];
                let d2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
                let r2 = *radius * *radius;
                match bump_sq(d2 / r2) {
                    None => (z, [z; 4]),
                    Some((b, bt)) => {
                        let s2 = *sigma * *sigma;
                        let g = (-d2 / s2).exp();
                        let k = g * (bt / r2 - T::lit(2.0) * b / s2);
                        (g * b, [z, k * y[0], k * y[1], k * y[2]])
                    }
                }
            }
        }
    }

    fn support(&self) -> Support<T> {
        match self {
            SpatialFactor::RadialBump { center, radius } | SpatialFactor::GaussianCutoff { center, radius, .. } => {
                Support::SpatialCylinder { center: *center, radius: *radius }
            }
            SpatialFactor::SpacetimeBump { center, radius } => Support::SpacetimeBall { center: *center, radius: *radius },
        }
    }
}

fn poly_deriv<T: Real>(c: &[T], u: T, k: usize) -> T {
    // Horner over sum_{j>=k} c_j j!/(j-k)! u^(j-k)
    let mut acc = T::zero();
    for (j, &cj) in c.iter().enumerate().skip(k).rev() {
        let mut fall = T::one();
        for i in 0..k {
            fall *= T::from_usize_lossy(j - i);
        }
        acc = acc * u + cj * fall;
    }
    acc
}

impl<T: Real> Potential<T> for Separable<T> {
    fn eval(&self, x: &[T; 4], u: T) -> T {
        self.amplitude * self.spatial.eval(x).0 * poly_deriv(&self.upoly, u, 0)
    }
    fn grad_x(&self, x: &[T; 4], u: T) -> [T; 4] {
        let (_, g) = self.spatial.eval(x);
        let p = self.amplitude * poly_deriv(&self.upoly, u, 0);
        [g[0] * p, g[1] * p, g[2] * p, g[3] * p]
    }
    fn du(&self, x: &[T; 4], u: T, k: usize) -> T {
        if k >= self.upoly.len() {
            return T::zero();
        }
        self.amplitude * self.spatial.eval(x).0 * poly_deriv(&self.upoly, u, k)
    }
    fn support(&self) -> Support<T> {
        if self.amplitude == T::zero() {
            Support::Empty
        } else {
            self.spatial.support()
        }
    }
    fn time_independent(&self) -> bool {
        !matches!(self.spatial, SpatialFactor::SpacetimeBump { .. })
    }
    fn u_independent(&self) -> bool {
        self.upoly.iter().skip(1).all(|&c| c == T::zero())
    }
    fn describe(&self) -> String {
        format!("{} (amplitude {})", self.name, self.amplitude)
    }
}

const KEYS: [(&str, &str); 6] = [
    ("zero", "q = 0"),
    ("bump_const_u", "a b(|x'|/R), independent of u and t"),
    ("bump_linear_u", "a b(|x'|/R) (1 + u/2)"),
    ("gaussian_xy_cubic_u", "a exp(-4|x'|^2/R^2) b(|x'|/R) (1 + u - u^3/3)"),
    ("radial_bump_2d", "a b(|x'|/R), the tomography phantom"),
    ("spacetime_bump_quadratic_u", "a b(|(t,x')|/R) (1 + u^2/2), time dependent"),
];

/// Catalog keys with one-line descriptions.
pub fn catalog_keys() -> &'static [(&'static str, &'static str)] {
    &KEYS
}

/// Builds a catalog potential centred at `center` (spatial; time centre is zero).
pub fn catalog<T: Real>(key: &str, amplitude: T, radius: T, center: [T; 3]) -> Result<Box<dyn Potential<T>>> {
    if !(radius > T::zero()) && key != "zero" {
        return Err(Error::InvalidInput(format!("potential radius must be positive, got {radius}")));
    }
    let one = T::one();
    let z = T::zero();
    let sep =
        |spatial, upoly: Vec<T>| -> Box<dyn Potential<T>> { Box::new(Separable { amplitude, spatial, upoly, name: key.to_string() }) };
    let radial = SpatialFactor::RadialBump { center, radius };
    Ok(match key {
        "zero" => Box::new(ZeroPotential),
        "bump_const_u" | "radial_bump_2d" => sep(radial, vec![one]),
        "bump_linear_u" => sep(radial, vec![one, T::lit(0.5)]),
        "gaussian_xy_cubic_u" => {
            sep(SpatialFactor::GaussianCutoff { center, sigma: radius / T::lit(2.0), radius }, vec![one, one, z, T::lit(-1.0 / 3.0)])
        }
        "spacetime_bump_quadratic_u" => {
            sep(SpatialFactor::SpacetimeBump { center: [z, center[0], center[1], center[2]], radius }, vec![one, z, T::lit(0.5)])
        }
        other => return Err(Error::UnknownKey(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_derivatives() {
        let c = [1.0, 2.0, 0.0, -1.0];
        // p = 1 + 2u - u^3
        let u = 0.7_f64;
        assert!((poly_deriv(&c, u, 0) - (1.0 + 2.0 * u - u * u * u)).abs() < 1e-15);
        assert!((poly_deriv(&c, u, 1) - (2.0 - 3.0 * u * u)).abs() < 1e-15);
        assert!((poly_deriv(&c, u, 2) - (-6.0 * u)).abs() < 1e-15);
        assert!((poly_deriv(&c, u, 3) + 6.0).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_differences() {
        for (key, _) in catalog_keys() {
            let q = catalog::<f64>(key, 0.8, 0.6, [0.05, -0.02, 0.0]).unwrap();
            let x = [0.1, 0.2, -0.15, 0.05];
            let u = 0.3;
            let g = q.grad_x(&x, u);
            for j in 0..4 {
                let d = 1e-5;
                let mut xp = x;
                let mut xm = x;
                xp[j] += d;
                xm[j] -= d;
                let fd = (q.eval(&xp, u) - q.eval(&xm, u)) / (2.0 * d);
                assert!((fd - g[j]).abs() < 1e-7, "{key} j={j}: {fd} vs {}", g[j]);
            }
            let fd = (q.eval(&x, u + 1e-5) - q.eval(&x, u - 1e-5)) / 2e-5;
            assert!((fd - q.du(&x, u, 1)).abs() < 1e-7, "{key}");
        }
    }

    #[test]
    fn vanishes_outside_support() {
        let q = catalog::<f64>("bump_linear_u", 1.0, 0.5, [0.0; 3]).unwrap();
        assert_eq!(q.eval(&[0.0, 0.5, 0.0, 0.0], 1.0), 0.0);
        assert_eq!(q.eval(&[0.0, 0.3, 0.4, 0.0], 1.0), 0.0);
        assert!(q.eval(&[0.0, 0.3, 0.39, 0.0], 1.0) > 0.0);
        assert!(catalog::<f64>("nope", 1.0, 1.0, [0.0; 3]).is_err());
    }
}
