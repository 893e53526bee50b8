//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};
use crate::num::Real;

const MAX_DEPTH: u32 = 40;

/// `int_a^b f` to absolute tolerance `tol`; the interval is first cut into `panels`
/// pieces so narrow features are not skipped.
pub fn adaptive_simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T, panels: usize) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let panels = panels.max(1);
    let h = (b - a) / T::from_usize_lossy(panels);
    let ptol = tol / T::from_usize_lossy(panels);
    let mut total = T::zero();
    for p in 0..panels {
        let lo = a + h * T::from_usize_lossy(p);
        let hi = if p + 1 == panels { b } else { lo + h };
        let m = (lo + hi) * T::lit(0.5);
        let (fa, fm, fb) = (f(lo), f(m), f(hi));
        let whole = simpson(lo, hi, fa, fm, fb);
        total += recurse(&f, lo, hi, fa, fm, fb, whole, ptol, MAX_DEPTH)?;
    }
    Ok(total)
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> Result<T> {
    let m = (a + b) * T::lit(0.5);
    let lm = (a + m) * T::lit(0.5);
    let rm = (m + b) * T::lit(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= T::lit(15.0) * tol || (b - a).abs() <= T::eps() * (a.abs() + b.abs()) * T::lit(8.0) {
        return Ok(left + right + delta / T::lit(15.0));
    }
    if depth == 0 {
        return Err(Error::Quadrature {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
            error: delta.abs().to_f64_lossy(),
            worst: format!("subinterval [{a}, {b}]"),
        });
    }
    let half = tol * T::lit(0.5);
    Ok(recurse(f, a, m, fa, flm, fm, left, half, depth - 1)? + recurse(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_and_peaked() {
        let v = adaptive_simpson(|x: f64| x.exp(), 0.0, 1.0, 1e-12, 1).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
        let v = adaptive_simpson(|x: f64| (-(x / 0.01).powi(2)).exp(), -1.0, 1.0, 1e-12, 4).unwrap();
        assert!((v - 0.01 * std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }
}
