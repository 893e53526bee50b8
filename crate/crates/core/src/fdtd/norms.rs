//! Scaled Sobolev norms `||u||_{m,mu} = sum_{|alpha| <= m} mu^{m-|alpha|} ||D^alpha u||` and
//! their exponentially weighted time integrals.

use serde::Serialize;

use crate::grid::{l2_norm, mixed_derivative, Grid};
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedNormSpec<T> {
    pub m: usize,
    pub mu: T,
    pub lambda: T,
    /// Start of the time window; the weight is `exp(-2 lambda (t - t0))`.
    pub t0: T,
}

fn multi_indices(dim: usize, m: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for a in 0..=m {
        if dim == 1 {
            out.push([a, 0]);
        } else {
            for b in 0..=(m - a) {
                out.push([a, b]);
            }
        }
    }
    out
}

/// `sum_{|alpha| <= m} mu^{m - |alpha|} ||D^alpha f||_{L^2}` with centered differences.
pub fn weighted_norm<T: Real>(grid: &Grid<T>, f: &[T], m: usize, mu: T) -> T {
    let mut s = T::zero();
    for alpha in multi_indices(grid.dim, m) {
        let k = alpha[0] + alpha[1];
        let d = if k == 0 { l2_norm(grid, f) } else { l2_norm(grid, &mixed_derivative(grid, f, alpha)) };
        s += mu.powi((m - k) as i32) * d;
    }
    s
}

/// `||f||_{H^m}` in the same sum-of-seminorms form (`mu = 1`).
pub fn hm_norm<T: Real>(grid: &Grid<T>, f: &[T], m: usize) -> T {
    weighted_norm(grid, f, m, T::one())
}

/// `(int e^{-2 lambda (t - t0)} ||u(t)||_{m,mu}^2 dt)^{1/2}` by the trapezoid rule over the frames.
pub fn spacetime_norm<T: Real>(grid: &Grid<T>, frames: &[Vec<T>], times: &[T], spec: &WeightedNormSpec<T>) -> T {
    let vals: Vec<T> = frames
        .iter()
        .zip(times)
        .map(|(f, &t)| {
            let n = weighted_norm(grid, f, spec.m, spec.mu);
            (-T::lit(2.0) * spec.lambda * (t - spec.t0)).exp() * n * n
        })
        .collect();
    trapezoid(times, &vals).sqrt()
}

pub(crate) fn trapezoid<T: Real>(times: &[T], vals: &[T]) -> T {
    let mut s = T::zero();
    for k in 1..vals.len() {
        s += (times[k] - times[k - 1]) * (vals[k] + vals[k - 1]) * T::lit(0.5);
    }
    s
}

/// Centered time differences of equally spaced frames, one-sided second order at the ends.
pub fn time_derivative<T: Real>(frames: &[Vec<T>], dt: T) -> Vec<Vec<T>> {
    let n = frames.len();
    if n < 3 {
        return frames.iter().map(|f| vec![T::zero(); f.len()]).collect();
    }
    let two = T::lit(2.0);
    (0..n)
        .map(|k| {
            let len = frames[k].len();
            (0..len)
                .map(|p| {
                    if k == 0 {
                        (-T::lit(3.0) * frames[0][p] + T::lit(4.0) * frames[1][p] - frames[2][p]) / (two * dt)
                    } else if k == n - 1 {
                        (T::lit(3.0) * frames[n - 1][p] - T::lit(4.0) * frames[n - 2][p] + frames[n - 3][p]) / (two * dt)
                    } else {
                        (frames[k + 1][p] - frames[k - 1][p]) / (two * dt)
                    }
                })
                .collect()
        })
        .collect()
}

/// `E(t) = ||d_t u||_{H^m} + ||u||_{H^{m+1}} + lambda ||u||_{H^m}`.
pub fn energy_function<T: Real>(grid: &Grid<T>, u: &[T], ut: &[T], m: usize, lambda: T) -> T {
    hm_norm(grid, ut, m) + hm_norm(grid, u, m + 1) + lambda * hm_norm(grid, u, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_ignores_mu() {
        let g = Grid::<f64>::new_1d(-1.0, 0.01, 201);
        let f: Vec<f64> = (0..g.len()).map(|p| (-(g.coord(p, 0)[0] * 4.0).powi(2)).exp()).collect();
        assert_eq!(weighted_norm(&g, &f, 0, 7.0), l2_norm(&g, &f));
        assert_eq!(weighted_norm(&g, &f, 0, 7.0), weighted_norm(&g, &f, 0, 1.0));
    }

    #[test]
    fn fourier_mode_scaling() {
        // ||f||_{1,mu} = mu ||f|| + ||f'|| and f' ~ xi f for a windowed mode
        let g = Grid::<f64>::new_1d(-3.0, 0.002, 3001);
        let xi: f64 = 40.0;
        let f: Vec<f64> = (0..g.len())
            .map(|p| {
                let x = g.coord(p, 0)[0];
                (xi * x).cos() * (-x * x).exp()
            })
            .collect();
        let w = l2_norm(&g, &f);
        let mu = 5.0;
        let n = weighted_norm(&g, &f, 1, mu);
        assert!(((n / w) - (mu + xi)).abs() / (mu + xi) < 1e-2, "{}", n / w);
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 3).len(), 4);
        assert_eq!(multi_indices(2, 2).len(), 6);
    }
}
