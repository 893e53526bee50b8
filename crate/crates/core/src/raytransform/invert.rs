//! Planar X-ray inversion: filtered backprojection and Tikhonov-regularized least squares.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{frame, Sinogram};
use crate::constants::{FBP_MIN_ANGLES, RAMP_APODIZATION_START};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum InvertMethod {
    Fbp,
    Rls,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction<T> {
    #[serde(skip)]
    pub grid: Grid<T>,
    pub values: Vec<T>,
    pub method: InvertMethod,
    pub reg: f64,
    pub iterations: usize,
    /// `||g - g_true|| / ||g_true||`, present only when the truth was supplied.
    pub rel_error: Option<f64>,
    pub warnings: Vec<String>,
}

impl<T: Real> Reconstruction<T> {
    /// Records the relative L2 error against `truth` sampled on the reconstruction grid.
    pub fn compare_with(&mut self, truth: &dyn Fn([T; 2]) -> T) -> f64 {
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for (p, v) in self.values.iter().enumerate() {
            let (i, j) = self.grid.ij(p);
            let t = truth(self.grid.coord(i, j)).to_f64_lossy();
            num += (v.to_f64_lossy() - t).powi(2);
            den += t * t;
        }
        let e = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
        self.rel_error = Some(e);
        e
    }
}

/// Ram-Lak filtered row `ds * (h * p)` with the band-limited kernel `h(0) = 1/(4 ds^2)`,
/// `h(n odd) = -1/(pi n ds)^2`, apodized by a raised cosine from `0.9 band` to `band`, where
/// `band <= 1` is the cutoff as a fraction of the offset Nyquist frequency.
pub fn ramp_filter<T: Real>(row: &[T], ds: T, band: T) -> Vec<T> {
    let n = row.len();
    if n == 0 {
        return Vec::new();
    }
    let m = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let z = Complex::new(T::zero(), T::zero());
    let mut kern = vec![z; m];
    let pi2 = T::PI() * T::PI();
    kern[0] = Complex::new(T::one() / (T::lit(4.0) * ds * ds), T::zero());
    for k in (1..n).step_by(2) {
        let v = -T::one() / (pi2 * T::from_usize_lossy(k * k) * ds * ds);
        kern[k] = Complex::new(v, T::zero());
        kern[m - k] = Complex::new(v, T::zero());
    }
    fwd.process(&mut kern);
    let band = band.min(T::one());
    let start = T::lit(RAMP_APODIZATION_START) * band;
    let half = T::from_usize_lossy(m / 2);
    for (k, c) in kern.iter_mut().enumerate() {
        let f = T::from_usize_lossy(k.min(m - k)) / half;
        if f >= band {
            *c = Complex::new(T::zero(), T::zero());
        } else if f > start {
            let x = (f - start) / (band - start);
            *c *= T::lit(0.5) * (T::one() + (T::PI() * x).cos());
        }
    }
    let mut buf = vec![z; m];
    for (b, &r) in buf.iter_mut().zip(row) {
        *b = Complex::new(r, T::zero());
    }
    fwd.process(&mut buf);
    for (b, k) in buf.iter_mut().zip(&kern) {
        *b *= *k;
    }
    inv.process(&mut buf);
    let scale = ds / T::from_usize_lossy(m);
    buf[..n].iter().map(|c| c.re * scale).collect()
}

/// `(pi / K) sum_k Q_k(x . theta_k)` with linear interpolation in the offset.
pub fn backproject<T: Real>(rows: &[Vec<T>], offsets: &[T], angles: &[T], grid: &Grid<T>) -> Vec<T> {
    let ds = offsets[1] - offsets[0];
    let s0 = offsets[0];
    let n = offsets.len();
    let frames: Vec<[T; 2]> = angles.iter().map(|&a| frame(a).1).collect();
    let w = T::PI() / T::from_usize_lossy(angles.len());
    (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let (i, j) = grid.ij(p);
            let x = grid.coord(i, j);
            let mut acc = T::zero();
            for (row, th) in rows.iter().zip(&frames) {
                let s = (x[0] * th[0] + x[1] * th[1] - s0) / ds;
                let k = s.floor();
                let Some(ki) = k.to_isize() else { continue };
                if ki < 0 || ki as usize + 1 >= n {
                    continue;
                }
                let f = s - k;
                let ki = ki as usize;
                acc += row[ki] * (T::one() - f) + row[ki + 1] * f;
            }
            acc * w
        })
        .collect()
}

/// Discrete ray sums of a bilinear grid function along the sinogram's valid rays, and the
/// exact adjoint.
pub struct RayOperator<'a, T> {
    pub grid: &'a Grid<T>,
    pub rays: Vec<([T; 2], [T; 2])>,
    pub step: T,
    pub half_length: T,
}

impl<'a, T: Real> RayOperator<'a, T> {
    pub fn new(grid: &'a Grid<T>, sino: &Sinogram<T>) -> Self {
        let mut rays = Vec::new();
        for (a, &ang) in sino.angles.iter().enumerate() {
            let (omega, theta) = frame(ang);
            for (s_i, &s) in sino.offsets.iter().enumerate() {
                if sino.valid[sino.idx(a, s_i)] {
                    rays.push(([s * theta[0], s * theta[1]], omega));
                }
            }
        }
        let hi = grid.hi();
        let r = (grid.lo[0].abs().max(hi[0].abs()).powi(2) + grid.lo[1].abs().max(hi[1].abs()).powi(2)).sqrt();
        RayOperator { grid, rays, step: grid.dx * T::lit(0.5), half_length: r }
    }

    fn for_each_weight(&self, ray: &([T; 2], [T; 2]), mut f: impl FnMut(usize, T)) {
        let g = self.grid;
        let steps = (T::lit(2.0) * self.half_length / self.step).ceil().to_usize().unwrap_or(0);
        for k in 0..=steps {
            let t = -self.half_length + T::from_usize_lossy(k) * self.step;
            let x = (ray.0[0] + t * ray.1[0] - g.lo[0]) / g.dx;
            let y = (ray.0[1] + t * ray.1[1] - g.lo[1]) / g.dx;
            let (xf, yf) = (x.floor(), y.floor());
            let (Some(i), Some(j)) = (xf.to_isize(), yf.to_isize()) else { continue };
            if i < 0 || j < 0 || i as usize + 1 >= g.n[0] || j as usize + 1 >= g.n[1] {
                continue;
            }
            let (a, b) = (x - xf, y - yf);
            let (i, j) = (i as usize, j as usize);
            let one = T::one();
            f(g.idx(i, j), (one - a) * (one - b) * self.step);
            f(g.idx(i + 1, j), a * (one - b) * self.step);
            f(g.idx(i, j + 1), (one - a) * b * self.step);
            f(g.idx(i + 1, j + 1), a * b * self.step);
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.rays
            .par_iter()
            .map(|r| {
                let mut acc = T::zero();
                self.for_each_weight(r, |p, w| acc += x[p] * w);
                acc
            })
            .collect()
    }

    pub fn adjoint(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.grid.len()];
        for (r, &v) in self.rays.iter().zip(y) {
            self.for_each_weight(r, |p, w| out[p] += v * w);
        }
        out
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// CGLS for `min ||A x - b||^2 + reg ||x||^2`; stops when the normal-equation residual drops by `tol`.
pub fn cgls<T: Real>(op: &RayOperator<'_, T>, b: &[T], reg: T, tol: T, max_iter: usize) -> (Vec<T>, usize) {
    let n = op.grid.len();
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut s = op.adjoint(&r);
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let gamma0 = gamma;
    if gamma0 == T::zero() {
        return (x, 0);
    }
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let q = op.apply(&p);
        let delta = dot(&q, &q) + reg * dot(&p, &p);
        if delta == T::zero() {
            break;
        }
        let alpha = gamma / delta;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * *pi;
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * *qi;
        }
        s = op.adjoint(&r);
        for (si, xi) in s.iter_mut().zip(&x) {
            *si -= reg * *xi;
        }
        let g_new = dot(&s, &s);
        if g_new.sqrt() <= tol * gamma0.sqrt() {
            break;
        }
        let beta = g_new / gamma;
        gamma = g_new;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = *si + beta * *pi;
        }
    }
    (x, it)
}

/// Inverts planar ray sums onto `grid`. Filtered backprojection needs at least
/// `FBP_MIN_ANGLES` angles and falls back to least squares otherwise; its ramp filter is cut
/// at the Nyquist frequency of the coarser of the offset spacing and the grid.
pub fn invert_xray_2d<T: Real>(sino: &Sinogram<T>, grid: &Grid<T>, method: InvertMethod, reg: T) -> Result<Reconstruction<T>> {
    if grid.dim != 2 {
        return Err(Error::InvalidInput("X-ray inversion needs a planar grid".into()));
    }
    if sino.offsets.len() < 2 || sino.angles.is_empty() {
        return Err(Error::InvalidInput("sinogram needs at least two offsets and one angle".into()));
    }
    let mut warnings = Vec::new();
    let mut method = method;
    if method == InvertMethod::Fbp && sino.angles.len() < FBP_MIN_ANGLES {
        warnings.push(format!("{} angles is below {FBP_MIN_ANGLES}; using least squares", sino.angles.len()));
        method = InvertMethod::Rls;
    }
    let (values, iterations) = match method {
        InvertMethod::Fbp => {
            let missing = sino.valid.iter().filter(|v| !**v).count();
            if missing > 0 {
                warnings.push(format!("{missing} missing samples treated as zero"));
            }
            let ds = sino.spacing();
            // the grid cannot hold wavenumbers above its own Nyquist frequency
            let band = (ds / grid.dx).min(T::one());
            // rays beyond the measured offsets carry no data: extend rows by zeros so the
            // filtered tails reach every grid node
            let hi = grid.hi();
            let reach = (grid.lo[0].abs().max(hi[0].abs()).powi(2) + grid.lo[1].abs().max(hi[1].abs()).powi(2)).sqrt();
            let s_lo = sino.offsets[0];
            let s_hi = *sino.offsets.last().expect("two offsets");
            let pad_lo = ((s_lo + reach) / ds).ceil().max(T::zero()).to_usize().unwrap_or(0) + 2;
            let pad_hi = ((reach - s_hi) / ds).ceil().max(T::zero()).to_usize().unwrap_or(0) + 2;
            let n = sino.offsets.len();
            let offsets: Vec<T> =
                (0..pad_lo + n + pad_hi).map(|k| s_lo + (T::from_usize_lossy(k) - T::from_usize_lossy(pad_lo)) * ds).collect();
            let rows: Vec<Vec<T>> = (0..sino.angles.len())
                .into_par_iter()
                .map(|a| {
                    let mut row = vec![T::zero(); offsets.len()];
                    for s in 0..n {
                        if sino.valid[sino.idx(a, s)] {
                            row[pad_lo + s] = sino.data[sino.idx(a, s)];
                        }
                    }
                    ramp_filter(&row, ds, band)
                })
                .collect();
            (backproject(&rows, &offsets, &sino.angles, grid), 0)
        }
        InvertMethod::Rls => {
            let op = RayOperator::new(grid, sino);
            let b: Vec<T> = sino.data.iter().zip(&sino.valid).filter(|(_, v)| **v).map(|(d, _)| *d).collect();
            cgls(&op, &b, reg, T::lit(1e-6), 200)
        }
    };
    Ok(Reconstruction { grid: grid.clone(), values, method, reg: reg.to_f64_lossy(), iterations, rel_error: None, warnings })
}
