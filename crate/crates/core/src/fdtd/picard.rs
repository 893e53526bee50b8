//! Fixed-point iteration turning an approximate solution `v` into a discrete exact one.
//!
//! With `L_h = d_t^2 - lap_h` (leapfrog) and `f_h(u) = q <grad_h u, grad_h u>_M`,
//! `R_h = L_h v - f_h(v)` and `L_h w_j = f_h(v + w_{j-1}) - f_h(v) - R_h`, zero data, `w_{-1} = 0`.
//! The time derivative inside `f_h` is centered, which is explicit because `w_{j-1}` is known
//! on the whole window. A limit `w` makes `v + w` solve `L_h u = f_h(u)`.

use rayon::prelude::*;
use serde::Serialize;

use super::leapfrog_update;
use super::norms::{spacetime_norm, time_derivative, WeightedNormSpec};
use crate::error::{Error, Result};
use crate::grid::{d1_at, l2_norm, laplacian_at, Grid, Order};
use crate::minkowski::pairing;
use crate::num::Real;
use crate::potential::Potential;

#[derive(Clone, Copy, Debug)]
pub struct PicardConfig<T> {
    pub norm: WeightedNormSpec<T>,
    pub order: Order,
    /// Stop once `N(w_j - w_{j-1}) <= tol N(w_j)`.
    pub tol: T,
    pub max_iter: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationTrace {
    /// `N_{m,mu,lambda}(w_j)`.
    pub norms: Vec<f64>,
    /// `N_{m,mu,lambda}(w_j - w_{j-1})`, starting at `j = 1`.
    pub differences: Vec<f64>,
    /// `differences[j] / differences[j-1]`, defined from `j = 2`.
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Largest ratio from `j = 2` on (0 when fewer iterates).
    pub max_ratio: f64,
}

pub struct PicardResult<T> {
    pub trace: IterationTrace,
    /// Last iterate on every level.
    pub w: Vec<Vec<T>>,
    /// `sup_k ||L_h(v + w) - f_h(v + w)|| / sup_k ||R_h||`.
    pub limit_residual_ratio: f64,
}

/// `N_{m,mu,lambda}(u) = ||u||_{m,mu,lambda} + ||d_t u||_{m,mu,lambda}`.
pub fn n_norm<T: Real>(grid: &Grid<T>, frames: &[Vec<T>], t0: T, dt: T, spec: &WeightedNormSpec<T>) -> T {
    let times: Vec<T> = (0..frames.len()).map(|k| t0 + T::from_usize_lossy(k) * dt).collect();
    let ut = time_derivative(frames, dt);
    spacetime_norm(grid, frames, &times, spec) + spacetime_norm(grid, &ut, &times, spec)
}

fn active<T: Real>(q: &dyn Potential<T>, grid: &Grid<T>, t0: T, dt: T, nt: usize) -> Vec<usize> {
    if q.is_zero() {
        return Vec::new();
    }
    let supp = q.support();
    (0..grid.len()).filter(|&p| (0..nt).any(|k| supp.contains(&grid.spacetime(t0 + T::from_usize_lossy(k) * dt, p)))).collect()
}

/// `f_h(u)` on interior levels `1..nt-1`; zero on the end levels.
fn nonlinear<T: Real>(q: &dyn Potential<T>, grid: &Grid<T>, t0: T, dt: T, u: &[Vec<T>], order: Order, nodes: &[usize]) -> Vec<Vec<T>> {
    let nt = u.len();
    let two = T::lit(2.0);
    (0..nt)
        .map(|k| {
            let mut out = vec![T::zero(); grid.len()];
            if k == 0 || k + 1 == nt || nodes.is_empty() {
                return out;
            }
            let t = t0 + T::from_usize_lossy(k) * dt;
            let vals: Vec<T> = nodes
                .par_iter()
                .map(|&p| {
                    let (i, j) = grid.ij(p);
                    let x = grid.spacetime(t, p);
                    let mut g = [(u[k + 1][p] - u[k - 1][p]) / (two * dt), T::zero(), T::zero(), T::zero()];
                    for a in 0..grid.dim {
                        g[a + 1] = d1_at(grid, &u[k], i, j, a, order);
                    }
                    q.eval(&x, u[k][p]) * pairing(&g, &g)
                })
                .collect();
            for (&p, v) in nodes.iter().zip(vals) {
                out[p] = v;
            }
            out
        })
        .collect()
}

/// `L_h u` on interior levels; zero on the end levels.
fn wave_operator<T: Real>(grid: &Grid<T>, dt: T, u: &[Vec<T>], order: Order) -> Vec<Vec<T>> {
    let nt = u.len();
    let dt2 = dt * dt;
    (0..nt)
        .map(|k| {
            if k == 0 || k + 1 == nt {
                return vec![T::zero(); grid.len()];
            }
            (0..grid.len())
                .into_par_iter()
                .map(|p| {
                    let (i, j) = grid.ij(p);
                    (u[k + 1][p] - T::lit(2.0) * u[k][p] + u[k - 1][p]) / dt2 - laplacian_at(grid, &u[k], i, j, order)
                })
                .collect()
        })
        .collect()
}

/// `R_h = L_h v - f_h(v)` on every level of `v` (zero on the end levels).
pub fn discrete_residual<T: Real>(q: &dyn Potential<T>, grid: &Grid<T>, t0: T, dt: T, v: &[Vec<T>], order: Order) -> Vec<Vec<T>> {
    let nodes = active(q, grid, t0, dt, v.len());
    let lv = wave_operator(grid, dt, v, order);
    let fv = nonlinear(q, grid, t0, dt, v, order, &nodes);
    lv.into_iter().zip(fv).map(|(a, b)| a.iter().zip(&b).map(|(x, y)| *x - *y).collect()).collect()
}

fn sup_l2<T: Real>(grid: &Grid<T>, f: &[Vec<T>]) -> T {
    f.iter().fold(T::zero(), |a, x| a.max(l2_norm(grid, x)))
}

/// Runs the iteration on the levels of `v`, `t0 + k dt`.
pub fn picard_iterate<T: Real>(
    q: &dyn Potential<T>,
    grid: &Grid<T>,
    t0: T,
    dt: T,
    v: &[Vec<T>],
    residual: &[Vec<T>],
    cfg: &PicardConfig<T>,
) -> Result<PicardResult<T>> {
    let nt = v.len();
    if residual.len() != nt {
        return Err(Error::DimensionMismatch { expected: nt, got: residual.len() });
    }
    super::check_cfl(grid, dt)?;
    let nodes = active(q, grid, t0, dt, nt);
    let fv = nonlinear(q, grid, t0, dt, v, cfg.order, &nodes);
    let zero = vec![T::zero(); grid.len()];
    let mut prev: Vec<Vec<T>> = vec![zero.clone(); nt];
    let mut trace = IterationTrace { norms: vec![], differences: vec![], ratios: vec![], converged: false, iterations: 0, max_ratio: 0.0 };
    for j in 0..cfg.max_iter {
        // right-hand side from the previous iterate
        let rhs: Vec<Vec<T>> = if j == 0 || nodes.is_empty() {
            residual.iter().map(|r| r.iter().map(|x| -*x).collect()).collect()
        } else {
            let vw: Vec<Vec<T>> = v.iter().zip(&prev).map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x + *y).collect()).collect();
            let f = nonlinear(q, grid, t0, dt, &vw, cfg.order, &nodes);
            (0..nt).map(|k| (0..grid.len()).map(|p| f[k][p] - fv[k][p] - residual[k][p]).collect()).collect()
        };
        let mut w = vec![zero.clone(); nt];
        for k in 1..nt.saturating_sub(1) {
            w[k + 1] = leapfrog_update(grid, cfg.order, &w[k], &w[k - 1], dt, Some(&rhs[k]));
        }
        let norm = n_norm(grid, &w, t0, dt, &cfg.norm).to_f64_lossy();
        trace.norms.push(norm);
        trace.iterations = j + 1;
        if j >= 1 {
            let diff: Vec<Vec<T>> = w.iter().zip(&prev).map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x - *y).collect()).collect();
            let d = n_norm(grid, &diff, t0, dt, &cfg.norm).to_f64_lossy();
            trace.differences.push(d);
            if trace.differences.len() >= 2 {
                let n = trace.differences.len();
                let r = if trace.differences[n - 2] > 0.0 { d / trace.differences[n - 2] } else { 0.0 };
                trace.ratios.push(r);
                trace.max_ratio = trace.max_ratio.max(r);
            }
            prev = w;
            if d <= cfg.tol.to_f64_lossy() * norm || norm == 0.0 {
                trace.converged = true;
                break;
            }
        } else {
            prev = w;
            if norm == 0.0 {
                trace.converged = true;
                break;
            }
        }
    }
    let u: Vec<Vec<T>> = v.iter().zip(&prev).map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x + *y).collect()).collect();
    let lim = discrete_residual(q, grid, t0, dt, &u, cfg.order);
    let base = sup_l2(grid, residual);
    let ratio = if base > T::zero() { (sup_l2(grid, &lim) / base).to_f64_lossy() } else { sup_l2(grid, &lim).to_f64_lossy() };
    Ok(PicardResult { trace, w: prev, limit_residual_ratio: ratio })
}
