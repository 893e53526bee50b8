//! Finite differences for `d_t^2 u - lap u = f` in one and two space dimensions, the
//! semilinear solver, weighted norms, energy checks and the Picard iteration.

mod approx;
mod energy;
mod norms;
mod picard;
mod semilinear;

pub use approx::{ansatz_vs_fdtd, ApproxReport, ApproxRow};
pub use energy::{check_energy_estimate, energy_suite, run_energy_case, EnergyCase, EnergyReport};
pub use norms::{energy_function, hm_norm, spacetime_norm, time_derivative, weighted_norm, WeightedNormSpec};
pub use picard::{discrete_residual, n_norm, picard_iterate, IterationTrace, PicardConfig, PicardResult};
pub use semilinear::{solve_semilinear, Formulation, SemilinearConfig};

use rayon::prelude::*;

use crate::constants::{CFL_DEFAULT, CFL_LIMIT};
use crate::error::{Error, Result};
use crate::grid::{laplacian_at, Grid, Order};
use crate::num::Real;

/// Default time step `0.45 dx / sqrt(n)`.
pub fn default_dt<T: Real>(grid: &Grid<T>) -> T {
    T::lit(CFL_DEFAULT) * grid.dx / T::from_usize_lossy(grid.dim).sqrt()
}

pub fn check_cfl<T: Real>(grid: &Grid<T>, dt: T) -> Result<()> {
    let ratio = (dt * T::from_usize_lossy(grid.dim).sqrt() / grid.dx).to_f64_lossy();
    if !(ratio > 0.0 && ratio <= CFL_LIMIT) {
        return Err(Error::Cfl { ratio, limit: CFL_LIMIT });
    }
    Ok(())
}

/// Two consecutive time levels of a leapfrog solution.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveState<T> {
    pub grid: Grid<T>,
    /// Level `k`.
    pub u: Vec<T>,
    /// Level `k - 1`.
    pub u_prev: Vec<T>,
    pub dt: T,
    /// Time of level `k`.
    pub t: T,
    pub step: usize,
}

impl<T: Real> WaveState<T> {
    pub fn new(grid: Grid<T>, dt: T, t: T, u_prev: Vec<T>, u: Vec<T>) -> Result<Self> {
        check_cfl(&grid, dt)?;
        for f in [&u, &u_prev] {
            if f.len() != grid.len() {
                return Err(Error::DimensionMismatch { expected: grid.len(), got: f.len() });
            }
        }
        Ok(WaveState { grid, u, u_prev, dt, t, step: 0 })
    }

    /// Zero data at time `t`.
    pub fn zero(grid: Grid<T>, dt: T, t: T) -> Result<Self> {
        let z = grid.zeros();
        WaveState::new(grid, dt, t, z.clone(), z)
    }

    /// Levels `t - dt` and `t` sampled from an exact solution.
    pub fn from_exact(grid: Grid<T>, dt: T, t: T, f: impl Fn(&[T; 4]) -> T) -> Result<Self> {
        let prev = grid.sample(t - dt, &f);
        let cur = grid.sample(t, &f);
        WaveState::new(grid, dt, t, prev, cur)
    }

    pub fn dx(&self) -> T {
        self.grid.dx
    }
}

/// `2 u - u_prev + dt^2 (lap_h u + f)` with zero values outside the box.
pub fn leapfrog_update<T: Real>(grid: &Grid<T>, order: Order, u: &[T], u_prev: &[T], dt: T, source: Option<&[T]>) -> Vec<T> {
    let dt2 = dt * dt;
    let two = T::lit(2.0);
    let [n0, n1] = grid.n;
    let w = match order {
        Order::Second => 1,
        Order::Fourth => 2,
    };
    let ih2 = T::one() / (grid.dx * grid.dx);
    let (c1, c2, c0) = match order {
        Order::Second => (ih2, T::zero(), T::lit(-2.0) * ih2),
        Order::Fourth => (T::lit(16.0 / 12.0) * ih2, T::lit(-1.0 / 12.0) * ih2, T::lit(-30.0 / 12.0) * ih2),
    };
    let mut out = vec![T::zero(); grid.len()];
    out.par_chunks_mut(n0).enumerate().for_each(|(j, row)| {
        let row_inner = grid.dim == 1 || (j >= w && j + w < n1);
        for (i, o) in row.iter_mut().enumerate() {
            let p = j * n0 + i;
            let mut r = if row_inner && i >= w && i + w < n0 {
                // interior: same stencil as `laplacian_at` without bounds checks
                let mut r = c0 * u[p] + c1 * (u[p - 1] + u[p + 1]);
                if w == 2 {
                    r += c2 * (u[p - 2] + u[p + 2]);
                }
                if grid.dim == 2 {
                    r += c0 * u[p] + c1 * (u[p - n0] + u[p + n0]);
                    if w == 2 {
                        r += c2 * (u[p - 2 * n0] + u[p + 2 * n0]);
                    }
                }
                r
            } else {
                laplacian_at(grid, u, i, j, order)
            };
            if let Some(f) = source {
                r += f[p];
            }
            *o = two * u[p] - u_prev[p] + dt2 * r;
        }
    });
    out
}

/// One leapfrog step of `d_t^2 u - lap u = f` with the second-order Laplacian; `f` at level `k`.
pub fn step_linear_wave<T: Real>(state: &WaveState<T>, source: &[T]) -> Result<WaveState<T>> {
    step_linear_wave_order(state, Some(source), Order::Second)
}

/// Leapfrog step with a chosen spatial order; `None` means no source.
pub fn step_linear_wave_order<T: Real>(state: &WaveState<T>, source: Option<&[T]>, order: Order) -> Result<WaveState<T>> {
    check_cfl(&state.grid, state.dt)?;
    if let Some(f) = source {
        if f.len() != state.grid.len() {
            return Err(Error::DimensionMismatch { expected: state.grid.len(), got: f.len() });
        }
    }
    let next = leapfrog_update(&state.grid, order, &state.u, &state.u_prev, state.dt, source);
    Ok(WaveState { grid: state.grid.clone(), u_prev: state.u.clone(), u: next, dt: state.dt, t: state.t + state.dt, step: state.step + 1 })
}

/// Snapshots of a solution at requested times.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub grid: Grid<T>,
    pub times: Vec<T>,
    pub frames: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(grid: Grid<T>) -> Self {
        Trajectory { grid, times: Vec::new(), frames: Vec::new() }
    }

    pub fn push(&mut self, t: T, f: Vec<T>) {
        self.times.push(t);
        self.frames.push(f);
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame whose time is closest to `t`.
    pub fn at(&self, t: T) -> Option<&[T]> {
        let k = self.times.iter().enumerate().min_by(|a, b| (*a.1 - t).abs().partial_cmp(&(*b.1 - t).abs()).unwrap())?.0;
        Some(&self.frames[k])
    }
}

/// Discrete energy `sum ((u^{k+1} - u^k)/dt)^2 + <grad u^{k+1}, grad u^k>` of the homogeneous scheme;
/// it is exactly conserved by leapfrog with the second-order Laplacian.
pub fn leapfrog_energy<T: Real>(grid: &Grid<T>, u_prev: &[T], u: &[T], dt: T) -> T {
    let mut e = T::zero();
    let vol = grid.cell_volume();
    for p in 0..grid.len() {
        let v = (u[p] - u_prev[p]) / dt;
        e += v * v;
    }
    // <grad u^{k}, grad u^{k-1}> = -<u^k, lap u^{k-1}> with zero padding
    for p in 0..grid.len() {
        let (i, j) = grid.ij(p);
        e -= u[p] * laplacian_at(grid, u_prev, i, j, Order::Second);
    }
    e * vol * T::lit(0.5)
}
