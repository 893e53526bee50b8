//! Explicit leapfrog for `box u = Q(x, u, grad u)`, written as `d_t^2 u - lap u = -Q`.

use rayon::prelude::*;

use super::{check_cfl, leapfrog_update, Trajectory, WaveState};
use crate::constants::BLOWUP_FACTOR;
use crate::error::{Error, Result};
use crate::grid::{d1_at, linf_norm, Order};
use crate::minkowski::pairing;
use crate::num::Real;
use crate::potential::{Potential, Support};

/// Analytic solution of the linear equation: value and spacetime gradient.
pub type Incident<'a, T> = &'a (dyn Fn(&[T; 4]) -> (T, [T; 4]) + Sync);

/// What the grid carries.
#[derive(Clone, Copy)]
pub enum Formulation<'a, T> {
    /// The full solution `u`.
    Total,
    /// `d = u - u_inc` for an exact linear solution `u_inc`; only `supp q` feeds `d`, so the
    /// box needs to hold the scattered field alone.
    Scattered(Incident<'a, T>),
}

#[derive(Clone, Copy, Debug)]
pub struct SemilinearConfig {
    pub order: Order,
    /// Fixed-point sweeps with the centered time derivative after the BDF2 predictor.
    pub correctors: usize,
    pub blowup_factor: f64,
}

impl Default for SemilinearConfig {
    fn default() -> Self {
        SemilinearConfig { order: Order::Second, correctors: 2, blowup_factor: BLOWUP_FACTOR }
    }
}

/// Nodes whose spatial position can meet `supp q` at some time.
fn active_nodes<T: Real>(q: &dyn Potential<T>, state: &WaveState<T>) -> Vec<usize> {
    let g = &state.grid;
    let pad = T::lit(2.0) * g.dx;
    let (c, r) = match q.support() {
        Support::Empty => return Vec::new(),
        Support::SpacetimeBall { center, radius } => ([center[1], center[2], center[3]], radius),
        Support::SpatialCylinder { center, radius } => (center, radius),
    };
    (0..g.len())
        .filter(|&p| {
            let x = g.spacetime(T::zero(), p);
            let d2 = (x[1] - c[0]).powi(2) + (x[2] - c[1]).powi(2) + (x[3] - c[2]).powi(2);
            d2 <= (r + pad) * (r + pad)
        })
        .collect()
}

/// Time-steps from `init` until `t_end` (rounded to whole steps) and records the total field
/// at the levels nearest to `record`. The source `-Q` is evaluated at level `k` with fourth- or
/// second-order spatial gradients; the time derivative of the grid field is centered, found
/// by a BDF2 predictor and `correctors` fixed-point sweeps.
pub fn solve_semilinear<T: Real>(
    q: &dyn Potential<T>,
    init: WaveState<T>,
    formulation: Formulation<'_, T>,
    t_end: T,
    record: &[T],
    cfg: &SemilinearConfig,
) -> Result<(WaveState<T>, Trajectory<T>)> {
    check_cfl(&init.grid, init.dt)?;
    let g = init.grid.clone();
    let dt = init.dt;
    let steps = ((t_end - init.t) / dt).round().to_usize().unwrap_or(0);
    let active = if q.is_zero() { Vec::new() } else { active_nodes(q, &init) };
    let inc_at = |x: &[T; 4]| -> (T, [T; 4]) {
        match formulation {
            Formulation::Total => (T::zero(), [T::zero(); 4]),
            Formulation::Scattered(f) => f(x),
        }
    };
    let total = |t: T, d: &[T]| -> Vec<T> {
        match formulation {
            Formulation::Total => d.to_vec(),
            Formulation::Scattered(f) => d.iter().enumerate().map(|(p, v)| f(&g.spacetime(t, p)).0 + *v).collect(),
        }
    };
    let reference = {
        let inc0 = total(init.t, &g.zeros::<T>());
        linf_norm(&init.u).max(linf_norm(&inc0)).max(T::lit(1e-300))
    };
    let mut traj = Trajectory::new(g.clone());
    let mut pending: Vec<T> = record.to_vec();
    let mut maybe_record = |t: T, d: &[T], traj: &mut Trajectory<T>| {
        let half = dt * T::lit(0.5);
        pending.retain(|&r| {
            if (r - t).abs() <= half {
                traj.push(t, total(t, d));
                false
            } else {
                true
            }
        });
    };
    // a static u-independent q is sampled once
    let q_static: Option<Vec<T>> = (q.time_independent() && q.u_independent())
        .then(|| active.iter().map(|&p| q.eval(&g.spacetime(T::zero(), p), T::zero())).collect());
    let mut state = init;
    let mut older: Option<Vec<T>> = None;
    maybe_record(state.t, &state.u, &mut traj);
    let two = T::lit(2.0);
    for _ in 0..steps {
        let mut next = leapfrog_update(&g, cfg.order, &state.u, &state.u_prev, dt, None);
        if !active.is_empty() {
            let base: Vec<T> = active.iter().map(|&p| next[p]).collect();
            let t = state.t;
            // predictor for d_t d at level k
            let pred: Vec<T> = active
                .iter()
                .map(|&p| match &older {
                    Some(o) => (T::lit(3.0) * state.u[p] - T::lit(4.0) * state.u_prev[p] + o[p]) / (two * dt),
                    None => (state.u[p] - state.u_prev[p]) / dt,
                })
                .collect();
            // q and the spatial gradient are fixed within a step; the sweeps only revise d_t
            let frozen: Vec<(T, [T; 4])> = active
                .par_iter()
                .enumerate()
                .map(|(a, &p)| {
                    let x = g.spacetime(t, p);
                    let (i, j) = g.ij(p);
                    let (u0, mut grad) = inc_at(&x);
                    for ax in 0..g.dim {
                        grad[ax + 1] += d1_at(&g, &state.u, i, j, ax, cfg.order);
                    }
                    let qv = match &q_static {
                        Some(c) => c[a],
                        None => q.eval(&x, u0 + state.u[p]),
                    };
                    (qv, grad)
                })
                .collect();
            // d_t^2 u - lap u = -Q = q <grad u, grad u>_M
            let source = |dtd: &dyn Fn(usize, usize) -> T| -> Vec<T> {
                active
                    .iter()
                    .zip(&frozen)
                    .enumerate()
                    .map(|(a, (&p, (qv, gr)))| {
                        let mut grad = *gr;
                        grad[0] += dtd(a, p);
                        *qv * pairing(&grad, &grad)
                    })
                    .collect()
            };
            let dt2 = dt * dt;
            let f = source(&|a, _| pred[a]);
            for (a, &p) in active.iter().enumerate() {
                next[p] = base[a] + dt2 * f[a];
            }
            for _ in 0..cfg.correctors {
                let prev = &state.u_prev;
                let f = source(&|_, p| (next[p] - prev[p]) / (two * dt));
                for (a, &p) in active.iter().enumerate() {
                    next[p] = base[a] + dt2 * f[a];
                }
            }
        }
        let growth = linf_norm(&next) / reference;
        if !growth.is_finite() || growth.to_f64_lossy() > cfg.blowup_factor {
            return Err(Error::BlowUp { time: (state.t + dt).to_f64_lossy(), growth: growth.to_f64_lossy() });
        }
        let prev = std::mem::replace(&mut state.u, next);
        older = Some(std::mem::replace(&mut state.u_prev, prev));
        state.t += dt;
        state.step += 1;
        maybe_record(state.t, &state.u, &mut traj);
    }
    Ok((state, traj))
}
