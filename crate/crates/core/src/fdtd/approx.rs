//! Distance between the semilinear FDTD solution and the oscillatory ansatz at `T'`.

use serde::Serialize;

use super::{solve_semilinear, Formulation, SemilinearConfig, WaveState};
use crate::constants::CFL_DEFAULT;
use crate::error::{Error, Result};
use crate::geoptics::{assemble_un, AnsatzSpec, CoeffTable};
use crate::grid::{l2_norm, linf_norm, Grid};
use crate::num::{loglog_slope, Real};
use crate::potential::Potential;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxRow {
    pub h: f64,
    /// `||u_FDTD - u_N||` at `T'` against the grid-extrapolated FDTD solution.
    pub l2: f64,
    pub linf: f64,
    /// Distance between the reference and the extrapolation with one level less. It measures
    /// the error of that lower extrapolation; the reference is one order better.
    pub grid_error: f64,
    pub points_per_wavelength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxReport {
    pub order: usize,
    pub rows: Vec<ApproxRow>,
    pub slope_l2: f64,
    pub slope_linf: f64,
}

/// For every `h` of the spec, solves the semilinear equation from `T0` to `T'` on the box
/// `|x_i| <= half_width` with `ppw` points per wavelength and on `levels - 1` successive
/// refinements, in the scattered formulation around the incident packet, and compares the
/// extrapolated solution with `u_N` on the coarse nodes. Three levels combine as
/// `(64 u_2 - 20 u_1 + u_0) / 45`, which cancels the `dx^2` and `dx^4` terms; two levels use
/// `(16 u_1 - u_0) / 15`.
pub fn ansatz_vs_fdtd<T: Real>(
    spec: &AnsatzSpec<T>,
    q: &dyn Potential<T>,
    table: &CoeffTable<T>,
    half_width: T,
    ppw: T,
    levels: usize,
    cfg: &SemilinearConfig,
) -> Result<ApproxReport> {
    if !(1..=3).contains(&levels) {
        return Err(Error::InvalidInput(format!("levels must be 1, 2 or 3, got {levels}")));
    }
    let dim = spec.dim();
    let mut rows = Vec::new();
    for &h in &spec.h_list {
        let dx = T::TAU() * h / ppw;
        let hw = [half_width, if dim == 2 { half_width } else { T::zero() }];
        let g0 = Grid::covering(dim, [-hw[0], -hw[1]], hw, dx)?;
        let span = spec.t_meas - spec.t0;
        let s0 = (span / (T::lit(CFL_DEFAULT) * dx / T::from_usize_lossy(dim).sqrt())).ceil().to_usize().unwrap_or(1).max(1);
        let mut sols: Vec<Vec<T>> = Vec::new();
        let mut g = g0.clone();
        for lvl in 0..levels {
            let u = solve_total(spec, q, h, &g, s0 << lvl, cfg)?;
            sols.push(restrict(&g0, &g, &u, 1 << lvl));
            g = g.refined();
        }
        let reference: Vec<T> = match levels {
            1 => sols[0].clone(),
            2 => (0..g0.len()).map(|i| (T::lit(16.0) * sols[1][i] - sols[0][i]) / T::lit(15.0)).collect(),
            _ => (0..g0.len()).map(|i| (T::lit(64.0) * sols[2][i] - T::lit(20.0) * sols[1][i] + sols[0][i]) / T::lit(45.0)).collect(),
        };
        let un = assemble_un(table, h, spec.t_meas, &g0);
        let diff: Vec<T> = reference.iter().zip(&un).map(|(a, b)| *a - *b).collect();
        // the next-lower extrapolation bounds the error left in the reference
        let lower: Vec<T> = match levels {
            1 => sols[0].clone(),
            2 => sols[1].clone(),
            _ => (0..g0.len()).map(|i| (T::lit(16.0) * sols[2][i] - sols[1][i]) / T::lit(15.0)).collect(),
        };
        let gap: Vec<T> = lower.iter().zip(&reference).map(|(a, b)| *a - *b).collect();
        rows.push(ApproxRow {
            h: h.to_f64_lossy(),
            l2: l2_norm(&g0, &diff).to_f64_lossy(),
            linf: linf_norm(&diff).to_f64_lossy(),
            grid_error: l2_norm(&g0, &gap).to_f64_lossy(),
            points_per_wavelength: ppw.to_f64_lossy(),
        });
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.l2).collect();
    let li: Vec<f64> = rows.iter().map(|r| r.linf).collect();
    Ok(ApproxReport { order: spec.order, slope_l2: loglog_slope(&hs, &l2), slope_linf: loglog_slope(&hs, &li), rows })
}

fn solve_total<T: Real>(
    spec: &AnsatzSpec<T>,
    q: &dyn Potential<T>,
    h: T,
    grid: &Grid<T>,
    steps: usize,
    cfg: &SemilinearConfig,
) -> Result<Vec<T>> {
    let dt = (spec.t_meas - spec.t0) / T::from_usize_lossy(steps);
    let init = WaveState::zero(grid.clone(), dt, spec.t0)?;
    let inc = |x: &[T; 4]| spec.incident(h, x);
    let (st, _) = solve_semilinear(q, init, Formulation::Scattered(&inc), spec.t_meas, &[], cfg)?;
    Ok(st.u.iter().enumerate().map(|(p, d)| *d + inc(&grid.spacetime(spec.t_meas, p)).0).collect())
}

/// Values of a field on `fine` (refined `stride` times) at the nodes of `coarse`.
fn restrict<T: Real>(coarse: &Grid<T>, fine: &Grid<T>, u: &[T], stride: usize) -> Vec<T> {
    (0..coarse.len())
        .map(|p| {
            let (i, j) = coarse.ij(p);
            u[fine.idx(i * stride, j * stride)]
        })
        .collect()
}
