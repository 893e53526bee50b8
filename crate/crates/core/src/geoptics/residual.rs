//! Residual `box u_N - Q(x, u_N, grad u_N)` on fine grids and its order in `h`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::hierarchy::{coeffs_at, CoeffTable, DerivFields};
use super::series::{residual_series, resonance_table, PointAmps};
use super::AnsatzSpec;
use crate::constants::MIN_POINTS_PER_WAVELENGTH;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::interp::sample_at;
use crate::minkowski::pairing;
use crate::num::{loglog_slope, Real};
use crate::potential::Potential;

type C<T> = Complex<T>;

/// Norms of the residual at one wavelength, sup over the sampled time levels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub h: f64,
    pub l2: f64,
    pub linf: f64,
    /// Same norms of the orders `h^r`, `r <= N`, which vanish for exact amplitudes.
    pub floor_l2: f64,
    pub floor_linf: f64,
    pub points_per_wavelength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub order: usize,
    pub rows: Vec<ResidualRow>,
    /// Least-squares log-log slope of the L2 norm over the rows above the floor.
    pub slope_l2: f64,
    pub slope_linf: f64,
    pub fitted_rows: usize,
    pub expected: f64,
    pub pass: bool,
}

/// Ratio between residual and floor below which a row counts as floor-dominated.
const FLOOR_RATIO: f64 = 10.0;

struct LevelData<T> {
    entries: Vec<(usize, usize, DerivFields<T>)>,
}

fn sample_entry<T: Real>(d: &DerivFields<T>, dims: [usize; 2], pos: [T; 2]) -> (C<T>, [C<T>; 4], C<T>) {
    let mut g = [C::new(T::zero(), T::zero()); 4];
    for (j, gj) in g.iter_mut().enumerate() {
        *gj = sample_at(&d.grad[j], dims, pos);
    }
    (sample_at(&d.value, dims, pos), g, sample_at(&d.boxa, dims, pos))
}

/// Residual and floor at one point; returns `(residual, floor)`.
#[allow(clippy::too_many_arguments)]
fn point_residual<T: Real>(
    table: &CoeffTable<T>,
    lv: &LevelData<T>,
    q: &dyn Potential<T>,
    x: &[T; 4],
    h: T,
    res_table: &[(i32, i32, i32)],
) -> (T, T) {
    let g = &table.grid.space;
    let pos = [(x[1] - g.lo[0]) / g.dx, if g.dim == 2 { (x[2] - g.lo[1]) / g.dx } else { T::zero() }];
    let n = table.order;
    let mut amps = PointAmps::zeros(table.kmax, n);
    for (m, p, d) in &lv.entries {
        let (a, ga, ba) = sample_entry(d, g.n, pos);
        let i = amps.idx(*m, *p);
        amps.a[i] = a;
        amps.grad[i] = ga;
        amps.boxa[i] = ba;
    }
    let psi = table.w.dot_coords(x);
    let s = table.v.dot_coords(x);
    let (phi, dphi, _) = table.phi.eval(s);
    let vt = table.v.twin_covector();
    let wt = table.w.twin_covector();
    let z = C::new(T::zero(), T::zero());
    let i = C::new(T::zero(), T::one());
    let mut u = C::new(phi, T::zero());
    let mut grad = vt.map(|c| C::new(c * dphi, T::zero()));
    let mut boxu = z;
    let k = table.kmax as i32;
    for m in -k..=k {
        let e = C::from_polar(T::one(), T::lit(m as f64) * psi / h);
        let mf = T::lit(m as f64);
        for p in 0..=n {
            let (a, ga, ba) = amps.get(m, p);
            if a == z && ga == [z; 4] && ba == z {
                continue;
            }
            let hp = h.powi(p as i32);
            let ta = ga[0] - ga[1] * wt[1] - ga[2] * wt[2] - ga[3] * wt[3];
            u += e * a * (h * hp);
            for j in 0..4 {
                grad[j] += e * (i * mf * wt[j] * a + ga[j] * h) * hp;
            }
            boxu += e * (ba * h - i * (T::lit(2.0) * mf) * ta) * hp;
        }
    }
    let ur = u.re;
    let gr = grad.map(|c| c.re);
    let res = boxu.re + q.eval(x, ur) * pairing(&gr, &gr);
    // orders r <= N of the expansion
    let coeffs = coeffs_at(q, &table.v, &table.phi, x, &wt, n);
    let ser = residual_series(&amps, &coeffs, n, res_table);
    let mut floor = z;
    for m in -k..=k {
        let e = C::from_polar(T::one(), T::lit(m as f64) * psi / h);
        for r in 0..=n {
            floor += e * ser.get(m, r) * h.powi(r as i32);
        }
    }
    (res, floor.re)
}

/// Time levels used for the sup in time: up to eight, evenly spread away from the ends.
pub fn residual_levels(nt: usize) -> Vec<usize> {
    if nt <= 4 {
        return (0..nt).collect();
    }
    let (a, b) = (2, nt - 3);
    let count = 8.min(b - a + 1);
    let mut ks: Vec<usize> = (0..count).map(|j| a + j * (b - a) / (count - 1).max(1)).collect();
    ks.dedup();
    ks
}

/// Residual norms per `h` on grids with `16 (N + 1)` points per wavelength and the slope fit.
pub fn measure_residual_order<T: Real>(spec: &AnsatzSpec<T>, q: &dyn Potential<T>, table: &CoeffTable<T>) -> Result<ResidualReport> {
    if spec.h_list.len() < 2 {
        return Err(Error::InvalidInput("residual order needs at least two wavelengths".into()));
    }
    let n = table.order;
    let ppw = MIN_POINTS_PER_WAVELENGTH * (n + 1) as f64;
    let res_table = resonance_table(table.kmax);
    let sg = &table.grid;
    let levels = residual_levels(sg.nt);
    let level_data: Vec<(usize, LevelData<T>)> = levels
        .iter()
        .map(|&k| {
            let entries = table.nonzero_entries().into_iter().filter_map(|(m, p)| table.level_derivs(m, p, k).map(|d| (m, p, d))).collect();
            (k, LevelData { entries })
        })
        .collect();
    let (lo, hi) = (sg.space.lo, sg.space.hi());
    let mut rows = Vec::new();
    for &h in &spec.h_list {
        let dxf = T::lit(2.0 * std::f64::consts::PI) * h / T::lit(ppw);
        let fine = Grid::covering(sg.space.dim, lo, hi, dxf)?;
        let (mut l2, mut linf, mut fl2, mut flinf) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for (k, lv) in &level_data {
            let t = sg.time(*k);
            let vals: Vec<(T, T)> =
                (0..fine.len()).into_par_iter().map(|p| point_residual(table, lv, q, &fine.spacetime(t, p), h, &res_table)).collect();
            let vol = fine.cell_volume().to_f64_lossy();
            let s2: f64 = vals.iter().map(|v| v.0.to_f64_lossy().powi(2)).sum();
            let f2: f64 = vals.iter().map(|v| v.1.to_f64_lossy().powi(2)).sum();
            l2 = l2.max((s2 * vol).sqrt());
            fl2 = fl2.max((f2 * vol).sqrt());
            linf = vals.iter().fold(linf, |a, v| a.max(v.0.to_f64_lossy().abs()));
            flinf = vals.iter().fold(flinf, |a, v| a.max(v.1.to_f64_lossy().abs()));
        }
        rows.push(ResidualRow { h: h.to_f64_lossy(), l2, linf, floor_l2: fl2, floor_linf: flinf, points_per_wavelength: ppw });
    }
    Ok(fit_report(n, rows))
}

/// Slope over the rows whose residual clears the floor by `FLOOR_RATIO`.
pub fn fit_report(order: usize, rows: Vec<ResidualRow>) -> ResidualReport {
    let above: Vec<&ResidualRow> = rows.iter().filter(|r| r.l2 > FLOOR_RATIO * r.floor_l2).collect();
    let use_rows: Vec<&ResidualRow> = if above.len() >= 2 { above } else { rows.iter().collect() };
    let hs: Vec<f64> = use_rows.iter().map(|r| r.h).collect();
    let l2: Vec<f64> = use_rows.iter().map(|r| r.l2).collect();
    let li: Vec<f64> = use_rows.iter().map(|r| r.linf).collect();
    let slope_l2 = loglog_slope(&hs, &l2);
    let slope_linf = loglog_slope(&hs, &li);
    let expected = (order + 1) as f64;
    ResidualReport { order, fitted_rows: use_rows.len(), pass: slope_l2 >= expected - 0.25, rows, slope_l2, slope_linf, expected }
}
