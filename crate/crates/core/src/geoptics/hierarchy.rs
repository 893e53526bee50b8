//! The coefficient hierarchy `A_{m,p}`: transport for `m != 0`, damped waves for `m = 0`.

use num_complex::Complex;
use rayon::prelude::*;

use super::series::{residual_series, resonance_table, PointAmps, PointCoeffs};
use super::transport::solve_transport;
use super::{AnsatzSpec, SpacetimeGrid};
use crate::constants::CFL_LIMIT;
use crate::error::{Error, Result};
use crate::grid::{d1_at, d2_at, laplacian_at, Order};
use crate::minkowski::{Covector, LightVector};
use crate::nullform::Interaction;
use crate::num::Real;
use crate::potential::Potential;
use crate::profile::Profile;

type C<T> = Complex<T>;

/// Amplitudes `A_{m,p}`, `0 <= m <= N + 1`, `0 <= p <= N`, on a spacetime grid.
/// Negative harmonics are the conjugates. Missing entries are identically zero.
#[derive(Clone, Debug)]
pub struct CoeffTable<T: Real> {
    pub grid: SpacetimeGrid<T>,
    pub order: usize,
    pub kmax: usize,
    fields: Vec<Option<Vec<C<T>>>>,
    pub v: LightVector<T>,
    pub w: LightVector<T>,
    pub phi: Profile<T>,
    pub chi: Profile<T>,
    pub a: T,
    pub b: T,
    /// Named scalar diagnostics gathered during the build.
    pub diagnostics: Vec<(String, f64)>,
}

/// `A`, its spacetime gradient and `box A` on one time level.
pub struct DerivFields<T> {
    pub value: Vec<C<T>>,
    pub grad: [Vec<C<T>>; 4],
    pub boxa: Vec<C<T>>,
}

impl<T: Real> CoeffTable<T> {
    pub fn empty(spec: &AnsatzSpec<T>, grid: SpacetimeGrid<T>) -> Self {
        let kmax = spec.order + 1;
        CoeffTable {
            grid,
            order: spec.order,
            kmax,
            fields: vec![None; (kmax + 1) * (spec.order + 1)],
            v: spec.v,
            w: spec.w,
            phi: spec.phi.clone(),
            chi: spec.chi.clone(),
            a: spec.a,
            b: spec.b,
            diagnostics: Vec::new(),
        }
    }

    #[inline]
    fn slot(&self, m: usize, p: usize) -> usize {
        m * (self.order + 1) + p
    }

    pub fn set(&mut self, m: usize, p: usize, f: Vec<C<T>>) {
        assert_eq!(f.len(), self.grid.len());
        let s = self.slot(m, p);
        self.fields[s] = Some(f);
    }

    /// Field for `m >= 0`, or `None` when identically zero.
    pub fn field(&self, m: usize, p: usize) -> Option<&[C<T>]> {
        if m > self.kmax || p > self.order {
            return None;
        }
        self.fields[self.slot(m, p)].as_deref()
    }

    /// `A_{m,p}` at level `k`, node `flat`, any sign of `m`.
    pub fn value(&self, m: i32, p: usize, k: usize, flat: usize) -> C<T> {
        match self.field(m.unsigned_abs() as usize, p) {
            None => C::new(T::zero(), T::zero()),
            Some(f) => {
                let v = f[k * self.grid.level_len() + flat];
                if m < 0 {
                    v.conj()
                } else {
                    v
                }
            }
        }
    }

    /// Which `(m, p)` entries are stored, `m >= 0`.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for m in 0..=self.kmax {
            for p in 0..=self.order {
                if self.field(m, p).is_some() {
                    out.push((m, p));
                }
            }
        }
        out
    }

    /// Level slice of a stored field.
    pub fn level(&self, m: usize, p: usize, k: usize) -> Option<&[C<T>]> {
        let nl = self.grid.level_len();
        self.field(m, p).map(|f| &f[k * nl..(k + 1) * nl])
    }

    /// Value, gradient and d'Alembertian of `A_{m,p}` on level `k` by fourth-order differences.
    pub fn level_derivs(&self, m: usize, p: usize, k: usize) -> Option<DerivFields<T>> {
        let f = self.field(m, p)?;
        let nl = self.grid.level_len();
        let mut value = Vec::with_capacity(nl);
        let mut grad: [Vec<C<T>>; 4] = Default::default();
        let mut boxa = Vec::with_capacity(nl);
        for flat in 0..nl {
            let (a, g, b) = local_derivs(&self.grid, f, k, flat);
            value.push(a);
            for j in 0..4 {
                grad[j].push(g[j]);
            }
            boxa.push(b);
        }
        Some(DerivFields { value, grad, boxa })
    }

    /// Pointwise amplitudes for the series with orders `0..=p`.
    fn point_amps(&self, p: usize, k: usize, flat: usize) -> PointAmps<T> {
        let mut amps = PointAmps::zeros(self.kmax, p);
        for m in 0..=self.kmax {
            for r in 0..=p.min(self.order) {
                if let Some(f) = self.field(m, r) {
                    let (a, g, b) = local_derivs(&self.grid, f, k, flat);
                    let i = amps.idx(m, r);
                    amps.a[i] = a;
                    amps.grad[i] = g;
                    amps.boxa[i] = b;
                }
            }
        }
        amps
    }

    /// Largest violation of `A_{-m,p} = conj(A_{m,p})` over the reflected storage (zero by construction).
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (m, p) in self.nonzero_entries() {
            let f = self.field(m, p).unwrap();
            for (i, v) in f.iter().enumerate() {
                let k = i / self.grid.level_len();
                let flat = i % self.grid.level_len();
                let neg = self.value(-(m as i32), p, k, flat);
                let d = if m == 0 { (v.im).abs() } else { (neg - v.conj()).norm() };
                worst = worst.max(d.to_f64_lossy());
            }
        }
        worst
    }
}

// Five-point derivative weights in time: (first level, d/dt weights * 12 dt, d2/dt2 weights * 12 dt^2).
fn time_stencil(k: usize, nt: usize) -> (usize, [f64; 5], [f64; 5]) {
    const C1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    const C2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
    const L0: ([f64; 5], [f64; 5]) = ([-25.0, 48.0, -36.0, 16.0, -3.0], [35.0, -104.0, 114.0, -56.0, 11.0]);
    const L1: ([f64; 5], [f64; 5]) = ([-3.0, -10.0, 18.0, -6.0, 1.0], [11.0, -20.0, 6.0, 4.0, -1.0]);
    let rev = |w: [f64; 5], s: f64| [s * w[4], s * w[3], s * w[2], s * w[1], s * w[0]];
    if nt < 5 {
        return (0, [0.0; 5], [0.0; 5]);
    }
    if k >= 2 && k + 2 < nt {
        (k - 2, C1, C2)
    } else if k == 0 {
        (0, L0.0, L0.1)
    } else if k == 1 {
        (0, L1.0, L1.1)
    } else if k + 2 == nt {
        (nt - 5, rev(L1.0, -1.0), rev(L1.1, 1.0))
    } else {
        (nt - 5, rev(L0.0, -1.0), rev(L0.1, 1.0))
    }
}

/// `(A, grad A, box A)` at one node of a spacetime field; zero outside the space box.
pub(crate) fn local_derivs<T: Real>(sg: &SpacetimeGrid<T>, f: &[C<T>], k: usize, flat: usize) -> (C<T>, [C<T>; 4], C<T>) {
    let nl = sg.level_len();
    let g = &sg.space;
    let (i, j) = g.ij(flat);
    let (start, w1, w2) = time_stencil(k, sg.nt);
    let z = C::new(T::zero(), T::zero());
    let mut dt1 = z;
    let mut dt2 = z;
    for s in 0..5 {
        let v = f[(start + s) * nl + flat];
        dt1 += v * T::lit(w1[s]);
        dt2 += v * T::lit(w2[s]);
    }
    let dt = sg.dt;
    dt1 /= T::lit(12.0) * dt;
    dt2 /= T::lit(12.0) * dt * dt;
    let lvl = &f[k * nl..(k + 1) * nl];
    let mut grad = [dt1, z, z, z];
    let mut lap = z;
    for a in 0..g.dim {
        grad[a + 1] = d1_at(g, lvl, i, j, a, Order::Fourth);
        lap += d2_at(g, lvl, i, j, a, Order::Fourth);
    }
    (lvl[flat], grad, lap - dt2)
}

/// Solves `box A + c <V~, grad A>_M + s = 0` with zero data by leapfrog on the amplitude grid.
/// `c` and `s` are real spacetime fields on `sg`; the time-derivative coupling is treated
/// implicitly (it is pointwise linear), the rest explicitly.
pub fn solve_m0_wave<T: Real>(sg: &SpacetimeGrid<T>, vt: &Covector<T>, c: &[T], s: &[T]) -> Result<Vec<T>> {
    let g = &sg.space;
    let ratio = sg.dt * T::from_usize_lossy(g.dim).sqrt() / g.dx;
    if ratio.to_f64_lossy() > CFL_LIMIT {
        return Err(Error::Cfl { ratio: ratio.to_f64_lossy(), limit: CFL_LIMIT });
    }
    let nl = sg.level_len();
    let dt = sg.dt;
    let dt2 = dt * dt;
    let half = T::lit(0.5);
    let mut out = vec![T::zero(); sg.len()];
    // <V~, grad A>_M = -V~0 d_t A + theta . grad' A
    let v0 = -vt[0];
    for k in 1..sg.nt.saturating_sub(1) {
        let (done, rest) = out.split_at_mut((k + 1) * nl);
        let prev = &done[(k - 1) * nl..k * nl];
        let cur = &done[k * nl..(k + 1) * nl];
        let next = &mut rest[..nl];
        let base = k * nl;
        next.par_iter_mut().enumerate().for_each(|(p, o)| {
            let (i, j) = g.ij(p);
            let mut rhs = laplacian_at(g, cur, i, j, Order::Second) + s[base + p];
            let cc = c[base + p];
            if cc != T::zero() {
                for a in 0..g.dim {
                    rhs += cc * vt[a + 1] * d1_at(g, cur, i, j, a, Order::Second);
                }
            }
            // A_tt = lap A + c V~ terms; c v0 A_t is centered and moved to the left
            let alpha = cc * v0 * dt * half;
            *o = (T::lit(2.0) * cur[p] - prev[p] * (T::one() + alpha) + dt2 * rhs) / (T::one() - alpha);
        });
        // keep the Dirichlet edge
        for p in 0..nl {
            let (i, j) = g.ij(p);
            let edge = i == 0 || i + 1 == g.n[0] || (g.dim == 2 && (j == 0 || j + 1 == g.n[1]));
            if edge {
                rest[p] = T::zero();
            }
        }
    }
    Ok(out)
}

/// Builds the table for truncation order `spec.order`.
///
/// Level `p` first solves transport for `A_{m,p}`, `1 <= m <= p + 1`, with source
/// `Res_{m,p} / (2 i m)` computed with `A_{.,p} = 0`; then the wave equation for
/// `A_{0,p}` whose source is `Res_{0,p+1}` with `A_{0,p} = 0`.
/// `A_{m,0}` vanishes for `m >= 2`: its transport equation is homogeneous with zero inflow.
pub fn build_hierarchy<T: Real>(spec: &AnsatzSpec<T>, q: &dyn Potential<T>) -> Result<CoeffTable<T>> {
    spec.validate(q)?;
    let sg = spec.spacetime_grid(q)?;
    let inter = Interaction::new(q, &spec.phi, spec.v, spec.w)?;
    let omega = spec.w.direction().to_vec();
    let coeff = |x: &[T; 4]| inter.f(x);
    let mut table = CoeffTable::empty(spec, sg.clone());
    let a10 = solve_transport(&sg, &omega, &coeff, None, &|x: &[T; 4]| spec.inflow(x))?;
    table.set(1, 0, a10);

    let table_res = resonance_table(table.kmax);
    let vt = spec.v.twin_covector();
    let wt = spec.w.twin_covector();
    let nl = sg.level_len();
    let pair_c = |m: usize| C::new(T::zero(), T::lit(2.0 * m as f64));

    for p in 0..=spec.order {
        if p >= 1 {
            let bins: Vec<usize> = (1..=(p + 1).min(table.kmax)).collect();
            let sources: Vec<Vec<C<T>>> = {
                let t = &table;
                let per_point: Vec<Vec<C<T>>> = (0..sg.len())
                    .into_par_iter()
                    .map(|idx| {
                        let (k, flat) = (idx / nl, idx % nl);
                        let x = sg.coords(k, flat);
                        let coeffs = coeffs_at(q, &spec.v, &spec.phi, &x, &wt, p);
                        let amps = t.point_amps(p, k, flat);
                        let res = residual_series(&amps, &coeffs, p, &table_res);
                        bins.iter().map(|&m| res.get(m as i32, p) / pair_c(m)).collect()
                    })
                    .collect();
                (0..bins.len()).map(|b| per_point.iter().map(|v| v[b]).collect()).collect()
            };
            for (b, &m) in bins.iter().enumerate() {
                let a = solve_transport(&sg, &omega, &coeff, Some(&sources[b]), &|_: &[T; 4]| C::new(T::zero(), T::zero()))?;
                table.set(m, p, a);
            }
        }
        // wave equation for A_{0,p}
        let t = &table;
        let pts: Vec<(T, T, T)> = (0..sg.len())
            .into_par_iter()
            .map(|idx| {
                let (k, flat) = (idx / nl, idx % nl);
                let x = sg.coords(k, flat);
                let coeffs = coeffs_at(q, &spec.v, &spec.phi, &x, &wt, p + 1);
                let amps = t.point_amps(p, k, flat);
                let res = residual_series(&amps, &coeffs, p + 1, &table_res);
                let s0 = res.get(0, p + 1);
                (T::lit(2.0) * coeffs.qk[0] * coeffs.dphi, s0.re, s0.im)
            })
            .collect();
        let c: Vec<T> = pts.iter().map(|v| v.0).collect();
        let s: Vec<T> = pts.iter().map(|v| v.1).collect();
        let im = pts.iter().fold(0.0f64, |a, v| a.max(v.2.abs().to_f64_lossy()));
        let smax = s.iter().fold(0.0f64, |a, v| a.max(v.abs().to_f64_lossy()));
        table.diagnostics.push((format!("source_0_{p}_max"), smax));
        table.diagnostics.push((format!("source_0_{p}_imag_max"), im));
        let a0 = solve_m0_wave(&sg, &vt, &c, &s)?;
        table.set(0, p, a0.into_iter().map(|x| C::new(x, T::zero())).collect());
    }
    Ok(table)
}

pub(crate) fn coeffs_at<T: Real>(
    q: &dyn Potential<T>,
    spec_v: &LightVector<T>,
    phi: &Profile<T>,
    x: &[T; 4],
    wt: &Covector<T>,
    rmax: usize,
) -> PointCoeffs<T> {
    let s = spec_v.dot_coords(x);
    let (val, dphi, _) = phi.eval(s);
    let mut qk = Vec::with_capacity(rmax + 1);
    let mut fact = T::one();
    for k in 0..=rmax {
        if k > 0 {
            fact *= T::from_usize_lossy(k);
        }
        qk.push(q.du(x, val, k) / fact);
    }
    PointCoeffs { qk, dphi, vt: spec_v.twin_covector(), wt: *wt }
}
