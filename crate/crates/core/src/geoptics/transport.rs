//! Transport along the null characteristics `s -> (s, y - s omega)` of `T = d_t - omega . grad`.

use num_complex::Complex;
use rayon::prelude::*;

use super::{AnsatzSpec, SpacetimeGrid};
use crate::constants::RAY_QUADRATURE_TOL;
use crate::error::{Error, Result};
use crate::interp::shift_sample;
use crate::nullform::Interaction;
use crate::num::Real;
use crate::potential::Potential;
use crate::quadrature::adaptive_simpson;

/// Characteristic lattice: feet `y` of the rays at `t0`, aligned with the space grid and
/// padded so every physical node is surrounded by a full interpolation stencil at every level.
struct Lattice<T> {
    dims: [usize; 2],
    off: [T; 2],
    /// Shift of a ray per unit time in lattice cells, `omega / dx`.
    rate: [T; 2],
}

impl<T: Real> Lattice<T> {
    fn new(sg: &SpacetimeGrid<T>, omega: &[T]) -> Self {
        let span = sg.dt * T::from_usize_lossy(sg.nt.saturating_sub(1));
        let mut dims = [1usize; 2];
        let mut off = [T::zero(); 2];
        let mut rate = [T::zero(); 2];
        for a in 0..sg.space.dim {
            rate[a] = omega[a] / sg.space.dx;
            let end = rate[a] * span;
            let lo_shift = end.min(T::zero());
            let hi_shift = end.max(T::zero());
            let o = T::lit(3.0) + (-lo_shift).ceil();
            off[a] = o;
            dims[a] = sg.space.n[a] + o.to_usize().unwrap_or(0) + hi_shift.ceil().to_usize().unwrap_or(0) + 3;
        }
        Lattice { dims, off, rate }
    }

    fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    /// Fractional lattice index of physical node 0 at time `s` after `t0`.
    fn to_physical_offset(&self, s: T) -> [T; 2] {
        [self.off[0] + self.rate[0] * s, self.off[1] + self.rate[1] * s]
    }

    /// Spacetime position of the ray from lattice point `flat` at time `s` after `t0`.
    fn position(&self, sg: &SpacetimeGrid<T>, flat: usize, s: T) -> [T; 4] {
        let i = flat % self.dims[0];
        let j = flat / self.dims[0];
        let dx = sg.space.dx;
        let mut x = [sg.t0 + s, T::zero(), T::zero(), T::zero()];
        let idx = [i, j];
        for a in 0..sg.space.dim {
            let y = sg.space.lo[a] + (T::from_usize_lossy(idx[a]) - self.off[a]) * dx;
            x[a + 1] = y - self.rate[a] * dx * s;
        }
        x
    }
}

/// Integrates `T A = c(x) A + source` with `A = inflow` at `t0`.
///
/// Each ray is advanced by classical RK4 with the grid time step. The source, a
/// spacetime field on `sg`, is sampled at ray positions by six-point interpolation in
/// space and cubic interpolation in time at half steps. Values are interpolated back
/// to the space grid at every level.
pub fn solve_transport<T: Real>(
    sg: &SpacetimeGrid<T>,
    omega: &[T],
    coeff: &(dyn Fn(&[T; 4]) -> T + Sync),
    source: Option<&[Complex<T>]>,
    inflow: &(dyn Fn(&[T; 4]) -> Complex<T> + Sync),
) -> Result<Vec<Complex<T>>> {
    if omega.len() != sg.space.dim {
        return Err(Error::DimensionMismatch { expected: sg.space.dim, got: omega.len() });
    }
    if let Some(s) = source {
        if s.len() != sg.len() {
            return Err(Error::DimensionMismatch { expected: sg.len(), got: s.len() });
        }
    }
    let lat = Lattice::new(sg, omega);
    let nl = sg.level_len();
    let dt = sg.dt;
    let half = T::lit(0.5);

    let source_on_lattice = |level_pos: T| -> Option<Vec<Complex<T>>> {
        let src = source?;
        let field = time_interp(src, nl, sg.nt, level_pos);
        let s = level_pos * dt;
        let off = lat.to_physical_offset(s);
        Some(shift_sample(&field, sg.space.n, [-off[0], -off[1]], lat.dims))
    };

    let mut cur: Vec<Complex<T>> = (0..lat.len()).into_par_iter().map(|p| inflow(&lat.position(sg, p, T::zero()))).collect();
    let mut out = Vec::with_capacity(sg.len());
    out.extend(to_physical(&lat, sg, &cur, T::zero()));

    let mut src_k = source_on_lattice(T::zero());
    for k in 0..sg.nt.saturating_sub(1) {
        let s0 = T::from_usize_lossy(k) * dt;
        let kk = T::from_usize_lossy(k);
        let src_h = source_on_lattice(kk + half);
        let src_n = source_on_lattice(kk + T::one());
        cur = cur
            .par_iter()
            .enumerate()
            .map(|(p, &a)| {
                let c0 = coeff(&lat.position(sg, p, s0));
                let ch = coeff(&lat.position(sg, p, s0 + half * dt));
                let c1 = coeff(&lat.position(sg, p, s0 + dt));
                let z = Complex::new(T::zero(), T::zero());
                let (f0, fh, f1) = match (&src_k, &src_h, &src_n) {
                    (Some(a0), Some(ah), Some(a1)) => (a0[p], ah[p], a1[p]),
                    _ => (z, z, z),
                };
                let k1 = a * c0 + f0;
                let k2 = (a + k1 * (half * dt)) * ch + fh;
                let k3 = (a + k2 * (half * dt)) * ch + fh;
                let k4 = (a + k3 * dt) * c1 + f1;
                a + (k1 + k2 * T::lit(2.0) + k3 * T::lit(2.0) + k4) * (dt / T::lit(6.0))
            })
            .collect();
        out.extend(to_physical(&lat, sg, &cur, s0 + dt));
        src_k = src_n;
    }
    Ok(out)
}

fn to_physical<T: Real>(lat: &Lattice<T>, sg: &SpacetimeGrid<T>, cur: &[Complex<T>], s: T) -> Vec<Complex<T>> {
    shift_sample(cur, lat.dims, lat.to_physical_offset(s), sg.space.n)
}

/// Cubic interpolation in time of a level-major field at fractional level `pos`.
fn time_interp<T: Real>(src: &[Complex<T>], nl: usize, nt: usize, pos: T) -> Vec<Complex<T>> {
    let fl = pos.floor().to_usize().unwrap_or(0);
    if pos == T::from_usize_lossy(fl) || nt < 4 {
        let k = fl.min(nt - 1);
        return src[k * nl..(k + 1) * nl].to_vec();
    }
    let start = fl.saturating_sub(1).min(nt - 4);
    let w = crate::interp::lagrange4(pos - T::from_usize_lossy(start));
    let mut out = vec![Complex::new(T::zero(), T::zero()); nl];
    for (m, &wm) in w.iter().enumerate() {
        let lvl = &src[(start + m) * nl..(start + m + 1) * nl];
        for (o, &v) in out.iter_mut().zip(lvl) {
            *o += v * wm;
        }
    }
    out
}

/// `A_{1,0}(x) = chi_W(x) (A - iB)/2 exp(int_{-inf}^0 F(t + nu, x' - nu omega) d nu)` at every node.
pub fn solve_a10_closed_form<T: Real>(spec: &AnsatzSpec<T>, q: &dyn Potential<T>, sg: &SpacetimeGrid<T>) -> Result<Vec<Complex<T>>> {
    let levels: Vec<usize> = (0..sg.nt).collect();
    Ok(a10_closed_form_levels(spec, q, sg, &levels)?.concat())
}

/// The closed form on selected time levels only.
pub fn a10_closed_form_levels<T: Real>(
    spec: &AnsatzSpec<T>,
    q: &dyn Potential<T>,
    sg: &SpacetimeGrid<T>,
    levels: &[usize],
) -> Result<Vec<Vec<Complex<T>>>> {
    let inter = Interaction::new(q, &spec.phi, spec.v, spec.w)?;
    let omega = spec.w.direction().to_vec();
    let nl = sg.level_len();
    levels
        .iter()
        .map(|&k| {
            (0..nl)
                .into_par_iter()
                .map(|p| {
                    let x = sg.coords(k, p);
                    let inflow = spec.inflow(&x);
                    if inflow == Complex::new(T::zero(), T::zero()) {
                        return Ok(inflow);
                    }
                    let e = backward_ray_integral(&inter, &omega, &x)?;
                    Ok(inflow * e.exp())
                })
                .collect()
        })
        .collect()
}

/// `int_{-inf}^0 F(t + nu, x' - nu omega) d nu` with limits clipped to the supports.
pub fn backward_ray_integral<T: Real>(inter: &Interaction<'_, T>, omega: &[T], x: &[T; 4]) -> Result<T> {
    ray_integral(inter, omega, x, T::neg_infinity(), T::zero())
}

/// `int_a^b F(t + nu, x' - nu omega) d nu`, clipped to `supp q` and `supp phi'`.
pub fn ray_integral<T: Real>(inter: &Interaction<'_, T>, omega: &[T], x: &[T; 4], a: T, b: T) -> Result<T> {
    let mut dir = [T::one(), T::zero(), T::zero(), T::zero()];
    for (j, &w) in omega.iter().enumerate() {
        dir[j + 1] = -w;
    }
    let Some((qa, qb)) = inter.q.support().clip_line(x, &dir) else {
        return Ok(T::zero());
    };
    let mut lo = a.max(qa);
    let mut hi = b.min(qb);
    // phi' is evaluated at s0 + rate nu with rate = <dir, V>_M
    if let Some((pa, pb)) = inter.phi.derivative_support() {
        let s0 = inter.v.dot_coords(x);
        let rate = inter.v.dot_coords(&dir);
        if rate == T::zero() {
            if !(s0 > pa && s0 < pb) {
                return Ok(T::zero());
            }
        } else {
            let (n1, n2) = ((pa - s0) / rate, (pb - s0) / rate);
            lo = lo.max(n1.min(n2));
            hi = hi.min(n1.max(n2));
        }
    } else {
        return Ok(T::zero());
    }
    if !(lo < hi) {
        return Ok(T::zero());
    }
    let f = |nu: T| {
        let p = [x[0] + nu, x[1] + nu * dir[1], x[2] + nu * dir[2], x[3] + nu * dir[3]];
        inter.f(&p)
    };
    adaptive_simpson(f, lo, hi, T::lit(RAY_QUADRATURE_TOL), 8).map_err(|e| match e {
        Error::Quadrature { a, b, error, .. } => {
            Error::Quadrature { a, b, error, worst: format!("ray through {:?}", x.map(|c| c.to_f64_lossy())) }
        }
        other => other,
    })
}
