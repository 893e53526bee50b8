//! Evaluation of `u_N = phi_V + h sum_p h^p sum_m e^{i m psi/h} A_{m,p}` off the amplitude grid.

use num_complex::Complex;
use rayon::prelude::*;

use super::hierarchy::CoeffTable;
use crate::grid::Grid;
use crate::interp::{lagrange6, sample_at};
use crate::num::Real;

type C<T> = Complex<T>;

/// Six time levels and weights around `t`, clamped to the table.
fn time_weights<T: Real>(table: &CoeffTable<T>, t: T) -> Vec<(usize, T)> {
    let sg = &table.grid;
    let pos = (t - sg.t0) / sg.dt;
    if let Some(k) = sg.level_of(t) {
        return vec![(k, T::one())];
    }
    let nt = sg.nt;
    if nt < 6 {
        let k = pos.round().max(T::zero()).to_usize().unwrap_or(0).min(nt - 1);
        return vec![(k, T::one())];
    }
    let fl = pos.floor().to_isize().unwrap_or(0);
    let start = (fl - 2).clamp(0, nt as isize - 6) as usize;
    let w = lagrange6(pos - T::from_usize_lossy(start + 2));
    (0..6).map(|s| (start + s, w[s])).collect()
}

/// Amplitude `A_{m,p}` (m >= 0) interpolated to time `t` on the amplitude space grid.
pub(crate) fn level_at_time<T: Real>(table: &CoeffTable<T>, m: usize, p: usize, t: T) -> Option<Vec<C<T>>> {
    let nl = table.grid.level_len();
    let mut out = vec![C::new(T::zero(), T::zero()); nl];
    let tw = time_weights(table, t);
    for (k, w) in tw {
        let lvl = table.level(m, p, k)?;
        for (o, v) in out.iter_mut().zip(lvl) {
            *o += *v * w;
        }
    }
    Some(out)
}

/// Samples `u_N` and friends at one time on arbitrary spatial points.
pub struct UnSampler<'a, T: Real> {
    table: &'a CoeffTable<T>,
    h: T,
    t: T,
    // (m, p, level array) of the nonzero amplitudes at time t
    levels: Vec<(usize, usize, Vec<C<T>>)>,
}

impl<'a, T: Real> UnSampler<'a, T> {
    pub fn new(table: &'a CoeffTable<T>, h: T, t: T) -> Self {
        let levels = table.nonzero_entries().into_iter().filter_map(|(m, p)| level_at_time(table, m, p, t).map(|l| (m, p, l))).collect();
        UnSampler { table, h, t, levels }
    }

    fn index_of(&self, x: &[T; 4]) -> [T; 2] {
        let g = &self.table.grid.space;
        let i = (x[1] - g.lo[0]) / g.dx;
        let j = if g.dim == 2 { (x[2] - g.lo[1]) / g.dx } else { T::zero() };
        [i, j]
    }

    /// `(sum_p h^p A_{m,p})` for each `m >= 0` at a point.
    fn harmonics(&self, x: &[T; 4]) -> Vec<C<T>> {
        let g = &self.table.grid.space;
        let pos = self.index_of(x);
        let mut hm = vec![C::new(T::zero(), T::zero()); self.table.kmax + 1];
        for (m, p, lvl) in &self.levels {
            let v = sample_at(lvl, g.n, pos);
            hm[*m] += v * self.h.powi(*p as i32);
        }
        hm
    }

    fn psi(&self, x: &[T; 4]) -> T {
        let mut c = *x;
        c[0] = self.t;
        self.table.w.dot_coords(&c)
    }

    fn background(&self, x: &[T; 4]) -> T {
        let mut c = *x;
        c[0] = self.t;
        self.table.phi.value(self.table.v.dot_coords(&c))
    }

    /// Real `u_N(t, x)`.
    pub fn value(&self, x: &[T; 4]) -> T {
        let hm = self.harmonics(x);
        let ph = self.psi(x) / self.h;
        let mut acc = hm[0].re;
        for (m, a) in hm.iter().enumerate().skip(1) {
            let e = C::from_polar(T::one(), T::from_usize_lossy(m) * ph);
            acc += T::lit(2.0) * (e * a).re;
        }
        self.background(x) + self.h * acc
    }

    /// `u_N` summed over all signed harmonics in complex arithmetic.
    pub fn complex_value(&self, x: &[T; 4]) -> C<T> {
        let hm = self.harmonics(x);
        let ph = self.psi(x) / self.h;
        let mut acc = hm[0];
        for (m, a) in hm.iter().enumerate().skip(1) {
            let e = C::from_polar(T::one(), T::from_usize_lossy(m) * ph);
            acc += e * a + e.conj() * a.conj();
        }
        C::new(self.background(x), T::zero()) + acc * self.h
    }

    /// The `m`-th harmonic `sum_p h^p A_{m,p}` (no phase), `m >= 0`.
    pub fn harmonic(&self, m: usize, x: &[T; 4]) -> C<T> {
        self.harmonics(x).get(m).copied().unwrap_or(C::new(T::zero(), T::zero()))
    }
}

/// `u_N` at time `t` on every node of `grid`.
pub fn assemble_un<T: Real>(table: &CoeffTable<T>, h: T, t: T, grid: &Grid<T>) -> Vec<T> {
    let s = UnSampler::new(table, h, t);
    (0..grid.len()).into_par_iter().map(|p| s.value(&grid.spacetime(t, p))).collect()
}

/// Complex `u_N`; the imaginary part measures the conjugate-symmetry defect.
pub fn assemble_complex<T: Real>(table: &CoeffTable<T>, h: T, t: T, grid: &Grid<T>) -> Vec<C<T>> {
    let s = UnSampler::new(table, h, t);
    (0..grid.len()).into_par_iter().map(|p| s.complex_value(&grid.spacetime(t, p))).collect()
}
