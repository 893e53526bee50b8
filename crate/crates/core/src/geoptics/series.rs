//! Pointwise bookkeeping of the expansion in powers of `h` and harmonics `e^{i m psi / h}`.
//!
//! With `u = phi_V + h v` and `v = sum_p h^p sum_m e^{i m psi/h} A_{m,p}`, the residual
//! `box u - Q(x, u, grad u)` equals `sum_r h^r sum_m e^{i m psi/h} Res_{m,r}` where
//!
//! ```text
//! Res = Box + qser * (B + GG)
//! Box_{m,r} = -2 i m T A_{m,r} + box A_{m,r-1}
//! G_{m,r}   = i m W~ A_{m,r} + grad A_{m,r-1}
//! B_{m,r}   = 2 phi_V' <V~, G_{m,r}>_M
//! GG        = <G, G>_M  (series product)
//! qser      = sum_k q_k (h v)^k,  q_k = d_u^k q(x, phi_V) / k!
//! ```
//!
//! Products add harmonics; the resonance table lists which pairs land in which bin.

use num_complex::Complex;

use crate::minkowski::{pairing_c, Covector};
use crate::num::Real;

type C<T> = Complex<T>;

/// Triples `(m, l, m + l)` with all three indices in `[-k, k]`.
pub fn resonance_table(k: usize) -> Vec<(i32, i32, i32)> {
    let k = k as i32;
    let mut t = Vec::new();
    for m in -k..=k {
        for l in -k..=k {
            if (m + l).abs() <= k {
                t.push((m, l, m + l));
            }
        }
    }
    t
}

/// Series indexed by harmonic `m` in `[-k, k]` and order `r` in `[0, rmax]`.
#[derive(Clone, Debug)]
pub struct Series<V> {
    pub k: usize,
    pub rmax: usize,
    pub data: Vec<V>,
}

impl<V: Copy> Series<V> {
    pub fn filled(k: usize, rmax: usize, v: V) -> Self {
        Series { k, rmax, data: vec![v; (2 * k + 1) * (rmax + 1)] }
    }
    #[inline]
    fn at(&self, m: i32, r: usize) -> usize {
        (m + self.k as i32) as usize * (self.rmax + 1) + r
    }
    #[inline]
    pub fn get(&self, m: i32, r: usize) -> V {
        self.data[self.at(m, r)]
    }
    #[inline]
    pub fn set(&mut self, m: i32, r: usize, v: V) {
        let i = self.at(m, r);
        self.data[i] = v;
    }
}

impl<T: Real> Series<C<T>> {
    pub fn zeros(k: usize, rmax: usize) -> Self {
        Series::filled(k, rmax, C::new(T::zero(), T::zero()))
    }

    /// Truncated product over harmonics and orders.
    pub fn mul(&self, other: &Self, table: &[(i32, i32, i32)]) -> Self {
        let mut out = Series::zeros(self.k, self.rmax);
        for &(m, l, s) in table {
            for a in 0..=self.rmax {
                let x = self.get(m, a);
                if x.re == T::zero() && x.im == T::zero() {
                    continue;
                }
                for b in 0..=(self.rmax - a) {
                    let i = out.at(s, a + b);
                    out.data[i] += x * other.get(l, b);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect();
        Series { k: self.k, rmax: self.rmax, data }
    }
}

/// Product of two covector series paired with the Minkowski metric.
pub fn pair_series<T: Real>(x: &Series<[C<T>; 4]>, y: &Series<[C<T>; 4]>, table: &[(i32, i32, i32)]) -> Series<C<T>> {
    let mut out = Series::zeros(x.k, x.rmax);
    for &(m, l, s) in table {
        for a in 0..=x.rmax {
            for b in 0..=(x.rmax - a) {
                let i = out.at(s, a + b);
                out.data[i] += pairing_c(&x.get(m, a), &y.get(l, b));
            }
        }
    }
    out
}

/// Amplitudes `A_{m,r}` with `0 <= m <= k`, `0 <= r <= p`, their spacetime gradients and
/// d'Alembertians at one point. Negative harmonics follow from conjugation.
#[derive(Clone, Debug)]
pub struct PointAmps<T> {
    pub k: usize,
    pub p: usize,
    pub a: Vec<C<T>>,
    pub grad: Vec<[C<T>; 4]>,
    pub boxa: Vec<C<T>>,
}

impl<T: Real> PointAmps<T> {
    pub fn zeros(k: usize, p: usize) -> Self {
        let n = (k + 1) * (p + 1);
        let z = C::new(T::zero(), T::zero());
        PointAmps { k, p, a: vec![z; n], grad: vec![[z; 4]; n], boxa: vec![z; n] }
    }
    #[inline]
    pub fn idx(&self, m: usize, r: usize) -> usize {
        m * (self.p + 1) + r
    }
    /// `(A, grad A, box A)` for signed harmonic `m`; zero beyond the stored range.
    #[inline]
    pub fn get(&self, m: i32, r: usize) -> (C<T>, [C<T>; 4], C<T>) {
        let z = C::new(T::zero(), T::zero());
        if m.unsigned_abs() as usize > self.k || r > self.p {
            return (z, [z; 4], z);
        }
        let i = self.idx(m.unsigned_abs() as usize, r);
        if m >= 0 {
            (self.a[i], self.grad[i], self.boxa[i])
        } else {
            (self.a[i].conj(), self.grad[i].map(|c| c.conj()), self.boxa[i].conj())
        }
    }
}

/// Coefficients of the expansion at one point.
#[derive(Clone, Debug)]
pub struct PointCoeffs<T> {
    /// `d_u^k q(x, phi_V) / k!` for `k = 0..`.
    pub qk: Vec<T>,
    pub dphi: T,
    /// `V~`.
    pub vt: Covector<T>,
    /// `W~ = (1, omega)`.
    pub wt: Covector<T>,
}

/// `Res_{m,r}` for `|m| <= k`, `r <= rmax`.
pub fn residual_series<T: Real>(amps: &PointAmps<T>, c: &PointCoeffs<T>, rmax: usize, table: &[(i32, i32, i32)]) -> Series<C<T>> {
    let k = amps.k;
    let z = C::new(T::zero(), T::zero());
    let i = C::new(T::zero(), T::one());
    let two = T::lit(2.0);
    let mut hv = Series::zeros(k, rmax);
    let mut g = Series::filled(k, rmax, [z; 4]);
    let mut bx = Series::zeros(k, rmax);
    for m in -(k as i32)..=(k as i32) {
        let mf = T::lit(m as f64);
        for r in 0..=rmax {
            let (a, da, _) = amps.get(m, r);
            let (_, dprev, boxprev) = if r > 0 { amps.get(m, r - 1) } else { (z, [z; 4], z) };
            if r > 0 {
                hv.set(m, r, amps.get(m, r - 1).0);
            }
            let ima = i * mf * a;
            let mut gv = [z; 4];
            for j in 0..4 {
                gv[j] = ima * c.wt[j] + dprev[j];
            }
            g.set(m, r, gv);
            // T A = d_t A - omega . grad' A, and omega = (wt[1], wt[2], wt[3])
            let ta = da[0] - da[1] * c.wt[1] - da[2] * c.wt[2] - da[3] * c.wt[3];
            bx.set(m, r, -i * (two * mf) * ta + boxprev);
        }
    }
    let vt = c.vt.map(|x| C::new(x, T::zero()));
    let mut lin = Series::zeros(k, rmax);
    for (slot, gv) in lin.data.iter_mut().zip(&g.data) {
        *slot = pairing_c(&vt, gv) * (two * c.dphi);
    }
    let gg = pair_series(&g, &g, table);
    let mut qser = Series::zeros(k, rmax);
    let mut pow = Series::zeros(k, rmax);
    pow.set(0, 0, C::new(T::one(), T::zero()));
    for (kk, &qv) in c.qk.iter().enumerate() {
        if kk > rmax {
            break;
        }
        if qv != T::zero() {
            for (s, p) in qser.data.iter_mut().zip(&pow.data) {
                *s += *p * qv;
            }
        }
        if kk < rmax {
            pow = pow.mul(&hv, table);
        }
    }
    bx.add(&qser.mul(&lin.add(&gg), table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_table_bins() {
        let t = resonance_table(2);
        assert_eq!(t.len(), 19);
        assert!(t.contains(&(1, 1, 2)));
        assert!(t.contains(&(2, -1, 1)));
        assert!(!t.iter().any(|&(_, _, s)| s.abs() > 2));
        assert_eq!(resonance_table(1).len(), 7);
    }

    #[test]
    fn product_truncates_orders() {
        let t = resonance_table(1);
        let mut a = Series::<C<f64>>::zeros(1, 2);
        a.set(1, 1, C::new(1.0, 0.0));
        a.set(-1, 1, C::new(1.0, 0.0));
        let p = a.mul(&a, &t);
        assert_eq!(p.get(0, 2), C::new(2.0, 0.0));
        let pp = p.mul(&a, &t);
        assert!(pp.data.iter().all(|c| c.norm() == 0.0));
    }
}
