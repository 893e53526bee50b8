//! Uniform space grids in one or two dimensions and finite-difference stencils.

use crate::error::{Error, Result};
use crate::num::{FieldValue, Real};

/// Nodes `lo + (i, j) * dx`, `i < n[0]`, `j < n[1]`; `n[1] = 1` in one dimension.
/// Fields are stored row-major with `i` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    pub dim: usize,
    pub n: [usize; 2],
    pub lo: [T; 2],
    pub dx: T,
}

impl<T: Real> Grid<T> {
    pub fn new_1d(lo: T, dx: T, n: usize) -> Self {
        Grid { dim: 1, n: [n, 1], lo: [lo, T::zero()], dx }
    }

    pub fn new_2d(lo: [T; 2], dx: T, n: [usize; 2]) -> Self {
        Grid { dim: 2, n, lo, dx }
    }

    /// Smallest grid with spacing `dx` covering `[a, b]` on every axis, nodes anchored at `a`.
    pub fn covering(dim: usize, a: [T; 2], b: [T; 2], dx: T) -> Result<Self> {
        if !(dx > T::zero()) {
            return Err(Error::InvalidInput("grid spacing must be positive".into()));
        }
        let count = |lo: T, hi: T| ((hi - lo) / dx).ceil().to_usize().unwrap_or(0) + 1;
        match dim {
            1 => Ok(Grid::new_1d(a[0], dx, count(a[0], b[0]))),
            2 => Ok(Grid::new_2d(a, dx, [count(a[0], b[0]), count(a[1], b[1])])),
            _ => Err(Error::InvalidInput(format!("PDE grids support n = 1 or 2, got {dim}"))),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    #[inline]
    pub fn ij(&self, flat: usize) -> (usize, usize) {
        (flat % self.n[0], flat / self.n[0])
    }

    #[inline]
    pub fn coord(&self, i: usize, j: usize) -> [T; 2] {
        [self.lo[0] + T::from_usize_lossy(i) * self.dx, self.lo[1] + T::from_usize_lossy(j) * self.dx]
    }

    /// Spacetime coordinates `(t, x, y, 0)` of a node.
    #[inline]
    pub fn spacetime(&self, t: T, flat: usize) -> [T; 4] {
        let (i, j) = self.ij(flat);
        let c = self.coord(i, j);
        if self.dim == 1 {
            [t, c[0], T::zero(), T::zero()]
        } else {
            [t, c[0], c[1], T::zero()]
        }
    }

    pub fn hi(&self) -> [T; 2] {
        self.coord(self.n[0] - 1, self.n[1] - 1)
    }

    /// Volume element `dx^n`.
    pub fn cell_volume(&self) -> T {
        self.dx.powi(self.dim as i32)
    }

    /// Grid with half the spacing on the same box (node set is a superset).
    pub fn refined(&self) -> Self {
        let two = T::lit(2.0);
        let mut n = [2 * self.n[0] - 1, 2 * self.n[1] - 1];
        if self.dim == 1 {
            n[1] = 1;
        }
        Grid { dim: self.dim, n, lo: self.lo, dx: self.dx / two }
    }

    pub fn zeros<V: FieldValue<T>>(&self) -> Vec<V> {
        vec![V::zero(); self.len()]
    }

    pub fn sample<V: FieldValue<T>>(&self, t: T, f: impl Fn(&[T; 4]) -> V) -> Vec<V> {
        (0..self.len()).map(|k| f(&self.spacetime(t, k))).collect()
    }

    /// Number of cells between the box edge and the nearest nonzero value.
    pub fn margin_cells<V: FieldValue<T>>(&self, f: &[V]) -> usize {
        let mut m = usize::MAX;
        for (k, v) in f.iter().enumerate() {
            if v.norm_sqr() != T::zero() {
                let (i, j) = self.ij(k);
                let mut d = i.min(self.n[0] - 1 - i);
                if self.dim == 2 {
                    d = d.min(j.min(self.n[1] - 1 - j));
                }
                m = m.min(d);
            }
        }
        m
    }
}

/// Stencil accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Order {
    Second,
    Fourth,
}

#[inline]
fn get<T: Real, V: FieldValue<T>>(g: &Grid<T>, f: &[V], i: isize, j: isize) -> V {
    if i < 0 || j < 0 || i as usize >= g.n[0] || j as usize >= g.n[1] {
        V::zero()
    } else {
        f[g.idx(i as usize, j as usize)]
    }
}

/// Value at offset `d` from node `(i, j)` along `axis`; zero outside the box.
#[inline]
pub fn neighbor<T: Real, V: FieldValue<T>>(g: &Grid<T>, f: &[V], i: usize, j: usize, axis: usize, d: isize) -> V {
    if axis == 0 {
        get(g, f, i as isize + d, j as isize)
    } else {
        get(g, f, i as isize, j as isize + d)
    }
}

/// Centered first derivative along `axis` at node `(i, j)`.
#[inline]
pub fn d1_at<T: Real, V: FieldValue<T>>(g: &Grid<T>, f: &[V], i: usize, j: usize, axis: usize, order: Order) -> V {
    let nb = |d| neighbor(g, f, i, j, axis, d);
    match order {
        Order::Second => (nb(1) - nb(-1)) * (T::lit(0.5) / g.dx),
        Order::Fourth => ((nb(1) - nb(-1)) * T::lit(8.0) - (nb(2) - nb(-2))) * (T::one() / (T::lit(12.0) * g.dx)),
    }
}

/// Centered second derivative along `axis`.
#[inline]
pub fn d2_at<T: Real, V: FieldValue<T>>(g: &Grid<T>, f: &[V], i: usize, j: usize, axis: usize, order: Order) -> V {
    let nb = |d| neighbor(g, f, i, j, axis, d);
    let c = f[g.idx(i, j)];
    let h2 = g.dx * g.dx;
    match order {
        Order::Second => (nb(1) + nb(-1) - c * T::lit(2.0)) * (T::one() / h2),
        Order::Fourth => ((nb(1) + nb(-1)) * T::lit(16.0) - (nb(2) + nb(-2)) - c * T::lit(30.0)) * (T::one() / (T::lit(12.0) * h2)),
    }
}

/// Laplacian at a node; zero Dirichlet data outside the box.
#[inline]
pub fn laplacian_at<T: Real, V: FieldValue<T>>(g: &Grid<T>, f: &[V], i: usize, j: usize, order: Order) -> V {
    let mut r = d2_at(g, f, i, j, 0, order);
    if g.dim == 2 {
        r += d2_at(g, f, i, j, 1, order);
    }
    r
}

/// Whole-field Laplacian.
pub fn laplacian<T: Real, V: FieldValue<T>>(g: &Grid<T>, f: &[V], order: Order) -> Vec<V> {
    (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            laplacian_at(g, f, i, j, order)
        })
        .collect()
}

/// Whole-field first derivative along `axis`.
pub fn derivative<T: Real, V: FieldValue<T>>(g: &Grid<T>, f: &[V], axis: usize, order: Order) -> Vec<V> {
    (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            d1_at(g, f, i, j, axis, order)
        })
        .collect()
}

/// Mixed derivative `D^alpha f` by repeated centered differences (second order).
pub fn mixed_derivative<T: Real, V: FieldValue<T>>(g: &Grid<T>, f: &[V], alpha: [usize; 2]) -> Vec<V> {
    let mut cur = f.to_vec();
    for axis in 0..2 {
        let mut k = alpha[axis];
        while k >= 2 {
            cur = (0..g.len())
                .map(|p| {
                    let (i, j) = g.ij(p);
                    d2_at(g, &cur, i, j, axis, Order::Second)
                })
                .collect();
            k -= 2;
        }
        if k == 1 {
            cur = derivative(g, &cur, axis, Order::Second);
        }
    }
    cur
}

/// `sqrt(sum |f|^2 dx^n)` in lexicographic order.
pub fn l2_norm<T: Real, V: FieldValue<T>>(g: &Grid<T>, f: &[V]) -> T {
    let mut s = T::zero();
    for v in f {
        s += v.norm_sqr();
    }
    (s * g.cell_volume()).sqrt()
}

pub fn linf_norm<T: Real, V: FieldValue<T>>(f: &[V]) -> T {
    f.iter().fold(T::zero(), |a, v| a.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_orders() {
        // sin on a 1-D grid, interior error ratio when halving dx
        let err = |n: usize, order: Order| {
            let dx = 1.0 / n as f64;
            let g = Grid::new_1d(0.0, dx, n + 1);
            let f = g.sample(0.0, |x| (3.0 * x[1]).sin());
            let d = derivative(&g, &f, 0, order);
            let l = laplacian(&g, &f, order);
            let (mut e1, mut e2) = (0.0f64, 0.0f64);
            for i in 3..n - 2 {
                let x = i as f64 * dx;
                e1 = e1.max((d[i] - 3.0 * (3.0 * x).cos()).abs());
                e2 = e2.max((l[i] + 9.0 * (3.0 * x).sin()).abs());
            }
            (e1, e2)
        };
        let (a, b) = (err(40, Order::Second), err(80, Order::Second));
        assert!((a.0 / b.0).log2() > 1.9 && (a.1 / b.1).log2() > 1.9);
        let (a, b) = (err(40, Order::Fourth), err(80, Order::Fourth));
        assert!((a.0 / b.0).log2() > 3.8 && (a.1 / b.1).log2() > 3.8);
    }

    #[test]
    fn refined_contains_nodes() {
        let g = Grid::new_2d([-1.0, 0.5], 0.25, [5, 3]);
        let r = g.refined();
        assert_eq!(r.n, [9, 5]);
        assert_eq!(r.coord(8, 4), g.coord(4, 2));
    }
}
