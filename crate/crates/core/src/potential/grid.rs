use super::{Potential, Support};
use crate::num::Real;

/// Time- and u-independent planar potential sampled on a uniform grid, bilinear in between.
///
/// Nodes are `lo + (i, j) * spacing` with `i < nx`, `j < ny`, stored row-major in `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPotential<T> {
    pub lo: [T; 2],
    pub spacing: T,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<T>,
}

impl<T: Real> GridPotential<T> {
    pub fn new(lo: [T; 2], spacing: T, nx: usize, ny: usize, values: Vec<T>) -> Self {
        assert_eq!(values.len(), nx * ny, "grid potential size");
        GridPotential { lo, spacing, nx, ny, values }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.values[j * self.nx + i]
    }

    /// Value and planar gradient of the bilinear interpolant.
    pub fn sample(&self, x: T, y: T) -> (T, [T; 2]) {
        let z = T::zero();
        let fx = (x - self.lo[0]) / self.spacing;
        let fy = (y - self.lo[1]) / self.spacing;
        let nxm = T::from_usize_lossy(self.nx - 1);
        let nym = T::from_usize_lossy(self.ny - 1);
        if !(fx >= z && fy >= z && fx <= nxm && fy <= nym) {
            return (z, [z, z]);
        }
        let i = fx.floor().to_usize().unwrap_or(0).min(self.nx - 2);
        let j = fy.floor().to_usize().unwrap_or(0).min(self.ny - 2);
        let a = fx - T::from_usize_lossy(i);
        let b = fy - T::from_usize_lossy(j);
        let (v00, v10, v01, v11) = (self.at(i, j), self.at(i + 1, j), self.at(i, j + 1), self.at(i + 1, j + 1));
        let one = T::one();
        let v = v00 * (one - a) * (one - b) + v10 * a * (one - b) + v01 * (one - a) * b + v11 * a * b;
        let gx = ((v10 - v00) * (one - b) + (v11 - v01) * b) / self.spacing;
        let gy = ((v01 - v00) * (one - a) + (v11 - v10) * a) / self.spacing;
        (v, [gx, gy])
    }
}

impl<T: Real> Potential<T> for GridPotential<T> {
    fn eval(&self, x: &[T; 4], _u: T) -> T {
        self.sample(x[1], x[2]).0
    }
    fn grad_x(&self, x: &[T; 4], _u: T) -> [T; 4] {
        let (_, g) = self.sample(x[1], x[2]);
        [T::zero(), g[0], g[1], T::zero()]
    }
    fn du(&self, x: &[T; 4], u: T, k: usize) -> T {
        if k == 0 {
            self.eval(x, u)
        } else {
            T::zero()
        }
    }
    fn support(&self) -> Support<T> {
        let half = T::lit(0.5);
        let wx = T::from_usize_lossy(self.nx - 1) * self.spacing;
        let wy = T::from_usize_lossy(self.ny - 1) * self.spacing;
        let c = [self.lo[0] + half * wx, self.lo[1] + half * wy, T::zero()];
        Support::SpatialCylinder { center: c, radius: half * (wx * wx + wy * wy).sqrt() }
    }
    fn time_independent(&self) -> bool {
        true
    }
    fn u_independent(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        format!("grid {}x{} spacing {}", self.nx, self.ny, self.spacing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_affine() {
        let (nx, ny) = (5, 4);
        let vals: Vec<f64> =
            (0..ny).flat_map(|j| (0..nx).map(move |i| 1.0 + 2.0 * (i as f64 * 0.5) - 0.5 * (j as f64 * 0.5 - 1.0))).collect();
        let g = GridPotential::new([0.0, -1.0], 0.5, nx, ny, vals);
        let (v, d) = g.sample(1.3, 0.2);
        assert!((v - (1.0 + 2.6 - 0.1)).abs() < 1e-14);
        assert!((d[0] - 2.0).abs() < 1e-14 && (d[1] + 0.5).abs() < 1e-14);
        assert_eq!(g.sample(5.0, 0.0).0, 0.0);
    }
}
