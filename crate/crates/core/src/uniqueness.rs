//! Numerical certificate that `d eta` does not vanish for a nonzero potential.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::EXTERIOR_STEP_CAP;
use crate::error::{Error, Result};
use crate::minkowski::LightVector;
use crate::nullform::{max_abs, OneForm};
use crate::num::Real;
use crate::potential::Potential;
use crate::profile::Profile;

/// Uniform spacetime sampling box with `n_per_axis` nodes along each of `dim + 1` axes.
#[derive(Clone, Debug)]
pub struct CertGrid<T> {
    pub lo: [T; 4],
    pub hi: [T; 4],
    pub n_per_axis: usize,
    pub dim: usize,
}

impl<T: Real> CertGrid<T> {
    /// Cube `[-half, half]^(dim+1)`.
    pub fn cube(half: T, n_per_axis: usize, dim: usize) -> Self {
        let mut lo = [T::zero(); 4];
        let mut hi = [T::zero(); 4];
        for a in 0..=dim {
            lo[a] = -half;
            hi[a] = half;
        }
        CertGrid { lo, hi, n_per_axis, dim }
    }

    pub fn spacing(&self) -> T {
        let n = T::from_usize_lossy(self.n_per_axis - 1);
        (0..=self.dim).map(|a| (self.hi[a] - self.lo[a]) / n).fold(T::zero(), T::max)
    }

    fn point(&self, mut flat: usize) -> [T; 4] {
        let n = self.n_per_axis;
        let nm = T::from_usize_lossy(n - 1);
        let mut x = [T::zero(); 4];
        for a in 0..=self.dim {
            let i = flat % n;
            flat /= n;
            x[a] = self.lo[a] + (self.hi[a] - self.lo[a]) * T::from_usize_lossy(i) / nm;
        }
        x
    }

    fn len(&self) -> usize {
        self.n_per_axis.pow(self.dim as u32 + 1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    /// `max |(d eta)_{mj}|` over grid, profiles and light vectors.
    pub certificate: f64,
    pub step: f64,
    pub spacing: f64,
    pub grid_points: usize,
    pub n_profiles: usize,
    pub n_vectors: usize,
    /// Profile and vector indices and point where the maximum was found.
    pub argmax: Option<(usize, usize, [f64; 4])>,
    /// `q phi_V'` vanished on every sample, so the families cannot see `q`.
    pub inconclusive: bool,
    /// `q` is nonzero on the grid yet the certificate is below tolerance.
    pub resolution_warning: bool,
    pub tolerance: f64,
}

/// Centered-difference step `sqrt(spacing) * 1e-2`, capped.
pub fn exterior_step(spacing: f64) -> f64 {
    (spacing.sqrt() * 1e-2).min(EXTERIOR_STEP_CAP)
}

pub fn uniqueness_certificate<T: Real>(
    q: &dyn Potential<T>,
    profiles: &[Profile<T>],
    vectors: &[LightVector<T>],
    grid: &CertGrid<T>,
    tolerance: f64,
) -> Result<UniquenessReport> {
    if profiles.is_empty() || vectors.is_empty() {
        return Err(Error::InvalidInput("uniqueness certificate needs profiles and light vectors".into()));
    }
    if grid.n_per_axis < 2 {
        return Err(Error::InvalidInput("certificate grid needs at least 2 nodes per axis".into()));
    }
    if vectors.iter().any(|v| v.dim() != grid.dim) {
        return Err(Error::DimensionMismatch { expected: grid.dim, got: vectors[0].dim() });
    }
    let spacing = grid.spacing();
    let step = exterior_step(spacing.to_f64_lossy());
    let delta = T::lit(step);
    let support = q.support();
    let pad = delta * T::lit(2.0);

    // per point: (max |d eta|, argmax pair, any q != 0, any q phi' != 0)
    let per_point: Vec<(f64, usize, bool, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let x = grid.point(flat);
            if !near_support(&support, &x, pad) {
                return (0.0, 0, false, false);
            }
            let mut best = 0.0;
            let mut arg = 0;
            let mut q_nonzero = false;
            let mut seen = false;
            for (ip, phi) in profiles.iter().enumerate() {
                for (iv, v) in vectors.iter().enumerate() {
                    let eta = OneForm { q, phi, v: *v };
                    let s = v.dot_coords(&x);
                    let qv = q.eval(&x, phi.value(s));
                    if qv != T::zero() {
                        q_nonzero = true;
                        if phi.d1(s) != T::zero() {
                            seen = true;
                        }
                    }
                    let m = max_abs(&eta.exterior_derivative(&x, delta)).to_f64_lossy();
                    if m > best {
                        best = m;
                        arg = ip * vectors.len() + iv;
                    }
                }
            }
            (best, arg, q_nonzero, seen)
        })
        .collect();

    let mut cert = 0.0;
    let mut argmax = None;
    let mut q_nonzero = false;
    let mut seen = false;
    for (flat, &(m, a, qn, s)) in per_point.iter().enumerate() {
        q_nonzero |= qn;
        seen |= s;
        if m > cert {
            cert = m;
            let x = grid.point(flat);
            argmax = Some((a / vectors.len(), a % vectors.len(), x.map(|c| c.to_f64_lossy())));
        }
    }
    let inconclusive = q_nonzero && !seen;
    Ok(UniquenessReport {
        certificate: cert,
        step,
        spacing: spacing.to_f64_lossy(),
        grid_points: grid.len(),
        n_profiles: profiles.len(),
        n_vectors: vectors.len(),
        argmax,
        inconclusive,
        resolution_warning: q_nonzero && !inconclusive && cert < tolerance,
        tolerance,
    })
}

fn near_support<T: Real>(s: &crate::potential::Support<T>, x: &[T; 4], pad: T) -> bool {
    use crate::potential::Support;
    match s {
        Support::Empty => false,
        Support::SpacetimeBall { center, radius } => Support::SpacetimeBall { center: *center, radius: *radius + pad }.contains(x),
        Support::SpatialCylinder { center, radius } => Support::SpatialCylinder { center: *center, radius: *radius + pad }.contains(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{catalog, ZeroPotential};

    fn families() -> (Vec<Profile<f64>>, Vec<LightVector<f64>>) {
        let p = vec![Profile::bump(0.0, 1.0), Profile::cosine(0.2, 0.8, 2)];
        let v = vec![LightVector::planar(1, 0.3), LightVector::planar(-1, 1.9)];
        (p, v)
    }

    #[test]
    fn zero_potential_gives_zero() {
        let (p, v) = families();
        let g = CertGrid::cube(1.0, 12, 2);
        let r = uniqueness_certificate(&ZeroPotential, &p, &v, &g, 1e-3).unwrap();
        assert_eq!(r.certificate, 0.0);
        assert!(!r.inconclusive && !r.resolution_warning);
    }

    #[test]
    fn flat_profile_is_inconclusive() {
        let q = catalog::<f64>("bump_const_u", 1.0, 0.5, [0.0; 3]).unwrap();
        let p = vec![Profile::Constant { value: 1.0 }];
        let v = vec![LightVector::planar(1, 0.0)];
        let r = uniqueness_certificate(q.as_ref(), &p, &v, &CertGrid::cube(1.0, 10, 2), 1e-3).unwrap();
        assert!(r.inconclusive);
        assert_eq!(r.certificate, 0.0);
    }

    #[test]
    fn empty_family_rejected() {
        let g = CertGrid::cube(1.0, 4, 1);
        assert!(uniqueness_certificate::<f64>(&ZeroPotential, &[], &[LightVector::new(1, &[1.0]).unwrap()], &g, 1e-3).is_err());
    }
}
