//! Light-ray transform of `F = q phi_V' V~`, its reduction to the planar X-ray transform and
//! tomographic inversion.
//!
//! Parallel-beam geometry in the plane: for angle `a` the rays run along `omega = (cos a, sin a)`
//! and are labelled by the offset `s` along `theta = (-sin a, cos a)`. The sample point of ray
//! `(s, a)` at the measurement time `T'` is `x' = s theta + tau0 omega`.

mod invert;

pub use invert::{backproject, cgls, invert_xray_2d, ramp_filter, InvertMethod, RayOperator, Reconstruction};

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::RAY_QUADRATURE_TOL;
use crate::error::{Error, Result};
use crate::geoptics::ray_integral;
use crate::minkowski::LightVector;
use crate::nullform::Interaction;
use crate::num::Real;
use crate::potential::{Potential, Support};
use crate::profile::Profile;
use crate::quadrature::adaptive_simpson;

/// How `F` is paired with `W~ = (1, omega)` inside the ray integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Pairing {
    /// `<F, W~>_M`: the coefficient that appears in the transport equation.
    Minkowski,
    /// Plain dot product of components.
    Euclidean,
}

/// Uniform angles `k pi / n`, `k < n`.
pub fn uniform_angles<T: Real>(n: usize) -> Vec<T> {
    (0..n).map(|k| T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(n)).collect()
}

/// `n` offsets with spacing `ds`, symmetric about zero.
pub fn centered_offsets<T: Real>(n: usize, ds: T) -> Vec<T> {
    let c = T::from_usize_lossy(n.saturating_sub(1)) * T::lit(0.5);
    (0..n).map(|i| (T::from_usize_lossy(i) - c) * ds).collect()
}

/// `(omega, theta)` of angle `a`.
pub fn frame<T: Real>(a: T) -> ([T; 2], [T; 2]) {
    let (s, c) = a.sin_cos();
    ([c, s], [-s, c])
}

/// The probing pair of the reduced configuration: `V = (v_sign, theta)`, `W = (-1, omega)`.
pub fn probe_pair<T: Real>(a: T, v_sign: i8) -> (LightVector<T>, LightVector<T>) {
    let (omega, theta) = frame(a);
    (LightVector::new(v_sign, &theta).expect("unit"), LightVector::new(-1, &omega).expect("unit"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SinogramMeta {
    pub v_sign: i8,
    pub profile: String,
    pub pairing: Pairing,
    pub t_meas: f64,
    pub tau0: f64,
}

/// Samples indexed by angle (rows) and offset (columns); `valid` marks samples that exist.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sinogram<T> {
    pub offsets: Vec<T>,
    pub angles: Vec<T>,
    pub data: Vec<T>,
    pub valid: Vec<bool>,
    pub meta: SinogramMeta,
}

impl<T: Real> Sinogram<T> {
    pub fn zeros(offsets: Vec<T>, angles: Vec<T>, meta: SinogramMeta) -> Self {
        let n = offsets.len() * angles.len();
        Sinogram { offsets, angles, data: vec![T::zero(); n], valid: vec![true; n], meta }
    }

    #[inline]
    pub fn idx(&self, a: usize, s: usize) -> usize {
        a * self.offsets.len() + s
    }

    pub fn row(&self, a: usize) -> &[T] {
        let n = self.offsets.len();
        &self.data[a * n..(a + 1) * n]
    }

    pub fn spacing(&self) -> T {
        if self.offsets.len() < 2 {
            T::one()
        } else {
            self.offsets[1] - self.offsets[0]
        }
    }

    pub fn scale(&mut self, c: T) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    /// Keeps the angle rows selected by `keep`.
    pub fn select_rows(&self, keep: &[bool]) -> Self {
        let n = self.offsets.len();
        let mut out = Sinogram { offsets: self.offsets.clone(), angles: vec![], data: vec![], valid: vec![], meta: self.meta.clone() };
        for (a, &k) in keep.iter().enumerate() {
            if k {
                out.angles.push(self.angles[a]);
                out.data.extend_from_slice(&self.data[a * n..(a + 1) * n]);
                out.valid.extend_from_slice(&self.valid[a * n..(a + 1) * n]);
            }
        }
        out
    }
}

/// `L(s, a) = int <F(T' + nu, x' - nu omega), W~> d nu` over the whole line, for every ray.
pub fn lightray_forward<T: Real>(
    q: &dyn Potential<T>,
    phi: &Profile<T>,
    v_sign: i8,
    offsets: &[T],
    angles: &[T],
    t_meas: T,
    tau0: T,
    pairing: Pairing,
) -> Result<Sinogram<T>> {
    let meta = SinogramMeta { v_sign, profile: format!("{phi:?}"), pairing, t_meas: t_meas.to_f64_lossy(), tau0: tau0.to_f64_lossy() };
    let mut sino = Sinogram::zeros(offsets.to_vec(), angles.to_vec(), meta);
    let rows: Vec<Result<Vec<T>>> = angles
        .par_iter()
        .map(|&a| {
            let (v, w) = probe_pair(a, v_sign);
            let mut inter = Interaction::new(q, phi, v, w)?;
            if pairing == Pairing::Euclidean {
                let (vt, wt) = (v.twin_covector(), w.twin_covector());
                inter.pair = (0..4).map(|j| vt[j] * wt[j]).sum();
            }
            let (omega, theta) = frame(a);
            offsets
                .iter()
                .map(|&s| {
                    let x = [t_meas, s * theta[0] + tau0 * omega[0], s * theta[1] + tau0 * omega[1], T::zero()];
                    ray_integral(&inter, &omega, &x, T::neg_infinity(), T::infinity())
                })
                .collect()
        })
        .collect();
    for (a, r) in rows.into_iter().enumerate() {
        let r = r?;
        let n = offsets.len();
        sino.data[a * n..(a + 1) * n].copy_from_slice(&r);
    }
    Ok(sino)
}

/// The planar integrand `kappa q(x')` whose X-ray transform equals the light-ray transform.
///
/// The reduction is exact for a time- and u-independent `q`, `V = (-1, theta)` with
/// `theta` perpendicular to `omega`, and a ramp `phi` whose unit-slope plateau covers every
/// value `<x, V>_M` met on `supp q` along the rays. Along the ray through `x'` at `T'`,
/// `<x, V>_M = T' + tau0 + (theta - omega).y` at the point `y`, so the plateau must contain
/// `T' + tau0 +- sqrt(2) (R + |c|)` for a support disk of radius `R` centred at `c`. Then
/// `phi' = 1`, `<V~, W~>_M = -1`, and `kappa = -1` (or `+1` with the Euclidean pairing).
pub struct ReducedIntegrand<'a, T> {
    pub q: &'a dyn Potential<T>,
    pub kappa: T,
}

impl<'a, T: Real> ReducedIntegrand<'a, T> {
    pub fn eval(&self, x: [T; 2]) -> T {
        self.kappa * self.q.eval(&[T::zero(), x[0], x[1], T::zero()], T::zero())
    }
}

pub fn xray_reduce<'a, T: Real>(
    q: &'a dyn Potential<T>,
    phi: &Profile<T>,
    v_sign: i8,
    t_meas: T,
    tau0: T,
    pairing: Pairing,
) -> Result<ReducedIntegrand<'a, T>> {
    if !q.time_independent() {
        return Err(Error::Unreduced("q depends on time".into()));
    }
    if !q.u_independent() {
        return Err(Error::Unreduced("q depends on u; the ray weight would vary with phi along the ray".into()));
    }
    if v_sign != -1 {
        return Err(Error::Unreduced("the reduced configuration uses V = (-1, theta)".into()));
    }
    let kappa = match pairing {
        Pairing::Minkowski => -T::one(),
        Pairing::Euclidean => T::one(),
    };
    let (c, r) = match q.support() {
        Support::Empty => return Ok(ReducedIntegrand { q, kappa }),
        Support::SpatialCylinder { center, radius } => ((center[0] * center[0] + center[1] * center[1]).sqrt(), radius),
        Support::SpacetimeBall { .. } => return Err(Error::Unreduced("q has spacetime support".into())),
    };
    let Profile::Ramp { center, half_width, .. } = phi else {
        return Err(Error::Unreduced(format!("phi must be a ramp, got {phi:?}")));
    };
    let need = T::lit(std::f64::consts::SQRT_2) * (r + c);
    let mid = t_meas + tau0;
    if (*center - mid).abs() + need > *half_width {
        return Err(Error::Unreduced(format!(
            "ramp plateau [{}, {}] does not cover [{}, {}]",
            *center - *half_width,
            *center + *half_width,
            mid - need,
            mid + need
        )));
    }
    Ok(ReducedIntegrand { q, kappa })
}

/// Straight-line integrals `int g(s theta + t omega) dt` of a planar function supported in
/// the disk of radius `radius` about the origin.
pub fn xray_forward<T: Real>(g: &(dyn Fn([T; 2]) -> T + Sync), radius: T, offsets: &[T], angles: &[T]) -> Result<Vec<T>> {
    let rows: Vec<Result<Vec<T>>> = angles
        .par_iter()
        .map(|&a| {
            let (omega, theta) = frame(a);
            offsets
                .iter()
                .map(|&s| {
                    let h2 = radius * radius - s * s;
                    if h2 <= T::zero() {
                        return Ok(T::zero());
                    }
                    let half = h2.sqrt();
                    let f = |t: T| g([s * theta[0] + t * omega[0], s * theta[1] + t * omega[1]]);
                    adaptive_simpson(f, -half, half, T::lit(RAY_QUADRATURE_TOL), 8)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(offsets.len() * angles.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}
