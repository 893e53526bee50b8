//! Inverse pipeline: extract the order-`h` oscillatory coefficient from a time slice, take
//! logarithms to get light-ray data, and invert the planar X-ray transform.
//!
//! Demodulation filters along the carrier direction only, so `omega` must be a grid axis.
//! The sweep over directions works in rotated frames where `omega = e1`.

mod pipeline;

pub use pipeline::{
    measure_slices, recover_from_measurements, recover_potential_2d, sinogram_row, AngleRow, MeasurementMode, RecoveryConfig,
    RecoveryReport,
};

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::constants::MIN_POINTS_PER_WAVELENGTH;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::minkowski::LightVector;
use crate::num::Real;
use crate::profile::Profile;

/// `u(T', x')` on a space grid for one probe and one `h`.
#[derive(Clone, Debug)]
pub struct TimeSliceMeasurement<T> {
    pub grid: Grid<T>,
    pub h: T,
    pub t_meas: T,
    pub v: LightVector<T>,
    pub w: LightVector<T>,
    pub a: T,
    pub b: T,
    pub u: Vec<T>,
    /// Rotation of the frame the grid lives in; zero for physical coordinates.
    pub angle: T,
    /// Known background profile; `phi_V` is subtracted before demodulation when present.
    pub phi: Option<Profile<T>>,
}

/// `A_{1,0}(T', .)` estimated from a slice.
#[derive(Clone, Debug)]
pub struct ExtractedAmplitude<T> {
    pub grid: Grid<T>,
    pub h: T,
    pub values: Vec<Complex<T>>,
    /// Nodes outside the end tapers, where the estimate is meaningful.
    pub trusted: Vec<bool>,
    /// `|| u_osc - 2h Re(A e^{i psi/h}) || / || u_osc ||` over trusted nodes, `u_osc` being
    /// the slice with its low band removed.
    pub fit_residual: f64,
    /// Low-pass cutoff in radians per unit length.
    pub cutoff: T,
    pub richardson: bool,
}

/// Light-ray samples `Re log(2 A / (chi (A - iB)))` on the slice grid.
#[derive(Clone, Debug, Serialize)]
pub struct RaySamples<T> {
    pub values: Vec<T>,
    /// Imaginary part of the logarithm; zero for exact data since `F` is real.
    pub imag: Vec<T>,
    pub valid: Vec<bool>,
    pub chi: Vec<T>,
    pub max_imag: f64,
}

/// `(axis, sign)` with `omega = sign e_axis`.
pub fn carrier_axis<T: Real>(w: &LightVector<T>) -> Result<(usize, T)> {
    let d = w.direction();
    for (a, &c) in d.iter().enumerate() {
        if (c.abs() - T::one()).abs().to_f64_lossy() < 1e-12 {
            return Ok((a, c.signum()));
        }
    }
    Err(Error::InvalidInput(format!(
        "demodulation filters along omega, which must be a grid axis; got {:?}",
        d.iter().map(|c| c.to_f64_lossy()).collect::<Vec<_>>()
    )))
}

/// `chi_W(T', x')` at every node.
pub fn chi_on_slice<T: Real>(grid: &Grid<T>, chi: &Profile<T>, w: &LightVector<T>, t_meas: T) -> Vec<T> {
    (0..grid.len()).map(|p| chi.value(w.dot_coords(&grid.spacetime(t_meas, p)))).collect()
}

/// `chi` passed through the demodulation low-pass. Along a ray `A_{1,0}` is `chi` times a
/// constant, so dividing the extracted amplitude by this field cancels the band limit exactly.
pub fn band_limited<T: Real>(grid: &Grid<T>, f: &[T], w: &LightVector<T>, cutoff: T) -> Result<Vec<T>> {
    let (axis, _) = carrier_axis(w)?;
    let mut out = vec![T::zero(); f.len()];
    let mut planner = FftPlanner::new();
    for (start, stride, count) in lines(grid, axis) {
        let mut line: Vec<Complex<T>> = (0..count).map(|k| Complex::new(f[start + k * stride], T::zero())).collect();
        low_pass(&mut line, grid.dx, cutoff, &mut planner);
        for (k, c) in line.iter().enumerate() {
            out[start + k * stride] = c.re;
        }
    }
    Ok(out)
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, `C^inf`.
fn smooth_step<T: Real>(x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::one() {
        return T::one();
    }
    let a = (-T::one() / x).exp();
    let b = (-T::one() / (T::one() - x)).exp();
    a / (a + b)
}

/// Nodes along each line parallel to `axis`: `(start, stride, count)` per line.
fn lines<T: Real>(grid: &Grid<T>, axis: usize) -> Vec<(usize, usize, usize)> {
    let [n0, n1] = grid.n;
    if axis == 0 {
        (0..n1).map(|j| (j * n0, 1, n0)).collect()
    } else {
        (0..n0).map(|i| (i, n0, n1)).collect()
    }
}

/// Ideal low-pass `|k| < cutoff` (rad per unit length) of a line sampled with spacing `dx`.
fn low_pass<T: Real>(line: &mut Vec<Complex<T>>, dx: T, cutoff: T, planner: &mut FftPlanner<T>) {
    let n = line.len();
    let m = n.next_power_of_two().max(2);
    line.resize(m, Complex::new(T::zero(), T::zero()));
    planner.plan_fft_forward(m).process(line);
    let dk = T::TAU() / (T::from_usize_lossy(m) * dx);
    for (k, c) in line.iter_mut().enumerate() {
        let kk = T::from_usize_lossy(k.min(m - k)) * dk;
        if kk >= cutoff {
            *c = Complex::new(T::zero(), T::zero());
        }
    }
    planner.plan_fft_inverse(m).process(line);
    let s = T::one() / T::from_usize_lossy(m);
    line.truncate(n);
    for c in line.iter_mut() {
        *c *= s;
    }
}

/// Subtracts the known background `phi_V` if the slice carries it, multiplies by `e^{-i psi/h}`, `psi = <(T', x'), W>_M`, keeps wavenumbers below
/// half the carrier along `omega` (or below `cutoff` when given) and divides by `h`. Both ends of every line are tapered to
/// zero over `taper` length units with a smooth step, so the periodic transform sees no jump.
pub fn demodulate<T: Real>(slice: &TimeSliceMeasurement<T>, taper: T, cutoff: Option<T>) -> Result<ExtractedAmplitude<T>> {
    let g = &slice.grid;
    let h = slice.h;
    if slice.u.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: g.len(), got: slice.u.len() });
    }
    let ppw = (T::TAU() * h / g.dx).to_f64_lossy();
    if ppw < MIN_POINTS_PER_WAVELENGTH {
        return Err(Error::InvalidInput(format!("carrier unresolved: {ppw:.2} points per wavelength, need {MIN_POINTS_PER_WAVELENGTH}")));
    }
    let (axis, _) = carrier_axis(&slice.w)?;
    let cutoff = cutoff.unwrap_or(T::lit(0.5) / h);
    if cutoff > T::lit(0.5) / h {
        return Err(Error::InvalidInput("cutoff must not exceed half the carrier".into()));
    }
    let tw = (taper / g.dx).max(T::one());
    let z = Complex::new(T::zero(), T::zero());
    let mut values = vec![z; g.len()];
    let mut trusted = vec![false; g.len()];
    let (mut num, mut den) = (0.0f64, 0.0f64);
    let mut planner = FftPlanner::new();
    for (start, stride, count) in lines(g, axis) {
        let last = T::from_usize_lossy(count - 1);
        let win: Vec<T> = (0..count)
            .map(|k| {
                let kk = T::from_usize_lossy(k);
                smooth_step(kk / tw) * smooth_step((last - kk) / tw)
            })
            .collect();
        let phase: Vec<Complex<T>> = (0..count)
            .map(|k| {
                let psi = slice.w.dot_coords(&g.spacetime(slice.t_meas, start + k * stride));
                Complex::from_polar(T::one(), psi / h)
            })
            .collect();
        let raw: Vec<T> = (0..count)
            .map(|k| {
                let p = start + k * stride;
                let bg = match &slice.phi {
                    Some(phi) => phi.value(slice.v.dot_coords(&g.spacetime(slice.t_meas, p))),
                    None => T::zero(),
                };
                (slice.u[p] - bg) * win[k]
            })
            .collect();
        let mut demod: Vec<Complex<T>> = raw.iter().zip(&phase).map(|(&u, e)| e.conj() * u).collect();
        low_pass(&mut demod, g.dx, cutoff, &mut planner);
        let mut band: Vec<Complex<T>> = raw.iter().map(|&u| Complex::new(u, T::zero())).collect();
        low_pass(&mut band, g.dx, cutoff, &mut planner);
        for k in 0..count {
            let p = start + k * stride;
            let amp = demod[k] / h;
            values[p] = amp;
            trusted[p] = win[k] == T::one();
            if trusted[p] {
                let osc = raw[k] - band[k].re;
                let fit = T::lit(2.0) * h * (amp * phase[k]).re;
                num += (osc - fit).to_f64_lossy().powi(2);
                den += osc.to_f64_lossy().powi(2);
            }
        }
    }
    let fit_residual = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    Ok(ExtractedAmplitude { grid: g.clone(), h, values, trusted, fit_residual, cutoff, richardson: false })
}

/// `2 A(h/2) - A(h)`: cancels the first-order term of the expansion in `h`. Both amplitudes
/// must come from the same cutoff, that of the coarse `h`.
pub fn richardson<T: Real>(coarse: &ExtractedAmplitude<T>, fine: &ExtractedAmplitude<T>) -> Result<ExtractedAmplitude<T>> {
    if coarse.grid != fine.grid {
        return Err(Error::InvalidInput("Richardson step needs both amplitudes on one grid".into()));
    }
    let ratio = (coarse.h / fine.h).to_f64_lossy();
    if (ratio - 2.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("Richardson step needs h and h/2, got ratio {ratio}")));
    }
    if coarse.cutoff != fine.cutoff {
        return Err(Error::InvalidInput("Richardson step needs a common cutoff".into()));
    }
    let two = T::lit(2.0);
    Ok(ExtractedAmplitude {
        grid: fine.grid.clone(),
        h: fine.h,
        values: fine.values.iter().zip(&coarse.values).map(|(f, c)| *f * two - *c).collect(),
        trusted: fine.trusted.iter().zip(&coarse.trusted).map(|(a, b)| *a && *b).collect(),
        fit_residual: fine.fit_residual.max(coarse.fit_residual),
        cutoff: fine.cutoff,
        richardson: true,
    })
}

/// `log(2 amp / (chi (A - iB)))` where `|chi| >= floor_fraction * max |chi|` and the
/// amplitude is trusted; every other node is marked missing with value zero.
pub fn log_recover_ray_data<T: Real>(amp: &ExtractedAmplitude<T>, chi: &[T], a: T, b: T, floor_fraction: T) -> Result<RaySamples<T>> {
    if chi.len() != amp.values.len() {
        return Err(Error::DimensionMismatch { expected: amp.values.len(), got: chi.len() });
    }
    let probe = Complex::new(a, -b);
    if probe.norm() == T::zero() {
        return Err(Error::InvalidInput("probe amplitude A - iB is zero".into()));
    }
    let cmax = chi.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let floor = floor_fraction * cmax;
    let n = chi.len();
    let mut out =
        RaySamples { values: vec![T::zero(); n], imag: vec![T::zero(); n], valid: vec![false; n], chi: chi.to_vec(), max_imag: 0.0 };
    if cmax == T::zero() {
        return Ok(out);
    }
    for p in 0..n {
        if !amp.trusted[p] || chi[p].abs() < floor || amp.values[p].norm() == T::zero() {
            continue;
        }
        let l = (amp.values[p] * T::lit(2.0) / (probe * chi[p])).ln();
        out.values[p] = l.re;
        out.imag[p] = l.im;
        out.valid[p] = true;
        out.max_imag = out.max_imag.max(l.im.abs().to_f64_lossy());
    }
    Ok(out)
}

impl<T: Real> RaySamples<T> {
    /// Collapses lines parallel to `axis` (the ray direction) to one sample each, the
    /// `chi^2`-weighted mean of the valid nodes. Lines with no valid node are missing.
    pub fn collapse(&self, grid: &Grid<T>, axis: usize) -> (Vec<T>, Vec<bool>) {
        let ls = lines(grid, axis);
        let mut vals = Vec::with_capacity(ls.len());
        let mut ok = Vec::with_capacity(ls.len());
        for (start, stride, count) in ls {
            let (mut s, mut w) = (T::zero(), T::zero());
            for k in 0..count {
                let p = start + k * stride;
                if self.valid[p] {
                    let c2 = self.chi[p] * self.chi[p];
                    s += self.values[p] * c2;
                    w += c2;
                }
            }
            ok.push(w > T::zero());
            vals.push(if w > T::zero() { s / w } else { T::zero() });
        }
        (vals, ok)
    }
}

/// Propagates the packet envelope back over `distance` through free space, undoing the
/// diffraction accumulated after the packet left the scatterer while keeping the envelope in
/// place. Each baseband component `kappa` of the carrier `e1 / h` picks up
/// `exp(-i distance (|e1/h + kappa| - 1/h - kappa_1))`, the exact one-way phase of the free wave
/// equation minus the pure translation. Only the deviation from `reference`, the incident
/// envelope, is propagated; the incident envelope does not diffract.
pub fn refocus<T: Real>(
    amp: &ExtractedAmplitude<T>,
    w: &LightVector<T>,
    distance: T,
    reference: &[Complex<T>],
) -> Result<ExtractedAmplitude<T>> {
    let g = &amp.grid;
    if g.dim != 2 {
        return Err(Error::InvalidInput("refocusing needs a planar slice".into()));
    }
    if reference.len() != amp.values.len() {
        return Err(Error::DimensionMismatch { expected: amp.values.len(), got: reference.len() });
    }
    let (axis, sign) = carrier_axis(w)?;
    let [n0, n1] = g.n;
    let (m0, m1) = (n0.next_power_of_two(), n1.next_power_of_two());
    let z = Complex::new(T::zero(), T::zero());
    let mut buf = vec![z; m0 * m1];
    for j in 0..n1 {
        for i in 0..n0 {
            let p = g.idx(i, j);
            buf[j * m0 + i] = amp.values[p] - reference[p];
        }
    }
    let mut planner = FftPlanner::new();
    fft2(&mut buf, m0, m1, &mut planner, false);
    let freq = |k: usize, m: usize| {
        let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        T::lit(kk) * T::TAU() / (T::from_usize_lossy(m) * g.dx)
    };
    let carrier = sign / amp.h;
    for j in 0..m1 {
        for i in 0..m0 {
            let (k0, k1) = (freq(i, m0), freq(j, m1));
            let (along, across) = if axis == 0 { (k0, k1) } else { (k1, k0) };
            let kz = carrier + along;
            let phase = (kz * kz + across * across).sqrt() - kz.abs();
            buf[j * m0 + i] *= Complex::from_polar(T::one(), -distance * phase);
        }
    }
    fft2(&mut buf, m0, m1, &mut planner, true);
    let scale = T::one() / T::from_usize_lossy(m0 * m1);
    let mut out = amp.clone();
    for j in 0..n1 {
        for i in 0..n0 {
            let p = g.idx(i, j);
            out.values[p] = reference[p] + buf[j * m0 + i] * scale;
        }
    }
    Ok(out)
}

fn fft2<T: Real>(buf: &mut [Complex<T>], m0: usize, m1: usize, planner: &mut FftPlanner<T>, inverse: bool) {
    let (p0, p1) = if inverse {
        (planner.plan_fft_inverse(m0), planner.plan_fft_inverse(m1))
    } else {
        (planner.plan_fft_forward(m0), planner.plan_fft_forward(m1))
    };
    for row in buf.chunks_mut(m0) {
        p0.process(row);
    }
    let mut col = vec![Complex::new(T::zero(), T::zero()); m1];
    for i in 0..m0 {
        for j in 0..m1 {
            col[j] = buf[j * m0 + i];
        }
        p1.process(&mut col);
        for j in 0..m1 {
            buf[j * m0 + i] = col[j];
        }
    }
}
