//! Direction sweep: one probe per angle in the reduced configuration, sinogram assembly and
//! inversion.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::{band_limited, chi_on_slice, demodulate, log_recover_ray_data, refocus, richardson, ExtractedAmplitude, TimeSliceMeasurement};
use crate::constants::{CHI_FLOOR_FRACTION, MAX_MISSING_FRACTION, MIN_POINTS_PER_WAVELENGTH};
use crate::error::{Error, Result};
use crate::fdtd::{default_dt, solve_semilinear, Formulation, SemilinearConfig, WaveState};
use crate::geoptics::{backward_ray_integral, AnsatzSpec};
use crate::grid::{Grid, Order};
use crate::minkowski::LightVector;
use crate::nullform::Interaction;
use crate::num::Real;
use crate::potential::{Potential, Rotated, Support};
use crate::profile::Profile;
use crate::raytransform::{
    centered_offsets, invert_xray_2d, uniform_angles, xray_reduce, InvertMethod, Pairing, Reconstruction, Sinogram, SinogramMeta,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MeasurementMode {
    /// `u = phi_V + 2h Re(A_{1,0} e^{i psi/h})` with the closed-form `A_{1,0}`.
    Synthetic,
    /// The semilinear equation solved by finite differences from `T0` to `T'`.
    Fdtd,
}

#[derive(Clone, Debug)]
pub struct RecoveryConfig<T> {
    pub mode: MeasurementMode,
    pub h: T,
    /// Also measure at `h/2` and combine with weights `(2, -1)`.
    pub richardson: bool,
    /// Propagate the extracted envelope back to the plane through the origin before taking
    /// logarithms. Wave data diffract after leaving `supp q`; the closed-form synthetic
    /// amplitude does not, so this is off for synthetic measurements.
    pub refocus: bool,
    pub n_angles: usize,
    pub points_per_wavelength: T,
    pub chi: Profile<T>,
    pub phi: Profile<T>,
    pub a: T,
    pub b: T,
    pub t0: T,
    pub t_meas: T,
    /// Offsets `|s| <= offset_extent` enter the sinogram.
    pub offset_extent: T,
    /// Length of the smooth end taper used by demodulation.
    pub taper: T,
    /// Room around the scattered field in the finite-difference box.
    pub fdtd_margin: T,
    pub fdtd_order: Order,
    pub correctors: usize,
    pub recon_half_width: T,
    pub recon_n: usize,
    pub method: InvertMethod,
    pub reg: T,
    pub chi_floor: T,
    pub max_missing: T,
}

impl<T: Real> RecoveryConfig<T> {
    /// A configuration for a potential supported in the disk of radius `0.5` about the origin.
    pub fn standard(mode: MeasurementMode, h: T) -> Self {
        RecoveryConfig {
            mode,
            h,
            richardson: false,
            refocus: mode == MeasurementMode::Fdtd,
            n_angles: 180,
            points_per_wavelength: T::lit(MIN_POINTS_PER_WAVELENGTH),
            chi: Profile::cosine(T::zero(), T::lit(0.2), 2),
            phi: Profile::ramp(T::zero(), T::lit(1.2), T::lit(0.3)),
            a: T::one(),
            b: T::lit(0.5),
            t0: T::lit(-0.72),
            t_meas: T::lit(0.72),
            offset_extent: T::lit(0.75),
            taper: T::lit(0.2),
            fdtd_margin: T::lit(0.4),
            fdtd_order: Order::Fourth,
            correctors: 2,
            recon_half_width: T::lit(0.9),
            recon_n: 64,
            method: InvertMethod::Fbp,
            reg: T::lit(1e-4),
            chi_floor: T::lit(CHI_FLOOR_FRACTION),
            max_missing: T::lit(MAX_MISSING_FRACTION),
        }
    }

    /// Offset of the packet centre along `omega` at `T'`.
    pub fn tau0(&self) -> T {
        self.chi_center() - self.t_meas
    }

    fn chi_center(&self) -> T {
        let (lo, hi) = self.chi.support().expect("validated");
        (lo + hi) * T::lit(0.5)
    }

    fn chi_radius(&self) -> T {
        let (lo, hi) = self.chi.support().expect("validated");
        (hi - lo) * T::lit(0.5)
    }

    fn h_values(&self) -> Vec<T> {
        if self.richardson {
            vec![self.h, self.h * T::lit(0.5)]
        } else {
            vec![self.h]
        }
    }

    fn dx(&self) -> T {
        let hmin = *self.h_values().last().expect("nonempty");
        T::TAU() * hmin / self.points_per_wavelength
    }

    /// Checks the reduced configuration and the timing of the packet against `supp q`;
    /// returns the pairing weight `kappa` of the reduced integrand.
    pub fn validate(&self, q: &dyn Potential<T>) -> Result<T> {
        let cfg = |field: &str, message: String| Err(Error::Config { field: field.into(), message });
        if !(self.h > T::zero()) {
            return cfg("h", "must be positive".into());
        }
        if self.points_per_wavelength.to_f64_lossy() < MIN_POINTS_PER_WAVELENGTH {
            return cfg("points_per_wavelength", format!("need at least {MIN_POINTS_PER_WAVELENGTH}"));
        }
        if self.n_angles == 0 {
            return cfg("n_angles", "need at least one direction".into());
        }
        self.chi.validate()?;
        if self.chi.support().is_none() {
            return cfg("chi", "chi must be compactly supported".into());
        }
        let reach = match q.support() {
            Support::Empty => T::zero(),
            Support::SpatialCylinder { center, radius } => (center[0] * center[0] + center[1] * center[1]).sqrt() + radius,
            Support::SpacetimeBall { .. } => return cfg("potential", "recovery needs a time-independent q".into()),
        };
        if self.offset_extent < reach {
            return cfg("offset_extent", format!("offsets up to {} miss supp q, which reaches {reach}", self.offset_extent));
        }
        if self.tau0() + self.chi_radius() >= -reach {
            return cfg("window.t_meas", "at T' the packet has not fully crossed supp q".into());
        }
        if self.mode == MeasurementMode::Fdtd && self.chi_center() - self.t0 - self.chi_radius() <= reach {
            return cfg("window.t0", "at T0 the packet already meets supp q".into());
        }
        let red = xray_reduce(q, &self.phi, -1, self.t_meas, self.tau0(), Pairing::Minkowski)?;
        Ok(red.kappa)
    }

    /// Frame-coordinate slice grid: the packet strip at `T'` plus tapers along `e1`, offsets along `e2`.
    pub fn slice_grid(&self) -> Grid<T> {
        let dx = self.dx();
        let half = self.chi_radius() + self.taper + T::lit(2.0) * dx;
        let n0 = (T::lit(2.0) * half / dx).ceil().to_usize().unwrap_or(0) + 1;
        let n1 = 2 * (self.offset_extent / dx).ceil().to_usize().unwrap_or(0) + 1;
        let lo1 = -T::from_usize_lossy(n1 / 2) * dx;
        Grid::new_2d([self.tau0() - half, lo1], dx, [n0, n1])
    }

    pub fn offsets(&self) -> Vec<T> {
        let g = self.slice_grid();
        centered_offsets(g.n[1], g.dx)
    }

    fn probe(&self) -> (LightVector<T>, LightVector<T>) {
        let (z, o) = (T::zero(), T::one());
        (LightVector::new(-1, &[z, o]).expect("unit"), LightVector::new(-1, &[o, z]).expect("unit"))
    }

    fn ansatz(&self, h: T) -> AnsatzSpec<T> {
        let (v, w) = self.probe();
        AnsatzSpec {
            order: 0,
            h_list: vec![h],
            t0: self.t0,
            t_meas: self.t_meas,
            t1: self.t_meas + T::one(),
            dx: self.dx(),
            v,
            w,
            phi: self.phi.clone(),
            chi: self.chi.clone(),
            a: self.a,
            b: self.b,
            bbox: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub mode: MeasurementMode,
    pub h: f64,
    pub richardson: bool,
    pub refocus: bool,
    pub n_angles: usize,
    pub angles_used: usize,
    pub dropped_angles: Vec<usize>,
    pub kappa: f64,
    /// Largest imaginary part of the logarithm over all used samples.
    pub max_imag: f64,
    pub max_fit_residual: f64,
    pub method: InvertMethod,
    pub rel_error: Option<f64>,
    pub warnings: Vec<String>,
}

/// One sinogram row with its diagnostics.
#[derive(Clone, Debug)]
pub struct AngleRow<T> {
    pub values: Vec<T>,
    pub valid: Vec<bool>,
    pub max_imag: f64,
    pub fit_residual: f64,
}

/// Time slices for the probe at `angle`, one per `h` (two with Richardson), in the rotated frame.
pub fn measure_slices<T: Real>(q: &dyn Potential<T>, cfg: &RecoveryConfig<T>, angle: T) -> Result<Vec<TimeSliceMeasurement<T>>> {
    let rot = Rotated::new(q, angle);
    let grid = cfg.slice_grid();
    let (v, w) = cfg.probe();
    cfg.h_values()
        .into_iter()
        .map(|h| {
            let u = match cfg.mode {
                MeasurementMode::Synthetic => synthetic_slice(&rot, cfg, &grid, h)?,
                MeasurementMode::Fdtd => fdtd_slice(&rot, cfg, &grid, h)?,
            };
            Ok(TimeSliceMeasurement {
                grid: grid.clone(),
                h,
                t_meas: cfg.t_meas,
                v,
                w,
                a: cfg.a,
                b: cfg.b,
                u,
                angle,
                phi: Some(cfg.phi.clone()),
            })
        })
        .collect()
}

fn synthetic_slice<T: Real>(q: &dyn Potential<T>, cfg: &RecoveryConfig<T>, grid: &Grid<T>, h: T) -> Result<Vec<T>> {
    let spec = cfg.ansatz(h);
    let inter = Interaction::new(q, &spec.phi, spec.v, spec.w)?;
    let omega = spec.w.direction().to_vec();
    (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let x = grid.spacetime(cfg.t_meas, p);
            let phi = spec.phi.value(spec.v.dot_coords(&x));
            let inflow = spec.inflow(&x);
            if inflow == Complex::new(T::zero(), T::zero()) {
                return Ok(phi);
            }
            let a10 = inflow * backward_ray_integral(&inter, &omega, &x)?.exp();
            let e = Complex::from_polar(T::one(), spec.w.dot_coords(&x) / h);
            Ok(phi + T::lit(2.0) * h * (a10 * e).re)
        })
        .collect()
}

fn fdtd_slice<T: Real>(q: &dyn Potential<T>, cfg: &RecoveryConfig<T>, slice: &Grid<T>, h: T) -> Result<Vec<T>> {
    let spec = cfg.ansatz(h);
    let dx = slice.dx;
    let reach = match q.support() {
        Support::SpatialCylinder { center, radius } => (center[0] * center[0] + center[1] * center[1]).sqrt() + radius,
        _ => T::zero(),
    };
    let m = cfg.fdtd_margin;
    let cells = |len: T| (len / dx).ceil().to_usize().unwrap_or(0);
    // extend the slice grid by whole cells so its nodes are FDTD nodes
    let left = cells(m);
    let slice_hi0 = slice.lo[0] + T::from_usize_lossy(slice.n[0] - 1) * dx;
    let right = cells((reach + m - slice_hi0).max(m));
    let side = cells((reach + m + slice.lo[1]).max(m));
    let grid = Grid::new_2d(
        [slice.lo[0] - T::from_usize_lossy(left) * dx, slice.lo[1] - T::from_usize_lossy(side) * dx],
        dx,
        [slice.n[0] + left + right, slice.n[1] + 2 * side],
    );
    let span = cfg.t_meas - cfg.t0;
    let steps = (span / default_dt(&grid)).ceil().to_usize().unwrap_or(1).max(1);
    let dt = span / T::from_usize_lossy(steps);
    let init = WaveState::zero(grid.clone(), dt, cfg.t0)?;
    let inc = |x: &[T; 4]| spec.incident(h, x);
    let scfg = SemilinearConfig { order: cfg.fdtd_order, correctors: cfg.correctors, ..Default::default() };
    let (st, _) = solve_semilinear(q, init, Formulation::Scattered(&inc), cfg.t_meas, &[], &scfg)?;
    let mut out = Vec::with_capacity(slice.len());
    for j in 0..slice.n[1] {
        for i in 0..slice.n[0] {
            let p = grid.idx(i + left, j + side);
            out.push(st.u[p] + inc(&grid.spacetime(st.t, p)).0);
        }
    }
    Ok(out)
}

/// Demodulates the slices of one probe, optionally refocuses, takes logarithms and averages
/// each ray over the packet strip.
pub fn sinogram_row<T: Real>(slices: &[TimeSliceMeasurement<T>], cfg: &RecoveryConfig<T>) -> Result<AngleRow<T>> {
    let hmax = slices.iter().fold(T::zero(), |m, s| m.max(s.h));
    let cutoff = T::lit(0.5) / hmax;
    let extract = |us: &[TimeSliceMeasurement<T>]| -> Result<ExtractedAmplitude<T>> {
        let amps = us.iter().map(|s| demodulate(s, cfg.taper, Some(cutoff))).collect::<Result<Vec<_>>>()?;
        match amps.as_slice() {
            [a] => Ok(a.clone()),
            [c, f] => richardson(c, f),
            _ => Err(Error::InvalidInput(format!("expected one or two slices per probe, got {}", us.len()))),
        }
    };
    let free: Vec<TimeSliceMeasurement<T>> = slices.iter().map(|s| free_slice(s, cfg)).collect();
    let mut amp = extract(slices)?;
    let mut amp_free = extract(&free)?;
    let s = &slices[0];
    let chi = band_limited(&s.grid, &chi_on_slice(&s.grid, &cfg.chi, &s.w, s.t_meas), &s.w, cutoff)?;
    let probe = Complex::new(s.a, -s.b) * T::lit(0.5);
    let reference: Vec<Complex<T>> = chi.iter().map(|c| probe * *c).collect();
    if cfg.refocus {
        amp = refocus(&amp, &s.w, -cfg.tau0(), &reference)?;
        amp_free = refocus(&amp_free, &s.w, -cfg.tau0(), &reference)?;
    }
    calibrate(&mut amp, &amp_free, &reference);
    let samples = log_recover_ray_data(&amp, &chi, s.a, s.b, cfg.chi_floor)?;
    let (values, valid) = samples.collapse(&s.grid, 0);
    Ok(AngleRow { values, valid, max_imag: samples.max_imag, fit_residual: amp.fit_residual })
}

/// The slice the probe would produce with `q = 0`: background plus the incident packet.
fn free_slice<T: Real>(s: &TimeSliceMeasurement<T>, cfg: &RecoveryConfig<T>) -> TimeSliceMeasurement<T> {
    let spec = cfg.ansatz(s.h);
    let u = (0..s.grid.len()).map(|p| spec.incident(s.h, &s.grid.spacetime(s.t_meas, p)).0).collect();
    TimeSliceMeasurement { u, ..s.clone() }
}

/// Replaces `amp` by `reference * amp / free`, so the response of the extraction to the free
/// packet divides out. Nodes where the free response vanishes become untrusted.
fn calibrate<T: Real>(amp: &mut ExtractedAmplitude<T>, free: &ExtractedAmplitude<T>, reference: &[Complex<T>]) {
    for p in 0..amp.values.len() {
        let f = free.values[p];
        if f.norm() == T::zero() {
            amp.trusted[p] = false;
            continue;
        }
        amp.values[p] = reference[p] * (amp.values[p] / f);
        amp.trusted[p] &= free.trusted[p];
    }
}

/// Sinogram assembly, inversion on the reconstruction grid and division by `kappa`.
fn assemble_and_invert<T: Real>(
    rows: Vec<AngleRow<T>>,
    angles: Vec<T>,
    cfg: &RecoveryConfig<T>,
    kappa: T,
    truth: Option<&dyn Fn([T; 2]) -> T>,
) -> Result<(Reconstruction<T>, RecoveryReport, Sinogram<T>)> {
    let meta = SinogramMeta {
        v_sign: -1,
        profile: format!("{:?}", cfg.phi),
        pairing: Pairing::Minkowski,
        t_meas: cfg.t_meas.to_f64_lossy(),
        tau0: cfg.tau0().to_f64_lossy(),
    };
    let offsets = cfg.offsets();
    let n_angles = angles.len();
    let mut sino = Sinogram::zeros(offsets, angles, meta);
    let n = sino.offsets.len();
    let mut keep = vec![true; n_angles];
    let mut warnings = Vec::new();
    let (mut max_imag, mut max_fit) = (0.0f64, 0.0f64);
    for (a, row) in rows.iter().enumerate() {
        if row.values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.values.len() });
        }
        let missing = row.valid.iter().filter(|v| !**v).count();
        if T::from_usize_lossy(missing) > cfg.max_missing * T::from_usize_lossy(n) {
            keep[a] = false;
            warnings.push(format!("angle {a}: {missing} of {n} samples missing; dropped"));
            continue;
        }
        sino.data[a * n..(a + 1) * n].copy_from_slice(&row.values);
        sino.valid[a * n..(a + 1) * n].copy_from_slice(&row.valid);
        max_imag = max_imag.max(row.max_imag);
        max_fit = max_fit.max(row.fit_residual);
    }
    let sino = sino.select_rows(&keep);
    let used = sino.angles.len();
    let dropped: Vec<usize> = keep.iter().enumerate().filter(|(_, k)| !**k).map(|(a, _)| a).collect();
    let rh = cfg.recon_half_width;
    let rdx = T::lit(2.0) * rh / T::from_usize_lossy(cfg.recon_n.max(2) - 1);
    let grid = Grid::new_2d([-rh, -rh], rdx, [cfg.recon_n, cfg.recon_n]);
    let mut rec = if used == 0 {
        warnings.push("every angle was dropped; nothing to invert".into());
        Reconstruction {
            grid: grid.clone(),
            values: vec![T::zero(); grid.len()],
            method: cfg.method,
            reg: cfg.reg.to_f64_lossy(),
            iterations: 0,
            rel_error: None,
            warnings: vec![],
        }
    } else {
        invert_xray_2d(&sino, &grid, cfg.method, cfg.reg)?
    };
    for v in &mut rec.values {
        *v /= kappa;
    }
    warnings.extend(rec.warnings.iter().cloned());
    rec.warnings = warnings.clone();
    if let Some(t) = truth {
        rec.compare_with(t);
    }
    let report = RecoveryReport {
        mode: cfg.mode,
        h: cfg.h.to_f64_lossy(),
        richardson: cfg.richardson,
        refocus: cfg.refocus,
        n_angles,
        angles_used: used,
        dropped_angles: dropped,
        kappa: kappa.to_f64_lossy(),
        max_imag,
        max_fit_residual: max_fit,
        method: rec.method,
        rel_error: rec.rel_error,
        warnings,
    };
    Ok((rec, report, sino))
}

/// Inverts pre-recorded slices, one group (one or two `h`) per angle.
pub fn recover_from_measurements<T: Real>(
    q_support_check: &dyn Potential<T>,
    measurements: &[Vec<TimeSliceMeasurement<T>>],
    cfg: &RecoveryConfig<T>,
    truth: Option<&dyn Fn([T; 2]) -> T>,
) -> Result<(Reconstruction<T>, RecoveryReport, Sinogram<T>)> {
    let kappa = cfg.validate(q_support_check)?;
    let angles: Vec<T> = measurements.iter().map(|m| m.first().map(|s| s.angle).unwrap_or(T::zero())).collect();
    let rows = measurements.par_iter().map(|m| sinogram_row(m, cfg)).collect::<Result<Vec<_>>>()?;
    assemble_and_invert(rows, angles, cfg, kappa, truth)
}

/// Measures every probe of the sweep, recovers the sinogram and inverts it; slices are
/// discarded as soon as their row is extracted.
pub fn recover_potential_2d<T: Real>(
    q: &dyn Potential<T>,
    cfg: &RecoveryConfig<T>,
    truth: Option<&dyn Fn([T; 2]) -> T>,
) -> Result<(Reconstruction<T>, RecoveryReport, Sinogram<T>)> {
    let kappa = cfg.validate(q)?;
    let angles: Vec<T> = uniform_angles(cfg.n_angles);
    let rows = angles.par_iter().map(|&a| sinogram_row(&measure_slices(q, cfg, a)?, cfg)).collect::<Result<Vec<_>>>()?;
    assemble_and_invert(rows, angles, cfg, kappa, truth)
}
