mod common;

use common::{phantom, resolved_dx, spec_1d, H_LIST};
use nullform_core::geoptics::{a10_closed_form_levels, assemble_un, build_hierarchy, SpacetimeGrid};
use nullform_core::grid::Grid;
use nullform_core::minkowski::LightVector;
use nullform_core::num::loglog_slope;
use nullform_core::potential::{catalog, Potential};
use nullform_core::profile::Profile;
use nullform_core::raytransform::{lightray_forward, Pairing};
use nullform_core::recovery::*;
use num_complex::Complex;

type C = Complex<f64>;

const TAPER: f64 = 0.2;

fn slice_grid(h: f64) -> Grid<f64> {
    Grid::covering(1, [-3.2, 0.0], [3.2, 0.0], resolved_dx(h, 16.0)).unwrap()
}

fn a10_at(spec: &nullform_core::geoptics::AnsatzSpec<f64>, q: &dyn Potential<f64>, grid: &Grid<f64>) -> Vec<C> {
    let sg = SpacetimeGrid { space: grid.clone(), t0: spec.t_meas, dt: 1.0, nt: 1 };
    a10_closed_form_levels(spec, q, &sg, &[0]).unwrap().remove(0)
}

fn slice(spec: &nullform_core::geoptics::AnsatzSpec<f64>, h: f64, grid: &Grid<f64>, u: Vec<f64>) -> TimeSliceMeasurement<f64> {
    TimeSliceMeasurement {
        grid: grid.clone(),
        h,
        t_meas: spec.t_meas,
        v: spec.v,
        w: spec.w,
        a: spec.a,
        b: spec.b,
        u,
        angle: 0.0,
        phi: Some(spec.phi.clone()),
    }
}

fn rel_err_trusted(amp: &ExtractedAmplitude<f64>, truth: &[C]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for p in 0..truth.len() {
        if amp.trusted[p] {
            num += (amp.values[p] - truth[p]).norm_sqr();
            den += truth[p].norm_sqr();
        }
    }
    (num / den).sqrt()
}

#[test]
fn demodulating_the_ansatz_recovers_a10_at_first_order() {
    let q = catalog("bump_linear_u", 1.0, 0.5, [0.0; 3]).unwrap();
    let spec = spec_1d(1, 0.01);
    let table = build_hierarchy(&spec, q.as_ref()).unwrap();
    let mut errs = vec![];
    let mut rich = vec![];
    for &h in &H_LIST {
        let g = slice_grid(h / 2.0);
        let truth = a10_at(&spec, q.as_ref(), &g);
        let coarse = demodulate(&slice(&spec, h, &g, assemble_un(&table, h, spec.t_meas, &g)), TAPER, None).unwrap();
        let fine_slice = slice(&spec, h / 2.0, &g, assemble_un(&table, h / 2.0, spec.t_meas, &g));
        let fine = demodulate(&fine_slice, TAPER, Some(coarse.cutoff)).unwrap();
        errs.push(rel_err_trusted(&coarse, &truth));
        rich.push(rel_err_trusted(&richardson(&coarse, &fine).unwrap(), &truth));
    }
    let slope = loglog_slope(&H_LIST, &errs);
    let rslope = loglog_slope(&H_LIST, &rich);
    assert!(slope >= 0.75, "plain slope {slope}, errors {errs:?}");
    assert!(rslope >= 1.75, "Richardson slope {rslope}, errors {rich:?}");
    assert!(rich.iter().zip(&errs).all(|(r, e)| r < e));
}

#[test]
fn free_packet_recovers_the_inflow_envelope() {
    let spec = spec_1d(1, 0.01);
    let h = 1.0 / 64.0;
    let g = slice_grid(h);
    // with q = 0 the slice is the incident field itself
    let u = g.sample(spec.t_meas, |x| spec.incident(h, x).0);
    let amp = demodulate(&slice(&spec, h, &g, u), TAPER, None).unwrap();
    let chi_bl = band_limited(&g, &chi_on_slice(&g, &spec.chi, &spec.w, spec.t_meas), &spec.w, amp.cutoff).unwrap();
    let half = C::new(spec.a, -spec.b) * 0.5;
    // only the spectral tail of the conjugate harmonic leaks below the cutoff
    for p in 0..g.len() {
        if amp.trusted[p] {
            assert!((amp.values[p] - half * chi_bl[p]).norm() < 1e-8, "node {p}");
        }
    }
    let samples = log_recover_ray_data(&amp, &chi_bl, spec.a, spec.b, 0.1).unwrap();
    assert!(samples.valid.iter().any(|&v| v));
    for p in 0..g.len() {
        if samples.valid[p] {
            assert!(samples.values[p].abs() < 1e-6 && samples.imag[p].abs() < 1e-6);
        }
    }
}

#[test]
fn background_only_slice_has_no_amplitude() {
    let mut spec = spec_1d(0, 0.01);
    spec.a = 0.0;
    spec.b = 0.0;
    let h = 1.0 / 32.0;
    let g = slice_grid(h);
    let u = g.sample(spec.t_meas, |x| spec.phi.value(spec.v.dot_coords(x)));
    let amp = demodulate(&slice(&spec, h, &g, u), TAPER, None).unwrap();
    let worst = amp.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn unresolved_or_oblique_carriers_are_rejected() {
    let spec = spec_1d(0, 0.01);
    let h = 1.0 / 32.0;
    let coarse = Grid::covering(1, [-3.2, 0.0], [3.2, 0.0], resolved_dx(h, 8.0)).unwrap();
    let u = vec![0.0; coarse.len()];
    assert!(demodulate(&slice(&spec, h, &coarse, u), TAPER, None).is_err());

    let g2 = Grid::covering(2, [-1.0, -1.0], [1.0, 1.0], resolved_dx(h, 16.0)).unwrap();
    let mut s = slice(&spec, h, &g2, vec![0.0; g2.len()]);
    s.v = LightVector::planar(1, 0.0);
    s.w = LightVector::planar(-1, 0.3);
    s.phi = None;
    assert!(demodulate(&s, TAPER, None).is_err());
    assert!(carrier_axis(&LightVector::planar(-1, 0.0)).is_ok());
    assert!(carrier_axis(&LightVector::planar(-1, std::f64::consts::FRAC_PI_2)).is_ok());
}

/// A closed-form extracted amplitude `chi (A - iB)/2 e^{g}` with real `g`.
fn exact_amplitude(a: f64, b: f64) -> (ExtractedAmplitude<f64>, Vec<f64>, Vec<f64>) {
    let g = Grid::new_1d(-1.0, 0.01, 201);
    let chi: Vec<f64> = (0..g.len()).map(|p| Profile::cosine(0.0, 0.8, 2).value(g.coord(p, 0)[0])).collect();
    let expo: Vec<f64> = (0..g.len()).map(|p| 0.3 * (2.0 * g.coord(p, 0)[0]).sin()).collect();
    let values = chi.iter().zip(&expo).map(|(&c, &e)| C::new(a, -b) * (0.5 * c * e.exp())).collect();
    let amp = ExtractedAmplitude {
        grid: g.clone(),
        h: 1.0 / 64.0,
        values,
        trusted: vec![true; g.len()],
        fit_residual: 0.0,
        cutoff: 32.0,
        richardson: false,
    };
    (amp, chi, expo)
}

#[test]
fn log_recovery_is_probe_invariant_and_real_on_exact_data() {
    let (amp, chi, expo) = exact_amplitude(1.0, 0.5);
    let base = log_recover_ray_data(&amp, &chi, 1.0, 0.5, 0.1).unwrap();
    assert!(base.max_imag < 1e-8);
    for p in 0..chi.len() {
        if base.valid[p] {
            assert!((base.values[p] - expo[p]).abs() < 1e-12);
        }
    }
    for c in [-3.0, 0.01, 7.5] {
        let (scaled, _, _) = exact_amplitude(c, 0.5 * c);
        let s = log_recover_ray_data(&scaled, &chi, c, 0.5 * c, 0.1).unwrap();
        assert_eq!(s.valid, base.valid);
        for p in 0..chi.len() {
            assert!((s.values[p] - base.values[p]).abs() <= 1e-8 * base.values[p].abs().max(1e-300) + 1e-14);
        }
    }
}

#[test]
fn no_sample_below_the_chi_floor() {
    let (amp, chi, _) = exact_amplitude(1.0, 0.5);
    let cmax = chi.iter().cloned().fold(0.0, f64::max);
    let s = log_recover_ray_data(&amp, &chi, 1.0, 0.5, 0.1).unwrap();
    for p in 0..chi.len() {
        if chi[p].abs() < 0.1 * cmax {
            assert!(!s.valid[p] && s.values[p] == 0.0);
        }
    }
    assert!(log_recover_ray_data(&amp, &chi, 0.0, 0.0, 0.1).is_err());
}

#[test]
fn synthetic_rows_match_the_light_ray_transform() {
    let q = catalog::<f64>("radial_bump_2d", 1.0, 0.45, [0.05, 0.0, 0.0]).unwrap();
    let cfg = RecoveryConfig::standard(MeasurementMode::Synthetic, 1.0 / 64.0);
    cfg.validate(q.as_ref()).unwrap();
    let offsets = cfg.offsets();
    let angles = [0.0, 0.7, 2.0];
    let oracle = lightray_forward(q.as_ref(), &cfg.phi, -1, &offsets, &angles, cfg.t_meas, cfg.tau0(), Pairing::Minkowski).unwrap();
    let scale = oracle.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, &angle) in angles.iter().enumerate() {
        let slices = measure_slices(q.as_ref(), &cfg, angle).unwrap();
        let row = sinogram_row(&slices, &cfg).unwrap();
        assert!(row.max_imag < 1e-3, "imag {}", row.max_imag);
        assert!(row.valid.iter().all(|&v| v));
        for (k, &o) in oracle.row(a).iter().enumerate() {
            assert!((row.values[k] - o).abs() < 2e-3 * scale, "angle {angle} offset {} {} vs {o}", offsets[k], row.values[k]);
        }
    }
}

#[test]
fn zero_potential_reconstructs_zero() {
    let mut cfg = RecoveryConfig::standard(MeasurementMode::Synthetic, 1.0 / 32.0);
    cfg.n_angles = 8;
    cfg.recon_n = 16;
    let q = catalog::<f64>("radial_bump_2d", 0.0, 0.45, [0.05, 0.0, 0.0]).unwrap();
    let (rec, rep, _) = recover_potential_2d(q.as_ref(), &cfg, None).unwrap();
    assert!(rec.values.iter().all(|v| v.abs() < 1e-12), "{:?}", rec.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    assert!(rep.dropped_angles.is_empty());
}

#[test]
fn synthetic_recovery_of_the_phantom() {
    let q = catalog::<f64>("radial_bump_2d", 1.0, 0.45, [0.05, 0.0, 0.0]).unwrap();
    let mut cfg = RecoveryConfig::standard(MeasurementMode::Synthetic, 1.0 / 32.0);
    cfg.n_angles = 90;
    let (rec, rep, sino) = recover_potential_2d(q.as_ref(), &cfg, Some(&phantom)).unwrap();
    assert_eq!(sino.angles.len(), 90);
    assert_eq!(rep.angles_used, 90);
    assert!(rec.rel_error.unwrap() < 0.05, "{:?}", rep);
}
