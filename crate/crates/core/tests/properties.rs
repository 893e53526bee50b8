use num_complex::Complex;
use proptest::prelude::*;

use nullform_core::fdtd::{energy_suite, run_energy_case};
use nullform_core::grid::Grid;
use nullform_core::io::{read_grid, write_grid, GridHeader};
use nullform_core::minkowski::{background_at, pairing, LightVector};
use nullform_core::nullform::null_form;
use nullform_core::potential::catalog;
use nullform_core::profile::Profile;
use nullform_core::raytransform::xray_forward;
use nullform_core::recovery::{log_recover_ray_data, ExtractedAmplitude};
use nullform_core::uniqueness::{uniqueness_certificate, CertGrid};

fn profile() -> impl Strategy<Value = Profile<f64>> {
    prop_oneof![
        (-0.5..0.5f64, 0.3..2.0f64).prop_map(|(c, r)| Profile::bump(c, r)),
        (-0.5..0.5f64, 0.3..2.0f64, 1..5u32).prop_map(|(c, r, p)| Profile::cosine(c, r, p)),
        (-0.5..0.5f64, 0.5..2.0f64, 0.1..0.4f64).prop_map(|(c, w, d)| Profile::ramp(c, w, d)),
    ]
}

fn sign() -> impl Strategy<Value = i8> {
    prop_oneof![Just(1i8), Just(-1i8)]
}

fn point() -> impl Strategy<Value = [f64; 4]> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(t, x, y)| [t, x, y, 0.0])
}

fn amplitude(c: f64, g: &[f64], chi: &[f64]) -> ExtractedAmplitude<f64> {
    let grid = Grid::new_1d(-1.0, 2.0 / (g.len() - 1) as f64, g.len());
    let values = chi.iter().zip(g).map(|(&x, &e)| Complex::new(c, -0.5 * c) * (0.5 * x * e.exp())).collect();
    ExtractedAmplitude { grid, h: 1.0 / 64.0, values, trusted: vec![true; g.len()], fit_residual: 0.0, cutoff: 32.0, richardson: false }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn background_annihilates_the_null_form(phi in profile(), s in sign(), alpha in 0.0..6.3f64, x in point()) {
        let q = catalog::<f64>("gaussian_xy_cubic_u", 1.0, 1.5, [0.0; 3]).unwrap();
        let v = LightVector::planar(s, alpha);
        let bg = background_at(&phi, &v, v.dot_coords(&x));
        prop_assert!(null_form(q.as_ref(), &x, bg.value, &bg.gradient).abs() < 1e-12);
    }

    #[test]
    fn single_precision_background_annihilates_the_null_form(s in sign(), alpha in 0.0..6.3f32, t in -1.0..1.0f32, y in -1.0..1.0f32) {
        let q = catalog::<f32>("bump_const_u", 1.0, 2.0, [0.0; 3]).unwrap();
        let v = LightVector::planar(s, alpha);
        let phi = Profile::bump(0.0f32, 1.5);
        let x = [t, y, 0.5 * y, 0.0];
        let bg = background_at(&phi, &v, v.dot_coords(&x));
        prop_assert!(null_form(q.as_ref(), &x, bg.value, &bg.gradient).abs() < 1e-5);
    }

    #[test]
    fn twin_is_null_and_an_involution(s in sign(), alpha in 0.0..6.3f64) {
        let v = LightVector::planar(s, alpha);
        let t = v.twin_covector();
        prop_assert!(pairing(&t, &t).abs() < 1e-15);
        let back = v.twin().twin();
        prop_assert_eq!(back.sign(), v.sign());
        for (a, b) in back.direction().iter().zip(v.direction()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn probe_scaling_cancels_in_the_logarithm(c in prop_oneof![-10.0..-0.01f64, 0.01..10.0f64], k in 0.5..4.0f64, size in 0.05..0.8f64) {
        let n = 101;
        let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let chi: Vec<f64> = xs.iter().map(|&x| Profile::cosine(0.0, 0.8, 2).value(x)).collect();
        let g: Vec<f64> = xs.iter().map(|&x| size * (k * x).sin()).collect();
        let base = log_recover_ray_data(&amplitude(1.0, &g, &chi), &chi, 1.0, 0.5, 0.1).unwrap();
        let scaled = log_recover_ray_data(&amplitude(c, &g, &chi), &chi, c, 0.5 * c, 0.1).unwrap();
        prop_assert_eq!(&scaled.valid, &base.valid);
        prop_assert!(scaled.max_imag < 1e-8);
        for p in 0..n {
            prop_assert!((scaled.values[p] - base.values[p]).abs() <= 1e-8 * base.values[p].abs() + 1e-14);
            if base.valid[p] {
                prop_assert!((base.values[p] - g[p]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_profiles_have_angle_independent_projections(r in 0.2..0.9f64, angles in prop::collection::vec(0.0..6.3f64, 2..5)) {
        let g = move |x: [f64; 2]| {
            let s = (x[0] * x[0] + x[1] * x[1]) / (r * r);
            if s < 1.0 { (1.0 - s).powi(3) } else { 0.0 }
        };
        let offsets: Vec<f64> = (0..9).map(|k| -0.8 + 0.2 * k as f64).collect();
        let sino = xray_forward(&g, 1.0, &offsets, &angles).unwrap();
        let n = offsets.len();
        for a in 1..angles.len() {
            for k in 0..n {
                prop_assert!((sino[a * n + k] - sino[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn projection_is_linear_to_quadrature_tolerance(c in -5.0..5.0f64) {
        let g = |x: [f64; 2]| (-4.0 * (x[0] * x[0] + 2.0 * x[1] * x[1])).exp() * (1.0 + x[0]);
        let offsets = [-0.5, 0.0, 0.3];
        let angles = [0.2, 1.4];
        let a = xray_forward(&g, 1.0, &offsets, &angles).unwrap();
        let b = xray_forward(&move |x: [f64; 2]| c * g(x), 1.0, &offsets, &angles).unwrap();
        for (x, y) in a.iter().zip(&b) {
            // adaptive quadrature refines to an absolute tolerance, so linearity holds to that level
            prop_assert!((c * x - y).abs() <= 1e-8 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn zero_potential_has_zero_certificate(phi in profile(), s in sign(), alpha in 0.0..6.3f64) {
        let q = catalog::<f64>("zero", 0.0, 1.0, [0.0; 3]).unwrap();
        let rep = uniqueness_certificate(q.as_ref(), &[phi], &[LightVector::planar(s, alpha)], &CertGrid::cube(1.0, 8, 2), 1e-3).unwrap();
        prop_assert_eq!(rep.certificate, 0.0);
    }

    #[test]
    fn grids_round_trip_bit_for_bit(nx in 1..9usize, ny in 1..9usize, data in prop::collection::vec(-1e6..1e6f64, 64)) {
        let grid = Grid::new_2d([-1.0, 0.5], 0.25, [nx, ny]);
        let values = &data[..nx * ny];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.nfgrid");
        let header = GridHeader::for_grid("field", &grid, serde_json::json!({ "note": "x" }));
        write_grid(&path, &header, values).unwrap();
        let (h, back) = read_grid(&path).unwrap();
        prop_assert_eq!(h, header);
        prop_assert_eq!(back.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_constant_stays_bounded_for_random_data(seed in 0..10_000u64, pick in 0..20usize) {
        let case = energy_suite(20, seed).swap_remove(pick);
        let rep = run_energy_case::<f64>(&case, 0.02, 2.0, 4).unwrap();
        prop_assert!(rep.constant.is_finite() && rep.constant <= 50.0, "{case:?}: C = {}", rep.constant);
    }
}
