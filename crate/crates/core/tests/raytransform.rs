use nullform_core::grid::Grid;
use nullform_core::potential::catalog;
use nullform_core::profile::Profile;
use nullform_core::raytransform::*;

const CENTER: [f64; 2] = [0.1, -0.05];
const R: f64 = 0.6;

fn bump(x: [f64; 2]) -> f64 {
    let r2 = ((x[0] - CENTER[0]).powi(2) + (x[1] - CENTER[1]).powi(2)) / (R * R);
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp() * std::f64::consts::E
    } else {
        0.0
    }
}

/// Composite trapezoid over a long chord; the integrand is smooth and compactly supported.
fn oracle_line(s: f64, a: f64) -> f64 {
    let (om, th) = ((a.cos(), a.sin()), (-a.sin(), a.cos()));
    let n = 20000;
    let h = 2.0 / n as f64;
    (0..=n)
        .map(|k| {
            let t = -1.0 + k as f64 * h;
            bump([s * th.0 + t * om.0, s * th.1 + t * om.1]) * h
        })
        .sum()
}

fn phantom_sinogram(n_off: usize, n_ang: usize) -> Sinogram<f64> {
    let offsets = centered_offsets(n_off, 2.0 / (n_off - 1) as f64);
    let angles = uniform_angles(n_ang);
    let meta = SinogramMeta { v_sign: -1, profile: "test".into(), pairing: Pairing::Minkowski, t_meas: 0.0, tau0: 0.0 };
    let mut sino = Sinogram::zeros(offsets, angles, meta);
    sino.data = xray_forward(&bump, 1.0, &sino.offsets, &sino.angles).unwrap();
    sino
}

fn truth_grid() -> Grid<f64> {
    Grid::new_2d([-0.9, -0.9], 1.8 / 63.0, [64, 64])
}

#[test]
fn catalog_phantom_matches_test_bump() {
    let q = catalog::<f64>("radial_bump_2d", 1.0, R, [CENTER[0], CENTER[1], 0.0]).unwrap();
    for x in [[0.1, -0.05], [0.3, 0.2], [-0.4, 0.1], [0.8, 0.8]] {
        let v = q.eval(&[0.0, x[0], x[1], 0.0], 0.0);
        assert!((v - bump(x)).abs() < 1e-14, "{x:?}: {v} vs {}", bump(x));
    }
}

#[test]
fn xray_forward_matches_trapezoid() {
    let offsets = [-0.5, -0.1, 0.0, 0.25, 0.6];
    let angles = [0.0, 0.7, 2.1];
    let got = xray_forward(&bump, 1.0, &offsets, &angles).unwrap();
    for (a, &ang) in angles.iter().enumerate() {
        for (k, &s) in offsets.iter().enumerate() {
            let want = oracle_line(s, ang);
            assert!((got[a * offsets.len() + k] - want).abs() < 1e-7, "s={s} a={ang}");
        }
    }
}

#[test]
fn lightray_reduces_to_xray() {
    let q = catalog::<f64>("radial_bump_2d", 1.0, R, [CENTER[0], CENTER[1], 0.0]).unwrap();
    let (t_meas, tau0) = (0.9, -0.9);
    let c = (CENTER[0].hypot(CENTER[1]) + R) * std::f64::consts::SQRT_2;
    let phi = Profile::ramp(t_meas + tau0, c + 0.2, 0.3);
    let offsets = centered_offsets(9, 0.2);
    let angles = uniform_angles(6);
    for pairing in [Pairing::Minkowski, Pairing::Euclidean] {
        let red = xray_reduce(q.as_ref(), &phi, -1, t_meas, tau0, pairing).unwrap();
        let g = |x: [f64; 2]| red.eval(x);
        let want = xray_forward(&g, 1.0, &offsets, &angles).unwrap();
        let got = lightray_forward(q.as_ref(), &phi, -1, &offsets, &angles, t_meas, tau0, pairing).unwrap();
        for (a, b) in got.data.iter().zip(&want) {
            assert!((a - b).abs() < 1e-6, "{pairing:?}: {a} vs {b}");
        }
    }
}

#[test]
fn reduction_rejects_narrow_plateau_and_u_dependence() {
    let q = catalog::<f64>("radial_bump_2d", 1.0, R, [0.0, 0.0, 0.0]).unwrap();
    let narrow = Profile::ramp(0.0, 0.5, 0.3);
    assert!(xray_reduce(q.as_ref(), &narrow, -1, 0.0, 0.0, Pairing::Minkowski).is_err());
    let wide = Profile::ramp(0.0, 2.0, 0.3);
    assert!(xray_reduce(q.as_ref(), &wide, 1, 0.0, 0.0, Pairing::Minkowski).is_err());
    let qu = catalog::<f64>("bump_linear_u", 1.0, R, [0.0, 0.0, 0.0]).unwrap();
    assert!(xray_reduce(qu.as_ref(), &wide, -1, 0.0, 0.0, Pairing::Minkowski).is_err());
}

#[test]
fn fbp_recovers_phantom() {
    let sino = phantom_sinogram(129, 180);
    let grid = truth_grid();
    let mut rec = invert_xray_2d(&sino, &grid, InvertMethod::Fbp, 0.0).unwrap();
    let e = rec.compare_with(&bump);
    assert!(rec.warnings.is_empty());
    assert!(e <= 0.05, "relative error {e}");
}

#[test]
fn few_angles_fall_back_to_least_squares() {
    let sino = phantom_sinogram(65, 30);
    let grid = Grid::new_2d([-0.9, -0.9], 1.8 / 31.0, [32, 32]);
    let mut rec = invert_xray_2d(&sino, &grid, InvertMethod::Fbp, 1e-4).unwrap();
    assert_eq!(rec.method, InvertMethod::Rls);
    assert_eq!(rec.warnings.len(), 1);
    let e = rec.compare_with(&bump);
    assert!(e <= 0.1, "relative error {e}");
}

#[test]
fn zero_data_gives_zero() {
    let mut sino = phantom_sinogram(33, 90);
    sino.scale(0.0);
    let grid = Grid::new_2d([-0.5, -0.5], 0.1, [11, 11]);
    for m in [InvertMethod::Fbp, InvertMethod::Rls] {
        let rec = invert_xray_2d(&sino, &grid, m, 1e-3).unwrap();
        assert!(rec.values.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn fbp_is_linear() {
    let sino = phantom_sinogram(65, 90);
    let grid = Grid::new_2d([-0.8, -0.8], 0.1, [17, 17]);
    let base = invert_xray_2d(&sino, &grid, InvertMethod::Fbp, 0.0).unwrap().values;
    let mut scaled = sino.clone();
    scaled.scale(-2.5);
    let out = invert_xray_2d(&scaled, &grid, InvertMethod::Fbp, 0.0).unwrap().values;
    for (a, b) in base.iter().zip(&out) {
        assert!((-2.5 * a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn ray_operator_adjoint_is_exact() {
    let sino = phantom_sinogram(21, 7);
    let grid = Grid::new_2d([-1.0, -1.0], 0.1, [21, 21]);
    let op = RayOperator::new(&grid, &sino);
    let x: Vec<f64> = (0..grid.len()).map(|p| ((p * 37 % 101) as f64 / 101.0) - 0.5).collect();
    let y: Vec<f64> = (0..op.rays.len()).map(|k| ((k * 53 % 89) as f64 / 89.0) - 0.5).collect();
    let ax = op.apply(&x);
    let aty = op.adjoint(&y);
    let lhs: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
    let rhs: f64 = x.iter().zip(&aty).map(|(a, b)| a * b).sum();
    assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
}

#[test]
fn missing_rows_are_dropped_by_selection() {
    let sino = phantom_sinogram(17, 10);
    let keep: Vec<bool> = (0..10).map(|k| k % 3 != 0).collect();
    let sub = sino.select_rows(&keep);
    assert_eq!(sub.angles.len(), 6);
    assert_eq!(sub.row(0), sino.row(1));
}
