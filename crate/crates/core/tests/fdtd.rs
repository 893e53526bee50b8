mod common;

use common::{resolved_dx, spec_1d};
use nullform_core::fdtd::{
    check_energy_estimate, discrete_residual, energy_suite, picard_iterate, run_energy_case, PicardConfig, WeightedNormSpec,
};
use nullform_core::geoptics::{assemble_un, build_hierarchy};
use nullform_core::grid::{Grid, Order};
use nullform_core::potential::catalog;

#[test]
fn energy_constant_is_uniform_over_the_suite() {
    let suite = energy_suite(20, 7);
    assert_eq!(suite.len(), 20);
    let mut worst = 0.0f64;
    for case in &suite {
        let rep = run_energy_case::<f64>(case, 0.02, 2.0, 4).unwrap();
        eprintln!("{case:?} C={} C_mu={}", rep.constant, rep.constant_rescaled);
        assert!(rep.constant.is_finite() && rep.constant > 0.0);
        worst = worst.max(rep.constant);
    }
    assert!(worst <= 50.0, "C = {worst}");
}

#[test]
fn zero_trajectory_has_zero_constant() {
    let g = Grid::new_1d(-1.0, 0.05, 41);
    let frames = vec![vec![0.0; g.len()]; 5];
    let rep = check_energy_estimate(&g, &frames, &frames, 0.0, 0.02, 1, 2.0, 4.0);
    assert_eq!(rep.constant, 0.0);
    assert!(rep.lhs.iter().all(|&v| v == 0.0));
}

#[test]
fn picard_contracts_at_lambda_eight() {
    let q = catalog("bump_linear_u", 0.5, 0.5, [0.0; 3]).unwrap();
    let spec = spec_1d(1, 0.01);
    let table = build_hierarchy(&spec, q.as_ref()).unwrap();
    let h = 1.0 / 32.0;
    let g = Grid::covering(1, [-3.2, 0.0], [3.2, 0.0], resolved_dx(h, 16.0)).unwrap();
    let span = spec.t_meas - spec.t0;
    let steps = (span / (0.45 * g.dx)).ceil() as usize;
    let dt = span / steps as f64;
    let v: Vec<Vec<f64>> = (0..=steps).map(|k| assemble_un(&table, h, spec.t0 + k as f64 * dt, &g)).collect();
    let r = discrete_residual(q.as_ref(), &g, spec.t0, dt, &v, Order::Fourth);
    let lambda = 8.0;
    let cfg = PicardConfig {
        norm: WeightedNormSpec { m: 3, mu: lambda / h, lambda, t0: spec.t0 },
        order: Order::Fourth,
        tol: 1e-10,
        max_iter: 12,
    };
    let res = picard_iterate(q.as_ref(), &g, spec.t0, dt, &v, &r, &cfg).unwrap();
    let tr = &res.trace;
    assert!(tr.converged && tr.iterations <= 12, "{tr:?}");
    assert!(tr.ratios.iter().all(|&x| x < 0.5), "{tr:?}");
    assert!(tr.differences.len() + 1 == tr.norms.len());
    assert!(res.limit_residual_ratio < 1.0);
}

#[test]
fn fdtd_approaches_the_first_order_ansatz_at_second_order() {
    use nullform_core::fdtd::{ansatz_vs_fdtd, SemilinearConfig};
    let q = catalog("bump_linear_u", 1.0, 0.5, [0.0; 3]).unwrap();
    let spec = spec_1d(1, 0.01);
    let table = build_hierarchy(&spec, q.as_ref()).unwrap();
    let cfg = SemilinearConfig { order: Order::Fourth, correctors: 2, ..Default::default() };
    let t = std::time::Instant::now();
    let rep = ansatz_vs_fdtd(&spec, q.as_ref(), &table, 3.2, 16.0, 3, &cfg).unwrap();
    assert!(t.elapsed().as_secs() < 300);
    assert!(rep.slope_l2 >= 1.75, "{rep:?}");
    assert!(rep.rows.windows(2).all(|w| w[1].l2 < w[0].l2), "{rep:?}");
}
