use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use nullform_core::fdtd::{
    ansatz_vs_fdtd, discrete_residual, energy_suite, picard_iterate, run_energy_case, PicardConfig, SemilinearConfig, WeightedNormSpec,
};
use nullform_core::geoptics::{assemble_un, build_hierarchy, measure_residual_order, AnsatzSpec, CoeffTable};
use nullform_core::grid::{l2_norm, linf_norm, Grid, Order};
use nullform_core::io::{write_coeff_table, write_csv, write_grid, write_pgm, GridHeader};
use nullform_core::minkowski::LightVector;
use nullform_core::potential::Potential;
use nullform_core::raytransform::InvertMethod;
use nullform_core::recovery::{recover_potential_2d, MeasurementMode, RecoveryConfig};
use nullform_core::uniqueness::{uniqueness_certificate, CertGrid};

use crate::config::{MethodCfg, ModeCfg, Pipeline, Scenario};
use crate::CliError;

pub struct Context<'a> {
    pub dir: &'a Path,
    pub hash: &'a str,
}

pub struct PipelineResult {
    pub files: Vec<String>,
    pub pass: bool,
    pub results: Value,
}

struct Out<'a> {
    ctx: &'a Context<'a>,
    files: Vec<String>,
}

impl Out<'_> {
    fn path(&mut self, name: &str) -> std::path::PathBuf {
        self.files.push(name.to_string());
        self.ctx.dir.join(name)
    }

    fn meta(&self, extra: Value) -> Value {
        let mut m = json!({ "config_hash": self.ctx.hash });
        if let (Some(a), Value::Object(b)) = (m.as_object_mut(), extra) {
            a.extend(b);
        }
        m
    }

    fn grid(&mut self, name: &str, kind: &str, grid: &Grid<f64>, data: &[f64], extra: Value) -> Result<(), CliError> {
        let header = GridHeader::for_grid(kind, grid, self.meta(extra));
        write_grid(&self.path(name), &header, data)?;
        Ok(())
    }

    /// A 2-D field also gets a PGM preview; a 1-D one a CSV of `(x, value)`.
    fn preview(&mut self, stem: &str, grid: &Grid<f64>, data: &[f64]) -> Result<(), CliError> {
        if grid.dim == 2 {
            write_pgm(&self.path(&format!("{stem}.pgm")), grid.n[0], grid.n[1], data)?;
        } else {
            let rows: Vec<Vec<f64>> = (0..grid.len()).map(|p| vec![grid.coord(p, 0)[0], data[p]]).collect();
            write_csv(&self.path(&format!("{stem}.csv")), &["x", "value"], &rows)?;
        }
        Ok(())
    }
}

fn to_value<S: Serialize>(s: &S) -> Result<Value, CliError> {
    Ok(serde_json::to_value(s)?)
}

pub fn dispatch(s: &Scenario, ctx: &Context<'_>) -> Result<PipelineResult, CliError> {
    let mut out = Out { ctx, files: vec![] };
    let (pass, results) = match s.pipeline {
        Pipeline::Ansatz => ansatz(s, &mut out)?,
        Pipeline::Residual => residual(s, &mut out)?,
        Pipeline::Forward => forward(s, &mut out)?,
        Pipeline::Picard => picard(s, &mut out)?,
        Pipeline::Energy => energy(s, &mut out)?,
        Pipeline::Recover => recover(s, &mut out)?,
        Pipeline::Certify => certify(s, &mut out)?,
    };
    Ok(PipelineResult { files: out.files, pass, results })
}

fn solver_box(s: &Scenario, h: f64) -> Result<Grid<f64>, CliError> {
    let hw = s.grid.half_width;
    let dx = std::f64::consts::TAU * h / s.grid.points_per_wavelength;
    let hi = [hw, if s.dim == 2 { hw } else { 0.0 }];
    Ok(Grid::covering(s.dim, [-hi[0], -hi[1]], hi, dx)?)
}

fn table(spec: &AnsatzSpec<f64>, q: &dyn Potential<f64>) -> Result<CoeffTable<f64>, CliError> {
    Ok(build_hierarchy(spec, q)?)
}

fn diagnostics(t: &CoeffTable<f64>) -> Value {
    let m: serde_json::Map<String, Value> = t.diagnostics.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    Value::Object(m)
}

fn ansatz(s: &Scenario, out: &mut Out<'_>) -> Result<(bool, Value), CliError> {
    let spec = s.ansatz_spec()?;
    let q = s.potential()?;
    let t = table(&spec, q.as_ref())?;
    write_coeff_table(&out.path("coeff_table.nfgrid"), &t)?;
    let mut rows = Vec::new();
    for (i, &h) in spec.h_list.iter().enumerate() {
        let g = solver_box(s, h)?;
        let u = assemble_un(&t, h, spec.t_meas, &g);
        let osc: Vec<f64> = (0..g.len()).map(|p| u[p] - spec.phi.value(spec.v.dot_coords(&g.spacetime(spec.t_meas, p)))).collect();
        out.grid(&format!("un_{i}.nfgrid"), "u_n", &g, &u, json!({ "h": h, "t": spec.t_meas }))?;
        out.preview(&format!("un_{i}"), &g, &u)?;
        rows.push(json!({ "h": h, "osc_l2": l2_norm(&g, &osc), "osc_linf": linf_norm(&osc) }));
    }
    let defect = t.conjugate_symmetry_defect();
    let res = json!({
        "table": { "nt": t.grid.nt, "dt": t.grid.dt, "dims": &t.grid.space.n[..s.dim], "dx": t.grid.space.dx, "entries": t.nonzero_entries() },
        "diagnostics": diagnostics(&t),
        "conjugate_symmetry_defect": defect,
        "slices": rows,
    });
    Ok((defect.is_finite(), res))
}

fn residual(s: &Scenario, out: &mut Out<'_>) -> Result<(bool, Value), CliError> {
    let spec = s.ansatz_spec()?;
    let q = s.potential()?;
    let t = table(&spec, q.as_ref())?;
    let rep = measure_residual_order(&spec, q.as_ref(), &t)?;
    let rows: Vec<Vec<f64>> = rep.rows.iter().map(|r| vec![r.h, r.l2, r.linf, r.floor_l2, r.floor_linf]).collect();
    write_csv(&out.path("residual.csv"), &["h", "l2", "linf", "floor_l2", "floor_linf"], &rows)?;
    Ok((rep.pass, json!({ "residual": to_value(&rep)?, "diagnostics": diagnostics(&t) })))
}

fn forward(s: &Scenario, out: &mut Out<'_>) -> Result<(bool, Value), CliError> {
    let spec = s.ansatz_spec()?;
    let q = s.potential()?;
    let t = table(&spec, q.as_ref())?;
    let f = s.forward.clone().unwrap_or(crate::config::ForwardCfg { levels: 3, correctors: 2 });
    let cfg = SemilinearConfig { order: s.grid.stencil.into(), correctors: f.correctors, ..Default::default() };
    let rep = ansatz_vs_fdtd(&spec, q.as_ref(), &t, s.grid.half_width, s.grid.points_per_wavelength, f.levels, &cfg)?;
    let rows: Vec<Vec<f64>> = rep.rows.iter().map(|r| vec![r.h, r.l2, r.linf, r.grid_error]).collect();
    write_csv(&out.path("forward.csv"), &["h", "l2", "linf", "grid_error"], &rows)?;
    let expected = (spec.order + 1) as f64;
    Ok((rep.slope_l2 >= expected - 0.25, json!({ "forward": to_value(&rep)?, "expected_slope": expected })))
}

fn picard(s: &Scenario, out: &mut Out<'_>) -> Result<(bool, Value), CliError> {
    let p = s.picard.as_ref().expect("validated");
    let mut spec = s.ansatz_spec()?;
    spec.h_list = vec![p.h];
    let q = s.potential()?;
    let t = table(&spec, q.as_ref())?;
    let g = solver_box(s, p.h)?;
    let span = spec.t_meas - spec.t0;
    let steps = (span / nullform_core::fdtd::default_dt(&g)).ceil() as usize;
    let dt = span / steps as f64;
    let order: Order = s.grid.stencil.into();
    let v: Vec<Vec<f64>> = (0..=steps).map(|k| assemble_un(&t, p.h, spec.t0 + k as f64 * dt, &g)).collect();
    let r = discrete_residual(q.as_ref(), &g, spec.t0, dt, &v, order);
    let m = p.m.unwrap_or(s.dim.div_ceil(2) + 2);
    let cfg = PicardConfig {
        norm: WeightedNormSpec { m, mu: p.lambda / p.h, lambda: p.lambda, t0: spec.t0 },
        order,
        tol: p.tol,
        max_iter: p.max_iter,
    };
    let res = picard_iterate(q.as_ref(), &g, spec.t0, dt, &v, &r, &cfg)?;
    let tr = &res.trace;
    let rows: Vec<Vec<f64>> = (0..tr.norms.len())
        .map(|j| {
            let d = if j >= 1 { tr.differences[j - 1] } else { f64::NAN };
            let ratio = if j >= 2 { tr.ratios[j - 2] } else { f64::NAN };
            vec![j as f64, tr.norms[j], d, ratio]
        })
        .collect();
    write_csv(&out.path("picard.csv"), &["j", "norm", "difference", "ratio"], &rows)?;
    let last = res.w.last().cloned().unwrap_or_default();
    out.grid("picard_limit.nfgrid", "picard_correction", &g, &last, json!({ "t": spec.t0 + steps as f64 * dt, "h": p.h }))?;
    let pass = tr.converged && tr.iterations <= p.max_iter && tr.ratios.iter().all(|&x| x < 0.5);
    Ok((
        pass,
        json!({ "trace": to_value(tr)?, "limit_residual_ratio": res.limit_residual_ratio, "m": m, "mu": p.lambda / p.h, "steps": steps }),
    ))
}

fn energy(s: &Scenario, out: &mut Out<'_>) -> Result<(bool, Value), CliError> {
    let e = s.energy.as_ref().expect("validated");
    let suite = energy_suite(e.cases, s.seed);
    let mut rows = Vec::new();
    let mut cases = Vec::new();
    let (mut c, mut c_mu) = (0.0f64, 0.0f64);
    for case in &suite {
        let rep = run_energy_case::<f64>(case, e.dx, e.t_end, e.stride)?;
        c = c.max(rep.constant);
        c_mu = c_mu.max(rep.constant_rescaled);
        rows.push(vec![
            case.seed as f64,
            case.m as f64,
            case.lambda,
            f64::from(u8::from(case.forced)),
            rep.constant,
            rep.constant_rescaled,
        ]);
        cases.push(json!({ "case": to_value(case)?, "constant": rep.constant, "constant_rescaled": rep.constant_rescaled }));
    }
    write_csv(&out.path("energy.csv"), &["seed", "m", "lambda", "forced", "constant", "constant_rescaled"], &rows)?;
    Ok((c <= e.c_cap, json!({ "constant": c, "constant_rescaled": c_mu, "c_cap": e.c_cap, "cases": cases })))
}

fn recover(s: &Scenario, out: &mut Out<'_>) -> Result<(bool, Value), CliError> {
    let r = s.recover.as_ref().expect("validated");
    let mode = match r.mode {
        ModeCfg::Synthetic => MeasurementMode::Synthetic,
        ModeCfg::Fdtd => MeasurementMode::Fdtd,
    };
    let mut cfg = RecoveryConfig::standard(mode, r.h);
    cfg.n_angles = r.n_angles;
    cfg.method = match r.method {
        MethodCfg::Fbp => InvertMethod::Fbp,
        MethodCfg::Rls => InvertMethod::Rls,
    };
    cfg.reg = r.reg;
    cfg.recon_n = r.recon_n;
    cfg.recon_half_width = r.recon_half_width;
    cfg.richardson = r.richardson;
    if let Some(f) = r.refocus {
        cfg.refocus = f;
    }
    if let Some(chi) = &s.chi {
        cfg.chi = chi.build();
    }
    if let Some(w) = &s.window {
        cfg.t0 = w.t0;
        cfg.t_meas = w.t_meas;
    }
    let mut scenario = s.clone();
    if r.jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        scenario.potential.center.resize(2, 0.0);
        for c in scenario.potential.center.iter_mut() {
            *c += rng.gen_range(-r.jitter..=r.jitter);
        }
    }
    let q = scenario.potential()?;
    let truth = |x: [f64; 2]| q.eval(&[0.0, x[0], x[1], 0.0], 0.0);
    let (rec, rep, sino) = recover_potential_2d(q.as_ref(), &cfg, Some(&truth)).map_err(|e| match e {
        nullform_core::Error::Config { field, message } => CliError::Config { field: format!("recover.{field}"), message },
        other => other.into(),
    })?;
    out.grid("reconstruction.nfgrid", "reconstruction", &rec.grid, &rec.values, json!({ "method": to_value(&rec.method)? }))?;
    write_pgm(&out.path("reconstruction.pgm"), rec.grid.n[0], rec.grid.n[1], &rec.values)?;
    let truth_vals: Vec<f64> = (0..rec.grid.len())
        .map(|p| {
            let (i, j) = rec.grid.ij(p);
            truth(rec.grid.coord(i, j))
        })
        .collect();
    write_pgm(&out.path("truth.pgm"), rec.grid.n[0], rec.grid.n[1], &truth_vals)?;
    let n_off = sino.offsets.len();
    let header = GridHeader {
        kind: "sinogram".into(),
        dims: vec![n_off, sino.angles.len()],
        lo: vec![sino.offsets.first().copied().unwrap_or(0.0), 0.0],
        spacing: vec![sino.spacing(), if sino.angles.len() > 1 { sino.angles[1] - sino.angles[0] } else { 0.0 }],
        components: 1,
        meta: out.meta(json!({ "n_offsets": n_off, "n_angles": sino.angles.len(), "angles": sino.angles, "spacing": sino.spacing() })),
    };
    write_grid(&out.path("sinogram.nfgrid"), &header, &sino.data)?;
    let rows: Vec<Vec<f64>> = (0..sino.angles.len())
        .flat_map(|a| {
            let sino = &sino;
            (0..n_off).map(move |k| {
                vec![sino.angles[a], sino.offsets[k], sino.data[sino.idx(a, k)], f64::from(u8::from(sino.valid[sino.idx(a, k)]))]
            })
        })
        .collect();
    write_csv(&out.path("sinogram.csv"), &["angle", "offset", "value", "valid"], &rows)?;
    let pass = match (r.max_error, rec.rel_error) {
        (Some(m), Some(e)) => e <= m,
        _ => true,
    };
    Ok((
        pass,
        json!({ "report": to_value(&rep)?, "reconstruction": { "rel_error": rec.rel_error, "values_l2": l2_norm(&rec.grid, &rec.values) }, "potential_center": scenario.potential.center }),
    ))
}

/// `count` light vectors alternating between the two time orientations.
pub fn light_vectors(dim: usize, count: usize) -> Vec<LightVector<f64>> {
    (0..count)
        .map(|k| {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            if dim == 1 {
                LightVector::new(sign, &[if (k / 2) % 2 == 0 { 1.0 } else { -1.0 }]).expect("unit")
            } else {
                LightVector::planar(sign, 0.3 + std::f64::consts::TAU * k as f64 / count as f64)
            }
        })
        .collect()
}

fn certify(s: &Scenario, _out: &mut Out<'_>) -> Result<(bool, Value), CliError> {
    let c = s.certify.as_ref().expect("validated");
    let q = s.potential()?;
    let profiles: Vec<_> = c.profiles.iter().map(|p| p.build()).collect();
    let vectors = light_vectors(s.dim, c.directions);
    let grid = CertGrid::cube(c.half, c.n_per_axis, s.dim);
    let rep = uniqueness_certificate(q.as_ref(), &profiles, &vectors, &grid, c.tolerance)?;
    let pass = if q.is_zero() { rep.certificate == 0.0 } else { rep.certificate > c.tolerance };
    Ok((pass, json!({ "certificate": to_value(&rep)? })))
}
