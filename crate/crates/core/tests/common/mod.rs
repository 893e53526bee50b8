#![allow(dead_code)]

use nullform_core::geoptics::AnsatzSpec;
use nullform_core::minkowski::LightVector;
use nullform_core::profile::Profile;

pub const H_LIST: [f64; 4] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];

/// The 1+1D scenario shared by the convergence tests: a bump background moving right and
/// a cosine-windowed packet moving left through a bump potential centred at the origin.
pub fn spec_1d(order: usize, dx: f64) -> AnsatzSpec<f64> {
    AnsatzSpec {
        order,
        h_list: H_LIST.to_vec(),
        t0: -1.5,
        t_meas: 1.0,
        t1: 1.5,
        dx,
        v: LightVector::new(1, &[1.0]).unwrap(),
        w: LightVector::new(-1, &[1.0]).unwrap(),
        phi: Profile::bump(0.0, 1.5),
        chi: Profile::cosine(0.0, 0.4, 4),
        a: 1.0,
        b: 0.5,
        bbox: None,
    }
}

/// Grid spacing giving `ppw` points per carrier wavelength `2 pi h`.
pub fn resolved_dx(h: f64, ppw: f64) -> f64 {
    std::f64::consts::TAU * h / ppw
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// The radial bump used as the tomography phantom, written out independently of the catalog.
pub fn phantom(x: [f64; 2]) -> f64 {
    let r2 = ((x[0] - 0.05).powi(2) + x[1].powi(2)) / 0.45f64.powi(2);
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp() * std::f64::consts::E
    } else {
        0.0
    }
}
