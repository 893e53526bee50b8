//! Approximate oscillatory solutions: amplitude hierarchy, assembly and residual order.

mod assemble;
mod hierarchy;
mod residual;
pub mod series;
mod transport;

pub use assemble::{assemble_complex, assemble_un, UnSampler};
pub use hierarchy::{build_hierarchy, solve_m0_wave, CoeffTable, DerivFields};
pub use residual::{measure_residual_order, ResidualReport, ResidualRow};
pub use transport::{a10_closed_form_levels, backward_ray_integral, ray_integral, solve_a10_closed_form, solve_transport};

use num_complex::Complex;

use crate::constants::CFL_DEFAULT;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::minkowski::{pairing, LightVector};
use crate::num::Real;
use crate::potential::{Potential, Support};
use crate::profile::Profile;

/// Space grid plus uniform time levels `t0 + k dt`, `k < nt`.
/// Spacetime fields are stored level by level.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeGrid<T> {
    pub space: Grid<T>,
    pub t0: T,
    pub dt: T,
    pub nt: usize,
}

impl<T: Real> SpacetimeGrid<T> {
    /// Time step near `CFL_DEFAULT dx / sqrt(n)` chosen so `t_hit` is a level; levels reach `t1`.
    pub fn with_levels(space: Grid<T>, t0: T, t_hit: T, t1: T) -> Result<Self> {
        if !(t0 < t_hit && t_hit <= t1) {
            return Err(Error::InvalidInput(format!("need t0 < t' <= t1, got {t0}, {t_hit}, {t1}")));
        }
        let target = T::lit(CFL_DEFAULT) * space.dx / T::from_usize_lossy(space.dim).sqrt();
        let k = ((t_hit - t0) / target).ceil().max(T::one());
        let dt = (t_hit - t0) / k;
        let nt = ((t1 - t0) / dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(0) + 1;
        Ok(SpacetimeGrid { space, t0, dt, nt })
    }

    #[inline]
    pub fn time(&self, k: usize) -> T {
        self.t0 + T::from_usize_lossy(k) * self.dt
    }

    #[inline]
    pub fn level_len(&self) -> usize {
        self.space.len()
    }

    pub fn len(&self) -> usize {
        self.nt * self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the level at time `t`, if `t` is one.
    pub fn level_of(&self, t: T) -> Option<usize> {
        let k = ((t - self.t0) / self.dt).round();
        let kk = k.to_usize()?;
        if kk < self.nt && (self.time(kk) - t).abs() <= T::lit(1e-9) * (T::one() + t.abs()) {
            Some(kk)
        } else {
            None
        }
    }

    pub fn coords(&self, k: usize, flat: usize) -> [T; 4] {
        self.space.spacetime(self.time(k), flat)
    }
}

/// Inputs of the oscillatory construction.
#[derive(Clone, Debug)]
pub struct AnsatzSpec<T> {
    /// Truncation order `N`.
    pub order: usize,
    pub h_list: Vec<T>,
    pub t0: T,
    /// Measurement time `T'`.
    pub t_meas: T,
    pub t1: T,
    /// Amplitude grid spacing.
    pub dx: T,
    pub v: LightVector<T>,
    pub w: LightVector<T>,
    pub phi: Profile<T>,
    pub chi: Profile<T>,
    pub a: T,
    pub b: T,
    /// Spatial box; `None` sizes it from supports and finite speed of propagation.
    pub bbox: Option<([T; 2], [T; 2])>,
}

impl<T: Real> AnsatzSpec<T> {
    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    /// `(A - iB) / 2`.
    pub fn inflow_amplitude(&self) -> Complex<T> {
        Complex::new(self.a, -self.b) * T::lit(0.5)
    }

    /// `<V~, W~>_M`.
    pub fn pairing(&self) -> T {
        pairing(&self.v.twin_covector(), &self.w.twin_covector())
    }

    pub fn validate(&self, q: &dyn Potential<T>) -> Result<()> {
        let cfg = |field: &str, message: String| Err(Error::Config { field: field.into(), message });
        if self.v.dim() != self.w.dim() {
            return cfg("probe", format!("V has dimension {} but W has {}", self.v.dim(), self.w.dim()));
        }
        if self.w.sign() != -1 {
            return cfg("probe.w_sign", "W must be (-1, omega)".into());
        }
        if !(self.t0 < self.t_meas && self.t_meas < self.t1) {
            return cfg("window", format!("need T0 < T' < T, got {} {} {}", self.t0, self.t_meas, self.t1));
        }
        if self.h_list.windows(2).any(|p| !(p[1] < p[0])) || self.h_list.iter().any(|&h| !(h > T::zero())) {
            return cfg("h_list", "wavelengths must be positive and strictly decreasing".into());
        }
        if self.v.sign() == self.w.sign() {
            let d: T = self.v.direction().iter().zip(self.w.direction()).map(|(a, b)| (*a - *b).abs()).sum();
            if d.to_f64_lossy() < 1e-12 {
                return cfg("probe", "omega must differ from theta when V and W have the same sign".into());
            }
        }
        self.phi.validate()?;
        self.chi.validate()?;
        if self.chi.support().is_none() {
            return cfg("chi", "chi must be compactly supported".into());
        }
        if !(self.dx > T::zero()) {
            return cfg("grid.dx", "amplitude spacing must be positive".into());
        }
        self.check_inflow_separation(q)
    }

    /// The packet at `T0` and the support of `q` are at least two cells apart along the flow.
    pub fn check_inflow_separation(&self, q: &dyn Potential<T>) -> Result<()> {
        let r = match q.support() {
            Support::Empty => return Ok(()),
            s => s.spatial_radius(),
        };
        let (lo, _) = self.chi.support().expect("validated");
        // chi_W(T0, x) != 0 needs x.omega > lo - T0; the packet moves along -omega
        let gap = lo - self.t0 - r;
        let need = T::lit(2.0) * self.dx;
        if gap < need {
            return Err(Error::Config {
                field: "window.t0".into(),
                message: format!("incident packet at T0 is {gap} from supp q along the flow, need >= {need}"),
            });
        }
        Ok(())
    }

    /// Amplitude box covering the packet strip over the window and the wave zone around `supp q`.
    pub fn amplitude_box(&self, q: &dyn Potential<T>) -> ([T; 2], [T; 2]) {
        if let Some(b) = self.bbox {
            return b;
        }
        let (clo, chi) = self.chi.support().expect("validated");
        let span = self.t1 - self.t0;
        let r = q.support().spatial_radius();
        let margin = T::lit(8.0) * self.dx;
        let reach = (clo - self.t1).abs().max((chi - self.t0).abs()).max(r + span) + margin;
        if self.dim() == 1 {
            ([-reach, T::zero()], [reach, T::zero()])
        } else {
            ([-reach, -reach], [reach, reach])
        }
    }

    pub fn spacetime_grid(&self, q: &dyn Potential<T>) -> Result<SpacetimeGrid<T>> {
        let (lo, hi) = self.amplitude_box(q);
        let g = Grid::covering(self.dim(), lo, hi, self.dx)?;
        SpacetimeGrid::with_levels(g, self.t0, self.t_meas, self.t1)
    }

    /// `chi_W(x) (A - iB) / 2`.
    pub fn inflow(&self, x: &[T; 4]) -> Complex<T> {
        self.inflow_amplitude() * self.chi.value(self.w.dot_coords(x))
    }

    /// `u_inc = phi_V + h chi_W (A cos(psi/h) + B sin(psi/h))` and its spacetime gradient; an exact
    /// solution of the linear wave equation.
    pub fn incident(&self, h: T, x: &[T; 4]) -> (T, [T; 4]) {
        let (phi, dphi, _) = self.phi.eval(self.v.dot_coords(x));
        let psi = self.w.dot_coords(x);
        let (chi, dchi, _) = self.chi.eval(psi);
        let (sn, cs) = (psi / h).sin_cos();
        let osc = self.a * cs + self.b * sn;
        let dosc = self.b * cs - self.a * sn;
        let vt = self.v.twin_covector();
        let wt = self.w.twin_covector();
        let g = h * dchi * osc + chi * dosc;
        let mut grad = [T::zero(); 4];
        for j in 0..4 {
            grad[j] = dphi * vt[j] + g * wt[j];
        }
        (phi + h * chi * osc, grad)
    }
}
