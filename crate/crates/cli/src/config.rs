//! Scenario files: TOML with one section per concern, validated before dispatch.

use serde::{Deserialize, Serialize};

use nullform_core::geoptics::AnsatzSpec;
use nullform_core::grid::Order;
use nullform_core::minkowski::LightVector;
use nullform_core::potential::{catalog, catalog_keys, Potential};
use nullform_core::profile::Profile;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Forward,
    Ansatz,
    Residual,
    Picard,
    Energy,
    Recover,
    Certify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub pipeline: Pipeline,
    pub dim: usize,
    /// Only used for phantom jitter and the energy suite.
    #[serde(default)]
    pub seed: u64,
    /// Truncation order `N` of the ansatz.
    #[serde(default = "one")]
    pub order: usize,
    #[serde(default)]
    pub h_list: Vec<f64>,
    #[serde(default)]
    pub potential: PotentialCfg,
    pub phi: Option<ProfileCfg>,
    pub chi: Option<ProfileCfg>,
    pub probe: Option<ProbeCfg>,
    pub window: Option<WindowCfg>,
    #[serde(default)]
    pub grid: GridCfg,
    pub forward: Option<ForwardCfg>,
    pub picard: Option<PicardCfg>,
    pub energy: Option<EnergyCfg>,
    pub recover: Option<RecoverCfg>,
    pub certify: Option<CertifyCfg>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialCfg {
    pub key: String,
    #[serde(default = "unit")]
    pub amplitude: f64,
    #[serde(default = "half")]
    pub radius: f64,
    #[serde(default)]
    pub center: Vec<f64>,
}

fn unit() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

impl Default for PotentialCfg {
    fn default() -> Self {
        PotentialCfg { key: "zero".into(), amplitude: 1.0, radius: 0.5, center: vec![] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileCfg {
    Bump {
        center: f64,
        radius: f64,
        #[serde(default)]
        poly: Vec<f64>,
    },
    Cosine {
        center: f64,
        radius: f64,
        power: u32,
    },
    Ramp {
        center: f64,
        half_width: f64,
        delta: f64,
    },
    Constant {
        value: f64,
    },
}

impl ProfileCfg {
    pub fn build(&self) -> Profile<f64> {
        match self {
            ProfileCfg::Bump { center, radius, poly } => {
                Profile::Bump { center: *center, radius: *radius, poly: if poly.is_empty() { vec![1.0] } else { poly.clone() } }
            }
            ProfileCfg::Cosine { center, radius, power } => Profile::cosine(*center, *radius, *power),
            ProfileCfg::Ramp { center, half_width, delta } => Profile::ramp(*center, *half_width, *delta),
            ProfileCfg::Constant { value } => Profile::Constant { value: *value },
        }
    }
}

/// Profile kinds with their parameters, for `list-catalog`.
pub const PROFILE_KINDS: [(&str, &str); 4] = [
    ("bump", "center, radius, poly = [] : P(s - c) exp(1 - 1/(1 - ((s - c)/r)^2))"),
    ("cosine", "center, radius, power : cos^(2 power)(pi (s - c) / (2 r))"),
    ("ramp", "center, half_width, delta : slope-one ramp returning to zero"),
    ("constant", "value"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCfg {
    pub v_sign: i8,
    pub v_direction: Vec<f64>,
    pub w_sign: i8,
    pub w_direction: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowCfg {
    pub t0: f64,
    pub t_meas: f64,
    pub t1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StencilOrder {
    Second,
    Fourth,
}

impl From<StencilOrder> for Order {
    fn from(o: StencilOrder) -> Order {
        match o {
            StencilOrder::Second => Order::Second,
            StencilOrder::Fourth => Order::Fourth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    /// Spacing of the amplitude grid.
    #[serde(default = "amp_dx")]
    pub dx: f64,
    /// Samples per carrier wavelength on wave-solver and slice grids.
    #[serde(default = "ppw")]
    pub points_per_wavelength: f64,
    /// Half side of the wave-solver box.
    #[serde(default = "box_half")]
    pub half_width: f64,
    #[serde(default = "fourth")]
    pub stencil: StencilOrder,
}

fn amp_dx() -> f64 {
    0.01
}
fn ppw() -> f64 {
    16.0
}
fn box_half() -> f64 {
    3.2
}
fn fourth() -> StencilOrder {
    StencilOrder::Fourth
}

impl Default for GridCfg {
    fn default() -> Self {
        GridCfg { dx: amp_dx(), points_per_wavelength: ppw(), half_width: box_half(), stencil: fourth() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardCfg {
    /// Grid levels combined into the FDTD reference (1 to 3).
    #[serde(default = "three")]
    pub levels: usize,
    #[serde(default = "two")]
    pub correctors: usize,
}

fn three() -> usize {
    3
}
fn two() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardCfg {
    pub h: f64,
    pub lambda: f64,
    /// Sobolev order of the norm; defaults to `n/2 + 2` rounded up.
    pub m: Option<usize>,
    #[serde(default = "picard_tol")]
    pub tol: f64,
    #[serde(default = "twelve")]
    pub max_iter: usize,
}

fn picard_tol() -> f64 {
    1e-10
}
fn twelve() -> usize {
    12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyCfg {
    #[serde(default = "twenty")]
    pub cases: usize,
    #[serde(default = "energy_dx")]
    pub dx: f64,
    #[serde(default = "two_f")]
    pub t_end: f64,
    #[serde(default = "four")]
    pub stride: usize,
    #[serde(default = "fifty")]
    pub c_cap: f64,
}

fn twenty() -> usize {
    20
}
fn energy_dx() -> f64 {
    0.02
}
fn two_f() -> f64 {
    2.0
}
fn four() -> usize {
    4
}
fn fifty() -> f64 {
    50.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeCfg {
    Synthetic,
    Fdtd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodCfg {
    Fbp,
    Rls,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverCfg {
    pub mode: ModeCfg,
    pub h: f64,
    #[serde(default = "n_angles")]
    pub n_angles: usize,
    #[serde(default = "fbp")]
    pub method: MethodCfg,
    #[serde(default = "reg")]
    pub reg: f64,
    #[serde(default = "recon_n")]
    pub recon_n: usize,
    #[serde(default = "recon_half")]
    pub recon_half_width: f64,
    #[serde(default)]
    pub richardson: bool,
    /// Defaults to on for FDTD measurements.
    pub refocus: Option<bool>,
    /// Uniform jitter of the phantom centre, drawn from `seed`.
    #[serde(default)]
    pub jitter: f64,
    /// Pass mark for the relative L2 error against the phantom.
    pub max_error: Option<f64>,
}

fn n_angles() -> usize {
    180
}
fn fbp() -> MethodCfg {
    MethodCfg::Fbp
}
fn reg() -> f64 {
    1e-4
}
fn recon_n() -> usize {
    64
}
fn recon_half() -> f64 {
    0.9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyCfg {
    #[serde(default = "cert_n")]
    pub n_per_axis: usize,
    #[serde(default = "unit")]
    pub half: f64,
    pub profiles: Vec<ProfileCfg>,
    /// Number of light vectors, spread over both time orientations.
    #[serde(default = "four")]
    pub directions: usize,
    #[serde(default = "cert_tol")]
    pub tolerance: f64,
}

fn cert_n() -> usize {
    64
}
fn cert_tol() -> f64 {
    1e-3
}

fn field(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), message: message.into() }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::new(text);
        let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let name = if path == "." { "config".to_string() } else { path };
            field(&name, e.into_inner().message().to_string())
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(field("name", "use letters, digits, '_' and '-' only"));
        }
        if !(1..=2).contains(&self.dim) {
            return Err(field("dim", format!("must be 1 or 2, got {}", self.dim)));
        }
        if !catalog_keys().iter().any(|(k, _)| *k == self.potential.key) {
            return Err(field("potential.key", format!("unknown catalog key `{}`; see `nullform list-catalog`", self.potential.key)));
        }
        if self.potential.center.len() > 3 {
            return Err(field("potential.center", "at most three components"));
        }
        if self.potential.radius <= 0.0 {
            return Err(field("potential.radius", "must be positive"));
        }
        for (name, p) in [("phi", &self.phi), ("chi", &self.chi)] {
            if let Some(p) = p {
                p.build().validate().map_err(|e| field(name, e.to_string()))?;
            }
        }
        if self.grid.dx <= 0.0 {
            return Err(field("grid.dx", "must be positive"));
        }
        if self.grid.points_per_wavelength < 16.0 {
            return Err(field("grid.points_per_wavelength", "need at least 16"));
        }
        if self.h_list.iter().any(|&h| h <= 0.0) {
            return Err(field("h_list", "wavelengths must be positive"));
        }
        let need = |present: bool, name: &str| {
            if present {
                Ok(())
            } else {
                Err(field(name, format!("required by the {:?} pipeline", self.pipeline)))
            }
        };
        match self.pipeline {
            Pipeline::Forward | Pipeline::Ansatz | Pipeline::Residual | Pipeline::Picard => {
                need(self.phi.is_some(), "phi")?;
                need(self.chi.is_some(), "chi")?;
                need(self.probe.is_some(), "probe")?;
                need(self.window.is_some(), "window")?;
                self.ansatz_spec()?;
                match self.pipeline {
                    Pipeline::Picard => need(self.picard.is_some(), "picard")?,
                    Pipeline::Residual if self.h_list.len() < 2 => return Err(field("h_list", "need at least two wavelengths")),
                    Pipeline::Forward | Pipeline::Ansatz if self.h_list.is_empty() => {
                        return Err(field("h_list", "need at least one wavelength"))
                    }
                    _ => {}
                }
                if let Some(f) = &self.forward {
                    if !(1..=3).contains(&f.levels) {
                        return Err(field("forward.levels", "must be 1, 2 or 3"));
                    }
                }
            }
            Pipeline::Energy => need(self.energy.is_some(), "energy")?,
            Pipeline::Recover => {
                need(self.recover.is_some(), "recover")?;
                if self.dim != 2 {
                    return Err(field("dim", "recovery works in two space dimensions"));
                }
                let r = self.recover.as_ref().expect("checked");
                if r.h <= 0.0 {
                    return Err(field("recover.h", "must be positive"));
                }
                if r.n_angles == 0 {
                    return Err(field("recover.n_angles", "need at least one direction"));
                }
            }
            Pipeline::Certify => {
                let c = self.certify.as_ref().ok_or_else(|| field("certify", "required by the Certify pipeline"))?;
                if c.profiles.is_empty() {
                    return Err(field("certify.profiles", "need at least one profile"));
                }
                if c.directions == 0 {
                    return Err(field("certify.directions", "need at least one direction"));
                }
                if c.n_per_axis < 2 {
                    return Err(field("certify.n_per_axis", "need at least 2"));
                }
            }
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<Box<dyn Potential<f64>>, CliError> {
        let mut c = [0.0; 3];
        for (i, v) in self.potential.center.iter().enumerate() {
            c[i] = *v;
        }
        catalog(&self.potential.key, self.potential.amplitude, self.potential.radius, c).map_err(|e| field("potential", e.to_string()))
    }

    pub fn ansatz_spec(&self) -> Result<AnsatzSpec<f64>, CliError> {
        let probe = self.probe.as_ref().ok_or_else(|| field("probe", "missing"))?;
        let win = self.window.as_ref().ok_or_else(|| field("window", "missing"))?;
        let light = |name: &str, sign: i8, d: &[f64]| {
            if d.len() != self.dim {
                return Err(field(name, format!("direction needs {} components", self.dim)));
            }
            LightVector::normalized(sign, d).map_err(|e| field(name, e.to_string()))
        };
        let spec = AnsatzSpec {
            order: self.order,
            h_list: self.h_list.clone(),
            t0: win.t0,
            t_meas: win.t_meas,
            t1: win.t1,
            dx: self.grid.dx,
            v: light("probe.v_direction", probe.v_sign, &probe.v_direction)?,
            w: light("probe.w_direction", probe.w_sign, &probe.w_direction)?,
            phi: self.phi.as_ref().ok_or_else(|| field("phi", "missing"))?.build(),
            chi: self.chi.as_ref().ok_or_else(|| field("chi", "missing"))?.build(),
            a: probe.a,
            b: probe.b,
            bbox: None,
        };
        let q = self.potential()?;
        spec.validate(q.as_ref()).map_err(|e| match e {
            nullform_core::Error::Config { field: f, message } => field(&f, message),
            other => field("scenario", other.to_string()),
        })?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RESIDUAL: &str = r#"
name = "r"
pipeline = "residual"
dim = 1
h_list = [0.0625, 0.03125]

[potential]
key = "bump_linear_u"

[phi]
kind = "bump"
center = 0.0
radius = 1.5

[chi]
kind = "cosine"
center = 0.0
radius = 0.4
power = 4

[probe]
v_sign = 1
v_direction = [1.0]
w_sign = -1
w_direction = [1.0]
a = 1.0
b = 0.5

[window]
t0 = -1.5
t_meas = 1.0
t1 = 1.5
"#;

    fn err_field(text: &str) -> String {
        match Scenario::parse(text) {
            Err(CliError::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_and_fills_defaults() {
        let s = Scenario::parse(RESIDUAL).unwrap();
        assert_eq!(s.pipeline, Pipeline::Residual);
        assert_eq!(s.order, 1);
        assert_eq!(s.grid, GridCfg::default());
        assert_eq!(s.ansatz_spec().unwrap().chi, Profile::cosine(0.0, 0.4, 4));
    }

    #[test]
    fn bad_fields_are_named() {
        assert_eq!(err_field(&RESIDUAL.replace("key = \"bump_linear_u\"", "key = \"nope\"")), "potential.key");
        assert_eq!(err_field(&RESIDUAL.replace("dim = 1", "dim = 3")), "dim");
        assert_eq!(err_field(&RESIDUAL.replace("h_list = [0.0625, 0.03125]", "h_list = [0.0625]")), "h_list");
        assert_eq!(err_field(&RESIDUAL.replace("w_direction = [1.0]", "w_direction = [1.0, 0.0]")), "probe.w_direction");
        assert_eq!(err_field(&RESIDUAL.replace("a = 1.0", "a = \"one\"")), "probe.a");
        assert!(matches!(Scenario::parse(&RESIDUAL.replace("[window]", "[windw]")), Err(CliError::Config { .. })));
    }
}
