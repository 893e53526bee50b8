//! Numerical tolerances shared across the crate.

/// Allowed deviation of a light vector's spatial direction from unit length.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Step sizes for centered-difference consistency checks of profiles and potentials.
pub const FD_CHECK_STEPS: [f64; 2] = [1e-3, 5e-4];

/// Upper bound for the centered-difference step used by exterior derivatives.
pub const EXTERIOR_STEP_CAP: f64 = 1e-3;

/// Largest admissible value of dt * sqrt(n) / dx.
pub const CFL_LIMIT: f64 = 0.9;

/// Default Courant factor: dt = CFL_DEFAULT * dx / sqrt(n).
pub const CFL_DEFAULT: f64 = 0.45;

/// Minimum samples per carrier wavelength for residual and demodulation grids.
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 16.0;

/// Absolute tolerance of adaptive Simpson ray quadrature.
pub const RAY_QUADRATURE_TOL: f64 = 1e-9;

/// Growth factor of the solution norm that counts as blow-up.
pub const BLOWUP_FACTOR: f64 = 1e6;

/// Fraction of the maximal incident envelope below which log-recovery refuses a sample.
pub const CHI_FLOOR_FRACTION: f64 = 0.1;

/// Angles whose missing-sample fraction exceeds this value are dropped.
pub const MAX_MISSING_FRACTION: f64 = 0.3;

/// Minimum number of uniformly spaced directions for filtered backprojection.
pub const FBP_MIN_ANGLES: usize = 90;

/// Ramp filter apodization starts at this fraction of the Nyquist frequency.
pub const RAMP_APODIZATION_START: f64 = 0.9;

/// Cells of empty margin required between a compactly supported field and the box edge.
pub const SUPPORT_MARGIN_CELLS: usize = 2;
