//! Gravitational time dilation rebuilt from a tunneling delay.
//!
//! A test particle of kinetic energy `E0 = m0 c^2` "tunnels" a causal distance
//! `d0` through a potential `b M c^2 / r` set by the gravitating mass. The
//! resulting delay, scaled by `A0 = c / (sqrt(2) d0)`, is the dilation factor
//! `1 / sqrt(1 - b M c^2 / (r E0))`; with `b = 2 G E0 / c^4` that is the
//! Schwarzschild factor `1 / sqrt(1 - 2 G M / (r c^2))`.

use std::f64::consts::SQRT_2;

use thiserror::Error;

use crate::units::{planck_length, C, G, HBAR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DilationError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("at or inside the horizon: Schwarzschild ratio {x} >= 1")]
    Horizon { x: f64 },
}

/// `d0 = c / sqrt(2) * 1 s`, which makes `A0 = 1 s^-1`.
pub fn default_d0() -> f64 {
    C / SQRT_2
}

/// Zero-point energy fixed by the length `b`: `E0 = b c^4 / (2 G)`.
pub fn zero_point_energy(b: f64) -> f64 {
    b * C.powi(4) / (2.0 * G)
}

/// Inverse of [`zero_point_energy`]: `b = 2 G E0 / c^4`.
pub fn canonical_b(e0: f64) -> f64 {
    2.0 * G * e0 / C.powi(4)
}

pub fn schwarzschild_ratio(mass: f64, radius: f64) -> f64 {
    2.0 * G * mass / (radius * C * C)
}

pub fn schwarzschild_radius(mass: f64) -> f64 {
    2.0 * G * mass / (C * C)
}

/// Inputs to the dilation construction, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationParams {
    pub mass: f64,
    pub radius: f64,
    pub d0: f64,
    pub b: f64,
    pub e0: f64,
    /// Always `e0 / c^2`.
    pub m0: f64,
    /// Proportionality in `V0 = a M c^2`. Never fixed; the `1/r` form with
    /// `b` replaces it before any value is needed.
    pub a: Option<f64>,
}

impl DilationParams {
    /// Canonical parameters: `b = l_p`, `E0 = b c^4 / (2G)`, default `d0`.
    pub fn new(mass: f64, radius: f64) -> Result<Self, DilationError> {
        Self::with_b(mass, radius, planck_length(), default_d0())
    }

    /// Canonical parameters for a chosen `b` and `d0`; `E0` and `m0` follow.
    pub fn with_b(mass: f64, radius: f64, b: f64, d0: f64) -> Result<Self, DilationError> {
        Self::with_raw(mass, radius, d0, b, zero_point_energy(b))
    }

    /// Free choice of `b` and `E0`. Only `b = 2 G E0 / c^4` reproduces the
    /// Schwarzschild factor.
    pub fn with_raw(mass: f64, radius: f64, d0: f64, b: f64, e0: f64) -> Result<Self, DilationError> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(DilationError::Domain(msg)) };
        check(mass.is_finite() && mass >= 0.0, format!("mass must be >= 0, got {mass:e}"))?;
        check(radius.is_finite() && radius > 0.0, format!("radius must be > 0, got {radius:e}"))?;
        check(d0.is_finite() && d0 > 0.0, format!("d0 must be > 0, got {d0:e}"))?;
        check(b.is_finite() && b > 0.0, format!("b must be > 0, got {b:e}"))?;
        check(e0.is_finite() && e0 > 0.0, format!("E0 must be > 0, got {e0:e}"))?;
        Ok(Self {
            mass,
            radius,
            d0,
            b,
            e0,
            m0: e0 / (C * C),
            a: None,
        })
    }

    /// Effective potential `b M c^2 / r`, joules.
    pub fn potential(&self) -> f64 {
        self.b * self.mass * C * C / self.radius
    }

    /// `b M c^2 / (r E0)`; equals the Schwarzschild ratio for canonical `b`.
    pub fn tunneling_ratio(&self) -> f64 {
        self.potential() / self.e0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Potential at or above `E0`: a real decay exponent.
    Tunneling,
    /// Potential below `E0`; transmission clamps to 1.
    Propagating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseTransmission {
    pub regime: Regime,
    pub transmission: f64,
    /// `ln T_c`, finite even when `T_c` underflows.
    pub log_transmission: f64,
}

/// `T_c = exp(-2 d0 sqrt(2 m0 / hbar^2 (b M c^2 / r - E0)))`.
pub fn collapse_transmission(params: &DilationParams) -> Result<CollapseTransmission, DilationError> {
    if !(params.radius > 0.0) {
        return Err(DilationError::Domain(format!("radius must be > 0, got {:e}", params.radius)));
    }
    let excess = params.potential() - params.e0;
    if excess < 0.0 {
        return Ok(CollapseTransmission {
            regime: Regime::Propagating,
            transmission: 1.0,
            log_transmission: 0.0,
        });
    }
    let log_t = -2.0 * params.d0 * (2.0 * params.m0 * excess).sqrt() / HBAR;
    Ok(CollapseTransmission {
        regime: Regime::Tunneling,
        transmission: log_t.exp(),
        log_transmission: log_t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationResult {
    pub schwarzschild_ratio: f64,
    /// Magnitude of the tunneling delay, seconds.
    pub t_t: f64,
    /// `c / (sqrt(2) d0)`, s^-1.
    pub a0: f64,
    pub delta_t_min: f64,
}

/// Dilation factor from the tunneling delay, `A0 * |t_T|`.
pub fn dilation_tunneling(params: &DilationParams) -> Result<DilationResult, DilationError> {
    let x = params.tunneling_ratio();
    if !(x < 1.0) {
        return Err(DilationError::Horizon { x });
    }
    let a0_sq = C * C / (2.0 * params.d0 * params.d0);
    // t_T = 1 / (i sqrt(a0^2 (1 - x))); the magnitude drops the i.
    let t_t = (1.0 / (a0_sq * (1.0 - x)).sqrt()).abs();
    let a0 = a0_sq.sqrt();
    Ok(DilationResult {
        schwarzschild_ratio: x,
        t_t,
        a0,
        delta_t_min: a0 * t_t,
    })
}

/// Reference Schwarzschild factor `1 / sqrt(1 - 2 G M / (r c^2))`.
pub fn dilation_gr(mass: f64, radius: f64) -> Result<f64, DilationError> {
    if !(mass >= 0.0) {
        return Err(DilationError::Domain(format!("mass must be >= 0, got {mass:e}")));
    }
    if !(radius > 0.0) {
        return Err(DilationError::Domain(format!("radius must be > 0, got {radius:e}")));
    }
    let x = schwarzschild_ratio(mass, radius);
    if !(x < 1.0) {
        return Err(DilationError::Horizon { x });
    }
    Ok(1.0 / (1.0 - x).sqrt())
}

/// `dilation_gr - 1` without cancellation: `x / (s (1 + s))`, `s = sqrt(1 - x)`.
pub fn dilation_excess(mass: f64, radius: f64) -> Result<f64, DilationError> {
    dilation_gr(mass, radius)?;
    let x = schwarzschild_ratio(mass, radius);
    let s = (1.0 - x).sqrt();
    Ok(x / (s * (1.0 + s)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub b: f64,
    pub d0: f64,
    /// s^-1
    pub a0: f64,
    /// J
    pub e0: f64,
    /// kg
    pub m0: f64,
    /// `E0 / b^3`, J m^-3.
    pub rho_e: f64,
    /// `c^7 / (2 G^2 hbar)`, J m^-3.
    pub rho_e_closed: f64,
}

/// `A0`, `E0`, `m0` and both vacuum-energy-density forms for given `b`, `d0`.
/// The two densities coincide when `b` is the Planck length.
pub fn derive_constants(b: f64, d0: f64) -> Result<DerivedConstants, DilationError> {
    if !(b.is_finite() && b > 0.0) {
        return Err(DilationError::Domain(format!("b must be > 0, got {b:e}")));
    }
    if !(d0.is_finite() && d0 > 0.0) {
        return Err(DilationError::Domain(format!("d0 must be > 0, got {d0:e}")));
    }
    let e0 = zero_point_energy(b);
    Ok(DerivedConstants {
        b,
        d0,
        a0: C / (SQRT_2 * d0),
        e0,
        m0: e0 / (C * C),
        rho_e: e0 / (b * b * b),
        rho_e_closed: C.powi(7) / (2.0 * G * G * HBAR),
    })
}
