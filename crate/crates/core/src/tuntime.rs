//! Tunneling delay `t_T = hbar * |d ln T / dE|`.
//!
//! For the opaque rectangular barrier `T = exp(-2 kappa L)` the derivative is
//! analytic and gives `t_T = L * sqrt(2 m / (V0 - E))`. Any other
//! transmission function goes through [`tunneling_time_fd`], a central
//! difference with one Richardson step.
//!
//! Note on the factor of two: writing the delay as `(L m / hbar) / kappa`
//! is half of `hbar * d(-2 kappa L)/dE = 2 L m / (hbar kappa)`. The latter is
//! what the opaque transmission actually differentiates to, so
//! [`tunneling_time_closed`] returns `L * sqrt(2 m / (V0 - E))`.

use thiserror::Error;

use crate::scatter::{PotentialProfile, ScatterError};
use crate::units::HBAR;

/// Acceptance threshold on `estimated_error / t_T`.
pub const FD_ACCEPT_RELATIVE: f64 = 1e-4;
/// Smallest initial step, in joules.
pub const FD_MIN_STEP: f64 = 1e-30;
/// Relative initial step `h0 = |E| * FD_RELATIVE_STEP`.
pub const FD_RELATIVE_STEP: f64 = 1e-5;
/// Step halvings tried before giving up.
pub const FD_MAX_REFINEMENTS: usize = 12;
/// Default ratio `t_T / t_T(E = 0)` above which the closed form reports
/// divergence; `1e3` corresponds to `V0 - E < 1e-6 V0`.
pub const DEFAULT_DIVERGENCE_RATIO: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TunnelTimeError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("tunneling time diverges near the barrier top: {t_t:e} s exceeds ceiling {ceiling:e} s")]
    Divergence { t_t: f64, ceiling: f64 },
    #[error("finite difference did not converge: relative error {relative_error:e} at step {step:e} J")]
    Convergence { relative_error: f64, step: f64 },
    #[error(transparent)]
    Scatter(#[from] ScatterError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunnelingTimeResult {
    /// Energy in joules.
    pub energy: f64,
    /// Delay in seconds.
    pub t_t: f64,
    pub method: Method,
    /// Final step in joules; zero for the closed form.
    pub step_used: f64,
    /// Error estimate in seconds; zero for the closed form.
    pub estimated_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormOptions {
    pub divergence_ratio: f64,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        Self {
            divergence_ratio: DEFAULT_DIVERGENCE_RATIO,
        }
    }
}

pub fn tunneling_time_closed(profile: &PotentialProfile, energy: f64) -> Result<TunnelingTimeResult, TunnelTimeError> {
    tunneling_time_closed_with(profile, energy, ClosedFormOptions::default())
}

pub fn tunneling_time_closed_with(
    profile: &PotentialProfile,
    energy: f64,
    opts: ClosedFormOptions,
) -> Result<TunnelingTimeResult, TunnelTimeError> {
    let seg = profile.single()?;
    let (v0, l, m) = (seg.height, seg.width, profile.mass());
    if !(energy.is_finite() && energy > 0.0) {
        return Err(TunnelTimeError::Domain(format!("energy must be positive, got {energy:e}")));
    }
    if energy >= v0 {
        return Err(TunnelTimeError::Domain(format!(
            "closed form needs E < V0 (E = {energy:e} J, V0 = {v0:e} J)"
        )));
    }
    let t_t = 1.0 / ((v0 - energy) / (2.0 * l * l * m)).sqrt();
    let ceiling = opts.divergence_ratio * l * (2.0 * m / v0).sqrt();
    if !t_t.is_finite() || t_t > ceiling {
        return Err(TunnelTimeError::Divergence { t_t, ceiling });
    }
    Ok(TunnelingTimeResult {
        energy,
        t_t,
        method: Method::ClosedForm,
        step_used: 0.0,
        estimated_error: 0.0,
    })
}

/// `hbar * |d ln T / dE|` by central differences with one Richardson level.
///
/// `transmission` must be strictly positive around `energy`; NaN or
/// non-positive samples are reported as domain errors.
pub fn tunneling_time_fd<F>(transmission: F, energy: f64) -> Result<TunnelingTimeResult, TunnelTimeError>
where
    F: Fn(f64) -> f64,
{
    if !energy.is_finite() {
        return Err(TunnelTimeError::Domain(format!("energy must be finite, got {energy}")));
    }
    let log_t = |e: f64| {
        let t = transmission(e);
        if t.is_finite() && t > 0.0 {
            Ok(t.ln())
        } else {
            Err(TunnelTimeError::Domain(format!("transmission {t:e} at E = {e:e} J is not positive")))
        }
    };
    let central = |h: f64| -> Result<f64, TunnelTimeError> { Ok((log_t(energy + h)? - log_t(energy - h)?) / (2.0 * h)) };

    let mut h = (energy.abs() * FD_RELATIVE_STEP).max(FD_MIN_STEP);
    let mut coarse = central(h)?;
    let mut last = (f64::INFINITY, h);
    for _ in 0..FD_MAX_REFINEMENTS {
        let fine = central(h / 2.0)?;
        let extrapolated = (4.0 * fine - coarse) / 3.0;
        let err = (extrapolated - fine).abs();
        let t_t = HBAR * extrapolated.abs();
        let estimated_error = HBAR * err;
        if estimated_error <= FD_ACCEPT_RELATIVE * t_t {
            return Ok(TunnelingTimeResult {
                energy,
                t_t,
                method: Method::FiniteDifference,
                step_used: h,
                estimated_error,
            });
        }
        last = (estimated_error / t_t, h);
        h /= 2.0;
        coarse = fine;
    }
    Err(TunnelTimeError::Convergence {
        relative_error: last.0,
        step: last.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scatter::{decay_constant, opaque_transmission, transfer_matrix_scatter};
    use crate::units::{EV, M_E};

    fn barrier(v0_ev: f64, l: f64) -> PotentialProfile {
        PotentialProfile::rectangular(v0_ev * EV, l, M_E).unwrap()
    }

    /// hbar * d(-2 kappa L)/dE = hbar * 2 L m / (hbar^2 kappa), from the
    /// derivative of kappa alone.
    fn analytic_oracle(m: f64, v0: f64, l: f64, e: f64) -> f64 {
        let kappa = (2.0 * m * (v0 - e)).sqrt() / HBAR;
        HBAR * 2.0 * l * m / (HBAR * HBAR * kappa)
    }

    #[test]
    fn closed_form_reference_value() {
        // mpmath: 1e-9 * sqrt(2 m_e / 5 eV) = 1.508062346664185e-15 s
        let r = tunneling_time_closed(&barrier(10.0, 1e-9), 5.0 * EV).unwrap();
        assert!((r.t_t / 1.508062346664185e-15 - 1.0).abs() < 1e-12);
        assert_eq!(r.method, Method::ClosedForm);
    }

    #[test]
    fn closed_form_scales_linearly_with_width() {
        let a = tunneling_time_closed(&barrier(10.0, 1e-9), 5.0 * EV).unwrap().t_t;
        let b = tunneling_time_closed(&barrier(10.0, 2e-9), 5.0 * EV).unwrap().t_t;
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn closed_form_errors() {
        let p = barrier(10.0, 1e-9);
        assert!(matches!(tunneling_time_closed(&p, 10.0 * EV), Err(TunnelTimeError::Domain(_))));
        assert!(matches!(tunneling_time_closed(&p, 12.0 * EV), Err(TunnelTimeError::Domain(_))));
        assert!(matches!(
            tunneling_time_closed(&p, 10.0 * EV * (1.0 - 1e-8)),
            Err(TunnelTimeError::Divergence { .. })
        ));
        let loose = ClosedFormOptions { divergence_ratio: 1e6 };
        assert!(tunneling_time_closed_with(&p, 10.0 * EV * (1.0 - 1e-8), loose).is_ok());
    }

    #[test]
    fn fd_matches_closed_form_and_analytic_oracle() {
        let p = barrier(10.0, 1e-9);
        let fd = tunneling_time_fd(|e| opaque_transmission(&p, e).unwrap_or(f64::NAN), 5.0 * EV).unwrap();
        let closed = tunneling_time_closed(&p, 5.0 * EV).unwrap().t_t;
        assert!((fd.t_t / closed - 1.0).abs() < 1e-6);
        let oracle = analytic_oracle(M_E, 10.0 * EV, 1e-9, 5.0 * EV);
        assert!((fd.t_t / oracle - 1.0).abs() < 1e-6);
        assert!(fd.estimated_error < FD_ACCEPT_RELATIVE * fd.t_t);
        assert!(fd.step_used > 0.0);
    }

    #[test]
    fn constant_transmission_has_zero_delay() {
        let r = tunneling_time_fd(|_| 0.25, 5.0 * EV).unwrap();
        assert_eq!(r.t_t, 0.0);
    }

    #[test]
    fn fd_rejects_non_positive_transmission() {
        assert!(matches!(tunneling_time_fd(|_| 0.0, EV), Err(TunnelTimeError::Domain(_))));
        let p = barrier(10.0, 1e-9);
        // the upper sample lands above the barrier
        let near_top = 10.0 * EV * (1.0 - 1e-7);
        assert!(matches!(
            tunneling_time_fd(|e| opaque_transmission(&p, e).unwrap_or(f64::NAN), near_top),
            Err(TunnelTimeError::Domain(_))
        ));
    }

    #[test]
    fn fd_on_exact_transmission_is_close_to_opaque() {
        let p = barrier(10.0, 1e-9);
        let e = 5.0 * EV;
        assert!((decay_constant(M_E, 10.0 * EV, e) * 1e-9 - 11.4557).abs() < 1e-3);
        let exact = tunneling_time_fd(|x| transfer_matrix_scatter(&p, x).map(|r| r.t_prob).unwrap_or(f64::NAN), e).unwrap();
        let closed = tunneling_time_closed(&p, e).unwrap().t_t;
        assert!(exact.t_t > 0.0 && exact.t_t.is_finite());
        let ratio = exact.t_t / closed;
        assert!((0.5..2.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn oracle_grid_50_by_50() {
        let v0 = 10.0 * EV;
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            let eps = 0.05 + 0.9 * i as f64 / 49.0;
            let e = eps * v0;
            let kappa = decay_constant(M_E, v0, e);
            for j in 0..50 {
                let kl = 2.0 + 28.0 * j as f64 / 49.0;
                let p = PotentialProfile::rectangular(v0, kl / kappa, M_E).unwrap();
                let fd = tunneling_time_fd(|x| opaque_transmission(&p, x).unwrap_or(f64::NAN), e).unwrap();
                let closed = tunneling_time_closed(&p, e).unwrap().t_t;
                let oracle = analytic_oracle(M_E, v0, kl / kappa, e);
                worst = worst.max((fd.t_t / closed - 1.0).abs());
                assert!((fd.t_t / oracle - 1.0).abs() < 1e-6);
            }
        }
        assert!(worst < 1e-6, "worst {worst}");
    }

    #[test]
    fn delay_grows_with_energy() {
        let p = barrier(10.0, 1e-9);
        let mut prev = 0.0;
        for i in 1..100 {
            let t = tunneling_time_closed(&p, 0.1 * i as f64 * EV).unwrap().t_t;
            assert!(t > 0.0 && t > prev);
            prev = t;
        }
    }

    #[test]
    fn attosecond_decade_for_atomic_barrier() {
        // Synthetic atomic-scale barrier: 1 angstrom wide, 27.2 eV high,
        // electron at 13.6 eV.
        let p = barrier(27.2, 1e-10);
        let t = tunneling_time_closed(&p, 13.6 * EV).unwrap().t_t;
        assert!((1e-17..=1e-15).contains(&t));
        assert!((80e-18..=100e-18).contains(&t), "{t}");
    }
}
