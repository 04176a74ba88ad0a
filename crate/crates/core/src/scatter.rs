//! One-dimensional scattering through piecewise-constant potentials.
//!
//! [`transfer_matrix_scatter`] is exact for any staircase profile.
//! [`opaque_transmission`] keeps only the dominant `exp(-2 kappa L)` factor of
//! a single rectangular barrier.

use num_complex::Complex64;
use thiserror::Error;

use crate::units::{DimensionVector, Quantity, HBAR};

/// Relative closeness of `E` to a segment height treated as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatterError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("energy {energy:e} J coincides with segment {segment} height; perturb the energy")]
    DegenerateWavevector { energy: f64, segment: usize },
    #[error("unsupported profile: {0}")]
    UnsupportedProfile(String),
    #[error("arithmetic range error: {0}")]
    Range(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Width in metres, strictly positive.
    pub width: f64,
    /// Potential height in joules.
    pub height: f64,
}

/// Staircase potential with zero potential on both sides, plus the particle
/// mass. Units are SI throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    segments: Vec<Segment>,
    mass: f64,
}

impl PotentialProfile {
    pub fn new(segments: Vec<Segment>, mass: f64) -> Result<Self, ScatterError> {
        if segments.is_empty() {
            return Err(ScatterError::InvalidProfile("at least one segment is required".into()));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(ScatterError::InvalidProfile(format!("mass must be positive, got {mass:e}")));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.width.is_finite() && s.width > 0.0) {
                return Err(ScatterError::InvalidProfile(format!(
                    "segment {i} width must be positive, got {:e}",
                    s.width
                )));
            }
            if !s.height.is_finite() {
                return Err(ScatterError::InvalidProfile(format!("segment {i} height is not finite")));
            }
        }
        let total: f64 = segments.iter().map(|s| s.width).sum();
        if !total.is_finite() {
            return Err(ScatterError::InvalidProfile("total width is not finite".into()));
        }
        Ok(Self { segments, mass })
    }

    /// Single rectangular barrier of height `v0` (J) and width `width` (m).
    pub fn rectangular(v0: f64, width: f64, mass: f64) -> Result<Self, ScatterError> {
        Self::new(vec![Segment { width, height: v0 }], mass)
    }

    /// Build from dimensioned quantities, checking each dimension.
    pub fn from_quantities(segments: &[(Quantity, Quantity)], mass: Quantity) -> Result<Self, ScatterError> {
        let want = |q: &Quantity, d: DimensionVector, what: &str| {
            if *q.dim() == d {
                Ok(q.value())
            } else {
                Err(ScatterError::InvalidProfile(format!("{what} has dimension {}, expected {d}", q.dim())))
            }
        };
        let segs = segments
            .iter()
            .map(|(w, h)| {
                Ok(Segment {
                    width: want(w, DimensionVector::length(), "width")?,
                    height: want(h, DimensionVector::energy(), "height")?,
                })
            })
            .collect::<Result<Vec<_>, ScatterError>>()?;
        Self::new(segs, want(&mass, DimensionVector::mass(), "mass")?)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn total_width(&self) -> f64 {
        self.segments.iter().map(|s| s.width).sum()
    }

    /// The single segment of a rectangular barrier.
    pub fn single(&self) -> Result<Segment, ScatterError> {
        match self.segments.as_slice() {
            [s] => Ok(*s),
            _ => Err(ScatterError::UnsupportedProfile(format!(
                "closed form needs a single segment, profile has {}",
                self.segments.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringResult {
    pub energy: f64,
    pub t_amp: Complex64,
    pub r_amp: Complex64,
    pub t_prob: f64,
    pub r_prob: f64,
}

impl ScatteringResult {
    pub fn unitarity_defect(&self) -> f64 {
        (self.t_prob + self.r_prob - 1.0).abs()
    }
}

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone, Copy)]
struct Mat2([Complex64; 4]);

impl Mat2 {
    fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Mat2([o, z, z, o])
    }

    fn mul(&self, rhs: &Mat2) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = rhs.0;
        Mat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

/// Wavevector in a region of potential `v`: real above the potential,
/// `i kappa` below it.
fn wavevector(mass: f64, energy: f64, v: f64) -> Complex64 {
    let diff = energy - v;
    let k = (2.0 * mass * diff.abs()).sqrt() / HBAR;
    if diff >= 0.0 {
        Complex64::new(k, 0.0)
    } else {
        Complex64::new(0.0, k)
    }
}

/// Maps `(A, B)` on the left of an interface to the right, for
/// `psi = A e^{ikx} + B e^{-ikx}` matched in value and slope.
fn interface(k_left: Complex64, k_right: Complex64) -> Mat2 {
    let ratio = k_left / k_right;
    let half = Complex64::new(0.5, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let p = half * (one + ratio);
    let m = half * (one - ratio);
    Mat2([p, m, m, p])
}

fn propagate(k: Complex64, width: f64) -> Mat2 {
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    Mat2([(i * k * width).exp(), z, z, (-i * k * width).exp()])
}

/// Exact transmission and reflection for a particle of energy `energy` (J)
/// incident from the left.
pub fn transfer_matrix_scatter(profile: &PotentialProfile, energy: f64) -> Result<ScatteringResult, ScatterError> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(ScatterError::Domain(format!("energy must be positive, got {energy:e}")));
    }
    for (i, s) in profile.segments.iter().enumerate() {
        let scale = energy.abs().max(s.height.abs());
        if (energy - s.height).abs() <= DEGENERACY_TOLERANCE * scale {
            return Err(ScatterError::DegenerateWavevector { energy, segment: i });
        }
    }
    let m = profile.mass;
    let k_out = wavevector(m, energy, 0.0);
    let mut total = Mat2::identity();
    let mut k_prev = k_out;
    for s in &profile.segments {
        let k = wavevector(m, energy, s.height);
        total = propagate(k, s.width).mul(&interface(k_prev, k)).mul(&total);
        k_prev = k;
    }
    total = interface(k_prev, k_out).mul(&total);

    // Both outer regions share k, so det(total) is exactly 1; forming it from
    // the entries would cancel catastrophically for thick barriers.
    let [_, _, m21, m22] = total.0;
    let r_amp = -m21 / m22;
    let t_amp = m22.inv();
    let (t_prob, r_prob) = (t_amp.norm_sqr(), r_amp.norm_sqr());
    if !(t_prob.is_finite() && r_prob.is_finite()) {
        return Err(ScatterError::Range(
            "transfer matrix overflowed; barrier too thick for f64".into(),
        ));
    }
    Ok(ScatteringResult {
        energy,
        t_amp,
        r_amp,
        t_prob,
        r_prob,
    })
}

/// `kappa = sqrt(2 m (V0 - E)) / hbar` for a barrier above the energy.
pub fn decay_constant(mass: f64, v0: f64, energy: f64) -> f64 {
    (2.0 * mass * (v0 - energy)).sqrt() / HBAR
}

/// Opaque-barrier transmission `exp(-2 kappa L)` for a single segment with
/// `0 < E < V0`.
pub fn opaque_transmission(profile: &PotentialProfile, energy: f64) -> Result<f64, ScatterError> {
    let seg = profile.single()?;
    if !(energy.is_finite() && energy > 0.0) {
        return Err(ScatterError::Domain(format!("energy must be positive, got {energy:e}")));
    }
    if energy >= seg.height {
        return Err(ScatterError::Domain(format!(
            "opaque form needs E < V0 (E = {energy:e} J, V0 = {:e} J)",
            seg.height
        )));
    }
    Ok((-2.0 * decay_constant(profile.mass, seg.height, energy) * seg.width).exp())
}
