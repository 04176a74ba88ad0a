//! Dimensioned quantities with exact rational SI exponents, and the pinned
//! CODATA 2018 constants registry.
//!
//! Magnitudes are plain `f64`. The largest value this crate handles is the
//! vacuum energy density `c^7 / (2 G^2 hbar)` at roughly 2.3e113 J/m^3, with
//! `c^7` (about 2.2e59) the largest intermediate, both far below `f64::MAX`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};
use thiserror::Error;

/// Rational exponent type used for dimensions and powers.
pub type Ratio = Rational64;

/// SI base symbols in storage order.
pub const BASE_SYMBOLS: [&str; 7] = ["m", "kg", "s", "A", "K", "mol", "cd"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitsError {
    #[error("arithmetic range error: {0}")]
    Range(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch {
        left: DimensionVector,
        right: DimensionVector,
    },
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("constant `{0}` is already defined")]
    DuplicateConstant(String),
}

pub type Result<T, E = UnitsError> = std::result::Result<T, E>;

/// Exponents of the seven SI base dimensions
/// (length, mass, time, current, temperature, amount, luminosity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DimensionVector([Ratio; 7]);

impl DimensionVector {
    pub const LENGTH: usize = 0;
    pub const MASS: usize = 1;
    pub const TIME: usize = 2;

    pub fn dimensionless() -> Self {
        Self::default()
    }

    pub fn from_ints(exps: [i64; 7]) -> Self {
        Self(exps.map(Ratio::from_integer))
    }

    pub fn from_ratios(exps: [Ratio; 7]) -> Self {
        Self(exps)
    }

    /// `m^l kg^m s^t`.
    pub fn mechanical(length: i64, mass: i64, time: i64) -> Self {
        Self::from_ints([length, mass, time, 0, 0, 0, 0])
    }

    pub fn length() -> Self {
        Self::mechanical(1, 0, 0)
    }

    pub fn mass() -> Self {
        Self::mechanical(0, 1, 0)
    }

    pub fn time() -> Self {
        Self::mechanical(0, 0, 1)
    }

    pub fn energy() -> Self {
        Self::mechanical(2, 1, -2)
    }

    pub fn energy_density() -> Self {
        Self::mechanical(-1, 1, -2)
    }

    pub fn frequency() -> Self {
        Self::mechanical(0, 0, -1)
    }

    /// Unit vector for base symbol `sym` (one of [`BASE_SYMBOLS`]).
    pub fn base(sym: &str) -> Option<Self> {
        let idx = BASE_SYMBOLS.iter().position(|s| *s == sym)?;
        let mut exps = [Ratio::zero(); 7];
        exps[idx] = Ratio::from_integer(1);
        Some(Self(exps))
    }

    pub fn exponents(&self) -> &[Ratio; 7] {
        &self.0
    }

    pub fn is_dimensionless(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Componentwise sum; `None` if an exponent overflows `i64`.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        self.zip_with(other, |a, b| a.checked_add(b))
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        self.zip_with(other, |a, b| a.checked_sub(b))
    }

    pub fn checked_scale(&self, p: Ratio) -> Option<Self> {
        let mut out = [Ratio::zero(); 7];
        for (o, e) in out.iter_mut().zip(self.0.iter()) {
            *o = e.checked_mul(&p)?;
        }
        Some(Self(out))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Ratio, &Ratio) -> Option<Ratio>) -> Option<Self> {
        let mut out = [Ratio::zero(); 7];
        for i in 0..7 {
            out[i] = f(&self.0[i], &other.0[i])?;
        }
        Some(Self(out))
    }
}

fn exponent_overflow() -> UnitsError {
    UnitsError::Range("dimension exponent overflow".into())
}

impl fmt::Display for DimensionVector {
    /// Space-separated factors such as `m^2 kg s^-2`; `1` when dimensionless.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return f.write_str("1");
        }
        let mut first = true;
        for (sym, e) in BASE_SYMBOLS.iter().zip(self.0.iter()) {
            if e.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if *e == Ratio::from_integer(1) {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A finite magnitude in SI units paired with its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    value: f64,
    dim: DimensionVector,
}

fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_nan() {
        Err(UnitsError::Domain(format!("{what} produced NaN")))
    } else if value.is_infinite() {
        Err(UnitsError::Range(format!("{what} overflowed to infinity")))
    } else {
        Ok(value)
    }
}

impl Quantity {
    pub fn new(value: f64, dim: DimensionVector) -> Result<Self> {
        let value = finite(value, "construction")?;
        Ok(Self { value, dim })
    }

    pub fn dimensionless(value: f64) -> Result<Self> {
        Self::new(value, DimensionVector::dimensionless())
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dim(&self) -> &DimensionVector {
        &self.dim
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            value: finite(self.value * other.value, "multiplication")?,
            dim: self.dim.checked_add(&other.dim).ok_or_else(exponent_overflow)?,
        })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.value == 0.0 {
            return Err(UnitsError::Range("division by zero".into()));
        }
        Ok(Self {
            value: finite(self.value / other.value, "division")?,
            dim: self.dim.checked_sub(&other.dim).ok_or_else(exponent_overflow)?,
        })
    }

    /// Raise to a rational power. Negative bases are allowed only when the
    /// reduced exponent has an odd denominator.
    pub fn checked_pow(&self, p: Ratio) -> Result<Self> {
        let dim = self.dim.checked_scale(p).ok_or_else(exponent_overflow)?;
        let value = rational_pow(self.value, p)?;
        Ok(Self {
            value: finite(value, "power")?,
            dim,
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            value: finite(self.value + other.value, "addition")?,
            dim: self.dim,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            value: finite(self.value - other.value, "subtraction")?,
            dim: self.dim,
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            value: -self.value,
            dim: self.dim,
        }
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(UnitsError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim.is_dimensionless() {
            write!(f, "{:e}", self.value)
        } else {
            write!(f, "{:e} {}", self.value, self.dim)
        }
    }
}

/// `base^p` for rational `p`, real-valued.
pub fn rational_pow(base: f64, p: Ratio) -> Result<f64> {
    if p.is_zero() {
        return Ok(1.0);
    }
    let (num, den) = (*p.numer(), *p.denom());
    if den == 1 {
        if let Ok(n) = i32::try_from(num) {
            if base == 0.0 && n < 0 {
                return Err(UnitsError::Range("zero raised to a negative power".into()));
            }
            return Ok(base.powi(n));
        }
    }
    if base < 0.0 {
        if den % 2 == 0 {
            return Err(UnitsError::Domain(format!(
                "negative base {base} with even-denominator exponent {p}"
            )));
        }
        let mag = (-base).powf(num.abs() as f64 / den as f64);
        let mag = if p.is_negative() { 1.0 / mag } else { mag };
        return Ok(if num % 2 == 0 { mag } else { -mag });
    }
    if base == 0.0 && p.is_negative() {
        return Err(UnitsError::Range("zero raised to a negative power".into()));
    }
    Ok(base.powf(num as f64 / den as f64))
}

/// Exact speed of light, m/s.
pub const C: f64 = 299_792_458.0;
/// Exact Planck constant, J s.
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = H / (2.0 * std::f64::consts::PI);
/// Newtonian constant of gravitation, m^3 kg^-1 s^-2.
pub const G: f64 = 6.674_30e-11;
/// Electron mass, kg.
pub const M_E: f64 = 9.109_383_701_5e-31;
/// Exact electronvolt, J.
pub const EV: f64 = 1.602_176_634e-19;

/// Planck length `sqrt(hbar G / c^3)`.
pub fn planck_length() -> f64 {
    (HBAR * G / (C * C * C)).sqrt()
}

pub const CONSTANTS_EDITION: &str = "CODATA 2018";

/// Named physical constants. Immutable once built; [`ConstantsRegistry::with`]
/// returns an extended copy.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsRegistry {
    entries: BTreeMap<String, Quantity>,
}

static CODATA_2018: LazyLock<ConstantsRegistry> = LazyLock::new(|| {
    let q = |v: f64, d: DimensionVector| Quantity::new(v, d).expect("finite constant");
    let entries = [
        ("c", q(C, DimensionVector::mechanical(1, 0, -1))),
        ("h", q(H, DimensionVector::mechanical(2, 1, -1))),
        ("hbar", q(HBAR, DimensionVector::mechanical(2, 1, -1))),
        ("G", q(G, DimensionVector::mechanical(3, -1, -2))),
        ("m_e", q(M_E, DimensionVector::mass())),
        ("eV", q(EV, DimensionVector::energy())),
        ("l_p", q(planck_length(), DimensionVector::length())),
        ("pi", q(std::f64::consts::PI, DimensionVector::dimensionless())),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    ConstantsRegistry { entries }
});

impl ConstantsRegistry {
    /// The pinned CODATA 2018 registry.
    pub fn codata2018() -> &'static ConstantsRegistry {
        &CODATA_2018
    }

    pub fn get(&self, name: &str) -> Result<&Quantity> {
        self.entries
            .get(name)
            .ok_or_else(|| UnitsError::UnknownConstant(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Copy of this registry with one extra binding. Existing names cannot be
    /// shadowed.
    pub fn with(&self, name: &str, value: Quantity) -> Result<Self> {
        if self.entries.contains_key(name) {
            return Err(UnitsError::DuplicateConstant(name.to_string()));
        }
        let mut entries = self.entries.clone();
        entries.insert(name.to_string(), value);
        Ok(Self { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Quantity)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}
