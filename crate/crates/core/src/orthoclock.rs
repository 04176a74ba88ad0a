//! Spectral time evolution, first-orthogonality times and the
//! Margolus-Levitin bound `t >= h / (4 <E>)`.
//!
//! States are given spectrally as `(E_n, c_n)` pairs; energies are shifted so
//! the lowest level sits at zero, the convention under which the bound holds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::units::{H, HBAR};

pub const MAX_LEVELS: usize = 64;
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Default `|<psi_0|psi_t>|` below which states count as orthogonal.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const MAX_TOLERANCE: f64 = 1e-3;
/// Minimum number of scan points over the search window.
pub const BASE_GRID: usize = 4096;
/// Scan points per period of the fastest beat frequency.
const SAMPLES_PER_BEAT: f64 = 16.0;
const MAX_GRID: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrthoError {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("tolerance {0} outside (0, 1e-3]")]
    InvalidTolerance(f64),
    #[error("mean energy is zero; the state is stationary")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    /// Energy above the ground level, joules.
    pub energy: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    levels: Vec<Level>,
    offset: f64,
}

impl SpectralState {
    /// Requires `sum |c_n|^2 = 1` within [`NORM_TOLERANCE`].
    pub fn new(levels: impl IntoIterator<Item = (f64, Complex64)>) -> Result<Self, OrthoError> {
        let raw: Vec<(f64, Complex64)> = levels.into_iter().collect();
        let norm: f64 = raw.iter().map(|(_, c)| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(OrthoError::InvalidState(format!("sum |c_n|^2 = {norm}, expected 1")));
        }
        Self::build(raw)
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(levels: impl IntoIterator<Item = (f64, Complex64)>) -> Result<Self, OrthoError> {
        let raw: Vec<(f64, Complex64)> = levels.into_iter().collect();
        let norm: f64 = raw.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(OrthoError::InvalidState(format!("cannot normalize amplitudes of norm {norm}")));
        }
        Self::build(raw.into_iter().map(|(e, c)| (e, c / norm)).collect())
    }

    fn build(mut raw: Vec<(f64, Complex64)>) -> Result<Self, OrthoError> {
        if raw.is_empty() {
            return Err(OrthoError::InvalidState("no levels".into()));
        }
        if raw.len() > MAX_LEVELS {
            return Err(OrthoError::InvalidState(format!("{} levels exceeds {MAX_LEVELS}", raw.len())));
        }
        if let Some((e, c)) = raw.iter().find(|(e, c)| !e.is_finite() || !c.re.is_finite() || !c.im.is_finite()) {
            return Err(OrthoError::InvalidState(format!("non-finite level ({e}, {c})")));
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let offset = raw[0].0;
        let levels = raw
            .into_iter()
            .map(|(e, c)| Level {
                energy: e - offset,
                amplitude: c,
            })
            .collect();
        Ok(Self { levels, offset })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Energy subtracted from the input so the ground level is zero.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn mean_energy(&self) -> f64 {
        self.levels.iter().map(|l| l.amplitude.norm_sqr() * l.energy).sum()
    }

    /// `(E, sum of |c|^2)` per distinct energy, ascending.
    fn weights(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for l in &self.levels {
            let p = l.amplitude.norm_sqr();
            match out.last_mut() {
                Some((e, w)) if *e == l.energy => *w += p,
                _ => out.push((l.energy, p)),
            }
        }
        out.retain(|(_, w)| *w > 0.0);
        out
    }
}

/// Random state with `n` levels, energies uniform in `[0, energy_scale)` and
/// amplitudes uniform in the unit square before normalization.
pub fn random_state<R: Rng>(n: usize, energy_scale: f64, rng: &mut R) -> Result<SpectralState, OrthoError> {
    let levels: Vec<(f64, Complex64)> = (0..n)
        .map(|_| {
            let e = rng.gen::<f64>() * energy_scale;
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (e, c)
        })
        .collect();
    SpectralState::normalized(levels)
}

/// Random `n`-level state that is guaranteed to reach orthogonality: a random
/// spectrum doubled by a two-level factor with splitting equal to its lowest
/// gap, so the overlap vanishes exactly at `pi hbar / gap`. Odd `n` merges
/// the one coincident level.
pub fn random_orthogonal_state<R: Rng>(n: usize, energy_scale: f64, rng: &mut R) -> Result<SpectralState, OrthoError> {
    if !(2..=MAX_LEVELS).contains(&n) {
        return Err(OrthoError::InvalidState(format!("level count {n} outside 2..={MAX_LEVELS}")));
    }
    let m = n.div_ceil(2);
    let mut base: Vec<(f64, f64)> = (0..m)
        .map(|_| (rng.gen::<f64>() * energy_scale, rng.gen_range(0.05..1.0)))
        .collect();
    base.sort_by(|a, b| a.0.total_cmp(&b.0));
    let delta = if m > 1 && n % 2 == 1 {
        base[1].0 - base[0].0
    } else {
        rng.gen_range(0.1..1.0) * energy_scale
    };
    if !(delta > 0.0) {
        return Err(OrthoError::InvalidState("zero splitting".into()));
    }
    let mut levels: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    for (k, &(e, p)) in base.iter().enumerate() {
        let phase = rng.gen::<f64>() * 2.0 * PI;
        if n % 2 == 1 && k == 1 {
            // upper copy of level 0 lands here
            levels.push((e, Complex64::from_polar(((p + base[0].1) / 2.0).sqrt(), phase)));
        } else {
            levels.push((e, Complex64::from_polar((p / 2.0).sqrt(), phase)));
        }
        levels.push((e + delta, Complex64::from_polar((p / 2.0).sqrt(), phase)));
    }
    if n % 2 == 1 {
        levels.remove(1);
    }
    SpectralState::normalized(levels)
}

/// `<psi_0|psi_t> = sum |c_n|^2 exp(-i E_n t / hbar)`.
pub fn overlap(state: &SpectralState, t: f64) -> Complex64 {
    state
        .levels
        .iter()
        .map(|l| l.amplitude.norm_sqr() * Complex64::from_polar(1.0, -l.energy * t / HBAR))
        .sum()
}

fn overlap_weights(weights: &[(f64, f64)], t: f64) -> f64 {
    weights
        .iter()
        .map(|(e, p)| *p * Complex64::from_polar(1.0, -e * t / HBAR))
        .sum::<Complex64>()
        .norm()
}

/// Earliest `t > 0` with `|<psi_0|psi_t>| <= tol`, or `None` if the overlap
/// never drops that low within `4 pi hbar / dE_min`.
pub fn first_orthogonal_time(state: &SpectralState, tol: f64) -> Result<Option<f64>, OrthoError> {
    if !(tol > 0.0 && tol <= MAX_TOLERANCE) {
        return Err(OrthoError::InvalidTolerance(tol));
    }
    let w = state.weights();
    match w.len() {
        0 | 1 => Ok(None),
        2 => Ok(two_level_crossing(&w, tol)),
        _ => Ok(scan(&w, tol)),
    }
}

/// Closed form for a single beat frequency:
/// `|ov|^2 = (p0 - p1)^2 + 4 p0 p1 cos^2(dE t / 2 hbar)`.
fn two_level_crossing(w: &[(f64, f64)], tol: f64) -> Option<f64> {
    let (p0, p1) = (w[0].1, w[1].1);
    let de = w[1].0 - w[0].0;
    if (p0 - p1).abs() > tol {
        return None;
    }
    let cos_half = ((tol * tol - (p0 - p1).powi(2)) / (4.0 * p0 * p1)).sqrt().min(1.0);
    Some(2.0 * cos_half.acos() * HBAR / de)
}

fn scan(w: &[(f64, f64)], tol: f64) -> Option<f64> {
    let gaps = w.windows(2).map(|p| p[1].0 - p[0].0);
    let de_min = gaps.fold(f64::INFINITY, f64::min);
    let de_max = w[w.len() - 1].0 - w[0].0;
    let window = 4.0 * PI * HBAR / de_min;
    let beats = window * de_max / (2.0 * PI * HBAR);
    let n = ((SAMPLES_PER_BEAT * beats).ceil() as usize).clamp(BASE_GRID, MAX_GRID);
    let dt = window / (n - 1) as f64;

    let f = |t: f64| overlap_weights(w, t);
    let mut grid = Grid::new(w, dt);
    let (mut g_prev, mut g_cur) = (grid.next_value(), grid.next_value());
    for i in 1..n {
        let (t_prev, t_i) = ((i - 1) as f64 * dt, i as f64 * dt);
        if g_cur <= tol {
            return Some(bisect_crossing(&f, t_prev, t_i, tol));
        }
        let g_next = grid.next_value();
        if i + 1 < n && g_cur <= g_prev && g_cur <= g_next {
            let t_star = golden_min(&f, t_prev, t_i + dt);
            if f(t_star) <= tol {
                return Some(bisect_crossing(&f, t_prev, t_star, tol));
            }
        }
        (g_prev, g_cur) = (g_cur, g_next);
    }
    None
}

/// `|overlap|` on `t_i = i dt`, advancing phases by recurrence and resyncing
/// every 64 steps.
struct Grid<'a> {
    w: &'a [(f64, f64)],
    dt: f64,
    i: usize,
    steps: Vec<Complex64>,
    phases: Vec<Complex64>,
}

impl<'a> Grid<'a> {
    fn new(w: &'a [(f64, f64)], dt: f64) -> Self {
        Self {
            w,
            dt,
            i: 0,
            steps: w.iter().map(|(e, _)| Complex64::from_polar(1.0, -e * dt / HBAR)).collect(),
            phases: vec![Complex64::new(1.0, 0.0); w.len()],
        }
    }

    fn next_value(&mut self) -> f64 {
        if self.i.is_multiple_of(64) {
            let t = self.i as f64 * self.dt;
            for (ph, (e, _)) in self.phases.iter_mut().zip(self.w) {
                *ph = Complex64::from_polar(1.0, -e * t / HBAR);
            }
        }
        let s: Complex64 = self.phases.iter().zip(self.w).map(|(ph, (_, p))| ph * *p).sum();
        for (ph, st) in self.phases.iter_mut().zip(&self.steps) {
            *ph *= st;
        }
        self.i += 1;
        s.norm()
    }
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * b.abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Bisect for the crossing of `f = tol` given `f(lo) > tol >= f(hi)`.
fn bisect_crossing(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlBound {
    /// `h / (4 <E>)`, seconds.
    pub t_min: f64,
    /// `2 <E> / (pi hbar)`, orthogonal states per second.
    pub rate: f64,
}

pub fn ml_bound(state: &SpectralState) -> Result<MlBound, OrthoError> {
    let mean = state.mean_energy();
    if !(mean > 0.0) {
        return Err(OrthoError::Degenerate);
    }
    Ok(MlBound {
        t_min: H / (4.0 * mean),
        rate: 2.0 * mean / (PI * HBAR),
    })
}
