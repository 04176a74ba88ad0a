//! Command-line front end. Every subcommand emits a table (CSV or JSON).
//!
//! Exit codes: 0 processed (rows may carry error statuses), 1 a `check-eq`
//! line failed, 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bondnet::{self, BondNetwork, DelayPolicy, FluxGeometry};
use crate::dimparse::{self, check_dimension, evaluate};
use crate::gravclock::{self, DilationError, DilationParams};
use crate::orthoclock::{self, SpectralState};
use crate::scatter::{self, PotentialProfile, ScatterError};
use crate::sweep::{run_sweep, Axis, Cell, Evaluation, Failure, Scale, SweepSpec, Table};
use crate::tuntime::{self, ClosedFormOptions, TunnelTimeError};
use crate::units::{planck_length, ConstantsRegistry, DimensionVector, Quantity, CONSTANTS_EDITION, EV, M_E};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BATCH_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Normalization slack accepted for `mlbound --levels` before rescaling.
pub const LEVELS_NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "tunclock", version, about = "Tunneling times, gravitational clocks and quantum speed limits")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    output: Option<String>,
    /// Evaluate sweeps on one thread.
    #[arg(long, global = true)]
    serial: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Barrier transmission and reflection probabilities.
    Transmission(TransmissionArgs),
    /// Tunneling delay under a rectangular barrier.
    Tunneltime(TunneltimeArgs),
    /// Gravitational dilation from the tunneling construction and from GR.
    Dilation(DilationArgs),
    /// Derived constants A0, d0, E0, m0 and the vacuum energy density.
    Constants(ConstantsArgs),
    /// First orthogonality time against the Margolus-Levitin bound.
    Mlbound(MlboundArgs),
    /// Bond capacity, collapse propagation and entanglement flux.
    Bondnet(BondnetArgs),
    /// Evaluate and dimension-check expressions, one per line.
    CheckEq(CheckEqArgs),
}

#[derive(Debug, Args)]
struct BarrierArgs {
    /// Particle mass: `electron` or a value such as `9.1e-31kg`.
    #[arg(long, default_value = "electron")]
    mass: String,
    /// Barrier height, e.g. `10eV`.
    #[arg(long)]
    v0: Option<String>,
    /// Barrier width, e.g. `1nm`.
    #[arg(long)]
    width: Option<String>,
    /// Particle energy, e.g. `5eV`.
    #[arg(long)]
    energy: Option<String>,
    /// `name=start:stop:points[:log]` over mass, v0, width or energy.
    #[arg(long)]
    sweep: Vec<String>,
}

#[derive(Debug, Args)]
struct TransmissionArgs {
    #[command(flatten)]
    barrier: BarrierArgs,
    #[arg(long, value_enum, default_value_t = TransmissionMethod::Exact)]
    method: TransmissionMethod,
    /// Largest accepted `| |t|^2 + |r|^2 - 1 |`.
    #[arg(long, default_value_t = 1e-10)]
    unitarity_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransmissionMethod {
    Exact,
    Opaque,
}

#[derive(Debug, Args)]
struct TunneltimeArgs {
    #[command(flatten)]
    barrier: BarrierArgs,
    #[arg(long, value_enum, default_value_t = TimeMethod::Closed)]
    method: TimeMethod,
    /// Divergence ceiling as a multiple of `L sqrt(2m / V0)`.
    #[arg(long, default_value_t = tuntime::DEFAULT_DIVERGENCE_RATIO)]
    divergence_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TimeMethod {
    Closed,
    Fd,
    Both,
}

#[derive(Debug, Args)]
struct DilationArgs {
    #[arg(long)]
    mass_kg: Option<String>,
    #[arg(long)]
    radius_m: Option<String>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, value_enum, default_value_t = DilationMethod::Both)]
    method: DilationMethod,
    /// Causal correlation distance override, metres.
    #[arg(long)]
    d0: Option<String>,
    /// Length scale `b`: `planck` or metres.
    #[arg(long)]
    b: Option<String>,
    /// `name=start:stop:points[:log]` over mass_kg, radius_m or x (Schwarzschild ratio).
    #[arg(long)]
    sweep: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Earth,
    Sun,
    #[value(name = "neutron-star", alias = "ns")]
    NeutronStar,
}

impl Preset {
    /// Mean radius and mass, SI.
    fn mass_radius(self) -> (f64, f64) {
        match self {
            Preset::Earth => (5.9722e24, 6.371e6),
            Preset::Sun => (1.98847e30, 6.957e8),
            Preset::NeutronStar => (2.7837e30, 1.2e4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DilationMethod {
    Tunneling,
    Gr,
    Both,
}

#[derive(Debug, Args)]
struct ConstantsArgs {
    /// `planck` or a length.
    #[arg(long, default_value = "planck")]
    b: String,
    /// Causal correlation distance; defaults to `c / sqrt(2)` metres.
    #[arg(long)]
    d0: Option<String>,
}

#[derive(Debug, Args)]
struct MlboundArgs {
    /// Comma-separated `energy:amplitude` pairs, e.g. `0:0.7071,1eV:0.7071`.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    levels: Option<String>,
    /// Random state that reaches orthogonality: level count and seed.
    #[arg(long, num_args = 2, value_names = ["N", "SEED"])]
    random: Option<Vec<u64>>,
    /// Overlap magnitude treated as orthogonal.
    #[arg(long, default_value_t = orthoclock::DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Debug, Args)]
struct BondnetArgs {
    /// Network file with `node` and `bond` lines.
    #[arg(long)]
    network: Option<String>,
    /// Node whose collapse is propagated.
    #[arg(long)]
    collapse: Option<String>,
    /// Delay unit per bond, seconds.
    #[arg(long, default_value_t = 1.0)]
    tau_b: f64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Log2Chi)]
    policy: PolicyArg,
    /// Energy per bit of bond capacity, joules.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Bond count, radius and geometry (area_law_2d or volume_3d).
    #[arg(long, num_args = 3, value_names = ["B", "R", "GEOMETRY"])]
    flux: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    #[value(name = "log2-chi")]
    Log2Chi,
    #[value(name = "linear-chi")]
    LinearChi,
    Constant,
}

#[derive(Debug, Args)]
struct CheckEqArgs {
    /// Expression file; stdin when absent.
    #[arg(long)]
    file: Option<String>,
}

#[derive(Debug)]
struct UsageError(String);

impl<T: std::fmt::Display> From<T> for UsageError {
    fn from(e: T) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult<T> = Result<T, UsageError>;

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    let eval = if cli.serial { Evaluation::Serial } else { Evaluation::Parallel };
    let result = match &cli.command {
        Command::Transmission(a) => transmission(a, eval).map(|t| (t, EXIT_OK)),
        Command::Tunneltime(a) => tunneltime(a, eval).map(|t| (t, EXIT_OK)),
        Command::Dilation(a) => dilation(a, eval).map(|t| (t, EXIT_OK)),
        Command::Constants(a) => constants(a).map(|t| (t, EXIT_OK)),
        Command::Mlbound(a) => mlbound(a).map(|t| (t, EXIT_OK)),
        Command::Bondnet(a) => bondnet_cmd(a).map(|t| (t, EXIT_OK)),
        Command::CheckEq(a) => check_eq(a),
    };
    let (table, code) = match result {
        Ok(r) => r,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    match emit(&table, cli.format, cli.output.as_deref(), out) {
        Ok(()) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn emit(table: &Table, format: Format, path: Option<&str>, out: &mut dyn Write) -> CliResult<()> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => table.write_csv(&mut buf)?,
        Format::Json => table.write_json(&mut buf)?,
    }
    match path {
        Some(p) => fs::write(p, buf).map_err(|e| UsageError(format!("{p}: {e}"))),
        None => Ok(out.write_all(&buf)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Energy,
    Length,
    Mass,
    Time,
    Pure,
}

const SUFFIXES: &[(&str, Kind, f64)] = &[
    ("meV", Kind::Energy, 1e-3 * EV),
    ("keV", Kind::Energy, 1e3 * EV),
    ("MeV", Kind::Energy, 1e6 * EV),
    ("eV", Kind::Energy, EV),
    ("J", Kind::Energy, 1.0),
    ("fm", Kind::Length, 1e-15),
    ("pm", Kind::Length, 1e-12),
    ("nm", Kind::Length, 1e-9),
    ("um", Kind::Length, 1e-6),
    ("mm", Kind::Length, 1e-3),
    ("cm", Kind::Length, 1e-2),
    ("km", Kind::Length, 1e3),
    ("m", Kind::Length, 1.0),
    ("kg", Kind::Mass, 1.0),
    ("g", Kind::Mass, 1e-3),
    ("ms", Kind::Time, 1e-3),
    ("us", Kind::Time, 1e-6),
    ("ns", Kind::Time, 1e-9),
    ("fs", Kind::Time, 1e-15),
    ("as", Kind::Time, 1e-18),
    ("s", Kind::Time, 1.0),
];

/// Number with an optional unit suffix from the fixed table; bare numbers are SI.
fn parse_value(text: &str, kind: Kind) -> CliResult<f64> {
    let s = text.trim();
    if kind == Kind::Mass && s == "electron" {
        return Ok(M_E);
    }
    let bare = |n: &str| n.trim().parse::<f64>().ok().filter(|x| x.is_finite());
    if let Some(x) = bare(s) {
        return Ok(x);
    }
    let mut candidates: Vec<&(&str, Kind, f64)> = SUFFIXES.iter().filter(|(suf, _, _)| s.ends_with(suf)).collect();
    candidates.sort_by_key(|(suf, _, _)| std::cmp::Reverse(suf.len()));
    for (suf, k, factor) in candidates {
        if let Some(x) = bare(&s[..s.len() - suf.len()]) {
            if *k != kind {
                return Err(UsageError(format!("'{text}': unit {suf} is not a {}", kind_name(kind))));
            }
            return Ok(x * factor);
        }
    }
    Err(UsageError(format!("cannot read '{text}' as a {}", kind_name(kind))))
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Energy => "energy",
        Kind::Length => "length",
        Kind::Mass => "mass",
        Kind::Time => "time",
        Kind::Pure => "number",
    }
}

/// One sweepable parameter: flag key, output column and fixed value if given.
struct Param<'a> {
    key: &'static str,
    column: &'static str,
    kind: Kind,
    value: Option<&'a str>,
}

fn build_axes(params: &[Param], sweeps: &[String]) -> CliResult<Vec<Axis>> {
    let mut parsed: Vec<(String, &str)> = Vec::new();
    for s in sweeps {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| UsageError(format!("sweep '{s}' is not name=start:stop:points[:log]")))?;
        if !params.iter().any(|p| p.key == name || p.column == name) {
            let names: Vec<&str> = params.iter().map(|p| p.key).collect();
            return Err(UsageError(format!("cannot sweep '{name}'; choose from {}", names.join(", "))));
        }
        if parsed.iter().any(|(n, _)| n == name) {
            return Err(UsageError(format!("'{name}' swept twice")));
        }
        parsed.push((name.to_string(), range));
    }
    params
        .iter()
        .map(|p| {
            let sweep = parsed.iter().find(|(n, _)| n == p.key || n == p.column);
            match (sweep, p.value) {
                (Some((_, range)), _) => {
                    let parts: Vec<&str> = range.split(':').collect();
                    let scale = match parts.get(3) {
                        None => Scale::Linear,
                        Some(&"log") => Scale::Log,
                        Some(&"lin") => Scale::Linear,
                        Some(other) => return Err(UsageError(format!("unknown scale '{other}'"))),
                    };
                    if !(3..=4).contains(&parts.len()) {
                        return Err(UsageError(format!("sweep range '{range}' is not start:stop:points[:log]")));
                    }
                    let points: usize = parts[2]
                        .parse()
                        .map_err(|_| UsageError(format!("bad point count '{}'", parts[2])))?;
                    let start = parse_value(parts[0], p.kind)?;
                    let stop = parse_value(parts[1], p.kind)?;
                    Ok(Axis::new(p.column, start, stop, points, scale)?)
                }
                (None, Some(v)) => Ok(Axis::fixed(p.column, parse_value(v, p.kind)?)?),
                (None, None) => Err(UsageError(format!("missing --{} (or a sweep over it)", p.key.replace('_', "-")))),
            }
        })
        .collect()
}

fn barrier_axes(b: &BarrierArgs) -> CliResult<Vec<Axis>> {
    build_axes(
        &[
            Param { key: "mass", column: "mass_kg", kind: Kind::Mass, value: Some(&b.mass) },
            Param { key: "v0", column: "v0_J", kind: Kind::Energy, value: b.v0.as_deref() },
            Param { key: "width", column: "width_m", kind: Kind::Length, value: b.width.as_deref() },
            Param { key: "energy", column: "energy_J", kind: Kind::Energy, value: b.energy.as_deref() },
        ],
        &b.sweep,
    )
}

fn scatter_failure(e: ScatterError) -> Failure {
    let status = match e {
        ScatterError::Domain(_) => "domain-error",
        ScatterError::DegenerateWavevector { .. } => "degenerate",
        ScatterError::Range(_) => "range-error",
        ScatterError::InvalidProfile(_) | ScatterError::UnsupportedProfile(_) => "invalid-profile",
    };
    Failure::new(status, e.to_string())
}

fn time_failure(e: TunnelTimeError) -> Failure {
    match e {
        TunnelTimeError::Scatter(s) => scatter_failure(s),
        TunnelTimeError::Domain(_) => Failure::new("domain-error", e.to_string()),
        TunnelTimeError::Divergence { .. } => Failure::new("divergence", e.to_string()),
        TunnelTimeError::Convergence { .. } => Failure::new("convergence-error", e.to_string()),
    }
}

fn dilation_failure(e: DilationError) -> Failure {
    let status = match e {
        DilationError::Horizon { .. } => "horizon",
        DilationError::Domain(_) => "domain-error",
    };
    Failure::new(status, e.to_string())
}

fn transmission(a: &TransmissionArgs, eval: Evaluation) -> CliResult<Table> {
    let spec = SweepSpec::new(barrier_axes(&a.barrier)?, &["method", "t_prob", "r_prob", "unitarity"])?;
    let method = a.method;
    let tol = a.unitarity_tol;
    Ok(run_sweep(&spec, eval, |p| {
        let profile = PotentialProfile::rectangular(p[1], p[2], p[0]).map_err(scatter_failure)?;
        match method {
            TransmissionMethod::Exact => {
                let r = scatter::transfer_matrix_scatter(&profile, p[3]).map_err(scatter_failure)?;
                let check = if r.unitarity_defect() <= tol { "pass" } else { "fail" };
                Ok(vec!["exact".into(), r.t_prob.into(), r.r_prob.into(), check.into()])
            }
            TransmissionMethod::Opaque => {
                let t = scatter::opaque_transmission(&profile, p[3]).map_err(scatter_failure)?;
                Ok(vec!["opaque".into(), t.into(), Cell::Empty, Cell::Empty])
            }
        }
    })?)
}

fn tunneltime(a: &TunneltimeArgs, eval: Evaluation) -> CliResult<Table> {
    let spec = SweepSpec::new(barrier_axes(&a.barrier)?, &["method", "t_closed_s", "t_fd_s", "rel_diff"])?;
    let opts = ClosedFormOptions {
        divergence_ratio: a.divergence_ratio,
    };
    let method = a.method;
    Ok(run_sweep(&spec, eval, |p| {
        let profile = PotentialProfile::rectangular(p[1], p[2], p[0]).map_err(scatter_failure)?;
        let closed = || tuntime::tunneling_time_closed_with(&profile, p[3], opts).map(|r| r.t_t);
        let fd = || {
            let t_of = |e: f64| scatter::opaque_transmission(&profile, e).unwrap_or(f64::NAN);
            tuntime::tunneling_time_fd(t_of, p[3]).map(|r| r.t_t)
        };
        let row = match method {
            TimeMethod::Closed => vec!["closed".into(), closed().map_err(time_failure)?.into(), Cell::Empty, Cell::Empty],
            TimeMethod::Fd => vec!["fd".into(), Cell::Empty, fd().map_err(time_failure)?.into(), Cell::Empty],
            TimeMethod::Both => {
                let c = closed().map_err(time_failure)?;
                let f = fd().map_err(time_failure)?;
                vec!["both".into(), c.into(), f.into(), ((f - c) / c).abs().into()]
            }
        };
        Ok(row)
    })?)
}

fn length_or_planck(s: &str) -> CliResult<f64> {
    if s == "planck" {
        Ok(planck_length())
    } else {
        parse_value(s, Kind::Length)
    }
}

fn dilation(a: &DilationArgs, eval: Evaluation) -> CliResult<Table> {
    let preset = a.preset.map(Preset::mass_radius);
    let mass = a.mass_kg.clone().or(preset.map(|p| p.0.to_string()));
    let radius = a.radius_m.clone().or(preset.map(|p| p.1.to_string()));
    let by_ratio = a.sweep.iter().any(|s| s.starts_with("x="));
    let second = if by_ratio {
        Param { key: "x", column: "x", kind: Kind::Pure, value: None }
    } else {
        Param { key: "radius_m", column: "radius_m", kind: Kind::Length, value: radius.as_deref() }
    };
    let axes = build_axes(
        &[Param { key: "mass_kg", column: "mass_kg", kind: Kind::Mass, value: mass.as_deref() }, second],
        &a.sweep,
    )?;
    let b = a.b.as_deref().map_or(Ok(planck_length()), length_or_planck)?;
    let d0 = a.d0.as_deref().map_or(Ok(gravclock::default_d0()), |s| parse_value(s, Kind::Length))?;
    let outputs = ["method", "schwarzschild_ratio", "delta_tunneling", "delta_gr", "excess_gr", "residual"];
    let spec = SweepSpec::new(axes, &outputs)?;
    let method = a.method;
    Ok(run_sweep(&spec, eval, |p| {
        let mass = p[0];
        let radius = if by_ratio { gravclock::schwarzschild_radius(mass) / p[1] } else { p[1] };
        let x = gravclock::schwarzschild_ratio(mass, radius);
        let tun = || {
            let params = DilationParams::with_b(mass, radius, b, d0)?;
            gravclock::dilation_tunneling(&params).map(|d| d.delta_t_min)
        };
        let gr = || Ok::<_, DilationError>((gravclock::dilation_gr(mass, radius)?, gravclock::dilation_excess(mass, radius)?));
        let (name, t, g) = match method {
            DilationMethod::Tunneling => ("tunneling", Some(tun().map_err(dilation_failure)?), None),
            DilationMethod::Gr => ("gr", None, Some(gr().map_err(dilation_failure)?)),
            DilationMethod::Both => (
                "both",
                Some(tun().map_err(dilation_failure)?),
                Some(gr().map_err(dilation_failure)?),
            ),
        };
        let residual = match (t, g) {
            (Some(t), Some((g, _))) => Some((t / g - 1.0).abs()),
            _ => None,
        };
        Ok(vec![
            name.into(),
            x.into(),
            t.into(),
            g.map(|g| g.0).into(),
            g.map(|g| g.1).into(),
            residual.into(),
        ])
    })?)
}

fn constants(a: &ConstantsArgs) -> CliResult<Table> {
    let b = length_or_planck(&a.b)?;
    let d0 = a.d0.as_deref().map_or(Ok(gravclock::default_d0()), |s| parse_value(s, Kind::Length))?;
    let k = gravclock::derive_constants(b, d0)?;
    let mut t = Table::new(vec!["quantity".into(), "value".into(), "unit".into()]);
    let rows: [(&str, Cell, &str); 9] = [
        ("edition", CONSTANTS_EDITION.into(), ""),
        ("b", k.b.into(), "m"),
        ("d0", k.d0.into(), "m"),
        ("A0", k.a0.into(), "s^-1"),
        ("E0", k.e0.into(), "J"),
        ("m0", k.m0.into(), "kg"),
        ("rho_E", k.rho_e.into(), "J m^-3"),
        ("rho_E_closed", k.rho_e_closed.into(), "J m^-3"),
        ("rho_E_rel_diff", ((k.rho_e - k.rho_e_closed) / k.rho_e_closed).abs().into(), "1"),
    ];
    t.rows = rows.into_iter().map(|(q, v, u)| vec![q.into(), v, u.into()]).collect();
    Ok(t)
}

fn parse_levels(text: &str) -> CliResult<SpectralState> {
    let mut levels = Vec::new();
    for item in text.split(',') {
        let (e, c) = item
            .split_once(':')
            .ok_or_else(|| UsageError(format!("level '{item}' is not energy:amplitude")))?;
        let amp: f64 = c
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("bad amplitude '{c}'")))?;
        levels.push((parse_value(e, Kind::Energy)?, Complex64::new(amp, 0.0)));
    }
    let norm: f64 = levels.iter().map(|(_, c)| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > LEVELS_NORM_TOLERANCE {
        return Err(UsageError(format!(
            "amplitudes have sum |c|^2 = {norm}, outside 1 +- {LEVELS_NORM_TOLERANCE}"
        )));
    }
    Ok(SpectralState::normalized(levels)?)
}

fn mlbound(a: &MlboundArgs) -> CliResult<Table> {
    let state = match (&a.levels, &a.random) {
        (Some(l), _) => parse_levels(l)?,
        (None, Some(r)) => {
            let n = r[0] as usize;
            if !(1..=orthoclock::MAX_LEVELS).contains(&n) {
                return Err(UsageError(format!("level count must be 1..={}", orthoclock::MAX_LEVELS)));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(r[1]);
            if n == 1 {
                orthoclock::random_state(n, EV, &mut rng)?
            } else {
                orthoclock::random_orthogonal_state(n, EV, &mut rng)?
            }
        }
        (None, None) => return Err(UsageError("need --levels or --random".into())),
    };
    let t_orth = orthoclock::first_orthogonal_time(&state, a.tol)?;
    let columns = ["levels", "mean_energy_J", "t_orth_s", "t_min_s", "rate_per_s", "saturation", "status", "detail"];
    let mut t = Table::new(columns.iter().map(|s| s.to_string()).collect());
    let head: Vec<Cell> = vec![(state.levels().len() as f64).into(), state.mean_energy().into(), t_orth.into()];
    let tail: Vec<Cell> = match (orthoclock::ml_bound(&state), t_orth) {
        (Err(e), _) => vec![Cell::Empty, Cell::Empty, Cell::Empty, "stationary".into(), e.to_string().into()],
        (Ok(b), None) => vec![b.t_min.into(), b.rate.into(), Cell::Empty, "none".into(), "never orthogonal".into()],
        (Ok(b), Some(t_o)) => {
            let ok = t_o >= b.t_min * (1.0 - 1e-4);
            let status = if ok { "pass" } else { "fail" };
            vec![b.t_min.into(), b.rate.into(), (b.t_min / t_o).into(), status.into(), Cell::Empty]
        }
    };
    t.rows.push(head.into_iter().chain(tail).collect());
    Ok(t)
}

fn bondnet_cmd(a: &BondnetArgs) -> CliResult<Table> {
    if a.network.is_none() && a.flux.is_none() {
        return Err(UsageError("need --network and/or --flux".into()));
    }
    let mut t = Table::new(vec!["quantity".into(), "value".into()]);
    let mut push = |q: &str, v: f64| t.rows.push(vec![q.into(), v.into()]);
    if let Some(path) = &a.network {
        let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{path}: {e}")))?;
        let net = BondNetwork::parse(&text).map_err(|e| UsageError(format!("{path}: {e}")))?;
        let cap = bondnet::entanglement_capacity(&net);
        push("bond_count", cap.bond_count as f64);
        push("total_log2_chi", cap.total_log2_chi);
        push("model_energy_J", cap.model_energy(a.k));
        if let Some(node) = &a.collapse {
            let policy = match a.policy {
                PolicyArg::Log2Chi => DelayPolicy::Log2Chi,
                PolicyArg::LinearChi => DelayPolicy::LinearChi,
                PolicyArg::Constant => DelayPolicy::Constant,
            };
            push(
                "propagation_time_s",
                bondnet::collapse_propagation_time_with(&net, node, a.tau_b, policy)?,
            );
        }
    } else if a.collapse.is_some() {
        return Err(UsageError("--collapse needs --network".into()));
    }
    if let Some(f) = &a.flux {
        let bonds = parse_value(&f[0], Kind::Pure)?;
        let r = parse_value(&f[1], Kind::Length)?;
        let geometry = match f[2].as_str() {
            "area_law_2d" => FluxGeometry::AreaLaw2d,
            "volume_3d" => FluxGeometry::Volume3d,
            other => return Err(UsageError(format!("geometry '{other}' is not area_law_2d or volume_3d"))),
        };
        push("flux", bondnet::entanglement_flux(bonds, r, geometry)?);
    }
    Ok(t)
}

/// Line forms: `# comment`, `let NAME = expr`, `expr => unit`, `expr`.
fn check_eq(a: &CheckEqArgs) -> CliResult<(Table, i32)> {
    let text = match &a.file {
        Some(p) => fs::read_to_string(p).map_err(|e| UsageError(format!("{p}: {e}")))?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let (table, failed) = check_lines(&text);
    Ok((table, if failed { EXIT_BATCH_FAILURE } else { EXIT_OK }))
}

/// Evaluates every line; returns the report and whether any line failed.
pub fn check_lines(text: &str) -> (Table, bool) {
    let columns = ["expression", "value", "si_dimension", "status", "error"];
    let mut t = Table::new(columns.iter().map(|s| s.to_string()).collect());
    let mut registry = ConstantsRegistry::codata2018().clone();
    let mut failed = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = match check_line(line, &mut registry) {
            Ok((q, None)) => vec![q.value().into(), q.dim().to_string().into(), "pass".into(), Cell::Empty],
            Ok((q, Some(expected))) if q.dim() == &expected => {
                vec![q.value().into(), q.dim().to_string().into(), "pass".into(), Cell::Empty]
            }
            Ok((q, Some(expected))) => {
                failed = true;
                let msg = format!("line {}: dimension {} != expected {expected}", i + 1, q.dim());
                vec![q.value().into(), q.dim().to_string().into(), "fail".into(), msg.into()]
            }
            Err(msg) => {
                failed = true;
                vec![Cell::Empty, Cell::Empty, "fail".into(), format!("line {}: {msg}", i + 1).into()]
            }
        };
        t.rows.push(std::iter::once(Cell::from(line)).chain(row).collect());
    }
    (t, failed)
}

type Checked = (Quantity, Option<DimensionVector>);

fn check_line(line: &str, registry: &mut ConstantsRegistry) -> Result<Checked, String> {
    let eval = |src: &str, reg: &ConstantsRegistry| -> Result<Quantity, String> {
        let expr = dimparse::parse(src).map_err(|e| e.to_string())?;
        evaluate(&expr, reg).map_err(|e| e.to_string())
    };
    if let Some(rest) = line.strip_prefix("let ") {
        let (name, src) = rest.split_once('=').ok_or("expected `let NAME = expr`")?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("bad name '{name}'"));
        }
        let q = eval(src, registry)?;
        *registry = registry.with(name, q).map_err(|e| e.to_string())?;
        return Ok((q, None));
    }
    if let Some((src, unit)) = line.split_once("=>") {
        let unit = unit.trim().trim_start_matches('[').trim_end_matches(']');
        let expected = if unit.trim() == "1" {
            DimensionVector::dimensionless()
        } else {
            *dimparse::parse_unit(unit).map_err(|e| format!("unit: {e}"))?.dim()
        };
        let expr = dimparse::parse(src).map_err(|e| e.to_string())?;
        check_dimension(&expr, &expected, registry).map_err(|e| e.to_string())?;
        return Ok((eval(src, registry)?, Some(expected)));
    }
    Ok((eval(line, registry)?, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_suffixes() {
        assert_eq!(parse_value("5eV", Kind::Energy).unwrap(), 5.0 * EV);
        assert_eq!(parse_value("2meV", Kind::Energy).unwrap(), 2e-3 * EV);
        assert_eq!(parse_value("1nm", Kind::Length).unwrap(), 1e-9);
        assert_eq!(parse_value("3m", Kind::Length).unwrap(), 3.0);
        assert_eq!(parse_value("1e-9m", Kind::Length).unwrap(), 1e-9);
        assert_eq!(parse_value("2.5km", Kind::Length).unwrap(), 2500.0);
        assert_eq!(parse_value("10g", Kind::Mass).unwrap(), 1e-2);
        assert_eq!(parse_value("electron", Kind::Mass).unwrap(), M_E);
        assert_eq!(parse_value("80as", Kind::Time).unwrap(), 80e-18);
        assert_eq!(parse_value("1.5e-19", Kind::Energy).unwrap(), 1.5e-19);
        assert!(parse_value("5nm", Kind::Energy).is_err());
        assert!(parse_value("5 parsecs", Kind::Length).is_err());
        assert!(parse_value("inf", Kind::Length).is_err());
    }

    #[test]
    fn sweep_flag_syntax() {
        let params = [Param { key: "energy", column: "energy_J", kind: Kind::Energy, value: None }];
        let axes = build_axes(&params, &["energy=1eV:9eV:5".to_string()]).unwrap();
        assert_eq!(axes[0].values().len(), 5);
        assert_eq!(axes[0].values()[4], 9.0 * EV);
        let log = build_axes(&params, &["energy_J=1e-20:1e-18:3:log".to_string()]).unwrap();
        assert!((log[0].values()[1] / 1e-19 - 1.0).abs() < 1e-12);
        for bad in ["energy", "energy=1:2", "energy=1:2:x", "energy=1:2:3:cubic", "width=1:2:3", "energy=2:1:3"] {
            assert!(build_axes(&params, &[bad.to_string()]).is_err(), "{bad}");
        }
        assert!(build_axes(&params, &[]).is_err());
    }

    #[test]
    fn check_lines_forms() {
        let (t, failed) = check_lines("# header\nlet M = 5.972e24 [kg]\n2*G*M/(6.371e6 [m]*c^2) => 1\nc + G\n");
        assert!(failed);
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[1][3], Cell::from("pass"));
        assert_eq!(t.rows[2][3], Cell::from("fail"));
        let (_, ok) = check_lines("c^7/(2*G^2*hbar) => kg*m^-1*s^-2\n");
        assert!(!ok);
        let (t, bad) = check_lines("hbar => eV\n");
        assert!(bad);
        assert!(t.rows[0][4].as_f64().is_none());
    }
}
