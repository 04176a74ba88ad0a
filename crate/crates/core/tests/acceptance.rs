//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tunclock::bondnet::{contract_two_site, entanglement_flux, FluxGeometry, TwoSiteState};
use tunclock::gravclock::{dilation_tunneling, schwarzschild_radius, DilationParams};
use tunclock::orthoclock::{self, first_orthogonal_time, ml_bound, SpectralState, DEFAULT_TOLERANCE};
use tunclock::scatter::{decay_constant, opaque_transmission, transfer_matrix_scatter, PotentialProfile, Segment};
use tunclock::sweep::{run_sweep, Axis, Evaluation, Failure, Scale, SweepSpec};
use tunclock::tuntime::{tunneling_time_closed, tunneling_time_fd};
use tunclock::units::{planck_length, C, EV, G, H, HBAR, M_E};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn constants_reproduction() -> Verdict {
    let defaults = run_cli(&["constants"]);
    let planck = run_cli(&["constants", "--b", "planck"]);
    if defaults.code != 0 || planck.code != 0 {
        return verdict(false, format!("exit codes {} {}", defaults.code, planck.code));
    }
    let d0 = quantity(&defaults.stdout, "d0");
    let d0_6 = format!("{d0:.5e}");
    let e0 = quantity(&planck.stdout, "E0");
    let rho = quantity(&planck.stdout, "rho_E");
    let rho_closed = quantity(&planck.stdout, "rho_E_closed");
    let lp = planck_length();
    let identity = rel(e0 / lp.powi(3), C.powi(7) / (2.0 * G * G * HBAR));
    let pass = d0_6 == "2.11985e8"
        && rel(e0, 9.7e8) <= 0.015
        && rel(rho, 2.36e113) <= 0.02
        && identity <= 1e-12
        && rel(rho, rho_closed) <= 1e-12;
    verdict(
        pass,
        format!(
            "d0={d0_6} m, E0={e0:.4e} J ({:.2}% off 9.7e8), rho_E={rho:.4e} J/m^3 ({:.2}% off 2.36e113), identity rel {identity:.1e}",
            100.0 * rel(e0, 9.7e8),
            100.0 * rel(rho, 2.36e113)
        ),
    )
}

fn dilation_equivalence() -> Verdict {
    let spec = SweepSpec::new(
        vec![
            Axis::new("mass_kg", 1e-3, 1e40, 40, Scale::Log).unwrap(),
            Axis::new("x", 1e-12, 0.99, 25, Scale::Log).unwrap(),
        ],
        &["rel_err"],
    )
    .unwrap();
    let table = run_sweep(&spec, Evaluation::Parallel, |p| {
        let (m, x) = (p[0], p[1]);
        let r = schwarzschild_radius(m) / x;
        let d = dilation_tunneling(&DilationParams::new(m, r).unwrap()).map_err(|e| Failure::new("error", e.to_string()))?;
        let reference = 1.0 / (1.0 - 2.0 * G * m / (r * C * C)).sqrt();
        Ok(vec![rel(d.delta_t_min, reference).into()])
    })
    .unwrap();
    let errs: Vec<f64> = table.column("rel_err").unwrap().iter().filter_map(|c| c.as_f64()).collect();
    let worst = errs.iter().copied().fold(0.0, f64::max);
    verdict(
        errs.len() == 1000 && worst <= 1e-12,
        format!("{} points, max rel err {worst:.2e}", errs.len()),
    )
}

fn tunneling_time_oracle() -> Verdict {
    let v0 = 10.0 * EV;
    let mut worst_fd = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut n = 0;
    for i in 0..50 {
        let eps = 0.05 + 0.9 * i as f64 / 49.0;
        let e = eps * v0;
        let kappa = decay_constant(M_E, v0, e);
        for j in 0..50 {
            let kl = 1.0 + 49.0 * j as f64 / 49.0;
            let l = kl / kappa;
            let profile = PotentialProfile::rectangular(v0, l, M_E).unwrap();
            let closed = match tunneling_time_closed(&profile, e) {
                Ok(r) => r.t_t,
                Err(err) => return verdict(false, format!("closed form failed at eps={eps}, kL={kl}: {err}")),
            };
            let fd = match tunneling_time_fd(|x| opaque_transmission(&profile, x).unwrap_or(f64::NAN), e) {
                Ok(r) => r.t_t,
                Err(err) => return verdict(false, format!("fd failed at eps={eps}, kL={kl}: {err}")),
            };
            let oracle = 2.0 * l * M_E / (HBAR * kappa);
            worst_fd = worst_fd.max(rel(fd, closed));
            worst_oracle = worst_oracle.max(rel(oracle, closed));
            n += 1;
        }
    }
    verdict(
        n == 2500 && worst_fd <= 1e-6 && worst_oracle <= 1e-6,
        format!("{n} points, fd max rel {worst_fd:.2e}, analytic oracle max rel {worst_oracle:.2e}"),
    )
}

/// Rectangular-barrier transmission in closed form.
fn rect_exact(v0: f64, l: f64, e: f64) -> f64 {
    if e < v0 {
        let k = decay_constant(M_E, v0, e);
        1.0 / (1.0 + v0 * v0 * (k * l).sinh().powi(2) / (4.0 * e * (v0 - e)))
    } else {
        let q = (2.0 * M_E * (e - v0)).sqrt() / HBAR;
        1.0 / (1.0 + v0 * v0 * (q * l).sin().powi(2) / (4.0 * e * (e - v0)))
    }
}

fn scattering_exactness() -> Verdict {
    let v0 = 5.0 * EV;
    let l = 0.5e-9;
    let profile = PotentialProfile::rectangular(v0, l, M_E).unwrap();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let ratio = if i < 50 { 0.02 + 0.96 * i as f64 / 49.0 } else { 1.02 + 2.0 * (i - 50) as f64 / 49.0 };
        let e = ratio * v0;
        let t = transfer_matrix_scatter(&profile, e).unwrap().t_prob;
        worst = worst.max(rel(t, rect_exact(v0, l, e)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_u = 0.0f64;
    let mut done = 0;
    while done < 1000 {
        let segs: Vec<Segment> = (0..rng.gen_range(1..=5))
            .map(|_| Segment {
                width: rng.gen_range(0.05..1.0) * 1e-9,
                height: rng.gen_range(-5.0..20.0) * EV,
            })
            .collect();
        let p = PotentialProfile::new(segs, M_E).unwrap();
        if let Ok(r) = transfer_matrix_scatter(&p, rng.gen_range(0.1..30.0) * EV) {
            worst_u = worst_u.max(r.unitarity_defect());
            done += 1;
        }
    }
    verdict(
        worst <= 1e-8 && worst_u <= 1e-10,
        format!("100-point grid max rel {worst:.2e}; 1000 random profiles max unitarity defect {worst_u:.2e}"),
    )
}

fn margolus_levitin() -> Verdict {
    let e1 = EV;
    let a = Complex64::new(0.5f64.sqrt(), 0.0);
    let two = SpectralState::new([(0.0, a), (e1, a)]).unwrap();
    let t_perp = first_orthogonal_time(&two, DEFAULT_TOLERANCE).unwrap().unwrap();
    let bound = H / (4.0 * two.mean_energy());
    let saturation = rel(t_perp, bound);

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut measured, mut worst) = (0usize, f64::NEG_INFINITY);
    for k in 0..10_000 {
        let n = rng.gen_range(2..=8);
        let s = match k % 3 {
            0 => orthoclock::random_state(n, EV, &mut rng).unwrap(),
            1 => orthoclock::random_orthogonal_state(n, EV, &mut rng).unwrap(),
            _ => {
                let e = rng.gen_range(0.1..2.0) * EV;
                let amp = Complex64::new(1.0, 0.0);
                SpectralState::normalized((0..n).map(|j| (j as f64 * e, amp))).unwrap()
            }
        };
        if let Some(t) = first_orthogonal_time(&s, DEFAULT_TOLERANCE).unwrap() {
            measured += 1;
            let b = ml_bound(&s).unwrap().t_min;
            worst = worst.max((b - t) / b);
        }
    }
    verdict(
        saturation <= 1e-6 && measured > 0 && worst <= 1e-4,
        format!("two-level t/t_ML - 1 = {saturation:.2e}; {measured} of 10000 states orthogonalized, worst violation {worst:.2e}"),
    )
}

fn attoclock_decade() -> Verdict {
    // Synthetic atomic-scale barrier: 27.2 eV high, 1 angstrom wide, electron at 13.6 eV.
    let profile = PotentialProfile::rectangular(27.2 * EV, 1e-10, M_E).unwrap();
    let t = tunneling_time_closed(&profile, 13.6 * EV).unwrap().t_t;
    verdict((1e-17..=1e-15).contains(&t), format!("t_T = {:.1} as", t / 1e-18))
}

fn contraction() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut cases = 0;
    let tensor = |rows: usize, chi: usize, rng: &mut ChaCha8Rng| -> Vec<Vec<Complex64>> {
        (0..rows)
            .map(|_| (0..chi).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect()
    };
    for da in 2..=4 {
        for db in 2..=4 {
            for chi in 1..=8 {
                for _ in 0..10 {
                    let state = TwoSiteState {
                        x: tensor(da, chi, &mut rng),
                        y: tensor(db, chi, &mut rng),
                    };
                    let amp = contract_two_site(&state, false).unwrap();
                    for a in 0..da {
                        for b in 0..db {
                            let mut s = Complex64::new(0.0, 0.0);
                            for j in 0..chi {
                                s += state.x[a][j] * state.y[b][j];
                            }
                            worst = worst.max((amp[a][b] - s).norm());
                        }
                    }
                    cases += 1;
                }
            }
        }
    }
    let h = 0.5f64.sqrt();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let bell = TwoSiteState {
        x: vec![vec![one, zero], vec![zero, one]],
        y: vec![vec![one * h, zero], vec![zero, one * h]],
    };
    let amp = contract_two_site(&bell, false).unwrap();
    let expected = [[h, 0.0], [0.0, h]];
    let bell_err = (0..2)
        .flat_map(|a| (0..2).map(move |b| (a, b)))
        .map(|(a, b)| (amp[a][b] - Complex64::new(expected[a][b], 0.0)).norm())
        .fold(0.0, f64::max);
    verdict(
        worst <= 1e-12 && bell_err <= 1e-12,
        format!("{cases} random instances, max abs diff {worst:.1e}; Bell error {bell_err:.1e}"),
    )
}

fn flux_laws() -> Verdict {
    let mut worst = 0.0f64;
    for b in [1.0, 7.0, 100.0, 3.5e6] {
        for r in [1e-3, 0.5, 1.0, 2.0, 37.0, 6.371e6] {
            let a1 = entanglement_flux(b, r, FluxGeometry::AreaLaw2d).unwrap();
            let a2 = entanglement_flux(b, 2.0 * r, FluxGeometry::AreaLaw2d).unwrap();
            let v1 = entanglement_flux(b, r, FluxGeometry::Volume3d).unwrap();
            let v2 = entanglement_flux(b, 2.0 * r, FluxGeometry::Volume3d).unwrap();
            worst = worst.max(rel(a1 / a2, 2.0)).max(rel(v1 / v2, 4.0));
        }
    }
    let cli = run_cli(&["bondnet", "--flux", "100", "2.0", "area_law_2d"]);
    let f = quantity(&cli.stdout, "flux");
    let direct = rel(f, 100.0 / (4.0 * PI));
    verdict(
        worst <= 1e-15 && direct <= 1e-15,
        format!("max ratio error {worst:.1e}; CLI flux {f} vs 100/(4 pi)"),
    )
}

fn dimension_audit() -> Verdict {
    let path = data_file("constants_audit.txt");
    let text = std::fs::read_to_string(&path).unwrap();
    let audit = run_cli(&["check-eq", "--file", &path]);
    let rs = rows(&audit.stdout);
    let all_pass = rs.iter().all(|r| field(r, "status") == "pass");
    let covered = ["d0", "A0", "b", "E0", "c^7/(2*G^2*hbar)", "2*G*M/(r*c^2)"]
        .iter()
        .all(|needle| text.lines().any(|l| l.contains(needle) && l.contains("=>")));
    let bad = run_cli(&["check-eq", "--file", &temp_file("bad.txt", "c + G\n")]);
    let bad_rows = rows(&bad.stdout);
    let dim_err = bad_rows.len() == 1
        && field(&bad_rows[0], "status") == "fail"
        && field(&bad_rows[0], "error").contains("dimension");
    verdict(
        audit.code == 0 && all_pass && covered && bad.code == 1 && dim_err,
        format!(
            "audit exit {} with {} rows all pass = {all_pass}, coverage = {covered}; `c + G` exit {} dimension error = {dim_err}",
            audit.code,
            rs.len(),
            bad.code
        ),
    )
}

fn determinism() -> Verdict {
    let runs: [&[&str]; 4] = [
        &["transmission", "--v0", "10eV", "--width", "1nm", "--sweep", "energy=0.5eV:15eV:200"],
        &["tunneltime", "--v0", "10eV", "--method", "both", "--sweep", "energy=0.5eV:10eV:50", "--sweep", "width=0.2nm:2nm:7"],
        &["dilation", "--mass-kg", "1.98847e30", "--sweep", "x=1e-12:0.99:100:log"],
        &["mlbound", "--random", "12", "5"],
    ];
    let mut compared = 0;
    for args in runs {
        for format in ["csv", "json"] {
            let mut base: Vec<&str> = vec!["--format", format];
            base.extend_from_slice(args);
            let a = run_cli(&base);
            let b = run_cli(&base);
            let mut serial = base.clone();
            serial.push("--serial");
            let s = run_cli(&serial);
            if a.code != 0 || a.stdout != b.stdout || a.stdout != s.stdout || a.stdout.is_empty() {
                return verdict(false, format!("mismatch for {base:?}"));
            }
            compared += 1;
        }
    }
    verdict(true, format!("{compared} outputs byte-identical across repeat and serial-vs-parallel runs"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("constants reproduction", constants_reproduction),
        ("dilation equivalence", dilation_equivalence),
        ("tunneling-time oracle", tunneling_time_oracle),
        ("scattering exactness", scattering_exactness),
        ("Margolus-Levitin bound", margolus_levitin),
        ("attoclock decade", attoclock_decade),
        ("two-site contraction", contraction),
        ("flux laws", flux_laws),
        ("dimension audit", dimension_audit),
        ("determinism", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let v = check();
        let mark = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {mark} {name}: {} [{:.2?}]", i + 1, v.detail, t0.elapsed());
        if !v.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.2?}",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
