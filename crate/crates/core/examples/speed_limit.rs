//! First orthogonality times against the Margolus-Levitin bound h/(4<E>).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tunclock::orthoclock::{first_orthogonal_time, ml_bound, random_orthogonal_state, SpectralState, DEFAULT_TOLERANCE};
use tunclock::units::EV;

fn report(label: &str, s: &SpectralState) {
    let b = ml_bound(s).unwrap();
    match first_orthogonal_time(s, DEFAULT_TOLERANCE).unwrap() {
        Some(t) => println!("{label:<22} t = {t:.6e} s  bound = {:.6e} s  t/bound = {:.6}", b.t_min, t / b.t_min),
        None => println!("{label:<22} never orthogonal   bound = {:.6e} s", b.t_min),
    }
}

fn main() {
    let a = Complex64::new(1.0, 0.0);
    report("two levels, 1 eV", &SpectralState::normalized([(0.0, a), (EV, a)]).unwrap());
    report("ladder of 4", &SpectralState::normalized((0..4).map(|k| (k as f64 * EV, a))).unwrap());
    report(
        "unequal weights",
        &SpectralState::normalized([(0.0, a * 0.8), (EV, a * 0.6)]).unwrap(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for n in [3, 8, 16] {
        report(&format!("random, {n} levels"), &random_orthogonal_state(n, EV, &mut rng).unwrap());
    }
    let one_joule = SpectralState::normalized([(0.0, a), (2.0, a)]).unwrap();
    println!("max rate at <E> = 1 J: {:e} states/s", ml_bound(&one_joule).unwrap().rate);
}
