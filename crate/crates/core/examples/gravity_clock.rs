//! Gravitational dilation rebuilt from a tunneling delay, next to the
//! Schwarzschild factor.

use tunclock::gravclock::{
    collapse_transmission, dilation_excess, dilation_gr, dilation_tunneling, schwarzschild_radius, DilationParams,
};

fn main() {
    let bodies = [
        ("Earth", 5.9722e24, 6.371e6),
        ("Sun", 1.98847e30, 6.957e8),
        ("white dwarf", 1.2e30, 7.0e6),
        ("neutron star", 2.7837e30, 1.2e4),
    ];
    for (name, m, r) in bodies {
        let p = DilationParams::new(m, r).unwrap();
        let d = dilation_tunneling(&p).unwrap();
        let gr = dilation_gr(m, r).unwrap();
        let ct = collapse_transmission(&p).unwrap();
        println!(
            "{name:<13} x = {:.4e}  A0 t_T = {:.15}  GR = {gr:.15}  excess = {:.4e}  T_c regime {:?}",
            d.schwarzschild_ratio,
            d.delta_t_min,
            dilation_excess(m, r).unwrap(),
            ct.regime
        );
    }

    let m = 1.98847e30;
    let rs = schwarzschild_radius(m);
    for f in [2.0, 1.1, 1.0001, 0.9] {
        match dilation_tunneling(&DilationParams::new(m, f * rs).unwrap()) {
            Ok(d) => println!("r = {f} r_s: factor {:.6}", d.delta_t_min),
            Err(e) => println!("r = {f} r_s: {e}"),
        }
    }
}
