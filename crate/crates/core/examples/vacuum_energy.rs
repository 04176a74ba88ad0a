//! The derived constants: A0, d0, E0, m0 and both forms of the vacuum energy
//! density, for the Planck length and a few other choices of b.

use tunclock::gravclock::{default_d0, derive_constants};
use tunclock::units::planck_length;

fn main() {
    let k = derive_constants(planck_length(), default_d0()).unwrap();
    println!("b      = {:e} m", k.b);
    println!("d0     = {:e} m", k.d0);
    println!("A0     = {} s^-1", k.a0);
    println!("E0     = {:e} J", k.e0);
    println!("m0     = {:e} kg", k.m0);
    println!("rho_E  = {:e} J/m^3 (E0/b^3)", k.rho_e);
    println!("         {:e} J/m^3 (c^7/(2 G^2 hbar))", k.rho_e_closed);

    for scale in [1e3, 1e10, 1e20] {
        let b = scale * planck_length();
        let k = derive_constants(b, default_d0()).unwrap();
        println!("b = {scale:e} l_p: E0 = {:.3e} J, E0/b^3 = {:.3e} J/m^3", k.e0, k.rho_e);
    }
}
