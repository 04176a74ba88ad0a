//! Tunneling delay from the energy derivative of ln T: closed form against
//! finite differences, plus the atomic-scale barrier that lands in the
//! attosecond range.

use tunclock::scatter::{opaque_transmission, PotentialProfile};
use tunclock::tuntime::{tunneling_time_closed, tunneling_time_fd};
use tunclock::units::{EV, M_E};

fn main() {
    let barrier = PotentialProfile::rectangular(10.0 * EV, 1e-9, M_E).unwrap();
    for e in [1.0, 5.0, 9.0, 9.99] {
        let closed = tunneling_time_closed(&barrier, e * EV).unwrap();
        let fd = tunneling_time_fd(|x| opaque_transmission(&barrier, x).unwrap_or(f64::NAN), e * EV).unwrap();
        println!(
            "E = {e:>5} eV  t_T = {:.6e} s  fd = {:.6e} s  (est. err {:.1e})",
            closed.t_t, fd.t_t, fd.estimated_error
        );
    }
    match tunneling_time_closed(&barrier, 10.0 * EV - 1e-30) {
        Ok(r) => println!("at the barrier top: {:e} s", r.t_t),
        Err(e) => println!("at the barrier top: {e}"),
    }

    let atomic = PotentialProfile::rectangular(27.2 * EV, 1e-10, M_E).unwrap();
    let t = tunneling_time_closed(&atomic, 13.6 * EV).unwrap().t_t;
    println!("27.2 eV, 1 A barrier at 13.6 eV: {:.1} as", t / 1e-18);
}
