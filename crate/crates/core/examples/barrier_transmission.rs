//! Transfer-matrix transmission through a rectangular barrier and a double
//! barrier, against the opaque-barrier exponential.

use tunclock::scatter::{opaque_transmission, transfer_matrix_scatter, PotentialProfile, Segment};
use tunclock::units::{EV, M_E};

fn main() {
    let barrier = PotentialProfile::rectangular(10.0 * EV, 1e-9, M_E).unwrap();
    println!("{:>8} {:>14} {:>14} {:>10}", "E (eV)", "T exact", "T opaque", "defect");
    for e in [1.0, 2.5, 5.0, 7.5, 9.0, 12.0, 20.0] {
        let r = transfer_matrix_scatter(&barrier, e * EV).unwrap();
        let opaque = opaque_transmission(&barrier, e * EV).map_or("-".to_string(), |t| format!("{t:.4e}"));
        println!("{e:>8} {:>14.4e} {opaque:>14} {:>10.1e}", r.t_prob, r.unitarity_defect());
    }

    // Two 0.3 nm walls with a 1 nm well: resonances show up as T close to 1.
    let wall = Segment { width: 0.3e-9, height: 5.0 * EV };
    let gap = Segment { width: 1e-9, height: 0.0 };
    let double = PotentialProfile::new(vec![wall, gap, wall], M_E).unwrap();
    let (mut best_e, mut best_t) = (0.0, 0.0);
    for i in 1..2000 {
        let e = i as f64 * 0.0025 * EV;
        let t = transfer_matrix_scatter(&double, e).map(|r| r.t_prob).unwrap_or(0.0);
        if t > best_t {
            (best_e, best_t) = (e, t);
        }
    }
    println!("double barrier: first resonance near {:.4} eV, T = {best_t:.6}", best_e / EV);
}
