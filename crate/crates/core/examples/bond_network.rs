//! Bond accounting on a small tensor network: Bell-state contraction,
//! capacity, collapse propagation and the flux laws.

use num_complex::Complex64;
use tunclock::bondnet::{
    collapse_propagation_time_with, contract_two_site, entanglement_capacity, entanglement_flux, BondNetwork,
    DelayPolicy, FluxGeometry, TwoSiteState,
};

fn main() {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let bell = TwoSiteState {
        x: vec![vec![one, zero], vec![zero, one]],
        y: vec![vec![one, zero], vec![zero, one]],
    };
    let amp = contract_two_site(&bell, true).unwrap();
    println!("Bell amplitudes: 00 {} 01 {} 10 {} 11 {}", amp[0][0].re, amp[0][1].re, amp[1][0].re, amp[1][1].re);

    let net = BondNetwork::parse(
        "node core 0 0 0\n\
         node n1 1 0 0\nnode n2 0 1 0\nnode n3 0 0 1\n\
         node far 3 0 0\n\
         bond core n1 4\nbond core n2 4\nbond core n3 2\nbond n1 far 16\n",
    )
    .unwrap();
    let cap = entanglement_capacity(&net);
    println!("bonds {}  capacity {} bits", cap.bond_count, cap.total_log2_chi);
    for policy in [DelayPolicy::Log2Chi, DelayPolicy::LinearChi, DelayPolicy::Constant] {
        let t = collapse_propagation_time_with(&net, "core", 1.0, policy).unwrap();
        println!("collapse from core, {policy:?}: {t} tau_b");
    }

    println!("{:>6} {:>12} {:>12}", "r", "area 2d", "volume 3d");
    for r in [1.0, 2.0, 4.0, 8.0] {
        let a = entanglement_flux(100.0, r, FluxGeometry::AreaLaw2d).unwrap();
        let v = entanglement_flux(100.0, r, FluxGeometry::Volume3d).unwrap();
        println!("{r:>6} {a:>12.6} {v:>12.6}");
    }
}
