//! Evaluate constant expressions with dimension checking.
//!
//! cargo run --example dimension_check -- "c^7/(2*G^2*hbar)"

use tunclock::dimparse::{check_dimension, evaluate, parse};
use tunclock::units::{ConstantsRegistry, DimensionVector, Quantity};

fn main() {
    let reg = ConstantsRegistry::codata2018();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let exprs: Vec<&str> = if args.is_empty() {
        vec!["sqrt(hbar*G/c^3)", "c^7/(2*G^2*hbar)", "c + G", "1 + "]
    } else {
        args.iter().map(String::as_str).collect()
    };
    for src in exprs {
        match parse(src) {
            Err(e) => println!("{src:<24} parse error: {e}"),
            Ok(expr) => match evaluate(&expr, reg) {
                Ok(q) => println!("{src:<24} = {:e} {}", q.value(), q.dim()),
                Err(e) => println!("{src:<24} {e}"),
            },
        }
    }

    // Bind situational values, then check the Schwarzschild ratio is a pure number.
    let earth = reg
        .with("M", Quantity::new(5.9722e24, DimensionVector::mass()).unwrap())
        .and_then(|r| r.with("r", Quantity::new(6.371e6, DimensionVector::length()).unwrap()))
        .unwrap();
    let ratio = parse("2*G*M/(r*c^2)").unwrap();
    let report = check_dimension(&ratio, &DimensionVector::dimensionless(), &earth).unwrap();
    println!("2GM/(rc^2) for Earth: {:e} (dimensionless: {})", evaluate(&ratio, &earth).unwrap().value(), report.pass());
}
