//! Sweep engine: a (V0, E) grid of tunneling times written as CSV, with the
//! rows above the barrier recorded as errors rather than dropped.

use tunclock::scatter::PotentialProfile;
use tunclock::sweep::{run_sweep, Axis, Evaluation, Failure, Scale, SweepSpec};
use tunclock::tuntime::tunneling_time_closed;
use tunclock::units::{EV, M_E};

fn main() {
    let spec = SweepSpec::new(
        vec![
            Axis::new("v0_J", 2.0 * EV, 10.0 * EV, 3, Scale::Linear).unwrap(),
            Axis::new("energy_J", 0.1 * EV, 8.0 * EV, 5, Scale::Log).unwrap(),
        ],
        &["t_t_s"],
    )
    .unwrap();
    let table = run_sweep(&spec, Evaluation::Parallel, |p| {
        let barrier = PotentialProfile::rectangular(p[0], 1e-9, M_E).map_err(|e| Failure::new("invalid", e.to_string()))?;
        tunneling_time_closed(&barrier, p[1])
            .map(|r| vec![r.t_t.into()])
            .map_err(|e| Failure::new("domain-error", e.to_string()))
    })
    .unwrap();
    table.write_csv(std::io::stdout().lock()).unwrap();
}
