//! Krylov propagation checked against the exact spectral propagator.
//!
//! cargo run --release --example krylov -- [n_sites]

use quenchlab::experiment::{initial_state, ExperimentConfig, ExperimentKind};
use quenchlab::prelude::*;

fn main() -> quenchlab::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(8);
    let psi0 = initial_state(&ExperimentConfig::minimal(ExperimentKind::Relax, n))?;
    let h = build_local_chain(&ChainParams::with_sites(n))?;
    let eig = diagonalize(&h)?;
    let spec = occupied_spectrum(&eig, &psi0)?;
    let dt = 0.25;
    let mut psi = psi0;
    for step in 1..=20 {
        let k = krylov_evolve(&h, &psi, dt, 30)?;
        psi = k.state;
        let exact = evolve_spectral(&eig, &spec, step as f64 * dt)?;
        if step % 5 == 0 {
            println!(
                "t = {:5.2}: 1 - fidelity = {:.2e}, substeps {}, error estimate {:.1e}",
                step as f64 * dt,
                1.0 - psi.fidelity(&exact),
                k.substeps,
                k.max_error_estimate
            );
        }
    }
    Ok(())
}
