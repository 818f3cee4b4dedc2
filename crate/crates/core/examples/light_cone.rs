//! Spreading of connected σᶻσᶻ correlations from the chain edge.
//!
//! cargo run --release --example light_cone -- [n_sites]

use quenchlab::experiment::{initial_state, ExperimentConfig, ExperimentKind};
use quenchlab::prelude::*;

fn main() -> quenchlab::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    let psi0 = initial_state(&ExperimentConfig::minimal(ExperimentKind::LightCone, n))?;
    let eig = diagonalize(&build_local_chain(&ChainParams::with_sites(n))?)?;
    let spec = occupied_spectrum(&eig, &psi0)?;
    let grid = TimeGrid::linear(6.0, 241)?;
    let front = light_cone(&eig, &spec, 0, &grid, 1e-2)?;
    println!("front velocity {:.3} sites per unit time", front.velocity);
    for (r, a) in front.radii.iter().zip(&front.arrival) {
        match a {
            Some(t) => println!("  r = {r:2}: arrival t = {t:.3}"),
            None => println!("  r = {r:2}: not reached"),
        }
    }
    Ok(())
}
