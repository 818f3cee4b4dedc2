//! Entanglement growth under the local chain and under its Haar-scrambled
//! twin, which has the same spectrum.
//!
//! cargo run --release --example entropy_scan -- [n_sites]

use quenchlab::entanglement::{page_value, DEFAULT_SATURATION_FRACTION};
use quenchlab::experiment::{initial_state, ExperimentConfig, ExperimentKind};
use quenchlab::hamiltonian::haar_unitary;
use quenchlab::prelude::*;
use quenchlab::spectral::DEFAULT_WEIGHT_FLOOR;

fn main() -> quenchlab::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(8);
    let psi0 = initial_state(&ExperimentConfig::minimal(ExperimentKind::EntropyScan, n))?;
    let local = diagonalize(&build_local_chain(&ChainParams::with_sites(n))?)?;
    let scrambled = local.rotated(haar_unitary(local.dim(), 1).as_ref());
    for (name, eig) in [("local", &local), ("scrambled", &scrambled)] {
        let spec = occupied_spectrum(eig, &psi0)?;
        let tb = timescales(&spec, DEFAULT_WEIGHT_FLOOR)?.boltzmann_time;
        let grid = TimeGrid::linear(20.0 * tb, 201)?;
        let profile = entropy_scan(eig, &spec, &prefix_cuts(n), &grid)?;
        println!("{name} (Page value {:.3}):", page_value(n));
        for k in [0, 10, 40, 200] {
            let s: Vec<String> = profile
                .at_time(k)
                .iter()
                .map(|x| format!("{x:.3}"))
                .collect();
            println!(
                "  t = {:5.2} tau_B  S(l) = [{}]",
                grid.times()[k] / tb,
                s.join(", ")
            );
        }
        for c in growth_fit(&profile, DEFAULT_SATURATION_FRACTION).cuts {
            println!(
                "  cut {}: rate {:.3}, r^2 {:.3}, {:?}",
                c.region.len(),
                c.rate,
                c.r_squared,
                c.status
            );
        }
    }
    Ok(())
}
