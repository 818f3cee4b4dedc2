//! Relaxation of typical, slow and local observables after a Néel quench.
//!
//! cargo run --release --example relax -- [n_sites]

use quenchlab::dynamics::GridLayout;
use quenchlab::experiment::{initial_state, ExperimentConfig, ExperimentKind};
use quenchlab::observables::{aligned_typical_observable, DEFAULT_THRESHOLD_FRACTION};
use quenchlab::prelude::*;
use quenchlab::spectral::DEFAULT_WEIGHT_FLOOR;

fn main() -> quenchlab::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(8);
    let cfg = ExperimentConfig::minimal(ExperimentKind::Relax, n);
    let psi0 = initial_state(&cfg)?;
    let h = build_local_chain(&ChainParams::with_sites(n))?;
    let eig = diagonalize(&h)?;
    let spec = occupied_spectrum(&eig, &psi0)?;
    let ts = timescales(&spec, DEFAULT_WEIGHT_FLOOR)?;
    println!(
        "N = {n}: tau_B = {:.4}, Heisenberg time = {:.2}, {} occupied levels",
        ts.boltzmann_time, ts.heisenberg_time, ts.occupied_levels
    );

    let layout = GridLayout {
        log_span_heisenberg: 5.0,
        ..GridLayout::default()
    };
    let grid = TimeGrid::for_timescales(&ts, &layout)?;
    let mut observables = vec![("slow".to_string(), slow_observable(&spec))];
    for seed in 0..3 {
        observables.push((
            format!("typical #{seed}"),
            aligned_typical_observable(&spec, seed)?,
        ));
    }
    observables.push((
        "sigma_z on site 0".into(),
        local_observable(psi0.spec(), 0, Axis::Z)?.in_eigenbasis(&eig)?,
    ));
    for (name, obs) in &observables {
        let series = expectation_series(&eig, &spec, obs, &grid)?;
        let eq = diagonal_ensemble(&spec, obs)?;
        let r = relaxation_time(&series, eq, DEFAULT_THRESHOLD_FRACTION)?;
        let shown = match r.relaxation.time() {
            Some(t) => format!("{:.3} tau_B", t / ts.boltzmann_time),
            None => "not relaxed".into(),
        };
        println!(
            "{name:>18}: <O(0)> = {:+.4}, equilibrium {:+.4}, relaxation {shown}",
            series.values()[0],
            eq
        );
    }
    Ok(())
}
