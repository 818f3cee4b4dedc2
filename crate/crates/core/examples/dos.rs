//! Gaussian fit of the occupied density of states for several product
//! states.
//!
//! cargo run --release --example dos -- [n_sites]

use quenchlab::experiment::{initial_state, ExperimentConfig, ExperimentKind, StatePattern};
use quenchlab::prelude::*;
use quenchlab::spectral::DEFAULT_WEIGHT_FLOOR;

fn main() -> quenchlab::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    let eig = diagonalize(&build_local_chain(&ChainParams::with_sites(n))?)?;
    let mut cfg = ExperimentConfig::minimal(ExperimentKind::Dos, n);
    for pattern in [
        StatePattern::Neel,
        StatePattern::AllUp,
        StatePattern::AllPlusX,
    ] {
        cfg.initial_state.pattern = pattern;
        let spec = occupied_spectrum(&eig, &initial_state(&cfg)?)?;
        let fit = dos_fit(&spec, DEFAULT_WEIGHT_FLOOR)?;
        println!(
            "{pattern:?}: mean {:+.3}, sigma {:.3}, skewness {:+.3}, excess kurtosis {:+.3}, CDF distance {:.3}",
            fit.mean, fit.sigma, fit.skewness, fit.excess_kurtosis, fit.max_cdf_deviation
        );
    }
    Ok(())
}
