//! Runs the equivalence experiment through the configuration layer: the
//! local chain against a Gaussian-ensemble Hamiltonian with the same
//! occupied mean energy and width.
//!
//! cargo run --release --example equivalence -- [output_dir]

use quenchlab::experiment::{run, EquivalenceReport, ExperimentConfig, ExperimentKind, RunOptions};

fn main() -> quenchlab::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/equivalence".into());
    let mut cfg = ExperimentConfig::minimal(ExperimentKind::Equivalence, 8);
    cfg.output_dir = dir.clone();
    cfg.time_grid.log_points = 0;
    let manifest = run(&cfg, &RunOptions::default())?;
    println!("{} files written to {dir}", manifest.files.len());
    let text = std::fs::read_to_string(format!("{dir}/equivalence.json"))?;
    let report: EquivalenceReport =
        serde_json::from_str(&text).map_err(|e| quenchlab::Error::Io(e.to_string()))?;
    for (name, side) in [("local", &report.local), ("goe", &report.goe)] {
        println!(
            "{name:>5}: sigma {:.3}, skewness {:+.3}, typical relaxation {:?}, Spearman at tau_B {:+.3}, half-chain/Page {:.3}",
            side.dos.fit.sigma,
            side.dos.fit.skewness,
            side.relax.typical_median_relaxation,
            side.volume_law.spearman_at_boltzmann,
            side.volume_law.half_chain_page_fraction
        );
    }
    println!("relaxation ratio goe/local: {:?}", report.relaxation_ratio);
    Ok(())
}
