//! Experiment runner: turns a validated [`ExperimentConfig`] into data files
//! and a digest manifest.
//!
//! Every output is a pure function of the configuration and its master
//! seed. Parallel work is collected in input order, so the worker count
//! never changes a byte.

mod config;
mod output;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::{diagonal_ensemble, expectation_series, TimeGrid};
use crate::entanglement::{
    entropy_scan, growth_fit, light_cone, page_value, prefix_cuts, spearman, CorrelationFront,
    EntanglementProfile, GrowthFit,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_goe, build_local_chain, haar_unitary};
use crate::hilbert::{product_state, PureState, SiteRegion, MAX_SITES};
use crate::linalg::C64;
use crate::observables::{
    local_observable, relaxation_time, slow_observable_with_floor, typical_observable, Axis,
    BasisTag, ObservableClass, ObservableMatrix, Relaxation, RelaxationReport,
};
use crate::seed::derive_seed;
use crate::spectral::{
    diagonalize, dos_fit, occupied_spectrum, timescales, EigenSystem, GaussianFit, SpectralData,
    Timescales,
};

pub use config::{
    validate, EntanglementConfig, ExperimentConfig, ExperimentKind, InitialStateConfig,
    LightConeConfig, LocalRequest, ModelConfig, ObservableRequests, SpectralConfig, StatePattern,
    Variant, DEFAULT_LIGHT_CONE_THRESHOLD, DEFAULT_TYPICAL_COUNT,
};
pub use output::{format_float, sha256_hex, FileRecord, OutputSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one run. `config` is the normalized configuration without its
/// output directory, so relocating a run does not change the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub timescales: BTreeMap<String, Timescales>,
    pub files: Vec<FileRecord>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `0` lets the pool decide.
    pub threads: usize,
}

/// A quenched system: eigensystem, initial-state overlaps and timescales.
#[derive(Debug, Clone)]
pub struct Quench {
    pub eig: EigenSystem,
    pub spec: SpectralData,
    pub timescales: Timescales,
}

/// The configured product state.
pub fn initial_state(cfg: &ExperimentConfig) -> Result<PureState> {
    let n = cfg.model.n_sites;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let (up, down) = ([one, zero], [zero, one]);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let locals: Vec<[C64; 2]> = match cfg.initial_state.pattern {
        StatePattern::AllUp => vec![up; n],
        StatePattern::Neel => (0..n).map(|i| if i % 2 == 0 { up } else { down }).collect(),
        StatePattern::AllPlusX => vec![[C64::new(s, 0.0); 2]; n],
        StatePattern::Custom if !cfg.initial_state.bits.is_empty() => cfg
            .initial_state
            .bits
            .iter()
            .map(|&b| if b == 0 { up } else { down })
            .collect(),
        StatePattern::Custom => cfg
            .initial_state
            .bloch
            .iter()
            .map(|&[theta, phi]| {
                [
                    C64::new((theta / 2.0).cos(), 0.0),
                    C64::from_polar((theta / 2.0).sin(), phi),
                ]
            })
            .collect(),
    };
    if locals.len() != n {
        return Err(Error::InvalidArgument(format!(
            "initial state has {} sites, model has {n}",
            locals.len()
        )));
    }
    product_state(&locals)
}

fn quench_from(eig: EigenSystem, psi0: &PureState, weight_floor: f64) -> Result<Quench> {
    let spec = occupied_spectrum(&eig, psi0)?;
    let timescales = timescales(&spec, weight_floor)?;
    Ok(Quench {
        eig,
        spec,
        timescales,
    })
}

/// Diagonalizes the configured Hamiltonian and projects the initial state.
///
/// The scrambled variant reuses the local eigensystem rotated by the Haar
/// unitary, which is exactly the eigensystem of `U H U†`.
pub fn prepare(cfg: &ExperimentConfig, variant: Variant) -> Result<Quench> {
    let psi0 = initial_state(cfg)?;
    let floor = cfg.spectral.weight_floor;
    let h = build_local_chain(&cfg.model.chain(cfg.master_seed))?;
    let local = diagonalize(&h)?;
    match variant {
        Variant::Local => quench_from(local, &psi0, floor),
        Variant::Scrambled => {
            let u = haar_unitary(local.dim(), derive_seed(cfg.master_seed, "scramble"));
            quench_from(local.rotated(u.as_ref()), &psi0, floor)
        }
        Variant::Goe => {
            let local = quench_from(local, &psi0, floor)?;
            goe_partner(cfg, &local, &psi0)
        }
    }
}

/// Gaussian-ensemble Hamiltonian whose spectrum has the mean and width of
/// the local quench's occupied density of states.
pub fn goe_partner(cfg: &ExperimentConfig, local: &Quench, psi0: &PureState) -> Result<Quench> {
    let ts = &local.timescales;
    let h = build_goe(
        local.eig.dim(),
        ts.energy_mean,
        ts.energy_width,
        derive_seed(cfg.master_seed, "goe"),
    )?;
    quench_from(diagonalize(&h)?, psi0, cfg.spectral.weight_floor)
}

/// A named observable ready for evaluation in the eigenbasis.
pub struct NamedObservable {
    pub label: String,
    pub class: ObservableClass,
    pub seed: Option<u64>,
    pub matrix: ObservableMatrix,
}

/// Typical observables from the configured seeds, phase-aligned if asked.
pub fn typical_observables(cfg: &ExperimentConfig, q: &Quench) -> Result<Vec<NamedObservable>> {
    let width = cfg
        .observables
        .typical_seeds
        .len()
        .max(1)
        .to_string()
        .len()
        .max(2);
    cfg.observables
        .typical_seeds
        .iter()
        .enumerate()
        .map(|(k, &seed)| {
            let raw = typical_observable(q.eig.dim(), seed)?;
            let matrix = if cfg.observables.align_typical {
                raw.phase_aligned(&q.spec)?
            } else {
                raw
            };
            Ok(NamedObservable {
                label: format!("typical_{k:0width$}"),
                class: ObservableClass::Typical,
                seed: Some(seed),
                matrix,
            })
        })
        .collect()
}

fn requested_observables(cfg: &ExperimentConfig, q: &Quench) -> Result<Vec<NamedObservable>> {
    let mut obs = typical_observables(cfg, q)?;
    if cfg.observables.slow {
        obs.push(NamedObservable {
            label: "slow".into(),
            class: ObservableClass::Slow,
            seed: None,
            matrix: slow_observable_with_floor(&q.spec, cfg.spectral.weight_floor),
        });
    }
    if cfg.observables.identity {
        obs.push(NamedObservable {
            label: "identity".into(),
            class: ObservableClass::Custom,
            seed: None,
            matrix: ObservableMatrix::identity(q.eig.dim(), BasisTag::Eigen),
        });
    }
    let spec = q.eig.hilbert_spec()?;
    for l in &cfg.observables.local {
        let axis = match l.axis {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        obs.push(NamedObservable {
            label: format!("local_{axis}_{}", l.site),
            class: ObservableClass::Local,
            seed: None,
            matrix: local_observable(spec, l.site, l.axis)?.in_eigenbasis(&q.eig)?,
        });
    }
    Ok(obs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub label: String,
    pub class: ObservableClass,
    pub seed: Option<u64>,
    pub report: RelaxationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxSummary {
    pub grid_points: usize,
    pub observables: Vec<ObservableReport>,
    /// Median over typical observables; `None` if it did not relax.
    pub typical_median_relaxation: Option<f64>,
    pub slow_to_typical_ratio: Option<f64>,
}

/// Median of relaxation times, counting `NotRelaxed` as infinite.
pub fn median_relaxation(r: &[Relaxation]) -> Option<f64> {
    if r.is_empty() {
        return None;
    }
    let mut t: Vec<f64> = r
        .iter()
        .map(|x| x.time().unwrap_or(f64::INFINITY))
        .collect();
    t.sort_by(f64::total_cmp);
    let k = t.len();
    let m = if k % 2 == 1 {
        t[k / 2]
    } else {
        0.5 * (t[k / 2 - 1] + t[k / 2])
    };
    m.is_finite().then_some(m)
}

/// Evaluates observables along the grid and writes one `t,value` file each
/// under `prefix`.
fn relax_observables(
    q: &Quench,
    obs: &[NamedObservable],
    grid: &TimeGrid,
    threshold: f64,
    out: &mut OutputSet,
    prefix: &str,
) -> Result<RelaxSummary> {
    let mut reports = Vec::with_capacity(obs.len());
    for o in obs {
        let series = expectation_series(&q.eig, &q.spec, &o.matrix, grid)?;
        let eq = diagonal_ensemble(&q.spec, &o.matrix)?;
        let report = relaxation_time(&series, eq, threshold)?;
        out.write_series(
            &format!("{prefix}series/{}.csv", o.label),
            series.times(),
            series.values(),
        )?;
        reports.push(ObservableReport {
            label: o.label.clone(),
            class: o.class,
            seed: o.seed,
            report,
        });
    }
    let typical: Vec<Relaxation> = reports
        .iter()
        .filter(|r| r.class == ObservableClass::Typical)
        .map(|r| r.report.relaxation)
        .collect();
    let typical_median_relaxation = median_relaxation(&typical);
    let slow_to_typical_ratio = reports
        .iter()
        .find(|r| r.class == ObservableClass::Slow)
        .and_then(|r| r.report.relaxation.time())
        .zip(typical_median_relaxation)
        .map(|(s, t)| s / t);
    Ok(RelaxSummary {
        grid_points: grid.len(),
        observables: reports,
        typical_median_relaxation,
        slow_to_typical_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosReport {
    pub fit: GaussianFit,
    pub timescales: Timescales,
}

fn write_dos(
    q: &Quench,
    cfg: &ExperimentConfig,
    out: &mut OutputSet,
    prefix: &str,
) -> Result<DosReport> {
    let mut s = String::from("energy,weight\n");
    for (e, w) in q.spec.eigenvalues().iter().zip(q.spec.weights()) {
        let _ = writeln!(s, "{},{}", format_float(*e), format_float(*w));
    }
    out.write(&format!("{prefix}dos.csv"), s.as_bytes())?;
    let report = DosReport {
        fit: dos_fit(&q.spec, cfg.spectral.weight_floor)?,
        timescales: q.timescales,
    };
    out.write_json(&format!("{prefix}dos_fit.json"), &report)?;
    Ok(report)
}

fn cuts(cfg: &ExperimentConfig) -> Result<Vec<SiteRegion>> {
    cfg.entanglement
        .cuts
        .iter()
        .map(|&l| SiteRegion::prefix(l))
        .collect()
}

fn write_profile(p: &EntanglementProfile, out: &mut OutputSet, rel: &str) -> Result<()> {
    let mut s = String::from("t,cut,entropy_nats\n");
    for (k, t) in p.times().iter().enumerate() {
        for (c, region) in p.cuts.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{}",
                format_float(*t),
                region.len(),
                format_float(p.entropy[c][k])
            );
        }
    }
    out.write(rel, s.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub growth: GrowthFit,
    pub page_value: f64,
    pub violations: Vec<String>,
}

fn write_front(f: &CorrelationFront, out: &mut OutputSet) -> Result<()> {
    let mut s = String::from("t,r,correlation\n");
    for (k, t) in f.grid.times().iter().enumerate() {
        for (i, r) in f.radii.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{}",
                format_float(*t),
                r,
                format_float(f.correlator[i][k])
            );
        }
    }
    out.write("correlation.csv", s.as_bytes())?;
    #[derive(Serialize)]
    struct Front<'a> {
        reference_site: usize,
        threshold: f64,
        velocity: f64,
        radii: &'a [usize],
        arrival: &'a [Option<f64>],
    }
    out.write_json(
        "front.json",
        &Front {
            reference_site: f.reference_site,
            threshold: f.threshold,
            velocity: f.velocity,
            radii: &f.radii,
            arrival: &f.arrival,
        },
    )
}

/// Entropy snapshot at multiples of the Boltzmann time, used to compare
/// entanglement structure between equivalent Hamiltonians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeLawCheck {
    /// Multiples of `τ_B` at which the entropy was sampled.
    pub times_boltzmann: Vec<f64>,
    /// Rank correlation of `S(ℓ)` with `min(ℓ, N − ℓ)` at `τ_B`.
    pub spearman_at_boltzmann: f64,
    /// Half-chain entropy at `5 τ_B` divided by the Page value.
    pub half_chain_page_fraction: f64,
}

pub fn volume_law_check(q: &Quench) -> Result<(EntanglementProfile, VolumeLawCheck)> {
    let n = q.eig.hilbert_spec()?.n_sites();
    let tb = q.timescales.boltzmann_time;
    let multiples = vec![0.0, 1.0, 5.0];
    let grid = TimeGrid::from_times(multiples.iter().map(|m| m * tb).collect())?;
    let profile = entropy_scan(&q.eig, &q.spec, &prefix_cuts(n), &grid)?;
    let sizes: Vec<f64> = profile
        .cuts
        .iter()
        .map(|c| c.len().min(n - c.len()) as f64)
        .collect();
    let check = VolumeLawCheck {
        times_boltzmann: multiples,
        spearman_at_boltzmann: spearman(&profile.at_time(1), &sizes),
        half_chain_page_fraction: profile.entropy[n / 2 - 1][2] / page_value(n),
    };
    Ok((profile, check))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceSide {
    pub dos: DosReport,
    pub relax: RelaxSummary,
    pub volume_law: VolumeLawCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub local: EquivalenceSide,
    pub goe: EquivalenceSide,
    /// Median typical relaxation time, GOE over local.
    pub relaxation_ratio: Option<f64>,
}

fn equivalence_side(
    cfg: &ExperimentConfig,
    q: &Quench,
    out: &mut OutputSet,
    prefix: &str,
) -> Result<EquivalenceSide> {
    let dos = write_dos(q, cfg, out, prefix)?;
    let grid = TimeGrid::for_timescales(&q.timescales, &cfg.time_grid)?;
    let obs = typical_observables(cfg, q)?;
    let relax = relax_observables(
        q,
        &obs,
        &grid,
        cfg.observables.threshold_fraction,
        out,
        prefix,
    )?;
    let (profile, volume_law) = volume_law_check(q)?;
    write_profile(&profile, out, &format!("{prefix}entropy.csv"))?;
    Ok(EquivalenceSide {
        dos,
        relax,
        volume_law,
    })
}

fn execute(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<BTreeMap<String, Timescales>> {
    let mut ts = BTreeMap::new();
    let variant_name = |v: Variant| match v {
        Variant::Local => "local",
        Variant::Scrambled => "scrambled",
        Variant::Goe => "goe",
    };
    if cfg.kind == ExperimentKind::Equivalence {
        let psi0 = initial_state(cfg)?;
        let local = prepare(cfg, Variant::Local)?;
        let goe = goe_partner(cfg, &local, &psi0)?;
        ts.insert("local".into(), local.timescales);
        ts.insert("goe".into(), goe.timescales);
        let l = equivalence_side(cfg, &local, out, "local/")?;
        let g = equivalence_side(cfg, &goe, out, "goe/")?;
        let relaxation_ratio = g
            .relax
            .typical_median_relaxation
            .zip(l.relax.typical_median_relaxation)
            .map(|(a, b)| a / b);
        out.write_json(
            "equivalence.json",
            &EquivalenceReport {
                local: l,
                goe: g,
                relaxation_ratio,
            },
        )?;
        return Ok(ts);
    }
    let q = prepare(cfg, cfg.model.variant)?;
    ts.insert(variant_name(cfg.model.variant).into(), q.timescales);
    match cfg.kind {
        ExperimentKind::Relax => {
            let grid = TimeGrid::for_timescales(&q.timescales, &cfg.time_grid)?;
            let obs = requested_observables(cfg, &q)?;
            let summary =
                relax_observables(&q, &obs, &grid, cfg.observables.threshold_fraction, out, "")?;
            out.write_json("relaxation.json", &summary)?;
        }
        ExperimentKind::Dos => {
            write_dos(&q, cfg, out, "")?;
        }
        ExperimentKind::EntropyScan => {
            let grid = TimeGrid::for_timescales(&q.timescales, &cfg.time_grid)?;
            let profile = entropy_scan(&q.eig, &q.spec, &cuts(cfg)?, &grid)?;
            write_profile(&profile, out, "entropy.csv")?;
            let n = cfg.model.n_sites;
            out.write_json(
                "growth_fit.json",
                &EntropyReport {
                    growth: growth_fit(&profile, cfg.entanglement.saturation_fraction),
                    page_value: page_value(n),
                    violations: profile.violations(),
                },
            )?;
        }
        ExperimentKind::LightCone => {
            let grid = TimeGrid::for_timescales(&q.timescales, &cfg.time_grid)?;
            let front = light_cone(
                &q.eig,
                &q.spec,
                cfg.light_cone.reference_site,
                &grid,
                cfg.light_cone.threshold,
            )?;
            write_front(&front, out)?;
        }
        ExperimentKind::Equivalence => unreachable!("handled above"),
    }
    Ok(ts)
}

/// Validates and runs an experiment, writing into `config.output_dir`.
/// On failure every file written so far is removed.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest> {
    let cfg = validate(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let mut out = OutputSet::new(&cfg.output_dir);
    let result = pool
        .install(|| execute(&cfg, &mut out))
        .and_then(|timescales| {
            let mut echo = serde_json::to_value(&cfg).map_err(|e| Error::Io(e.to_string()))?;
            if let Some(map) = echo.as_object_mut() {
                map.remove("output_dir");
            }
            let manifest = RunManifest {
                tool: "quenchlab".into(),
                version: VERSION.into(),
                kind: cfg.kind,
                master_seed: cfg.master_seed,
                config: echo,
                timescales,
                files: out.files().to_vec(),
            };
            out.write_json(MANIFEST_FILE, &manifest)?;
            Ok(manifest)
        });
    if result.is_err() {
        out.rollback();
    }
    result
}

/// Version and desk-scale limits.
pub fn info() -> String {
    format!(
        "quenchlab {VERSION}\n\
         max sites: {MAX_SITES} (Hilbert dimension {})\n\
         dense diagonalization is practical up to 12 sites\n\
         experiment kinds: relax, dos, entropy_scan, light_cone, equivalence\n\
         model variants: local, scrambled, goe\n",
        1usize << MAX_SITES
    )
}
