//! Declarative experiment configuration and its validation.

use serde::{Deserialize, Serialize};

use crate::dynamics::GridLayout;
use crate::entanglement::DEFAULT_SATURATION_FRACTION;
use crate::error::{Error, Result};
use crate::hamiltonian::{Boundary, ChainParams};
use crate::hilbert::MAX_SITES;
use crate::observables::{Axis, DEFAULT_THRESHOLD_FRACTION};
use crate::seed::derive_seed;
use crate::spectral::DEFAULT_WEIGHT_FLOOR;

pub const DEFAULT_LIGHT_CONE_THRESHOLD: f64 = 1e-2;
pub const DEFAULT_TYPICAL_COUNT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Relax,
    Dos,
    EntropyScan,
    LightCone,
    Equivalence,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Relax => "relax",
            ExperimentKind::Dos => "dos",
            ExperimentKind::EntropyScan => "entropy_scan",
            ExperimentKind::LightCone => "light_cone",
            ExperimentKind::Equivalence => "equivalence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Local,
    /// Haar-conjugated local chain.
    Scrambled,
    /// Gaussian-ensemble matrix matching the local chain's occupied mean
    /// energy and width.
    Goe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: Variant,
    pub n_sites: usize,
    pub coupling: f64,
    pub transverse_field: f64,
    pub longitudinal_field: f64,
    pub disorder_width: f64,
    pub boundary: Boundary,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let p = ChainParams::default();
        Self {
            variant: Variant::Local,
            n_sites: p.n_sites,
            coupling: p.coupling,
            transverse_field: p.transverse_field,
            longitudinal_field: p.longitudinal_field,
            disorder_width: p.disorder_width,
            boundary: p.boundary,
        }
    }
}

impl ModelConfig {
    /// Chain parameters with the disorder seed derived from `master_seed`.
    pub fn chain(&self, master_seed: u64) -> ChainParams {
        ChainParams {
            n_sites: self.n_sites,
            coupling: self.coupling,
            transverse_field: self.transverse_field,
            longitudinal_field: self.longitudinal_field,
            disorder_width: self.disorder_width,
            boundary: self.boundary,
            seed: derive_seed(master_seed, "disorder"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatePattern {
    AllUp,
    /// Up on even sites, down on odd sites.
    Neel,
    AllPlusX,
    /// Per-site `bits` or Bloch angles `bloch = [[theta, phi], ...]`.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialStateConfig {
    pub pattern: StatePattern,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bits: Vec<u8>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bloch: Vec<[f64; 2]>,
}

impl Default for InitialStateConfig {
    fn default() -> Self {
        Self {
            pattern: StatePattern::Neel,
            bits: Vec::new(),
            bloch: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalRequest {
    pub site: usize,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservableRequests {
    pub typical_count: usize,
    /// Explicit seeds; derived from `master_seed` when left empty.
    pub typical_seeds: Vec<u64>,
    /// Align typical observables with the initial-state phases so that they
    /// start away from equilibrium.
    pub align_typical: bool,
    pub slow: bool,
    pub identity: bool,
    pub local: Vec<LocalRequest>,
    pub threshold_fraction: f64,
}

impl Default for ObservableRequests {
    fn default() -> Self {
        Self {
            typical_count: DEFAULT_TYPICAL_COUNT,
            typical_seeds: Vec::new(),
            align_typical: true,
            slow: true,
            identity: false,
            local: Vec::new(),
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntanglementConfig {
    /// Prefix lengths `ℓ` of the cuts `[0, ℓ)`; all of `1..n_sites` when empty.
    pub cuts: Vec<usize>,
    pub saturation_fraction: f64,
}

impl Default for EntanglementConfig {
    fn default() -> Self {
        Self {
            cuts: Vec::new(),
            saturation_fraction: DEFAULT_SATURATION_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LightConeConfig {
    pub reference_site: usize,
    pub threshold: f64,
}

impl Default for LightConeConfig {
    fn default() -> Self {
        Self {
            reference_site: 0,
            threshold: DEFAULT_LIGHT_CONE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub weight_floor: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            weight_floor: DEFAULT_WEIGHT_FLOOR,
        }
    }
}

fn default_output_dir() -> String {
    "quenchlab-out".into()
}

/// A complete experiment description. Every section except `kind` and
/// `model` may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub model: ModelConfig,
    #[serde(default)]
    pub initial_state: InitialStateConfig,
    #[serde(default)]
    pub time_grid: GridLayout,
    #[serde(default)]
    pub observables: ObservableRequests,
    #[serde(default)]
    pub entanglement: EntanglementConfig,
    #[serde(default)]
    pub light_cone: LightConeConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
}

impl ExperimentConfig {
    /// Parses TOML text. Syntax and type errors come back as a single
    /// `ValidationFailed` entry; call [`validate`] for the semantic checks.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text)
            .map_err(|e| Error::ValidationFailed(vec![e.to_string().trim().to_owned()]))
    }

    pub fn minimal(kind: ExperimentKind, n_sites: usize) -> Self {
        Self {
            kind,
            master_seed: 0,
            output_dir: default_output_dir(),
            model: ModelConfig {
                n_sites,
                ..ModelConfig::default()
            },
            initial_state: InitialStateConfig::default(),
            time_grid: GridLayout::default(),
            observables: ObservableRequests::default(),
            entanglement: EntanglementConfig::default(),
            light_cone: LightConeConfig::default(),
            spectral: SpectralConfig::default(),
        }
    }

    /// Canonical TOML of the configuration; field order is fixed by the
    /// type, not by the source text.
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }
}

/// Checks every invariant, collecting all violations, and returns the
/// normalized configuration with derived defaults made explicit.
pub fn validate(config: &ExperimentConfig) -> Result<ExperimentConfig> {
    let mut errors = Vec::new();
    let mut push = |field: &str, msg: String| errors.push(format!("{field}: {msg}"));
    let n = config.model.n_sites;

    if !(2..=MAX_SITES).contains(&n) {
        push(
            "model.n_sites",
            format!("must lie in 2..={MAX_SITES}, got {n}"),
        );
    }
    for (field, v) in [
        ("model.coupling", config.model.coupling),
        ("model.transverse_field", config.model.transverse_field),
        ("model.longitudinal_field", config.model.longitudinal_field),
    ] {
        if !v.is_finite() {
            push(field, format!("must be finite, got {v}"));
        }
    }
    if !(config.model.disorder_width >= 0.0 && config.model.disorder_width.is_finite()) {
        push(
            "model.disorder_width",
            format!(
                "must be finite and >= 0, got {}",
                config.model.disorder_width
            ),
        );
    }
    if config.kind == ExperimentKind::Equivalence && config.model.variant != Variant::Local {
        push(
            "model.variant",
            "equivalence compares against the local chain and needs variant = \"local\"".into(),
        );
    }
    if config.output_dir.trim().is_empty() {
        push("output_dir", "must not be empty".into());
    }

    let st = &config.initial_state;
    match st.pattern {
        StatePattern::Custom => match (st.bits.is_empty(), st.bloch.is_empty()) {
            (true, true) => push(
                "initial_state",
                "custom pattern needs `bits` or `bloch`".into(),
            ),
            (false, false) => push(
                "initial_state",
                "give only one of `bits` and `bloch`".into(),
            ),
            (false, true) => {
                if st.bits.len() != n {
                    push(
                        "initial_state.bits",
                        format!("needs {n} entries, got {}", st.bits.len()),
                    );
                }
                for (i, &b) in st.bits.iter().enumerate() {
                    if b > 1 {
                        push(
                            &format!("initial_state.bits[{i}]"),
                            format!("must be 0 or 1, got {b}"),
                        );
                    }
                }
            }
            (true, false) => {
                if st.bloch.len() != n {
                    push(
                        "initial_state.bloch",
                        format!("needs {n} entries, got {}", st.bloch.len()),
                    );
                }
                for (i, a) in st.bloch.iter().enumerate() {
                    if !a.iter().all(|x| x.is_finite()) {
                        push(
                            &format!("initial_state.bloch[{i}]"),
                            "angles must be finite".into(),
                        );
                    }
                }
            }
        },
        _ => {
            if !st.bits.is_empty() || !st.bloch.is_empty() {
                push(
                    "initial_state",
                    "`bits` and `bloch` are only allowed with pattern = \"custom\"".into(),
                );
            }
        }
    }

    let g = &config.time_grid;
    if g.linear_points < 2 {
        push(
            "time_grid.linear_points",
            format!("must be >= 2, got {}", g.linear_points),
        );
    }
    if !(g.linear_span_boltzmann > 0.0 && g.linear_span_boltzmann.is_finite()) {
        push(
            "time_grid.linear_span_boltzmann",
            format!("must be positive, got {}", g.linear_span_boltzmann),
        );
    }
    if g.log_points > 0 && !(g.log_span_heisenberg > 0.0 && g.log_span_heisenberg.is_finite()) {
        push(
            "time_grid.log_span_heisenberg",
            format!("must be positive, got {}", g.log_span_heisenberg),
        );
    }

    let o = &config.observables;
    if !o.typical_seeds.is_empty() && o.typical_seeds.len() != o.typical_count {
        push(
            "observables.typical_seeds",
            format!(
                "has {} entries but typical_count is {}",
                o.typical_seeds.len(),
                o.typical_count
            ),
        );
    }
    if !(o.threshold_fraction > 0.0 && o.threshold_fraction < 1.0) {
        push(
            "observables.threshold_fraction",
            format!("must lie in (0, 1), got {}", o.threshold_fraction),
        );
    }
    for (i, l) in o.local.iter().enumerate() {
        if l.site >= n {
            push(
                &format!("observables.local[{i}].site"),
                format!("must be < n_sites = {n}, got {}", l.site),
            );
        }
    }
    if config.kind == ExperimentKind::Equivalence && o.typical_count == 0 {
        push(
            "observables.typical_count",
            "equivalence needs at least one typical observable".into(),
        );
    }

    for (i, &c) in config.entanglement.cuts.iter().enumerate() {
        if c == 0 || c >= n {
            push(
                &format!("entanglement.cuts[{i}]"),
                format!("prefix length must lie in 1..{n}, got {c}"),
            );
        }
    }
    let sf = config.entanglement.saturation_fraction;
    if !(sf > 0.0 && sf < 1.0) {
        push(
            "entanglement.saturation_fraction",
            format!("must lie in (0, 1), got {sf}"),
        );
    }

    let lc = &config.light_cone;
    if lc.reference_site + 1 >= n.max(1) {
        push(
            "light_cone.reference_site",
            format!(
                "needs at least one site to its right, got {} with n_sites = {n}",
                lc.reference_site
            ),
        );
    }
    if !(lc.threshold > 0.0 && lc.threshold.is_finite()) {
        push(
            "light_cone.threshold",
            format!("must be positive, got {}", lc.threshold),
        );
    }

    let wf = config.spectral.weight_floor;
    if !(0.0..1.0).contains(&wf) {
        push(
            "spectral.weight_floor",
            format!("must lie in [0, 1), got {wf}"),
        );
    }

    if !errors.is_empty() {
        return Err(Error::ValidationFailed(errors));
    }

    let mut out = config.clone();
    if out.entanglement.cuts.is_empty() {
        out.entanglement.cuts = (1..n).collect();
    }
    if out.observables.typical_seeds.is_empty() {
        out.observables.typical_seeds = (0..out.observables.typical_count)
            .map(|k| derive_seed(out.master_seed, &format!("typical/{k}")))
            .collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match validate(&ExperimentConfig::from_toml(text).unwrap()) {
            Err(Error::ValidationFailed(v)) => v,
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml("kind = \"relax\"\n[model]\nn_sites = 6\n").unwrap();
        let v = validate(&cfg).unwrap();
        assert_eq!(v.entanglement.cuts, vec![1, 2, 3, 4, 5]);
        assert_eq!(v.observables.typical_seeds.len(), DEFAULT_TYPICAL_COUNT);
        assert_eq!(v.model.transverse_field, 0.9045);
        assert_eq!(v.initial_state.pattern, StatePattern::Neel);
        // normalization is idempotent
        assert_eq!(validate(&v).unwrap(), v);
    }

    #[test]
    fn errors_are_aggregated_and_named() {
        let e = errors(
            "kind = \"entropy_scan\"\n[model]\nn_sites = 6\n[entanglement]\ncuts = [2, 6, 0]\n\
             [observables]\nthreshold_fraction = 1.5\n",
        );
        assert_eq!(e.len(), 3, "{e:?}");
        assert!(e[0].starts_with("observables.threshold_fraction"));
        assert!(e[1].starts_with("entanglement.cuts[1]"));
        assert!(e[2].starts_with("entanglement.cuts[2]"));
    }

    #[test]
    fn custom_state_checks() {
        let e = errors("kind = \"relax\"\n[model]\nn_sites = 3\n[initial_state]\npattern = \"custom\"\nbits = [0, 2]\n");
        assert_eq!(e.len(), 2, "{e:?}");
        let e = errors("kind = \"relax\"\n[model]\nn_sites = 3\n[initial_state]\npattern = \"neel\"\nbits = [0, 1, 0]\n");
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn unknown_keys_and_missing_kind_are_rejected() {
        assert!(ExperimentConfig::from_toml("kind = \"relax\"\n[model]\nn_site = 4\n").is_err());
        assert!(ExperimentConfig::from_toml("[model]\nn_sites = 4\n").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"bogus\"\n[model]\n").is_err());
    }

    #[test]
    fn key_order_does_not_matter() {
        let a = "kind = \"dos\"\nmaster_seed = 3\n[model]\nn_sites = 4\nvariant = \"goe\"\n[spectral]\nweight_floor = 1e-9\n";
        let b = "master_seed = 3\nkind = \"dos\"\n[spectral]\nweight_floor = 1e-9\n[model]\nvariant = \"goe\"\nn_sites = 4\n";
        let na = validate(&ExperimentConfig::from_toml(a).unwrap()).unwrap();
        let nb = validate(&ExperimentConfig::from_toml(b).unwrap()).unwrap();
        assert_eq!(na.to_canonical_toml(), nb.to_canonical_toml());
        let round = ExperimentConfig::from_toml(&na.to_canonical_toml()).unwrap();
        assert_eq!(round, na);
    }
}
