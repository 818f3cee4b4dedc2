//! Entanglement entropy across bipartitions, its growth after a quench,
//! and the light cone of connected correlations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_spectral, TimeGrid};
use crate::error::{Error, Result};
use crate::hilbert::{bipartite_matrix, PureState, SiteRegion};
use crate::linalg;
use crate::spectral::{EigenSystem, SpectralData};

/// Schmidt weights below this are treated as exact zeros.
pub const EIGENVALUE_CLIP: f64 = 1e-14;
/// Default plateau fraction ending the linear-growth window.
pub const DEFAULT_SATURATION_FRACTION: f64 = 0.8;

const MIN_FIT_POINTS: usize = 5;
const MIN_FRONT_RADII: usize = 3;
const NONZERO_ENTROPY: f64 = 1e-10;

/// `−Σ λ ln λ` over a spectrum, with `0 ln 0 = 0`.
pub fn von_neumann(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > EIGENVALUE_CLIP)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Von Neumann entropy (nats) of the reduced state on `region`.
///
/// Diagonalizes whichever of `M M†` and `M† M` is smaller, `M` being the
/// amplitude matrix reshaped across the cut; both share the nonzero
/// spectrum of `ρ_X`.
pub fn entropy(psi: &PureState, region: SiteRegion) -> Result<f64> {
    let m = bipartite_matrix(psi, region)?;
    let gram = if m.nrows() <= m.ncols() {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    let ev = linalg::eigvalsh(linalg::hermitian_part(gram.as_ref()).as_ref())?;
    // rounding can push a pure reduced state a few ulps below zero
    Ok(von_neumann(&ev).max(0.0))
}

/// Prefix cuts `[0, ℓ)` for `ℓ = 1..n_sites`.
pub fn prefix_cuts(n_sites: usize) -> Vec<SiteRegion> {
    (1..n_sites)
        .map(|l| SiteRegion::prefix(l).expect("non-empty prefix"))
        .collect()
}

/// Expected half-chain entropy of a random pure state, `(N/2) ln 2 − 1/2`.
pub fn page_value(n_sites: usize) -> f64 {
    0.5 * n_sites as f64 * std::f64::consts::LN_2 - 0.5
}

/// `S[cut][time]` in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementProfile {
    pub n_sites: usize,
    pub cuts: Vec<SiteRegion>,
    pub grid: TimeGrid,
    pub entropy: Vec<Vec<f64>>,
}

impl EntanglementProfile {
    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    /// Entropies of all cuts at time index `k`.
    pub fn at_time(&self, k: usize) -> Vec<f64> {
        self.entropy.iter().map(|row| row[k]).collect()
    }

    /// `min(|X|, N − |X|) ln 2` for each cut.
    pub fn max_entropy(&self, cut: usize) -> f64 {
        let l = self.cuts[cut].len();
        l.min(self.n_sites - l) as f64 * std::f64::consts::LN_2
    }

    /// Human-readable list of broken profile invariants; empty when sound.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (c, row) in self.entropy.iter().enumerate() {
            let bound = self.max_entropy(c) + 1e-9;
            for (k, &s) in row.iter().enumerate() {
                if s < -1e-10 {
                    out.push(format!("negative entropy {s} at cut {c}, time index {k}"));
                }
                if s > bound {
                    out.push(format!(
                        "entropy {s} above bound {bound} at cut {c}, time index {k}"
                    ));
                }
            }
        }
        out
    }
}

/// Entropy of every cut at every grid time along the spectral trajectory.
/// Times are evaluated in parallel and written to fixed slots.
pub fn entropy_scan(
    eig: &EigenSystem,
    spec: &SpectralData,
    cuts: &[SiteRegion],
    grid: &TimeGrid,
) -> Result<EntanglementProfile> {
    let n_sites = eig.hilbert_spec()?.n_sites();
    for c in cuts {
        c.validate(n_sites)?;
    }
    let by_time: Vec<Vec<f64>> = grid
        .times()
        .par_iter()
        .map(|&t| {
            let psi = evolve_spectral(eig, spec, t)?;
            cuts.iter()
                .map(|&c| entropy(&psi, c))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let entropy = (0..cuts.len())
        .map(|c| by_time.iter().map(|col| col[c]).collect())
        .collect();
    Ok(EntanglementProfile {
        n_sites,
        cuts: cuts.to_vec(),
        grid: grid.clone(),
        entropy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    WindowTooSmall,
}

/// Linear fit `S(t) ≈ rate·t + intercept` for one cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutFit {
    pub region: SiteRegion,
    pub rate: f64,
    pub intercept: f64,
    /// `[t_start, t_end]` of the fitted points.
    pub window: Option<(f64, f64)>,
    pub r_squared: f64,
    pub saturation_value: f64,
    pub points: usize,
    pub status: FitStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub saturation_fraction: f64,
    pub cuts: Vec<CutFit>,
}

/// Mean of the last 10% (at least one) of a row.
fn plateau(row: &[f64]) -> f64 {
    let k = row.len().div_ceil(10).max(1);
    row[row.len() - k..].iter().sum::<f64>() / k as f64
}

/// Least-squares growth rate per cut over the window running from the first
/// nonzero entropy to the first point above `saturation_fraction` of the
/// final plateau.
pub fn growth_fit(profile: &EntanglementProfile, saturation_fraction: f64) -> GrowthFit {
    let times = profile.times();
    let cuts = profile
        .cuts
        .iter()
        .zip(&profile.entropy)
        .map(|(&region, row)| {
            let saturation_value = plateau(row);
            let too_small = CutFit {
                region,
                rate: 0.0,
                intercept: 0.0,
                window: None,
                r_squared: 0.0,
                saturation_value,
                points: 0,
                status: FitStatus::WindowTooSmall,
            };
            let Some(start) = row.iter().position(|&s| s > NONZERO_ENTROPY) else {
                return too_small;
            };
            let limit = saturation_fraction * saturation_value;
            let end = row[start..]
                .iter()
                .position(|&s| s > limit)
                .map_or(row.len() - 1, |k| start + k);
            let below = row[start..=end].iter().filter(|&&s| s < limit).count();
            if below < MIN_FIT_POINTS {
                return CutFit {
                    points: end + 1 - start,
                    ..too_small
                };
            }
            let (rate, intercept, r_squared) =
                linalg::linear_fit(&times[start..=end], &row[start..=end]);
            CutFit {
                region,
                rate,
                intercept,
                window: Some((times[start], times[end])),
                r_squared,
                saturation_value,
                points: end + 1 - start,
                status: FitStatus::Ok,
            }
        })
        .collect();
    GrowthFit {
        saturation_fraction,
        cuts,
    }
}

/// Connected `σᶻσᶻ` correlations spreading from a reference site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationFront {
    pub reference_site: usize,
    pub radii: Vec<usize>,
    pub grid: TimeGrid,
    /// `C[r][t] = |⟨σᶻ_ref σᶻ_{ref+r}⟩ − ⟨σᶻ_ref⟩⟨σᶻ_{ref+r}⟩|`, indexed like `radii`.
    pub correlator: Vec<Vec<f64>>,
    /// Front arrival time per radius; `None` past the last radius reached.
    pub arrival: Vec<Option<f64>>,
    pub velocity: f64,
    pub threshold: f64,
}

/// Connected `σᶻ_ref σᶻ_j` correlations of one state for every `j > ref`.
pub fn zz_connected(psi: &PureState, reference_site: usize) -> Vec<f64> {
    let n = psi.spec().n_sites();
    let z = |k: usize, i: usize| if (k >> i) & 1 == 0 { 1.0 } else { -1.0 };
    let mut mag = vec![0.0; n];
    let mut pair = vec![0.0; n];
    for (k, a) in psi.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let zr = z(k, reference_site);
        for i in 0..n {
            let zi = z(k, i);
            mag[i] += p * zi;
            pair[i] += p * zr * zi;
        }
    }
    ((reference_site + 1)..n)
        .map(|j| (pair[j] - mag[reference_site] * mag[j]).abs())
        .collect()
}

/// Arrival times and front velocity from a correlator table.
///
/// The arrival at radius `r` is the first grid time with `C ≥ threshold`,
/// raised to the arrival at `r − 1` when earlier so the front is monotone.
/// The velocity is the least-squares slope of `r` against arrival time.
pub fn front_velocity(
    radii: &[usize],
    times: &[f64],
    correlator: &[Vec<f64>],
    threshold: f64,
) -> Result<(Vec<Option<f64>>, f64)> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let mut arrival = Vec::with_capacity(radii.len());
    let mut last = f64::NEG_INFINITY;
    let mut open = true;
    for row in correlator {
        let hit = if open {
            row.iter()
                .position(|&c| c >= threshold)
                .map(|k| times[k].max(last))
        } else {
            None
        };
        match hit {
            Some(t) => last = t,
            None => open = false,
        }
        arrival.push(hit);
    }
    let (rs, ts): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(&arrival)
        .filter_map(|(&r, a)| a.map(|t| (r as f64, t)))
        .unzip();
    if rs.len() < MIN_FRONT_RADII {
        return Err(Error::NoFrontDetected { radii: rs.len() });
    }
    let (slope, _, _) = linalg::linear_fit(&ts, &rs);
    Ok((arrival, slope.max(0.0)))
}

/// Light cone of connected `σᶻσᶻ` correlations around `reference_site`.
pub fn light_cone(
    eig: &EigenSystem,
    spec: &SpectralData,
    reference_site: usize,
    grid: &TimeGrid,
    threshold: f64,
) -> Result<CorrelationFront> {
    let n = eig.hilbert_spec()?.n_sites();
    if reference_site >= n {
        return Err(Error::SiteOutOfBounds {
            site: reference_site,
            n_sites: n,
        });
    }
    let by_time: Vec<Vec<f64>> = grid
        .times()
        .par_iter()
        .map(|&t| {
            Ok(zz_connected(
                &evolve_spectral(eig, spec, t)?,
                reference_site,
            ))
        })
        .collect::<Result<_>>()?;
    let radii: Vec<usize> = (1..n - reference_site).collect();
    let correlator: Vec<Vec<f64>> = (0..radii.len())
        .map(|r| by_time.iter().map(|col| col[r]).collect())
        .collect();
    let (arrival, velocity) = front_velocity(&radii, grid.times(), &correlator, threshold)?;
    Ok(CorrelationFront {
        reference_site,
        radii,
        grid: grid.clone(),
        correlator,
        arrival,
        velocity,
        threshold,
    })
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, sx) = linalg::mean_std(&rx);
    let (my, sy) = linalg::mean_std(&ry);
    if sx == 0.0 || sy == 0.0 {
        return 0.0;
    }
    let cov = rx
        .iter()
        .zip(&ry)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / rx.len() as f64;
    cov / (sx * sy)
}

/// `(max − min) / mean`, zero for a constant sequence.
pub fn relative_spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    if max == min {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (max - min) / mean.abs()
}
