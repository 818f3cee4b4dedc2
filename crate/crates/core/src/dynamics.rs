//! Time evolution after a quench.
//!
//! The spectral propagator `|Ψ(t)⟩ = Σ c_n e^{−iε_n t} |n⟩` is the reference
//! path; [`krylov_evolve`] approximates the same map from a Lanczos subspace
//! without a full diagonalization.

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use crate::hilbert::{HilbertSpec, Operator, PureState};
use crate::linalg::{self, C64, ZERO};
use crate::observables::{BasisTag, ObservableMatrix};
use crate::spectral::{EigenSystem, SpectralData, Timescales};

const IMAG_RESIDUE_TOL: f64 = 1e-10;
const KRYLOV_TOL: f64 = 1e-10;
const MAX_HALVINGS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Logarithmic,
    /// A linear segment followed by a logarithmic tail.
    Mixed,
    Irregular,
}

/// Strictly increasing, non-negative sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
    spacing: Spacing,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidArgument("time grid is empty".into()));
        }
        if !(times[0] >= 0.0) {
            return Err(Error::InvalidArgument("time grid starts below zero".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "time grid is not strictly increasing".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(
                "time grid has non-finite entries".into(),
            ));
        }
        Ok(Self { times, spacing })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        Self::new(times, Spacing::Irregular)
    }

    /// `points` equally spaced times on `[0, t_max]`.
    pub fn linear(t_max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(t_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "linear grid needs >= 2 points and t_max > 0, got {points} and {t_max}"
            )));
        }
        let step = t_max / (points - 1) as f64;
        Self::new(
            (0..points).map(|i| i as f64 * step).collect(),
            Spacing::Linear,
        )
    }

    /// `points` geometrically spaced times on `[t_min, t_max]`.
    pub fn logarithmic(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(t_min > 0.0) || !(t_max > t_min) {
            return Err(Error::InvalidArgument(format!(
                "log grid needs >= 2 points and 0 < t_min < t_max, got {points}, {t_min}, {t_max}"
            )));
        }
        let ratio = (t_max / t_min).ln() / (points - 1) as f64;
        let times = (0..points)
            .map(|i| {
                if i + 1 == points {
                    t_max
                } else {
                    t_min * (ratio * i as f64).exp()
                }
            })
            .collect();
        Self::new(times, Spacing::Logarithmic)
    }

    /// Default quench grid: a dense linear segment resolving the Boltzmann
    /// time, optionally followed by a logarithmic tail reaching towards the
    /// Heisenberg time.
    pub fn for_timescales(ts: &Timescales, layout: &GridLayout) -> Result<Self> {
        let t_lin = layout.linear_span_boltzmann * ts.boltzmann_time;
        let linear = Self::linear(t_lin, layout.linear_points)?;
        let t_log = layout.log_span_heisenberg * ts.heisenberg_time;
        if layout.log_points < 2 || t_log <= t_lin {
            return Ok(linear);
        }
        let step = t_lin / (layout.linear_points - 1) as f64;
        let tail = Self::logarithmic(t_lin + step, t_log, layout.log_points)?;
        let mut times = linear.times;
        times.extend(tail.times);
        Self::new(times, Spacing::Mixed)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Shape of [`TimeGrid::for_timescales`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridLayout {
    pub linear_points: usize,
    /// End of the linear segment in units of `τ_B`.
    pub linear_span_boltzmann: f64,
    pub log_points: usize,
    /// End of the logarithmic tail in units of the Heisenberg time `1/δε`.
    pub log_span_heisenberg: f64,
}

impl Default for GridLayout {
    fn default() -> Self {
        Self {
            linear_points: 400,
            linear_span_boltzmann: 20.0,
            log_points: 100,
            log_span_heisenberg: 0.5,
        }
    }
}

/// Real expectation values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mean and population standard deviation of the samples with
    /// `t ∈ [from, to]`.
    pub fn window_stats(&self, from: f64, to: f64) -> Option<(f64, f64)> {
        let xs: Vec<f64> = self
            .times()
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= from && **t <= to)
            .map(|(_, v)| *v)
            .collect();
        (!xs.is_empty()).then(|| linalg::mean_std(&xs))
    }
}

/// Eigenbasis amplitudes `c_n e^{−iε_n t}`.
pub fn rotated_coefficients(spec: &SpectralData, t: f64) -> Vec<C64> {
    spec.coefficients()
        .iter()
        .zip(spec.eigenvalues())
        .map(|(&c, &e)| {
            if c == ZERO {
                ZERO
            } else {
                c * C64::from_polar(1.0, -e * t)
            }
        })
        .collect()
}

fn check_consistent(eig: &EigenSystem, spec: &SpectralData) -> Result<()> {
    if eig.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: eig.dim(),
            found: spec.dim(),
        });
    }
    Ok(())
}

/// `|Ψ(t)⟩ = Σ c_n e^{−iε_n t} |n⟩`.
pub fn evolve_spectral(eig: &EigenSystem, spec: &SpectralData, t: f64) -> Result<PureState> {
    check_consistent(eig, spec)?;
    let a = rotated_coefficients(spec, t);
    let amps = linalg::matvec(eig.eigenvectors(), &a);
    PureState::new(HilbertSpec::from_dim(eig.dim())?, amps)
}

/// `⟨O(t)⟩ = Σ_{n,m} c_n* O_nm c_m e^{i(ε_n − ε_m)t}`, evaluated in the
/// eigenbasis. Time points are independent and run in parallel.
pub fn expectation_series(
    eig: &EigenSystem,
    spec: &SpectralData,
    obs: &ObservableMatrix,
    grid: &TimeGrid,
) -> Result<TimeSeries> {
    check_consistent(eig, spec)?;
    let obs = obs.in_eigenbasis(eig)?;
    let values = grid
        .times()
        .par_iter()
        .map(|&t| {
            let a = rotated_coefficients(spec, t);
            let oa = linalg::matvec(obs.matrix(), &a);
            let v = linalg::inner(&a, &oa);
            if v.im.abs() > IMAG_RESIDUE_TOL * (1.0 + v.re.abs()) {
                return Err(Error::InvalidArgument(format!(
                    "expectation value has imaginary part {:e} at t = {t}",
                    v.im
                )));
            }
            Ok(v.re)
        })
        .collect::<Result<Vec<f64>>>()?;
    TimeSeries::new(grid.clone(), values)
}

/// Infinite-time average `Σ_n |c_n|² O_nn` of an eigenbasis observable.
///
/// Off-diagonal terms of degenerate levels are ignored; a warning is logged
/// when occupied levels are closer than `1e-12`.
pub fn diagonal_ensemble(spec: &SpectralData, obs: &ObservableMatrix) -> Result<f64> {
    if obs.basis() != BasisTag::Eigen {
        return Err(Error::InvalidArgument(
            "diagonal ensemble needs an eigenbasis observable; use in_eigenbasis".into(),
        ));
    }
    if obs.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: obs.dim(),
        });
    }
    let occ = spec.occupied(0.0);
    let e = spec.eigenvalues();
    if occ.windows(2).any(|w| e[w[1]] - e[w[0]] < 1e-12) {
        log::warn!("degenerate occupied levels: diagonal ensemble drops their cross terms");
    }
    let m = obs.matrix();
    Ok(spec
        .weights()
        .iter()
        .enumerate()
        .map(|(n, w)| w * m[(n, n)].re)
        .sum())
}

/// Result of a Krylov propagation step.
#[derive(Debug, Clone)]
pub struct KrylovStep {
    pub state: PureState,
    /// Number of sub-steps the adaptive halving used.
    pub substeps: usize,
    /// Whether an invariant subspace was hit (the step is then exact).
    pub breakdown: bool,
    /// Largest per-substep residual estimate.
    pub max_error_estimate: f64,
}

struct LanczosBasis {
    vectors: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// `β` after the last vector, zero on breakdown.
    residual_beta: f64,
    breakdown: bool,
}

fn lanczos(h: &HermitianOperator, start: &[C64], m: usize, scale: f64) -> LanczosBasis {
    let n0 = linalg::norm(start);
    let mut vectors = vec![start.iter().map(|a| a / n0).collect::<Vec<_>>()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let breakdown_tol = 1e-13 * scale.max(1.0);
    loop {
        let j = vectors.len() - 1;
        let mut w = linalg::matvec(h.matrix(), &vectors[j]);
        let a = linalg::inner(&vectors[j], &w).re;
        alpha.push(a);
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for q in &vectors {
                let proj = linalg::inner(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let b = linalg::norm(&w);
        if b < breakdown_tol || vectors.len() == h.dim() {
            return LanczosBasis {
                vectors,
                alpha,
                beta,
                residual_beta: 0.0,
                breakdown: true,
            };
        }
        if vectors.len() == m {
            return LanczosBasis {
                vectors,
                alpha,
                beta,
                residual_beta: b,
                breakdown: false,
            };
        }
        beta.push(b);
        vectors.push(w.into_iter().map(|x| x / b).collect());
    }
}

impl LanczosBasis {
    /// `exp(−iTτ) e₁` in the Krylov basis.
    fn propagate(&self, tau: f64) -> Result<Vec<C64>> {
        let k = self.alpha.len();
        let t = Mat::<f64>::from_fn(k, k, |i, j| {
            if i == j {
                self.alpha[i]
            } else if i == j + 1 {
                self.beta[j]
            } else if j == i + 1 {
                self.beta[i]
            } else {
                0.0
            }
        });
        let evd = t
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;
        let s = evd.U();
        let theta = evd.S();
        Ok((0..k)
            .map(|i| {
                (0..k)
                    .map(|l| C64::from_polar(s[(i, l)] * s[(0, l)], -theta[l] * tau))
                    .sum()
            })
            .collect())
    }

    fn combine(&self, y: &[C64], norm: f64) -> Vec<C64> {
        let dim = self.vectors[0].len();
        let mut out = vec![ZERO; dim];
        for (q, &c) in self.vectors.iter().zip(y) {
            out.iter_mut().zip(q).for_each(|(o, v)| *o += v * c * norm);
        }
        out
    }
}

/// Lanczos approximation of `e^{−iH dt} ψ`, halving the sub-step until the
/// a-posteriori residual estimate `β_m |[e^{−iTτ}e₁]_m|` drops below `1e-10`.
pub fn krylov_evolve(
    h: &HermitianOperator,
    psi: &PureState,
    dt: f64,
    subspace_dim: usize,
) -> Result<KrylovStep> {
    if subspace_dim < 2 {
        return Err(Error::InvalidArgument(
            "Krylov subspace needs dimension >= 2".into(),
        ));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi.dim(),
        });
    }
    let scale = linalg::frobenius_norm(h.matrix()) / (h.dim() as f64).sqrt();
    let mut state = psi.amplitudes().to_vec();
    let mut remaining = dt;
    let mut step = dt;
    let mut substeps = 0;
    let mut any_breakdown = false;
    let mut max_err = 0.0f64;
    while remaining > 0.0 {
        let norm = linalg::norm(&state);
        let basis = lanczos(h, &state, subspace_dim, scale);
        step = step.min(remaining);
        let mut halvings = 0;
        let (y, err) = loop {
            let y = basis.propagate(step)?;
            let err = if basis.breakdown {
                0.0
            } else {
                basis.residual_beta * y[y.len() - 1].norm() * norm
            };
            if err < KRYLOV_TOL || halvings >= MAX_HALVINGS {
                break (y, err);
            }
            step *= 0.5;
            halvings += 1;
        };
        state = basis.combine(&y, norm);
        any_breakdown |= basis.breakdown;
        max_err = max_err.max(err);
        substeps += 1;
        remaining -= step;
        if remaining < 1e-15 * dt {
            remaining = 0.0;
        }
    }
    Ok(KrylovStep {
        state: PureState::new(psi.spec(), state)?,
        substeps,
        breakdown: any_breakdown,
        max_error_estimate: max_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_local_chain, ChainParams, Locality};
    use crate::hilbert::product_state;
    use crate::observables::{slow_observable, ObservableClass};
    use crate::spectral::{diagonalize, occupied_spectrum, timescales, DEFAULT_WEIGHT_FLOOR};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn neel(n: usize) -> PureState {
        let up = [C64::new(1.0, 0.0), ZERO];
        let down = [ZERO, C64::new(1.0, 0.0)];
        product_state(
            &(0..n)
                .map(|i| if i % 2 == 0 { up } else { down })
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn chain_quench(n: usize) -> (HermitianOperator, EigenSystem, SpectralData, PureState) {
        let h = build_local_chain(&ChainParams::with_sites(n)).unwrap();
        let eig = diagonalize(&h).unwrap();
        let psi = neel(n);
        let spec = occupied_spectrum(&eig, &psi).unwrap();
        (h, eig, spec, psi)
    }

    fn random_site_observable(dim: usize, seed: u64) -> ObservableMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Mat::<C64>::from_fn(dim, dim, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        ObservableMatrix::new(
            linalg::hermitian_part(m.as_ref()),
            BasisTag::Site,
            ObservableClass::Custom,
        )
        .unwrap()
    }

    #[test]
    fn grids() {
        let g = TimeGrid::linear(2.0, 5).unwrap();
        assert_eq!(g.times(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        let l = TimeGrid::logarithmic(0.1, 10.0, 3).unwrap();
        assert!((l.times()[1] - 1.0).abs() < 1e-12 && l.times()[2] == 10.0);
        assert!(TimeGrid::from_times(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::from_times(vec![-1.0, 1.0]).is_err());
        let ts = Timescales {
            energy_mean: 0.0,
            energy_width: 2.0,
            boltzmann_time: 0.5,
            mean_occupied_spacing: 0.01,
            heisenberg_time: 100.0,
            occupied_levels: 10,
        };
        let d = TimeGrid::for_timescales(&ts, &GridLayout::default()).unwrap();
        assert_eq!(d.len(), 500);
        assert_eq!(d.spacing(), Spacing::Mixed);
        assert!((d.times()[399] - 10.0).abs() < 1e-12);
        assert!((d.times()[499] - 50.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_evolution_basics() {
        let (_, eig, spec, psi) = chain_quench(6);
        let at0 = evolve_spectral(&eig, &spec, 0.0).unwrap();
        for (a, b) in at0.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        for t in [0.3, 7.0, 1e3] {
            assert!((evolve_spectral(&eig, &spec, t).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        let stationary = PureState::new(psi.spec(), eig.eigenvector(3)).unwrap();
        let sspec = occupied_spectrum(&eig, &stationary).unwrap();
        for t in [0.5, 50.0] {
            let f = stationary.fidelity(&evolve_spectral(&eig, &sspec, t).unwrap());
            assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_and_energy_are_constant() {
        let (h, eig, spec, _) = chain_quench(6);
        let grid = TimeGrid::linear(10.0, 50).unwrap();
        let id = expectation_series(
            &eig,
            &spec,
            &ObservableMatrix::identity(64, BasisTag::Site),
            &grid,
        )
        .unwrap();
        assert!(id.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let e = expectation_series(&eig, &spec, &ObservableMatrix::from_hamiltonian(&h), &grid)
            .unwrap();
        let e0 = spec.energy_mean();
        assert!(e.values().iter().all(|v| (v - e0).abs() < 1e-10));
    }

    #[test]
    fn two_level_cosine() {
        // gap ω, equal superposition, off-diagonal coupling with zero phases
        let omega = 1.3;
        let eig = EigenSystem::new(vec![-omega / 2.0, omega / 2.0], linalg::identity(2)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let spec = SpectralData::from_coefficients(
            eig.eigenvalues().to_vec(),
            vec![C64::new(s, 0.0), C64::new(s, 0.0)],
        )
        .unwrap();
        let o = Mat::<C64>::from_fn(2, 2, |i, j| C64::new(if i != j { 1.0 } else { 0.0 }, 0.0));
        let o = ObservableMatrix::new(o, BasisTag::Eigen, ObservableClass::Custom).unwrap();
        let grid = TimeGrid::linear(20.0, 101).unwrap();
        let ts = expectation_series(&eig, &spec, &o, &grid).unwrap();
        for (t, v) in ts.times().iter().zip(ts.values()) {
            assert!((v - (omega * t).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenbasis_sum_matches_state_vector_route() {
        let (_, eig, spec, _) = chain_quench(6);
        let grid = TimeGrid::linear(5.0, 11).unwrap();
        for seed in 0..3 {
            let o = random_site_observable(64, seed);
            let ts = expectation_series(&eig, &spec, &o, &grid).unwrap();
            for (t, v) in grid.times().iter().zip(ts.values()) {
                let psi = evolve_spectral(&eig, &spec, *t).unwrap();
                assert!((psi.expectation(&o).unwrap() - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn phase_covariance() {
        // φ_n → φ_n + θ_n together with O_nm → e^{i(θ_n − θ_m)} O_nm
        let (_, eig, spec, _) = chain_quench(5);
        let o = random_site_observable(32, 9).in_eigenbasis(&eig).unwrap();
        let theta: Vec<f64> = (0..32).map(|n| (n as f64 * 1.7).sin() * 3.0).collect();
        let shifted = SpectralData::from_coefficients(
            spec.eigenvalues().to_vec(),
            spec.coefficients()
                .iter()
                .zip(&theta)
                .map(|(c, t)| c * C64::from_polar(1.0, *t))
                .collect(),
        )
        .unwrap();
        let m = o.matrix();
        let o2 = Mat::<C64>::from_fn(32, 32, |i, j| {
            m[(i, j)] * C64::from_polar(1.0, theta[i] - theta[j])
        });
        let o2 = ObservableMatrix::new(o2, BasisTag::Eigen, ObservableClass::Custom).unwrap();
        let grid = TimeGrid::linear(4.0, 9).unwrap();
        let a = expectation_series(&eig, &spec, &o, &grid).unwrap();
        let b = expectation_series(&eig, &shifted, &o2, &grid).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn slow_observable_closed_form() {
        let (_, eig, spec, _) = chain_quench(6);
        let o = slow_observable(&spec);
        let grid = TimeGrid::linear(30.0, 61).unwrap();
        let ts = expectation_series(&eig, &spec, &o, &grid).unwrap();
        let occ = spec.occupied(DEFAULT_WEIGHT_FLOOR);
        let w = spec.weights();
        let e = spec.eigenvalues();
        for (t, v) in grid.times().iter().zip(ts.values()) {
            let closed: f64 = occ
                .windows(2)
                .map(|p| 2.0 * (w[p[0]] * w[p[1]]).sqrt() * ((e[p[1]] - e[p[0]]) * t).cos())
                .sum();
            assert!((closed - v).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_ensemble_cases() {
        let (_, eig, spec, _) = chain_quench(5);
        let id = ObservableMatrix::identity(32, BasisTag::Eigen);
        assert!((diagonal_ensemble(&spec, &id).unwrap() - 1.0).abs() < 1e-12);
        let o = random_site_observable(32, 2).in_eigenbasis(&eig).unwrap();
        let stationary = PureState::new(HilbertSpec::new(5).unwrap(), eig.eigenvector(7)).unwrap();
        let sspec = occupied_spectrum(&eig, &stationary).unwrap();
        assert!((diagonal_ensemble(&sspec, &o).unwrap() - o.matrix()[(7, 7)].re).abs() < 1e-12);
        assert!(diagonal_ensemble(&spec, &random_site_observable(32, 2)).is_err());
    }

    #[test]
    fn long_time_average_matches_diagonal_ensemble() {
        let (_, eig, spec, _) = chain_quench(8);
        let ts = timescales(&spec, DEFAULT_WEIGHT_FLOOR).unwrap();
        let o = random_site_observable(256, 5).in_eigenbasis(&eig).unwrap();
        let tb = ts.boltzmann_time;
        let grid = TimeGrid::new(
            (0..=400)
                .map(|i| 100.0 * tb + i as f64 * 100.0 * tb / 400.0)
                .collect(),
            Spacing::Linear,
        )
        .unwrap();
        let series = expectation_series(&eig, &spec, &o, &grid).unwrap();
        let (mean, std) = series.window_stats(100.0 * tb, 200.0 * tb).unwrap();
        let de = diagonal_ensemble(&spec, &o).unwrap();
        assert!((mean - de).abs() <= 5.0 * std, "{mean} {de} {std}");
    }

    #[test]
    fn krylov_diagonal_is_exact() {
        let d = [0.3, -1.1, 2.0, 0.7];
        let m = Mat::<C64>::from_fn(4, 4, |i, j| if i == j { C64::new(d[i], 0.0) } else { ZERO });
        let h = HermitianOperator::new(m, Locality::Local).unwrap();
        let psi =
            PureState::new(HilbertSpec::new(2).unwrap(), vec![C64::new(0.5, 0.0); 4]).unwrap();
        let out = krylov_evolve(&h, &psi, 1.7, 6).unwrap();
        assert!(out.breakdown);
        for (k, a) in out.state.amplitudes().iter().enumerate() {
            assert!((a - C64::from_polar(0.5, -d[k] * 1.7)).norm() < 1e-12);
        }
    }

    #[test]
    fn krylov_matches_spectral_and_composes() {
        let (h, eig, spec, psi) = chain_quench(8);
        let tb = timescales(&spec, DEFAULT_WEIGHT_FLOOR)
            .unwrap()
            .boltzmann_time;
        let k = krylov_evolve(&h, &psi, tb, 20).unwrap();
        let exact = evolve_spectral(&eig, &spec, tb).unwrap();
        assert!(k.state.fidelity(&exact) >= 1.0 - 1e-10);
        let half = krylov_evolve(&h, &psi, tb / 2.0, 20).unwrap();
        let twice = krylov_evolve(&h, &half.state, tb / 2.0, 20).unwrap();
        for (a, b) in twice.state.amplitudes().iter().zip(k.state.amplitudes()) {
            assert!((a - b).norm() < 1e-9);
        }
        // energy conservation along the Krylov trajectory
        let e0 = psi.expectation(&h).unwrap();
        assert!((k.state.expectation(&h).unwrap() - e0).abs() < 1e-10);
    }

    #[test]
    fn krylov_rejects_bad_arguments() {
        let (h, _, _, psi) = chain_quench(3);
        assert!(krylov_evolve(&h, &psi, 0.0, 10).is_err());
        assert!(krylov_evolve(&h, &psi, 1.0, 1).is_err());
    }
}
