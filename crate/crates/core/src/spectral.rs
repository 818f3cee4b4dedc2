//! Diagonalization, occupied spectra and the characteristic timescales of
//! a quench.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use crate::hilbert::{HilbertSpec, Operator, PureState};
use crate::linalg::{self, CMat, C64};

/// Levels with `|c_n|² ≤` this floor count as unoccupied.
pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-8;

const MIN_WIDTH: f64 = 1e-12;
const MIN_DOS_LEVELS: usize = 10;

/// `H = Σ ε_n |n⟩⟨n|` with ascending `ε_n` and `|n⟩` the columns of
/// `eigenvectors`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl EigenSystem {
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: CMat) -> Result<Self> {
        if eigenvectors.nrows() != eigenvalues.len() || eigenvectors.ncols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                found: eigenvectors.ncols(),
            });
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be ascending".into(),
            ));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, C64> {
        self.eigenvectors.as_ref()
    }

    pub fn eigenvector(&self, n: usize) -> Vec<C64> {
        self.eigenvectors.col(n).iter().copied().collect()
    }

    pub fn hilbert_spec(&self) -> Result<HilbertSpec> {
        HilbertSpec::from_dim(self.dim())
    }

    /// Eigensystem of `U H U†`: same eigenvalues, eigenvectors `U V`.
    pub fn rotated(&self, u: MatRef<'_, C64>) -> EigenSystem {
        EigenSystem {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: u * self.eigenvectors.as_ref(),
        }
    }

    /// `V† O V`.
    pub fn to_eigenbasis(&self, op: MatRef<'_, C64>) -> CMat {
        linalg::conjugate_adjoint(self.eigenvectors.as_ref(), op)
    }

    /// `V O V†`.
    pub fn to_site_basis(&self, op: MatRef<'_, C64>) -> CMat {
        linalg::conjugate(self.eigenvectors.as_ref(), op)
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMat {
        let n = self.dim();
        let lam = Mat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.eigenvalues[i], 0.0)
            } else {
                linalg::ZERO
            }
        });
        self.to_site_basis(lam.as_ref())
    }
}

pub fn diagonalize(h: &HermitianOperator) -> Result<EigenSystem> {
    let (values, vectors) = linalg::eigh(h.matrix())?;
    EigenSystem::new(values, vectors)
}

/// Overlaps `c_n = ⟨n|Ψ(0)⟩ = |c_n| e^{iφ_n}` of an initial state with the
/// eigenbasis, i.e. the occupied spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    weights: Vec<f64>,
    phases: Vec<f64>,
    eigenvalues: Vec<f64>,
    coefficients: Vec<C64>,
}

fn wrap_phase(z: C64) -> f64 {
    let p = z.arg();
    if p <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        p
    }
}

impl SpectralData {
    /// Builds occupied-spectrum data from raw overlaps. `eigenvalues` must be
    /// ascending and the overlaps normalized.
    pub fn from_coefficients(eigenvalues: Vec<f64>, coefficients: Vec<C64>) -> Result<Self> {
        if eigenvalues.len() != coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                found: coefficients.len(),
            });
        }
        let weights: Vec<f64> = coefficients.iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "overlap weights sum to {total}, expected 1"
            )));
        }
        let phases = coefficients.iter().map(|&c| wrap_phase(c)).collect();
        Ok(Self {
            weights,
            phases,
            eigenvalues,
            coefficients,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `|c_n|²`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `φ_n ∈ (−π, π]`.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `c_n`.
    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    /// Indices of levels with weight above `weight_floor`, ascending in energy.
    pub fn occupied(&self, weight_floor: f64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&n| self.weights[n] > weight_floor)
            .collect()
    }

    /// `⟨H⟩ = Σ |c_n|² ε_n`.
    pub fn energy_mean(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.eigenvalues)
            .map(|(w, e)| w * e)
            .sum()
    }

    /// `ΔE² = Σ |c_n|² ε_n² − ⟨H⟩²`, evaluated in centered form.
    pub fn energy_variance(&self) -> f64 {
        let mean = self.energy_mean();
        self.weights
            .iter()
            .zip(&self.eigenvalues)
            .map(|(w, e)| w * (e - mean).powi(2))
            .sum()
    }
}

/// `c_n = ⟨n|Ψ(0)⟩`.
pub fn occupied_spectrum(eig: &EigenSystem, psi0: &PureState) -> Result<SpectralData> {
    if psi0.dim() != eig.dim() {
        return Err(Error::DimensionMismatch {
            expected: eig.dim(),
            found: psi0.dim(),
        });
    }
    let c = linalg::adjoint_matvec(eig.eigenvectors(), psi0.amplitudes());
    SpectralData::from_coefficients(eig.eigenvalues().to_vec(), c)
}

/// Energy width of the initial state and the dephasing timescales it sets
/// (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timescales {
    /// `⟨H⟩`.
    pub energy_mean: f64,
    /// `ΔE`.
    pub energy_width: f64,
    /// `τ_B = 1/ΔE`.
    pub boltzmann_time: f64,
    /// `δε`: mean spacing of occupied levels.
    pub mean_occupied_spacing: f64,
    /// `1/δε`.
    pub heisenberg_time: f64,
    /// Levels above the weight floor.
    pub occupied_levels: usize,
}

pub fn timescales(spec: &SpectralData, weight_floor: f64) -> Result<Timescales> {
    let energy_mean = spec.energy_mean();
    let width = spec.energy_variance().sqrt();
    if width < MIN_WIDTH {
        return Err(Error::DegenerateWidth { width });
    }
    let occ = spec.occupied(weight_floor);
    if occ.len() < 2 {
        return Err(Error::TooFewOccupied {
            found: occ.len(),
            required: 2,
        });
    }
    let e = spec.eigenvalues();
    let spacing = (e[occ[occ.len() - 1]] - e[occ[0]]) / (occ.len() - 1) as f64;
    Ok(Timescales {
        energy_mean,
        energy_width: width,
        boltzmann_time: 1.0 / width,
        mean_occupied_spacing: spacing,
        heisenberg_time: 1.0 / spacing,
        occupied_levels: occ.len(),
    })
}

/// Moments of the occupied density of states and its distance from a
/// normal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub sigma: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Sup-norm distance between the weighted empirical CDF and the normal
    /// CDF with the fitted mean and sigma.
    pub max_cdf_deviation: f64,
}

pub(crate) fn normal_cdf(x: f64, mean: f64, sigma: f64) -> f64 {
    0.5 * libm::erfc(-(x - mean) / (sigma * std::f64::consts::SQRT_2))
}

/// Weighted Gaussian fit of `ρ(E) = Σ |c_n|² δ(E − ε_n)`.
pub fn dos_fit(spec: &SpectralData, weight_floor: f64) -> Result<GaussianFit> {
    let occupied = spec.occupied(weight_floor).len();
    if occupied < MIN_DOS_LEVELS {
        return Err(Error::TooFewOccupied {
            found: occupied,
            required: MIN_DOS_LEVELS,
        });
    }
    weighted_gaussian_fit(spec.eigenvalues(), spec.weights())
}

/// Weighted moments and CDF distance for points `xs` (ascending) with
/// non-negative `weights`.
pub fn weighted_gaussian_fit(xs: &[f64], weights: &[f64]) -> Result<GaussianFit> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("weights sum to zero".into()));
    }
    let mean = xs.iter().zip(weights).map(|(x, w)| w * x).sum::<f64>() / total;
    let central = |k: i32| {
        xs.iter()
            .zip(weights)
            .map(|(x, w)| w * (x - mean).powi(k))
            .sum::<f64>()
            / total
    };
    let var = central(2);
    let sigma = var.sqrt();
    if sigma < MIN_WIDTH {
        return Err(Error::DegenerateWidth { width: sigma });
    }
    let skewness = central(3) / sigma.powi(3);
    let excess_kurtosis = central(4) / (var * var) - 3.0;

    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut cum = 0.0;
    let mut dev = 0.0f64;
    let mut k = 0;
    while k < order.len() {
        let x = xs[order[k]];
        let phi = normal_cdf(x, mean, sigma);
        dev = dev.max((cum - phi).abs());
        while k < order.len() && xs[order[k]] == x {
            cum += weights[order[k]] / total;
            k += 1;
        }
        dev = dev.max((cum - phi).abs());
    }
    Ok(GaussianFit {
        mean,
        sigma,
        skewness,
        excess_kurtosis,
        max_cdf_deviation: dev.min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_local_chain, ChainParams, Locality};
    use crate::hilbert::product_state;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn neel(n: usize) -> PureState {
        let up = [C64::new(1.0, 0.0), linalg::ZERO];
        let down = [linalg::ZERO, C64::new(1.0, 0.0)];
        let locals: Vec<_> = (0..n).map(|i| if i % 2 == 0 { up } else { down }).collect();
        product_state(&locals).unwrap()
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Mat::<C64>::from_fn(n, n, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        HermitianOperator::new(linalg::hermitian_part(m.as_ref()), Locality::Random).unwrap()
    }

    fn random_state(dim: usize, seed: u64) -> PureState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = HilbertSpec::from_dim(dim).unwrap();
        PureState::new(
            spec,
            (0..dim)
                .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn diagonal_input() {
        let m = Mat::<C64>::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new([3.0, 1.0, 2.0][i], 0.0)
            } else {
                linalg::ZERO
            }
        });
        let eig = diagonalize(&HermitianOperator::new(m, Locality::Local).unwrap()).unwrap();
        assert_eq!(eig.eigenvalues(), &[1.0, 2.0, 3.0]);
        // eigenvector of 1 is e_1, of 2 is e_2, of 3 is e_0
        for (n, site) in [(0, 1), (1, 2), (2, 0)] {
            assert!((eig.eigenvectors()[(site, n)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = Mat::<C64>::from_fn(2, 2, |i, j| C64::new(if i != j { 1.0 } else { 0.0 }, 0.0));
        let eig = diagonalize(&HermitianOperator::new(m, Locality::Local).unwrap()).unwrap();
        assert!((eig.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_residual() {
        let h = random_hermitian(64, 1);
        let eig = diagonalize(&h).unwrap();
        let diff = &eig.reconstruct() - h.matrix();
        let rel = linalg::frobenius_norm(diff.as_ref()) / linalg::frobenius_norm(h.matrix());
        assert!(rel < 1e-10, "{rel}");
        let d = eig.to_eigenbasis(h.matrix());
        for j in 0..64 {
            for i in 0..64 {
                if i != j {
                    assert!(d[(i, j)].norm() < 1e-9 * linalg::frobenius_norm(h.matrix()));
                }
            }
        }
    }

    #[test]
    fn eigenstate_initial_condition() {
        let h = random_hermitian(16, 2);
        let eig = diagonalize(&h).unwrap();
        let psi = PureState::new(HilbertSpec::new(4).unwrap(), eig.eigenvector(5)).unwrap();
        let spec = occupied_spectrum(&eig, &psi).unwrap();
        for (n, w) in spec.weights().iter().enumerate() {
            let expect = if n == 5 { 1.0 } else { 0.0 };
            assert!((w - expect).abs() < 1e-12);
        }
        assert!(matches!(
            timescales(&spec, DEFAULT_WEIGHT_FLOOR),
            Err(Error::DegenerateWidth { .. })
        ));
    }

    #[test]
    fn random_state_weights_normalized_and_phases_wrapped() {
        let eig = diagonalize(&random_hermitian(32, 3)).unwrap();
        let spec = occupied_spectrum(&eig, &random_state(32, 4)).unwrap();
        assert!((spec.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let pi = std::f64::consts::PI;
        assert!(spec.phases().iter().all(|&p| p > -pi && p <= pi));
    }

    #[test]
    fn neel_weights_match_direct_projection() {
        // Oracle: project onto each eigenvector column with an explicit loop.
        let h = build_local_chain(&ChainParams::with_sites(8)).unwrap();
        let eig = diagonalize(&h).unwrap();
        let psi = neel(8);
        let spec = occupied_spectrum(&eig, &psi).unwrap();
        let v = eig.eigenvectors();
        for n in 0..eig.dim() {
            let mut c = linalg::ZERO;
            for i in 0..eig.dim() {
                c += v[(i, n)].conj() * psi.amplitudes()[i];
            }
            assert!((c.norm_sqr() - spec.weights()[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn two_level_width() {
        let omega = 0.7;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let spec = SpectralData::from_coefficients(
            vec![-omega / 2.0, omega / 2.0],
            vec![C64::new(s, 0.0), C64::new(s, 0.0)],
        )
        .unwrap();
        let ts = timescales(&spec, DEFAULT_WEIGHT_FLOOR).unwrap();
        assert!((ts.energy_width - omega / 2.0).abs() < 1e-15);
        assert!((ts.boltzmann_time - 2.0 / omega).abs() < 1e-12);
        assert_eq!(ts.boltzmann_time * ts.energy_width, 1.0);
        assert!((ts.mean_occupied_spacing - omega).abs() < 1e-15);
    }

    #[test]
    fn too_few_occupied() {
        let spec = SpectralData::from_coefficients(
            vec![0.0, 1.0, 2.0],
            vec![
                C64::new(1.0 - 1e-20, 0.0),
                C64::new(1e-10, 0.0),
                linalg::ZERO,
            ],
        )
        .unwrap();
        let err = timescales(&spec, 1e-8).unwrap_err();
        assert!(
            matches!(err, Error::TooFewOccupied { found: 1, .. })
                || matches!(err, Error::DegenerateWidth { .. })
        );
    }

    #[test]
    fn width_matches_moment_oracle() {
        // Oracle: ΔE² = ⟨ψ|H²|ψ⟩ − ⟨ψ|H|ψ⟩² from two matrix-vector products.
        let h = build_local_chain(&ChainParams::with_sites(10)).unwrap();
        let psi = neel(10);
        let hpsi = linalg::matvec(h.matrix(), psi.amplitudes());
        let e1 = linalg::inner(psi.amplitudes(), &hpsi).re;
        let e2 = linalg::inner(&hpsi, &hpsi).re;
        let oracle = (e2 - e1 * e1).sqrt();
        let eig = diagonalize(&h).unwrap();
        let ts = timescales(
            &occupied_spectrum(&eig, &psi).unwrap(),
            DEFAULT_WEIGHT_FLOOR,
        )
        .unwrap();
        assert!(
            (ts.energy_width - oracle).abs() < 1e-8,
            "{} {}",
            ts.energy_width,
            oracle
        );
        assert!((ts.energy_mean - e1).abs() < 1e-9);
    }

    #[test]
    fn gaussian_grid_has_small_higher_moments() {
        // Oracle: a discretized normal density on a fine grid.
        let xs: Vec<f64> = (0..4001).map(|i| -8.0 + 16.0 * i as f64 / 4000.0).collect();
        let ws: Vec<f64> = xs.iter().map(|x| (-0.5 * x * x).exp()).collect();
        let total: f64 = ws.iter().sum();
        let ws: Vec<f64> = ws.iter().map(|w| w / total).collect();
        let fit = weighted_gaussian_fit(&xs, &ws).unwrap();
        assert!(fit.skewness.abs() < 0.02);
        assert!(fit.excess_kurtosis.abs() < 0.05);
        assert!(fit.max_cdf_deviation < 0.01);
        assert!((fit.sigma - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bernoulli_kurtosis() {
        let fit = weighted_gaussian_fit(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((fit.excess_kurtosis + 2.0).abs() < 1e-14);
        assert!(fit.skewness.abs() < 1e-14);
        // CDF jumps from 0 to 1/2 at −1 where Φ(−1) ≈ 0.1587
        assert!((fit.max_cdf_deviation - (0.5 - normal_cdf(-1.0, 0.0, 1.0))).abs() < 1e-12);
    }

    #[test]
    fn dos_fit_needs_ten_levels() {
        let spec = SpectralData::from_coefficients(
            vec![0.0, 1.0],
            vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            dos_fit(&spec, DEFAULT_WEIGHT_FLOOR),
            Err(Error::TooFewOccupied {
                found: 2,
                required: 10
            })
        ));
    }

    #[test]
    fn global_phase_shifts_phases_uniformly() {
        let eig = diagonalize(&random_hermitian(16, 8)).unwrap();
        let psi = random_state(16, 9);
        let a = occupied_spectrum(&eig, &psi).unwrap();
        let b = occupied_spectrum(&eig, &psi.with_global_phase(0.4)).unwrap();
        for n in 0..16 {
            assert!((a.weights()[n] - b.weights()[n]).abs() < 1e-14);
            let d = C64::from_polar(1.0, b.phases()[n] - a.phases()[n]);
            assert!((d - C64::from_polar(1.0, 0.4)).norm() < 1e-10);
        }
        let ta = timescales(&a, DEFAULT_WEIGHT_FLOOR).unwrap();
        let tb = timescales(&b, DEFAULT_WEIGHT_FLOOR).unwrap();
        assert!((ta.energy_width - tb.energy_width).abs() < 1e-12);
        assert_eq!(ta.mean_occupied_spacing, tb.mean_occupied_spacing);
    }
}
