//! The three observable families of a quench (typical, slow and local) and
//! relaxation-time estimation.
//!
//! Eigenbasis observables are defined relative to an [`EigenSystem`]: their
//! matrix elements are `O_nm = ⟨n|O|m⟩`.

use faer::{Mat, MatRef};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::hamiltonian::{pauli_on_site, HermitianOperator};
use crate::hilbert::{HilbertSpec, Operator};
use crate::linalg::{self, CMat, C64};
use crate::seed;
use crate::spectral::{EigenSystem, SpectralData, DEFAULT_WEIGHT_FLOOR};

const HERMITIAN_TOL: f64 = 1e-12;
const ZERO_DEVIATION: f64 = 1e-12;

/// Default band for [`relaxation_time`].
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.367_879_441_171_442_33; // 1/e

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    Site,
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableClass {
    /// Random observable; dephases on the Boltzmann time.
    Typical,
    /// Couples neighbouring occupied levels; dephases on the Heisenberg time.
    Slow,
    /// Single-site Pauli operator.
    Local,
    /// Anything else (identity, the Hamiltonian, user matrices).
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn tag(self) -> u8 {
        match self {
            Axis::X => b'x',
            Axis::Y => b'y',
            Axis::Z => b'z',
        }
    }
}

/// A Hermitian observable together with the basis its matrix is written in.
#[derive(Debug, Clone)]
pub struct ObservableMatrix {
    matrix: CMat,
    basis: BasisTag,
    class: ObservableClass,
}

impl ObservableMatrix {
    pub fn new(matrix: CMat, basis: BasisTag, class: ObservableClass) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let defect = linalg::hermitian_defect(matrix.as_ref());
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            matrix,
            basis,
            class,
        })
    }

    pub fn identity(dim: usize, basis: BasisTag) -> Self {
        Self {
            matrix: linalg::identity(dim),
            basis,
            class: ObservableClass::Custom,
        }
    }

    /// A Hamiltonian used as an observable, in the site basis.
    pub fn from_hamiltonian(h: &HermitianOperator) -> Self {
        Self {
            matrix: h.matrix().to_owned(),
            basis: BasisTag::Site,
            class: ObservableClass::Custom,
        }
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn class(&self) -> ObservableClass {
        self.class
    }

    /// Matrix elements `⟨n|O|m⟩`.
    pub fn in_eigenbasis(&self, eig: &EigenSystem) -> Result<ObservableMatrix> {
        self.check_dim(eig.dim())?;
        Ok(match self.basis {
            BasisTag::Eigen => self.clone(),
            BasisTag::Site => ObservableMatrix {
                matrix: linalg::hermitian_part(eig.to_eigenbasis(self.matrix.as_ref()).as_ref()),
                basis: BasisTag::Eigen,
                class: self.class,
            },
        })
    }

    /// Matrix elements in the computational (σᶻ) basis.
    pub fn in_site_basis(&self, eig: &EigenSystem) -> Result<ObservableMatrix> {
        self.check_dim(eig.dim())?;
        Ok(match self.basis {
            BasisTag::Site => self.clone(),
            BasisTag::Eigen => ObservableMatrix {
                matrix: linalg::hermitian_part(eig.to_site_basis(self.matrix.as_ref()).as_ref()),
                basis: BasisTag::Site,
                class: self.class,
            },
        })
    }

    /// Rotates the off-diagonal elements of an eigenbasis observable so that
    /// every term `c_n* O_nm c_m` of its initial expectation value is
    /// non-negative: `O'_nm = e^{i(φ_n − φ_m)} |O_nm|` for `n ≠ m`, diagonal
    /// unchanged. The result is rescaled to unit operator norm.
    ///
    /// For a random observable this turns a quantity that is thermal at all
    /// times into one that starts far from equilibrium and dephases.
    pub fn phase_aligned(&self, spec: &SpectralData) -> Result<ObservableMatrix> {
        if self.basis != BasisTag::Eigen {
            return Err(Error::InvalidArgument(
                "phase alignment needs an eigenbasis observable".into(),
            ));
        }
        self.check_dim(spec.dim())?;
        let phases = spec.phases();
        let m = self.matrix.as_ref();
        let aligned = Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
            if i == j {
                m[(i, j)]
            } else {
                C64::from_polar(m[(i, j)].norm(), phases[i] - phases[j])
            }
        });
        let aligned = linalg::hermitian_part(aligned.as_ref());
        let norm = linalg::hermitian_operator_norm(aligned.as_ref())?;
        let scaled = if norm > 0.0 {
            linalg::scaled(aligned.as_ref(), 1.0 / norm)
        } else {
            aligned
        };
        ObservableMatrix::new(
            linalg::hermitian_part(scaled.as_ref()),
            BasisTag::Eigen,
            self.class,
        )
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.matrix.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.matrix.nrows(),
            });
        }
        Ok(())
    }
}

impl Operator for ObservableMatrix {
    fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }
}

/// Observable coupling neighbouring occupied levels, with phases chosen so
/// that `⟨O(0)⟩ = 2 Σ_n |c_n||c_{n+1}|`. Adjacency runs over the
/// ascending spectrum restricted to levels with weight above the floor.
pub fn slow_observable(spec: &SpectralData) -> ObservableMatrix {
    slow_observable_with_floor(spec, DEFAULT_WEIGHT_FLOOR)
}

pub fn slow_observable_with_floor(spec: &SpectralData, weight_floor: f64) -> ObservableMatrix {
    let dim = spec.dim();
    let phases = spec.phases();
    let occ = spec.occupied(weight_floor);
    let mut m = Mat::<C64>::zeros(dim, dim);
    for pair in occ.windows(2) {
        let (n, k) = (pair[0], pair[1]);
        let v = C64::from_polar(1.0, phases[n] - phases[k]);
        m[(n, k)] = v;
        m[(k, n)] = v.conj();
    }
    ObservableMatrix {
        matrix: m,
        basis: BasisTag::Eigen,
        class: ObservableClass::Slow,
    }
}

/// Real symmetric Gaussian-ensemble observable in the eigenbasis, scaled to
/// unit operator norm.
pub fn typical_observable(dim: usize, seed: u64) -> Result<ObservableMatrix> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "typical observable needs dim >= 2, got {dim}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut m = Mat::<C64>::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..=j {
            let x: f64 = rng.sample(StandardNormal);
            let v = if i == j {
                x
            } else {
                x * std::f64::consts::FRAC_1_SQRT_2
            };
            m[(i, j)] = C64::new(v, 0.0);
            m[(j, i)] = C64::new(v, 0.0);
        }
    }
    let norm = linalg::hermitian_operator_norm(m.as_ref())?;
    let m = linalg::scaled(m.as_ref(), 1.0 / norm);
    ObservableMatrix::new(m, BasisTag::Eigen, ObservableClass::Typical)
}

/// [`typical_observable`] phase-aligned with the initial state, the
/// observable whose relaxation is set by the Boltzmann time.
pub fn aligned_typical_observable(spec: &SpectralData, seed: u64) -> Result<ObservableMatrix> {
    typical_observable(spec.dim(), seed)?.phase_aligned(spec)
}

/// `σ^axis` on one site, embedded with identities, in the site basis.
pub fn local_observable(spec: HilbertSpec, site: usize, axis: Axis) -> Result<ObservableMatrix> {
    if site >= spec.n_sites() {
        return Err(Error::SiteOutOfBounds {
            site,
            n_sites: spec.n_sites(),
        });
    }
    Ok(ObservableMatrix {
        matrix: pauli_on_site(spec.n_sites(), site, axis.tag()),
        basis: BasisTag::Site,
        class: ObservableClass::Local,
    })
}

/// Outcome of a relaxation-time estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "time", rename_all = "snake_case")]
pub enum Relaxation {
    /// Stays inside the band from this grid time to the end of the series.
    Relaxed(f64),
    /// The series starts at equilibrium; reported as time zero.
    ZeroInitialDeviation,
    /// Still outside the band at the last grid point.
    NotRelaxed,
}

impl Relaxation {
    pub fn time(&self) -> Option<f64> {
        match *self {
            Relaxation::Relaxed(t) => Some(t),
            Relaxation::ZeroInitialDeviation => Some(0.0),
            Relaxation::NotRelaxed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationReport {
    pub relaxation: Relaxation,
    pub equilibrium_value: f64,
    /// `value(0) − equilibrium`.
    pub initial_deviation: f64,
    pub threshold_fraction: f64,
}

/// Earliest grid time after which the series stays within
/// `threshold_fraction · |value(0) − equilibrium|` of `equilibrium`.
pub fn relaxation_time(
    series: &TimeSeries,
    equilibrium: f64,
    threshold_fraction: f64,
) -> Result<RelaxationReport> {
    let values = series.values();
    let times = series.times();
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty time series".into()));
    }
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold_fraction must lie in (0, 1), got {threshold_fraction}"
        )));
    }
    let initial_deviation = values[0] - equilibrium;
    let report = |relaxation| RelaxationReport {
        relaxation,
        equilibrium_value: equilibrium,
        initial_deviation,
        threshold_fraction,
    };
    if initial_deviation.abs() < ZERO_DEVIATION {
        return Ok(report(Relaxation::ZeroInitialDeviation));
    }
    let band = threshold_fraction * initial_deviation.abs();
    // index 0 is always outside the band
    let last_outside = values
        .iter()
        .rposition(|v| (v - equilibrium).abs() > band)
        .unwrap_or(0);
    if last_outside + 1 == values.len() {
        return Ok(report(Relaxation::NotRelaxed));
    }
    Ok(report(Relaxation::Relaxed(times[last_outside + 1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{expectation_series, TimeGrid};
    use crate::hilbert::product_state;
    use crate::linalg::ZERO;
    use proptest::prelude::*;

    fn series(times: Vec<f64>, values: Vec<f64>) -> TimeSeries {
        TimeSeries::new(TimeGrid::from_times(times).unwrap(), values).unwrap()
    }

    fn uniform_spectrum(d: usize) -> SpectralData {
        let amp = (1.0 / d as f64).sqrt();
        let eigs: Vec<f64> = (0..d)
            .map(|n| n as f64 * 0.37 + (n as f64).sqrt())
            .collect();
        let c = (0..d)
            .map(|n| C64::from_polar(amp, 0.3 * n as f64 - 1.0))
            .collect();
        SpectralData::from_coefficients(eigs, c).unwrap()
    }

    fn trivial_eigensystem(d: usize, eigs: &[f64]) -> EigenSystem {
        EigenSystem::new(eigs.to_vec(), linalg::identity(d)).unwrap()
    }

    #[test]
    fn slow_observable_structure() {
        let spec = uniform_spectrum(16);
        let o = slow_observable(&spec);
        let m = o.matrix();
        assert!(linalg::hermitian_defect(m) < 1e-12);
        for j in 0..16 {
            for i in 0..16 {
                let adjacent = i + 1 == j || j + 1 == i;
                assert_eq!(m[(i, j)] != ZERO, adjacent, "({i},{j})");
            }
        }
        // uniform weights: ⟨O(0)⟩ = 2(D − 1)/D
        let eig = trivial_eigensystem(16, spec.eigenvalues());
        let ts =
            expectation_series(&eig, &spec, &o, &TimeGrid::from_times(vec![0.0]).unwrap()).unwrap();
        assert!((ts.values()[0] - 2.0 * 15.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn slow_observable_skips_unoccupied_levels() {
        let c = vec![C64::new(0.6, 0.0), ZERO, C64::from_polar(0.8, 1.0)];
        let spec = SpectralData::from_coefficients(vec![0.0, 1.0, 2.0], c).unwrap();
        let o = slow_observable(&spec);
        assert_eq!(o.matrix()[(0, 1)], ZERO);
        assert!((o.matrix()[(0, 2)] - C64::from_polar(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn typical_is_hermitian_normalized_and_seeded() {
        let a = typical_observable(256, 1).unwrap();
        let b = typical_observable(256, 2).unwrap();
        let a2 = typical_observable(256, 1).unwrap();
        assert_eq!(a.matrix(), a2.matrix());
        assert!(linalg::hermitian_defect(a.matrix()) < 1e-12);
        let norm = linalg::hermitian_operator_norm(a.matrix()).unwrap();
        assert!((norm - 1.0).abs() < 0.02);
        // Pearson correlation of the upper-triangle elements
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for j in 0..256 {
            for i in 0..=j {
                xs.push(a.matrix()[(i, j)].re);
                ys.push(b.matrix()[(i, j)].re);
            }
        }
        let (mx, sx) = linalg::mean_std(&xs);
        let (my, sy) = linalg::mean_std(&ys);
        let cov = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.len() as f64;
        assert!((cov / (sx * sy)).abs() < 0.1);
        assert!(typical_observable(1, 0).is_err());
    }

    #[test]
    fn phase_aligned_terms_are_nonnegative() {
        let spec = uniform_spectrum(32);
        let o = aligned_typical_observable(&spec, 4).unwrap();
        let c = spec.coefficients();
        for n in 0..32 {
            for m in 0..32 {
                if n != m {
                    let term = c[n].conj() * o.matrix()[(n, m)] * c[m];
                    assert!(term.re >= -1e-15 && term.im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn local_paulis() {
        let spec = HilbertSpec::new(3).unwrap();
        let up = [C64::new(1.0, 0.0), ZERO];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [C64::new(s, 0.0), C64::new(s, 0.0)];
        let all_up = product_state(&[up; 3]).unwrap();
        let all_plus = product_state(&[plus; 3]).unwrap();
        for site in 0..3 {
            let z = local_observable(spec, site, Axis::Z).unwrap();
            let x = local_observable(spec, site, Axis::X).unwrap();
            assert!((all_up.expectation(&z).unwrap() - 1.0).abs() < 1e-15);
            assert!((all_plus.expectation(&x).unwrap() - 1.0).abs() < 1e-15);
        }
        let z0 = local_observable(spec, 0, Axis::Z).unwrap();
        let z1 = local_observable(spec, 1, Axis::Z).unwrap();
        let comm = &(z0.matrix() * z1.matrix()) - &(z1.matrix() * z0.matrix());
        assert_eq!(linalg::frobenius_norm(comm.as_ref()), 0.0);
        let y = local_observable(spec, 2, Axis::Y).unwrap();
        assert!(linalg::hermitian_defect(y.matrix()) == 0.0);
        assert!(matches!(
            local_observable(spec, 3, Axis::X),
            Err(Error::SiteOutOfBounds {
                site: 3,
                n_sites: 3
            })
        ));
    }

    #[test]
    fn relaxation_of_constant_series() {
        let s = series(vec![0.0, 1.0, 2.0], vec![0.5, 0.5, 0.5]);
        let r = relaxation_time(&s, 0.5, DEFAULT_THRESHOLD_FRACTION).unwrap();
        assert_eq!(r.relaxation, Relaxation::ZeroInitialDeviation);
        assert_eq!(r.relaxation.time(), Some(0.0));
    }

    #[test]
    fn relaxation_of_exponential() {
        // analytic crossing at t = 1/γ
        let gamma = 0.8;
        let dt = 0.01;
        let times: Vec<f64> = (0..1000).map(|i| i as f64 * dt).collect();
        let values = times.iter().map(|t| 2.0 + (-gamma * t).exp()).collect();
        let r = relaxation_time(&series(times, values), 2.0, DEFAULT_THRESHOLD_FRACTION).unwrap();
        let t = r.relaxation.time().unwrap();
        assert!((t - 1.0 / gamma).abs() <= dt, "{t}");
        assert!((r.initial_deviation - 1.0).abs() < 1e-15);
    }

    #[test]
    fn relaxation_never_entering_band() {
        let s = series(vec![0.0, 1.0, 2.0], vec![1.0, 0.9, -1.0]);
        let r = relaxation_time(&s, 0.0, 0.5).unwrap();
        assert_eq!(r.relaxation, Relaxation::NotRelaxed);
        assert!(relaxation_time(&s, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn relaxation_monotone_in_threshold(values in prop::collection::vec(-1.0f64..1.0, 2..40), a in 0.05f64..0.95, b in 0.05f64..0.95) {
            let times: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
            let s = series(times, values);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let t_lo = relaxation_time(&s, 0.1, lo).unwrap().relaxation.time().unwrap_or(f64::INFINITY);
            let t_hi = relaxation_time(&s, 0.1, hi).unwrap().relaxation.time().unwrap_or(f64::INFINITY);
            prop_assert!(t_hi <= t_lo);
        }
    }
}
