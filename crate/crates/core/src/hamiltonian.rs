//! Spin-chain Hamiltonians, spectrum-preserving Haar scrambling and
//! Gaussian-orthogonal-ensemble partners.

use faer::{Mat, MatRef};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpec, Operator};
use crate::linalg::{self, CMat, C64};
use crate::seed;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Tilted-field Ising chain
/// `H = −J Σ σᶻσᶻ − h Σ σˣ − g Σ σᶻ + Σ dᵢ σᶻᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_sites: usize,
    /// Nearest-neighbour σᶻσᶻ coupling `J`.
    pub coupling: f64,
    /// Transverse field `h`.
    pub transverse_field: f64,
    /// Longitudinal field `g`.
    pub longitudinal_field: f64,
    /// Half-width of the uniform random longitudinal field.
    pub disorder_width: f64,
    pub boundary: Boundary,
    pub seed: u64,
}

impl Default for ChainParams {
    /// A strongly nonintegrable point with open boundaries.
    fn default() -> Self {
        Self {
            n_sites: 10,
            coupling: 1.0,
            transverse_field: 0.9045,
            longitudinal_field: 0.8090,
            disorder_width: 0.0,
            boundary: Boundary::Open,
            seed: 0,
        }
    }
}

impl ChainParams {
    pub fn with_sites(n_sites: usize) -> Self {
        Self {
            n_sites,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidArgument(format!(
                "chain needs at least 2 sites, got {}",
                self.n_sites
            )));
        }
        HilbertSpec::new(self.n_sites)?;
        if !(self.disorder_width >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "disorder_width must be >= 0, got {}",
                self.disorder_width
            )));
        }
        for (name, v) in [
            ("coupling", self.coupling),
            ("transverse_field", self.transverse_field),
            ("longitudinal_field", self.longitudinal_field),
            ("disorder_width", self.disorder_width),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(i, i+1)`, plus `(N−1, 0)` for periodic
    /// chains longer than two sites.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut bonds: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && n > 2 {
            bonds.push((n - 1, 0));
        }
        bonds
    }

    /// Per-site random longitudinal fields `dᵢ ∈ [−w, w]`.
    pub fn disorder(&self) -> Vec<f64> {
        if self.disorder_width == 0.0 {
            return vec![0.0; self.n_sites];
        }
        let mut rng = seed::rng(self.seed);
        (0..self.n_sites)
            .map(|_| rng.gen_range(-self.disorder_width..=self.disorder_width))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locality {
    /// Nearest-neighbour chain in the site basis.
    Local,
    /// Haar-conjugated chain: same spectrum, generic basis.
    Scrambled,
    /// Random-matrix ensemble.
    Random,
}

/// Dense Hermitian operator on the chain's Hilbert space.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: CMat,
    locality: Locality,
}

impl HermitianOperator {
    pub fn new(matrix: CMat, locality: Locality) -> Result<Self> {
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
        Ok(Self { matrix, locality })
    }

    pub fn locality(&self) -> Locality {
        self.locality
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Frobenius norm of `[self, other]`.
    pub fn commutator_norm(&self, other: MatRef<'_, C64>) -> f64 {
        let a = self.matrix.as_ref() * other;
        let b = other * self.matrix.as_ref();
        linalg::frobenius_norm((&a - &b).as_ref())
    }
}

impl Operator for HermitianOperator {
    fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }
}

/// Dense tilted-field Ising chain in the σᶻ basis.
pub fn build_local_chain(p: &ChainParams) -> Result<HermitianOperator> {
    p.validate()?;
    let spec = HilbertSpec::new(p.n_sites)?;
    let dim = spec.dim();
    let bonds = p.bonds();
    let disorder = p.disorder();
    let z = |index: usize, site: usize| if (index >> site) & 1 == 0 { 1.0 } else { -1.0 };

    let mut m = Mat::<C64>::zeros(dim, dim);
    for index in 0..dim {
        let mut diag = 0.0;
        for &(a, b) in &bonds {
            diag -= p.coupling * z(index, a) * z(index, b);
        }
        for (site, d) in disorder.iter().enumerate() {
            diag += (d - p.longitudinal_field) * z(index, site);
        }
        m[(index, index)] = C64::new(diag, 0.0);
        if p.transverse_field != 0.0 {
            for site in 0..p.n_sites {
                m[(index ^ (1 << site), index)] = C64::new(-p.transverse_field, 0.0);
            }
        }
    }
    HermitianOperator::new(m, Locality::Local)
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(dim: usize, seed: u64) -> CMat {
    let mut rng = seed::rng(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = Mat::<C64>::zeros(dim, dim);
    // fill column by column so the draw order is fixed
    for j in 0..dim {
        for i in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = C64::new(re * scale, im * scale);
        }
    }
    let qr = g.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U H U†` with `U` Haar-random from `seed`.
pub fn scramble(h: &HermitianOperator, seed: u64) -> HermitianOperator {
    let u = haar_unitary(h.dim(), seed);
    scramble_with(h, u.as_ref())
}

/// `U H U†` for a caller-supplied unitary.
pub fn scramble_with(h: &HermitianOperator, u: MatRef<'_, C64>) -> HermitianOperator {
    let conj = linalg::conjugate(u, h.matrix());
    HermitianOperator {
        matrix: linalg::hermitian_part(conj.as_ref()),
        locality: Locality::Scrambled,
    }
}

/// Real symmetric Gaussian-ensemble matrix whose eigenvalue mean is `mean`
/// and eigenvalue standard deviation is `width`.
///
/// Both moments follow from traces, so the rescaling is exact and needs no
/// diagonalization.
pub fn build_goe(dim: usize, mean: f64, width: f64, seed: u64) -> Result<HermitianOperator> {
    if dim == 0 {
        return Err(Error::InvalidArgument("GOE dimension must be >= 1".into()));
    }
    if !(width >= 0.0) || !mean.is_finite() || !width.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "GOE needs finite mean and width >= 0, got mean {mean}, width {width}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut a = Mat::<f64>::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..=j {
            let x: f64 = rng.sample(StandardNormal);
            // off-diagonal variance 1/2, diagonal variance 1
            let v = if i == j {
                x
            } else {
                x * std::f64::consts::FRAC_1_SQRT_2
            };
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let n = dim as f64;
    let tr: f64 = (0..dim).map(|i| a[(i, i)]).sum();
    let mu = tr / n;
    let mut fro2 = 0.0;
    for j in 0..dim {
        for i in 0..dim {
            fro2 += a[(i, j)] * a[(i, j)];
        }
    }
    let sigma = (fro2 / n - mu * mu).max(0.0).sqrt();
    let scale = if sigma > 0.0 { width / sigma } else { 0.0 };
    let m = Mat::<C64>::from_fn(dim, dim, |i, j| {
        let centered = if i == j { a[(i, j)] - mu } else { a[(i, j)] };
        let shift = if i == j { mean } else { 0.0 };
        C64::new(centered * scale + shift, 0.0)
    });
    HermitianOperator::new(m, Locality::Random)
}

/// `σ^axis` on `site` for a chain of `n_sites`, padded by identities.
pub(crate) fn pauli_on_site(n_sites: usize, site: usize, axis: u8) -> CMat {
    let dim = 1usize << n_sites;
    let mut m = Mat::<C64>::zeros(dim, dim);
    for index in 0..dim {
        let bit = (index >> site) & 1;
        match axis {
            b'x' => m[(index ^ (1 << site), index)] = C64::new(1.0, 0.0),
            // σʸ|0⟩ = i|1⟩, σʸ|1⟩ = −i|0⟩
            b'y' => {
                let v = if bit == 0 {
                    C64::new(0.0, 1.0)
                } else {
                    C64::new(0.0, -1.0)
                };
                m[(index ^ (1 << site), index)] = v;
            }
            _ => {
                m[(index, index)] = C64::new(if bit == 0 { 1.0 } else { -1.0 }, 0.0);
            }
        }
    }
    m
}
