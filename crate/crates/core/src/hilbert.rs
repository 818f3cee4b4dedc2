//! Tensor-product Hilbert space of a chain of spin-1/2 sites: basis
//! bookkeeping, pure states, contiguous regions and reduced density
//! matrices.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};

/// Largest chain handled by the dense routines.
pub const MAX_SITES: usize = 14;

const NORM_TOL: f64 = 1e-12;
const LOCAL_NORM_TOL: f64 = 1e-10;

/// `n_sites` two-level sites; dimension `2^n_sites`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    n_sites: usize,
}

impl HilbertSpec {
    pub fn new(n_sites: usize) -> Result<Self> {
        Self::with_limit(n_sites, MAX_SITES)
    }

    pub fn with_limit(n_sites: usize, max_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > max_sites {
            return Err(Error::InvalidArgument(format!(
                "n_sites must be in 1..={max_sites}, got {n_sites}"
            )));
        }
        Ok(Self { n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        2
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Recovers the chain size from a dimension that must be a power of two.
    pub fn from_dim(dim: usize) -> Result<Self> {
        if !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        Self::new(dim.trailing_zeros() as usize)
    }
}

/// Any dense operator on the full Hilbert space.
pub trait Operator {
    fn matrix(&self) -> MatRef<'_, C64>;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }
}

impl Operator for CMat {
    fn matrix(&self) -> MatRef<'_, C64> {
        self.as_ref()
    }
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    spec: HilbertSpec,
}

impl PureState {
    /// Normalizes `amplitudes`; fails on a length mismatch or a zero vector.
    pub fn new(spec: HilbertSpec, mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: amplitudes.len(),
            });
        }
        let n = linalg::norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument(
                "state has zero or non-finite norm".into(),
            ));
        }
        if (n - 1.0).abs() > NORM_TOL * 1e-2 {
            amplitudes.iter_mut().for_each(|a| *a /= n);
        }
        Ok(Self { amplitudes, spec })
    }

    pub fn basis(spec: HilbertSpec, index: usize) -> Result<Self> {
        if index >= spec.dim() {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {}",
                spec.dim()
            )));
        }
        let mut amps = vec![ZERO; spec.dim()];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self {
            amplitudes: amps,
            spec,
        })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.overlap(other).norm()
    }

    pub fn with_global_phase(&self, theta: f64) -> PureState {
        let p = C64::from_polar(1.0, theta);
        PureState {
            amplitudes: self.amplitudes.iter().map(|a| a * p).collect(),
            spec: self.spec,
        }
    }

    /// `⟨ψ|O|ψ⟩` for an operator given in the site basis.
    pub fn expectation<O: Operator + ?Sized>(&self, op: &O) -> Result<f64> {
        let v = apply(op, self)?;
        Ok(linalg::inner(&self.amplitudes, &v).re)
    }
}

/// Contiguous interval `[start, end)` of sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SiteRegion {
    start: usize,
    end: usize,
}

impl SiteRegion {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::RegionOutOfBounds {
                start,
                end,
                n_sites: end,
            });
        }
        Ok(Self { start, end })
    }

    /// `[0, len)`.
    pub fn prefix(len: usize) -> Result<Self> {
        Self::new(0, len)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// A region is valid if it is a proper, non-empty part of the chain.
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.end > n_sites || self.len() >= n_sites {
            return Err(Error::RegionOutOfBounds {
                start: self.start,
                end: self.end,
                n_sites,
            });
        }
        Ok(())
    }

    /// Number of bonds cut by the region boundary in an open chain.
    pub fn boundary_area(&self, n_sites: usize) -> usize {
        if self.start == 0 || self.end == n_sites {
            1
        } else {
            2
        }
    }

    fn mask(&self) -> usize {
        ((1usize << self.len()) - 1) << self.start
    }

    /// Splits a basis index into (region index, environment index).
    #[inline]
    fn split(&self, index: usize) -> (usize, usize) {
        let inside = (index >> self.start) & ((1 << self.len()) - 1);
        let low = index & ((1 << self.start) - 1);
        let high = index >> self.end;
        (inside, low | (high << self.start))
    }
}

/// Reduced density matrix of a region.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMat,
    region: SiteRegion,
}

impl DensityMatrix {
    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    pub fn region(&self) -> SiteRegion {
        self.region
    }

    pub fn trace(&self) -> C64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += self.matrix[(i, j)].norm_sqr();
            }
        }
        acc
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(self.matrix.as_ref())
    }
}

/// Kronecker product of single-site states; `locals[j]` sits on site `j`.
pub fn product_state(locals: &[[C64; 2]]) -> Result<PureState> {
    let spec = HilbertSpec::new(locals.len())?;
    for (site, l) in locals.iter().enumerate() {
        let norm = (l[0].norm_sqr() + l[1].norm_sqr()).sqrt();
        if (norm - 1.0).abs() > LOCAL_NORM_TOL {
            return Err(Error::NonNormalizedLocal { site, norm });
        }
    }
    let amps = (0..spec.dim())
        .map(|index| {
            locals
                .iter()
                .enumerate()
                .fold(C64::new(1.0, 0.0), |acc, (site, l)| {
                    acc * l[(index >> site) & 1]
                })
        })
        .collect();
    PureState::new(spec, amps)
}

/// Exact `op · ψ`, without renormalization.
pub fn apply<O: Operator + ?Sized>(op: &O, psi: &PureState) -> Result<Vec<C64>> {
    let m = op.matrix();
    if m.nrows() != psi.dim() || m.ncols() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: m.nrows(),
        });
    }
    Ok(linalg::matvec(m, psi.amplitudes()))
}

/// Amplitudes reshaped into a (region × environment) matrix.
pub(crate) fn bipartite_matrix(psi: &PureState, region: SiteRegion) -> Result<CMat> {
    let n = psi.spec().n_sites();
    region.validate(n)?;
    let rows = 1usize << region.len();
    let cols = 1usize << (n - region.len());
    let mut m = Mat::<C64>::zeros(rows, cols);
    for (index, &a) in psi.amplitudes().iter().enumerate() {
        let (r, c) = region.split(index);
        m[(r, c)] = a;
    }
    debug_assert_eq!(region.mask() >> region.start(), rows - 1);
    Ok(m)
}

/// `ρ_X = Tr_{X̄} |ψ⟩⟨ψ|`.
pub fn partial_trace(psi: &PureState, region: SiteRegion) -> Result<DensityMatrix> {
    let m = bipartite_matrix(psi, region)?;
    let rho = &m * m.adjoint();
    Ok(DensityMatrix {
        matrix: linalg::hermitian_part(rho.as_ref()),
        region,
    })
}
