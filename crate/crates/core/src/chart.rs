//! Local coordinates on SU(2^n) centered at an arbitrary base point.
//!
//! A tangent vector `y` maps to the group element `exp(-i y.sigma) * base`;
//! the inverse is the principal matrix logarithm of `x * base^dagger`, so
//! the base point always sits at the chart origin.

use num_complex::Complex64;

use crate::error::{domain, validation, Error, Result};
use crate::linalg::{expm_hermitian, from_spectrum, max_abs_diff, unitary_eigen};
use crate::pauli::{basis, check_qubits, reconstruct, CMatrix, CoeffVector};

/// Max entrywise deviation of `U U^dagger` from the identity.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Max deviation of `det U` from one.
pub const DET_TOL: f64 = 1e-8;
/// Eigenvalues of `x * base^dagger` closer than this to -1 are rejected.
pub const BRANCH_GAP: f64 = 1e-8;
/// Max entrywise residual accepted when re-exponentiating a logarithm.
pub const LOG_RESIDUAL_TOL: f64 = 1e-9;

/// An element of SU(2^n).
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    n: usize,
    matrix: CMatrix,
}

impl Unitary {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(domain(format!(
                "matrix is {}x{}, expected {dim}x{dim} for n = {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let gram = &matrix * matrix.adjoint();
        let dev = max_abs_diff(&gram, &CMatrix::identity(dim, dim));
        if !(dev <= UNITARITY_TOL) {
            return Err(validation(format!("matrix is not unitary: max |U U^dagger - I| = {dev:.3e}")));
        }
        let det = matrix.determinant();
        if (det - Complex64::new(1.0, 0.0)).norm() > DET_TOL {
            return Err(validation(format!("determinant {det:.6} is not 1")));
        }
        Ok(Self { n, matrix })
    }

    pub(crate) fn from_trusted(n: usize, matrix: CMatrix) -> Self {
        Self { n, matrix }
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        Ok(Self {
            n,
            matrix: CMatrix::identity(dim, dim),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self * rhs`.
    pub fn compose(&self, rhs: &Unitary) -> Result<Self> {
        if self.n != rhs.n {
            return Err(domain(format!("qubit counts differ: {} vs {}", self.n, rhs.n)));
        }
        Ok(Self {
            n: self.n,
            matrix: &self.matrix * &rhs.matrix,
        })
    }
}

/// A group element expressed in the chart centered at `base`.
#[derive(Debug, Clone)]
pub struct ChartPoint {
    base: Unitary,
    coords: CoeffVector,
}

impl ChartPoint {
    pub fn origin(base: Unitary) -> Result<Self> {
        let coords = CoeffVector::zeros(base.n())?;
        Ok(Self { base, coords })
    }

    /// Coordinates of `x` around `base`; rejects points whose coordinates
    /// reach the principal radius `pi`.
    pub fn locate(x: &Unitary, base: Unitary) -> Result<Self> {
        let coords = log_coords(x, &base)?;
        if coords.norm() >= std::f64::consts::PI {
            return Err(validation(format!(
                "chart coordinates have norm {:.6} >= pi",
                coords.norm()
            )));
        }
        Ok(Self { base, coords })
    }

    pub fn base(&self) -> &Unitary {
        &self.base
    }

    pub fn coords(&self) -> &CoeffVector {
        &self.coords
    }

    pub fn point(&self) -> Unitary {
        exp_coords(&self.coords, &self.base).expect("same qubit count by construction")
    }
}

/// `exp(-i y.sigma) * base`.
pub fn exp_coords(y: &CoeffVector, base: &Unitary) -> Result<Unitary> {
    if y.n() != base.n() {
        return Err(domain(format!(
            "coordinates are for n = {} but base has n = {}",
            y.n(),
            base.n()
        )));
    }
    if y.is_zero() {
        return Ok(base.clone());
    }
    let step = expm_hermitian(&reconstruct(y), 1.0);
    Ok(Unitary::from_trusted(base.n(), step * base.matrix()))
}

/// Principal Hermitian generator `h` with `w = exp(-i h)` and trace removed.
///
/// Returns the generator together with the sum of eigenphases before the
/// trace was removed.
pub(crate) fn principal_generator(w: &CMatrix) -> Result<(CMatrix, f64)> {
    let (q, lambda, _) = unitary_eigen(w);
    let mut closest = lambda[0];
    for l in &lambda {
        if (l + 1.0).norm() < (closest + 1.0).norm() {
            closest = *l;
        }
    }
    let gap = (closest + 1.0).norm();
    if gap < BRANCH_GAP {
        return Err(Error::BranchCut {
            eigenvalue: closest,
            gap: BRANCH_GAP,
        });
    }
    // w = q diag(e^{i theta}) q^dagger, so h = i log w = -q diag(theta) q^dagger
    let thetas: Vec<f64> = lambda.iter().map(|l| l.arg()).collect();
    let phase_sum: f64 = thetas.iter().sum();
    let shift = phase_sum / thetas.len() as f64;
    let values: Vec<f64> = thetas.iter().map(|t| -(t - shift)).collect();
    Ok((from_spectrum(&q, &values), phase_sum))
}

pub(crate) fn generator_coords(h: &CMatrix, n: usize) -> Result<CoeffVector> {
    let b = basis(n)?;
    let scale = 1.0 / (1usize << n) as f64;
    let y = b
        .strings()
        .iter()
        .map(|s| s.trace_product(h).re * scale)
        .collect();
    CoeffVector::new(n, y)
}

/// Coordinates of `x` in the chart centered at `base`.
pub fn log_coords(x: &Unitary, base: &Unitary) -> Result<CoeffVector> {
    if x.n() != base.n() {
        return Err(domain(format!("qubit counts differ: {} vs {}", x.n(), base.n())));
    }
    let n = x.n();
    let w = x.matrix() * base.matrix().adjoint();
    let (h, _) = principal_generator(&w)?;
    let y = generator_coords(&h, n)?;
    let back = exp_coords(&y, base)?;
    let residual = max_abs_diff(back.matrix(), x.matrix());
    if residual > LOG_RESIDUAL_TOL {
        return Err(validation(format!(
            "traceless principal logarithm does not reproduce the point (residual {residual:.3e}); \
             point lies outside the principal chart"
        )));
    }
    Ok(y)
}

/// Euclidean chart length of the step from `x_s` to `x_next`.
pub fn chart_segment_rho(x_s: &Unitary, x_next: &Unitary) -> Result<f64> {
    Ok(log_coords(x_next, x_s)?.norm())
}
