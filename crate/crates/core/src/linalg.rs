//! Dense complex helpers: Hermitian exponentials, unitary eigenphases and
//! phase-insensitive distances.

use nalgebra::linalg::{Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::pauli::CMatrix;

/// `exp(-i * t * h)` for Hermitian `h`, via unitary diagonalization.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let dim = h.nrows();
    if h.iter().all(|z| *z == Complex64::new(0.0, 0.0)) || t == 0.0 {
        return CMatrix::identity(dim, dim);
    }
    // symmetrize so roundoff in `h` cannot leak anti-Hermitian parts
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -t * lambda);
        for r in 0..dim {
            scaled[(r, j)] *= phase;
        }
    }
    scaled * v.adjoint()
}

// The shifted QR iteration can stall on matrices that are numerically scalar.
const SCHUR_MAX_ITER: usize = 2000;

/// Diagonalizes a normal matrix through the Hermitian pencil
/// `re(w) + alpha * im(w)`; returns `q` and `q^dagger w q`.
fn normal_eigen(w: &CMatrix) -> (CMatrix, CMatrix) {
    let adj = w.adjoint();
    let re = (w + &adj) * Complex64::new(0.5, 0.0);
    let im = (w - &adj) * Complex64::new(0.0, -0.5);
    // irrational weight keeps distinct eigenvalues of w apart
    let alpha = 0.5 * (5f64.sqrt() - 1.0);
    let pencil = &re + &im * Complex64::new(alpha, 0.0);
    let q = SymmetricEigen::new((&pencil + pencil.adjoint()) * Complex64::new(0.5, 0.0)).eigenvectors;
    let t = q.adjoint() * w * &q;
    (q, t)
}

/// Schur form `w = q * diag(lambda) * q^dagger` of a unitary matrix.
///
/// Unitaries are normal, so the triangular factor is diagonal up to
/// roundoff; the off-diagonal mass is returned for callers that care.
pub fn unitary_eigen(w: &CMatrix) -> (CMatrix, Vec<Complex64>, f64) {
    let (q, t) = match Schur::try_new(w.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        Some(schur) => schur.unpack(),
        None => normal_eigen(w),
    };
    let dim = w.nrows();
    let eigenvalues = (0..dim).map(|j| t[(j, j)]).collect();
    let mut off = 0.0f64;
    for r in 0..dim {
        for c in (r + 1)..dim {
            off = off.max(t[(r, c)].norm());
        }
    }
    (q, eigenvalues, off)
}

/// Hermitian `q * diag(values) * q^dagger`.
pub fn from_spectrum(q: &CMatrix, values: &[f64]) -> CMatrix {
    let mut scaled = q.clone();
    for (j, v) in values.iter().enumerate() {
        for r in 0..q.nrows() {
            scaled[(r, j)] *= *v;
        }
    }
    scaled * q.adjoint()
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `min_phi || a - e^{i phi} b ||_F`.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
