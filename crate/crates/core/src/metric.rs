//! Minkowski norms on the tangent space.
//!
//! The penalty metric weights every Pauli direction of weight three or more
//! by `p`; weight-one and weight-two directions keep their Euclidean cost.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Error, Result};
use crate::pauli::{basis, partition_k, CoeffVector};

/// A norm on tangent coordinates.
pub trait TangentNorm: Sync {
    fn norm(&self, y: &[f64]) -> f64;
}

impl<F> TangentNorm for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn norm(&self, y: &[f64]) -> f64 {
        self(y)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl TangentNorm for Euclidean {
    fn norm(&self, y: &[f64]) -> f64 {
        y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `sum |y_i|`; not smooth on coordinate hyperplanes.
#[derive(Debug, Clone, Copy, Default)]
pub struct OneNorm;

impl TangentNorm for OneNorm {
    fn norm(&self, y: &[f64]) -> f64 {
        y.iter().map(|v| v.abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub n: usize,
    pub p: f64,
    pub k: usize,
}

impl MetricConfig {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        basis(n)?;
        if !p.is_finite() || p < 1.0 {
            return Err(validation(format!("penalty p = {p} must be finite and >= 1")));
        }
        Ok(Self {
            n,
            p,
            k: partition_k(n),
        })
    }

    /// Penalty `2^n` used when none is given.
    pub fn with_default_penalty(n: usize) -> Result<Self> {
        Self::new(n, (1u64 << n) as f64)
    }

    /// Whether the tangent space has any penalized (weight >= 3) direction.
    pub fn has_penalized_directions(&self) -> bool {
        self.k < (1usize << (2 * self.n)) - 1
    }

    pub fn penalty_metric(&self) -> PenaltyMetric {
        PenaltyMetric::new(*self)
    }
}

/// `F_p(y) = sqrt(sum_{w<=2} y_i^2 + p^2 sum_{w>=3} y_i^2)`.
#[derive(Debug, Clone)]
pub struct PenaltyMetric {
    cfg: MetricConfig,
    // squared weight per tangent coordinate
    weights: Vec<f64>,
}

impl PenaltyMetric {
    pub fn new(cfg: MetricConfig) -> Self {
        let b = basis(cfg.n).expect("validated by MetricConfig");
        let p2 = cfg.p * cfg.p;
        let weights = b
            .strings()
            .iter()
            .map(|s| if s.weight() <= 2 { 1.0 } else { p2 })
            .collect();
        Self { cfg, weights }
    }

    pub fn config(&self) -> &MetricConfig {
        &self.cfg
    }

    /// Squared weight applied to each coordinate (1 or p^2).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval(&self, y: &CoeffVector) -> Result<f64> {
        if y.n() != self.cfg.n {
            return Err(domain(format!(
                "vector is for n = {} but metric is for n = {}",
                y.n(),
                self.cfg.n
            )));
        }
        Ok(self.norm(y.as_slice()))
    }
}

impl TangentNorm for PenaltyMetric {
    fn norm(&self, y: &[f64]) -> f64 {
        y.iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }
}

pub fn minkowski_norm(y: &CoeffVector, cfg: &MetricConfig) -> Result<f64> {
    PenaltyMetric::new(*cfg).eval(y)
}

/// Exact extrema `(m, M)` of `F_p(y) / |y|` over nonzero `y`.
pub fn distortion_constants(cfg: &MetricConfig) -> (f64, f64) {
    if cfg.has_penalized_directions() {
        (1.0, cfg.p)
    } else {
        (1.0, 1.0)
    }
}

/// Outcome of checking the defining Finsler properties at trial points.
#[derive(Debug, Clone, Serialize)]
pub struct FinslerReport {
    pub smoothness_pass: bool,
    pub homogeneity_pass: bool,
    pub hessian_pd_pass: bool,
    pub max_homogeneity_error: f64,
    pub max_gradient_mismatch: f64,
    pub min_hessian_eigenvalue: f64,
}

impl FinslerReport {
    pub fn all_pass(&self) -> bool {
        self.smoothness_pass && self.homogeneity_pass && self.hessian_pd_pass
    }
}

pub const HOMOGENEITY_TOL: f64 = 1e-9;
pub const HESSIAN_MIN_EIGENVALUE: f64 = 1e-6;
pub const GRADIENT_REL_TOL: f64 = 1e-5;

fn fd_step(y: &[f64]) -> f64 {
    1e-4 * Euclidean.norm(y).max(1.0)
}

fn eval_finite(norm: &dyn TangentNorm, y: &[f64]) -> Result<f64> {
    let v = norm.norm(y);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation(format!("norm evaluated to {v}")))
    }
}

/// Central-difference gradient of `norm` at `y` with step `h`.
pub fn gradient(norm: &dyn TangentNorm, y: &[f64], h: f64) -> Result<DVector<f64>> {
    let mut probe = y.to_vec();
    let mut g = DVector::zeros(y.len());
    for i in 0..y.len() {
        probe[i] = y[i] + h;
        let plus = eval_finite(norm, &probe)?;
        probe[i] = y[i] - h;
        let minus = eval_finite(norm, &probe)?;
        probe[i] = y[i];
        g[i] = (plus - minus) / (2.0 * h);
    }
    Ok(g)
}

/// Central-difference Hessian of `norm^2 / 2` at `y`.
pub fn half_square_hessian(norm: &dyn TangentNorm, y: &[f64]) -> Result<DMatrix<f64>> {
    let h = fd_step(y);
    let d = y.len();
    let f = |p: &[f64]| -> Result<f64> {
        let v = eval_finite(norm, p)?;
        Ok(0.5 * v * v)
    };
    let center = f(y)?;
    let mut probe = y.to_vec();
    let mut hess = DMatrix::zeros(d, d);
    for i in 0..d {
        probe[i] = y[i] + h;
        let plus = f(&probe)?;
        probe[i] = y[i] - h;
        let minus = f(&probe)?;
        probe[i] = y[i];
        hess[(i, i)] = (plus - 2.0 * center + minus) / (h * h);
        for j in (i + 1)..d {
            let mut corner = |si: f64, sj: f64| -> Result<f64> {
                probe[i] = y[i] + si * h;
                probe[j] = y[j] + sj * h;
                let v = f(&probe);
                probe[i] = y[i];
                probe[j] = y[j];
                v
            };
            let v = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?)
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Checks positive homogeneity, a smoothness proxy and positive definiteness
/// of the Hessian of `norm^2 / 2` at every trial point.
pub fn check_finsler_properties(
    norm: &dyn TangentNorm,
    n: usize,
    trial_points: &[CoeffVector],
) -> Result<FinslerReport> {
    let dim = basis(n)?.dim();
    let mut report = FinslerReport {
        smoothness_pass: true,
        homogeneity_pass: true,
        hessian_pd_pass: true,
        max_homogeneity_error: 0.0,
        max_gradient_mismatch: 0.0,
        min_hessian_eigenvalue: f64::INFINITY,
    };
    for y in trial_points {
        if y.n() != n || y.len() != dim {
            return Err(domain(format!("trial point is not a tangent vector for n = {n}")));
        }
        if y.is_zero() {
            return Err(domain("trial points must be nonzero"));
        }
        let y = y.as_slice();
        let base = eval_finite(norm, y)?;
        for lambda in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            let err = (eval_finite(norm, &scaled)? - lambda * base).abs();
            report.max_homogeneity_error = report.max_homogeneity_error.max(err);
        }

        let h = fd_step(y);
        let g_full = gradient(norm, y, h)?;
        let g_half = gradient(norm, y, 0.5 * h)?;
        let scale = g_full.norm().max(f64::MIN_POSITIVE);
        let mismatch = (&g_full - &g_half).norm() / scale;
        report.max_gradient_mismatch = report.max_gradient_mismatch.max(mismatch);

        let lo = min_eigenvalue(&half_square_hessian(norm, y)?);
        report.min_hessian_eigenvalue = report.min_hessian_eigenvalue.min(lo);
    }
    report.homogeneity_pass = report.max_homogeneity_error < HOMOGENEITY_TOL;
    report.smoothness_pass = report.max_gradient_mismatch < GRADIENT_REL_TOL;
    report.hessian_pd_pass = report.min_hessian_eigenvalue > HESSIAN_MIN_EIGENVALUE;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    #[test]
    fn config_validation() {
        assert!(MetricConfig::new(2, 0.5).is_err());
        assert!(MetricConfig::new(2, f64::NAN).is_err());
        assert!(MetricConfig::new(0, 2.0).is_err());
        let cfg = MetricConfig::new(3, 4.0).unwrap();
        assert_eq!(cfg.k, 36);
        assert_eq!(MetricConfig::with_default_penalty(3).unwrap().p, 8.0);
    }

    #[test]
    fn low_weight_vectors_have_euclidean_length() {
        let cfg = MetricConfig::new(3, 5.0).unwrap();
        let y = CoeffVector::from_terms(3, [("XII", 0.3), ("IZY", -0.4)]).unwrap();
        assert!((minkowski_norm(&y, &cfg).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weight_three_entry_is_penalized() {
        let cfg = MetricConfig::new(3, 5.0).unwrap();
        let y = CoeffVector::single("XYZ".parse::<PauliString>().unwrap(), -0.7).unwrap();
        assert!((minkowski_norm(&y, &cfg).unwrap() - 3.5).abs() < 1e-15);
    }

    #[test]
    fn norm_dimension_mismatch() {
        let cfg = MetricConfig::new(3, 2.0).unwrap();
        let y = CoeffVector::zeros(2).unwrap();
        assert!(matches!(minkowski_norm(&y, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn distortion_constant_examples() {
        assert_eq!(distortion_constants(&MetricConfig::new(3, 1.0).unwrap()), (1.0, 1.0));
        assert_eq!(distortion_constants(&MetricConfig::new(3, 4.0).unwrap()), (1.0, 4.0));
        assert_eq!(distortion_constants(&MetricConfig::new(1, 9.0).unwrap()), (1.0, 1.0));
        assert_eq!(distortion_constants(&MetricConfig::new(2, 9.0).unwrap()), (1.0, 1.0));
    }

    #[test]
    fn euclidean_hessian_is_identity() {
        let y = CoeffVector::new(2, (0..15).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let h = half_square_hessian(&Euclidean, y.as_slice()).unwrap();
        let dev = (h - DMatrix::<f64>::identity(15, 15)).abs().max();
        assert!(dev < 5e-6, "deviation {dev}");
        assert!(check_finsler_properties(&Euclidean, 2, &[y]).unwrap().all_pass());
    }

    #[test]
    fn one_norm_fails_hessian_check() {
        let mut v: Vec<f64> = (0..15).map(|i| 0.1 + 0.05 * i as f64).collect();
        v[4] = 0.0;
        let y = CoeffVector::new(2, v).unwrap();
        let r = check_finsler_properties(&OneNorm, 2, &[y]).unwrap();
        assert!(!r.hessian_pd_pass);
        assert!(r.homogeneity_pass);
    }

    #[test]
    fn non_finite_norm_is_an_error() {
        let bad = |_: &[f64]| f64::NAN;
        let y = CoeffVector::new(1, vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(check_finsler_properties(&bad, 1, &[y]), Err(Error::Evaluation(_))));
    }

    #[test]
    fn zero_trial_point_rejected() {
        let y = CoeffVector::zeros(1).unwrap();
        assert!(check_finsler_properties(&Euclidean, 1, &[y]).is_err());
    }
}
