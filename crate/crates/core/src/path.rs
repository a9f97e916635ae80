//! Paths as piecewise-constant Hamiltonian schedules, their lengths, and
//! two-sided estimates of the distance from the identity.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{exp_coords, generator_coords, log_coords, principal_generator, Unitary};
use crate::error::{domain, validation, Error, Result};
use crate::linalg::{expm_hermitian, frobenius, phase_aligned_distance};
use crate::metric::{distortion_constants, MetricConfig, PenaltyMetric, TangentNorm};
use crate::pauli::{basis, reconstruct, CMatrix, CoeffVector};
use crate::rng;

/// One constant-Hamiltonian piece of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub y: CoeffVector,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    n: usize,
    segments: Vec<Segment>,
}

impl Path {
    pub fn new(n: usize, segments: Vec<Segment>) -> Result<Self> {
        basis(n)?;
        for (i, s) in segments.iter().enumerate() {
            if s.y.n() != n {
                return Err(domain(format!("segment {i} is for n = {}, path is for n = {n}", s.y.n())));
            }
            if !(s.tau.is_finite() && s.tau > 0.0) {
                return Err(validation(format!("segment {i} has non-positive duration {}", s.tau)));
            }
        }
        Ok(Self { n, segments })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.tau).sum()
    }

    /// `self` followed by `next`.
    pub fn concat(&self, next: &Path) -> Result<Path> {
        if self.n != next.n {
            return Err(domain("cannot concatenate paths with different qubit counts"));
        }
        let mut segments = self.segments.clone();
        segments.extend(next.segments.iter().cloned());
        Ok(Path {
            n: self.n,
            segments,
        })
    }
}

/// Endpoint of the path started at the identity; later segments act on the left.
pub fn path_endpoint(path: &Path) -> Unitary {
    let mut x = Unitary::identity(path.n()).expect("validated path");
    for s in path.segments() {
        x = exp_coords(&s.y.scaled(s.tau), &x).expect("validated path");
    }
    x
}

/// `sum_j F_p(y_j) * tau_j`.
pub fn path_length(path: &Path, cfg: &MetricConfig) -> Result<f64> {
    if path.n() != cfg.n {
        return Err(domain(format!("path is for n = {}, metric for n = {}", path.n(), cfg.n)));
    }
    let metric = PenaltyMetric::new(*cfg);
    Ok(path
        .segments()
        .iter()
        .map(|s| metric.norm(s.y.as_slice()) * s.tau)
        .sum())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimizerSettings {
    /// Segments per candidate path.
    pub segments: usize,
    pub restarts: usize,
    /// Max phase-aligned Frobenius distance between endpoint and target.
    pub tolerance: f64,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            segments: 8,
            restarts: 16,
            tolerance: 1e-6,
            max_evals: 4000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimizerStats {
    pub restarts: usize,
    pub iterations: usize,
    pub endpoint_error: f64,
}

#[derive(Debug, Clone)]
pub struct DistanceEstimate {
    pub upper: f64,
    pub lower: f64,
    pub witness_path: Path,
    pub optimizer_stats: OptimizerStats,
}

/// Chart lower bound `m * |log_coords(U, I)|` on the distance from the identity.
pub fn distance_lower(u: &Unitary, cfg: &MetricConfig) -> Result<f64> {
    if u.n() != cfg.n {
        return Err(domain(format!("unitary is for n = {}, metric for n = {}", u.n(), cfg.n)));
    }
    let (m_small, _) = distortion_constants(cfg);
    let y = log_coords(u, &Unitary::identity(u.n())?)?;
    Ok(m_small * y.norm())
}

// Phase sums further than this from zero have no traceless principal log.
const PHASE_SUM_TOL: f64 = 1e-6;

/// Search state: free generators for all but the last segment; the last
/// segment is always the chart logarithm that closes the path onto the
/// target, so every accepted candidate reaches the target exactly.
struct Candidate<'a> {
    target: &'a CMatrix,
    metric: &'a PenaltyMetric,
    n: usize,
    free: Vec<Vec<f64>>,
    steps: Vec<CMatrix>,
    closing: Vec<f64>,
    value: f64,
    evals: usize,
}

impl<'a> Candidate<'a> {
    fn step_matrix(n: usize, g: &[f64]) -> CMatrix {
        let y = CoeffVector::new(n, g.to_vec()).expect("finite generator");
        expm_hermitian(&reconstruct(&y), 1.0)
    }

    /// Generator of the closing segment for the given prefix product.
    fn close(&self, prefix: &CMatrix) -> Option<Vec<f64>> {
        let w = self.target * prefix.adjoint();
        let (h, phase_sum) = principal_generator(&w).ok()?;
        if phase_sum.abs() > PHASE_SUM_TOL {
            return None;
        }
        Some(generator_coords(&h, self.n).ok()?.into_vec())
    }

    fn product(steps: &[CMatrix], dim: usize) -> CMatrix {
        steps
            .iter()
            .fold(CMatrix::identity(dim, dim), |acc, s| s * acc)
    }

    fn new(target: &'a CMatrix, metric: &'a PenaltyMetric, n: usize, free: Vec<Vec<f64>>) -> Option<Self> {
        let steps: Vec<CMatrix> = free.iter().map(|g| Self::step_matrix(n, g)).collect();
        let mut c = Self {
            target,
            metric,
            n,
            free,
            steps,
            closing: Vec::new(),
            value: f64::INFINITY,
            evals: 1,
        };
        let dim = target.nrows();
        c.closing = c.close(&Self::product(&c.steps, dim))?;
        c.value = c.free.iter().map(|g| metric.norm(g)).sum::<f64>() + metric.norm(&c.closing);
        Some(c)
    }

    /// Compass search with step halving.
    fn pattern_search(&mut self, initial_step: f64, max_evals: usize) {
        let dim = self.target.nrows();
        let mut h = initial_step;
        let min_step = 1e-7 * initial_step.max(1e-3);
        while h > min_step && self.evals < max_evals {
            let mut improved = false;
            for j in 0..self.free.len() {
                let left = Self::product(&self.steps[j + 1..], dim);
                let right = Self::product(&self.steps[..j], dim);
                let others: f64 = self
                    .free
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, g)| self.metric.norm(g))
                    .sum();
                for i in 0..self.free[j].len() {
                    for dir in [1.0, -1.0] {
                        if self.evals >= max_evals {
                            return;
                        }
                        self.evals += 1;
                        let mut trial = self.free[j].clone();
                        trial[i] += dir * h;
                        let step = Self::step_matrix(self.n, &trial);
                        let prefix = &left * &step * &right;
                        let Some(closing) = self.close(&prefix) else {
                            continue;
                        };
                        let value = others + self.metric.norm(&trial) + self.metric.norm(&closing);
                        if value < self.value - 1e-15 * self.value.max(1.0) {
                            self.free[j] = trial;
                            self.steps[j] = step;
                            self.closing = closing;
                            self.value = value;
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
    }

    fn into_path(self) -> Path {
        let n = self.n;
        let segments = self
            .free
            .into_iter()
            .chain(std::iter::once(self.closing))
            .filter(|g| g.iter().any(|v| *v != 0.0))
            .map(|g| Segment {
                y: CoeffVector::new(n, g).expect("finite generator"),
                tau: 1.0,
            })
            .collect();
        Path::new(n, segments).expect("valid segments")
    }
}

struct RestartOutcome {
    path: Option<(Path, f64, f64)>,
    evals: usize,
    best_error: f64,
}

fn run_restart(
    u: &Unitary,
    metric: &PenaltyMetric,
    chart_start: Option<&CoeffVector>,
    opt: &OptimizerSettings,
    restart: usize,
) -> RestartOutcome {
    let n = u.n();
    let dim = basis(n).expect("validated").dim();
    let free_count = opt.segments.saturating_sub(1);
    let mut rng = rng::stream(opt.seed, "optimizer", restart as u64);
    let target = u.matrix();
    let mut evals = 0;
    let mut best_error = f64::INFINITY;

    // restart 0 is the one-parameter subgroup itself, split evenly
    let attempts = if restart == 0 && chart_start.is_some() { 1 } else { 8 };
    for attempt in 0..attempts {
        let free: Vec<Vec<f64>> = match chart_start {
            Some(y) if restart == 0 && attempt == 0 => (0..free_count)
                .map(|_| y.scaled(1.0 / opt.segments as f64).into_vec())
                .collect(),
            Some(y) => {
                let spread = 0.5 * y.norm().max(0.1) / (opt.segments as f64 * (dim as f64).sqrt());
                (0..free_count)
                    .map(|_| {
                        y.as_slice()
                            .iter()
                            .map(|v| v / opt.segments as f64 + spread * rng.sample::<f64, _>(StandardNormal))
                            .collect()
                    })
                    .collect()
            }
            None => {
                let spread = 1.0 / (opt.segments as f64 * (dim as f64).sqrt());
                (0..free_count)
                    .map(|_| (0..dim).map(|_| spread * rng.sample::<f64, _>(StandardNormal)).collect())
                    .collect()
            }
        };
        let Some(mut cand) = Candidate::new(target, metric, n, free.clone()) else {
            evals += 1;
            let steps: Vec<CMatrix> = free.iter().map(|g| Candidate::step_matrix(n, g)).collect();
            let prefix = Candidate::product(&steps, target.nrows());
            best_error = best_error.min(phase_aligned_distance(&prefix, target));
            continue;
        };
        let scale = cand.value.max(0.1) / opt.segments as f64;
        cand.pattern_search(0.25 * scale / (dim as f64).sqrt().max(1.0), opt.max_evals);
        evals += cand.evals;
        let length = cand.value;
        let path = cand.into_path();
        let err = phase_aligned_distance(path_endpoint(&path).matrix(), target);
        best_error = best_error.min(err);
        if err <= opt.tolerance {
            return RestartOutcome {
                path: Some((path, length, err)),
                evals,
                best_error,
            };
        }
    }
    RestartOutcome {
        path: None,
        evals,
        best_error,
    }
}

/// Upper bound on the distance from the identity to `u`, realized by an
/// explicit witness path.
pub fn distance_upper(u: &Unitary, cfg: &MetricConfig, opt: &OptimizerSettings) -> Result<DistanceEstimate> {
    if u.n() != cfg.n {
        return Err(domain(format!("unitary is for n = {}, metric for n = {}", u.n(), cfg.n)));
    }
    if opt.segments == 0 || opt.restarts == 0 {
        return Err(domain("optimizer needs at least one segment and one restart"));
    }
    if !(opt.tolerance > 0.0) {
        return Err(domain("endpoint tolerance must be positive"));
    }
    let n = u.n();
    let lower = distance_lower(u, cfg).unwrap_or(0.0);
    let id = Unitary::identity(n)?;
    let raw = frobenius(&(u.matrix() - id.matrix()));
    if raw <= opt.tolerance {
        return Ok(DistanceEstimate {
            upper: 0.0,
            lower,
            witness_path: Path::empty(n)?,
            optimizer_stats: OptimizerStats {
                restarts: 0,
                iterations: 0,
                endpoint_error: raw,
            },
        });
    }

    let metric = PenaltyMetric::new(*cfg);
    let chart_start = log_coords(u, &id).ok();
    let outcomes: Vec<RestartOutcome> = (0..opt.restarts)
        .into_par_iter()
        .map(|r| run_restart(u, &metric, chart_start.as_ref(), opt, r))
        .collect();

    let iterations = outcomes.iter().map(|o| o.evals).sum();
    let best_error = outcomes.iter().map(|o| o.best_error).fold(f64::INFINITY, f64::min);
    // first minimum in restart order keeps the choice scheduling-independent
    let best = outcomes
        .into_iter()
        .filter_map(|o| o.path)
        .fold(None::<(Path, f64, f64)>, |acc, cand| match acc {
            Some(a) if a.1 <= cand.1 => Some(a),
            _ => Some(cand),
        });
    let Some((path, _, endpoint_error)) = best else {
        return Err(Error::Infeasible {
            best_endpoint_error: best_error,
        });
    };
    let upper = path_length(&path, cfg)?;
    Ok(DistanceEstimate {
        upper,
        lower,
        witness_path: path,
        optimizer_stats: OptimizerStats {
            restarts: opt.restarts,
            iterations,
            endpoint_error,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::pauli::PauliString;

    fn seg(n: usize, terms: &[(&str, f64)], tau: f64) -> Segment {
        Segment {
            y: CoeffVector::from_terms(n, terms.iter().copied()).unwrap(),
            tau,
        }
    }

    #[test]
    fn endpoint_examples() {
        let empty = Path::empty(2).unwrap();
        assert_eq!(path_endpoint(&empty), Unitary::identity(2).unwrap());

        let s = seg(2, &[("XZ", 0.4), ("YI", -0.2)], 0.7);
        let single = Path::new(2, vec![s.clone()]).unwrap();
        let expect = exp_coords(&s.y.scaled(0.7), &Unitary::identity(2).unwrap()).unwrap();
        assert!(max_abs_diff(path_endpoint(&single).matrix(), expect.matrix()) < 1e-14);

        let p = Path::new(1, vec![seg(1, &[("Z", 0.3)], 0.5), seg(1, &[("Z", -0.8)], 1.5)]).unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let expect = z.rotation(0.3 * 0.5 - 0.8 * 1.5);
        assert!(max_abs_diff(path_endpoint(&p).matrix(), &expect) < 1e-14);
    }

    #[test]
    fn later_segments_act_on_the_left() {
        let p = Path::new(1, vec![seg(1, &[("X", 0.3)], 1.0), seg(1, &[("Z", 0.5)], 1.0)]).unwrap();
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let expect = z.rotation(0.5) * x.rotation(0.3);
        assert!(max_abs_diff(path_endpoint(&p).matrix(), &expect) < 1e-14);
    }

    #[test]
    fn length_examples() {
        let cfg = MetricConfig::new(3, 6.0).unwrap();
        let p = Path::new(3, vec![seg(3, &[("XXX", 0.25)], 2.0)]).unwrap();
        assert!((path_length(&p, &cfg).unwrap() - 6.0 * 0.25 * 2.0).abs() < 1e-15);

        let full = Path::new(3, vec![seg(3, &[("XYI", 0.3), ("ZZZ", 0.1)], 1.0)]).unwrap();
        let halves = Path::new(
            3,
            vec![seg(3, &[("XYI", 0.3), ("ZZZ", 0.1)], 0.5), seg(3, &[("XYI", 0.3), ("ZZZ", 0.1)], 0.5)],
        )
        .unwrap();
        assert_eq!(path_length(&full, &cfg).unwrap(), path_length(&halves, &cfg).unwrap());
    }

    #[test]
    fn path_validation() {
        assert!(Path::new(1, vec![seg(1, &[("X", 1.0)], 0.0)]).is_err());
        assert!(Path::new(1, vec![seg(2, &[("XX", 1.0)], 1.0)]).is_err());
        let cfg = MetricConfig::new(2, 2.0).unwrap();
        assert!(path_length(&Path::empty(1).unwrap(), &cfg).is_err());
    }

    #[test]
    fn identity_target_has_zero_upper() {
        let cfg = MetricConfig::new(2, 4.0).unwrap();
        let est = distance_upper(&Unitary::identity(2).unwrap(), &cfg, &OptimizerSettings::default()).unwrap();
        assert_eq!(est.upper, 0.0);
        assert_eq!(est.lower, 0.0);
        assert!(est.witness_path.segments().is_empty());
    }

    #[test]
    fn single_axis_rotation_upper_pinches() {
        let x: PauliString = "X".parse().unwrap();
        let u = Unitary::new(1, x.rotation(0.5)).unwrap();
        for p in [1.0, 3.0] {
            let cfg = MetricConfig::new(1, p).unwrap();
            let est = distance_upper(&u, &cfg, &OptimizerSettings::default()).unwrap();
            assert!(est.upper <= 0.5 + 1e-3, "upper {}", est.upper);
            assert!((distance_lower(&u, &cfg).unwrap() - 0.5).abs() < 1e-12);
            assert!(est.lower <= est.upper + 1e-6);
            assert!(est.optimizer_stats.endpoint_error <= 1e-6);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let cfg = MetricConfig::new(1, 2.0).unwrap();
        assert_eq!(distance_lower(&Unitary::identity(1).unwrap(), &cfg).unwrap(), 0.0);
        let u = Unitary::new(1, "X".parse::<PauliString>().unwrap().rotation(0.3)).unwrap();
        assert!((distance_lower(&u, &cfg).unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn settings_validation() {
        let cfg = MetricConfig::new(1, 1.0).unwrap();
        let u = Unitary::new(1, "X".parse::<PauliString>().unwrap().rotation(0.3)).unwrap();
        let bad = OptimizerSettings {
            segments: 0,
            ..Default::default()
        };
        assert!(matches!(distance_upper(&u, &cfg, &bad), Err(Error::Domain(_))));
    }
}
