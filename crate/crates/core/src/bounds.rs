//! Numerical checks of the inequalities relating metric lengths, chart
//! lengths and gate counts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{log_coords, Unitary};
use crate::error::{domain, Error, Result};
use crate::metric::{distortion_constants, MetricConfig, PenaltyMetric, TangentNorm};
use crate::path::{path_length, Path, Segment};
use crate::pauli::basis;
use crate::rng;
use crate::simulation::{simulate, Schedule, SimulationOptions, SimulationResult};

/// Absolute slack on every inequality check.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub context: String,
    pub lower: f64,
    pub observed: f64,
    pub upper: f64,
    pub passed: bool,
    /// `(observed - lower, upper - observed)`.
    pub slack: (f64, f64),
}

impl BoundReport {
    pub fn new(context: impl Into<String>, lower: f64, observed: f64, upper: f64) -> Self {
        let passed = lower - BOUND_TOL <= observed && observed <= upper + BOUND_TOL;
        Self {
            context: context.into(),
            lower,
            observed,
            upper,
            passed,
            slack: (observed - lower, upper - observed),
        }
    }
}

/// How unit tangent directions are drawn for distortion estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMeasure {
    /// Normalized isotropic Gaussians.
    Isotropic,
    /// Isotropic Gaussian restricted to a random coordinate subset whose size
    /// is uniform in `1..=dim`. Still has full support, but puts mass near
    /// sparse directions where quadratic-form norms attain their extrema in
    /// high dimension.
    #[default]
    RandomSupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionEstimate {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

const SAMPLE_CHUNK: usize = 4096;

fn draw_direction(rng: &mut ChaCha8Rng, dim: usize, measure: SamplingMeasure, buf: &mut [f64]) {
    loop {
        buf.iter_mut().for_each(|v| *v = 0.0);
        match measure {
            SamplingMeasure::Isotropic => {
                for v in buf.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
            SamplingMeasure::RandomSupport => {
                let size = rng.random_range(1..=dim);
                if size == dim {
                    for v in buf.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                } else {
                    for idx in rand::seq::index::sample(rng, dim, size) {
                        buf[idx] = rng.sample(StandardNormal);
                    }
                }
            }
        }
        let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            buf.iter_mut().for_each(|v| *v /= norm);
            return;
        }
    }
}

fn chunk_extrema(
    norm: &dyn TangentNorm,
    dim: usize,
    seed: u64,
    measure: SamplingMeasure,
    chunk: usize,
    count: usize,
) -> Result<(f64, f64)> {
    let mut rng = rng::stream(seed, "sampler", chunk as u64);
    let mut buf = vec![0.0; dim];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..count {
        draw_direction(&mut rng, dim, measure, &mut buf);
        let len = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = norm.norm(&buf) / len;
        if !v.is_finite() {
            return Err(Error::Evaluation(format!("norm evaluated to {v} on a sample")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Monte Carlo extrema of `norm(y) / |y|` over unit directions.
///
/// Sample `i` always comes from the same stream position, so estimates for
/// `N` samples are computed on a prefix of those for `2N`.
pub fn estimate_distortion_with(
    norm: &dyn TangentNorm,
    n: usize,
    samples: usize,
    seed: u64,
    measure: SamplingMeasure,
) -> Result<DistortionEstimate> {
    if samples == 0 {
        return Err(domain("need at least one sample"));
    }
    let dim = basis(n)?.dim();
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
            chunk_extrema(norm, dim, seed, measure, c, count)
        })
        .collect::<Result<Vec<_>>>()?;
    let (min, max) = parts
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
    Ok(DistortionEstimate { min, max, samples })
}

pub fn estimate_distortion(norm: &dyn TangentNorm, n: usize, samples: usize, seed: u64) -> Result<DistortionEstimate> {
    estimate_distortion_with(norm, n, samples, seed, SamplingMeasure::default())
}

/// Chart sandwich `|phi| <= F_p-length of the straight chart segment <= p |phi|`
/// for the step from `x0` to `x1`.
pub fn check_segment_distortion(x0: &Unitary, x1: &Unitary, cfg: &MetricConfig) -> Result<BoundReport> {
    let phi = log_coords(x1, x0)?;
    let rho = phi.norm();
    let straight = Path::new(cfg.n, vec![Segment { y: phi, tau: 1.0 }])?;
    let observed = path_length(&straight, cfg)?;
    Ok(BoundReport::new("segment_distortion", rho, observed, cfg.p * rho))
}

fn require_positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(v.is_finite() && *v > 0.0) {
            return Err(domain(format!("{name} = {v} must be positive")));
        }
    }
    Ok(())
}

/// Gate-count bounds from per-gate chart lengths:
/// `d / (rho_sup M) <= m <= d / (rho_inf m)`.
pub fn theorem1_bounds(d: f64, rho_inf: f64, rho_sup: f64, m_small: f64, m_big: f64) -> Result<(f64, f64)> {
    require_positive(&[
        ("d", d),
        ("rho_inf", rho_inf),
        ("rho_sup", rho_sup),
        ("m", m_small),
        ("M", m_big),
    ])?;
    Ok((d / (rho_sup * m_big), d / (rho_inf * m_small)))
}

/// Gate-count bounds from per-gate metric lengths:
/// `d / beta_sup <= m <= (M / m) d / beta_inf`.
pub fn theorem2_bounds(d: f64, beta_inf: f64, beta_sup: f64, m_small: f64, m_big: f64) -> Result<(f64, f64)> {
    require_positive(&[
        ("d", d),
        ("beta_inf", beta_inf),
        ("beta_sup", beta_sup),
        ("m", m_small),
        ("M", m_big),
    ])?;
    Ok((d / beta_sup, (m_big / m_small) * d / beta_inf))
}

/// `m rho_inf <= L <= m p rho_sup` for a simulation result.
pub fn check_sim_sandwich(result: &SimulationResult, cfg: &MetricConfig) -> BoundReport {
    let m = result.gate_count as f64;
    BoundReport::new(
        "sim_sandwich",
        m * result.rho_inf,
        result.exact_path_length,
        m * cfg.p * result.rho_sup,
    )
}

/// Measured quantities of a chart-step decomposition of a path.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionCheck {
    pub steps: usize,
    pub rhos: Vec<f64>,
    pub betas: Vec<f64>,
    pub rho_inf: f64,
    pub rho_sup: f64,
    pub beta_inf: f64,
    pub beta_sup: f64,
    /// Sum of the straight-chart-segment lengths.
    pub length: f64,
    pub theorem1: (f64, f64),
    pub theorem2: (f64, f64),
    pub reports: Vec<BoundReport>,
}

/// Splits the path through `waypoints` into chart steps, measures `rho_s`
/// (Euclidean chart length) and `beta_s` (metric length of the straight
/// chart segment), and evaluates both gate-count bounds against the step
/// count for a path of known length `d`.
pub fn check_decomposition(waypoints: &[Unitary], d: f64, cfg: &MetricConfig) -> Result<DecompositionCheck> {
    if waypoints.len() < 2 {
        return Err(domain("decomposition needs at least two waypoints"));
    }
    let metric = PenaltyMetric::new(*cfg);
    let (m_small, m_big) = distortion_constants(cfg);
    let mut rhos = Vec::with_capacity(waypoints.len() - 1);
    let mut betas = Vec::with_capacity(waypoints.len() - 1);
    for pair in waypoints.windows(2) {
        let phi = log_coords(&pair[1], &pair[0])?;
        rhos.push(phi.norm());
        betas.push(metric.norm(phi.as_slice()));
    }
    let extrema = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)))
    };
    let (rho_inf, rho_sup) = extrema(&rhos);
    let (beta_inf, beta_sup) = extrema(&betas);
    let steps = rhos.len();
    let m = steps as f64;
    let length: f64 = betas.iter().sum();
    let theorem1 = theorem1_bounds(d, rho_inf, rho_sup, m_small, m_big)?;
    let theorem2 = theorem2_bounds(d, beta_inf, beta_sup, m_small, m_big)?;
    let reports = vec![
        BoundReport::new("theorem1_gate_count", theorem1.0, m, theorem1.1),
        BoundReport::new("theorem2_gate_count", theorem2.0, m, theorem2.1),
        BoundReport::new(
            "decomposition_length",
            m * m_small * rho_inf,
            length,
            m * m_big * rho_sup,
        ),
    ];
    Ok(DecompositionCheck {
        steps,
        rhos,
        betas,
        rho_inf,
        rho_sup,
        beta_inf,
        beta_sup,
        length,
        theorem1,
        theorem2,
        reports,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPoint {
    pub delta: f64,
    pub gate_count: usize,
    pub exact_path_length: f64,
    pub approx_error: f64,
    pub rho_inf: f64,
    pub rho_sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln(gate_count)` against `ln(1/delta)`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub sandwich: Vec<BoundReport>,
}

/// Ordinary least squares `y = slope * x + intercept`; returns the RMS residual too.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Runs the simulation at each slice width and fits how the gate count grows.
pub fn corollary2_scaling(schedule: &Schedule, cfg: &MetricConfig, deltas: &[f64]) -> Result<ScalingReport> {
    if deltas.len() < 3 {
        return Err(domain(format!("need at least 3 slice widths, got {}", deltas.len())));
    }
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || hi < 4.0 * lo * (1.0 - 1e-12) {
        return Err(domain("slice widths must be positive and span at least a factor of 4"));
    }
    let mut points = Vec::with_capacity(deltas.len());
    let mut sandwich = Vec::with_capacity(deltas.len());
    for delta in deltas {
        let r = simulate(schedule, cfg, &SimulationOptions::fixed(*delta))?;
        if r.gate_count == 0 {
            return Err(domain("schedule produces no gates; nothing to fit"));
        }
        let mut report = check_sim_sandwich(&r, cfg);
        report.context = format!("sim_sandwich[delta={delta}]");
        sandwich.push(report);
        points.push(ScalingPoint {
            delta: *delta,
            gate_count: r.gate_count,
            exact_path_length: r.exact_path_length,
            approx_error: r.approx_error,
            rho_inf: r.rho_inf,
            rho_sup: r.rho_sup,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (1.0 / p.delta).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.gate_count as f64).ln()).collect();
    let (slope, intercept, residual) = fit_line(&xs, &ys);
    Ok(ScalingReport {
        points,
        slope,
        intercept,
        residual,
        sandwich,
    })
}
