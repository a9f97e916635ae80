//! Three-step standard simulation of a time-dependent Hamiltonian:
//! projection onto weight-<=2 terms, slicing into mean Hamiltonians, and
//! product-formula synthesis into one- and two-qubit Pauli rotations.
//!
//! Each gate `exp(-i y sigma delta^2)` is an exact step along a
//! constant-Hamiltonian segment, so the synthesized circuit traces a broken
//! path whose length is known exactly.

use serde::{Deserialize, Serialize};

use crate::chart::Unitary;
use crate::error::{domain, validation, Error, Result};
use crate::linalg::{expm_hermitian, phase_aligned_distance};
use crate::metric::{MetricConfig, PenaltyMetric, TangentNorm};
use crate::path::{distance_upper, path_length, OptimizerSettings, Path, Segment};
use crate::pauli::{basis, reconstruct, CMatrix, CoeffVector, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Constant,
    Linear,
}

/// `H(t)` on `[0, T]` given by samples.
///
/// With constant interpolation the value at sample `j` holds until the next
/// sample time; with linear interpolation values are joined by straight
/// lines. Either way the last sample holds until `T`.
#[derive(Debug, Clone)]
pub struct Schedule {
    n: usize,
    samples: Vec<(f64, CoeffVector)>,
    total_time: f64,
    interpolation: Interpolation,
}

impl Schedule {
    pub fn new(
        n: usize,
        samples: Vec<(f64, CoeffVector)>,
        total_time: f64,
        interpolation: Interpolation,
    ) -> Result<Self> {
        basis(n)?;
        if samples.is_empty() {
            return Err(validation("schedule needs at least one sample"));
        }
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(validation(format!("total time {total_time} must be positive")));
        }
        if samples[0].0 != 0.0 {
            return Err(validation(format!("first sample must be at t = 0, got {}", samples[0].0)));
        }
        for (i, (t, y)) in samples.iter().enumerate() {
            if y.n() != n {
                return Err(domain(format!("sample {i} is for n = {}, schedule for n = {n}", y.n())));
            }
            if !t.is_finite() || *t > total_time {
                return Err(validation(format!("sample time {t} outside [0, {total_time}]")));
            }
            if i > 0 && *t <= samples[i - 1].0 {
                return Err(validation("sample times must be strictly increasing"));
            }
        }
        Ok(Self {
            n,
            samples,
            total_time,
            interpolation,
        })
    }

    pub fn constant(y: CoeffVector, total_time: f64) -> Result<Self> {
        Self::new(y.n(), vec![(0.0, y)], total_time, Interpolation::Constant)
    }

    /// Piecewise-constant schedule that follows `path` segment by segment.
    pub fn from_path(path: &Path) -> Result<Self> {
        if path.segments().is_empty() {
            return Err(validation("schedule needs at least one segment"));
        }
        let mut t = 0.0;
        let samples = path
            .segments()
            .iter()
            .map(|s| {
                let start = t;
                t += s.tau;
                (start, s.y.clone())
            })
            .collect();
        Self::new(path.n(), samples, t, Interpolation::Constant)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn samples(&self) -> &[(f64, CoeffVector)] {
        &self.samples
    }

    /// Pieces `(start, end, y_start, y_end)` over which the interpolant is affine.
    fn pieces(&self) -> Vec<(f64, f64, &[f64], &[f64])> {
        let mut out = Vec::with_capacity(self.samples.len());
        for (i, (t, y)) in self.samples.iter().enumerate() {
            let end = self.samples.get(i + 1).map_or(self.total_time, |s| s.0);
            if end <= *t {
                continue;
            }
            let y_end = match (self.interpolation, self.samples.get(i + 1)) {
                (Interpolation::Linear, Some((_, next))) => next.as_slice(),
                _ => y.as_slice(),
            };
            out.push((*t, end, y.as_slice(), y_end));
        }
        out
    }

    /// `integral_a^b y(t) dt`, exact for both interpolation modes.
    pub fn integral(&self, a: f64, b: f64) -> Vec<f64> {
        let dim = self.samples[0].1.len();
        let mut acc = vec![0.0; dim];
        for (t0, t1, y0, y1) in self.pieces() {
            let lo = a.max(t0);
            let hi = b.min(t1);
            if hi <= lo {
                continue;
            }
            let w0 = (lo - t0) / (t1 - t0);
            let w1 = (hi - t0) / (t1 - t0);
            let mid = 0.5 * (w0 + w1);
            for i in 0..dim {
                acc[i] += (hi - lo) * (y0[i] + mid * (y1[i] - y0[i]));
            }
        }
        acc
    }

    /// Generator at time `t`.
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let pieces = self.pieces();
        let (t0, t1, y0, y1) = pieces
            .iter()
            .rev()
            .find(|p| p.0 <= t)
            .copied()
            .unwrap_or(pieces[0]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        y0.iter().zip(y1).map(|(a, b)| a + w * (b - a)).collect()
    }

    /// Length of the schedule as a path under `cfg`.
    pub fn length(&self, cfg: &MetricConfig) -> Result<f64> {
        let metric = PenaltyMetric::new(*cfg);
        match self.interpolation {
            Interpolation::Constant => {
                let segments = self
                    .pieces()
                    .into_iter()
                    .map(|(t0, t1, y, _)| Segment {
                        y: CoeffVector::new(self.n, y.to_vec()).expect("validated"),
                        tau: t1 - t0,
                    })
                    .collect();
                path_length(&Path::new(self.n, segments)?, cfg)
            }
            Interpolation::Linear => {
                // composite Simpson; F_p along a line is smooth away from zero
                let mut total = 0.0;
                for (t0, t1, _, _) in self.pieces() {
                    let steps = 64;
                    let h = (t1 - t0) / steps as f64;
                    for s in 0..steps {
                        let a = t0 + s as f64 * h;
                        let fa = metric.norm(&self.value_at(a));
                        let fm = metric.norm(&self.value_at(a + 0.5 * h));
                        let fb = metric.norm(&self.value_at(a + h));
                        total += h / 6.0 * (fa + 4.0 * fm + fb);
                    }
                }
                Ok(total)
            }
        }
    }
}

// Magnus steps per affine piece when integrating a linear schedule.
const MAGNUS_STEPS: usize = 256;

/// Time-ordered exponential of the schedule from `t = 0` to `T`.
///
/// Exact (up to roundoff) for constant interpolation; fourth-order Magnus
/// integration for linear interpolation.
pub fn schedule_endpoint(schedule: &Schedule) -> Unitary {
    let n = schedule.n();
    let dim = 1usize << n;
    let mut x = CMatrix::identity(dim, dim);
    let generator = |v: Vec<f64>| reconstruct(&CoeffVector::new(n, v).expect("finite values"));
    for (t0, t1, y0, y1) in schedule.pieces() {
        let constant = y0 == y1;
        if constant {
            x = expm_hermitian(&generator(y0.to_vec()), t1 - t0) * x;
            continue;
        }
        let h = (t1 - t0) / MAGNUS_STEPS as f64;
        let offset = 3f64.sqrt() / 6.0;
        for s in 0..MAGNUS_STEPS {
            let a = t0 + s as f64 * h;
            let h1 = generator(schedule.value_at(a + (0.5 - offset) * h));
            let h2 = generator(schedule.value_at(a + (0.5 + offset) * h));
            let comm = &h2 * &h1 - &h1 * &h2;
            // Omega = -i K with K = h/2 (H1 + H2) - i sqrt(3)/12 h^2 [H2, H1]
            let k = (&h1 + &h2) * num_complex::Complex64::new(0.5 * h, 0.0)
                + comm * num_complex::Complex64::new(0.0, -3f64.sqrt() / 12.0 * h * h);
            x = expm_hermitian(&k, 1.0) * x;
        }
    }
    Unitary::from_trusted(n, x)
}

/// Drops every coefficient of weight three or more.
pub fn project_hamiltonian(y: &CoeffVector, cfg: &MetricConfig) -> Result<CoeffVector> {
    if y.n() != cfg.n {
        return Err(domain(format!("vector is for n = {}, metric for n = {}", y.n(), cfg.n)));
    }
    let b = basis(y.n())?;
    let projected = y
        .as_slice()
        .iter()
        .zip(b.strings())
        .map(|(v, s)| if s.weight() <= 2 { *v } else { 0.0 })
        .collect();
    CoeffVector::new(y.n(), projected)
}

/// Mean generator over one slice of the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMean {
    pub mean: CoeffVector,
    /// True width of the slice; only the last slice can be narrower than delta.
    pub width: f64,
}

/// Slice `[0, T]` into intervals of width `delta` (the last one truncated)
/// and return the exact mean generator on each.
pub fn slice_mean(schedule: &Schedule, delta: f64) -> Result<Vec<SliceMean>> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(domain(format!("slice width {delta} must be positive")));
    }
    let total = schedule.total_time();
    if delta > total * (1.0 + 1e-12) {
        return Err(domain(format!("slice width {delta} exceeds total time {total}")));
    }
    let count = ((total / delta) - 1e-9).ceil().max(1.0) as usize;
    (0..count)
        .map(|j| {
            let start = j as f64 * delta;
            let end = if j + 1 == count { total } else { (j + 1) as f64 * delta };
            let width = end - start;
            let mean = schedule
                .integral(start, end)
                .into_iter()
                .map(|v| v / width)
                .collect();
            Ok(SliceMean {
                mean: CoeffVector::new(schedule.n(), mean)?,
                width,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TrotterOrdering {
    /// Canonical basis order in every substep.
    #[default]
    FirstOrder,
    /// Forward then reverse half-steps.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub pauli: PauliString,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    pub n: usize,
    pub delta: f64,
    /// Nominal gate duration for a full slice: `delta / ceil(1/delta)`,
    /// which equals `delta^2` whenever `1/delta` is an integer.
    pub substep: f64,
    pub gates: Vec<Gate>,
}

impl GateSequence {
    /// Ordered product of all gates; later gates act on the left.
    pub fn product(&self) -> Unitary {
        let dim = 1usize << self.n;
        let m = self
            .gates
            .iter()
            .fold(CMatrix::identity(dim, dim), |acc, g| g.pauli.rotate_left(g.angle, &acc));
        Unitary::from_trusted(self.n, m)
    }

    /// Unitary after each gate, starting with the identity.
    pub fn waypoints(&self) -> Vec<Unitary> {
        let dim = 1usize << self.n;
        let mut x = CMatrix::identity(dim, dim);
        let mut out = vec![Unitary::from_trusted(self.n, x.clone())];
        for g in &self.gates {
            x = g.pauli.rotate_left(g.angle, &x);
            out.push(Unitary::from_trusted(self.n, x.clone()));
        }
        out
    }
}

// Slack allowed on the |y_i| <= 1 coefficient premise.
const COEFF_BOUND_SLACK: f64 = 1e-12;

/// Expands each slice into `ceil(1/delta)` first-order product substeps and
/// emits one Pauli rotation per nonzero coefficient per substep.
pub fn synthesize_gates(
    means: &[SliceMean],
    delta: f64,
    cfg: &MetricConfig,
    ordering: TrotterOrdering,
) -> Result<GateSequence> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(domain(format!("slice width {delta} must be positive")));
    }
    let n = cfg.n;
    let b = basis(n)?;
    let per_slice = ((1.0 / delta) - 1e-9).ceil().max(1.0);
    let mut gates = Vec::new();
    for slice in means {
        if slice.mean.n() != n {
            return Err(domain(format!("slice mean is for n = {}, metric for n = {n}", slice.mean.n())));
        }
        let mut terms = Vec::new();
        for (i, v) in slice.mean.as_slice().iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            let s = b.get(i);
            if s.weight() > 2 {
                return Err(Error::Contract(format!(
                    "slice mean has weight-{} term {s}; project before synthesis",
                    s.weight()
                )));
            }
            if v.abs() > 1.0 + COEFF_BOUND_SLACK {
                return Err(Error::CoefficientBound {
                    pauli: s.to_string(),
                    value: v.abs(),
                });
            }
            terms.push((s, *v));
        }
        // a full slice gets exactly ceil(1/delta) substeps of length delta / ceil(1/delta)
        let count = ((slice.width * per_slice / delta) - 1e-9).ceil().max(1.0) as usize;
        let duration = slice.width / count as f64;
        for _ in 0..count {
            match ordering {
                TrotterOrdering::FirstOrder => {
                    gates.extend(terms.iter().map(|(s, v)| Gate {
                        pauli: *s,
                        angle: v * duration,
                    }));
                }
                TrotterOrdering::Symmetric => {
                    let half = 0.5 * duration;
                    gates.extend(terms.iter().map(|(s, v)| Gate {
                        pauli: *s,
                        angle: v * half,
                    }));
                    gates.extend(terms.iter().rev().map(|(s, v)| Gate {
                        pauli: *s,
                        angle: v * half,
                    }));
                }
            }
        }
    }
    Ok(GateSequence {
        n,
        delta,
        substep: delta / per_slice,
        gates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DeltaChoice {
    Fixed(f64),
    /// `delta = c / (n^2 d)` with `d` an upper estimate of the endpoint distance.
    Auto { c: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct SimulationOptions {
    pub delta: DeltaChoice,
    pub ordering: TrotterOrdering,
    /// Settings for the distance estimate behind automatic slicing.
    pub optimizer: OptimizerSettings,
}

impl SimulationOptions {
    pub fn fixed(delta: f64) -> Self {
        Self {
            delta: DeltaChoice::Fixed(delta),
            ordering: TrotterOrdering::FirstOrder,
            optimizer: OptimizerSettings::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub gate_sequence: GateSequence,
    pub approx: Unitary,
    pub gate_count: usize,
    pub exact_path_length: f64,
    /// Phase-aligned Frobenius distance to the exact endpoint, over `2^{n/2}`.
    pub approx_error: f64,
    pub rho_inf: f64,
    pub rho_sup: f64,
    /// Per-gate chart lengths `|y_s| * duration`.
    pub rhos: Vec<f64>,
    pub delta: f64,
    /// Upper distance estimate used for automatic slicing, if any.
    pub distance_estimate: Option<f64>,
}

/// Normalized, phase-aligned distance between two unitaries.
pub fn approximation_error(a: &Unitary, b: &Unitary) -> f64 {
    phase_aligned_distance(a.matrix(), b.matrix()) / ((1usize << a.n()) as f64).sqrt()
}

fn resolve_delta(schedule: &Schedule, cfg: &MetricConfig, options: &SimulationOptions) -> Result<(f64, Option<f64>)> {
    match options.delta {
        DeltaChoice::Fixed(d) => Ok((d, None)),
        DeltaChoice::Auto { c } => {
            if !(c.is_finite() && c > 0.0) {
                return Err(domain(format!("auto slicing constant {c} must be positive")));
            }
            let endpoint = schedule_endpoint(schedule);
            // the schedule is itself a path to its endpoint, so its length also bounds d
            let own = schedule.length(cfg)?;
            let d = match distance_upper(&endpoint, cfg, &options.optimizer) {
                Ok(est) => est.upper.min(own),
                Err(Error::Infeasible { .. }) => own,
                Err(e) => return Err(e),
            };
            let n2 = (cfg.n * cfg.n) as f64;
            let delta = if d > 0.0 { c / (n2 * d) } else { f64::INFINITY };
            Ok((delta.min(schedule.total_time()), Some(d)))
        }
    }
}

/// Projection, slicing and synthesis, with exact bookkeeping of the
/// synthesized path.
pub fn simulate(schedule: &Schedule, cfg: &MetricConfig, options: &SimulationOptions) -> Result<SimulationResult> {
    if schedule.n() != cfg.n {
        return Err(domain(format!(
            "schedule is for n = {}, metric for n = {}",
            schedule.n(),
            cfg.n
        )));
    }
    let (delta, distance_estimate) = resolve_delta(schedule, cfg, options)?;
    let projected_samples = schedule
        .samples()
        .iter()
        .map(|(t, y)| Ok((*t, project_hamiltonian(y, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    let projected = Schedule::new(
        schedule.n(),
        projected_samples,
        schedule.total_time(),
        schedule.interpolation(),
    )?;
    let means = slice_mean(&projected, delta)?;
    let sequence = synthesize_gates(&means, delta, cfg, options.ordering)?;

    let metric = PenaltyMetric::new(*cfg);
    let b = basis(cfg.n)?;
    let mut exact_path_length = 0.0;
    let mut rhos = Vec::with_capacity(sequence.gates.len());
    for g in &sequence.gates {
        let pos = b.position_of(&g.pauli).expect("non-identity gate");
        exact_path_length += metric.weights()[pos].sqrt() * g.angle.abs();
        rhos.push(g.angle.abs());
    }
    let (rho_inf, rho_sup) = if rhos.is_empty() {
        (0.0, 0.0)
    } else {
        rhos.iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(*r), hi.max(*r)))
    };
    let approx = sequence.product();
    let approx_error = approximation_error(&approx, &schedule_endpoint(schedule));
    Ok(SimulationResult {
        gate_count: sequence.gates.len(),
        gate_sequence: sequence,
        approx,
        exact_path_length,
        approx_error,
        rho_inf,
        rho_sup,
        rhos,
        delta,
        distance_estimate,
    })
}
