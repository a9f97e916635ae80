//! JSON file formats for matrices, schedules, paths and gate sequences.

use std::collections::BTreeMap;
use std::path::Path as FsPath;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chart::Unitary;
use crate::error::{Error, Result};
use crate::path::{DistanceEstimate, OptimizerStats, Path, Segment};
use crate::pauli::{check_qubits, CMatrix, CoeffVector};
use crate::simulation::{Gate, GateSequence, Interpolation, Schedule};

/// Nonzero coefficients keyed by Pauli word, e.g. `{"XZ": 0.5}`.
pub type CoeffMap = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(n: usize, m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        Self {
            n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        check_qubits(self.n)?;
        let dim = 1usize << self.n;
        for (name, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != dim {
                return Err(Error::Validation(format!(
                    "field \"{name}\" has {} rows, expected {dim} for n = {}",
                    part.len(),
                    self.n
                )));
            }
            if let Some((i, row)) = part.iter().enumerate().find(|(_, r)| r.len() != dim) {
                return Err(Error::Validation(format!(
                    "field \"{name}\" row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
        }
        Ok(CMatrix::from_fn(dim, dim, |r, c| {
            Complex64::new(self.re[r][c], self.im[r][c])
        }))
    }
}

pub fn coeff_map(y: &CoeffVector) -> CoeffMap {
    y.terms().map(|(s, v)| (s.to_string(), v)).collect()
}

pub fn coeffs_from_map(n: usize, map: &CoeffMap) -> Result<CoeffVector> {
    CoeffVector::from_terms(n, map.iter().map(|(w, v)| (w.as_str(), *v)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentEntry {
    pub tau: f64,
    pub y: CoeffMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleEntry {
    pub t: f64,
    pub y: CoeffMap,
}

/// Schedule or path file. Either `segments` (piecewise constant, durations
/// `tau`) or `samples` with `total_time` and an optional `interpolation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<SegmentEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<Interpolation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<SampleEntry>>,
}

impl ScheduleFile {
    pub fn from_path(path: &Path) -> Self {
        Self {
            n: path.n(),
            segments: Some(
                path.segments()
                    .iter()
                    .map(|s| SegmentEntry {
                        tau: s.tau,
                        y: coeff_map(&s.y),
                    })
                    .collect(),
            ),
            interpolation: None,
            total_time: None,
            samples: None,
        }
    }

    pub fn to_path(&self) -> Result<Path> {
        let Some(segments) = &self.segments else {
            return Err(Error::Validation("field \"segments\" is required for a path".into()));
        };
        if self.samples.is_some() || self.total_time.is_some() || self.interpolation.is_some() {
            return Err(Error::Validation(
                "a path takes only \"n\" and \"segments\"".into(),
            ));
        }
        let segs = segments
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let y = coeffs_from_map(self.n, &s.y)
                    .map_err(|e| Error::Validation(format!("segments[{i}].y: {e}")))?;
                Ok(Segment { y, tau: s.tau })
            })
            .collect::<Result<Vec<_>>>()?;
        Path::new(self.n, segs)
    }

    pub fn to_schedule(&self) -> Result<Schedule> {
        match (&self.segments, &self.samples) {
            (Some(_), None) => {
                if self.interpolation.is_some_and(|i| i != Interpolation::Constant) {
                    return Err(Error::Validation(
                        "field \"interpolation\" must be \"constant\" with \"segments\"".into(),
                    ));
                }
                if self.total_time.is_some() {
                    return Err(Error::Validation(
                        "field \"total_time\" is implied by \"segments\"".into(),
                    ));
                }
                let path = Self {
                    interpolation: None,
                    ..self.clone()
                }
                .to_path()?;
                Schedule::from_path(&path)
            }
            (None, Some(samples)) => {
                let total_time = self.total_time.ok_or_else(|| {
                    Error::Validation("field \"total_time\" is required with \"samples\"".into())
                })?;
                let samples = samples
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let y = coeffs_from_map(self.n, &s.y)
                            .map_err(|e| Error::Validation(format!("samples[{i}].y: {e}")))?;
                        Ok((s.t, y))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Schedule::new(self.n, samples, total_time, self.interpolation.unwrap_or_default())
            }
            _ => Err(Error::Validation(
                "exactly one of \"segments\" or \"samples\" must be given".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateFile {
    pub n: usize,
    pub delta: f64,
    pub gates: Vec<Gate>,
}

impl GateFile {
    pub fn from_sequence(seq: &GateSequence) -> Self {
        Self {
            n: seq.n,
            delta: seq.delta,
            gates: seq.gates.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceEstimateRecord {
    pub upper: f64,
    pub lower: f64,
    pub witness_path: ScheduleFile,
    pub optimizer_stats: OptimizerStats,
}

impl From<&DistanceEstimate> for DistanceEstimateRecord {
    fn from(d: &DistanceEstimate) -> Self {
        Self {
            upper: d.upper,
            lower: d.lower,
            witness_path: ScheduleFile::from_path(&d.witness_path),
            optimizer_stats: d.optimizer_stats,
        }
    }
}

/// Reads and deserializes a JSON file; errors carry the path.
pub fn read_json<T: DeserializeOwned>(path: &FsPath) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Attaches the file name to validation failures of its contents.
pub fn in_file<T>(path: &FsPath, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io { .. } | Error::Parse { .. } => e,
        other => Error::Parse {
            path: path.display().to_string(),
            message: other.to_string(),
        },
    })
}

pub fn read_matrix(path: &FsPath) -> Result<(usize, CMatrix)> {
    let file: MatrixFile = read_json(path)?;
    let m = in_file(path, file.to_matrix())?;
    Ok((file.n, m))
}

pub fn read_unitary(path: &FsPath) -> Result<Unitary> {
    let (n, m) = read_matrix(path)?;
    in_file(path, Unitary::new(n, m))
}

pub fn read_schedule(path: &FsPath) -> Result<Schedule> {
    let file: ScheduleFile = read_json(path)?;
    in_file(path, file.to_schedule())
}

pub fn read_path(path: &FsPath) -> Result<Path> {
    let file: ScheduleFile = read_json(path)?;
    in_file(path, file.to_path())
}

pub fn read_gates(path: &FsPath) -> Result<GateFile> {
    let file: GateFile = read_json(path)?;
    in_file(path, check_qubits(file.n))?;
    if let Some((i, g)) = file.gates.iter().enumerate().find(|(_, g)| g.pauli.n() != file.n) {
        return Err(Error::Parse {
            path: path.display().to_string(),
            message: format!("gates[{i}].pauli \"{}\" does not have {} letters", g.pauli, file.n),
        });
    }
    Ok(file)
}
