//! Command-line front end for `circgeo`.
//!
//! Every subcommand writes one report, `{version, config, results,
//! bound_reports}`, as JSON or as a CSV table of its bound reports. Exit
//! status: 0 when every bound holds, 1 when some bound fails, 2 on input
//! or validation errors, 3 when the distance optimizer finds no feasible
//! path.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    check_decomposition, check_segment_distortion, check_sim_sandwich, corollary2_scaling, estimate_distortion_with,
    BoundReport, SamplingMeasure,
};
use crate::chart::Unitary;
use crate::error::{Error, Result};
use crate::io::{self, coeff_map, DistanceEstimateRecord, GateFile};
use crate::linalg::max_abs_diff;
use crate::metric::{distortion_constants, MetricConfig};
use crate::path::{distance_lower, distance_upper, OptimizerSettings};
use crate::pauli::{decompose, reconstruct, CoeffVector};
use crate::simulation::{
    approximation_error, simulate, DeltaChoice, Gate, GateSequence, SimulationOptions, TrotterOrdering,
};

/// Default output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "CIRCGEO_OUT_DIR";
pub const REPORT_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_BOUND_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "circgeo", version, about = "Penalty-metric geometry and gate-count bounds on SU(2^n)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pauli coefficients of a traceless Hermitian matrix.
    Decompose {
        #[arg(long)]
        hamiltonian: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Lower and upper bounds on the metric distance from the identity.
    Distance {
        #[arg(long)]
        unitary: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Standard simulation of a schedule.
    Simulate {
        #[arg(long)]
        schedule: PathBuf,
        /// Slice width, or `auto` for c / (n^2 d).
        #[arg(long, default_value = "auto")]
        delta: DeltaArg,
        /// Constant c used by `--delta auto`.
        #[arg(long, default_value_t = 1.0)]
        auto_c: f64,
        #[arg(long, value_enum, default_value_t = OrderingArg::FirstOrder)]
        ordering: OrderingArg,
        /// Also write the gate sequence to this file.
        #[arg(long)]
        gates_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Distance bounds for a unitary, optionally checked against a gate sequence.
    Verify {
        #[arg(long)]
        unitary: PathBuf,
        #[arg(long)]
        gates: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Monte Carlo estimate of the distortion constants.
    Distortion {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = MeasureArg::SparseSupport)]
        measure: MeasureArg,
        #[command(flatten)]
        common: Common,
    },
    /// Gate-count growth of the standard simulation as the slice width shrinks.
    Scaling {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
        deltas: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Qubit count; taken from the input file when omitted.
    #[arg(long)]
    pub n: Option<usize>,
    /// Penalty factor; defaults to 2^n.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = 8)]
    pub segments: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    /// Endpoint tolerance, phase-aligned Frobenius norm.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 4000)]
    pub max_evals: usize,
}

impl OptimizerArgs {
    fn settings(&self, seed: u64) -> Result<OptimizerSettings> {
        if self.segments == 0 || self.restarts == 0 || self.max_evals == 0 {
            return Err(Error::Validation(
                "--segments, --restarts and --max-evals must be at least 1".into(),
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Validation(format!("--tolerance {} must be positive", self.tolerance)));
        }
        Ok(OptimizerSettings {
            segments: self.segments,
            restarts: self.restarts,
            tolerance: self.tolerance,
            max_evals: self.max_evals,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingArg {
    FirstOrder,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureArg {
    SparseSupport,
    Isotropic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaArg {
    Auto,
    Fixed(f64),
}

impl FromStr for DeltaArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        let v: f64 = s.parse().map_err(|_| format!("expected a number or \"auto\", got \"{s}\""))?;
        if v.is_finite() && v > 0.0 {
            Ok(Self::Fixed(v))
        } else {
            Err(format!("slice width must be positive, got {v}"))
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub config: Value,
    pub results: Value,
    pub bound_reports: Vec<BoundReport>,
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("circgeo: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible { .. } => EXIT_INFEASIBLE,
        _ => EXIT_INVALID,
    }
}

/// Runs one command, writes its report and returns the exit status.
pub fn run(command: &Command) -> Result<i32> {
    let (name, common, report) = build_report(command)?;
    let bytes = render(&report, common.format)?;
    match output_path(name, common)? {
        Some(path) => write_atomic(&path, &bytes)?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })?,
    }
    let failed: Vec<&BoundReport> = report.bound_reports.iter().filter(|r| !r.passed).collect();
    for r in &failed {
        eprintln!(
            "circgeo: bound failed: {} (lower {}, observed {}, upper {})",
            r.context, r.lower, r.observed, r.upper
        );
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_BOUND_FAILURE })
}

fn output_path(name: &str, common: &Common) -> Result<Option<PathBuf>> {
    if let Some(p) = &common.out {
        return Ok(Some(p.clone()));
    }
    let ext = match common.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    Ok(std::env::var_os(OUT_DIR_ENV).map(|dir| PathBuf::from(dir).join(format!("{name}.{ext}"))))
}

pub fn render(report: &Report, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report)
                .map_err(|e| Error::Evaluation(format!("cannot serialize report: {e}")))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Evaluation(format!("cannot write csv: {e}"));
            w.write_record(["context", "lower", "observed", "upper", "passed"])
                .map_err(csv_err)?;
            for r in &report.bound_reports {
                w.write_record([
                    r.context.clone(),
                    r.lower.to_string(),
                    r.observed.to_string(),
                    r.upper.to_string(),
                    r.passed.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.into_inner()
                .map_err(|e| Error::Evaluation(format!("cannot write csv: {e}")))
        }
    }
}

/// Writes to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &FsPath, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn resolve_n(flag: Option<usize>, from_file: usize, file: &FsPath) -> Result<usize> {
    match flag {
        Some(n) if n != from_file => Err(Error::Parse {
            path: file.display().to_string(),
            message: format!("field \"n\" is {from_file} but --n {n} was given"),
        }),
        _ => Ok(from_file),
    }
}

fn metric_config(n: usize, p: Option<f64>) -> Result<MetricConfig> {
    match p {
        Some(p) => MetricConfig::new(n, p),
        None => MetricConfig::with_default_penalty(n),
    }
}

fn base_config(command: &str, cfg: &MetricConfig, common: &Common) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("metric".into(), json!(cfg));
    m.insert("seed".into(), json!(common.seed));
    m.insert("format".into(), json!(common.format));
    m
}

fn path_str(p: &FsPath) -> Value {
    json!(p.display().to_string())
}

fn build_report<'a>(command: &'a Command) -> Result<(&'static str, &'a Common, Report)> {
    let (name, common, config, results, bound_reports) = match command {
        Command::Decompose { hamiltonian, common } => {
            let (file_n, h) = io::read_matrix(hamiltonian)?;
            let n = resolve_n(common.n, file_n, hamiltonian)?;
            let cfg = metric_config(n, common.p)?;
            let y = io::in_file(hamiltonian, decompose(&h, n))?;
            let mut config = base_config("decompose", &cfg, common);
            config.insert("hamiltonian".into(), path_str(hamiltonian));
            let results = decompose_results(&y, &h, &cfg)?;
            ("decompose", common, config, results, Vec::new())
        }
        Command::Distance { unitary, common, opt } | Command::Verify {
            unitary,
            common,
            opt,
            gates: None,
        } => {
            let name = if matches!(command, Command::Distance { .. }) { "distance" } else { "verify" };
            let u = io::read_unitary(unitary)?;
            let n = resolve_n(common.n, u.n(), unitary)?;
            let cfg = metric_config(n, common.p)?;
            let settings = opt.settings(common.seed)?;
            let mut config = base_config(name, &cfg, common);
            config.insert("unitary".into(), path_str(unitary));
            config.insert("optimizer".into(), json!(settings));
            let (results, reports) = distance_results(&u, &cfg, &settings)?;
            (name, common, config, results, reports)
        }
        Command::Verify {
            unitary,
            gates: Some(gates),
            common,
            opt,
        } => {
            let u = io::read_unitary(unitary)?;
            let n = resolve_n(common.n, u.n(), unitary)?;
            let cfg = metric_config(n, common.p)?;
            let settings = opt.settings(common.seed)?;
            let gate_file = io::read_gates(gates)?;
            resolve_n(Some(n), gate_file.n, gates)?;
            let mut config = base_config("verify", &cfg, common);
            config.insert("unitary".into(), path_str(unitary));
            config.insert("gates".into(), path_str(gates));
            config.insert("optimizer".into(), json!(settings));
            let (mut results, mut reports) = distance_results(&u, &cfg, &settings)?;
            let (gate_results, gate_reports) = gate_results(&u, &gate_file, &cfg, &results)?;
            results["gates"] = gate_results;
            reports.extend(gate_reports);
            ("verify", common, config, results, reports)
        }
        Command::Simulate {
            schedule,
            delta,
            auto_c,
            ordering,
            gates_out,
            common,
            opt,
        } => {
            let sched = io::read_schedule(schedule)?;
            let n = resolve_n(common.n, sched.n(), schedule)?;
            let cfg = metric_config(n, common.p)?;
            let settings = opt.settings(common.seed)?;
            let options = SimulationOptions {
                delta: match delta {
                    DeltaArg::Auto => DeltaChoice::Auto { c: *auto_c },
                    DeltaArg::Fixed(d) => DeltaChoice::Fixed(*d),
                },
                ordering: match ordering {
                    OrderingArg::FirstOrder => TrotterOrdering::FirstOrder,
                    OrderingArg::Symmetric => TrotterOrdering::Symmetric,
                },
                optimizer: settings,
            };
            let mut config = base_config("simulate", &cfg, common);
            config.insert("schedule".into(), path_str(schedule));
            config.insert("delta".into(), json!(options.delta));
            config.insert("ordering".into(), json!(ordering));
            if matches!(delta, DeltaArg::Auto) {
                config.insert("optimizer".into(), json!(settings));
            }
            let r = io::in_file(schedule, simulate(&sched, &cfg, &options))?;
            if let Some(path) = gates_out {
                let mut bytes = serde_json::to_vec(&GateFile::from_sequence(&r.gate_sequence))
                    .map_err(|e| Error::Evaluation(format!("cannot serialize gates: {e}")))?;
                bytes.push(b'\n');
                write_atomic(path, &bytes)?;
            }
            let rho_sum: f64 = r.rhos.iter().sum();
            let mut reports = vec![
                check_sim_sandwich(&r, &cfg),
                BoundReport::new("length_equals_rho_sum", rho_sum, r.exact_path_length, rho_sum),
            ];
            // one-sided: broken-path length dominates the chart bound of its endpoint
            if let Ok(lower) = distance_lower(&r.approx, &cfg) {
                reports.push(BoundReport::new(
                    "length_dominates_lower_bound",
                    lower,
                    r.exact_path_length,
                    r.exact_path_length,
                ));
            }
            let results = json!({
                "delta": r.delta,
                "substep": r.gate_sequence.substep,
                "gate_count": r.gate_count,
                "exact_path_length": r.exact_path_length,
                "approx_error": r.approx_error,
                "rho_inf": r.rho_inf,
                "rho_sup": r.rho_sup,
                "distance_estimate": r.distance_estimate,
            });
            ("simulate", common, config, results, reports)
        }
        Command::Distortion { samples, measure, common } => {
            let n = common
                .n
                .ok_or_else(|| Error::Validation("--n is required for distortion".into()))?;
            let cfg = metric_config(n, common.p)?;
            let sampling = match measure {
                MeasureArg::SparseSupport => SamplingMeasure::RandomSupport,
                MeasureArg::Isotropic => SamplingMeasure::Isotropic,
            };
            let metric = cfg.penalty_metric();
            let est = estimate_distortion_with(&metric, n, *samples, common.seed, sampling)?;
            let (m_small, m_big) = distortion_constants(&cfg);
            let mut config = base_config("distortion", &cfg, common);
            config.insert("samples".into(), json!(samples));
            config.insert("measure".into(), json!(measure));
            let results = json!({
                "m_hat": est.min,
                "M_hat": est.max,
                "m": m_small,
                "M": m_big,
                "samples": est.samples,
            });
            let reports = vec![
                BoundReport::new("distortion_min", m_small, est.min, m_big),
                BoundReport::new("distortion_max", m_small, est.max, m_big),
                BoundReport::new("distortion_order", est.min, est.min, est.max),
            ];
            ("distortion", common, config, results, reports)
        }
        Command::Scaling {
            schedule,
            deltas,
            common,
        } => {
            let sched = io::read_schedule(schedule)?;
            let n = resolve_n(common.n, sched.n(), schedule)?;
            let cfg = metric_config(n, common.p)?;
            let report = io::in_file(schedule, corollary2_scaling(&sched, &cfg, deltas))?;
            let mut config = base_config("scaling", &cfg, common);
            config.insert("schedule".into(), path_str(schedule));
            config.insert("deltas".into(), json!(deltas));
            let results = json!({
                "slope": report.slope,
                "intercept": report.intercept,
                "residual": report.residual,
                "points": report.points,
            });
            ("scaling", common, config, results, report.sandwich)
        }
    };
    Ok((
        name,
        common,
        Report {
            version: REPORT_VERSION,
            config: Value::Object(config),
            results,
            bound_reports,
        },
    ))
}

fn decompose_results(y: &CoeffVector, h: &crate::pauli::CMatrix, cfg: &MetricConfig) -> Result<Value> {
    let metric = cfg.penalty_metric();
    let (mut low, mut high) = (0.0f64, 0.0f64);
    for (s, v) in y.terms() {
        if s.weight() <= 2 {
            low += v * v;
        } else {
            high += v * v;
        }
    }
    Ok(json!({
        "coefficients": coeff_map(y),
        "k": cfg.k,
        "euclidean_norm": y.norm(),
        "metric_norm": metric.eval(y)?,
        "low_weight_norm": low.sqrt(),
        "high_weight_norm": high.sqrt(),
        "reconstruction_error": max_abs_diff(&reconstruct(y), h),
    }))
}

fn distance_results(u: &Unitary, cfg: &MetricConfig, settings: &OptimizerSettings) -> Result<(Value, Vec<BoundReport>)> {
    let est = distance_upper(u, cfg, settings)?;
    let identity = Unitary::identity(cfg.n)?;
    let mut reports = vec![BoundReport::new("distance_lower_le_upper", est.lower, est.upper, est.upper)];
    match check_segment_distortion(&identity, u, cfg) {
        Ok(r) => reports.push(r),
        Err(Error::BranchCut { .. }) => {}
        Err(e) => return Err(e),
    }
    let results = json!({ "distance": DistanceEstimateRecord::from(&est) });
    Ok((results, reports))
}

fn gate_results(u: &Unitary, file: &GateFile, cfg: &MetricConfig, distance: &Value) -> Result<(Value, Vec<BoundReport>)> {
    let seq = GateSequence {
        n: file.n,
        delta: file.delta,
        substep: file.delta,
        gates: file.gates.clone(),
    };
    let waypoints = seq.waypoints();
    let product = waypoints.last().cloned().unwrap_or(Unitary::identity(file.n)?);
    let approx_error = approximation_error(&product, u);
    let gate_count = file.gates.len();
    if gate_count == 0 {
        return Ok((json!({ "gate_count": 0, "approx_error": approx_error }), Vec::new()));
    }
    let lower = distance["distance"]["lower"].as_f64().unwrap_or(0.0);
    let upper = distance["distance"]["upper"].as_f64().unwrap_or(0.0);
    // the bound data needs positive lengths; zero-angle gates carry none
    let moving: Vec<Unitary> = {
        let mut v = vec![waypoints[0].clone()];
        for (w, g) in waypoints[1..].iter().zip(&file.gates) {
            if g.angle != 0.0 {
                v.push(w.clone());
            }
        }
        v
    };
    let mut reports = Vec::new();
    let mut results = json!({
        "gate_count": gate_count,
        "approx_error": approx_error,
        "gate_path_length": file.gates.iter().map(|g: &Gate| g.angle.abs()).sum::<f64>(),
    });
    if moving.len() >= 2 && upper > 0.0 {
        let check = check_decomposition(&moving, upper, cfg)?;
        let (_, m_big) = distortion_constants(cfg);
        let m = check.steps as f64;
        results["rho_inf"] = json!(check.rho_inf);
        results["rho_sup"] = json!(check.rho_sup);
        results["beta_inf"] = json!(check.beta_inf);
        results["beta_sup"] = json!(check.beta_sup);
        results["theorem1_bounds_at_upper"] = json!(check.theorem1);
        results["theorem2_bounds_at_upper"] = json!(check.theorem2);
        // holds for any decomposition reaching U: the broken chart path bounds d from above
        if approx_error <= 1e-9 && lower > 0.0 {
            reports.push(BoundReport::new("gate_count_lower", lower / (check.rho_sup * m_big), m, m));
        }
        reports.extend(check.reports.into_iter().filter(|r| r.context == "decomposition_length"));
    }
    Ok((results, reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_arg_parsing() {
        assert_eq!("auto".parse::<DeltaArg>().unwrap(), DeltaArg::Auto);
        assert_eq!("0.1".parse::<DeltaArg>().unwrap(), DeltaArg::Fixed(0.1));
        assert!("-1".parse::<DeltaArg>().is_err());
        assert!("fast".parse::<DeltaArg>().is_err());
    }

    #[test]
    fn bad_flags_exit_two() {
        assert_eq!(main_with(["circgeo", "simulate"]), EXIT_INVALID);
        assert_eq!(main_with(["circgeo", "nonsense"]), EXIT_INVALID);
        assert_eq!(main_with(["circgeo", "distortion", "--n", "2", "--p", "0.5"]), EXIT_INVALID);
        assert_eq!(main_with(["circgeo", "distortion"]), EXIT_INVALID);
    }

    #[test]
    fn csv_rendering() {
        let report = Report {
            version: REPORT_VERSION,
            config: json!({}),
            results: json!({}),
            bound_reports: vec![BoundReport::new("a", 1.0, 1.5, 2.0)],
        };
        let text = String::from_utf8(render(&report, Format::Csv).unwrap()).unwrap();
        assert_eq!(text, "context,lower,observed,upper,passed\na,1,1.5,2,true\n");
    }
}
