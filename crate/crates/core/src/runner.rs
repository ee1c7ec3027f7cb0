//! Experiment orchestration: the gap table of the six paradigmatic gates,
//! the scaling study of the generalized CNOT families, the isometry
//! classification, and user-supplied experiment files.
//!
//! Every cell (gate × shape × metric) is independent. A failing cell is
//! recorded with its error and the run continues.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gatelib::{self, GateKind, GateSpec, InitialStates, SystemShape};
use crate::metrics::GapReport;
use crate::optimizer::{self, ConvergenceTrace, Metric, OptimizerConfig};
use crate::seqmpo::SequentialMPO;

pub const SPEC_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SEQGAP_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    /// Output directory; falls back to `SEQGAP_OUT_DIR`, then `out`.
    pub dir: Option<PathBuf>,
    pub traces: bool,
    pub mpos: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: None,
            traces: true,
            mpos: true,
        }
    }
}

/// Resolved output directory: explicit value, then the environment, then `out`.
pub fn resolve_out_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::Frobenius]
}

/// An experiment file: every gate is run on every shape under every metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub version: u32,
    pub name: String,
    pub gates: Vec<GateKind>,
    pub shapes: Vec<SystemShape>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub outputs: Outputs,
    /// Fixed-input states for isometry shapes; `|0⟩` everywhere if absent.
    #[serde(default)]
    pub isometry_states: Option<InitialStates>,
}

impl ExperimentSpec {
    /// Parses and validates; `source_name` labels diagnostics.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SPEC_VERSION {
            return Err(Error::Config(format!(
                "unsupported spec version {} (expected {SPEC_VERSION})",
                self.version
            )));
        }
        if self.gates.is_empty() || self.shapes.is_empty() || self.metrics.is_empty() {
            return Err(Error::Config(
                "spec needs at least one gate, one shape and one metric".into(),
            ));
        }
        self.optimizer.validate()?;
        for (gi, gate) in self.gates.iter().enumerate() {
            for (si, shape) in self.shapes.iter().enumerate() {
                GateSpec::new(gate.clone(), *shape).map_err(|e| {
                    Error::Config(format!("gates[{gi}] on shapes[{si}] ({shape}): {e}"))
                })?;
                if let (Some(states), true) = (&self.isometry_states, shape.is_isometry()) {
                    states.validate(shape).map_err(|e| {
                        Error::Config(format!("isometry_states for shapes[{si}]: {e}"))
                    })?;
                }
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for gate in &self.gates {
            for shape in &self.shapes {
                for &metric in &self.metrics {
                    cells.push(Cell {
                        gate: gate.clone(),
                        shape: *shape,
                        metric,
                        states: self.isometry_states.clone(),
                        expect: Vec::new(),
                    });
                }
            }
        }
        cells
    }
}

/// Quantity of a cell that an expectation is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    GapFrobenius,
    GapFrobeniusRenorm,
    /// `𝒢̃ − 𝒢/2`.
    RenormMinusHalf,
    GapPnormMean,
}

impl Quantity {
    fn of(self, r: &GapReport) -> Option<f64> {
        match self {
            Quantity::GapFrobenius => Some(r.gap_frobenius),
            Quantity::GapFrobeniusRenorm => Some(r.gap_frobenius_renorm),
            Quantity::RenormMinusHalf => Some(r.gap_frobenius_renorm - r.gap_frobenius / 2.0),
            Quantity::GapPnormMean => r.pnorm_restarts.map(|s| s.mean),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    Near { value: f64, tol: f64 },
    Below { bound: f64 },
    Above { bound: f64 },
}

impl Expectation {
    pub fn holds(&self, x: f64) -> bool {
        match *self {
            Expectation::Near { value, tol } => (x - value).abs() <= tol,
            Expectation::Below { bound } => x < bound,
            Expectation::Above { bound } => x > bound,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Expectation::Near { value, tol } => format!("{value} ± {tol:e}"),
            Expectation::Below { bound } => format!("< {bound:e}"),
            Expectation::Above { bound } => format!("> {bound:e}"),
        }
    }
}

/// Outcome of one expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub observed: Option<f64>,
    pub expected: String,
    pub pass: bool,
}

impl Check {
    fn value(label: String, observed: Option<f64>, expect: Expectation) -> Self {
        Check {
            pass: observed.is_some_and(|x| expect.holds(x)),
            label,
            observed,
            expected: expect.describe(),
        }
    }

    fn predicate(label: impl Into<String>, pass: bool, expected: impl Into<String>) -> Self {
        Check {
            label: label.into(),
            observed: None,
            expected: expected.into(),
            pass,
        }
    }
}

#[derive(Debug, Clone)]
struct Cell {
    gate: GateKind,
    shape: SystemShape,
    metric: Metric,
    states: Option<InitialStates>,
    expect: Vec<(Quantity, Expectation)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub gate: String,
    pub shape: SystemShape,
    pub metric: Metric,
    pub report: Option<GapReport>,
    pub error: Option<String>,
    #[serde(default)]
    pub checks: Vec<Check>,
}

impl CellResult {
    pub fn failed(&self) -> bool {
        self.report.is_none()
    }

    fn file_stem(&self, index: usize) -> String {
        let shape = if self.shape.is_isometry() {
            format!(
                "M{}N{}D{}",
                self.shape.input_qubits(),
                self.shape.n_qubits(),
                self.shape.ancilla_dim()
            )
        } else {
            format!("N{}D{}", self.shape.n_qubits(), self.shape.ancilla_dim())
        };
        let gate: String = self
            .gate
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let metric = match self.metric {
            Metric::Frobenius => "frob",
            Metric::Pnorm2 => "pnorm",
        };
        format!("{index:03}_{}_{shape}_{metric}", gate.trim_end_matches('_'))
    }
}

/// Structured record of one run, in spec order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub cells: Vec<CellResult>,
    /// Checks spanning several cells (trends, equalities).
    #[serde(default)]
    pub checks: Vec<Check>,
}

/// A report with the optimized MPOs and traces of its successful cells.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<Option<(SequentialMPO, ConvergenceTrace)>>,
}

impl RunReport {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.failed()).count()
    }

    pub fn all_checks(&self) -> impl Iterator<Item = &Check> {
        self.cells
            .iter()
            .flat_map(|c| c.checks.iter())
            .chain(self.checks.iter())
    }

    /// No failed cell and every check passes.
    pub fn passed(&self) -> bool {
        self.failed_cells() == 0 && self.all_checks().all(|c| c.pass)
    }

    pub fn find(&self, gate: &str, shape: &SystemShape, metric: Metric) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.gate == gate && c.shape == *shape && c.metric == metric)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One gap row per successful cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(GapReport::CSV_HEADER);
        out.push('\n');
        for r in self.cells.iter().filter_map(|c| c.report.as_ref()) {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    /// Human-readable table of cells and checks.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.name);
        let _ = writeln!(
            out,
            "{:<22} {:<12} {:<9} {:>10} {:>10} {:>10} {:>10}",
            "gate", "shape", "metric", "gap_F", "gap_F~", "gap_p", "gap_p mean"
        );
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
        for c in &self.cells {
            let metric = match c.metric {
                Metric::Frobenius => "FROB",
                Metric::Pnorm2 => "PNORM2",
            };
            match &c.report {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        "{:<22} {:<12} {:<9} {:>10} {:>10} {:>10} {:>10}",
                        c.gate,
                        c.shape.to_string(),
                        metric,
                        fmt(Some(r.gap_frobenius)),
                        fmt(Some(r.gap_frobenius_renorm)),
                        fmt(r.gap_pnorm),
                        fmt(r.pnorm_restarts.map(|s| s.mean)),
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{:<22} {:<12} {:<9} FAILED: {}",
                        c.gate,
                        c.shape.to_string(),
                        metric,
                        c.error.as_deref().unwrap_or("unknown error")
                    );
                }
            }
        }
        let checks: Vec<&Check> = self.all_checks().collect();
        if !checks.is_empty() {
            let _ = writeln!(out);
            for c in checks {
                let observed = c
                    .observed
                    .map(|x| format!("{x:.6e}"))
                    .unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "[{}] {}: observed {observed}, expected {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.label,
                    c.expected
                );
            }
        }
        out
    }
}

impl RunOutput {
    /// Writes `<name>.json`, `<name>.csv` and, if requested, per-cell trace
    /// CSVs and MPO snapshots under `dir`.
    pub fn write(&self, dir: &Path, outputs: &Outputs) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let name = &self.report.name;
        std::fs::write(dir.join(format!("{name}.json")), self.report.to_json()?)?;
        std::fs::write(dir.join(format!("{name}.csv")), self.report.to_csv())?;
        for (i, (cell, art)) in self.report.cells.iter().zip(&self.artifacts).enumerate() {
            let Some((mpo, trace)) = art else { continue };
            let stem = cell.file_stem(i);
            if outputs.traces {
                let d = dir.join("traces");
                std::fs::create_dir_all(&d)?;
                std::fs::write(d.join(format!("{stem}.csv")), trace.to_csv())?;
            }
            if outputs.mpos {
                let d = dir.join("mpos");
                std::fs::create_dir_all(&d)?;
                mpo.save(&d.join(format!("{stem}.json")))?;
            }
        }
        Ok(())
    }
}

fn run_cell(
    cell: &Cell,
    cfg: &OptimizerConfig,
) -> Result<(GapReport, SequentialMPO, ConvergenceTrace)> {
    let spec = GateSpec::new(cell.gate.clone(), cell.shape)?;
    let cfg = OptimizerConfig {
        metric: cell.metric,
        ..cfg.clone()
    };
    let name = cell.gate.name();
    let digest = cfg.digest();
    let shape = &cell.shape;
    let (mut report, out) = if shape.is_isometry() {
        let states = cell
            .states
            .clone()
            .unwrap_or_else(|| InitialStates::default_for(shape));
        let target = gatelib::build_isometry(&spec, &states)?;
        let out = optimizer::optimize_isometry(&target, shape, &states, &cfg)?;
        let seq = out.mpo.contract_isometry(&states)?;
        (
            GapReport::frobenius(&name, shape, &target, &seq, &digest)?,
            out,
        )
    } else {
        let target = gatelib::embed_with_ancilla(&gatelib::build_gate(&spec)?, shape.ancilla_dim());
        let out = optimizer::optimize(&target, shape, &cfg)?;
        let seq = out.mpo.contract_to_dense();
        let report = GapReport::frobenius(&name, shape, &target, &seq, &digest)?;
        match cell.metric {
            Metric::Frobenius => (report, out),
            Metric::Pnorm2 => (report.with_pnorm(&target, &seq)?, out),
        }
    };
    match cell.metric {
        Metric::Frobenius => report.frobenius_restarts = out.stats(),
        Metric::Pnorm2 => {
            report.metric = "PNORM2".into();
            report.pnorm_restarts = out.stats();
        }
    }
    report.check_invariants()?;
    Ok((report, out.mpo, out.trace))
}

fn run_cells(name: &str, cells: Vec<Cell>, cfg: &OptimizerConfig) -> RunOutput {
    let results: Vec<_> = cells.par_iter().map(|c| run_cell(c, cfg)).collect();
    let mut report = RunReport {
        name: name.to_string(),
        cells: Vec::with_capacity(cells.len()),
        checks: Vec::new(),
    };
    let mut artifacts = Vec::with_capacity(cells.len());
    for (cell, res) in cells.iter().zip(results) {
        let gate = cell.gate.name();
        let (rep, error, art) = match res {
            Ok((r, mpo, trace)) => (Some(r), None, Some((mpo, trace))),
            Err(e) => (None, Some(e.to_string()), None),
        };
        let checks = cell
            .expect
            .iter()
            .map(|(q, e)| {
                let label = format!("{gate} {} {:?}", cell.shape, q);
                Check::value(label, rep.as_ref().and_then(|r| q.of(r)), *e)
            })
            .collect();
        report.cells.push(CellResult {
            gate,
            shape: cell.shape,
            metric: cell.metric,
            report: rep,
            error,
            checks,
        });
        artifacts.push(art);
    }
    RunOutput { report, artifacts }
}

/// Reference values of the gap table at `D = 4`: gate, qubits,
/// Frobenius gap, mean spectral gap, renormalized Frobenius gap.
pub fn table1_reference() -> Vec<(GateKind, usize, f64, f64, f64)> {
    vec![
        (GateKind::Cnot, 2, 0.2929, 0.1480, 0.1464),
        (GateKind::Cz, 2, 0.2929, 0.1480, 0.1464),
        (GateKind::cphase(), 2, 0.0761, 0.045, 0.0381),
        (GateKind::Swap, 2, 0.50, 0.5001, 0.25),
        (GateKind::Toffoli, 3, 0.25, 0.4512, 0.125),
        (GateKind::Fredkin, 3, 0.25, 0.5125, 0.125),
    ]
}

pub const TABLE1_FROBENIUS_TOL: f64 = 1e-3;
pub const TABLE1_PNORM_TOL: f64 = 0.02;
pub const RENORM_IDENTITY_TOL: f64 = 1e-12;

/// The six paradigmatic gates at ancilla dimension `d` under the given
/// metrics, each cell checked against the reference table.
pub fn table1_at(d: usize, metrics: &[Metric], cfg: &OptimizerConfig) -> Result<RunOutput> {
    let mut cells = Vec::new();
    for (gate, n, f, p, r) in table1_reference() {
        let shape = SystemShape::unitary(n, d)?;
        for &metric in metrics {
            let expect = match metric {
                Metric::Frobenius => vec![
                    (
                        Quantity::GapFrobenius,
                        Expectation::Near {
                            value: f,
                            tol: TABLE1_FROBENIUS_TOL,
                        },
                    ),
                    (
                        Quantity::GapFrobeniusRenorm,
                        Expectation::Near {
                            value: r,
                            tol: TABLE1_FROBENIUS_TOL,
                        },
                    ),
                    (
                        Quantity::RenormMinusHalf,
                        Expectation::Near {
                            value: 0.0,
                            tol: RENORM_IDENTITY_TOL,
                        },
                    ),
                ],
                Metric::Pnorm2 => vec![(
                    Quantity::GapPnormMean,
                    Expectation::Near {
                        value: p,
                        tol: TABLE1_PNORM_TOL,
                    },
                )],
            };
            cells.push(Cell {
                gate: gate.clone(),
                shape,
                metric,
                states: None,
                expect,
            });
        }
    }
    let mut out = run_cells(&format!("table1_D{d}"), cells, cfg);
    // locally equivalent gates must agree
    for metric in metrics {
        let gap = |g: &str| {
            out.report
                .find(g, &SystemShape::unitary(2, d).ok()?, *metric)?
                .report
                .as_ref()
                .map(|r| r.gap_pnorm.unwrap_or(r.gap_frobenius))
        };
        if let (Some(a), Some(b)) = (gap("CNOT"), gap("CZ")) {
            let tol = if *metric == Metric::Frobenius {
                1e-6
            } else {
                TABLE1_PNORM_TOL
            };
            out.report.checks.push(Check::predicate(
                format!("CNOT and CZ agree under {metric:?}"),
                (a - b).abs() < tol,
                format!("|{a:.6} - {b:.6}| < {tol:e}"),
            ));
        }
    }
    Ok(out)
}

/// Both metrics at `D = 4`.
pub fn run_table1(cfg: &OptimizerConfig) -> Result<RunOutput> {
    table1_at(4, &[Metric::Frobenius, Metric::Pnorm2], cfg)
}

/// Lays the table out as rows of gaps over gate columns.
pub fn render_table1(report: &RunReport) -> String {
    let mut out = String::new();
    let names: Vec<String> = table1_reference().iter().map(|r| r.0.name()).collect();
    let _ = write!(out, "{:<8}", "");
    for n in &names {
        let _ = write!(out, "{n:>10}");
    }
    let _ = writeln!(out);
    let rows: [(&str, Metric, fn(&GapReport) -> Option<f64>); 3] = [
        ("G(F)", Metric::Frobenius, |r| Some(r.gap_frobenius)),
        ("G(p)", Metric::Pnorm2, |r| r.pnorm_restarts.map(|s| s.mean)),
        ("G~(F)", Metric::Frobenius, |r| Some(r.gap_frobenius_renorm)),
    ];
    for (label, metric, get) in rows {
        let _ = write!(out, "{label:<8}");
        for n in &names {
            let v = report
                .cells
                .iter()
                .find(|c| &c.gate == n && c.metric == metric)
                .map(|c| c.report.as_ref().and_then(get));
            let s = match v {
                Some(Some(x)) => format!("{x:.4}"),
                Some(None) => "FAILED".into(),
                None => "-".into(),
            };
            let _ = write!(out, "{s:>10}");
        }
        let _ = writeln!(out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    GenCnot1,
    GenCnot2,
}

impl Family {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Family::GenCnot1),
            2 => Ok(Family::GenCnot2),
            _ => Err(Error::Invalid(format!("family must be 1 or 2, got {i}"))),
        }
    }

    fn gate(self) -> GateKind {
        match self {
            Family::GenCnot1 => GateKind::GenCnot1,
            Family::GenCnot2 => GateKind::GenCnot2,
        }
    }
}

pub const SCALING_MAX_QUBITS: usize = 8;

/// Frobenius gap of a generalized CNOT family at `D = 2` for
/// `N = 2..=n_max`, with the expected trend checked.
pub fn run_scaling(family: Family, n_max: usize, cfg: &OptimizerConfig) -> Result<RunOutput> {
    if !(2..=SCALING_MAX_QUBITS).contains(&n_max) {
        return Err(Error::Invalid(format!(
            "n_max must lie in 2..={SCALING_MAX_QUBITS}, got {n_max}"
        )));
    }
    let cells = (2..=n_max)
        .map(|n| {
            Ok(Cell {
                gate: family.gate(),
                shape: SystemShape::unitary(n, 2)?,
                metric: Metric::Frobenius,
                states: None,
                expect: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let name = match family {
        Family::GenCnot1 => "scaling_gen_cnot_1",
        Family::GenCnot2 => "scaling_gen_cnot_2",
    };
    let mut out = run_cells(name, cells, cfg);
    let curve = scaling_curve(&out.report);
    let gap = |n: usize| curve.iter().find(|p| p.0 == n).and_then(|p| p.1);
    let checks = &mut out.report.checks;
    match family {
        Family::GenCnot1 => {
            if let Some(g3) = gap(3) {
                checks.push(Check::value(
                    "GEN_CNOT_1 N=3 equals the Toffoli gap".into(),
                    Some(g3),
                    Expectation::Near {
                        value: 0.25,
                        tol: TABLE1_FROBENIUS_TOL,
                    },
                ));
            }
            if n_max >= 4 {
                let tail: Vec<Option<f64>> = (3..=n_max).map(gap).collect();
                let decreasing = tail.iter().all(Option::is_some)
                    && tail.windows(2).all(|w| w[1].unwrap() < w[0].unwrap());
                checks.push(Check::predicate(
                    format!("GEN_CNOT_1 strictly decreasing for 3 <= N <= {n_max}"),
                    decreasing,
                    "gap(N+1) < gap(N)",
                ));
            }
            if n_max >= 8 {
                checks.push(Check::value(
                    "GEN_CNOT_1 gap at N=8".into(),
                    gap(8),
                    Expectation::Below { bound: 0.1 },
                ));
            }
        }
        Family::GenCnot2 => {
            if n_max >= 8 {
                let diff = gap(8).zip(gap(7)).map(|(a, b)| (a - b).abs());
                checks.push(Check::value(
                    "GEN_CNOT_2 |gap(8) - gap(7)|".into(),
                    diff,
                    Expectation::Below { bound: 0.01 },
                ));
            }
        }
    }
    Ok(out)
}

/// `(N, gap)` pairs of a scaling report, `None` for failed cells.
pub fn scaling_curve(report: &RunReport) -> Vec<(usize, Option<f64>)> {
    report
        .cells
        .iter()
        .map(|c| {
            (
                c.shape.n_qubits(),
                c.report.as_ref().map(|r| r.gap_frobenius),
            )
        })
        .collect()
}

pub const ZERO_GAP: f64 = 1e-6;
pub const NONZERO_GAP: f64 = 0.01;
pub const ISOMETRY_SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

/// Zero/nonzero classification of 1→3 and 2→3 isometries with the fixed
/// inputs in `|0⟩`.
pub fn run_isometry_suite(cfg: &OptimizerConfig) -> Result<RunOutput> {
    let zero = Expectation::Below { bound: ZERO_GAP };
    let nonzero = Expectation::Above { bound: NONZERO_GAP };
    let mut plan: Vec<(GateKind, usize, usize, Expectation)> = vec![
        (GateKind::Toffoli, 1, 2, zero),
        (GateKind::Fredkin, 1, 2, zero),
    ];
    for seed in ISOMETRY_SEEDS {
        plan.push((GateKind::RandomIsometry { seed }, 1, 2, nonzero));
        plan.push((GateKind::RandomIsometry { seed }, 1, 4, zero));
    }
    plan.push((GateKind::Toffoli, 2, 4, zero));
    for seed in ISOMETRY_SEEDS {
        plan.push((GateKind::RandomIsometry { seed }, 2, 4, nonzero));
    }
    let cells = plan
        .into_iter()
        .map(|(gate, m, d, e)| {
            Ok(Cell {
                gate,
                shape: SystemShape::new(3, d, m)?,
                metric: Metric::Frobenius,
                states: None,
                expect: vec![(Quantity::GapFrobenius, e)],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(run_cells("isometries", cells, cfg))
}

/// Runs an experiment file. `seed` overrides the optimizer seed.
pub fn run_custom(spec_file: &Path, seed: Option<u64>) -> Result<(ExperimentSpec, RunOutput)> {
    let mut spec = ExperimentSpec::load(spec_file)?;
    if let Some(s) = seed {
        spec.optimizer.seed = s;
    }
    let out = run_spec(&spec);
    Ok((spec, out))
}

pub fn run_spec(spec: &ExperimentSpec) -> RunOutput {
    run_cells(&spec.name, spec.cells(), &spec.optimizer)
}

/// Loads either a run report or a single gap report and renders it.
pub fn show(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(run) = RunReport::from_json(&text) {
        return Ok(run.render());
    }
    let r: GapReport = serde_json::from_str(&text)?;
    let mut out = format!("{}\n", GapReport::CSV_HEADER);
    out.push_str(&r.csv_row());
    out.push('\n');
    Ok(out)
}
