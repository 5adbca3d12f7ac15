//! Scenario configs and the computations behind each subcommand.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "gate": "cnot",
//!   "noise": {"type": "depolarizing", "p": 0.1},
//!   "mode": "sampled",
//!   "shots": 100000,
//!   "seed": 42,
//!   "fidelities": ["zz", "xx", "xz"],
//!   "output": "report.json"
//! }
//! ```
//!
//! `gate` is `"cnot"`, `"identity"`, `"swap"` or sixteen `[re, im]` pairs in
//! row-major order. `fidelities` is `"all"` or a list of input-basis labels;
//! the ZZ, XX, ZY and YX operations are always evaluated since every bound
//! depends on them.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bounds::{wootters_concurrence, BoundsReport, ConcurrenceEntry, LocalFidelities, OracleValues};
use crate::channel::{ideal_cnot, process_fidelity, unitary_channel, ChannelSpec, QuantumChannel};
use crate::charops::{
    characteristic_op, classification_grid, correlation_axes, fidelity_name, CharacteristicOp, FidelityRecord,
    Measurement, MeasurementSetting, OpClass,
};
use crate::error::{Error, Result};
use crate::sampling::{combine_local_estimates, estimate_fidelity, sample_setting, CountTable, ShotPlan};
use crate::states::{Axis, ProductBasis};
use crate::tensor::{inner, ComplexMatrix, C64};
use crate::verify::{verify_bounds, Ensemble, VerifySummary};

/// Exit status for usage and configuration errors.
pub const EXIT_USAGE: u8 = 1;
/// Exit status for broken invariants and failed verification campaigns.
pub const EXIT_VERIFICATION: u8 = 2;

pub fn exit_code(e: &Error) -> u8 {
    if e.is_usage() {
        EXIT_USAGE
    } else {
        EXIT_VERIFICATION
    }
}

/// A named two-qubit gate or an explicit 4×4 unitary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateSpec {
    Named(String),
    Matrix(Vec<[f64; 2]>),
}

impl Default for GateSpec {
    fn default() -> Self {
        GateSpec::Named("cnot".into())
    }
}

impl FromStr for GateSpec {
    type Err = Error;

    /// A gate name, or a JSON array of sixteen `[re, im]` pairs.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('[') {
            let entries: Vec<[f64; 2]> =
                serde_json::from_str(s).map_err(|e| Error::Config(format!("gate matrix: {e}")))?;
            Ok(GateSpec::Matrix(entries))
        } else {
            Ok(GateSpec::Named(s.to_string()))
        }
    }
}

fn permutation_matrix(images: [usize; 4]) -> ComplexMatrix {
    let mut data = vec![C64::new(0.0, 0.0); 16];
    for (col, &row) in images.iter().enumerate() {
        data[row * 4 + col] = C64::new(1.0, 0.0);
    }
    ComplexMatrix::new(4, 4, data).expect("4x4 permutation")
}

impl GateSpec {
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        let m = match self {
            GateSpec::Named(name) => match name.to_ascii_lowercase().as_str() {
                "cnot" => ideal_cnot(),
                "identity" => ComplexMatrix::identity(4),
                "swap" => permutation_matrix([0, 2, 1, 3]),
                other => {
                    return Err(Error::Config(format!(
                        "unknown gate {other:?}; expected cnot, identity or swap"
                    )))
                }
            },
            GateSpec::Matrix(entries) => {
                if entries.len() != 16 {
                    return Err(Error::Config(format!(
                        "gate matrix needs 16 entries, got {}",
                        entries.len()
                    )));
                }
                let data = entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
                ComplexMatrix::new(4, 4, data).map_err(|e| Error::Config(format!("gate matrix: {e}")))?
            }
        };
        if !m.is_unitary(1e-10) {
            return Err(Error::Config("gate matrix is not unitary within 1e-10".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Analytic,
    Sampled,
}

/// Which characteristic operations a report covers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FidelitySelection {
    #[default]
    All,
    Ops(Vec<ProductBasis>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SelectionRepr {
    Word(String),
    List(Vec<ProductBasis>),
}

impl Serialize for FidelitySelection {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FidelitySelection::All => SelectionRepr::Word("all".into()).serialize(serializer),
            FidelitySelection::Ops(ops) => SelectionRepr::List(ops.clone()).serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for FidelitySelection {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match SelectionRepr::deserialize(deserializer)? {
            SelectionRepr::Word(w) if w == "all" => Ok(FidelitySelection::All),
            SelectionRepr::Word(w) => Err(serde::de::Error::custom(format!(
                "expected \"all\" or a list, got {w:?}"
            ))),
            SelectionRepr::List(ops) => Ok(FidelitySelection::Ops(ops)),
        }
    }
}

impl FidelitySelection {
    /// Requested bases plus the four the bounds need, in canonical order.
    pub fn bases(&self) -> Vec<ProductBasis> {
        ProductBasis::all()
            .filter(|b| match self {
                FidelitySelection::All => true,
                FidelitySelection::Ops(ops) => ops.contains(b) || LocalFidelities::BASES.contains(b),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub gate: GateSpec,
    pub noise: ChannelSpec,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fidelities: FidelitySelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ScenarioConfig {
    /// Parses and validates a config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.gate.matrix()?;
        self.noise.build().map_err(|e| Error::Config(format!("noise: {e}")))?;
        if self.mode == Mode::Sampled {
            match self.shots {
                None => return Err(Error::Config("sampled mode needs \"shots\"".into())),
                Some(0) => return Err(Error::Config("shots must be at least 1".into())),
                Some(_) => {}
            }
        }
        if let FidelitySelection::Ops(ops) = &self.fidelities {
            if ops.is_empty() {
                return Err(Error::Config("fidelity list is empty".into()));
            }
            for (i, b) in ops.iter().enumerate() {
                if ops[..i].contains(b) {
                    return Err(Error::Config(format!("fidelity {b} listed twice")));
                }
            }
        }
        Ok(())
    }

    fn plan(&self) -> Result<Option<ShotPlan>> {
        match self.mode {
            Mode::Analytic => Ok(None),
            Mode::Sampled => {
                let shots = self
                    .shots
                    .ok_or_else(|| Error::Config("sampled mode needs \"shots\"".into()))?;
                ShotPlan::new(shots, self.seed).map(Some)
            }
        }
    }
}

/// Output of `report`: the scenario followed by every fidelity and bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub gate: GateSpec,
    pub noise: ChannelSpec,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots_per_input: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub bounds: BoundsReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub counts: Vec<CountTable>,
}

impl Report {
    pub fn fidelity(&self, name: &str) -> Option<&FidelityRecord> {
        self.bounds.fidelities.iter().find(|r| r.name == name)
    }
}

struct Evaluator<'a> {
    channel: &'a QuantumChannel,
    plan: Option<ShotPlan>,
    counts: Vec<CountTable>,
}

impl Evaluator<'_> {
    fn measure(&mut self, setting: &MeasurementSetting) -> Result<FidelityRecord> {
        match &self.plan {
            None => setting.analytic(self.channel),
            Some(plan) => {
                let table = sample_setting(self.channel, setting, plan)?;
                let record = estimate_fidelity(&table, setting)?;
                self.counts.push(table);
                Ok(record)
            }
        }
    }

    /// Parity fidelities of an entangling op and the entanglement fidelity
    /// assembled from them; empty if the outputs lack three definite parities.
    fn local_entanglement(&mut self, op: &CharacteristicOp, gate: &ComplexMatrix) -> Result<Vec<FidelityRecord>> {
        let axes = correlation_axes(gate, op.input_basis())?;
        let Ok(axes) = <[(Axis, Axis); 3]>::try_from(axes) else {
            log::warn!(
                "{}: no three definite-parity axis pairs, skipping local readout",
                op.input_basis()
            );
            return Ok(Vec::new());
        };
        let mut parts = Vec::with_capacity(4);
        for pair in axes {
            parts.push(self.measure(&MeasurementSetting::correlation(op.input_basis(), pair, gate)?)?);
        }
        let triple: [FidelityRecord; 3] = [parts[0].clone(), parts[1].clone(), parts[2].clone()];
        let combined = match self.plan {
            Some(_) => combine_local_estimates(&triple)?,
            None => FidelityRecord::exact(
                fidelity_name(op.input_basis(), "ent_local"),
                0.5 * (triple.iter().map(|r| r.value).sum::<f64>() - 1.0),
                op.input_basis(),
                Measurement::LocalParities(axes),
            )?,
        };
        parts.push(combined);
        Ok(parts)
    }
}

fn oracle_values(ch: &QuantumChannel, gate: &ComplexMatrix, ops: &[CharacteristicOp]) -> Result<OracleValues> {
    let mut concurrences = Vec::new();
    for op in ops.iter().filter(|op| op.op_class() == OpClass::Entangle) {
        for (n, (psi, ideal)) in op.inputs().iter().zip(op.expected_outputs()).enumerate() {
            let rho = ch.apply_pure(psi)?;
            let fidelity = inner(ideal, &(&rho * ideal)).re;
            concurrences.push(ConcurrenceEntry {
                op: op.input_basis(),
                input: n,
                concurrence: wootters_concurrence(&rho)?,
                fidelity,
                lower_bound: 2.0 * fidelity - 1.0,
            });
        }
    }
    Ok(OracleValues {
        process_fidelity: process_fidelity(ch, gate)?,
        concurrences,
    })
}

/// Evaluates a scenario. In analytic mode the exact process fidelity and
/// output concurrences are attached, and any bound they violate is an error.
pub fn cmd_report(config: &ScenarioConfig) -> Result<Report> {
    config.validate()?;
    let gate = config.gate.matrix()?;
    let channel = unitary_channel(&gate)?.then(&config.noise.build()?)?;
    let ops = config
        .fidelities
        .bases()
        .into_iter()
        .map(|b| characteristic_op(&gate, b))
        .collect::<Result<Vec<_>>>()?;

    let plan = config.plan()?;
    let mut eval = Evaluator {
        channel: &channel,
        plan,
        counts: Vec::new(),
    };
    let mut fidelities = Vec::new();
    for op in &ops {
        fidelities.push(eval.measure(&MeasurementSetting::characteristic(op))?);
        if op.op_class() == OpClass::Entangle {
            fidelities.extend(eval.local_entanglement(op, &gate)?);
        }
    }
    let counts = eval.counts;

    let oracle = match config.mode {
        Mode::Analytic => Some(oracle_values(&channel, &gate, &ops)?),
        Mode::Sampled => None,
    };
    let bounds = BoundsReport::from_fidelities(fidelities, oracle)?;
    let violations = bounds.oracle_violations();
    if !violations.is_empty() {
        return Err(Error::Consistency(violations.join("; ")));
    }
    Ok(Report {
        gate: config.gate.clone(),
        noise: config.noise.clone(),
        mode: config.mode,
        shots_per_input: plan.map(|p| p.shots_per_input),
        seed: plan.map(|p| p.seed),
        bounds,
        counts,
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.9}")).unwrap_or_default()
}

/// Aligned plain-text view of a report.
pub fn render_report(report: &Report) -> String {
    let b = &report.bounds;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<20} {:>12} {:>12}",
        "fidelity", "measurement", "value", "std_error"
    );
    for r in &b.fidelities {
        let _ = writeln!(
            out,
            "{:<12} {:<20} {:>12.9} {:>12}",
            r.name,
            r.measurement.to_string(),
            r.value,
            fmt_opt(r.std_error)
        );
    }
    out.push('\n');
    let mut line = |label: &str, value: String| {
        let _ = writeln!(out, "{label:<34} {value}");
    };
    let range = |lo: f64, hi: f64| format!("[{lo:.9}, {hi:.9}]");
    line(
        "process fidelity bounds (ZZ, XX)",
        range(b.process_bounds_pair.lower, b.process_bounds_pair.upper),
    );
    line(
        "process fidelity bounds (four)",
        range(b.process_bounds.lower, b.process_bounds.upper),
    );
    if let Some(s) = b.process_bounds_sigma {
        line("  sigma (lower, upper)", format!("({:.9}, {:.9})", s.lower, s.upper));
    }
    if let Some(f) = b.process_fidelity_exact {
        line("process fidelity (exact)", format!("{f:.9}"));
    }
    line(
        "classical fidelity lower bound",
        format!("{:.9}", b.classical_fidelity_lower),
    );
    line(
        "entanglement fidelity lower bound",
        format!("{:.9}", b.ent_fidelity_lower),
    );
    line("entanglement capability", format!("{:.9}", b.concurrence_lower));
    if let Some(entries) = &b.concurrence_exact_per_input {
        if let Some(min) = entries.iter().map(|e| e.concurrence).min_by(f64::total_cmp) {
            line("min output concurrence (exact)", format!("{min:.9}"));
        }
    }
    if !b.vacuous.is_empty() {
        line("vacuous", b.vacuous.join(", "));
    }
    out
}

/// Evenly spaced grid `LO:HI:STEPS`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl FromStr for ParamRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts[..] else {
            return Err(Error::Argument(format!("range {s:?} is not LO:HI:STEPS")));
        };
        let real = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Argument(format!("range bound {t:?} is not a finite number")))
        };
        let steps: usize = steps
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("step count {steps:?} is not an integer")))?;
        if steps < 2 {
            return Err(Error::Argument(format!(
                "a sweep needs at least 2 grid points, got {steps}"
            )));
        }
        Ok(ParamRange {
            lo: real(lo)?,
            hi: real(hi)?,
            steps,
        })
    }
}

impl ParamRange {
    pub fn values(&self) -> Vec<f64> {
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub report: Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
    /// First grid value at which the capability bound changes sign.
    pub capability_crossing: Option<f64>,
}

/// One report per grid value of the noise model's numeric parameter.
pub fn cmd_sweep(config: &ScenarioConfig, range: &ParamRange) -> Result<SweepResult> {
    let parameter = config
        .noise
        .parameter_name()
        .ok_or_else(|| Error::Argument("noise model has no numeric parameter to sweep".into()))?;
    let rows = range
        .values()
        .into_par_iter()
        .map(|value| {
            let scenario = ScenarioConfig {
                noise: config.noise.with_parameter(value)?,
                ..config.clone()
            };
            Ok(SweepRow {
                value,
                report: cmd_report(&scenario)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let capability_crossing = rows
        .windows(2)
        .find(|w| (w[0].report.bounds.concurrence_lower > 0.0) != (w[1].report.bounds.concurrence_lower > 0.0))
        .map(|w| w[1].value);
    Ok(SweepResult {
        parameter: parameter.to_string(),
        rows,
        capability_crossing,
    })
}

pub fn render_sweep(sweep: &SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        sweep.parameter, "F_zz->zz", "F_xx->xx", "lower", "upper", "capability"
    );
    for row in &sweep.rows {
        let b = &row.report.bounds;
        let f = |name: &str| row.report.fidelity(name).map(|r| r.value).unwrap_or(f64::NAN);
        let _ = writeln!(
            out,
            "{:>12.6} {:>12.9} {:>12.9} {:>12.9} {:>12.9} {:>12.9}",
            row.value,
            f("F_zz->zz"),
            f("F_xx->xx"),
            b.process_bounds.lower,
            b.process_bounds.upper,
            b.concurrence_lower
        );
    }
    match sweep.capability_crossing {
        Some(v) => {
            let _ = writeln!(out, "capability bound changes sign at {} = {v}", sweep.parameter);
        }
        None => {
            let _ = writeln!(out, "capability bound keeps its sign over the grid");
        }
    }
    out
}

/// Randomized soundness campaign over CNOT-then-random-channel processes.
pub fn cmd_verify_bounds(
    n_channels: usize,
    seed: u64,
    rank: Option<usize>,
    identity_mix: bool,
) -> Result<VerifySummary> {
    let mut ensemble = Ensemble::new(n_channels, seed, rank)?;
    if identity_mix {
        ensemble = ensemble.with_identity_mix();
    }
    verify_bounds(&ensemble)
}

pub fn render_verify(summary: &VerifySummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:>8} {:>10} {:>14}",
        "check", "applied", "violations", "worst margin"
    );
    for c in &summary.checks {
        let worst = c.worst_margin.map(|m| format!("{m:.6e}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<28} {:>8} {:>10} {:>14}",
            c.name, c.applied, c.violations, worst
        );
    }
    let _ = writeln!(out, "{} channels, {} violations", summary.channels, summary.violations);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub control: Axis,
    pub target: Axis,
    /// `None` when classification failed.
    pub class: Option<OpClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TableCell {
    pub fn label(&self) -> &'static str {
        self.class.map(OpClass::label).unwrap_or("other")
    }
}

/// Classification of a gate's nine characteristic operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationTable {
    /// Control-major, matching [`ProductBasis::all`].
    pub cells: Vec<TableCell>,
}

impl ClassificationTable {
    pub fn cell(&self, control: Axis, target: Axis) -> &TableCell {
        &self.cells[3 * control.index() + target.index()]
    }
}

pub fn cmd_table(gate: &GateSpec) -> Result<ClassificationTable> {
    let grid = classification_grid(&gate.matrix()?)?;
    let mut cells = Vec::with_capacity(9);
    for (c, row) in grid.into_iter().enumerate() {
        for (t, result) in row.into_iter().enumerate() {
            let (class, error) = match result {
                Ok(class) => (Some(class), None),
                Err(e) => (None, Some(e.to_string())),
            };
            cells.push(TableCell {
                control: Axis::ALL[c],
                target: Axis::ALL[t],
                class,
                error,
            });
        }
    }
    Ok(ClassificationTable { cells })
}

/// Rows are the target-qubit input axis, columns the control-qubit input axis.
pub fn render_table(table: &ClassificationTable) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<16}", "target\\control");
    for c in Axis::ALL {
        let _ = write!(out, "{:<14}", c.label().to_ascii_uppercase());
    }
    let trimmed = out.trim_end().len();
    out.truncate(trimmed);
    out.push('\n');
    for t in Axis::ALL {
        let _ = write!(out, "{:<16}", t.label().to_ascii_uppercase());
        for c in Axis::ALL {
            let _ = write!(out, "{:<14}", table.cell(c, t).label());
        }
        let trimmed = out.trim_end().len();
        out.truncate(trimmed);
        out.push('\n');
    }
    out
}
