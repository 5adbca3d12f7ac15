//! Characteristic observable operations of a two-qubit gate.
//!
//! For each of the nine X/Y/Z product input bases a gate maps the four basis
//! states onto four orthonormal outputs. Each such map is a characteristic
//! operation and is verified by measuring in the output basis; its classical
//! fidelity is the average probability of the correct outcome.
//!
//! Outcome probabilities follow the `p(output | input)` convention throughout.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{QuantumChannel, TRACE_PRESERVATION_TOL};
use crate::error::{Error, Result};
use crate::states::{Axis, ProductBasis};
use crate::tensor::{expectation, inner, partial_trace_second, ComplexMatrix};

/// Orthonormality tolerance for output sets.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// `|⟨a|b⟩| ≥ 1 - PHASE_MATCH_TOL` counts as equal up to a phase.
pub const PHASE_MATCH_TOL: f64 = 1e-9;
/// Parity expectation within this of ±1 counts as definite.
pub const PARITY_TOL: f64 = 1e-10;
/// Slack allowed on fidelity values before they are clamped into `[0, 1]`.
pub const FIDELITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpClass {
    Identity,
    Cnot,
    ReverseCnot,
    Entangle,
}

impl OpClass {
    pub fn label(self) -> &'static str {
        match self {
            OpClass::Identity => "identity",
            OpClass::Cnot => "CNOT",
            OpClass::ReverseCnot => "reverse CNOT",
            OpClass::Entangle => "entangle",
        }
    }
}

impl fmt::Display for OpClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How the outputs of a fidelity measurement were read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measurement {
    /// Local measurement in a product basis.
    Product(ProductBasis),
    /// Non-local measurement in the ideal entangled output basis.
    Bell,
    /// Joint parity of `σ_a ⊗ σ_b`; two outcomes accepted per input.
    Parity(Axis, Axis),
    /// Entanglement fidelity assembled from three parity measurements.
    LocalParities([(Axis, Axis); 3]),
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measurement::Product(b) => write!(f, "product:{b}"),
            Measurement::Bell => f.write_str("bell"),
            Measurement::Parity(a, b) => write!(f, "parity:{a}{b}"),
            Measurement::LocalParities(pairs) => {
                write!(f, "parities:")?;
                for (i, (a, b)) in pairs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}{b}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Measurement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let pair = |t: &str| -> Result<(Axis, Axis)> {
            let b: ProductBasis = t.parse()?;
            Ok((b.control, b.target))
        };
        if s == "bell" {
            return Ok(Measurement::Bell);
        }
        if let Some(rest) = s.strip_prefix("product:") {
            return Ok(Measurement::Product(rest.parse()?));
        }
        if let Some(rest) = s.strip_prefix("parity:") {
            let (a, b) = pair(rest)?;
            return Ok(Measurement::Parity(a, b));
        }
        if let Some(rest) = s.strip_prefix("parities:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() == 3 {
                return Ok(Measurement::LocalParities([
                    pair(parts[0])?,
                    pair(parts[1])?,
                    pair(parts[2])?,
                ]));
            }
        }
        Err(Error::Argument(format!("unrecognised measurement description '{s}'")))
    }
}

impl Serialize for Measurement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Measurement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A named classical fidelity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub name: String,
    pub value: f64,
    pub input_basis: ProductBasis,
    pub measurement: Measurement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

impl FidelityRecord {
    /// An exact (analytic) fidelity. Values within [`FIDELITY_SLACK`] of `[0, 1]` are clamped.
    pub fn exact(name: String, value: f64, input_basis: ProductBasis, measurement: Measurement) -> Result<Self> {
        Ok(FidelityRecord {
            name,
            value: clamp_fidelity(value)?,
            input_basis,
            measurement,
            shots: None,
            std_error: None,
        })
    }

    /// A sampled estimate carrying its shot count and standard error.
    pub fn sampled(
        name: String,
        value: f64,
        input_basis: ProductBasis,
        measurement: Measurement,
        shots: u64,
        std_error: f64,
    ) -> Result<Self> {
        Ok(FidelityRecord {
            shots: Some(shots),
            std_error: Some(std_error),
            ..Self::exact(name, value, input_basis, measurement)?
        })
    }
}

fn clamp_fidelity(value: f64) -> Result<f64> {
    if !(-FIDELITY_SLACK..=1.0 + FIDELITY_SLACK).contains(&value) {
        return Err(Error::Consistency(format!("fidelity {value} outside [0, 1]")));
    }
    Ok(value.clamp(0.0, 1.0))
}

pub fn fidelity_name(basis: ProductBasis, readout: &str) -> String {
    format!("F_{basis}->{readout}")
}

/// One characteristic operation: an input product basis, the ideal images of
/// its four states, and the class those images fall into.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicOp {
    input_basis: ProductBasis,
    inputs: [ComplexMatrix; 4],
    expected_outputs: [ComplexMatrix; 4],
    op_class: OpClass,
}

impl CharacteristicOp {
    pub fn input_basis(&self) -> ProductBasis {
        self.input_basis
    }

    pub fn inputs(&self) -> &[ComplexMatrix; 4] {
        &self.inputs
    }

    pub fn expected_outputs(&self) -> &[ComplexMatrix; 4] {
        &self.expected_outputs
    }

    pub fn op_class(&self) -> OpClass {
        self.op_class
    }

    /// `"F_xz->ent"` for entangling operations, `"F_zz->zz"` otherwise.
    pub fn fidelity_name(&self) -> String {
        match self.op_class {
            OpClass::Entangle => fidelity_name(self.input_basis, "ent"),
            _ => fidelity_name(self.input_basis, &self.input_basis.label()),
        }
    }

    pub fn measurement(&self) -> Measurement {
        match self.op_class {
            OpClass::Entangle => Measurement::Bell,
            _ => Measurement::Product(self.input_basis),
        }
    }
}

fn check_gate(gate: &ComplexMatrix) -> Result<()> {
    if gate.rows() != 4 || gate.cols() != 4 {
        return Err(Error::Argument(format!(
            "gate must be 4x4, got {}x{}",
            gate.rows(),
            gate.cols()
        )));
    }
    if !gate.is_unitary(TRACE_PRESERVATION_TOL) {
        return Err(Error::Precondition("gate is not unitary within 1e-10".into()));
    }
    Ok(())
}

fn check_channel(ch: &QuantumChannel) -> Result<()> {
    if ch.dim() != 4 {
        return Err(Error::Argument(format!(
            "two-qubit channel required, got dimension {}",
            ch.dim()
        )));
    }
    Ok(())
}

/// Builds the characteristic operation of `gate` on one input basis.
pub fn characteristic_op(gate: &ComplexMatrix, basis: ProductBasis) -> Result<CharacteristicOp> {
    check_gate(gate)?;
    let inputs = basis.states();
    let expected_outputs: [ComplexMatrix; 4] = std::array::from_fn(|n| gate * &inputs[n]);
    let op_class = classify(&expected_outputs, basis)?;
    Ok(CharacteristicOp {
        input_basis: basis,
        inputs,
        expected_outputs,
        op_class,
    })
}

/// All nine characteristic operations, ordered as [`ProductBasis::all`].
pub fn enumerate_characteristic_ops(gate: &ComplexMatrix) -> Result<Vec<CharacteristicOp>> {
    check_gate(gate)?;
    ProductBasis::all()
        .map(|basis| characteristic_op(gate, basis))
        .collect()
}

/// Classification of every cell, indexed `[control axis][target axis]`.
pub fn classification_grid(gate: &ComplexMatrix) -> Result<[[Result<OpClass>; 3]; 3]> {
    check_gate(gate)?;
    Ok(std::array::from_fn(|c| {
        std::array::from_fn(|t| {
            characteristic_op(gate, ProductBasis::new(Axis::ALL[c], Axis::ALL[t])).map(|op| op.op_class)
        })
    }))
}

fn reduced_control(psi: &ComplexMatrix) -> ComplexMatrix {
    partial_trace_second(&psi.projector(), 2, 2).expect("two-qubit state")
}

/// Reduced state of either qubit equals `I/2` within [`ORTHONORMAL_TOL`].
pub fn is_maximally_entangled(psi: &ComplexMatrix) -> bool {
    reduced_control(psi).max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) <= ORTHONORMAL_TOL
}

pub fn is_product_state(psi: &ComplexMatrix) -> bool {
    let r = reduced_control(psi);
    let purity = (&r * &r).trace().map(|t| t.re).unwrap_or(0.0);
    purity >= 1.0 - PHASE_MATCH_TOL
}

/// Classifies the images of a product basis under a gate.
pub fn classify(outputs: &[ComplexMatrix; 4], input_basis: ProductBasis) -> Result<OpClass> {
    for (i, a) in outputs.iter().enumerate() {
        if a.rows() != 4 || a.cols() != 1 {
            return Err(Error::Argument(format!("output {i} is not a two-qubit state vector")));
        }
        for (j, b) in outputs.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            if (inner(a, b) - want).norm() > ORTHONORMAL_TOL {
                return Err(Error::Precondition(format!("outputs {i} and {j} are not orthonormal")));
            }
        }
    }

    let entangled = outputs.iter().filter(|o| is_maximally_entangled(o)).count();
    let product = outputs.iter().filter(|o| is_product_state(o)).count();
    if entangled == 4 {
        return Ok(OpClass::Entangle);
    }
    if product != 4 {
        return Err(Error::InvalidGate(format!(
            "{input_basis} images mix entangled and product states ({entangled} maximally entangled, {product} product)"
        )));
    }

    let basis_states = input_basis.states();
    let mut control_kept = true;
    let mut target_kept = true;
    for (n, out) in outputs.iter().enumerate() {
        let m = basis_states
            .iter()
            .position(|b| inner(b, out).norm() >= 1.0 - PHASE_MATCH_TOL)
            .ok_or_else(|| {
                Error::Classification(format!(
                    "{input_basis} output {n} is a product state outside the {input_basis} basis"
                ))
            })?;
        control_kept &= (m >> 1) == (n >> 1);
        target_kept &= (m & 1) == (n & 1);
    }
    match (control_kept, target_kept) {
        (true, true) => Ok(OpClass::Identity),
        (true, false) => Ok(OpClass::Cnot),
        (false, true) => Ok(OpClass::ReverseCnot),
        (false, false) => Err(Error::Classification(format!(
            "{input_basis} outputs permute the basis without preserving either qubit"
        ))),
    }
}

/// Everything needed to evaluate or sample one fidelity: the four inputs, the
/// four measurement outcomes, and which outcomes count as correct for each input.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetting {
    pub name: String,
    pub input_basis: ProductBasis,
    pub measurement: Measurement,
    /// Substream identifier used by the sampler.
    pub stream_id: u64,
    pub inputs: [ComplexMatrix; 4],
    pub outcomes: [ComplexMatrix; 4],
    /// `accepted[input][outcome]`.
    pub accepted: [[bool; 4]; 4],
}

impl MeasurementSetting {
    /// Readout in the op's own ideal output basis; outcome `n` is correct for input `n`.
    pub fn characteristic(op: &CharacteristicOp) -> Self {
        MeasurementSetting {
            name: op.fidelity_name(),
            input_basis: op.input_basis,
            measurement: op.measurement(),
            stream_id: op.input_basis.index() as u64,
            inputs: op.inputs.clone(),
            outcomes: op.expected_outputs.clone(),
            accepted: std::array::from_fn(|n| std::array::from_fn(|o| n == o)),
        }
    }

    /// Joint-parity readout in the `(a, b)` product basis. The accepted parity
    /// for each input is the sign of `⟨σ_a⊗σ_b⟩` in the ideal gate output.
    pub fn correlation(input_basis: ProductBasis, axes: (Axis, Axis), ideal_gate: &ComplexMatrix) -> Result<Self> {
        check_gate(ideal_gate)?;
        let meas_basis = ProductBasis::new(axes.0, axes.1);
        let parity_op = meas_basis.pauli_product();
        let inputs = input_basis.states();
        let mut accepted = [[false; 4]; 4];
        for (n, psi) in inputs.iter().enumerate() {
            let ideal = ideal_gate * psi;
            let s = expectation(&parity_op, &ideal).re;
            if (s.abs() - 1.0).abs() > PARITY_TOL {
                return Err(Error::Precondition(format!(
                    "ideal output {n} of {input_basis} has indefinite {meas_basis} parity ({s:.6})"
                )));
            }
            for (o, row) in accepted[n].iter_mut().enumerate() {
                let outcome_parity = if ((o >> 1) ^ (o & 1)) == 0 { 1.0 } else { -1.0 };
                *row = outcome_parity * s > 0.0;
            }
        }
        Ok(MeasurementSetting {
            name: fidelity_name(input_basis, &meas_basis.label()),
            input_basis,
            measurement: Measurement::Parity(axes.0, axes.1),
            stream_id: 9 + 9 * input_basis.index() as u64 + meas_basis.index() as u64,
            inputs,
            outcomes: meas_basis.states(),
            accepted,
        })
    }

    /// `p[input][outcome] = ⟨outcome| ch(|input⟩⟨input|) |outcome⟩`.
    pub fn probabilities(&self, ch: &QuantumChannel) -> Result<[[f64; 4]; 4]> {
        check_channel(ch)?;
        let mut p = [[0.0; 4]; 4];
        for (n, psi) in self.inputs.iter().enumerate() {
            let rho = ch.apply_pure(psi)?;
            for (o, phi) in self.outcomes.iter().enumerate() {
                p[n][o] = inner(phi, &(&rho * phi)).re;
            }
        }
        Ok(p)
    }

    /// Average accepted probability over the four inputs.
    pub fn analytic(&self, ch: &QuantumChannel) -> Result<FidelityRecord> {
        let p = self.probabilities(ch)?;
        let total: f64 = (0..4)
            .flat_map(|n| (0..4).map(move |o| (n, o)))
            .filter(|&(n, o)| self.accepted[n][o])
            .map(|(n, o)| p[n][o])
            .sum();
        FidelityRecord::exact(self.name.clone(), total / 4.0, self.input_basis, self.measurement)
    }
}

/// `(1/4) Σ_n ⟨f_n| ch(|n⟩⟨n|) |f_n⟩`.
pub fn classical_fidelity(ch: &QuantumChannel, op: &CharacteristicOp) -> Result<FidelityRecord> {
    MeasurementSetting::characteristic(op).analytic(ch)
}

/// Classical fidelities of many operations, evaluated in parallel.
pub fn classical_fidelities(ch: &QuantumChannel, ops: &[CharacteristicOp]) -> Result<Vec<FidelityRecord>> {
    ops.par_iter().map(|op| classical_fidelity(ch, op)).collect()
}

pub fn correlation_fidelity(
    ch: &QuantumChannel,
    input_basis: ProductBasis,
    meas_axes: (Axis, Axis),
    ideal_gate: &ComplexMatrix,
) -> Result<FidelityRecord> {
    MeasurementSetting::correlation(input_basis, meas_axes, ideal_gate)?.analytic(ch)
}

/// Axis pairs whose joint parity is definite on every ideal output of the op.
///
/// For the CNOT's XZ operation these are `xx, yy, zz`; other entangling
/// operations have their own triple (e.g. `xy, yx, zz` for YZ).
pub fn correlation_axes(ideal_gate: &ComplexMatrix, input_basis: ProductBasis) -> Result<Vec<(Axis, Axis)>> {
    check_gate(ideal_gate)?;
    let outputs: Vec<ComplexMatrix> = input_basis.states().iter().map(|psi| ideal_gate * psi).collect();
    Ok(ProductBasis::all()
        .filter(|pair| {
            let op = pair.pauli_product();
            outputs
                .iter()
                .all(|out| (expectation(&op, out).re.abs() - 1.0).abs() <= PARITY_TOL)
        })
        .map(|pair| (pair.control, pair.target))
        .collect())
}

fn require_entangle(op: &CharacteristicOp) -> Result<()> {
    if op.op_class != OpClass::Entangle {
        return Err(Error::Argument(format!(
            "{} is a {} operation, not an entangling one",
            op.input_basis, op.op_class
        )));
    }
    Ok(())
}

/// Entanglement fidelity read out by a Bell measurement.
pub fn entanglement_fidelity_bell(ch: &QuantumChannel, op: &CharacteristicOp) -> Result<FidelityRecord> {
    require_entangle(op)?;
    classical_fidelity(ch, op)
}

/// Entanglement fidelity assembled from three local parity fidelities,
/// `(F_1 + F_2 + F_3 - 1) / 2`.
pub fn entanglement_fidelity_local(
    ch: &QuantumChannel,
    op: &CharacteristicOp,
    ideal_gate: &ComplexMatrix,
) -> Result<FidelityRecord> {
    require_entangle(op)?;
    let pairs = correlation_axes(ideal_gate, op.input_basis)?;
    let pairs: [(Axis, Axis); 3] = pairs.try_into().map_err(|found: Vec<_>| {
        Error::Precondition(format!(
            "{} outputs have {} definite-parity axis pairs, three are needed",
            op.input_basis,
            found.len()
        ))
    })?;
    let sum = pairs
        .iter()
        .map(|&axes| correlation_fidelity(ch, op.input_basis, axes, ideal_gate).map(|r| r.value))
        .sum::<Result<f64>>()?;
    FidelityRecord::exact(
        fidelity_name(op.input_basis, "ent_local"),
        0.5 * (sum - 1.0),
        op.input_basis,
        Measurement::LocalParities(pairs),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{depolarizing, ideal_cnot, unitary_channel};
    use crate::states::{bell_state, BellKind};

    fn basis(s: &str) -> ProductBasis {
        s.parse().unwrap()
    }

    fn cnot_channel() -> QuantumChannel {
        unitary_channel(&ideal_cnot()).unwrap()
    }

    fn op(s: &str) -> CharacteristicOp {
        characteristic_op(&ideal_cnot(), basis(s)).unwrap()
    }

    /// Direct density-matrix evaluation of `(1/4) Σ ⟨f_n|ρ_n|f_n⟩`.
    fn brute_force_fidelity(ch: &QuantumChannel, inputs: &[ComplexMatrix; 4], targets: &[ComplexMatrix; 4]) -> f64 {
        inputs
            .iter()
            .zip(targets)
            .map(|(psi, f)| {
                let rho = ch.apply(&psi.projector()).unwrap();
                (&(&f.dagger() * &rho) * f)[(0, 0)].re
            })
            .sum::<f64>()
            / 4.0
    }

    #[test]
    fn cnot_table_classes() {
        let ops = enumerate_characteristic_ops(&ideal_cnot()).unwrap();
        assert_eq!(ops.len(), 9);
        let class_of = |s: &str| ops.iter().find(|o| o.input_basis() == basis(s)).unwrap().op_class();
        assert_eq!(class_of("zx"), OpClass::Identity);
        assert_eq!(class_of("zz"), OpClass::Cnot);
        assert_eq!(class_of("zy"), OpClass::Cnot);
        assert_eq!(class_of("xx"), OpClass::ReverseCnot);
        assert_eq!(class_of("yx"), OpClass::ReverseCnot);
        for s in ["xz", "xy", "yz", "yy"] {
            assert_eq!(class_of(s), OpClass::Entangle, "{s}");
        }
    }

    #[test]
    fn reverse_cnot_outputs_match_x_basis_table() {
        // |0x0x⟩→|0x0x⟩, |0x1x⟩→|1x1x⟩, |1x0x⟩→|1x0x⟩, |1x1x⟩→|0x1x⟩ up to phase.
        let xx = op("xx");
        let states = basis("xx").states();
        for (n, m) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
            let ov = inner(&states[m], &xx.expected_outputs()[n]).norm();
            assert!((ov - 1.0).abs() < 1e-12, "{n}->{m}");
        }
    }

    #[test]
    fn xz_outputs_are_bell_states() {
        let xz = op("xz");
        let want = [
            BellKind::PhiPlus,
            BellKind::PsiPlus,
            BellKind::PhiMinus,
            BellKind::PsiMinus,
        ];
        for (out, kind) in xz.expected_outputs().iter().zip(want) {
            assert!(out.max_abs_diff(&bell_state(kind)) < 1e-12);
        }
    }

    #[test]
    fn classify_examples() {
        let zz = basis("zz");
        let cnot_images: [ComplexMatrix; 4] = std::array::from_fn(|n| &ideal_cnot() * &zz.states()[n]);
        assert_eq!(classify(&cnot_images, zz).unwrap(), OpClass::Cnot);

        let id = ComplexMatrix::identity(4);
        for b in ProductBasis::all() {
            assert_eq!(characteristic_op(&id, b).unwrap().op_class(), OpClass::Identity);
        }
    }

    #[test]
    fn classify_rejects_non_orthonormal_and_mixed_sets() {
        let zz = basis("zz");
        let mut outs = zz.states();
        outs[1] = outs[0].clone();
        assert!(matches!(classify(&outs, zz), Err(Error::Precondition(_))));

        let mut outs = zz.states();
        outs[0] = bell_state(BellKind::PhiPlus);
        outs[3] = bell_state(BellKind::PhiMinus);
        assert!(matches!(classify(&outs, zz), Err(Error::InvalidGate(_))));
    }

    #[test]
    fn swap_cells_that_leave_the_basis_fail_classification() {
        let swap = ComplexMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
            ],
        )
        .unwrap();
        let grid = classification_grid(&swap).unwrap();
        // Equal control/target axes: SWAP permutes without preserving either qubit.
        assert!(matches!(grid[2][2], Err(Error::Classification(_))));
        // Mixed axes: images leave the input basis entirely.
        assert!(matches!(grid[2][0], Err(Error::Classification(_))));
    }

    #[test]
    fn enumerate_rejects_non_unitary() {
        let m = ComplexMatrix::identity(4).scale_real(2.0);
        assert!(matches!(enumerate_characteristic_ops(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn classical_fidelity_examples() {
        let ideal = cnot_channel();
        for o in enumerate_characteristic_ops(&ideal_cnot()).unwrap() {
            assert!((classical_fidelity(&ideal, &o).unwrap().value - 1.0).abs() < 1e-12);
        }

        let zz = op("zz");
        for p in [0.0, 0.2, 0.5, 1.0] {
            let ch = ideal.then(&depolarizing(p).unwrap()).unwrap();
            let got = classical_fidelity(&ch, &zz).unwrap().value;
            assert!((got - (1.0 - 0.75 * p)).abs() < 1e-12);
            assert!((got - brute_force_fidelity(&ch, zz.inputs(), zz.expected_outputs())).abs() < 1e-12);
        }

        // Identity channel judged against the CNOT's ZZ op: inputs 00, 01 right, 10, 11 wrong.
        let id = QuantumChannel::identity(4);
        let oracle = brute_force_fidelity(&id, zz.inputs(), zz.expected_outputs());
        assert!((oracle - 0.5).abs() < 1e-15);
        let got = classical_fidelity(&id, &zz).unwrap();
        assert!((got.value - oracle).abs() < 1e-15);
        assert_eq!(got.name, "F_zz->zz");
        assert_eq!(got.measurement, Measurement::Product(basis("zz")));
    }

    #[test]
    fn correlation_fidelity_examples() {
        let u = ideal_cnot();
        let xz = basis("xz");
        let zz = (Axis::Z, Axis::Z);
        let r = correlation_fidelity(&cnot_channel(), xz, zz, &u).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.name, "F_xz->zz");

        let r = correlation_fidelity(&depolarizing(1.0).unwrap(), xz, zz, &u).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);

        let p = 0.3;
        let ch = cnot_channel().then(&depolarizing(p).unwrap()).unwrap();
        assert!((correlation_fidelity(&ch, xz, zz, &u).unwrap().value - (1.0 - p / 2.0)).abs() < 1e-12);

        let err = correlation_fidelity(&ch, xz, (Axis::X, Axis::Z), &u);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn correlation_accept_sets_for_xz() {
        // Outputs Φ+, Ψ+, Φ-, Ψ-: ZZ parity +,-,+,-.
        let s = MeasurementSetting::correlation(basis("xz"), (Axis::Z, Axis::Z), &ideal_cnot()).unwrap();
        assert_eq!(s.accepted[0], [true, false, false, true]);
        assert_eq!(s.accepted[1], [false, true, true, false]);
        assert_eq!(s.accepted[2], [true, false, false, true]);
        assert_eq!(s.accepted[3], [false, true, true, false]);
    }

    #[test]
    fn correlation_axes_per_entangling_op() {
        let u = ideal_cnot();
        let pairs = |s: &str| correlation_axes(&u, basis(s)).unwrap();
        use Axis::*;
        assert_eq!(pairs("xz"), vec![(X, X), (Y, Y), (Z, Z)]);
        assert_eq!(pairs("yz"), vec![(X, Y), (Y, X), (Z, Z)]);
        for s in ["xy", "yy"] {
            assert_eq!(pairs(s).len(), 3, "{s}");
        }
    }

    #[test]
    fn entanglement_fidelity_examples() {
        let u = ideal_cnot();
        let xz = op("xz");
        assert!((entanglement_fidelity_bell(&cnot_channel(), &xz).unwrap().value - 1.0).abs() < 1e-12);
        assert!((entanglement_fidelity_local(&cnot_channel(), &xz, &u).unwrap().value - 1.0).abs() < 1e-12);

        let full = depolarizing(1.0).unwrap();
        assert!((entanglement_fidelity_bell(&full, &xz).unwrap().value - 0.25).abs() < 1e-12);
        assert!((entanglement_fidelity_local(&full, &xz, &u).unwrap().value - 0.25).abs() < 1e-12);

        let p = 0.4;
        let ch = cnot_channel().then(&depolarizing(p).unwrap()).unwrap();
        let bell = entanglement_fidelity_bell(&ch, &xz).unwrap();
        assert!((bell.value - (1.0 - 0.75 * p)).abs() < 1e-12);
        assert_eq!(bell.measurement, Measurement::Bell);
        assert_eq!(bell.name, "F_xz->ent");

        assert!(matches!(
            entanglement_fidelity_bell(&ch, &op("zz")),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            entanglement_fidelity_local(&ch, &op("xx"), &u),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn parallel_matches_sequential() {
        let ops = enumerate_characteristic_ops(&ideal_cnot()).unwrap();
        let ch = cnot_channel()
            .then(&crate::channel::random_channel(4, 3, 5).unwrap())
            .unwrap();
        let par = classical_fidelities(&ch, &ops).unwrap();
        let seq: Vec<_> = ops.iter().map(|o| classical_fidelity(&ch, o).unwrap()).collect();
        assert_eq!(par, seq);
    }

    #[test]
    fn record_json_shape() {
        let r = classical_fidelity(&cnot_channel(), &op("xz")).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["input_basis"], "xz");
        assert_eq!(v["measurement"], "bell");
        assert!(v.get("shots").is_none());
        let back: FidelityRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);

        for m in ["product:zy", "bell", "parity:xx", "parities:xy,yx,zz"] {
            assert_eq!(m.parse::<Measurement>().unwrap().to_string(), m);
        }
    }
}
