//! Quantum channels in Kraus form, the ideal controlled-NOT, noise models,
//! Choi matrices and the exact process-fidelity oracle.
//!
//! Noise is always a separate channel; a noisy gate is built by composing the
//! ideal gate's unitary channel with a noise channel (`gate.then(&noise)`).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::states::Axis;
use crate::tensor::{hermitian_eigenvalues, inner, kron, trace, ComplexMatrix, C64, ONE, ZERO};

/// Tolerance on `Σ K†K = I`.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;
/// Tolerance for density-matrix and Choi-matrix conditions.
pub const STATE_TOL: f64 = 1e-9;
/// Most negative eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-9;

/// A completely positive trace-preserving map `ρ ↦ Σ K ρ K†`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    /// Builds a channel, checking shapes and trace preservation.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Argument("a channel needs at least one Kraus operator".into()))?;
        let dim = first.rows();
        for (i, k) in kraus.iter().enumerate() {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::Dimension(format!(
                    "Kraus operator {i} is {}x{}, expected {dim}x{dim}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let ch = QuantumChannel { dim, kraus };
        let defect = ch.trace_preservation_defect();
        if defect > TRACE_PRESERVATION_TOL {
            return Err(Error::Precondition(format!(
                "Kraus set is not trace preserving (max |ΣK†K - I| = {defect:.3e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        QuantumChannel {
            dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `max |Σ K†K - I|` entrywise.
    pub fn trace_preservation_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            sum = &sum + &(&k.dagger() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// Applies the channel to a density matrix.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_density_matrix(rho, self.dim)?;
        Ok(self.apply_unchecked(rho))
    }

    /// Applies the channel to any `dim×dim` operator without validating it.
    pub(crate) fn apply_unchecked(&self, op: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = &out + &(&(k * op) * &k.dagger());
        }
        out
    }

    /// Output density matrix for a pure input `|psi⟩`.
    pub fn apply_pure(&self, psi: &ComplexMatrix) -> Result<ComplexMatrix> {
        if psi.rows() != self.dim || psi.cols() != 1 {
            return Err(Error::Dimension(format!(
                "input state of shape {}x{} for a {}-dimensional channel",
                psi.rows(),
                psi.cols(),
                self.dim
            )));
        }
        Ok(self.apply_unchecked(&psi.projector()))
    }

    /// Sequential composition: `self` acts first, then `next`.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim != next.dim {
            return Err(Error::Dimension(format!(
                "composing {}-dim with {}-dim channel",
                self.dim, next.dim
            )));
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Ok(QuantumChannel { dim: self.dim, kraus })
    }

    /// Convex mixture `(1 - weight)·self + weight·other`.
    pub fn mix(&self, other: &QuantumChannel, weight: f64) -> Result<QuantumChannel> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Argument(format!("mixture weight {weight} outside [0,1]")));
        }
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "mixing {}-dim with {}-dim channel",
                self.dim, other.dim
            )));
        }
        let a = (1.0 - weight).sqrt();
        let b = weight.sqrt();
        let kraus = self
            .kraus
            .iter()
            .map(|k| k.scale_real(a))
            .chain(other.kraus.iter().map(|k| k.scale_real(b)))
            .collect();
        Ok(QuantumChannel { dim: self.dim, kraus })
    }
}

pub fn check_density_matrix(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if rho.rows() != dim || rho.cols() != dim {
        return Err(Error::Argument(format!(
            "density matrix is {}x{}, expected {dim}x{dim}",
            rho.rows(),
            rho.cols()
        )));
    }
    let defect = rho.hermiticity_defect();
    if defect > STATE_TOL {
        return Err(Error::Precondition(format!(
            "density matrix not Hermitian ({defect:.3e})"
        )));
    }
    let tr = trace(rho)?;
    if (tr - ONE).norm() > STATE_TOL {
        return Err(Error::Precondition(format!("density matrix trace {tr} != 1")));
    }
    let min = hermitian_eigenvalues(rho)?.last().copied().unwrap_or(0.0);
    if min < PSD_TOL {
        return Err(Error::Precondition(format!(
            "density matrix has eigenvalue {min:.3e} < 0"
        )));
    }
    Ok(())
}

/// The controlled-NOT with the control as the left tensor factor.
pub fn ideal_cnot() -> ComplexMatrix {
    ComplexMatrix::from_real(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
    .expect("4x4")
}

pub fn unitary_channel(u: &ComplexMatrix) -> Result<QuantumChannel> {
    if !u.is_square() {
        return Err(Error::Dimension(format!(
            "unitary must be square, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    if !u.is_unitary(TRACE_PRESERVATION_TOL) {
        return Err(Error::Precondition("matrix is not unitary within 1e-10".into()));
    }
    Ok(QuantumChannel {
        dim: u.rows(),
        kraus: vec![u.clone()],
    })
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("{what} probability {p} outside [0,1]")));
    }
    Ok(())
}

fn pauli_or_identity(index: usize) -> ComplexMatrix {
    match index {
        0 => ComplexMatrix::identity(2),
        1 => Axis::X.pauli(),
        2 => Axis::Y.pauli(),
        _ => Axis::Z.pauli(),
    }
}

/// Two-qubit depolarizing channel `ρ ↦ (1-p)ρ + p·I/4`.
pub fn depolarizing(p: f64) -> Result<QuantumChannel> {
    check_probability(p, "depolarizing")?;
    let mut kraus = vec![ComplexMatrix::identity(4).scale_real((1.0 - 15.0 * p / 16.0).sqrt())];
    let w = (p / 16.0).sqrt();
    for a in 0..4 {
        for b in 0..4 {
            if a == 0 && b == 0 {
                continue;
            }
            kraus.push(kron(&pauli_or_identity(a), &pauli_or_identity(b)).scale_real(w));
        }
    }
    Ok(QuantumChannel { dim: 4, kraus })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qubit {
    Control,
    Target,
}

/// Embeds a single-qubit operator on the chosen qubit of a pair.
pub fn on_qubit(op: &ComplexMatrix, which: Qubit) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    match which {
        Qubit::Control => kron(op, &id),
        Qubit::Target => kron(&id, op),
    }
}

/// Single-qubit Pauli dephasing `ρ ↦ (1 - p/2)ρ + (p/2)σρσ` on one qubit of a pair.
pub fn dephasing(p: f64, which: Qubit, axis: Axis) -> Result<QuantumChannel> {
    check_probability(p, "dephasing")?;
    let kraus = vec![
        ComplexMatrix::identity(4).scale_real((1.0 - p / 2.0).sqrt()),
        on_qubit(&axis.pauli(), which).scale_real((p / 2.0).sqrt()),
    ];
    Ok(QuantumChannel { dim: 4, kraus })
}

/// The unitary `exp(-iθ/2 · Z⊗I)`: a coherent Z over-rotation of the control.
pub fn overrotation_unitary(theta: f64) -> ComplexMatrix {
    let a = C64::from_polar(1.0, -theta / 2.0);
    let b = C64::from_polar(1.0, theta / 2.0);
    ComplexMatrix::diagonal(&[a, a, b, b])
}

pub fn coherent_overrotation(theta: f64) -> Result<QuantumChannel> {
    if !theta.is_finite() {
        return Err(Error::Argument(format!("rotation angle {theta} is not finite")));
    }
    unitary_channel(&overrotation_unitary(theta))
}

/// Random CPTP channel from a seeded complex Gaussian `(rank·dim)×dim` matrix,
/// orthonormalized into an isometry whose `dim×dim` blocks are the Kraus
/// operators.
///
/// Variates come from ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`,
/// drawn row-major, real part before imaginary part.
pub fn random_channel(dim: usize, kraus_rank: usize, seed: u64) -> Result<QuantumChannel> {
    if dim == 0 {
        return Err(Error::Argument("channel dimension must be positive".into()));
    }
    if kraus_rank == 0 || kraus_rank > dim * dim {
        return Err(Error::Argument(format!(
            "Kraus rank {kraus_rank} outside 1..={} for dimension {dim}",
            dim * dim
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = kraus_rank * dim;
    let mut cols: Vec<Vec<C64>> = vec![vec![ZERO; rows]; dim];
    for r in 0..rows {
        for col in cols.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            col[r] = C64::new(re, im);
        }
    }
    // Modified Gram-Schmidt, applied twice for orthogonality at working precision.
    for _ in 0..2 {
        for j in 0..dim {
            for i in 0..j {
                let proj: C64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let (head, tail) = cols.split_at_mut(j);
                for (x, y) in tail[0].iter_mut().zip(&head[i]) {
                    *x -= proj * y;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(Error::Consistency(
                    "degenerate Gaussian sample in random_channel".into(),
                ));
            }
            for x in cols[j].iter_mut() {
                *x /= norm;
            }
        }
    }
    let kraus = (0..kraus_rank)
        .map(|block| {
            let entries = (0..dim)
                .flat_map(|r| (0..dim).map(move |c| (r, c)))
                .map(|(r, c)| cols[c][block * dim + r])
                .collect();
            ComplexMatrix::new(dim, dim, entries).expect("square block")
        })
        .collect();
    QuantumChannel::new(kraus)
}

/// Trace-normalized Choi matrix `J = (1/d) Σ_{mn} |m⟩⟨n| ⊗ E(|m⟩⟨n|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::Dimension(format!(
                "Choi matrix is {}x{}, expected {n}x{n}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > TRACE_PRESERVATION_TOL {
            return Err(Error::Consistency(format!("Choi matrix not Hermitian ({defect:.3e})")));
        }
        let tr = trace(&matrix)?;
        if (tr - ONE).norm() > TRACE_PRESERVATION_TOL {
            return Err(Error::Consistency(format!("Choi matrix trace {tr} != 1")));
        }
        let min = hermitian_eigenvalues(&matrix)?.last().copied().unwrap_or(0.0);
        if min < PSD_TOL {
            return Err(Error::Consistency(format!("Choi matrix has eigenvalue {min:.3e} < 0")));
        }
        Ok(ChoiMatrix { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix).expect("validated Hermitian")
    }
}

pub fn choi(ch: &QuantumChannel) -> Result<ChoiMatrix> {
    let d = ch.dim();
    let n = d * d;
    let mut j = ComplexMatrix::zeros(n, n);
    let scale = 1.0 / d as f64;
    for m in 0..d {
        for k in 0..d {
            let mut unit = ComplexMatrix::zeros(d, d);
            unit.set(m, k, ONE);
            let image = ch.apply_unchecked(&unit);
            for a in 0..d {
                for b in 0..d {
                    j.set(m * d + a, k * d + b, image[(a, b)] * scale);
                }
            }
        }
    }
    ChoiMatrix::new(d, j)
}

fn check_fidelity_inputs(actual: &QuantumChannel, ideal: &ComplexMatrix) -> Result<()> {
    if ideal.rows() != actual.dim() || ideal.cols() != actual.dim() {
        return Err(Error::Argument(format!(
            "ideal operator is {}x{} but channel acts on dimension {}",
            ideal.rows(),
            ideal.cols(),
            actual.dim()
        )));
    }
    if !ideal.is_unitary(TRACE_PRESERVATION_TOL) {
        return Err(Error::Precondition("ideal operator is not unitary".into()));
    }
    Ok(())
}

/// Process fidelity as the overlap `tr(J_ideal · J_actual)` of trace-one Choi matrices.
pub fn process_fidelity(actual: &QuantumChannel, ideal: &ComplexMatrix) -> Result<f64> {
    check_fidelity_inputs(actual, ideal)?;
    let j_ideal = choi(&unitary_channel(ideal)?)?;
    let j_actual = choi(actual)?;
    Ok(trace(&(j_ideal.matrix() * j_actual.matrix()))?.re)
}

/// Process fidelity through the Kraus form `Σ |tr(U†K)|² / d²`.
pub fn process_fidelity_kraus(actual: &QuantumChannel, ideal: &ComplexMatrix) -> Result<f64> {
    check_fidelity_inputs(actual, ideal)?;
    let d = actual.dim() as f64;
    let u_dag = ideal.dagger();
    let total: f64 = actual
        .kraus_ops()
        .iter()
        .map(|k| trace(&(&u_dag * k)).map(|t| t.norm_sqr()))
        .sum::<Result<f64>>()?;
    Ok(total / (d * d))
}

/// Maximally entangled `|Φ+⟩` on two `d`-level systems.
pub fn max_entangled(d: usize) -> ComplexMatrix {
    let mut v = ComplexMatrix::zeros(d * d, 1);
    let w = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v.set(i * d + i, 0, w);
    }
    v
}

/// Fidelity of `ch` on the pure input `psi` against the target output `phi`.
pub fn transition_probability(ch: &QuantumChannel, psi: &ComplexMatrix, phi: &ComplexMatrix) -> Result<f64> {
    let out = ch.apply_pure(psi)?;
    Ok(inner(phi, &(&out * phi)).re)
}

/// A real number that may be written either as a JSON number or a decimal string.
fn de_real<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Real {
        Num(f64),
        Text(String),
    }
    match Real::deserialize(deserializer)? {
        Real::Num(x) => Ok(x),
        Real::Text(s) => s.trim().parse::<f64>().map_err(serde::de::Error::custom),
    }
}

/// Noise description used in scenario configs.
///
/// ```json
/// {"type": "depolarizing", "p": 0.1}
/// {"type": "dephasing", "p": "0.05", "qubit": "control", "axis": "z"}
/// {"type": "overrotation", "theta": 0.3}
/// {"type": "random", "rank": 4, "seed": 7}
/// {"type": "ideal"}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    Ideal,
    Depolarizing {
        #[serde(deserialize_with = "de_real")]
        p: f64,
    },
    Dephasing {
        #[serde(deserialize_with = "de_real")]
        p: f64,
        qubit: Qubit,
        axis: Axis,
    },
    Overrotation {
        #[serde(deserialize_with = "de_real")]
        theta: f64,
    },
    Random {
        rank: usize,
        seed: u64,
    },
}

impl ChannelSpec {
    /// The two-qubit noise channel this spec describes.
    pub fn build(&self) -> Result<QuantumChannel> {
        match *self {
            ChannelSpec::Ideal => Ok(QuantumChannel::identity(4)),
            ChannelSpec::Depolarizing { p } => depolarizing(p),
            ChannelSpec::Dephasing { p, qubit, axis } => dephasing(p, qubit, axis),
            ChannelSpec::Overrotation { theta } => coherent_overrotation(theta),
            ChannelSpec::Random { rank, seed } => random_channel(4, rank, seed),
        }
    }

    /// Name of the swept numeric parameter, if the model has one.
    pub fn parameter_name(&self) -> Option<&'static str> {
        match self {
            ChannelSpec::Depolarizing { .. } | ChannelSpec::Dephasing { .. } => Some("p"),
            ChannelSpec::Overrotation { .. } => Some("theta"),
            ChannelSpec::Ideal | ChannelSpec::Random { .. } => None,
        }
    }

    /// Copy with the numeric parameter replaced.
    pub fn with_parameter(&self, value: f64) -> Result<ChannelSpec> {
        let mut out = self.clone();
        match &mut out {
            ChannelSpec::Depolarizing { p } | ChannelSpec::Dephasing { p, .. } => *p = value,
            ChannelSpec::Overrotation { theta } => *theta = value,
            ChannelSpec::Ideal | ChannelSpec::Random { .. } => {
                return Err(Error::Argument("noise model has no numeric parameter to sweep".into()))
            }
        }
        Ok(out)
    }
}
