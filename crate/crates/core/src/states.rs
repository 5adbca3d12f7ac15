//! Pauli eigenstates, two-qubit product bases, Bell states and the N-level
//! Fourier-conjugate basis.
//!
//! Phase conventions are fixed once here and every sign table downstream is
//! derived from them:
//!
//! ```text
//! |0_x⟩ = (|0⟩ + |1⟩)/√2     |1_x⟩ = (|0⟩ - |1⟩)/√2
//! |0_y⟩ = (|0⟩ + i|1⟩)/√2    |1_y⟩ = (|0⟩ - i|1⟩)/√2
//! |0_z⟩ = |0⟩                |1_z⟩ = |1⟩
//! ```
//!
//! Two-qubit states are ordered `|control; target⟩`, control as the left
//! tensor factor.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tensor::{kron, ComplexMatrix, C64, I, ONE, ZERO};

/// Largest level count accepted by [`fourier_basis_state`].
pub const MAX_LEVELS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn label(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_label(c: char) -> Option<Axis> {
        match c.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }

    /// The single-qubit Pauli operator for this axis.
    pub fn pauli(self) -> ComplexMatrix {
        let entries = match self {
            Axis::X => vec![ZERO, ONE, ONE, ZERO],
            Axis::Y => vec![ZERO, -I, I, ZERO],
            Axis::Z => vec![ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::new(2, 2, entries).expect("2x2 Pauli")
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitBasisState {
    pub axis: Axis,
    index: u8,
}

impl QubitBasisState {
    pub fn new(axis: Axis, index: u8) -> Result<Self> {
        if index > 1 {
            return Err(Error::Argument(format!("qubit basis index {index} not in {{0,1}}")));
        }
        Ok(QubitBasisState { axis, index })
    }

    pub fn index(&self) -> u8 {
        self.index
    }
}

/// Normalized eigenvector of the named Pauli: eigenvalue +1 for index 0, -1 for index 1.
pub fn pauli_eigenstate(s: QubitBasisState) -> ComplexMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let entries = match (s.axis, s.index) {
        (Axis::Z, 0) => vec![ONE, ZERO],
        (Axis::Z, _) => vec![ZERO, ONE],
        (Axis::X, 0) => vec![h, h],
        (Axis::X, _) => vec![h, -h],
        (Axis::Y, 0) => vec![h, h * I],
        (Axis::Y, _) => vec![h, -h * I],
    };
    ComplexMatrix::ket(entries).expect("2-vector")
}

/// `|c; t⟩`, control first.
pub fn product_state(control: QubitBasisState, target: QubitBasisState) -> ComplexMatrix {
    kron(&pauli_eigenstate(control), &pauli_eigenstate(target))
}

/// A two-qubit input basis given by one Pauli axis per qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductBasis {
    pub control: Axis,
    pub target: Axis,
}

impl ProductBasis {
    pub const fn new(control: Axis, target: Axis) -> Self {
        ProductBasis { control, target }
    }

    /// All nine bases, control axis major (`xx, xy, xz, yx, ..., zz`).
    pub fn all() -> impl Iterator<Item = ProductBasis> {
        Axis::ALL
            .into_iter()
            .flat_map(|c| Axis::ALL.into_iter().map(move |t| ProductBasis::new(c, t)))
    }

    /// Position in [`ProductBasis::all`].
    pub fn index(&self) -> usize {
        3 * self.control.index() + self.target.index()
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.control.label(), self.target.label())
    }

    /// The four basis states ordered `(c, t) = 00, 01, 10, 11`.
    pub fn states(&self) -> [ComplexMatrix; 4] {
        std::array::from_fn(|n| {
            let c = QubitBasisState::new(self.control, (n >> 1) as u8).unwrap();
            let t = QubitBasisState::new(self.target, (n & 1) as u8).unwrap();
            product_state(c, t)
        })
    }

    /// `σ_control ⊗ σ_target`.
    pub fn pauli_product(&self) -> ComplexMatrix {
        kron(&self.control.pauli(), &self.target.pauli())
    }
}

impl fmt::Display for ProductBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.control, self.target)
    }
}

impl FromStr for ProductBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (
            chars.next().and_then(Axis::from_label),
            chars.next().and_then(Axis::from_label),
            chars.next(),
        ) {
            (Some(c), Some(t), None) => Ok(ProductBasis::new(c, t)),
            _ => Err(Error::Argument(format!(
                "'{s}' is not a product basis label like \"xz\""
            ))),
        }
    }
}

impl Serialize for ProductBasis {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for ProductBasis {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];
}

pub fn bell_state(kind: BellKind) -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    let entries = match kind {
        BellKind::PhiPlus => [s, 0.0, 0.0, s],
        BellKind::PhiMinus => [s, 0.0, 0.0, -s],
        BellKind::PsiPlus => [0.0, s, s, 0.0],
        BellKind::PsiMinus => [0.0, s, -s, 0.0],
    };
    ComplexMatrix::from_real(4, 1, &entries).expect("4-vector")
}

/// `|k⟩ = N^{-1/2} Σ_n exp(-2πi k n / N) |n⟩` with `n` running over `0..N`.
pub fn fourier_basis_state(n_levels: usize, k: usize) -> Result<ComplexMatrix> {
    if !(2..=MAX_LEVELS).contains(&n_levels) {
        return Err(Error::Argument(format!(
            "level count {n_levels} outside 2..={MAX_LEVELS}"
        )));
    }
    if k >= n_levels {
        return Err(Error::Argument(format!(
            "Fourier index {k} out of range for N = {n_levels}"
        )));
    }
    let norm = 1.0 / (n_levels as f64).sqrt();
    let entries = (0..n_levels)
        .map(|n| {
            // Reduce k·n mod N first so the phase argument stays small.
            let m = (k * n) % n_levels;
            C64::from_polar(norm, -2.0 * PI * m as f64 / n_levels as f64)
        })
        .collect();
    ComplexMatrix::ket(entries)
}

/// Every Fourier-conjugate basis state for `N` levels, in index order.
pub fn fourier_basis(n_levels: usize) -> Result<Vec<ComplexMatrix>> {
    (0..n_levels).map(|k| fourier_basis_state(n_levels, k)).collect()
}
