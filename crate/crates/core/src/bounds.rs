//! Bounds on process fidelity and entanglement capability from classical
//! fidelities, and the Wootters concurrence used to check them.
//!
//! All bounds are returned raw: a negative lower bound is vacuous, not an
//! error, and is flagged rather than clamped.

use serde::{Deserialize, Serialize};

use crate::channel::check_density_matrix;
use crate::charops::{FidelityRecord, Measurement};
use crate::error::{Error, Result};
use crate::states::{Axis, ProductBasis};
use crate::tensor::{hermitian_eigenvalues, hermitian_function, inner, kron, ComplexMatrix};

/// Pairwise squared overlaps must equal `1/N` within this to count as complementary.
pub const COMPLEMENTARITY_TOL: f64 = 1e-10;
/// Tolerance for checking a bound against an exact oracle value.
pub const SOUNDNESS_TOL: f64 = 1e-9;
/// Eigenvalues of `√ρ ρ̃ √ρ` above `-EIGEN_CLIP_TOL` are clipped to zero.
pub const EIGEN_CLIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessBounds {
    pub lower: f64,
    pub upper: f64,
    pub inputs_used: Vec<String>,
}

impl ProcessBounds {
    /// A lower bound of zero or less carries no information.
    pub fn is_vacuous(&self) -> bool {
        self.lower <= 0.0
    }

    pub fn contains(&self, value: f64, tol: f64) -> bool {
        self.lower - tol <= value && value <= self.upper + tol
    }
}

fn check_unit(name: &str, f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Argument(format!("{name} = {f} is not a fidelity in [0, 1]")));
    }
    Ok(())
}

/// Bounds from two complementary classical fidelities:
/// `F_n + F_k - 1 ≤ F_process ≤ min(F_n, F_k)`.
pub fn process_bounds_pair(f_n: f64, f_k: f64) -> Result<ProcessBounds> {
    check_unit("F_n", f_n)?;
    check_unit("F_k", f_k)?;
    Ok(ProcessBounds {
        lower: f_n + f_k - 1.0,
        upper: f_n.min(f_k),
        inputs_used: Vec::new(),
    })
}

/// [`process_bounds_pair`] for two fidelity records, optionally refusing
/// pairs whose input bases are not complementary.
pub fn process_bounds_from_records(a: &FidelityRecord, b: &FidelityRecord, validate: bool) -> Result<ProcessBounds> {
    if validate && !are_complementary(a.input_basis, b.input_basis) {
        return Err(Error::Argument(format!(
            "{} and {} have input bases {} and {} which are not complementary",
            a.name, b.name, a.input_basis, b.input_basis
        )));
    }
    let mut bounds = process_bounds_pair(a.value, b.value)?;
    bounds.inputs_used = vec![a.name.clone(), b.name.clone()];
    Ok(bounds)
}

/// Every state of `a` overlaps every state of `b` with squared modulus `1/N`.
pub fn mutually_unbiased(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> bool {
    let n = a.len();
    if n == 0 || b.len() != n {
        return false;
    }
    let want = 1.0 / n as f64;
    a.iter().all(|x| {
        b.iter()
            .all(|y| x.rows() == y.rows() && (inner(x, y).norm_sqr() - want).abs() <= COMPLEMENTARITY_TOL)
    })
}

pub fn are_complementary(a: ProductBasis, b: ProductBasis) -> bool {
    mutually_unbiased(&a.states(), &b.states())
}

/// Bounds from the four CNOT-type fidelities: best complementary pair for the
/// lower bound, lowest fidelity for the upper bound.
pub fn process_bounds_four(f_zz: f64, f_xx: f64, f_zy: f64, f_yx: f64) -> Result<ProcessBounds> {
    for (name, f) in [
        ("F_zz->zz", f_zz),
        ("F_xx->xx", f_xx),
        ("F_zy->zy", f_zy),
        ("F_yx->yx", f_yx),
    ] {
        check_unit(name, f)?;
    }
    Ok(ProcessBounds {
        lower: f_zz.max(f_zy) + f_xx.max(f_yx) - 1.0,
        upper: f_zz.min(f_xx).min(f_zy).min(f_yx),
        inputs_used: ["F_zz->zz", "F_xx->xx", "F_zy->zy", "F_yx->yx"]
            .map(String::from)
            .to_vec(),
    })
}

/// Lower bound `F_n + F_k - 1` on every classical fidelity of the device.
pub fn classical_fidelity_lower_bound(f_n: f64, f_k: f64) -> Result<f64> {
    check_unit("F_n", f_n)?;
    check_unit("F_k", f_k)?;
    Ok(f_n + f_k - 1.0)
}

/// Lower bound on every entangling operation's fidelity from the four local CNOT fidelities.
pub fn ent_fidelity_lower_bound(f_zz: f64, f_xx: f64, f_zy: f64, f_yx: f64) -> Result<f64> {
    process_bounds_four(f_zz, f_xx, f_zy, f_yx).map(|b| b.lower)
}

/// `C ≥ 2F - 1` for fidelity `F` with a maximally entangled state.
pub fn concurrence_lower_from_fidelity(f_ent: f64) -> Result<f64> {
    check_unit("F_ent", f_ent)?;
    Ok(2.0 * f_ent - 1.0)
}

/// Guaranteed entanglement capability `2·max(F_zz, F_zy) + 2·max(F_xx, F_yx) - 3`.
pub fn gate_entanglement_capability(f_zz: f64, f_xx: f64, f_zy: f64, f_yx: f64) -> Result<f64> {
    ent_fidelity_lower_bound(f_zz, f_xx, f_zy, f_yx).map(|f| 2.0 * f - 1.0)
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// Uses the Hermitian form: the eigenvalues of `ρ ρ̃` equal those of
/// `√ρ ρ̃ √ρ`, with `ρ̃ = (Y⊗Y) ρ* (Y⊗Y)`.
pub fn wootters_concurrence(rho: &ComplexMatrix) -> Result<f64> {
    check_density_matrix(rho, 4)?;
    let yy = kron(&Axis::Y.pauli(), &Axis::Y.pauli());
    let flipped = &(&yy * &rho.conj()) * &yy;
    let sqrt_rho = hermitian_function(rho, |x| x.max(0.0).sqrt())?;
    let m = &(&sqrt_rho * &flipped) * &sqrt_rho;
    // Symmetrize away rounding before the Hermitian eigensolver sees it.
    let m = (&m + &m.dagger()).scale_real(0.5);
    let mut lambdas = Vec::with_capacity(4);
    for mu in hermitian_eigenvalues(&m)? {
        if mu < -EIGEN_CLIP_TOL {
            return Err(Error::Consistency(format!("√ρ ρ̃ √ρ has negative eigenvalue {mu:.3e}")));
        }
        lambdas.push(mu.max(0.0).sqrt());
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// The four local CNOT-type fidelities the bounds are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFidelities {
    pub zz: f64,
    pub xx: f64,
    pub zy: f64,
    pub yx: f64,
}

impl LocalFidelities {
    pub const BASES: [ProductBasis; 4] = [
        ProductBasis::new(Axis::Z, Axis::Z),
        ProductBasis::new(Axis::X, Axis::X),
        ProductBasis::new(Axis::Z, Axis::Y),
        ProductBasis::new(Axis::Y, Axis::X),
    ];

    pub fn process_bounds(&self) -> Result<ProcessBounds> {
        process_bounds_four(self.zz, self.xx, self.zy, self.yx)
    }

    pub fn pair_bounds(&self) -> Result<ProcessBounds> {
        let mut b = process_bounds_pair(self.zz, self.xx)?;
        b.inputs_used = vec!["F_zz->zz".into(), "F_xx->xx".into()];
        Ok(b)
    }

    pub fn ent_fidelity_lower(&self) -> Result<f64> {
        ent_fidelity_lower_bound(self.zz, self.xx, self.zy, self.yx)
    }

    pub fn capability(&self) -> Result<f64> {
        gate_entanglement_capability(self.zz, self.xx, self.zy, self.yx)
    }
}

/// One-sigma uncertainties of bounds computed from sampled fidelities,
/// propagated linearly through the selected terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSigma {
    pub lower: f64,
    pub upper: f64,
}

/// Exact concurrence of one entangling-operation output next to its fidelity bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceEntry {
    pub op: ProductBasis,
    pub input: usize,
    pub concurrence: f64,
    /// `⟨ideal output|ρ|ideal output⟩`.
    pub fidelity: f64,
    /// `2·fidelity - 1`.
    pub lower_bound: f64,
}

/// Exact reference values available when the channel is known.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleValues {
    pub process_fidelity: f64,
    pub concurrences: Vec<ConcurrenceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub fidelities: Vec<FidelityRecord>,
    /// Complementary ZZ/XX pair.
    pub process_bounds_pair: ProcessBounds,
    /// Four-fidelity bounds.
    pub process_bounds: ProcessBounds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process_bounds_pair_sigma: Option<BoundSigma>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process_bounds_sigma: Option<BoundSigma>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process_fidelity_exact: Option<f64>,
    /// Lower bound on every classical fidelity from the ZZ/XX pair.
    pub classical_fidelity_lower: f64,
    pub ent_fidelity_lower: f64,
    /// Entanglement-capability lower bound.
    pub concurrence_lower: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concurrence_exact_per_input: Option<Vec<ConcurrenceEntry>>,
    /// Names of bounds whose lower value is ≤ 0.
    pub vacuous: Vec<String>,
}

fn find_local(fidelities: &[FidelityRecord], basis: ProductBasis) -> Result<&FidelityRecord> {
    fidelities
        .iter()
        .find(|r| r.input_basis == basis && matches!(r.measurement, Measurement::Product(_) | Measurement::Bell))
        .ok_or_else(|| Error::Argument(format!("no classical fidelity for input basis {basis}")))
}

impl BoundsReport {
    /// Derives every bound from the ZZ, XX, ZY and YX classical fidelities
    /// found in `fidelities`, attaching oracle values when given.
    pub fn from_fidelities(fidelities: Vec<FidelityRecord>, oracle: Option<OracleValues>) -> Result<Self> {
        let [zz, xx, zy, yx] = LocalFidelities::BASES.map(|b| find_local(&fidelities, b));
        let (zz, xx, zy, yx) = (zz?, xx?, zy?, yx?);
        let local = LocalFidelities {
            zz: zz.value,
            xx: xx.value,
            zy: zy.value,
            yx: yx.value,
        };

        let mut pair = process_bounds_from_records(zz, xx, true)?;
        pair.inputs_used = vec![zz.name.clone(), xx.name.clone()];
        let mut four = local.process_bounds()?;
        four.inputs_used = vec![zz.name.clone(), xx.name.clone(), zy.name.clone(), yx.name.clone()];

        let sigma_of = |r: &FidelityRecord| r.std_error;
        let sampled = [zz, xx, zy, yx].iter().all(|r| r.std_error.is_some());
        let (pair_sigma, four_sigma) = if sampled {
            let s = |r: &FidelityRecord| sigma_of(r).unwrap_or(0.0);
            let quad = |a: f64, b: f64| (a * a + b * b).sqrt();
            let pair_sigma = BoundSigma {
                lower: quad(s(zz), s(xx)),
                upper: if zz.value <= xx.value { s(zz) } else { s(xx) },
            };
            let best_z = if zz.value >= zy.value { zz } else { zy };
            let best_x = if xx.value >= yx.value { xx } else { yx };
            let worst = [zz, xx, zy, yx]
                .into_iter()
                .min_by(|a, b| a.value.total_cmp(&b.value))
                .unwrap();
            let four_sigma = BoundSigma {
                lower: quad(s(best_z), s(best_x)),
                upper: s(worst),
            };
            (Some(pair_sigma), Some(four_sigma))
        } else {
            (None, None)
        };

        let classical_fidelity_lower = classical_fidelity_lower_bound(zz.value, xx.value)?;
        let ent_fidelity_lower = local.ent_fidelity_lower()?;
        let concurrence_lower = local.capability()?;

        let mut vacuous = Vec::new();
        if pair.is_vacuous() {
            vacuous.push("process_bounds_pair".to_string());
        }
        if four.is_vacuous() {
            vacuous.push("process_bounds".to_string());
        }
        if classical_fidelity_lower <= 0.0 {
            vacuous.push("classical_fidelity_lower".to_string());
        }
        if ent_fidelity_lower <= 0.0 {
            vacuous.push("ent_fidelity_lower".to_string());
        }
        if concurrence_lower <= 0.0 {
            vacuous.push("concurrence_lower".to_string());
        }

        let (process_fidelity_exact, concurrence_exact_per_input) = match oracle {
            Some(o) => (Some(o.process_fidelity), Some(o.concurrences)),
            None => (None, None),
        };

        Ok(BoundsReport {
            fidelities,
            process_bounds_pair: pair,
            process_bounds: four,
            process_bounds_pair_sigma: pair_sigma,
            process_bounds_sigma: four_sigma,
            process_fidelity_exact,
            classical_fidelity_lower,
            ent_fidelity_lower,
            concurrence_lower,
            concurrence_exact_per_input,
            vacuous,
        })
    }

    /// Every place an oracle value falls outside a bound by more than
    /// [`SOUNDNESS_TOL`]. Empty when no oracle values are attached.
    pub fn oracle_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(f) = self.process_fidelity_exact {
            for (name, b) in [("pair", &self.process_bounds_pair), ("four", &self.process_bounds)] {
                if !b.contains(f, SOUNDNESS_TOL) {
                    out.push(format!(
                        "process fidelity {f} outside {name} bounds [{}, {}]",
                        b.lower, b.upper
                    ));
                }
            }
        }
        if let Some(entries) = &self.concurrence_exact_per_input {
            for e in entries {
                if e.concurrence < e.lower_bound - SOUNDNESS_TOL {
                    out.push(format!(
                        "{} input {}: concurrence {} below 2F-1 = {}",
                        e.op, e.input, e.concurrence, e.lower_bound
                    ));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell_state, pauli_eigenstate, BellKind, QubitBasisState};

    fn werner(q: f64) -> ComplexMatrix {
        let phi = bell_state(BellKind::PhiPlus).projector();
        &phi.scale_real(q) + &ComplexMatrix::identity(4).scale_real((1.0 - q) / 4.0)
    }

    #[test]
    fn pair_bound_examples() {
        let b = process_bounds_pair(1.0, 1.0).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let b = process_bounds_pair(0.5, 0.5).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.5));
        assert!(b.is_vacuous());
        let b = process_bounds_pair(0.9, 0.8).unwrap();
        assert!((b.lower - 0.7).abs() < 1e-15 && b.upper == 0.8);
        assert!(process_bounds_pair(1.1, 0.5).is_err());
        assert!(process_bounds_pair(0.5, -0.1).is_err());
    }

    #[test]
    fn four_bound_examples() {
        let b = process_bounds_four(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let b = process_bounds_four(0.95, 0.90, 0.93, 0.88).unwrap();
        assert!((b.lower - 0.85).abs() < 1e-15);
        assert_eq!(b.upper, 0.88);
        assert!(process_bounds_four(0.9, 0.9, 2.0, 0.9).is_err());
    }

    #[test]
    fn propagation_and_entanglement_examples() {
        assert_eq!(classical_fidelity_lower_bound(1.0, 1.0).unwrap(), 1.0);
        assert!((classical_fidelity_lower_bound(0.9, 0.85).unwrap() - 0.75).abs() < 1e-15);
        assert!((classical_fidelity_lower_bound(0.5, 0.4).unwrap() + 0.1).abs() < 1e-15);

        assert_eq!(ent_fidelity_lower_bound(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!((ent_fidelity_lower_bound(0.9, 0.9, 0.9, 0.9).unwrap() - 0.8).abs() < 1e-15);
        // Two-fidelity form is the ZZ/XX special case.
        assert!((classical_fidelity_lower_bound(0.9, 0.9).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn concurrence_bound_examples() {
        assert_eq!(concurrence_lower_from_fidelity(1.0).unwrap(), 1.0);
        assert_eq!(concurrence_lower_from_fidelity(0.5).unwrap(), 0.0);
        assert!((concurrence_lower_from_fidelity(0.875).unwrap() - 0.75).abs() < 1e-15);

        assert!(gate_entanglement_capability(0.75, 0.75, 0.75, 0.75).unwrap().abs() < 1e-15);
        assert_eq!(gate_entanglement_capability(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!((gate_entanglement_capability(0.9, 0.9, 0.85, 0.85).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn wootters_examples() {
        let phi = bell_state(BellKind::PhiPlus).projector();
        assert!((wootters_concurrence(&phi).unwrap() - 1.0).abs() < 1e-9);

        for axis in Axis::ALL {
            let a = pauli_eigenstate(QubitBasisState::new(axis, 0).unwrap()).projector();
            let b = pauli_eigenstate(QubitBasisState::new(Axis::Y, 1).unwrap()).projector();
            assert!(wootters_concurrence(&kron(&a, &b)).unwrap() < 1e-7);
        }

        assert!((wootters_concurrence(&werner(0.5)).unwrap() - 0.25).abs() < 1e-9);

        // Fidelity 0.875 with Φ+ is a Werner state with q = 5/6; the 2F-1 bound is tight.
        let rho = werner(5.0 / 6.0);
        let f = inner(&bell_state(BellKind::PhiPlus), &(&rho * &bell_state(BellKind::PhiPlus))).re;
        assert!((f - 0.875).abs() < 1e-12);
        let c = wootters_concurrence(&rho).unwrap();
        assert!((c - concurrence_lower_from_fidelity(f).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn wootters_rejects_invalid_states() {
        let not_normalized = ComplexMatrix::identity(4);
        assert!(matches!(
            wootters_concurrence(&not_normalized),
            Err(Error::Precondition(_))
        ));
        assert!(wootters_concurrence(&ComplexMatrix::identity(2).scale_real(0.5)).is_err());
    }

    #[test]
    fn complementarity_check() {
        let zz: ProductBasis = "zz".parse().unwrap();
        assert!(are_complementary(zz, "xx".parse().unwrap()));
        assert!(are_complementary(zz, "yx".parse().unwrap()));
        assert!(!are_complementary(zz, "zy".parse().unwrap()));
        assert!(!are_complementary(zz, zz));
    }
}
