//! Randomized soundness campaign for the bounds.
//!
//! Each case is the ideal CNOT followed by a seeded random channel. Every
//! bound is compared with exact values computed from the channel itself
//! (Choi-overlap process fidelity, direct Bell-basis fidelities, Wootters
//! concurrence of each output).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{classical_fidelity_lower_bound, wootters_concurrence, LocalFidelities, SOUNDNESS_TOL};
use crate::channel::{
    ideal_cnot, process_fidelity, process_fidelity_kraus, random_channel, unitary_channel, QuantumChannel,
};
use crate::charops::{
    classical_fidelity, entanglement_fidelity_bell, entanglement_fidelity_local, enumerate_characteristic_ops,
    CharacteristicOp, OpClass,
};
use crate::error::{Error, Result};
use crate::states::ProductBasis;
use crate::tensor::{inner, ComplexMatrix};

/// Agreement required between two routes to the same quantity.
pub const IDENTITY_TOL: f64 = 1e-10;

pub const CHECK_NAMES: [&str; 10] = [
    "process_fidelity_formulas",
    "process_bounds_pair",
    "process_bounds_four",
    "classical_above_process",
    "classical_propagation",
    "ent_fidelity_bound",
    "local_decomposition",
    "concurrence_per_output",
    "capability_every_output",
    "capability_mean_output",
];

/// Which channels to draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub n_channels: usize,
    pub seed: u64,
    /// Fixed Kraus rank, or `None` to cycle through 1..=16.
    pub rank: Option<usize>,
    /// Mix each random channel with the identity at a seeded weight, so the
    /// ensemble also covers nearly ideal gates where the bounds are tight.
    pub identity_mix: bool,
}

impl Ensemble {
    pub fn new(n_channels: usize, seed: u64, rank: Option<usize>) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::Argument("at least one channel is required".into()));
        }
        if let Some(r) = rank {
            if !(1..=16).contains(&r) {
                return Err(Error::Argument(format!("Kraus rank {r} outside 1..=16")));
            }
        }
        Ok(Ensemble {
            n_channels,
            seed,
            rank,
            identity_mix: false,
        })
    }

    pub fn with_identity_mix(mut self) -> Self {
        self.identity_mix = true;
        self
    }

    pub fn case_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }

    pub fn case_rank(&self, index: usize) -> usize {
        self.rank.unwrap_or(1 + index % 16)
    }

    /// Noise weight of case `index` when identity mixing is on.
    pub fn case_weight(&self, index: usize) -> Option<f64> {
        self.identity_mix.then(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(self.case_seed(index));
            rng.set_stream(1);
            let u: f64 = rng.random();
            u * u
        })
    }

    /// The noisy gate for one case: ideal CNOT, then the random channel.
    pub fn channel(&self, index: usize) -> Result<QuantumChannel> {
        let noise = random_channel(4, self.case_rank(index), self.case_seed(index))?;
        let noise = match self.case_weight(index) {
            Some(w) => QuantumChannel::identity(4).mix(&noise, w)?,
            None => noise,
        };
        unitary_channel(&ideal_cnot())?.then(&noise)
    }
}

/// Exact evaluation of one channel against the CNOT's characteristic operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub index: usize,
    pub seed: u64,
    pub rank: usize,
    pub weight: Option<f64>,
    pub process_fidelity: f64,
    pub process_fidelity_kraus: f64,
    /// Classical fidelities of the nine operations, in [`ProductBasis::all`] order.
    pub fidelities: Vec<f64>,
    /// `(basis, F_bell, F_local)` for each entangling operation.
    pub entanglement: Vec<(ProductBasis, f64, f64)>,
    /// `(basis, input, concurrence, ⟨ideal|ρ|ideal⟩)` for each entangling output.
    pub outputs: Vec<(ProductBasis, usize, f64, f64)>,
}

impl CaseResult {
    pub fn fidelity(&self, basis: ProductBasis) -> f64 {
        self.fidelities[basis.index()]
    }

    pub fn local(&self) -> LocalFidelities {
        let [zz, xx, zy, yx] = LocalFidelities::BASES.map(|b| self.fidelity(b));
        LocalFidelities { zz, xx, zy, yx }
    }

    /// Margin of each check, negative when the bound is crossed; `None` when
    /// the check does not apply to this case.
    pub fn margins(&self) -> Result<Vec<(&'static str, Option<f64>, f64)>> {
        let local = self.local();
        let fp = self.process_fidelity;
        let pair = local.pair_bounds()?;
        let four = local.process_bounds()?;
        let propagation = classical_fidelity_lower_bound(local.zz, local.xx)?;
        let ent_lower = local.ent_fidelity_lower()?;
        let capability = local.capability()?;

        let min_f = self.fidelities.iter().copied().fold(f64::INFINITY, f64::min);
        let min_ent = self.entanglement.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let decomposition = self.entanglement.iter().map(|e| (e.1 - e.2).abs()).fold(0.0, f64::max);
        let per_output = self
            .outputs
            .iter()
            .map(|&(_, _, c, f)| c - (2.0 * f - 1.0))
            .fold(f64::INFINITY, f64::min);
        let min_c = self.outputs.iter().map(|o| o.2).fold(f64::INFINITY, f64::min);
        let mean_c = self
            .entanglement
            .iter()
            .map(|&(basis, _, _)| {
                let cs: Vec<f64> = self.outputs.iter().filter(|o| o.0 == basis).map(|o| o.2).collect();
                cs.iter().sum::<f64>() / cs.len() as f64
            })
            .fold(f64::INFINITY, f64::min);

        Ok(vec![
            (
                "process_fidelity_formulas",
                Some(-(fp - self.process_fidelity_kraus).abs()),
                IDENTITY_TOL,
            ),
            (
                "process_bounds_pair",
                Some((fp - pair.lower).min(pair.upper - fp)),
                SOUNDNESS_TOL,
            ),
            (
                "process_bounds_four",
                Some((fp - four.lower).min(four.upper - fp)),
                SOUNDNESS_TOL,
            ),
            ("classical_above_process", Some(min_f - fp), SOUNDNESS_TOL),
            ("classical_propagation", Some(min_f - propagation), SOUNDNESS_TOL),
            ("ent_fidelity_bound", Some(min_ent - ent_lower), SOUNDNESS_TOL),
            ("local_decomposition", Some(-decomposition), IDENTITY_TOL),
            ("concurrence_per_output", Some(per_output), SOUNDNESS_TOL),
            (
                "capability_every_output",
                (capability > 0.0).then_some(min_c - capability),
                SOUNDNESS_TOL,
            ),
            ("capability_mean_output", Some(mean_c - capability), SOUNDNESS_TOL),
        ])
    }
}

/// Fidelity `⟨target|ρ|target⟩`.
fn overlap(rho: &ComplexMatrix, target: &ComplexMatrix) -> f64 {
    inner(target, &(rho * target)).re
}

pub fn evaluate_case(
    ch: &QuantumChannel,
    ops: &[CharacteristicOp],
    index: usize,
    ensemble: &Ensemble,
) -> Result<CaseResult> {
    let gate = ideal_cnot();
    let process = process_fidelity(ch, &gate)?;
    let process_kraus = process_fidelity_kraus(ch, &gate)?;
    let fidelities = ops
        .iter()
        .map(|op| classical_fidelity(ch, op).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let mut entanglement = Vec::new();
    let mut outputs = Vec::new();
    for op in ops.iter().filter(|op| op.op_class() == OpClass::Entangle) {
        let bell = entanglement_fidelity_bell(ch, op)?.value;
        let local = entanglement_fidelity_local(ch, op, &gate)?.value;
        entanglement.push((op.input_basis(), bell, local));
        for (n, (psi, ideal)) in op.inputs().iter().zip(op.expected_outputs()).enumerate() {
            let rho = ch.apply_pure(psi)?;
            outputs.push((op.input_basis(), n, wootters_concurrence(&rho)?, overlap(&rho, ideal)));
        }
    }
    Ok(CaseResult {
        index,
        seed: ensemble.case_seed(index),
        rank: ensemble.case_rank(index),
        weight: ensemble.case_weight(index),
        process_fidelity: process,
        process_fidelity_kraus: process_kraus,
        fidelities,
        entanglement,
        outputs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub tolerance: f64,
    /// Cases the check applied to.
    pub applied: usize,
    pub violations: usize,
    /// Smallest margin seen; negative means the bound was crossed. `None`
    /// when the check never applied.
    pub worst_margin: Option<f64>,
    pub offending_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub ensemble: Ensemble,
    pub channels: usize,
    pub violations: usize,
    pub checks: Vec<CheckSummary>,
}

impl VerifySummary {
    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Evaluates every case of the ensemble, in parallel, ordered by index.
pub fn run_cases(ensemble: &Ensemble) -> Result<Vec<CaseResult>> {
    let ops = enumerate_characteristic_ops(&ideal_cnot())?;
    (0..ensemble.n_channels)
        .into_par_iter()
        .map(|i| evaluate_case(&ensemble.channel(i)?, &ops, i, ensemble))
        .collect()
}

pub fn summarize(ensemble: &Ensemble, cases: &[CaseResult]) -> Result<VerifySummary> {
    let mut checks: Vec<CheckSummary> = CHECK_NAMES
        .iter()
        .map(|&name| CheckSummary {
            name: name.to_string(),
            tolerance: 0.0,
            applied: 0,
            violations: 0,
            worst_margin: None,
            offending_seeds: Vec::new(),
        })
        .collect();
    for case in cases {
        for (slot, (name, margin, tol)) in checks.iter_mut().zip(case.margins()?) {
            debug_assert_eq!(slot.name, name);
            slot.tolerance = tol;
            if let Some(m) = margin {
                slot.applied += 1;
                slot.worst_margin = Some(slot.worst_margin.map_or(m, |w| w.min(m)));
                if m < -tol {
                    slot.violations += 1;
                    slot.offending_seeds.push(case.seed);
                }
            }
        }
    }
    let violations = checks.iter().map(|c| c.violations).sum();
    Ok(VerifySummary {
        ensemble: *ensemble,
        channels: cases.len(),
        violations,
        checks,
    })
}

pub fn verify_bounds(ensemble: &Ensemble) -> Result<VerifySummary> {
    let cases = run_cases(ensemble)?;
    summarize(ensemble, &cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_arguments_are_checked() {
        assert!(Ensemble::new(0, 1, None).is_err());
        assert!(Ensemble::new(5, 1, Some(17)).is_err());
        assert!(Ensemble::new(5, 1, Some(0)).is_err());
        let e = Ensemble::new(20, 3, None).unwrap();
        assert_eq!(e.case_rank(0), 1);
        assert_eq!(e.case_rank(17), 2);
        assert_eq!(e.case_seed(4), 7);
        assert_eq!(e.case_weight(4), None);
        let w = e.with_identity_mix().case_weight(4).unwrap();
        assert!((0.0..=1.0).contains(&w));
    }

    #[test]
    fn small_campaign_is_clean() {
        let e = Ensemble::new(32, 7, None).unwrap();
        let summary = verify_bounds(&e).unwrap();
        assert!(summary.passed(), "{summary:#?}");
        assert_eq!(summary.channels, 32);
        assert_eq!(summary.check("process_bounds_four").unwrap().applied, 32);
    }

    #[test]
    fn random_unitary_case_matches_trace_formula() {
        let e = Ensemble::new(1, 11, Some(1)).unwrap();
        let ch = e.channel(0).unwrap();
        let u = &ch.kraus_ops()[0];
        let t = (&ideal_cnot().dagger() * u).trace().unwrap();
        let case = &run_cases(&e).unwrap()[0];
        assert!((case.process_fidelity - t.norm_sqr() / 16.0).abs() < 1e-12);
        let four = case.local().process_bounds().unwrap();
        assert!(four.contains(case.process_fidelity, SOUNDNESS_TOL));
    }
}
