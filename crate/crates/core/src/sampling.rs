//! Finite-shot simulation of the measurements behind each fidelity.
//!
//! Outcome probabilities are computed exactly, then shots are drawn one at a
//! time from the categorical distribution. Every `(operation, input)` cell
//! owns an independent ChaCha8 stream:
//!
//! ```text
//! rng    = ChaCha8Rng::seed_from_u64(plan.seed)      (rand_chacha 0.9)
//! stream = (setting.stream_id << 8) | input_index
//! u      = rng.random::<f64>()                        (53-bit uniform in [0,1))
//! outcome = first o with u < p_0 + … + p_o
//! ```
//!
//! `stream_id` is 0–8 for the nine characteristic operations (product-basis
//! index) and `9 + 9·basis + axes` for parity measurements, so results do not
//! depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::charops::{fidelity_name, CharacteristicOp, FidelityRecord, Measurement, MeasurementSetting};
use crate::error::{Error, Result};
use crate::states::{Axis, ProductBasis};
use crate::tensor::ComplexMatrix;

/// Tolerance on `Σ_o p(o | n) = 1`.
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub shots_per_input: u64,
    pub seed: u64,
}

impl ShotPlan {
    pub fn new(shots_per_input: u64, seed: u64) -> Result<Self> {
        if shots_per_input == 0 {
            return Err(Error::Argument("shots per input must be at least 1".into()));
        }
        Ok(ShotPlan { shots_per_input, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputCounts {
    pub index: usize,
    pub counts: [u64; 4],
}

/// Outcome counts for the four inputs of one measurement setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub op: String,
    pub inputs: Vec<InputCounts>,
    pub shots_per_input: u64,
    pub seed: u64,
}

impl CountTable {
    fn validate(&self) -> Result<()> {
        if self.inputs.len() != 4 {
            return Err(Error::Argument(format!(
                "{}: expected 4 inputs, found {}",
                self.op,
                self.inputs.len()
            )));
        }
        for (pos, input) in self.inputs.iter().enumerate() {
            if input.index != pos {
                return Err(Error::Argument(format!(
                    "{}: input {pos} has index {}",
                    self.op, input.index
                )));
            }
            let total: u64 = input.counts.iter().sum();
            if total != self.shots_per_input {
                return Err(Error::Argument(format!(
                    "{}: input {pos} has {total} counts, expected {}",
                    self.op, self.shots_per_input
                )));
            }
        }
        Ok(())
    }
}

fn cell_rng(seed: u64, stream_id: u64, input: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream_id << 8) | input as u64);
    rng
}

fn draw_counts(probs: &[f64; 4], shots: u64, rng: &mut ChaCha8Rng) -> [u64; 4] {
    let mut cumulative = [0.0; 4];
    let mut acc = 0.0;
    for (c, &p) in cumulative.iter_mut().zip(probs) {
        acc += p.max(0.0);
        *c = acc;
    }
    // Uniforms beyond the rounded total land on the last outcome with weight.
    let fallback = probs.iter().rposition(|&p| p > 0.0).unwrap_or(3);
    let mut counts = [0u64; 4];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let o = cumulative.iter().position(|&c| u < c).unwrap_or(fallback);
        counts[o] += 1;
    }
    counts
}

fn sample_cell(
    setting: &MeasurementSetting,
    probs: &[[f64; 4]; 4],
    plan: &ShotPlan,
    input: usize,
) -> Result<InputCounts> {
    let p = &probs[input];
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::Consistency(format!(
            "{} input {input}: outcome probabilities sum to {total}",
            setting.name
        )));
    }
    let mut rng = cell_rng(plan.seed, setting.stream_id, input);
    Ok(InputCounts {
        index: input,
        counts: draw_counts(p, plan.shots_per_input, &mut rng),
    })
}

/// Samples every input of a measurement setting.
pub fn sample_setting(ch: &QuantumChannel, setting: &MeasurementSetting, plan: &ShotPlan) -> Result<CountTable> {
    let probs = setting.probabilities(ch)?;
    let inputs = (0..4)
        .into_par_iter()
        .map(|n| sample_cell(setting, &probs, plan, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountTable {
        op: setting.name.clone(),
        inputs,
        shots_per_input: plan.shots_per_input,
        seed: plan.seed,
    })
}

/// Same as [`sample_setting`] on the calling thread only.
pub fn sample_setting_sequential(
    ch: &QuantumChannel,
    setting: &MeasurementSetting,
    plan: &ShotPlan,
) -> Result<CountTable> {
    let probs = setting.probabilities(ch)?;
    let inputs = (0..4)
        .map(|n| sample_cell(setting, &probs, plan, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountTable {
        op: setting.name.clone(),
        inputs,
        shots_per_input: plan.shots_per_input,
        seed: plan.seed,
    })
}

/// Samples a characteristic operation read out in its ideal output basis.
pub fn sample_op(ch: &QuantumChannel, op: &CharacteristicOp, plan: &ShotPlan) -> Result<CountTable> {
    sample_setting(ch, &MeasurementSetting::characteristic(op), plan)
}

/// Samples a joint-parity measurement on the outputs of one input basis.
pub fn sample_correlation(
    ch: &QuantumChannel,
    input_basis: ProductBasis,
    axes: (Axis, Axis),
    ideal_gate: &ComplexMatrix,
    plan: &ShotPlan,
) -> Result<CountTable> {
    sample_setting(
        ch,
        &MeasurementSetting::correlation(input_basis, axes, ideal_gate)?,
        plan,
    )
}

/// Plug-in estimate of the fidelity with binomial standard error
/// `√(Σ_n p̂_n(1 - p̂_n)/shots) / 4`.
pub fn estimate_fidelity(counts: &CountTable, setting: &MeasurementSetting) -> Result<FidelityRecord> {
    if counts.op != setting.name {
        return Err(Error::Argument(format!(
            "counts for {} used to estimate {}",
            counts.op, setting.name
        )));
    }
    counts.validate()?;
    let shots = counts.shots_per_input as f64;
    let mut mean = 0.0;
    let mut var = 0.0;
    for input in &counts.inputs {
        let hits: u64 = input
            .counts
            .iter()
            .enumerate()
            .filter(|(o, _)| setting.accepted[input.index][*o])
            .map(|(_, &c)| c)
            .sum();
        let p = hits as f64 / shots;
        mean += p;
        var += p * (1.0 - p) / shots;
    }
    FidelityRecord::sampled(
        setting.name.clone(),
        mean / 4.0,
        setting.input_basis,
        setting.measurement,
        counts.shots_per_input,
        var.sqrt() / 4.0,
    )
}

/// Entanglement fidelity `(F_1 + F_2 + F_3 - 1)/2` from three sampled parity
/// fidelities, with their standard errors added in quadrature.
pub fn combine_local_estimates(parts: &[FidelityRecord; 3]) -> Result<FidelityRecord> {
    let basis = parts[0].input_basis;
    let mut pairs = [(Axis::X, Axis::X); 3];
    for (slot, r) in pairs.iter_mut().zip(parts) {
        match r.measurement {
            Measurement::Parity(a, b) if r.input_basis == basis => *slot = (a, b),
            _ => {
                return Err(Error::Argument(format!(
                    "{} is not a parity fidelity on basis {basis}",
                    r.name
                )))
            }
        }
    }
    let shots = parts[0].shots.unwrap_or(0);
    let value = 0.5 * (parts.iter().map(|r| r.value).sum::<f64>() - 1.0);
    let se = 0.5
        * parts
            .iter()
            .map(|r| r.std_error.unwrap_or(0.0).powi(2))
            .sum::<f64>()
            .sqrt();
    FidelityRecord::sampled(
        fidelity_name(basis, "ent_local"),
        value,
        basis,
        Measurement::LocalParities(pairs),
        shots,
        se,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{depolarizing, ideal_cnot, unitary_channel};
    use crate::charops::characteristic_op;

    fn op(s: &str) -> CharacteristicOp {
        characteristic_op(&ideal_cnot(), s.parse().unwrap()).unwrap()
    }

    fn noisy(p: f64) -> QuantumChannel {
        unitary_channel(&ideal_cnot())
            .unwrap()
            .then(&depolarizing(p).unwrap())
            .unwrap()
    }

    #[test]
    fn ideal_gate_puts_every_shot_on_the_correct_outcome() {
        let plan = ShotPlan::new(1000, 1).unwrap();
        let table = sample_op(&noisy(0.0), &op("zz"), &plan).unwrap();
        for input in &table.inputs {
            let mut want = [0u64; 4];
            want[input.index] = 1000;
            assert_eq!(input.counts, want);
        }
        let est = estimate_fidelity(&table, &MeasurementSetting::characteristic(&op("zz"))).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.std_error, Some(0.0));
        assert_eq!(est.shots, Some(1000));
    }

    #[test]
    fn fully_depolarized_frequencies_are_uniform() {
        let shots = 4_000_000;
        let plan = ShotPlan::new(shots, 2024).unwrap();
        let table = sample_op(&depolarizing(1.0).unwrap(), &op("xx"), &plan).unwrap();
        let sigma = (0.25 * 0.75 / shots as f64).sqrt();
        for input in &table.inputs {
            for &c in &input.counts {
                let freq = c as f64 / shots as f64;
                assert!((freq - 0.25).abs() < 5.0 * sigma, "{freq}");
            }
        }
    }

    #[test]
    fn parallel_and_sequential_sampling_agree() {
        let plan = ShotPlan::new(5000, 42).unwrap();
        let ch = noisy(0.3);
        let setting = MeasurementSetting::characteristic(&op("yz"));
        assert_eq!(
            sample_setting(&ch, &setting, &plan).unwrap(),
            sample_setting_sequential(&ch, &setting, &plan).unwrap()
        );
    }

    #[test]
    fn depolarized_zz_estimate_converges() {
        let p = 0.2;
        let plan = ShotPlan::new(100_000, 9).unwrap();
        let setting = MeasurementSetting::characteristic(&op("zz"));
        let est = estimate_fidelity(&sample_setting(&noisy(p), &setting, &plan).unwrap(), &setting).unwrap();
        let analytic = 1.0 - 0.75 * p;
        assert!((est.value - analytic).abs() <= 5.0 * est.std_error.unwrap());
    }

    #[test]
    fn uniform_counts_on_parity_fidelity_give_one_half() {
        let setting =
            MeasurementSetting::correlation("xz".parse().unwrap(), (Axis::Z, Axis::Z), &ideal_cnot()).unwrap();
        let table = CountTable {
            op: setting.name.clone(),
            inputs: (0..4).map(|index| InputCounts { index, counts: [25; 4] }).collect(),
            shots_per_input: 100,
            seed: 0,
        };
        assert_eq!(estimate_fidelity(&table, &setting).unwrap().value, 0.5);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let setting = MeasurementSetting::characteristic(&op("zz"));
        let mut table = sample_op(&noisy(0.1), &op("zz"), &ShotPlan::new(10, 0).unwrap()).unwrap();
        table.inputs[2].counts[0] += 1;
        assert!(estimate_fidelity(&table, &setting).is_err());
        let other = sample_op(&noisy(0.1), &op("xx"), &ShotPlan::new(10, 0).unwrap()).unwrap();
        assert!(estimate_fidelity(&other, &setting).is_err());
        assert!(ShotPlan::new(0, 1).is_err());
    }

    #[test]
    fn count_table_json_shape() {
        let table = sample_op(&noisy(0.1), &op("zz"), &ShotPlan::new(10, 3).unwrap()).unwrap();
        let v = serde_json::to_value(&table).unwrap();
        assert_eq!(v["op"], "F_zz->zz");
        assert_eq!(v["shots_per_input"], 10);
        assert_eq!(v["seed"], 3);
        assert_eq!(v["inputs"][1]["index"], 1);
        assert_eq!(v["inputs"][1]["counts"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn local_combination_tracks_bell_fidelity() {
        let u = ideal_cnot();
        let ch = noisy(0.25);
        let plan = ShotPlan::new(200_000, 5).unwrap();
        let basis: ProductBasis = "xz".parse().unwrap();
        let parts: Vec<FidelityRecord> = [(Axis::X, Axis::X), (Axis::Y, Axis::Y), (Axis::Z, Axis::Z)]
            .iter()
            .map(|&axes| {
                let s = MeasurementSetting::correlation(basis, axes, &u).unwrap();
                estimate_fidelity(&sample_setting(&ch, &s, &plan).unwrap(), &s).unwrap()
            })
            .collect();
        let combined = combine_local_estimates(&[parts[0].clone(), parts[1].clone(), parts[2].clone()]).unwrap();
        let exact = 1.0 - 0.75 * 0.25;
        assert!((combined.value - exact).abs() <= 5.0 * combined.std_error.unwrap());
        assert_eq!(combined.name, "F_xz->ent_local");
    }
}
