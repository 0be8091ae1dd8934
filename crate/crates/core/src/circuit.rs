//! Brick-wall circuit schedule with periodic boundary conditions and the
//! depth-by-depth evolution loop that records the half-chain negativity.

use crate::channels::{self, NoiseModel, QubitPair};
use crate::error::{Error, Result};
use crate::gates::{self, GateSet, RngStream};
use crate::negativity::{negativity_measures, Bipartition};
use crate::qstate::{self, DensityMatrix};
use serde::{Deserialize, Serialize};

/// Stop a run once the recorded negativity has fallen below
/// `fraction * running_max` for `patience` consecutive recorded depths.
/// Never triggers for noiseless runs, where the curve saturates instead of
/// decaying.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EarlyStop {
    pub fraction: f64,
    pub patience: usize,
}

impl Default for EarlyStop {
    fn default() -> Self {
        Self {
            fraction: 0.5,
            patience: 4,
        }
    }
}

/// Everything needed to reproduce one circuit evolution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub num_qubits: usize,
    pub max_depth: usize,
    pub error_rate: f64,
    pub gate_set: GateSet,
    pub seed: u64,
    /// Sub-stream index; sweeps give each sample its own stream on a shared
    /// master seed.
    #[serde(default)]
    pub rng_stream: u64,
    /// Depth stride between negativity evaluations (1 = every depth).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub early_stop: Option<EarlyStop>,
    /// Whether depolarizing noise also follows the single-qubit layers of the
    /// sqrt-iSWAP gate set. Default: noise attaches to two-qubit gates only.
    #[serde(default)]
    pub noisy_single_qubit_gates: bool,
}

fn default_record_every() -> usize {
    1
}

impl CircuitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_qubits < 2 || self.num_qubits % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "num_qubits must be even and >= 2, got {}",
                self.num_qubits
            )));
        }
        if self.num_qubits > qstate::max_qubits() {
            return Err(Error::InvalidSpec(format!(
                "num_qubits {} exceeds the supported maximum {}",
                self.num_qubits,
                qstate::max_qubits()
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidSpec("max_depth must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.error_rate) {
            return Err(Error::InvalidErrorRate(self.error_rate));
        }
        if self.record_every < 1 {
            return Err(Error::InvalidSpec("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// The qubit pairs touched by one brick-wall layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerSchedule {
    pub depth: usize,
    pub pairs: Vec<QubitPair>,
}

/// Brick-wall pairing at a given depth under periodic boundary conditions:
/// odd depths couple (1,2), (3,4), ..., (N-1,N); even depths couple
/// (2,3), (4,5), ..., (N-2,N-1) plus the wrap pair (N,1).
pub fn layer_pairs(depth: usize, num_qubits: usize) -> Result<LayerSchedule> {
    if num_qubits < 2 || num_qubits % 2 != 0 {
        return Err(Error::InvalidSpec(format!(
            "layer schedule needs an even qubit count, got {num_qubits}"
        )));
    }
    if depth < 1 {
        return Err(Error::InvalidSpec("depth starts at 1".into()));
    }
    let pairs = if depth % 2 == 1 {
        (1..num_qubits)
            .step_by(2)
            .map(|l| QubitPair::new(l, l + 1))
            .collect::<Result<Vec<_>>>()?
    } else {
        let mut pairs = (2..num_qubits - 1)
            .step_by(2)
            .map(|l| QubitPair::new(l, l + 1))
            .collect::<Result<Vec<_>>>()?;
        pairs.push(QubitPair::new(num_qubits, 1)?);
        pairs
    };
    Ok(LayerSchedule { depth, pairs })
}

/// Apply one depth step in place: for the Haar gate set a fresh Haar gate
/// plus depolarizing noise on every pair of the layer; for the sqrt-iSWAP
/// set a fresh random single-qubit gate on every qubit first, then the fixed
/// sqrt-iSWAP plus noise on every pair.
pub fn evolve_one_depth(
    state: &mut DensityMatrix,
    spec: &CircuitSpec,
    depth: usize,
    rng: &mut RngStream,
) -> Result<()> {
    let noise = NoiseModel::new(spec.error_rate)?;
    let layer = layer_pairs(depth, spec.num_qubits)?;
    match spec.gate_set {
        GateSet::HaarRandom => {
            for &pair in &layer.pairs {
                let gate = gates::sample_haar_two_qubit(rng);
                channels::apply_noisy_gate(state, &gate, noise, pair)?;
            }
        }
        GateSet::SqrtIswapPlusRandomSingles => {
            let iswap = gates::fixed_sqrt_iswap();
            for qubit in 1..=spec.num_qubits {
                let gate = gates::sample_single_qubit_gate(rng);
                channels::apply_one_qubit_unitary(state, &gate, qubit)?;
            }
            if spec.noisy_single_qubit_gates {
                // attach the pair channel along the layer once, mirroring the
                // two-qubit noise budget
                for &pair in &layer.pairs {
                    channels::apply_depolarizing(state, noise, pair)?;
                }
            }
            for &pair in &layer.pairs {
                channels::apply_noisy_gate(state, &iswap, noise, pair)?;
            }
        }
    }
    debug_assert!(
        (state.trace().re - 1.0).abs() < 1e-9,
        "trace drifted to {}",
        state.trace().re
    );
    Ok(())
}

/// Per-depth log-negativity record of a single circuit realization.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTrace {
    pub num_qubits: usize,
    pub error_rate: f64,
    /// Recorded depths, strictly increasing.
    pub depths: Vec<usize>,
    pub log_negativity: Vec<f64>,
}

impl SampleTrace {
    pub fn max(&self) -> Option<(usize, f64)> {
        self.log_negativity
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, v)| (self.depths[i], v))
    }
}

/// Evolve from |0...0><0...0| through depths `1..=max_depth`, recording the
/// half-chain logarithmic negativity every `record_every` depths.
pub fn run_circuit(spec: &CircuitSpec) -> Result<SampleTrace> {
    spec.validate()?;
    let mut rng = RngStream::new(spec.seed, spec.rng_stream);
    let mut state = qstate::init_product_state(spec.num_qubits)?;
    let cut = Bipartition::half_chain(spec.num_qubits)?;

    let mut depths = Vec::new();
    let mut values = Vec::new();
    let mut running_max = f64::NEG_INFINITY;
    let mut below_count = 0usize;
    // the noiseless curve saturates rather than decays; never cut it short
    let early_stop = if spec.error_rate > 0.0 {
        spec.early_stop
    } else {
        None
    };

    for depth in 1..=spec.max_depth {
        evolve_one_depth(&mut state, spec, depth, &mut rng)?;
        if depth % spec.record_every != 0 {
            continue;
        }
        let measure = negativity_measures(&state, &cut)?;
        depths.push(depth);
        values.push(measure.log_negativity);

        if let Some(rule) = early_stop {
            running_max = running_max.max(measure.log_negativity);
            if measure.log_negativity < rule.fraction * running_max {
                below_count += 1;
                if below_count >= rule.patience {
                    break;
                }
            } else {
                below_count = 0;
            }
        }
    }
    Ok(SampleTrace {
        num_qubits: spec.num_qubits,
        error_rate: spec.error_rate,
        depths,
        log_negativity: values,
    })
}
