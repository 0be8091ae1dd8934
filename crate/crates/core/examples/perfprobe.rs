use negat_core::channels::{apply_noisy_gate, NoiseModel, QubitPair};
use negat_core::gates::{sample_haar_two_qubit, RngStream};
use negat_core::negativity::{negativity_measures, Bipartition};
use negat_core::qstate::{init_product_state};
use std::time::Instant;

fn main() {
    let mut rng = RngStream::new(1, 0);
    for n in [11usize, 12] {
        // odd N: build via zeroed + set
        let mut state = if n % 2 == 0 {
            init_product_state(n).unwrap()
        } else {
            let mut s = negat_core::qstate::DensityMatrix::zeroed(n).unwrap();
            s.set_entry(0, 0, negat_core::num_complex::Complex64::new(1.0, 0.0));
            s
        };
        let gate = sample_haar_two_qubit(&mut rng);
        let noise = NoiseModel::new(0.05).unwrap();
        let pair = QubitPair::new(n / 2, n / 2 + 1).unwrap();
        apply_noisy_gate(&mut state, &gate, noise, pair).unwrap(); // warm
        let mut times = Vec::new();
        for _ in 0..7 {
            let t = Instant::now();
            apply_noisy_gate(&mut state, &gate, noise, pair).unwrap();
            times.push(t.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        println!("n={} noisy gate median {:.1} ms", n, times[3] * 1e3);
    }
    let mut state = init_product_state(12).unwrap();
    let mut rng2 = RngStream::new(2, 0);
    let spec = negat_core::circuit::CircuitSpec {
        num_qubits: 12, max_depth: 2, error_rate: 0.05,
        gate_set: negat_core::gates::GateSet::HaarRandom,
        seed: 3, rng_stream: 0, record_every: 1, early_stop: None,
        noisy_single_qubit_gates: false,
    };
    for d in 1..=2 {
        negat_core::circuit::evolve_one_depth(&mut state, &spec, d, &mut rng2).unwrap();
    }
    let t = Instant::now();
    let res = negativity_measures(&state, &Bipartition::half_chain(12).unwrap()).unwrap();
    println!("n=12 negativity {:.1} s (E = {:.4})", t.elapsed().as_secs_f64(), res.log_negativity);
}
