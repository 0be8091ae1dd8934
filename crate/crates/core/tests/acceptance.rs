//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line
//! (visible with `--nocapture`). Fast criteria run by default; the sweep-scale
//! criteria are `#[ignore]`d and run with
//!
//!     cargo test --release --test acceptance -- --include-ignored --nocapture
//!
//! Sweep datasets persist under the cargo tmp dir and resume if interrupted,
//! so a killed run loses at most one sample. Criteria 5, 6 and 7 share one
//! dataset.

mod common;

use common::*;
use negat_core::channels::{
    apply_depolarizing, apply_noisy_gate, apply_two_qubit_unitary, NoiseModel, QubitPair,
};
use negat_core::circuit::{evolve_one_depth, CircuitSpec};
use negat_core::experiment::{
    run_sweep, DMaxRule, EmaxSummary, SweepConfig, SweepDataset,
};
use negat_core::gates::{fixed_sqrt_iswap, sample_haar_two_qubit, GateSet, RngStream};
use negat_core::negativity::{negativity_measures, Bipartition};
use negat_core::qstate::{init_product_state, state_diagnostics, DensityMatrix};
use negat_core::scaling::{collapse_fit, estimate_pc_crossing, fit_linear_volume_law, CollapseOptions};
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

// ---- pinned tolerances and configurations --------------------------------

const FIXTURE_TOL: f64 = 1e-10; // criterion 1
const ORACLE_TOL: f64 = 1e-12; // criterion 2
const ORACLE_STATES: usize = 200; // criterion 2
const TRACE_TOL: f64 = 1e-10; // criterion 3
const HERM_TOL: f64 = 1e-10; // criterion 3
const PSD_FLOOR: f64 = -1e-9; // criterion 3
const VOLUME_SLOPE: f64 = 0.5001; // criterion 4
const VOLUME_SLOPE_TOL: f64 = 0.03;
const VOLUME_INTERCEPT: f64 = -0.4813; // criterion 4
const VOLUME_INTERCEPT_TOL: f64 = 0.15;
const AREA_LAW_SLOPE_MAX: f64 = 0.05; // criterion 5
const PC_BAND: (f64, f64) = (0.04, 0.07); // criterion 6
const NU_BAND: (f64, f64) = (1.0, 1.5); // criterion 7
const SYNTH_NU: f64 = 1.25; // criterion 7 self-consistency
const SYNTH_NU_TOL: f64 = 0.05;
const DEPOL_FINAL_E: f64 = 1e-3; // criterion 8
const GATE_BUDGET_MS: f64 = 50.0; // criterion 9
const GATE_RATIO_BAND: (f64, f64) = (3.0, 6.0); // criterion 9
const NEGATIVITY_BUDGET_S: f64 = 30.0; // criterion 9
const ISWAP_PC_BAND: (f64, f64) = (0.025, 0.055); // criterion 10 (stretch)

const SWEEP_SEED: u64 = 0x4e45474154; // shared by criteria 4-7 and 10
const SWEEP_RATES: [f64; 8] = [0.02, 0.04, 0.05, 0.06, 0.07, 0.08, 0.10, 0.14];

// criteria share the process; serialize so timing criteria run unperturbed
static GATEKEEPER: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    GATEKEEPER.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn tmp_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

// ---- criterion 1: analytic negativity fixtures ----------------------------

#[test]
fn criterion_1_analytic_fixtures() {
    let _guard = serial();
    let start = Instant::now();
    let cut2 = Bipartition::half_chain(2).unwrap();
    let bell = negativity_measures(&bell_projector(), &cut2).unwrap();
    let werner = negativity_measures(&werner_state(0.5), &cut2).unwrap();
    let cut4 = Bipartition::half_chain(4).unwrap();
    let product = negativity_measures(&init_product_state(4).unwrap(), &cut4).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let pass = (bell.negativity - 0.5).abs() <= FIXTURE_TOL
        && (bell.log_negativity - 1.0).abs() <= FIXTURE_TOL
        && (werner.log_negativity - 1.25f64.log2()).abs() <= FIXTURE_TOL
        && werner.negativity > 0.0
        && product.negativity.abs() <= FIXTURE_TOL
        && product.log_negativity.abs() <= FIXTURE_TOL
        && elapsed < 1.0;
    assert!(report(
        "1 [analytic negativity fixtures]",
        pass,
        &format!(
            "bell N={:.12} E={:.12}; werner E={:.12}; product E={:.3e}; {:.2} s",
            bell.negativity, bell.log_negativity, werner.log_negativity,
            product.log_negativity, elapsed
        ),
    ));
}

// ---- criterion 2: channel oracle equivalence ------------------------------

#[test]
fn criterion_2_channel_oracles() {
    let _guard = serial();
    let mut rng = RngStream::new(SWEEP_SEED, 2);
    let mut worst_unitary = 0.0f64;
    let mut worst_depol = 0.0f64;
    let mut states = 0usize;
    for n in [2usize, 3] {
        let pairs: &[(usize, usize)] = match n {
            2 => &[(1, 2), (2, 1)],
            _ => &[(1, 2), (2, 3), (3, 1), (1, 3)],
        };
        for trial in 0..ORACLE_STATES / 2 {
            let rho = random_density_matrix(&mut rng, n);
            states += 1;
            let (a, b) = pairs[trial % pairs.len()];
            let pair = QubitPair::new(a, b).unwrap();
            // unitary conjugation vs dense Kronecker embedding
            let gate = if trial % 7 == 0 {
                fixed_sqrt_iswap()
            } else {
                sample_haar_two_qubit(&mut rng)
            };
            let mut fast = rho.clone();
            apply_two_qubit_unitary(&mut fast, &gate, pair).unwrap();
            let dense = conjugate(&embed_two_qubit(&gate.0, n, a, b), rho.as_slice(), 1 << n);
            worst_unitary = worst_unitary.max(max_abs_diff(fast.as_slice(), &dense));
            // depolarizing closed form vs the 15-term Pauli sum
            let p = (trial as f64 / ORACLE_STATES as f64).clamp(0.0, 1.0);
            let mut fast = rho.clone();
            apply_depolarizing(&mut fast, NoiseModel::new(p).unwrap(), pair).unwrap();
            let sum = depolarize_oracle(rho.as_slice(), n, p, a, b);
            worst_depol = worst_depol.max(max_abs_diff(fast.as_slice(), &sum));
        }
    }
    let pass = states == ORACLE_STATES && worst_unitary <= ORACLE_TOL && worst_depol <= ORACLE_TOL;
    assert!(report(
        "2 [channel oracle equivalence]",
        pass,
        &format!(
            "{states} states; max |unitary - dense| = {worst_unitary:.2e}, \
             max |depolarizing - 15-term| = {worst_depol:.2e} (tol {ORACLE_TOL:.0e})"
        ),
    ));
}

// ---- criterion 3: CPTP invariant suite ------------------------------------

#[test]
fn criterion_3_cptp_invariants() {
    let _guard = serial();
    let sizes = [2usize, 4, 6, 8];
    let rates = [0.0, 0.05, 0.2];
    let depths = [8usize, 16, 24, 32];
    let mut worst_trace = 0.0f64;
    let mut worst_herm = 0.0f64;
    let mut worst_min_eig = 0.0f64;
    let mut circuits = 0;
    for i in 0..20 {
        let spec = CircuitSpec {
            num_qubits: sizes[i % sizes.len()],
            max_depth: depths[i % depths.len()],
            error_rate: rates[i % rates.len()],
            gate_set: if i % 2 == 0 {
                GateSet::HaarRandom
            } else {
                GateSet::SqrtIswapPlusRandomSingles
            },
            seed: SWEEP_SEED,
            rng_stream: 300 + i as u64,
            record_every: 1,
            early_stop: None,
            noisy_single_qubit_gates: false,
        };
        circuits += 1;
        let mut state = init_product_state(spec.num_qubits).unwrap();
        let mut rng = RngStream::new(spec.seed, spec.rng_stream);
        for depth in 1..=spec.max_depth {
            evolve_one_depth(&mut state, &spec, depth, &mut rng).unwrap();
            let d = state_diagnostics(&state).unwrap();
            worst_trace = worst_trace.max(d.trace_deviation);
            worst_herm = worst_herm.max(d.hermiticity_deviation);
            worst_min_eig = worst_min_eig.min(d.min_eigenvalue);
        }
    }
    let pass = circuits == 20
        && worst_trace <= TRACE_TOL
        && worst_herm <= HERM_TOL
        && worst_min_eig >= PSD_FLOOR;
    assert!(report(
        "3 [CPTP invariant suite]",
        pass,
        &format!(
            "20 circuits (both gate sets, N<=8, D<=32, p in {{0, 0.05, 0.2}}): \
             max trace dev {worst_trace:.2e}, max herm dev {worst_herm:.2e}, \
             min eigenvalue {worst_min_eig:.2e} (floor {PSD_FLOOR:.0e})"
        ),
    ));
}

// ---- shared sweep dataset for criteria 5-7 --------------------------------

fn haar_sweep_config(dir: PathBuf) -> SweepConfig {
    SweepConfig {
        sizes: vec![4, 6, 8, 10, 12],
        error_rates: SWEEP_RATES.to_vec(),
        samples_per_point: 50,
        master_seed: SWEEP_SEED,
        gate_set: GateSet::HaarRandom,
        d_max: DMaxRule::Formula("4N".into()),
        record_every: 2,
        output_dir: dir,
        early_stop: true,
        noisy_single_qubit_gates: false,
    }
}

static HAAR_SWEEP: OnceLock<SweepDataset> = OnceLock::new();

fn haar_sweep() -> &'static SweepDataset {
    HAAR_SWEEP.get_or_init(|| {
        let config = haar_sweep_config(tmp_dir("acceptance-haar-sweep"));
        eprintln!(
            "building the shared (N, p) sweep (resumable in {}) ...",
            config.output_dir.display()
        );
        run_sweep(&config).expect("shared sweep")
    })
}

// ---- criterion 4: noiseless volume law -------------------------------------

#[test]
#[ignore = "sweep-scale (tens of minutes); run with --include-ignored"]
fn criterion_4_noiseless_volume_law() {
    let _guard = serial();
    let config = SweepConfig {
        sizes: vec![4, 6, 8, 10],
        error_rates: vec![0.0],
        samples_per_point: 50,
        master_seed: SWEEP_SEED,
        gate_set: GateSet::HaarRandom,
        d_max: DMaxRule::Formula("4N".into()),
        record_every: 1,
        output_dir: tmp_dir("acceptance-noiseless-sweep"),
        early_stop: true, // inert at p = 0
        noisy_single_qubit_gates: false,
    };
    let dataset = run_sweep(&config).unwrap();
    let points: Vec<(f64, f64)> = dataset
        .emax
        .iter()
        .map(|s| (s.num_qubits as f64, s.emax))
        .collect();
    let fit = fit_linear_volume_law(&points).unwrap();
    let pass = (fit.slope - VOLUME_SLOPE).abs() <= VOLUME_SLOPE_TOL
        && (fit.intercept - VOLUME_INTERCEPT).abs() <= VOLUME_INTERCEPT_TOL;
    assert!(report(
        "4 [noiseless volume law]",
        pass,
        &format!(
            "slope {:.4} (target {VOLUME_SLOPE} +- {VOLUME_SLOPE_TOL}), \
             intercept {:.4} (target {VOLUME_INTERCEPT} +- {VOLUME_INTERCEPT_TOL}); points {:?}",
            fit.slope, fit.intercept, points
        ),
    ));
}

// ---- criterion 5: area-law regime ------------------------------------------

#[test]
#[ignore = "sweep-scale (hours; shares the criterion-6 dataset); run with --include-ignored"]
fn criterion_5_area_law_regime() {
    let dataset = haar_sweep();
    let _guard = serial();
    let points: Vec<(f64, f64)> = dataset
        .emax
        .iter()
        .filter(|s| s.error_rate == 0.14 && s.num_qubits >= 6)
        .map(|s| (s.num_qubits as f64, s.emax))
        .collect();
    assert_eq!(points.len(), 4, "expected N in {{6, 8, 10, 12}} at p = 0.14");
    let fit = fit_linear_volume_law(&points).unwrap();
    let pass = fit.slope < AREA_LAW_SLOPE_MAX;
    assert!(report(
        "5 [area-law regime]",
        pass,
        &format!(
            "emax-vs-N slope at p=0.14: {:.4} per qubit (must be < {AREA_LAW_SLOPE_MAX}); points {:?}",
            fit.slope, points
        ),
    ));
}

// ---- criterion 6: critical point -------------------------------------------

#[test]
#[ignore = "sweep-scale (hours); run with --include-ignored"]
fn criterion_6_critical_point() {
    let dataset = haar_sweep();
    let _guard = serial();
    let estimate = estimate_pc_crossing(&dataset.emax).unwrap();
    let pass = (PC_BAND.0..=PC_BAND.1).contains(&estimate.p_c);
    assert!(report(
        "6 [critical point]",
        pass,
        &format!(
            "p_c = {:.4} +- {:.4} from {} pair crossings (band [{}, {}])",
            estimate.p_c,
            estimate.spread,
            estimate.crossings.len(),
            PC_BAND.0,
            PC_BAND.1
        ),
    ));
}

// ---- criterion 7: critical exponent ----------------------------------------

#[test]
fn criterion_7_synthetic_collapse_self_consistency() {
    let _guard = serial();
    let start = Instant::now();
    // known universal function with nu = 1.25, pc = 0.056, zero noise
    let mut rows = Vec::new();
    for &n in &[4usize, 6, 8, 10, 12, 14] {
        let nf = n as f64;
        let mut p = 0.02;
        while p <= 0.141 {
            let x = (p - 0.056) * nf.powf(1.0 / SYNTH_NU);
            let y = 1.1 / (1.0 + (2.2 * x).exp()) + 0.15;
            rows.push(EmaxSummary {
                num_qubits: n,
                error_rate: p,
                emax: y * nf.log2(),
                depth_at_max: 1,
                sem_at_max: 0.0,
                samples: 1,
                peak_at_boundary: false,
            });
            p += 0.005;
        }
    }
    let crossing = estimate_pc_crossing(&rows).unwrap();
    let fit = collapse_fit(
        &rows,
        &CollapseOptions {
            fixed_pc: Some(crossing.p_c),
            ..CollapseOptions::default()
        },
    )
    .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = (fit.nu - SYNTH_NU).abs() <= SYNTH_NU_TOL
        && (crossing.p_c - 0.056).abs() <= 0.003
        && elapsed < 60.0;
    assert!(report(
        "7a [synthetic collapse self-consistency]",
        pass,
        &format!(
            "recovered pc = {:.4} (true 0.056 +- 0.003), nu = {:.3} (true {SYNTH_NU} +- {SYNTH_NU_TOL}); {:.1} s",
            crossing.p_c, fit.nu, elapsed
        ),
    ));
}

#[test]
#[ignore = "sweep-scale (hours; shares the criterion-6 dataset); run with --include-ignored"]
fn criterion_7_critical_exponent_from_sweep() {
    let dataset = haar_sweep();
    let _guard = serial();
    let crossing = estimate_pc_crossing(&dataset.emax).unwrap();
    let fit = collapse_fit(
        &dataset.emax,
        &CollapseOptions {
            fixed_pc: Some(crossing.p_c),
            ..CollapseOptions::default()
        },
    )
    .unwrap();
    let pass = (NU_BAND.0..=NU_BAND.1).contains(&fit.nu);
    assert!(report(
        "7b [critical exponent, two-stage on sweep data]",
        pass,
        &format!(
            "nu = {:.3} with p_c fixed at {:.4} (band [{}, {}]), quality {:.3e}",
            fit.nu, crossing.p_c, NU_BAND.0, NU_BAND.1, fit.quality
        ),
    ));
}

// ---- criterion 8: deep-circuit depolarization ------------------------------

#[test]
fn criterion_8_deep_circuit_depolarization() {
    let _guard = serial();
    let samples = 10;
    let mut total = 0.0;
    for s in 0..samples {
        let spec = CircuitSpec {
            num_qubits: 8,
            max_depth: 100,
            error_rate: 0.1,
            gate_set: GateSet::HaarRandom,
            seed: SWEEP_SEED,
            rng_stream: 800 + s,
            record_every: 100, // only the final depth matters here
            early_stop: None,
            noisy_single_qubit_gates: false,
        };
        let trace = negat_core::circuit::run_circuit(&spec).unwrap();
        assert_eq!(trace.depths, vec![100]);
        total += trace.log_negativity[0];
    }
    let mean = total / samples as f64;
    let pass = mean < DEPOL_FINAL_E;
    assert!(report(
        "8 [deep-circuit depolarization]",
        pass,
        &format!(
            "averaged final log negativity {mean:.2e} over {samples} samples \
             (N=8, p=0.1, D=100; must be < {DEPOL_FINAL_E:.0e})"
        ),
    ));
}

// ---- criterion 9: performance contract -------------------------------------

fn bench_state(n: usize) -> DensityMatrix {
    let dim = 1usize << n;
    let mut state = DensityMatrix::zeroed(n).unwrap();
    for i in 0..dim {
        state.set_entry(i, i, num_complex::Complex64::new(1.0 / dim as f64, 0.0));
        if i + 1 < dim {
            state.set_entry(i, i + 1, num_complex::Complex64::new(1e-4, -1e-4));
            state.set_entry(i + 1, i, num_complex::Complex64::new(1e-4, 1e-4));
        }
    }
    state
}

fn median_gate_ms(state: &mut DensityMatrix, reps: usize) -> f64 {
    let mut rng = RngStream::new(SWEEP_SEED, 900);
    let gate = sample_haar_two_qubit(&mut rng);
    let noise = NoiseModel::new(0.05).unwrap();
    let n = state.num_qubits();
    let pair = QubitPair::new(n / 2, n / 2 + 1).unwrap();
    apply_noisy_gate(state, &gate, noise, pair).unwrap(); // warm-up
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        apply_noisy_gate(state, &gate, noise, pair).unwrap();
        times.push(t.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(f64::total_cmp);
    times[reps / 2]
}

#[test]
fn criterion_9_performance_contract() {
    let _guard = serial();
    // wall time of the shipped operation (row-parallel path)
    let t12 = median_gate_ms(&mut bench_state(12), 7);
    // asymptotic O(4^N) scaling is a single-thread property; measure the
    // N=11 -> N=12 ratio inside a one-thread pool
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let (t11_seq, t12_seq) = pool.install(|| {
        (
            median_gate_ms(&mut bench_state(11), 7),
            median_gate_ms(&mut bench_state(12), 5),
        )
    });
    let ratio = t12_seq / t11_seq;

    // full half-chain negativity at N = 12 on a lightly evolved state
    let mut state = init_product_state(12).unwrap();
    let spec = CircuitSpec {
        num_qubits: 12,
        max_depth: 2,
        error_rate: 0.05,
        gate_set: GateSet::HaarRandom,
        seed: SWEEP_SEED,
        rng_stream: 901,
        record_every: 1,
        early_stop: None,
        noisy_single_qubit_gates: false,
    };
    let mut rng = RngStream::new(spec.seed, spec.rng_stream);
    for depth in 1..=2 {
        evolve_one_depth(&mut state, &spec, depth, &mut rng).unwrap();
    }
    let t = Instant::now();
    let res = negativity_measures(&state, &Bipartition::half_chain(12).unwrap()).unwrap();
    let t_neg = t.elapsed().as_secs_f64();

    let pass_gate = t12 <= GATE_BUDGET_MS;
    let pass_ratio = (GATE_RATIO_BAND.0..=GATE_RATIO_BAND.1).contains(&ratio);
    let pass_neg = t_neg <= NEGATIVITY_BUDGET_S;
    let pass = pass_gate && pass_ratio && pass_neg;
    assert!(report(
        "9 [performance contract]",
        pass,
        &format!(
            "noisy gate at N=12: {t12:.1} ms (budget {GATE_BUDGET_MS} ms); \
             single-thread scaling N=11->12: {t11_seq:.1} -> {t12_seq:.1} ms, ratio {ratio:.2} \
             (band [{}, {}]); negativity at N=12: {t_neg:.1} s (budget {NEGATIVITY_BUDGET_S} s, E = {:.4})",
            GATE_RATIO_BAND.0, GATE_RATIO_BAND.1, res.log_negativity
        ),
    ));
}

// ---- criterion 10: sqrt-iSWAP gate set (stretch) ---------------------------

#[test]
#[ignore = "sweep-scale (about an hour); non-fatal stretch criterion; run with --include-ignored"]
fn criterion_10_sqrt_iswap_variant() {
    let _guard = serial();
    let config = SweepConfig {
        sizes: vec![4, 6, 8, 10],
        error_rates: SWEEP_RATES.to_vec(),
        samples_per_point: 50,
        master_seed: SWEEP_SEED,
        gate_set: GateSet::SqrtIswapPlusRandomSingles,
        d_max: DMaxRule::Formula("4N".into()),
        record_every: 2,
        output_dir: tmp_dir("acceptance-iswap-sweep"),
        early_stop: true,
        noisy_single_qubit_gates: false,
    };
    let dataset = run_sweep(&config).unwrap();
    let outcome = estimate_pc_crossing(&dataset.emax);
    // stretch criterion: report the band check but only hard-fail if the
    // sweep itself breaks (the gate set already passes criteria 1-3)
    match outcome {
        Ok(estimate) => {
            let in_band = (ISWAP_PC_BAND.0..=ISWAP_PC_BAND.1).contains(&estimate.p_c);
            report(
                "10 [sqrt-iSWAP variant, stretch]",
                in_band,
                &format!(
                    "p_c = {:.4} +- {:.4} (stretch band [{}, {}]); failure here alone \
                     does not fail the suite",
                    estimate.p_c, estimate.spread, ISWAP_PC_BAND.0, ISWAP_PC_BAND.1
                ),
            );
        }
        Err(err) => {
            report(
                "10 [sqrt-iSWAP variant, stretch]",
                false,
                &format!("no crossing estimate: {err}; stretch criterion, non-fatal"),
            );
        }
    }
}
