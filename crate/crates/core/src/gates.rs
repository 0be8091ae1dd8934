//! Gate sampling: Haar-random unitaries and the fixed sqrt-iSWAP + random
//! single-qubit gate set, all drawn from seeded, replayable streams.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

type C = Complex64;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Which two-qubit gates drive the circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateSet {
    /// Fresh Haar-random two-qubit unitary on every bond.
    #[serde(rename = "haar")]
    HaarRandom,
    /// Fixed sqrt-iSWAP on every bond, preceded by a layer of single-qubit
    /// gates drawn uniformly from {sqrt(X), sqrt(Y), sqrt(X+Y)}.
    #[serde(rename = "sqrt_iswap")]
    SqrtIswapPlusRandomSingles,
}

impl std::str::FromStr for GateSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "haar" => Ok(GateSet::HaarRandom),
            "sqrt_iswap" => Ok(GateSet::SqrtIswapPlusRandomSingles),
            other => Err(format!(
                "unknown gate set {other:?}; expected \"haar\" or \"sqrt_iswap\""
            )),
        }
    }
}

/// Seeded ChaCha stream. Identical (seed, stream) pairs replay identical
/// draw sequences; distinct stream indices on a shared seed are independent,
/// which is how sweep samples get their own reproducible randomness.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha12";

    pub fn new(master_seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
        rng.set_stream(stream);
        Self {
            master_seed,
            stream,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// 2x2 complex unitary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneQubitGate(pub [[C; 2]; 2]);

/// 4x4 complex unitary acting on an ordered qubit pair (a, b).
///
/// Matrix indices follow |s_a s_b>: index = 2 * bit(a) + bit(b), so the first
/// qubit of the pair sits on the high bit of the gate index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitGate(pub [[C; 4]; 4]);

fn assert_unitary<const D: usize>(m: &[[C; D]; D], tol: f64) {
    let mut worst = 0.0f64;
    for i in 0..D {
        for j in 0..D {
            let mut acc = C::new(0.0, 0.0);
            for k in 0..D {
                acc += m[k][i].conj() * m[k][j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - C::new(target, 0.0)).norm());
        }
    }
    assert!(worst <= tol, "gate failed unitarity check: {worst:.3e}");
}

impl OneQubitGate {
    pub fn identity() -> Self {
        Self([
            [C::new(1.0, 0.0), C::new(0.0, 0.0)],
            [C::new(0.0, 0.0), C::new(1.0, 0.0)],
        ])
    }

    pub fn pauli_x() -> Self {
        Self([
            [C::new(0.0, 0.0), C::new(1.0, 0.0)],
            [C::new(1.0, 0.0), C::new(0.0, 0.0)],
        ])
    }

    pub fn pauli_y() -> Self {
        Self([
            [C::new(0.0, 0.0), C::new(0.0, -1.0)],
            [C::new(0.0, 1.0), C::new(0.0, 0.0)],
        ])
    }

    pub fn pauli_z() -> Self {
        Self([
            [C::new(1.0, 0.0), C::new(0.0, 0.0)],
            [C::new(0.0, 0.0), C::new(-1.0, 0.0)],
        ])
    }

    /// sqrt(X) = exp(-i pi X / 4) up to global phase.
    pub fn sqrt_x() -> Self {
        let h = FRAC_1_SQRT_2;
        Self([
            [C::new(h, 0.0), C::new(0.0, -h)],
            [C::new(0.0, -h), C::new(h, 0.0)],
        ])
    }

    /// sqrt(Y) = exp(-i pi Y / 4) up to global phase.
    pub fn sqrt_y() -> Self {
        let h = FRAC_1_SQRT_2;
        Self([
            [C::new(h, 0.0), C::new(-h, 0.0)],
            [C::new(h, 0.0), C::new(h, 0.0)],
        ])
    }

    /// sqrt(X+Y) = exp(-i (pi/4) (X+Y)/sqrt(2)), the rotation by pi/2 about
    /// the axis halfway between X and Y.
    pub fn sqrt_xy() -> Self {
        let h = FRAC_1_SQRT_2;
        // off-diagonals: -i (1 +- i) / sqrt(2) scaled by 1/sqrt(2)
        Self([
            [C::new(h, 0.0), C::new(-0.5, -0.5)],
            [C::new(0.5, -0.5), C::new(h, 0.0)],
        ])
    }

    pub fn matrix(&self) -> &[[C; 2]; 2] {
        &self.0
    }
}

impl TwoQubitGate {
    pub fn identity() -> Self {
        let mut m = [[C::new(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = C::new(1.0, 0.0);
        }
        Self(m)
    }

    /// Kronecker product g_a (x) g_b in the |s_a s_b> index convention.
    pub fn kron(a: &OneQubitGate, b: &OneQubitGate) -> Self {
        let mut m = [[C::new(0.0, 0.0); 4]; 4];
        for ra in 0..2 {
            for rb in 0..2 {
                for ca in 0..2 {
                    for cb in 0..2 {
                        m[2 * ra + rb][2 * ca + cb] = a.0[ra][ca] * b.0[rb][cb];
                    }
                }
            }
        }
        Self(m)
    }

    pub fn matrix(&self) -> &[[C; 4]; 4] {
        &self.0
    }
}

/// Haar-distributed unitary via Gram-Schmidt orthonormalization of a matrix
/// of i.i.d. standard complex Gaussians. Column-wise orthonormalization is a
/// QR factorization whose triangular factor has a real-positive diagonal, the
/// gauge that makes the Q factor Haar-distributed (no extra phase fix needed).
fn haar_unitary<const D: usize>(rng: &mut RngStream) -> [[C; D]; D] {
    loop {
        let mut cols = [[C::new(0.0, 0.0); D]; D];
        for col in cols.iter_mut() {
            for z in col.iter_mut() {
                *z = C::new(rng.standard_normal(), rng.standard_normal());
            }
        }
        let mut singular = false;
        for j in 0..D {
            for k in 0..j {
                let mut proj = C::new(0.0, 0.0);
                for i in 0..D {
                    proj += cols[k][i].conj() * cols[j][i];
                }
                for i in 0..D {
                    let correction = proj * cols[k][i];
                    cols[j][i] -= correction;
                }
            }
            let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 {
                singular = true;
                break;
            }
            for z in cols[j].iter_mut() {
                *z /= norm;
            }
        }
        if singular {
            // measure-zero event; draw a fresh Gaussian matrix
            continue;
        }
        let mut m = [[C::new(0.0, 0.0); D]; D];
        for (j, col) in cols.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                m[i][j] = *z;
            }
        }
        return m;
    }
}

/// Haar-random two-qubit gate.
pub fn sample_haar_two_qubit(rng: &mut RngStream) -> TwoQubitGate {
    let gate = TwoQubitGate(haar_unitary::<4>(rng));
    debug_assert!({
        assert_unitary(&gate.0, 1e-12);
        true
    });
    gate
}

/// Haar-random single-qubit gate.
pub fn sample_haar_one_qubit(rng: &mut RngStream) -> OneQubitGate {
    let gate = OneQubitGate(haar_unitary::<2>(rng));
    debug_assert!({
        assert_unitary(&gate.0, 1e-12);
        true
    });
    gate
}

/// The standard sqrt-iSWAP: identity on |00>, |11>; the quarter-iSWAP block
/// [[1, i], [i, 1]] / sqrt(2) on span{|01>, |10>}.
pub fn fixed_sqrt_iswap() -> TwoQubitGate {
    let h = FRAC_1_SQRT_2;
    let o = C::new(0.0, 0.0);
    let l = C::new(1.0, 0.0);
    TwoQubitGate([
        [l, o, o, o],
        [o, C::new(h, 0.0), C::new(0.0, h), o],
        [o, C::new(0.0, h), C::new(h, 0.0), o],
        [o, o, o, l],
    ])
}

/// Uniform draw from {sqrt(X), sqrt(Y), sqrt(X+Y)}.
pub fn sample_single_qubit_gate(rng: &mut RngStream) -> OneQubitGate {
    match rng.rng.random_range(0..3u8) {
        0 => OneQubitGate::sqrt_x(),
        1 => OneQubitGate::sqrt_y(),
        _ => OneQubitGate::sqrt_xy(),
    }
}
