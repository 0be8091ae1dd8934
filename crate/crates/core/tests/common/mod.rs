//! Independent oracles for the integration tests. Everything here takes the
//! slow, obviously-correct path: dense O(8^N) matrix algebra and a hand-rolled
//! Jacobi eigensolver, sharing no code with the implementation under test.

#![allow(dead_code)]

use negat_core::gates::RngStream;
use negat_core::qstate::DensityMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn zeros(dim: usize) -> Vec<C> {
    vec![c(0.0, 0.0); dim * dim]
}

pub fn identity(dim: usize) -> Vec<C> {
    let mut m = zeros(dim);
    for i in 0..dim {
        m[i * dim + i] = c(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &[C], b: &[C], dim: usize) -> Vec<C> {
    let mut out = zeros(dim);
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == c(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

pub fn dagger(a: &[C], dim: usize) -> Vec<C> {
    let mut out = zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            out[j * dim + i] = a[i * dim + j].conj();
        }
    }
    out
}

/// u rho u^dagger by plain dense multiplication.
pub fn conjugate(u: &[C], rho: &[C], dim: usize) -> Vec<C> {
    matmul(&matmul(u, rho, dim), &dagger(u, dim), dim)
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Embed a 4x4 gate on the (1-based) qubit pair (a, b) of an n-qubit space:
/// U[r][c] = g[2 r_a + r_b][2 c_a + c_b] when all other bits agree, else 0.
pub fn embed_two_qubit(g: &[[C; 4]; 4], n: usize, a: usize, b: usize) -> Vec<C> {
    let dim = 1usize << n;
    let (pa, pb) = (a - 1, b - 1);
    let rest_mask = (dim - 1) ^ (1 << pa) ^ (1 << pb);
    let mut u = zeros(dim);
    for r in 0..dim {
        for col in 0..dim {
            if r & rest_mask != col & rest_mask {
                continue;
            }
            let gr = 2 * ((r >> pa) & 1) + ((r >> pb) & 1);
            let gc = 2 * ((col >> pa) & 1) + ((col >> pb) & 1);
            u[r * dim + col] = g[gr][gc];
        }
    }
    u
}

/// Embed a 2x2 gate on (1-based) qubit q.
pub fn embed_one_qubit(g: &[[C; 2]; 2], n: usize, q: usize) -> Vec<C> {
    let dim = 1usize << n;
    let pq = q - 1;
    let rest_mask = (dim - 1) ^ (1 << pq);
    let mut u = zeros(dim);
    for r in 0..dim {
        for col in 0..dim {
            if r & rest_mask != col & rest_mask {
                continue;
            }
            u[r * dim + col] = g[(r >> pq) & 1][(col >> pq) & 1];
        }
    }
    u
}

pub fn pauli(which: usize) -> [[C; 2]; 2] {
    match which {
        0 => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        1 => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        2 => [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        _ => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
    }
}

/// The 15-term depolarizing sum, straight from its definition:
/// (1 - p) rho + (p/15) sum_{W != I(x)I} W rho W with W = P_i (x) P_j.
pub fn depolarize_oracle(rho: &[C], n: usize, p: f64, a: usize, b: usize) -> Vec<C> {
    let dim = 1usize << n;
    let mut out: Vec<C> = rho.iter().map(|z| z * (1.0 - p)).collect();
    for i in 0..4 {
        for j in 0..4 {
            if i == 0 && j == 0 {
                continue;
            }
            let w = matmul(
                &embed_one_qubit(&pauli(i), n, a),
                &embed_one_qubit(&pauli(j), n, b),
                dim,
            );
            // every W is Hermitian, so W rho W == W rho W^dagger
            let term = conjugate(&w, rho, dim);
            for (o, t) in out.iter_mut().zip(term) {
                *o += t * (p / 15.0);
            }
        }
    }
    out
}

/// Random density matrix from the Hilbert-Schmidt ensemble: G G^dagger / tr
/// for a Ginibre G.
pub fn random_density_matrix(rng: &mut RngStream, n: usize) -> DensityMatrix {
    let dim = 1usize << n;
    let mut g = zeros(dim);
    for z in g.iter_mut() {
        *z = c(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let mut rho = matmul(&g, &dagger(&g, dim), dim);
    let tr: f64 = (0..dim).map(|i| rho[i * dim + i].re).sum();
    for z in rho.iter_mut() {
        *z /= tr;
    }
    DensityMatrix::from_entries(n, rho).unwrap()
}

/// All eigenvalues of a Hermitian matrix via cyclic Jacobi on the real
/// symmetric embedding [[A, -B], [B, A]] (each eigenvalue of A + iB shows up
/// twice). Independent of LAPACK; fine for the small fixture matrices.
pub fn jacobi_hermitian_eigenvalues(h: &[C], dim: usize) -> Vec<f64> {
    let d2 = 2 * dim;
    let mut m = vec![0.0f64; d2 * d2];
    for i in 0..dim {
        for j in 0..dim {
            let z = h[i * dim + j];
            m[i * d2 + j] = z.re;
            m[i * d2 + (j + dim)] = -z.im;
            m[(i + dim) * d2 + j] = z.im;
            m[(i + dim) * d2 + (j + dim)] = z.re;
        }
    }
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..d2 {
            for q in (p + 1)..d2 {
                off += m[p * d2 + q].abs();
            }
        }
        if off < 1e-13 {
            break;
        }
        for p in 0..d2 {
            for q in (p + 1)..d2 {
                let apq = m[p * d2 + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (2.0 * apq).atan2(m[q * d2 + q] - m[p * d2 + p]);
                let (s, co) = theta.sin_cos();
                for k in 0..d2 {
                    let mkp = m[k * d2 + p];
                    let mkq = m[k * d2 + q];
                    m[k * d2 + p] = co * mkp - s * mkq;
                    m[k * d2 + q] = s * mkp + co * mkq;
                }
                for k in 0..d2 {
                    let mpk = m[p * d2 + k];
                    let mqk = m[q * d2 + k];
                    m[p * d2 + k] = co * mpk - s * mqk;
                    m[q * d2 + k] = s * mpk + co * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..d2).map(|i| m[i * d2 + i]).collect();
    eig.sort_by(f64::total_cmp);
    // doubled spectrum: keep every other entry
    eig.into_iter().step_by(2).collect()
}

/// Bell projector |Phi+><Phi+| as a 2-qubit density matrix.
pub fn bell_projector() -> DensityMatrix {
    let mut rho = DensityMatrix::zeroed(2).unwrap();
    for &r in &[0usize, 3] {
        for &col in &[0usize, 3] {
            rho.set_entry(r, col, c(0.5, 0.0));
        }
    }
    rho
}

/// Werner state w |Phi+><Phi+| + (1 - w) I/4.
pub fn werner_state(w: f64) -> DensityMatrix {
    let bell = bell_projector();
    let mut rho = DensityMatrix::zeroed(2).unwrap();
    for r in 0..4 {
        for col in 0..4 {
            let mixed = if r == col { 0.25 } else { 0.0 };
            rho.set_entry(r, col, bell.entry(r, col) * w + c(mixed * (1.0 - w), 0.0));
        }
    }
    rho
}
