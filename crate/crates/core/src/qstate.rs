//! Dense density-matrix representation and state diagnostics.
//!
//! Basis convention: a computational-basis index `x` encodes qubit `i`
//! (1-based) on bit `i - 1`, i.e. `x = sum_i x_i * 2^(i-1)` with qubit 1 on
//! the least-significant bit. Subsystem A of a half-chain bipartition
//! (qubits `1..=N/2`) is therefore a contiguous low-bit block.

use crate::error::{Error, Result};
use crate::linalg;
use num_complex::Complex64;

/// Hard cap on the qubit count unless overridden through `NEGAT_MAX_QUBITS`.
pub const DEFAULT_MAX_QUBITS: usize = 14;

/// Maximum supported qubit count. `NEGAT_MAX_QUBITS` overrides the default
/// memory guard for experimentation.
pub fn max_qubits() -> usize {
    std::env::var("NEGAT_MAX_QUBITS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

/// Dense 2^N x 2^N density matrix, row-major, double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Zero matrix for `num_qubits` qubits. Accepts any qubit count within
    /// the memory guard (odd counts included); the evenness restriction
    /// applies only to the product-state entry point used by circuit runs.
    pub fn zeroed(num_qubits: usize) -> Result<Self> {
        if num_qubits < 1 || num_qubits > max_qubits() {
            return Err(Error::UnsupportedQubitCount {
                n: num_qubits,
                reason: format!("supported range is 1..={} (memory guard)", max_qubits()),
            });
        }
        let dim = 1usize << num_qubits;
        Ok(Self {
            num_qubits,
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        })
    }

    /// Build from a dense row-major buffer of length `4^num_qubits`.
    pub fn from_entries(num_qubits: usize, entries: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        if num_qubits < 1 || num_qubits > max_qubits() {
            return Err(Error::UnsupportedQubitCount {
                n: num_qubits,
                reason: format!("supported range is 1..={} (memory guard)", max_qubits()),
            });
        }
        Ok(Self {
            num_qubits,
            dim,
            entries,
        })
    }

    /// Maximally mixed state I / 2^N.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        let mut state = Self::zeroed(num_qubits)?;
        let p = 1.0 / state.dim as f64;
        for i in 0..state.dim {
            state.entries[i * state.dim + i] = Complex64::new(p, 0.0);
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn set_entry(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    /// Tr rho^2; for a Hermitian matrix this is the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Max-norm deviation from Hermiticity, max |rho_ij - conj(rho_ji)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                let d = (self.entries[r * self.dim + c] - self.entries[c * self.dim + r].conj())
                    .norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Deviation report for the density-matrix invariants.
#[derive(Clone, Copy, Debug)]
pub struct StateDiagnostics {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

/// The |0...0> projector that every circuit run starts from.
///
/// Rejects odd qubit counts: the downstream half-chain bipartition needs
/// N_A = N_B = N/2.
pub fn init_product_state(num_qubits: usize) -> Result<DensityMatrix> {
    if num_qubits < 2 || num_qubits > max_qubits() {
        return Err(Error::UnsupportedQubitCount {
            n: num_qubits,
            reason: format!("circuit runs support 2..={} qubits", max_qubits()),
        });
    }
    if num_qubits % 2 != 0 {
        return Err(Error::UnsupportedQubitCount {
            n: num_qubits,
            reason: "qubit count must be even for the half-chain bipartition".into(),
        });
    }
    let mut state = DensityMatrix::zeroed(num_qubits)?;
    state.entries[0] = Complex64::new(1.0, 0.0);
    Ok(state)
}

/// Diagonal of the density matrix: the probability of each basis string.
pub fn diag_probabilities(state: &DensityMatrix) -> Vec<f64> {
    (0..state.dim).map(|i| state.entry(i, i).re).collect()
}

/// Full invariant report. Costs one eigendecomposition; intended for tests
/// and explicit validation passes, not inner loops.
pub fn state_diagnostics(state: &DensityMatrix) -> Result<StateDiagnostics> {
    let mut buf = state.entries.clone();
    let eig = linalg::hermitian_eigenvalues(&mut buf, state.dim)?;
    Ok(StateDiagnostics {
        trace_deviation: (state.trace() - Complex64::new(1.0, 0.0)).norm(),
        hermiticity_deviation: state.hermiticity_deviation(),
        min_eigenvalue: eig[0],
        purity: state.purity(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_is_the_zero_projector() {
        let state = init_product_state(2).unwrap();
        assert_eq!(state.dim(), 4);
        assert_eq!(state.entry(0, 0), Complex64::new(1.0, 0.0));
        for r in 0..4 {
            for c in 0..4 {
                if (r, c) != (0, 0) {
                    assert_eq!(state.entry(r, c), Complex64::new(0.0, 0.0));
                }
            }
        }
        assert!((state.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_is_pure() {
        let state = init_product_state(4).unwrap();
        assert!((state.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_probabilities_pin_endianness() {
        let state = init_product_state(2).unwrap();
        assert_eq!(diag_probabilities(&state), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn odd_and_out_of_range_counts_rejected() {
        assert!(init_product_state(3).is_err());
        assert!(init_product_state(0).is_err());
        assert!(init_product_state(16).is_err());
        // library-level states allow odd counts (used by scaling benchmarks)
        assert!(DensityMatrix::zeroed(3).is_ok());
    }

    #[test]
    fn maximally_mixed_diagnostics() {
        let state = DensityMatrix::maximally_mixed(2).unwrap();
        assert_eq!(diag_probabilities(&state), vec![0.25; 4]);
        let d = state_diagnostics(&state).unwrap();
        assert!(d.trace_deviation < 1e-12);
        assert!((d.purity - 0.25).abs() < 1e-12);
        assert!(d.min_eigenvalue > 0.25 - 1e-12);
    }

    #[test]
    fn pure_state_diagnostics() {
        let state = init_product_state(2).unwrap();
        let d = state_diagnostics(&state).unwrap();
        assert_eq!(d.trace_deviation, 0.0);
        assert_eq!(d.hermiticity_deviation, 0.0);
        assert!((d.purity - 1.0).abs() < 1e-15);
        assert!(d.min_eigenvalue > -1e-12);
    }

    #[test]
    fn from_entries_validates_length() {
        assert!(DensityMatrix::from_entries(2, vec![Complex64::new(0.0, 0.0); 15]).is_err());
    }
}
