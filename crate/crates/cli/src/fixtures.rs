//! Analytic states served by `negat negativity` for smoke testing.

use negat_core::qstate::{init_product_state, DensityMatrix};
use negat_core::num_complex::Complex64;

/// |Phi+><Phi+| on two qubits: negativity 1/2, log negativity 1.
pub fn bell_pair() -> DensityMatrix {
    let mut rho = DensityMatrix::zeroed(2).expect("2 qubits supported");
    for &r in &[0usize, 3] {
        for &c in &[0usize, 3] {
            rho.set_entry(r, c, Complex64::new(0.5, 0.0));
        }
    }
    rho
}

/// w |Phi+><Phi+| + (1 - w) I/4; entangled for w > 1/3.
pub fn werner(w: f64) -> DensityMatrix {
    let bell = bell_pair();
    let mut rho = DensityMatrix::zeroed(2).expect("2 qubits supported");
    for r in 0..4 {
        for c in 0..4 {
            let mixed = if r == c { 0.25 * (1.0 - w) } else { 0.0 };
            rho.set_entry(r, c, bell.entry(r, c) * w + Complex64::new(mixed, 0.0));
        }
    }
    rho
}

/// Pure four-qubit product state: zero negativity across any cut.
pub fn product_state() -> DensityMatrix {
    init_product_state(4).expect("4 qubits supported")
}
