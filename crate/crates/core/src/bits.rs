//! Bit manipulation helpers for the little-endian qubit-index convention:
//! qubit `i` (1-based) lives on bit `i - 1` of a computational-basis index.

/// Insert a zero bit at `pos`, shifting higher bits left by one.
#[inline(always)]
pub fn insert_zero_bit(x: usize, pos: usize) -> usize {
    let low = x & ((1 << pos) - 1);
    ((x >> pos) << (pos + 1)) | low
}

/// Expand `x` over the index space with zero bits at `lo` and `hi` (`lo < hi`).
#[inline(always)]
pub fn insert_two_zero_bits(x: usize, lo: usize, hi: usize) -> usize {
    debug_assert!(lo < hi);
    insert_zero_bit(insert_zero_bit(x, lo), hi)
}

/// Bit of `x` at position `pos`.
#[cfg(test)]
pub fn bit(x: usize, pos: usize) -> usize {
    (x >> pos) & 1
}
