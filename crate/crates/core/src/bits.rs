//! Big-endian bit helpers shared by the wire encodings and the codebook.

use alloc::vec::Vec;

/// Writes the `width` low bits of `value`, most significant first.
pub fn u64_to_bits(value: u64, width: usize, out: &mut Vec<bool>) {
    debug_assert!(width <= 64);
    for shift in (0..width).rev() {
        out.push((value >> shift) & 1 == 1);
    }
}

/// Reads a big-endian bit slice of at most 64 bits.
pub fn bits_to_u64(bits: &[bool]) -> u64 {
    debug_assert!(bits.len() <= 64);
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
}

/// Total number of one-bits over every stream.
pub fn count_ones<S: AsRef<[bool]>>(streams: &[S]) -> u64 {
    streams
        .iter()
        .map(|s| s.as_ref().iter().filter(|&&b| b).count() as u64)
        .sum()
}

/// Smallest `w` with `2^w >= n` (so `0` for `n <= 1`).
pub(crate) fn ceil_log2(n: u64) -> usize {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as usize
    }
}
