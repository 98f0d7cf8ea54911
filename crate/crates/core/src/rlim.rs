//! Run-length-limited ISI-mitigation coding.
//!
//! Codewords satisfy the (2,∞) constraint: any two 1-bits are separated by at
//! least two 0-bits. A boundary-safe codebook additionally forbids 1-bits in the
//! last two positions, so the constraint survives concatenation of codewords.
//! Codebooks hold the `S` lightest valid words of the shortest sufficient
//! length, ordered by (weight, lexicographic), so the all-zero word is index 0.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::bits::u64_to_bits;
use crate::ldp::{MechanismConfig, Report};
use crate::Error;

/// Largest codebook that will be materialized.
pub const MAX_CODEBOOK_SIZE: u64 = 1 << 22;

/// Whether `bits` satisfies the (2,∞) constraint, plus the tail rule when
/// `boundary_safe`.
pub fn is_constrained(bits: &[bool], boundary_safe: bool) -> bool {
    let mut last: Option<usize> = None;
    for (i, &b) in bits.iter().enumerate() {
        if b {
            if matches!(last, Some(prev) if i - prev <= 2) {
                return false;
            }
            last = Some(i);
        }
    }
    !boundary_safe || bits.iter().rev().take(2).all(|&b| !b)
}

fn word_is_constrained(word: u64, n: usize, boundary_safe: bool) -> bool {
    if word & (word >> 1) != 0 || word & (word >> 2) != 0 {
        return false;
    }
    if n < 64 && word >> n != 0 {
        return false;
    }
    !boundary_safe || word & 0b11 == 0
}

/// Number of length-`n` strings satisfying the constraint. Unrestricted counts
/// follow `a(n) = a(n−1) + a(n−3)` with `a(0..3) = 1, 2, 3`; boundary-safe
/// counts are `a(n−2)` (and 1 for `n < 2`). Saturates at `u64::MAX`.
pub fn rll_count(n: usize, boundary_safe: bool) -> u64 {
    let free = |len: usize| -> u64 {
        let mut a = [1u64, 2, 3];
        if len < 3 {
            return a[len];
        }
        for _ in 3..=len {
            let next = a[2].saturating_add(a[0]);
            a = [a[1], a[2], next];
        }
        a[2]
    };
    if boundary_safe {
        if n < 2 {
            1
        } else {
            free(n - 2)
        }
    } else {
        free(n)
    }
}

/// Deterministic last-wins repair. Scanning left to right, a 1-bit within two
/// positions of the most recently accepted 1-bit clears that earlier bit and is
/// accepted instead. With `boundary_safe`, 1-bits left in the final two
/// positions are cleared afterwards. Idempotent; the output always satisfies
/// [`is_constrained`].
pub fn rlim_correct(bits: &[bool], boundary_safe: bool) -> Vec<bool> {
    let mut out = bits.to_vec();
    let mut last: Option<usize> = None;
    for i in 0..out.len() {
        if out[i] {
            if let Some(prev) = last {
                if i - prev <= 2 {
                    out[prev] = false;
                }
            }
            last = Some(i);
        }
    }
    if boundary_safe {
        for b in out.iter_mut().rev().take(2) {
            *b = false;
        }
    }
    out
}

/// Minimum-weight (2,∞) codebook.
#[derive(Debug, Clone)]
pub struct Codebook {
    len: usize,
    boundary_safe: bool,
    words: Vec<u64>,
    index: HashMap<u64, u64>,
}

impl Codebook {
    /// Codeword length `n` is the smallest with `rll_count(n) ≥ size` (at least 1).
    pub fn build(size: u64, boundary_safe: bool) -> Result<Self, Error> {
        if size == 0 {
            return Err(Error::EmptyInput);
        }
        if size > MAX_CODEBOOK_SIZE {
            return Err(Error::CodebookTooLarge {
                size,
                limit: MAX_CODEBOOK_SIZE,
            });
        }
        let len = (1..)
            .find(|&n| rll_count(n, boundary_safe) >= size)
            .unwrap_or(1);

        let mut all = Vec::with_capacity(rll_count(len, boundary_safe) as usize);
        enumerate_words(len, boundary_safe, &mut all);
        all.sort_unstable_by_key(|&w| (w.count_ones(), w));
        all.truncate(size as usize);

        let index = all
            .iter()
            .enumerate()
            .map(|(i, &w)| (w, i as u64))
            .collect();
        Ok(Self {
            len,
            boundary_safe,
            words: all,
            index,
        })
    }

    /// Codebook sized for a mechanism's report index space.
    pub fn for_mechanism(cfg: &MechanismConfig, boundary_safe: bool) -> Result<Self, Error> {
        Self::build(cfg.index_space()?, boundary_safe)
    }

    /// Codeword length `n`.
    pub fn word_len(&self) -> usize {
        self.len
    }

    /// Number of codewords `S`.
    pub fn size(&self) -> u64 {
        self.words.len() as u64
    }

    pub fn boundary_safe(&self) -> bool {
        self.boundary_safe
    }

    /// Codewords as big-endian `n`-bit integers, in index order.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn word(&self, index: u64) -> Result<u64, Error> {
        self.words
            .get(index as usize)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                size: self.size(),
            })
    }

    /// Appends the codeword for `index` to `out`.
    pub fn encode_into(&self, index: u64, out: &mut Vec<bool>) -> Result<(), Error> {
        u64_to_bits(self.word(index)?, self.len, out);
        Ok(())
    }

    pub fn encode(&self, index: u64) -> Result<Vec<bool>, Error> {
        let mut out = Vec::with_capacity(self.len);
        self.encode_into(index, &mut out)?;
        Ok(out)
    }

    /// Exact-match lookup of an already constrained word.
    pub fn lookup(&self, bits: &[bool]) -> Option<u64> {
        if bits.len() != self.len {
            return None;
        }
        self.index.get(&crate::bits_to_u64(bits)).copied()
    }

    /// Repairs `bits` with [`rlim_correct`] and looks the result up. `Ok(None)`
    /// when the repaired word is not one of the selected codewords.
    pub fn decode(&self, bits: &[bool]) -> Result<Option<u64>, Error> {
        if bits.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: bits.len(),
            });
        }
        Ok(self.lookup(&rlim_correct(bits, self.boundary_safe)))
    }

    /// Text dump: one codeword per line as `0`/`1` characters, in index order.
    pub fn dump(&self) -> alloc::string::String {
        let mut s = alloc::string::String::with_capacity(self.words.len() * (self.len + 1));
        for &w in &self.words {
            for shift in (0..self.len).rev() {
                s.push(if (w >> shift) & 1 == 1 { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }
}

/// Every constrained word of length `len`, in no particular order.
fn enumerate_words(len: usize, boundary_safe: bool, out: &mut Vec<u64>) {
    // Grow from the most significant end; `gap` counts zeros since the last 1.
    fn grow(prefix: u64, placed: usize, gap: usize, len: usize, safe: bool, out: &mut Vec<u64>) {
        if placed == len {
            out.push(prefix);
            return;
        }
        grow(prefix << 1, placed + 1, gap + 1, len, safe, out);
        let tail_ok = !safe || placed + 2 < len;
        if gap >= 2 && tail_ok {
            grow((prefix << 1) | 1, placed + 1, 0, len, safe, out);
        }
    }
    grow(0, 0, 2, len, boundary_safe, out);
    debug_assert!(out
        .iter()
        .all(|&w| word_is_constrained(w, len, boundary_safe)));
}

/// Positional index `φ(y)` of a report.
pub fn report_index(report: &Report, cfg: &MechanismConfig) -> Result<u64, Error> {
    cfg.report_index(report)
}

/// Inverse of [`report_index`].
pub fn index_to_report(index: u64, cfg: &MechanismConfig) -> Result<Report, Error> {
    cfg.index_to_report(index)
}
