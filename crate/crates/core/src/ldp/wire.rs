//! Fixed-length binary encodings and the positional report index.
//!
//! For every mechanism the wire bits are the big-endian binary form of the
//! report index, so `decode(encode(r)) == r` and the index of a report is the
//! integer its wire bits spell (OLH first collapses its base-`g` digits).

use alloc::vec::Vec;

use super::{MechanismConfig, Report, Shape};
use crate::bits::{bits_to_u64, u64_to_bits};
use crate::Error;

impl MechanismConfig {
    pub fn encode(&self, report: &Report) -> Result<Vec<bool>, Error> {
        let mut out = Vec::with_capacity(self.report_len());
        self.encode_into(report, &mut out)?;
        Ok(out)
    }

    /// Appends the wire bits of `report` to `out`.
    pub fn encode_into(&self, report: &Report, out: &mut Vec<bool>) -> Result<(), Error> {
        self.validate_report(report)?;
        match report {
            Report::Unary(bits) => out.extend_from_slice(bits),
            _ => u64_to_bits(self.report_index(report)?, self.report_len(), out),
        }
        Ok(())
    }

    /// `Ok(None)` when the bits spell no valid report (KRR symbol `≥ k`, OLH
    /// value `≥ g^{m+1}`).
    pub fn decode(&self, bits: &[bool]) -> Result<Option<Report>, Error> {
        if bits.len() != self.report_len() {
            return Err(Error::LengthMismatch {
                expected: self.report_len(),
                actual: bits.len(),
            });
        }
        if let Shape::Unary = self.shape {
            return Ok(Some(Report::Unary(bits.to_vec())));
        }
        match self.index_to_report(bits_to_u64(bits)) {
            Ok(report) => Ok(Some(report)),
            Err(Error::IndexOutOfRange { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Positional value `Σ y_j · B^{ℓ−j}` of the report's digit vector.
    pub fn report_index(&self, report: &Report) -> Result<u64, Error> {
        self.validate_report(report)?;
        let index = match report {
            Report::Krr(y) => u64::from(*y),
            Report::Unary(bits) => {
                self.index_space()?;
                bits_to_u64(bits)
            }
            Report::Blh { hash, bit } => (hash << 1) | u64::from(*bit),
            Report::Olh { hash, value } => {
                let g = self.index_base();
                hash.iter()
                    .chain(core::iter::once(value))
                    .fold(0u64, |acc, &d| acc * g + u64::from(d))
            }
            Report::Hr(column) => *column,
        };
        Ok(index)
    }

    /// Inverse of [`MechanismConfig::report_index`]. Indices outside `[0, S)`
    /// and KRR indices in `[k, S)` are rejected with `IndexOutOfRange`.
    pub fn index_to_report(&self, index: u64) -> Result<Report, Error> {
        let space = self.index_space()?;
        let limit = match self.shape {
            Shape::Symbol { .. } => u64::from(self.k),
            _ => space,
        };
        if index >= limit {
            return Err(Error::IndexOutOfRange { index, size: limit });
        }
        let report = match self.shape {
            Shape::Symbol { .. } => Report::Krr(index as u32),
            Shape::Unary => {
                let mut bits = Vec::with_capacity(self.k as usize);
                u64_to_bits(index, self.k as usize, &mut bits);
                Report::Unary(bits)
            }
            Shape::BinaryHash { .. } => Report::Blh {
                hash: index >> 1,
                bit: index & 1 == 1,
            },
            Shape::PrimeHash { g, digits } => {
                // index < g^{m+1} <= u32::MAX^{m+1}; peel the last digit first
                let value = (index % u64::from(g)) as u32;
                let mut rest = index / u64::from(g);
                let mut hash = alloc::vec![0u32; digits];
                for slot in hash.iter_mut().rev() {
                    *slot = (rest % u64::from(g)) as u32;
                    rest /= u64::from(g);
                }
                Report::Olh { hash, value }
            }
            Shape::Hadamard { .. } => Report::Hr(index),
        };
        Ok(report)
    }

    /// The digit vector `y` whose positional value is the report index.
    pub fn index_digits(&self, report: &Report) -> Result<Vec<u32>, Error> {
        let index = self.report_index(report)?;
        let base = self.index_base();
        let len = self.index_len();
        if base == 2 {
            let mut bits = Vec::with_capacity(len);
            u64_to_bits(index, len, &mut bits);
            return Ok(bits.into_iter().map(u32::from).collect());
        }
        Ok(base_digits_u64(index, base, len))
    }
}

fn base_digits_u64(mut value: u64, base: u64, len: usize) -> Vec<u32> {
    let mut digits = alloc::vec![0u32; len];
    for slot in digits.iter_mut().rev() {
        *slot = (value % base) as u32;
        value /= base;
    }
    digits
}
