//! Server-side unbiased frequency estimators.

use alloc::vec;
use alloc::vec::Vec;

use super::perturb::{base_digits, prime_hash};
use super::{hadamard_positive, parity, MechanismConfig, Report, Shape};
use crate::Error;

/// Estimated distribution over `1..=k` (index 0 holds symbol 1). Entries are
/// the raw unbiased values and may fall outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionEstimate(pub Vec<f64>);

impl DistributionEstimate {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl MechanismConfig {
    /// Unbiased estimate of the input distribution from `N ≥ 1` reports.
    pub fn estimate(&self, reports: &[Report]) -> Result<DistributionEstimate, Error> {
        if reports.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = reports.len() as f64;
        let k = self.k as usize;
        // Per-candidate count of reports "supporting" that candidate.
        let mut support = vec![0u64; k];
        match self.shape {
            Shape::Symbol { .. } => {
                for report in reports {
                    match report {
                        Report::Krr(y) if (*y as usize) < k => support[*y as usize] += 1,
                        _ => return Err(self.mismatch()),
                    }
                }
            }
            Shape::Unary => {
                for report in reports {
                    match report {
                        Report::Unary(bits) if bits.len() == k => {
                            for (slot, &b) in support.iter_mut().zip(bits) {
                                *slot += u64::from(b);
                            }
                        }
                        _ => return Err(self.mismatch()),
                    }
                }
            }
            Shape::BinaryHash { .. } => {
                for report in reports {
                    let Report::Blh { hash, bit } = report else {
                        return Err(self.mismatch());
                    };
                    for (v, slot) in support.iter_mut().enumerate() {
                        *slot += u64::from(parity(*hash, v as u64) == *bit);
                    }
                }
            }
            Shape::PrimeHash { g, digits } => {
                let candidates: Vec<Vec<u32>> =
                    (0..self.k).map(|v| base_digits(v, g, digits)).collect();
                for report in reports {
                    let Report::Olh { hash, value } = report else {
                        return Err(self.mismatch());
                    };
                    if hash.len() != digits {
                        return Err(self.mismatch());
                    }
                    for (cand, slot) in candidates.iter().zip(support.iter_mut()) {
                        *slot += u64::from(prime_hash(hash, cand, g) == *value);
                    }
                }
            }
            Shape::Hadamard { .. } => {
                for report in reports {
                    let Report::Hr(column) = report else {
                        return Err(self.mismatch());
                    };
                    for (v, slot) in support.iter_mut().enumerate() {
                        *slot += u64::from(hadamard_positive(v as u32 + 1, *column));
                    }
                }
            }
        }

        // Support rate c_v has mean p_v·hit + (1 − p_v)·background.
        let (hit, background) = match self.shape {
            Shape::Symbol { .. } | Shape::Unary => (self.p, self.q),
            Shape::BinaryHash { .. } | Shape::Hadamard { .. } => (self.p, 0.5),
            Shape::PrimeHash { g, .. } => (self.p, 1.0 / f64::from(g)),
        };
        let scale = hit - background;
        Ok(DistributionEstimate(
            support
                .into_iter()
                .map(|c| (c as f64 / n - background) / scale)
                .collect(),
        ))
    }
}
