//! Client-side randomizers.

use alloc::vec::Vec;

use rand::Rng;

use super::{hadamard_positive, parity, MechanismConfig, Report, Shape};
use crate::Error;

/// Uniform draw from `0..n` excluding `skip`.
fn other_symbol<R: Rng + ?Sized>(rng: &mut R, n: u32, skip: u32) -> u32 {
    let u = rng.random_range(0..n - 1);
    if u >= skip {
        u + 1
    } else {
        u
    }
}

/// Big-endian base-`g` digits of `value`, `len` of them.
pub(crate) fn base_digits(mut value: u32, g: u32, len: usize) -> Vec<u32> {
    let mut digits = alloc::vec![0u32; len];
    for slot in digits.iter_mut().rev() {
        *slot = value % g;
        value /= g;
    }
    digits
}

/// `⟨r, x⟩ mod g`.
pub(crate) fn prime_hash(r: &[u32], x: &[u32], g: u32) -> u32 {
    let g = u64::from(g);
    let sum = r.iter().zip(x).fold(0u64, |acc, (&a, &b)| {
        (acc + u64::from(a) * u64::from(b)) % g
    });
    sum as u32
}

impl MechanismConfig {
    /// Randomizes the 1-based input `x`.
    pub fn perturb<R: Rng + ?Sized>(&self, x: u32, rng: &mut R) -> Result<Report, Error> {
        let x0 = self.check_input(x)?;
        let report = match self.shape {
            Shape::Symbol { .. } => {
                if rng.random_bool(self.p) {
                    Report::Krr(x0)
                } else {
                    Report::Krr(other_symbol(rng, self.k, x0))
                }
            }
            Shape::Unary => {
                let x0 = x0 as usize;
                let bits = (0..self.k as usize)
                    .map(|j| rng.random_bool(if j == x0 { self.p } else { self.q }))
                    .collect();
                Report::Unary(bits)
            }
            Shape::BinaryHash { bits } => {
                let hash = rng.random::<u64>() & low_mask(bits);
                let truth = parity(hash, u64::from(x0));
                let bit = if rng.random_bool(self.p) {
                    truth
                } else {
                    !truth
                };
                Report::Blh { hash, bit }
            }
            Shape::PrimeHash { g, digits } => {
                let xd = base_digits(x0, g, digits);
                let hash: Vec<u32> = (0..digits).map(|_| rng.random_range(0..g)).collect();
                let truth = prime_hash(&hash, &xd, g);
                let value = if rng.random_bool(self.p) {
                    truth
                } else {
                    other_symbol(rng, g, truth)
                };
                Report::Olh { hash, value }
            }
            Shape::Hadamard { order } => {
                let keep = rng.random_bool(self.p);
                let column = rng.random::<u64>() & low_mask(order);
                // Toggling a bit where x is set flips membership, pairing S_x with its
                // complement one-to-one, so the result stays uniform on the target half.
                let column = if hadamard_positive(x, column) == keep {
                    column
                } else {
                    column ^ (1u64 << x.trailing_zeros())
                };
                Report::Hr(column)
            }
        };
        Ok(report)
    }

    /// `Pr(output | x)`, conditioned on the hash vector for BLH and OLH.
    pub fn output_probability(&self, x: u32, report: &Report) -> Result<f64, Error> {
        let x0 = self.check_input(x)?;
        self.validate_report(report)?;
        let prob = match (self.shape, report) {
            (Shape::Symbol { .. }, Report::Krr(y)) => {
                if *y == x0 {
                    self.p
                } else {
                    self.q
                }
            }
            (Shape::Unary, Report::Unary(bits)) => bits
                .iter()
                .enumerate()
                .map(|(j, &b)| {
                    let on = if j == x0 as usize { self.p } else { self.q };
                    if b {
                        on
                    } else {
                        1.0 - on
                    }
                })
                .product(),
            (Shape::BinaryHash { .. }, Report::Blh { hash, bit }) => {
                if parity(*hash, u64::from(x0)) == *bit {
                    self.p
                } else {
                    1.0 - self.p
                }
            }
            (Shape::PrimeHash { g, digits }, Report::Olh { hash, value }) => {
                if prime_hash(hash, &base_digits(x0, g, digits), g) == *value {
                    self.p
                } else {
                    self.q
                }
            }
            (Shape::Hadamard { order }, Report::Hr(column)) => {
                let half = (1u64 << order) as f64 / 2.0;
                if hadamard_positive(x, *column) {
                    self.p / half
                } else {
                    (1.0 - self.p) / half
                }
            }
            _ => return Err(self.mismatch()),
        };
        Ok(prob)
    }

    /// A uniformly random valid report, used to replace undecodable ones.
    pub fn random_report<R: Rng + ?Sized>(&self, rng: &mut R) -> Report {
        match self.shape {
            Shape::Symbol { .. } => Report::Krr(rng.random_range(0..self.k)),
            Shape::Unary => Report::Unary((0..self.k).map(|_| rng.random_bool(0.5)).collect()),
            Shape::BinaryHash { bits } => Report::Blh {
                hash: rng.random::<u64>() & low_mask(bits),
                bit: rng.random_bool(0.5),
            },
            Shape::PrimeHash { g, digits } => Report::Olh {
                hash: (0..digits).map(|_| rng.random_range(0..g)).collect(),
                value: rng.random_range(0..g),
            },
            Shape::Hadamard { order } => Report::Hr(rng.random::<u64>() & low_mask(order)),
        }
    }

    /// Checks the report kind and payload ranges.
    pub fn validate_report(&self, report: &Report) -> Result<(), Error> {
        let ok = match (self.shape, report) {
            (Shape::Symbol { .. }, Report::Krr(y)) => *y < self.k,
            (Shape::Unary, Report::Unary(bits)) => bits.len() == self.k as usize,
            (Shape::BinaryHash { bits }, Report::Blh { hash, .. }) => *hash & !low_mask(bits) == 0,
            (Shape::PrimeHash { g, digits }, Report::Olh { hash, value }) => {
                hash.len() == digits && *value < g && hash.iter().all(|&d| d < g)
            }
            (Shape::Hadamard { order }, Report::Hr(column)) => *column & !low_mask(order) == 0,
            _ => return Err(self.mismatch()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMechanism {
                field: "report",
                reason: "payload outside the mechanism's range",
            })
        }
    }
}

pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}
