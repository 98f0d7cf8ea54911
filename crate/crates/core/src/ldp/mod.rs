//! Frequency oracles under ε-local differential privacy.
//!
//! User values are 1-based (`x ∈ 1..=k`) at the API boundary. Report payloads
//! are stored 0-based, exactly as they appear on the wire.

mod estimate;
mod olh;
mod perturb;
mod wire;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::bits::ceil_log2;
use crate::Error;

pub use estimate::DistributionEstimate;
pub use olh::{choose_g, is_prime, olh_variance};

/// The six mechanisms, in their canonical reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MechanismKind {
    Krr,
    Rappor,
    Oue,
    Blh,
    Olh,
    Hr,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 6] = [
        MechanismKind::Krr,
        MechanismKind::Rappor,
        MechanismKind::Oue,
        MechanismKind::Blh,
        MechanismKind::Olh,
        MechanismKind::Hr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Krr => "KRR",
            MechanismKind::Rappor => "RAPPOR",
            MechanismKind::Oue => "OUE",
            MechanismKind::Blh => "BLH",
            MechanismKind::Olh => "OLH",
            MechanismKind::Hr => "HR",
        }
    }

    /// Stable small integer used to key random streams.
    pub fn id(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MechanismKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or(Error::InvalidMechanism {
                field: "kind",
                reason: "unknown mechanism name",
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Symbol { bits: usize },
    Unary,
    BinaryHash { bits: usize },
    PrimeHash { g: u32, digits: usize },
    Hadamard { order: usize },
}

/// A mechanism instantiated for domain size `k` and budget `ε`, with every
/// derived constant precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismConfig {
    kind: MechanismKind,
    k: u32,
    epsilon: f64,
    /// Probability of reporting the truthful symbol or bit.
    p: f64,
    /// Probability of any one specific untruthful symbol, or of a 0 turning into a 1.
    q: f64,
    shape: Shape,
}

impl MechanismConfig {
    pub fn new(kind: MechanismKind, k: u32, epsilon: f64) -> Result<Self, Error> {
        if k < 2 {
            return Err(Error::InvalidMechanism {
                field: "k",
                reason: "domain size must be at least 2",
            });
        }
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::InvalidMechanism {
                field: "epsilon",
                reason: "privacy budget must be non-negative",
            });
        }
        // e^{-ε} keeps every constant finite as ε grows.
        let inv = libm::exp(-epsilon);
        let kf = f64::from(k);
        let (p, q, shape) = match kind {
            MechanismKind::Krr => {
                let p = 1.0 / (1.0 + (kf - 1.0) * inv);
                let q = inv / (1.0 + (kf - 1.0) * inv);
                (
                    p,
                    q,
                    Shape::Symbol {
                        bits: ceil_log2(u64::from(k)),
                    },
                )
            }
            MechanismKind::Rappor => {
                let half = libm::exp(-epsilon / 2.0);
                (1.0 / (1.0 + half), half / (1.0 + half), Shape::Unary)
            }
            MechanismKind::Oue => (0.5, inv / (1.0 + inv), Shape::Unary),
            MechanismKind::Blh => {
                let bits = ceil_log2(u64::from(k));
                if bits > 63 {
                    return Err(Error::InvalidMechanism {
                        field: "k",
                        reason: "too large for binary hashing",
                    });
                }
                (
                    1.0 / (1.0 + inv),
                    inv / (1.0 + inv),
                    Shape::BinaryHash { bits },
                )
            }
            MechanismKind::Olh => {
                let g = choose_g(epsilon)?;
                let digits = olh::digits_needed(k, g);
                let gf = f64::from(g);
                let p = 1.0 / (1.0 + (gf - 1.0) * inv);
                let q = inv / (1.0 + (gf - 1.0) * inv);
                let shape = Shape::PrimeHash { g, digits };
                checked_pow(u64::from(g), digits + 1).ok_or(Error::IndexOverflow {
                    base: u64::from(g),
                    len: digits + 1,
                })?;
                (p, q, shape)
            }
            MechanismKind::Hr => {
                let order = ceil_log2(u64::from(k) + 1);
                (
                    1.0 / (1.0 + inv),
                    inv / (1.0 + inv),
                    Shape::Hadamard { order },
                )
            }
        };
        Ok(Self {
            kind,
            k,
            epsilon,
            p,
            q,
            shape,
        })
    }

    pub fn kind(&self) -> MechanismKind {
        self.kind
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// OLH hash alphabet size.
    pub fn g(&self) -> Option<u32> {
        match self.shape {
            Shape::PrimeHash { g, .. } => Some(g),
            _ => None,
        }
    }

    /// OLH base-`g` digits per input (`⌈log_g k⌉`).
    pub fn hash_digits(&self) -> Option<usize> {
        match self.shape {
            Shape::PrimeHash { digits, .. } => Some(digits),
            _ => None,
        }
    }

    /// BLH hash-vector bits (`⌈log₂ k⌉`).
    pub fn hash_bits(&self) -> Option<usize> {
        match self.shape {
            Shape::BinaryHash { bits } => Some(bits),
            _ => None,
        }
    }

    /// HR order `K = ⌈log₂(k+1)⌉`; the Hadamard matrix is `2^K × 2^K`.
    pub fn hadamard_order(&self) -> Option<usize> {
        match self.shape {
            Shape::Hadamard { order } => Some(order),
            _ => None,
        }
    }

    /// Wire report length in bits.
    pub fn report_len(&self) -> usize {
        match self.shape {
            Shape::Symbol { bits } => bits,
            Shape::Unary => self.k as usize,
            Shape::BinaryHash { bits } => bits + 1,
            Shape::PrimeHash { g, digits } => {
                // validated in new()
                ceil_log2(checked_pow(u64::from(g), digits + 1).unwrap_or(u64::MAX))
            }
            Shape::Hadamard { order } => order,
        }
    }

    /// Alphabet `B` of the report viewed as a digit vector: `g` for OLH, 2 otherwise.
    pub fn index_base(&self) -> u64 {
        match self.shape {
            Shape::PrimeHash { g, .. } => u64::from(g),
            _ => 2,
        }
    }

    /// Number of digits `ℓ` of the report viewed as a digit vector.
    pub fn index_len(&self) -> usize {
        match self.shape {
            Shape::PrimeHash { digits, .. } => digits + 1,
            _ => self.report_len(),
        }
    }

    /// Size `S = B^ℓ` of the report index space.
    pub fn index_space(&self) -> Result<u64, Error> {
        let (base, len) = (self.index_base(), self.index_len());
        checked_pow(base, len).ok_or(Error::IndexOverflow { base, len })
    }

    pub(crate) fn check_input(&self, x: u32) -> Result<u32, Error> {
        if x == 0 || x > self.k {
            Err(Error::DomainViolation {
                value: x,
                k: self.k,
            })
        } else {
            Ok(x - 1)
        }
    }

    fn mismatch(&self) -> Error {
        Error::ReportMismatch {
            expected: self.kind.name(),
        }
    }
}

pub(crate) fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    (0..exp).try_fold(1u64, |acc, _| acc.checked_mul(base))
}

/// A mechanism output. Payloads are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Report {
    /// KRR symbol in `0..k`.
    Krr(u32),
    /// RAPPOR / OUE perturbed one-hot vector of length `k`.
    Unary(Vec<bool>),
    /// BLH hash vector (big-endian `d`-bit integer) and randomized hash bit.
    Blh { hash: u64, bit: bool },
    /// OLH hash digits `r_1..r_m` and randomized hash value, all in `0..g`.
    Olh { hash: Vec<u32>, value: u32 },
    /// HR column index in `0..2^K`.
    Hr(u64),
}

/// `⟨a, b⟩ mod 2` for bit vectors packed into integers.
pub(crate) fn parity(a: u64, b: u64) -> bool {
    (a & b).count_ones() & 1 == 1
}

/// Whether column `column` lies in the positive support `S_x` of the Hadamard
/// row indexed by the 1-based value `x`.
pub fn hadamard_positive(x: u32, column: u64) -> bool {
    !parity(u64::from(x), column)
}
