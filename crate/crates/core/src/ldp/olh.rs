//! Hash-alphabet selection for optimized local hashing.

use crate::Error;

/// Largest `e^ε` for which a hash alphabet is searched.
const MAX_G0: f64 = 2_147_483_647.0;

/// Deterministic trial division.
pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let n = u64::from(n);
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Relative estimator variance `(e^ε − 1 + g)² / ((e^ε − 1)² (g − 1))` for hash alphabet `g`.
pub fn olh_variance(g: u32, epsilon: f64) -> f64 {
    let a = libm::expm1(epsilon);
    let g = f64::from(g);
    (a + g) * (a + g) / (a * a * (g - 1.0))
}

/// Picks the prime nearest to `⌊e^ε⌋ + 1` from below or above with the smaller
/// variance; ties favor the smaller prime.
pub fn choose_g(epsilon: f64) -> Result<u32, Error> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidMechanism {
            field: "epsilon",
            reason: "privacy budget must be non-negative",
        });
    }
    let e = libm::exp(epsilon);
    if e >= MAX_G0 {
        return Err(Error::InvalidMechanism {
            field: "epsilon",
            reason: "too large for a prime hash alphabet",
        });
    }
    let g0 = libm::floor(e) as u32 + 1;
    let below = (2..=g0).rev().find(|&c| is_prime(c)).unwrap_or(2);
    let above = (g0.max(2)..)
        .find(|&c| is_prime(c))
        .expect("primes are unbounded");
    if olh_variance(above, epsilon) < olh_variance(below, epsilon) {
        Ok(above)
    } else {
        Ok(below)
    }
}

/// Smallest `m ≥ 1` with `g^m ≥ k`.
pub(crate) fn digits_needed(k: u32, g: u32) -> usize {
    let (k, g) = (u64::from(k), u64::from(g));
    let mut m = 1;
    let mut span = g;
    while span < k {
        span = span.saturating_mul(g);
        m += 1;
    }
    m
}
