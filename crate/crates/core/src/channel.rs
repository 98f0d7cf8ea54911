//! Diffusion channel with a fully absorbing spherical receiver.
//!
//! A 1-bit releases `M` molecules at the start of its slot; each molecule is
//! absorbed in one of the next `I` slots or not at all, so a single emission is
//! one multinomial draw over the channel coefficients. Counts from every past
//! emission superpose (inter-symbol interference), receiver noise is added, and
//! the receiver thresholds the per-slot count.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::Error;

/// Physical constants of one transmitter/receiver link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Diffusion coefficient `D` in μm²/s.
    pub diffusion: f64,
    /// Receiver radius `r_R` in μm.
    pub receiver_radius: f64,
    /// Center-to-center transmitter/receiver distance `r0` in μm.
    pub distance: f64,
    /// Signal interval `t_s` in seconds.
    pub slot_duration: f64,
    /// Molecules released per 1-bit.
    pub molecules: u64,
    /// Channel memory `I` in slots.
    pub memory: usize,
    /// Variance of the additive counting noise.
    pub noise_variance: f64,
}

impl Default for ChannelParams {
    /// Insulin-like link used throughout the literature: D = 79.4 μm²/s,
    /// r_R = 5 μm, r0 = 10 μm, t_s = 1 s, M = 1000, I = 200, no noise.
    fn default() -> Self {
        Self {
            diffusion: 79.4,
            receiver_radius: 5.0,
            distance: 10.0,
            slot_duration: 1.0,
            molecules: 1000,
            memory: 200,
            noise_variance: 0.0,
        }
    }
}

impl ChannelParams {
    /// Checks only what the absorption law needs (`D`, `r_R`, `r0`).
    fn validate_geometry(&self) -> Result<(), Error> {
        if !(self.diffusion.is_finite() && self.diffusion > 0.0) {
            return Err(Error::InvalidChannel {
                field: "diffusion",
                reason: "must be positive and finite",
            });
        }
        if !(self.receiver_radius.is_finite() && self.receiver_radius > 0.0) {
            return Err(Error::InvalidChannel {
                field: "receiver_radius",
                reason: "must be positive and finite",
            });
        }
        if !(self.distance.is_finite() && self.distance > self.receiver_radius) {
            return Err(Error::InvalidChannel {
                field: "distance",
                reason: "transmitter must lie outside the receiver sphere",
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.validate_geometry()?;
        if !(self.slot_duration.is_finite() && self.slot_duration > 0.0) {
            return Err(Error::InvalidChannel {
                field: "slot_duration",
                reason: "must be positive and finite",
            });
        }
        if self.molecules == 0 {
            return Err(Error::InvalidChannel {
                field: "molecules",
                reason: "must be at least 1",
            });
        }
        if self.memory == 0 {
            return Err(Error::InvalidChannel {
                field: "memory",
                reason: "must be at least 1",
            });
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::InvalidChannel {
                field: "noise_variance",
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }
}

/// Probability that a released molecule is absorbed within `t` seconds:
/// `F(t) = (r_R / r0) · erfc((r0 − r_R) / √(4 D t))`.
pub fn hitting_probability(params: &ChannelParams, t: f64) -> Result<f64, Error> {
    params.validate_geometry()?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidChannel {
            field: "t",
            reason: "time must be non-negative",
        });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let ratio = params.receiver_radius / params.distance;
    let arg = (params.distance - params.receiver_radius) / libm::sqrt(4.0 * params.diffusion * t);
    Ok(ratio * libm::erfc(arg))
}

/// Per-slot absorption probabilities `p_1..p_I` followed by the residual mass
/// `p_{I+1}` of molecules not absorbed inside the memory window.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCoefficients {
    probs: Vec<f64>,
}

impl ChannelCoefficients {
    /// Builds coefficients from explicit in-window probabilities; the residual
    /// is appended. Entries must be non-negative with total at most 1.
    pub fn from_window(window: &[f64]) -> Result<Self, Error> {
        if window.is_empty() {
            return Err(Error::EmptyInput);
        }
        if window.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidChannel {
                field: "coefficients",
                reason: "entries must be finite and non-negative",
            });
        }
        let total: f64 = window.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidChannel {
                field: "coefficients",
                reason: "entries sum above one",
            });
        }
        let mut probs = window.to_vec();
        probs.push((1.0 - total).max(0.0));
        Ok(Self { probs })
    }

    /// All `I + 1` entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// `p_1..p_I`.
    pub fn window(&self) -> &[f64] {
        &self.probs[..self.probs.len() - 1]
    }

    pub fn memory(&self) -> usize {
        self.probs.len() - 1
    }

    /// `p_{I+1}`.
    pub fn residual(&self) -> f64 {
        self.probs[self.probs.len() - 1]
    }
}

/// `p_i = F(i·t_s) − F((i−1)·t_s)` for `i = 1..=I`, plus the residual.
pub fn channel_coefficients(params: &ChannelParams) -> Result<ChannelCoefficients, Error> {
    params.validate()?;
    let mut probs = Vec::with_capacity(params.memory + 1);
    let mut previous = 0.0;
    for i in 1..=params.memory {
        let current = hitting_probability(params, i as f64 * params.slot_duration)?;
        probs.push((current - previous).max(0.0));
        previous = current;
    }
    let absorbed: f64 = probs.iter().sum();
    probs.push(1.0 - absorbed);
    Ok(ChannelCoefficients { probs })
}

/// Draws the absorption slots of `molecules` molecules sequentially as
/// conditional binomials, calling `sink(i, count)` for the first `horizon`
/// in-window slots. Returns the molecules not reported to `sink`.
fn draw_arrivals<R, F>(
    molecules: u64,
    window: &[f64],
    horizon: usize,
    rng: &mut R,
    mut sink: F,
) -> u64
where
    R: Rng + ?Sized,
    F: FnMut(usize, u64),
{
    let mut remaining = molecules;
    let mut mass = 1.0;
    for (i, &p) in window.iter().take(horizon).enumerate() {
        if remaining == 0 {
            break;
        }
        let x = if p <= 0.0 {
            0
        } else if p >= mass {
            remaining
        } else {
            let cond = p / mass;
            Binomial::new(remaining, cond)
                .expect("conditional probability lies in [0, 1]")
                .sample(rng)
        };
        if x > 0 {
            sink(i, x);
        }
        remaining -= x;
        mass -= p;
    }
    remaining
}

/// One emission: `(X_1, …, X_I, X_{I+1}) ~ Multinomial(M; p_1, …, p_{I+1})`.
pub fn sample_emission<R: Rng + ?Sized>(
    molecules: u64,
    coeffs: &ChannelCoefficients,
    rng: &mut R,
) -> Vec<u64> {
    let window = coeffs.window();
    let mut out = vec![0u64; window.len() + 1];
    let rest = draw_arrivals(molecules, window, window.len(), rng, |i, x| out[i] = x);
    out[window.len()] = rest;
    out
}

/// Received molecule counts, one per signal interval.
pub type CountSequence = Vec<u32>;

/// A validated channel with its coefficients precomputed.
#[derive(Debug, Clone)]
pub struct Channel {
    params: ChannelParams,
    coeffs: ChannelCoefficients,
    noise: Option<Normal<f64>>,
}

impl Channel {
    pub fn new(params: ChannelParams) -> Result<Self, Error> {
        let coeffs = channel_coefficients(&params)?;
        let noise = if params.noise_variance > 0.0 {
            Some(
                Normal::new(0.0, libm::sqrt(params.noise_variance)).map_err(|_| {
                    Error::InvalidChannel {
                        field: "noise_variance",
                        reason: "not a valid normal deviation",
                    }
                })?,
            )
        } else {
            None
        };
        Ok(Self {
            params,
            coeffs,
            noise,
        })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn coefficients(&self) -> &ChannelCoefficients {
        &self.coeffs
    }

    /// Simulates the whole bit sequence: every 1-bit draws a fresh emission whose
    /// arrivals land in the following slots (late arrivals past the end are
    /// dropped), then rounded Gaussian noise is added per slot and totals are
    /// clamped at zero.
    pub fn transmit<R: Rng + ?Sized>(&self, bits: &[bool], rng: &mut R) -> CountSequence {
        let len = bits.len();
        let mut acc = vec![0u64; len];
        let window = self.coeffs.window();
        for (slot, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            let horizon = window.len().min(len - slot);
            let tail = &mut acc[slot..];
            draw_arrivals(self.params.molecules, window, horizon, rng, |i, x| {
                tail[i] += x
            });
        }
        self.finish(acc, rng)
    }

    /// Deterministic superposition of given emission samples, one per 1-bit in
    /// order, followed by the same noise stage as [`Channel::transmit`].
    pub fn superpose<R: Rng + ?Sized>(
        &self,
        bits: &[bool],
        emissions: &[Vec<u64>],
        rng: &mut R,
    ) -> Result<CountSequence, Error> {
        let ones = bits.iter().filter(|&&b| b).count();
        if emissions.len() != ones {
            return Err(Error::LengthMismatch {
                expected: ones,
                actual: emissions.len(),
            });
        }
        let len = bits.len();
        let memory = self.coeffs.memory();
        let mut acc = vec![0u64; len];
        let starts = bits.iter().enumerate().filter(|(_, &b)| b).map(|(s, _)| s);
        for (slot, emission) in starts.zip(emissions) {
            let horizon = memory.min(len - slot).min(emission.len());
            for (i, &x) in emission[..horizon].iter().enumerate() {
                acc[slot + i] += x;
            }
        }
        Ok(self.finish(acc, rng))
    }

    fn finish<R: Rng + ?Sized>(&self, acc: Vec<u64>, rng: &mut R) -> CountSequence {
        match &self.noise {
            None => acc.into_iter().map(saturate).collect(),
            Some(normal) => acc
                .into_iter()
                .map(|c| {
                    let w = libm::round(normal.sample(rng)) as i64;
                    saturate((c as i64).saturating_add(w).max(0) as u64)
                })
                .collect(),
        }
    }
}

fn saturate(c: u64) -> u32 {
    c.min(u64::from(u32::MAX)) as u32
}

/// Convenience wrapper building a [`Channel`] for a single transmission.
pub fn transmit<R: Rng + ?Sized>(
    bits: &[bool],
    params: &ChannelParams,
    rng: &mut R,
) -> Result<CountSequence, Error> {
    if bits.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(Channel::new(*params)?.transmit(bits, rng))
}

/// Bit `h` is 1 iff `counts[h] >= threshold`.
pub fn detect(counts: &[u32], threshold: u32) -> Vec<bool> {
    counts.iter().map(|&c| c >= threshold).collect()
}

/// Outcome of a threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    pub value: u32,
    /// Total errors (bits or symbols) at `value`.
    pub errors: u64,
}

/// Global threshold minimizing the total Hamming distance between detected and
/// transmitted bits over every user. Candidates are `1..=max_count + 1`; ties go
/// to the smallest threshold.
pub fn calibrate_threshold_ber<T, C>(tx: &[T], counts: &[C]) -> Result<Threshold, Error>
where
    T: AsRef<[bool]>,
    C: AsRef<[u32]>,
{
    if tx.len() != counts.len() {
        return Err(Error::LengthMismatch {
            expected: tx.len(),
            actual: counts.len(),
        });
    }
    let mut max = 0u32;
    let mut total = 0usize;
    for (bits, obs) in tx.iter().zip(counts) {
        let (bits, obs) = (bits.as_ref(), obs.as_ref());
        if bits.len() != obs.len() {
            return Err(Error::LengthMismatch {
                expected: bits.len(),
                actual: obs.len(),
            });
        }
        total += bits.len();
        max = obs.iter().copied().fold(max, u32::max);
    }
    if total == 0 {
        return Err(Error::EmptyInput);
    }

    // hist[c] = (zeros sent with count c, ones sent with count c)
    let mut hist = vec![(0u64, 0u64); max as usize + 1];
    for (bits, obs) in tx.iter().zip(counts) {
        for (&b, &c) in bits.as_ref().iter().zip(obs.as_ref()) {
            let slot = &mut hist[c as usize];
            if b {
                slot.1 += 1;
            } else {
                slot.0 += 1;
            }
        }
    }
    let zeros_total: u64 = hist.iter().map(|h| h.0).sum();

    // At threshold tau: missed ones have c < tau, false alarms are zeros with c >= tau.
    let (zeros_below_one, ones_below_one) = hist[0];
    let mut zeros_below = zeros_below_one;
    let mut ones_below = ones_below_one;
    let mut best = Threshold {
        value: 1,
        errors: ones_below + (zeros_total - zeros_below),
    };
    for tau in 2..=max as u64 + 1 {
        let (z, o) = hist[tau as usize - 1];
        zeros_below += z;
        ones_below += o;
        let errors = ones_below + (zeros_total - zeros_below);
        if errors < best.errors {
            best = Threshold {
                value: tau as u32,
                errors,
            };
        }
    }
    Ok(best)
}
