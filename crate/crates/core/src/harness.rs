//! End-to-end experiments.
//!
//! One run draws `R` ground-truth distributions and, for each of `N` users, one
//! value per distribution. Every mechanism then perturbs those same values,
//! encodes the user's `R` reports into one contiguous bit stream, sends it over
//! an independent link with resources normalized to the unprivatized baseline,
//! detects, decodes and estimates. The figure of merit is the ℓ1 error averaged
//! over the `R` distributions.
//!
//! Random streams are keyed by (stage, mechanism, pipeline, user), so results
//! are identical for any worker count.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::bits::ceil_log2;
use crate::channel::{calibrate_threshold_ber, detect, Channel, ChannelParams, Threshold};
use crate::ldp::{MechanismConfig, MechanismKind, Report};
use crate::rlim::Codebook;
use crate::rng::{SeedTree, Stage};
use crate::Error;

/// How reports reach the server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pipeline {
    /// Reports are handed to the estimator untouched.
    Ideal,
    /// Plain wire encoding over the molecular channel.
    Uncoded,
    /// Reports mapped through a run-length-limited codebook.
    Rlim,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Ideal => "ideal",
            Pipeline::Uncoded => "uncoded",
            Pipeline::Rlim => "rlim",
        }
    }

    fn id(self) -> u64 {
        self as u64
    }
}

/// One experiment: a channel baseline, the mechanisms to compare and the
/// population to simulate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Baseline link; `slot_duration` and `molecules` are `t_s,0` and `M_0`.
    pub channel: ChannelParams,
    pub mechanisms: Vec<MechanismKind>,
    pub k: u32,
    pub epsilon: f64,
    /// Number of users `N`.
    pub users: usize,
    /// Ground-truth distributions per run `R`.
    pub distributions: usize,
    /// Users whose transmissions calibrate the coded detector.
    pub pilot_users: usize,
    pub boundary_safe: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel: ChannelParams::default(),
            mechanisms: MechanismKind::ALL.to_vec(),
            k: 16,
            epsilon: 1.0,
            users: 10_000,
            distributions: 100,
            pilot_users: 100,
            boundary_safe: true,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.channel.validate()?;
        if self.mechanisms.is_empty() {
            return Err(Error::InvalidExperiment {
                field: "mechanisms",
                reason: "at least one mechanism is required",
            });
        }
        if self.users == 0 {
            return Err(Error::InvalidExperiment {
                field: "users",
                reason: "at least one user is required",
            });
        }
        if self.distributions == 0 {
            return Err(Error::InvalidExperiment {
                field: "distributions",
                reason: "at least one distribution is required",
            });
        }
        for &kind in &self.mechanisms {
            MechanismConfig::new(kind, self.k, self.epsilon)?;
        }
        Ok(())
    }

    fn validate_pilot(&self) -> Result<(), Error> {
        if self.pilot_users == 0 || self.pilot_users > self.users {
            return Err(Error::InvalidExperiment {
                field: "pilot_users",
                reason: "must lie in [1, users]",
            });
        }
        Ok(())
    }
}

/// Unprivatized reference transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    /// `l_0 = ⌈log₂ k⌉`.
    pub report_len: usize,
    /// `W_0`.
    pub ones: u64,
    /// `t_s,0`.
    pub slot_duration: f64,
    /// `M_0`.
    pub molecules: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismResult {
    pub kind: MechanismKind,
    /// ℓ1 error averaged over the ground truths.
    pub l1_mean: f64,
    /// ℓ1 error per ground truth.
    pub l1: Vec<f64>,
    /// Calibrated detection threshold; `None` for the ideal pipeline.
    pub threshold: Option<u32>,
    /// Normalized `t_s,m`.
    pub slot_duration: f64,
    /// Normalized `M_m`.
    pub molecules: u64,
    /// Bits per report on the link (`l_m`, or the codeword length).
    pub report_len: usize,
    /// `W_m`.
    pub ones: u64,
    /// Undecodable reports replaced by random valid ones.
    pub invalid: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub pipeline: Pipeline,
    pub config: ExperimentConfig,
    pub baseline: Baseline,
    pub mechanisms: Vec<MechanismResult>,
}

impl ExperimentResult {
    pub fn get(&self, kind: MechanismKind) -> Option<&MechanismResult> {
        self.mechanisms.iter().find(|m| m.kind == kind)
    }
}

/// A point drawn uniformly from the probability simplex (flat Dirichlet via
/// normalized unit exponentials).
pub fn sample_simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    assert!(k >= 2, "simplex dimension must be at least 2");
    let mut draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    for d in &mut draws {
        *d /= total;
    }
    draws
}

/// `(l_0, W_0)` for the 1-based values sent in plain big-endian binary.
pub fn baseline_stats<I>(values: I, k: u32) -> Result<(usize, u64), Error>
where
    I: IntoIterator<Item = u32>,
{
    let mut ones = 0u64;
    for x in values {
        if x == 0 || x > k {
            return Err(Error::DomainViolation { value: x, k });
        }
        ones += u64::from((x - 1).count_ones());
    }
    Ok((ceil_log2(u64::from(k)), ones))
}

/// Equal total time and (nearly) equal total molecules:
/// `t_s,m = t_s,0 · l_0 / l_m` and `M_m = ⌊M_0 · W_0 / W_m⌉` (half to even,
/// at least 1; `M_0` when `W_m = 0`).
pub fn normalize_resources(
    baseline: &Baseline,
    report_len: usize,
    ones: u64,
) -> Result<(f64, u64), Error> {
    if report_len == 0 {
        return Err(Error::InvalidExperiment {
            field: "report_len",
            reason: "must be at least 1",
        });
    }
    let slot = baseline.slot_duration * baseline.report_len as f64 / report_len as f64;
    let molecules = if ones == 0 {
        baseline.molecules
    } else {
        let ideal = baseline.molecules as f64 * baseline.ones as f64 / ones as f64;
        (libm::rint(ideal) as u64).max(1)
    };
    Ok((slot, molecules))
}

pub fn l1_error(truth: &[f64], estimate: &[f64]) -> f64 {
    assert_eq!(
        truth.len(),
        estimate.len(),
        "ℓ1 of vectors of different lengths"
    );
    truth.iter().zip(estimate).map(|(a, b)| (a - b).abs()).sum()
}

#[cfg(feature = "parallel")]
fn map_users<T, F>(n: usize, f: F) -> Result<Vec<T>, Error>
where
    T: Send,
    F: Fn(usize) -> Result<T, Error> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_users<T, F>(n: usize, f: F) -> Result<Vec<T>, Error>
where
    F: Fn(usize) -> Result<T, Error>,
{
    (0..n).map(f).collect()
}

/// Ground truths and the users' true values, shared by every mechanism.
struct Population {
    truths: Vec<Vec<f64>>,
    /// `values[user][distribution]`, 1-based.
    values: Vec<Vec<u32>>,
}

fn draw_population(cfg: &ExperimentConfig, tree: &SeedTree) -> Result<Population, Error> {
    let k = cfg.k as usize;
    let truths: Vec<Vec<f64>> = (0..cfg.distributions)
        .map(|i| sample_simplex(k, &mut tree.stream(Stage::GroundTruth, 0, i as u64)))
        .collect();
    let cumulative: Vec<Vec<f64>> = truths
        .iter()
        .map(|p| {
            p.iter()
                .scan(0.0, |acc, &x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let values = map_users(cfg.users, |user| {
        let mut rng = tree.stream(Stage::Values, 0, user as u64);
        Ok(cumulative
            .iter()
            .map(|cdf| {
                let u: f64 = rng.random();
                let idx = cdf.partition_point(|&c| c <= u).min(k - 1);
                idx as u32 + 1
            })
            .collect())
    })?;
    Ok(Population { truths, values })
}

/// Per-mechanism state that does not depend on the pipeline.
struct Prepared {
    mech: MechanismConfig,
    /// `reports[user][distribution]`.
    reports: Vec<Vec<Report>>,
}

fn prepare(
    kind: MechanismKind,
    cfg: &ExperimentConfig,
    pop: &Population,
    tree: &SeedTree,
) -> Result<Prepared, Error> {
    let mech = MechanismConfig::new(kind, cfg.k, cfg.epsilon)?;
    let reports = map_users(cfg.users, |user| {
        let mut rng = tree.stream(Stage::Perturb, kind.id(), user as u64);
        pop.values[user]
            .iter()
            .map(|&x| mech.perturb(x, &mut rng))
            .collect()
    })?;
    Ok(Prepared { mech, reports })
}

/// Per-user outcome after the link: decoded reports and how many were replaced.
struct Received {
    reports: Vec<Report>,
    invalid: u64,
}

fn finish(
    prepared: Prepared,
    received: Vec<Received>,
    pop: &Population,
    link: Link,
) -> Result<MechanismResult, Error> {
    let r = pop.truths.len();
    let invalid = received.iter().map(|u| u.invalid).sum();
    let mut columns: Vec<Vec<Report>> =
        (0..r).map(|_| Vec::with_capacity(received.len())).collect();
    for user in received {
        for (col, rep) in columns.iter_mut().zip(user.reports) {
            col.push(rep);
        }
    }
    let mut l1 = Vec::with_capacity(r);
    for (truth, col) in pop.truths.iter().zip(&columns) {
        let est = prepared.mech.estimate(col)?;
        l1.push(l1_error(truth, est.as_slice()));
    }
    let l1_mean = l1.iter().sum::<f64>() / r as f64;
    Ok(MechanismResult {
        kind: prepared.mech.kind(),
        l1_mean,
        l1,
        threshold: link.threshold,
        slot_duration: link.slot_duration,
        molecules: link.molecules,
        report_len: link.report_len,
        ones: link.ones,
        invalid,
    })
}

struct Link {
    threshold: Option<u32>,
    slot_duration: f64,
    molecules: u64,
    report_len: usize,
    ones: u64,
}

fn baseline_of(cfg: &ExperimentConfig, pop: &Population) -> Result<Baseline, Error> {
    let (report_len, ones) = baseline_stats(pop.values.iter().flatten().copied(), cfg.k)?;
    Ok(Baseline {
        report_len,
        ones,
        slot_duration: cfg.channel.slot_duration,
        molecules: cfg.channel.molecules,
    })
}

fn normalized_channel(
    cfg: &ExperimentConfig,
    baseline: &Baseline,
    report_len: usize,
    ones: u64,
) -> Result<Channel, Error> {
    let (slot_duration, molecules) = normalize_resources(baseline, report_len, ones)?;
    Channel::new(ChannelParams {
        slot_duration,
        molecules,
        ..cfg.channel
    })
}

fn run_ideal_mechanism(prepared: Prepared, pop: &Population) -> Result<MechanismResult, Error> {
    let report_len = prepared.mech.report_len();
    let mut ones = 0u64;
    let mut wire = Vec::new();
    for rep in prepared.reports.iter().flatten() {
        wire.clear();
        prepared.mech.encode_into(rep, &mut wire)?;
        ones += wire.iter().filter(|&&b| b).count() as u64;
    }
    let received = prepared
        .reports
        .iter()
        .map(|reps| Received {
            reports: reps.clone(),
            invalid: 0,
        })
        .collect();
    let link = Link {
        threshold: None,
        slot_duration: f64::NAN,
        molecules: 0,
        report_len,
        ones,
    };
    finish(prepared, received, pop, link)
}

fn run_uncoded_mechanism(
    prepared: Prepared,
    cfg: &ExperimentConfig,
    baseline: &Baseline,
    pop: &Population,
    tree: &SeedTree,
) -> Result<MechanismResult, Error> {
    let mech = &prepared.mech;
    let lane = prepared.mech.kind().id() * 8 + Pipeline::Uncoded.id();
    let report_len = mech.report_len();

    let streams: Vec<Vec<bool>> = map_users(cfg.users, |user| {
        let mut bits = Vec::with_capacity(report_len * cfg.distributions);
        for rep in &prepared.reports[user] {
            mech.encode_into(rep, &mut bits)?;
        }
        Ok(bits)
    })?;
    let ones = crate::count_ones(&streams);
    let channel = normalized_channel(cfg, baseline, report_len, ones)?;

    let counts: Vec<Vec<u32>> = map_users(cfg.users, |user| {
        let mut rng = tree.stream(Stage::Channel, lane, user as u64);
        Ok(channel.transmit(&streams[user], &mut rng))
    })?;
    let Threshold { value: tau, .. } = calibrate_threshold_ber(&streams, &counts)?;
    drop(streams);

    let received = map_users(cfg.users, |user| {
        let mut rng = tree.stream(Stage::Fallback, lane, user as u64);
        let detected = detect(&counts[user], tau);
        let mut invalid = 0;
        let mut reports = Vec::with_capacity(cfg.distributions);
        for chunk in detected.chunks(report_len) {
            match mech.decode(chunk)? {
                Some(rep) => reports.push(rep),
                None => {
                    invalid += 1;
                    reports.push(mech.random_report(&mut rng));
                }
            }
        }
        Ok(Received { reports, invalid })
    })?;

    let link = Link {
        threshold: Some(tau),
        slot_duration: channel.params().slot_duration,
        molecules: channel.params().molecules,
        report_len,
        ones,
    };
    finish(prepared, received, pop, link)
}

/// Decodes one received codeword to a report index, or `None` when the
/// repaired word is not a codeword.
fn decode_word(book: &Codebook, counts: &[u32], tau: u32) -> Option<u64> {
    let bits = detect(counts, tau);
    book.decode(&bits).ok().flatten()
}

/// Threshold minimizing the decoded-index symbol error count over pilot
/// transmissions. `counts[u]` holds user `u`'s received stream and
/// `indices[u]` the report indices it carried, one per codeword. Candidates are
/// `1..=max_count + 1`; ties go to the smallest threshold.
pub fn calibrate_threshold_ser<C: AsRef<[u32]>>(
    counts: &[C],
    indices: &[Vec<u64>],
    book: &Codebook,
) -> Result<Threshold, Error> {
    if counts.len() != indices.len() {
        return Err(Error::LengthMismatch {
            expected: indices.len(),
            actual: counts.len(),
        });
    }
    let n = book.word_len();
    let mut max = 0u32;
    for (obs, idx) in counts.iter().zip(indices) {
        let obs = obs.as_ref();
        if obs.len() != idx.len() * n {
            return Err(Error::LengthMismatch {
                expected: idx.len() * n,
                actual: obs.len(),
            });
        }
        max = obs.iter().copied().fold(max, u32::max);
    }
    if indices.iter().all(|i| i.is_empty()) {
        return Err(Error::EmptyInput);
    }
    let top = max as usize + 1;

    // The detected word only changes when tau crosses one of the word's own
    // counts, so each word contributes piecewise-constant errors over tau.
    let mut diff = vec![0i64; top + 2];
    let mut levels: Vec<u32> = Vec::with_capacity(n);
    for (obs, idx) in counts.iter().zip(indices) {
        for (word, &truth) in obs.as_ref().chunks(n).zip(idx) {
            levels.clear();
            levels.extend_from_slice(word);
            levels.sort_unstable();
            levels.dedup();
            let mut lo = 1usize;
            for a in 0..=levels.len() {
                let hi = if a < levels.len() {
                    levels[a] as usize
                } else {
                    top
                };
                if lo <= hi && decode_word(book, word, lo as u32) != Some(truth) {
                    diff[lo] += 1;
                    diff[hi + 1] -= 1;
                }
                if a < levels.len() {
                    lo = levels[a] as usize + 1;
                }
            }
        }
    }
    let mut best = Threshold {
        value: 1,
        errors: u64::MAX,
    };
    let mut running = 0i64;
    for (tau, d) in diff.iter().enumerate().take(top + 1).skip(1) {
        running += d;
        if (running as u64) < best.errors {
            best = Threshold {
                value: tau as u32,
                errors: running as u64,
            };
        }
    }
    Ok(best)
}

fn run_rlim_mechanism(
    prepared: Prepared,
    cfg: &ExperimentConfig,
    baseline: &Baseline,
    pop: &Population,
    tree: &SeedTree,
) -> Result<MechanismResult, Error> {
    let mech = &prepared.mech;
    let lane = prepared.mech.kind().id() * 8 + Pipeline::Rlim.id();
    let book = Codebook::for_mechanism(mech, cfg.boundary_safe)?;
    let n = book.word_len();

    let indices: Vec<Vec<u64>> = map_users(cfg.users, |user| {
        prepared.reports[user]
            .iter()
            .map(|rep| mech.report_index(rep))
            .collect()
    })?;
    let streams: Vec<Vec<bool>> = map_users(cfg.users, |user| {
        let mut bits = Vec::with_capacity(n * cfg.distributions);
        for &s in &indices[user] {
            book.encode_into(s, &mut bits)?;
        }
        Ok(bits)
    })?;
    let ones = crate::count_ones(&streams);
    let channel = normalized_channel(cfg, baseline, n, ones)?;

    let counts: Vec<Vec<u32>> = map_users(cfg.users, |user| {
        let mut rng = tree.stream(Stage::Channel, lane, user as u64);
        Ok(channel.transmit(&streams[user], &mut rng))
    })?;
    drop(streams);
    let pilots = cfg.pilot_users;
    let Threshold { value: tau, .. } =
        calibrate_threshold_ser(&counts[..pilots], &indices[..pilots], &book)?;

    let received = map_users(cfg.users, |user| {
        let mut rng = tree.stream(Stage::Fallback, lane, user as u64);
        let mut invalid = 0;
        let mut reports = Vec::with_capacity(cfg.distributions);
        for word in counts[user].chunks(n) {
            let decoded = decode_word(&book, word, tau).and_then(|s| mech.index_to_report(s).ok());
            match decoded {
                Some(rep) => reports.push(rep),
                None => {
                    invalid += 1;
                    reports.push(mech.random_report(&mut rng));
                }
            }
        }
        Ok(Received { reports, invalid })
    })?;

    let link = Link {
        threshold: Some(tau),
        slot_duration: channel.params().slot_duration,
        molecules: channel.params().molecules,
        report_len: n,
        ones,
    };
    finish(prepared, received, pop, link)
}

/// Runs every configured mechanism through `pipeline`.
pub fn run(cfg: &ExperimentConfig, pipeline: Pipeline) -> Result<ExperimentResult, Error> {
    cfg.validate()?;
    if pipeline == Pipeline::Rlim {
        cfg.validate_pilot()?;
    }
    let tree = SeedTree::new(cfg.seed);
    let pop = draw_population(cfg, &tree)?;
    let baseline = baseline_of(cfg, &pop)?;
    let mut mechanisms = Vec::with_capacity(cfg.mechanisms.len());
    for &kind in &cfg.mechanisms {
        let prepared = prepare(kind, cfg, &pop, &tree)?;
        let result = match pipeline {
            Pipeline::Ideal => run_ideal_mechanism(prepared, &pop)?,
            Pipeline::Uncoded => run_uncoded_mechanism(prepared, cfg, &baseline, &pop, &tree)?,
            Pipeline::Rlim => run_rlim_mechanism(prepared, cfg, &baseline, &pop, &tree)?,
        };
        mechanisms.push(result);
    }
    Ok(ExperimentResult {
        pipeline,
        config: cfg.clone(),
        baseline,
        mechanisms,
    })
}

/// Channel-free reference: the estimator sees the reports exactly.
pub fn run_ideal(cfg: &ExperimentConfig) -> Result<ExperimentResult, Error> {
    run(cfg, Pipeline::Ideal)
}

pub fn run_uncoded(cfg: &ExperimentConfig) -> Result<ExperimentResult, Error> {
    run(cfg, Pipeline::Uncoded)
}

pub fn run_rlim(cfg: &ExperimentConfig) -> Result<ExperimentResult, Error> {
    run(cfg, Pipeline::Rlim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            users: 300,
            distributions: 4,
            pilot_users: 50,
            seed: 11,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn simplex_draws_sum_to_one() {
        let mut rng = SeedTree::new(3).stream(Stage::GroundTruth, 0, 0);
        for k in [2, 3, 16, 100] {
            let p = sample_simplex(k, &mut rng);
            assert_eq!(p.len(), k);
            assert!(p.iter().all(|&x| x >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn baseline_counts() {
        assert_eq!(baseline_stats([1, 1, 1], 2).unwrap(), (1, 0));
        assert_eq!(baseline_stats([1, 2, 3, 4], 4).unwrap(), (2, 4));
        assert!(baseline_stats([5], 4).is_err());
    }

    #[test]
    fn normalization_cases() {
        let base = Baseline {
            report_len: 4,
            ones: 1000,
            slot_duration: 1.0,
            molecules: 1000,
        };
        assert_eq!(normalize_resources(&base, 4, 1000).unwrap(), (1.0, 1000));
        assert_eq!(normalize_resources(&base, 16, 1000).unwrap().0, 0.25);
        assert_eq!(normalize_resources(&base, 4, 2000).unwrap().1, 500);
        assert_eq!(normalize_resources(&base, 4, 0).unwrap().1, 1000);
        // 1000·1000/400_000 = 2.5 rounds to even
        assert_eq!(normalize_resources(&base, 4, 400_000).unwrap().1, 2);
        // never below one molecule
        assert_eq!(normalize_resources(&base, 4, u64::MAX / 2).unwrap().1, 1);
        assert!(normalize_resources(&base, 0, 1).is_err());
    }

    #[test]
    fn l1_cases() {
        assert_eq!(l1_error(&[0.2, 0.8], &[0.2, 0.8]), 0.0);
        assert_eq!(l1_error(&[1.0, 0.0], &[0.0, 1.0]), 2.0);
        assert!((l1_error(&[0.5, 0.5], &[-0.25, 1.25]) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn ser_threshold_matches_exhaustive_scan() {
        let book = Codebook::build(16, true).unwrap();
        let cfg = ExperimentConfig {
            channel: ChannelParams {
                slot_duration: 0.2,
                molecules: 60,
                ..ChannelParams::default()
            },
            ..ExperimentConfig::default()
        };
        let channel = Channel::new(cfg.channel).unwrap();
        let tree = SeedTree::new(4);
        let mut counts = Vec::new();
        let mut indices = Vec::new();
        for user in 0..20u64 {
            let mut rng = tree.stream(Stage::Channel, 0, user);
            let idx: Vec<u64> = (0..6).map(|_| rng.random_range(0..16)).collect();
            let mut bits = Vec::new();
            for &s in &idx {
                book.encode_into(s, &mut bits).unwrap();
            }
            counts.push(channel.transmit(&bits, &mut rng));
            indices.push(idx);
        }
        let fast = calibrate_threshold_ser(&counts, &indices, &book).unwrap();
        let max = counts.iter().flatten().copied().max().unwrap();
        let errors_at = |tau: u32| -> u64 {
            counts
                .iter()
                .zip(&indices)
                .map(|(c, idx)| {
                    c.chunks(9)
                        .zip(idx)
                        .filter(|(w, &s)| book.decode(&detect(w, tau)).unwrap() != Some(s))
                        .count() as u64
                })
                .sum()
        };
        let brute = (1..=max + 1)
            .map(|tau| Threshold {
                value: tau,
                errors: errors_at(tau),
            })
            .min_by_key(|t| (t.errors, t.value))
            .unwrap();
        assert_eq!(fast, brute);
        assert!(
            fast.errors > 0,
            "channel should be lossy enough to exercise the scan"
        );
    }

    #[test]
    fn pipelines_run_and_report_provenance() {
        let cfg = small();
        for pipeline in [Pipeline::Ideal, Pipeline::Uncoded, Pipeline::Rlim] {
            let res = run(&cfg, pipeline).unwrap();
            assert_eq!(res.mechanisms.len(), 6);
            for m in &res.mechanisms {
                assert!(m.l1_mean >= 0.0);
                assert_eq!(m.l1.len(), cfg.distributions);
                assert!(m.invalid <= (cfg.users * cfg.distributions) as u64);
                assert_eq!(m.threshold.is_some(), pipeline != Pipeline::Ideal);
            }
        }
    }

    #[test]
    fn rlim_krr_uses_nine_bit_codewords() {
        let cfg = ExperimentConfig {
            mechanisms: vec![MechanismKind::Krr],
            ..small()
        };
        let res = run_rlim(&cfg).unwrap();
        let krr = res.get(MechanismKind::Krr).unwrap();
        assert_eq!(krr.report_len, 9);
        assert!((krr.slot_duration - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = small();
        assert_eq!(run_uncoded(&cfg).unwrap(), run_uncoded(&cfg).unwrap());
        let other = ExperimentConfig {
            seed: 12,
            ..small()
        };
        assert_ne!(
            run_uncoded(&cfg).unwrap().mechanisms[0].l1,
            run_uncoded(&other).unwrap().mechanisms[0].l1
        );
    }

    #[test]
    fn invalid_experiments() {
        let mut cfg = small();
        cfg.pilot_users = cfg.users + 1;
        assert!(run_rlim(&cfg).is_err());
        assert!(run_uncoded(&cfg).is_ok());
        cfg = small();
        cfg.mechanisms.clear();
        assert!(run_ideal(&cfg).is_err());
        cfg = small();
        cfg.distributions = 0;
        assert!(run_ideal(&cfg).is_err());
    }
}
