//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run all: `cargo test -p mcldp-core --test acceptance`.
//! Run some: append `-- ac1 ac5`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mcldp_core::channel::{channel_coefficients, hitting_probability, ChannelParams};
use mcldp_core::harness::{run, sample_simplex, ExperimentConfig, ExperimentResult, Pipeline};
use mcldp_core::ldp::{hadamard_positive, MechanismConfig, MechanismKind, Report};
use mcldp_core::rlim::{is_constrained, rlim_correct, rll_count, Codebook};
use mcldp_core::rng::{SeedTree, Stage};
use rand::Rng;

use MechanismKind::{Blh, Hr, Krr, Olh};

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn budget(&mut self, elapsed: Duration, limit: Duration) {
        self.check(
            elapsed < limit,
            format!("runtime {elapsed:.2?} exceeds {limit:?}"),
        );
    }
}

// ---------------------------------------------------------------- oracles

/// erfc from the Maclaurin series of erf; accurate to ~1e-15 for x < 2.
fn erfc_series(x: f64) -> f64 {
    assert!((0.0..2.0).contains(&x));
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-18 {
        n += 1.0;
        term *= -x * x / n;
        sum += term / (2.0 * n + 1.0);
    }
    1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
}

fn absorbed_by(d: f64, r_r: f64, r0: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    r_r / r0 * erfc_series((r0 - r_r) / (4.0 * d * t).sqrt())
}

/// Every 1 followed by at least two 0s; with `safe` the last two bits are 0.
fn constrained_oracle(word: u64, n: usize, safe: bool) -> bool {
    let bit = |i: usize| word >> (n - 1 - i) & 1 == 1;
    (0..n).all(|i| {
        !bit(i) || {
            let mut ok = true;
            for j in i + 1..=i + 2 {
                if j < n && bit(j) {
                    ok = false;
                }
                if j >= n && safe {
                    ok = false;
                }
            }
            ok
        }
    })
}

fn to_bits(word: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| word >> (n - 1 - i) & 1 == 1).collect()
}

/// Closest constrained string in Hamming distance; ties go to the string whose
/// ones sit latest (compared from the right).
fn min_edit_oracle(word: u64, n: usize) -> u64 {
    let later = |a: u64, b: u64| a.reverse_bits() < b.reverse_bits();
    let mut best: Option<(u32, u64)> = None;
    for cand in 0..1u64 << n {
        if !constrained_oracle(cand, n, false) {
            continue;
        }
        let dist = (cand ^ word).count_ones();
        best = match best {
            None => Some((dist, cand)),
            Some((bd, bc)) if dist < bd || (dist == bd && later(bc, cand)) => Some((dist, cand)),
            keep => keep,
        };
    }
    best.unwrap().1
}

/// Keeps a 1 only if the next two input bits are 0.
fn local_rule_oracle(bits: &[bool], safe: bool) -> Vec<bool> {
    let n = bits.len();
    (0..n)
        .map(|i| bits[i] && (i + 1..(i + 3).min(n)).all(|j| !bits[j]) && !(safe && i + 2 >= n))
        .collect()
}

fn all_reports(cfg: &MechanismConfig) -> Vec<Report> {
    let space = cfg.index_space().unwrap();
    (0..space)
        .filter_map(|i| cfg.index_to_report(i).ok())
        .collect()
}

fn perfect_channel() -> ChannelParams {
    ChannelParams {
        molecules: 100_000,
        slot_duration: 10.0,
        noise_variance: 0.0,
        ..ChannelParams::default()
    }
}

fn desk(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        users: 5000,
        distributions: 20,
        seed,
        ..ExperimentConfig::default()
    }
}

fn seeds_run(base: &ExperimentConfig, pipeline: Pipeline) -> Vec<ExperimentResult> {
    (0..10)
        .map(|seed| {
            run(
                &ExperimentConfig {
                    seed,
                    ..base.clone()
                },
                pipeline,
            )
            .expect("experiment runs")
        })
        .collect()
}

fn l1(res: &ExperimentResult, kind: MechanismKind) -> f64 {
    res.get(kind).unwrap().l1_mean
}

// ---------------------------------------------------------------- criteria

fn ac1() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let params = ChannelParams::default();
    let coeffs = channel_coefficients(&params).unwrap();
    let p = coeffs.as_slice();
    let (d, rr, r0) = (params.diffusion, params.receiver_radius, params.distance);

    let p1 = absorbed_by(d, rr, r0, 1.0);
    out.check(
        (p[0] - p1).abs() < 1e-3,
        format!("p1 {} vs oracle {p1}", p[0]),
    );
    out.check(
        (p1 - 0.3458).abs() < 1e-3,
        format!("oracle p1 {p1} vs 0.3458"),
    );
    for i in 1..=200 {
        let want = absorbed_by(d, rr, r0, i as f64) - absorbed_by(d, rr, r0, (i - 1) as f64);
        let got = p[i - 1];
        if (got - want).abs() > 1e-12 {
            out.check(false, format!("p{i} {got} vs oracle {want}"));
            break;
        }
    }
    let window: f64 = coeffs.window().iter().sum();
    let f200 = hitting_probability(&params, 200.0).unwrap();
    out.check(
        (window - 0.4888).abs() < 1e-3,
        format!("window mass {window}"),
    );
    out.check(
        (f200 - absorbed_by(d, rr, r0, 200.0)).abs() < 1e-12,
        "F(200) vs oracle",
    );
    out.check(p.len() == 201, "coefficient count");
    let total: f64 = p.iter().sum();
    out.check(total == 1.0, format!("total mass {total:e}"));
    out.note(format!("p1={:.6} window={window:.6}", p[0]));
    out.budget(start.elapsed(), Duration::from_secs(1));
    out
}

fn ac2() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for kind in MechanismKind::ALL {
        for k in 2..=8u32 {
            for eps in [0.5, 1.0, 2.0] {
                let cfg = MechanismConfig::new(kind, k, eps).unwrap();
                let bound = f64::exp(eps) * (1.0 + 1e-12);
                let reports = all_reports(&cfg);
                for report in &reports {
                    let probs: Vec<f64> = (1..=k)
                        .map(|x| cfg.output_probability(x, report).unwrap())
                        .collect();
                    let hi = probs.iter().copied().fold(f64::MIN, f64::max);
                    let lo = probs.iter().copied().fold(f64::MAX, f64::min);
                    let ratio = hi / lo;
                    worst = worst.max(ratio / f64::exp(eps));
                    if !(lo > 0.0 && ratio <= bound) {
                        out.check(false, format!("{kind} k={k} ε={eps}: ratio {ratio}"));
                    }
                }
                // Conditional on the hash the outputs form a distribution.
                let total: f64 = reports
                    .iter()
                    .map(|r| cfg.output_probability(1, r).unwrap())
                    .sum();
                let hashes = match kind {
                    Blh => 1u64 << cfg.hash_bits().unwrap(),
                    Olh => u64::from(cfg.g().unwrap()).pow(cfg.hash_digits().unwrap() as u32),
                    _ => 1,
                };
                if (total - hashes as f64).abs() > 1e-9 * hashes as f64 {
                    out.check(false, format!("{kind} k={k} ε={eps}: mass {total}"));
                }
            }
        }
    }
    out.note(format!("max ratio / e^ε = {worst:.15}"));
    out.budget(start.elapsed(), Duration::from_secs(10));
    out
}

fn ac3() -> Outcome {
    let mut out = Outcome::new();
    let reps = 200;
    let n = 10_000;
    let tree = SeedTree::new(2024);
    for k in [2u32, 16] {
        let truth = sample_simplex(
            k as usize,
            &mut tree.stream(Stage::GroundTruth, 99, u64::from(k)),
        );
        let cdf: Vec<f64> = truth
            .iter()
            .scan(0.0, |a, &x| {
                *a += x;
                Some(*a)
            })
            .collect();
        for kind in MechanismKind::ALL {
            let cfg = MechanismConfig::new(kind, k, 1.0).unwrap();
            let mut sum = vec![0.0; k as usize];
            let mut sq = vec![0.0; k as usize];
            let mut worst_sum_gap = 0.0f64;
            for rep in 0..reps {
                let mut rng = tree.stream(Stage::Perturb, kind.id() * 100 + u64::from(k), rep);
                let reports: Vec<Report> = (0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        let x = cdf.partition_point(|&c| c <= u).min(k as usize - 1) as u32 + 1;
                        cfg.perturb(x, &mut rng).unwrap()
                    })
                    .collect();
                let est = cfg.estimate(&reports).unwrap();
                worst_sum_gap = worst_sum_gap.max((est.sum() - 1.0).abs());
                for (v, &e) in est.as_slice().iter().enumerate() {
                    sum[v] += e;
                    sq[v] += e * e;
                }
            }
            let r = reps as f64;
            let mut worst_z = 0.0f64;
            for v in 0..k as usize {
                let mean = sum[v] / r;
                let var = (sq[v] - r * mean * mean) / (r - 1.0);
                let se = (var / r).sqrt();
                worst_z = worst_z.max((mean - truth[v]).abs() / se);
            }
            out.check(
                worst_z <= 3.0,
                format!("{kind} k={k}: mean off by {worst_z:.2} SE"),
            );
            if matches!(kind, Krr | Blh | Olh | Hr) {
                out.check(
                    worst_sum_gap <= 1e-9,
                    format!("{kind} k={k}: |Σp̂ − 1| up to {worst_sum_gap:.3e}"),
                );
            }
            out.note(format!(
                "{kind} k={k}: max |z|={worst_z:.2} max|Σ−1|={worst_sum_gap:.1e}"
            ));
        }
    }
    out
}

fn ac4() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    for k in 2..=16u32 {
        let blh = MechanismConfig::new(Blh, k, 1.0).unwrap();
        let hashes = 1u64 << blh.hash_bits().unwrap();
        // h(x) = b exactly when Pr(b | x, h) = p.
        let h = |x: u32, hash: u64| {
            let rep = Report::Blh { hash, bit: true };
            blh.output_probability(x, &rep).unwrap() == blh.p()
        };
        for x in 1..=k {
            for v in 1..=k {
                if x == v {
                    continue;
                }
                let matches = (0..hashes).filter(|&s| h(x, s) == h(v, s)).count() as u64;
                out.check(
                    2 * matches == hashes,
                    format!("BLH k={k} ({x},{v}): {matches}/{hashes}"),
                );
            }
        }
        for eps in [0.5, 1.0, 2.0, 3.0] {
            let olh = MechanismConfig::new(Olh, k, eps).unwrap();
            let g = olh.g().unwrap();
            let m = olh.hash_digits().unwrap();
            let count = u64::from(g).pow(m as u32);
            let vectors: Vec<Vec<u32>> = (0..count)
                .map(|mut c| {
                    let mut d = vec![0u32; m];
                    for slot in d.iter_mut().rev() {
                        *slot = (c % u64::from(g)) as u32;
                        c /= u64::from(g);
                    }
                    d
                })
                .collect();
            let hash_of = |x: u32, r: &[u32]| {
                (0..g)
                    .find(|&y| {
                        let rep = Report::Olh {
                            hash: r.to_vec(),
                            value: y,
                        };
                        olh.output_probability(x, &rep).unwrap() == olh.p()
                    })
                    .unwrap()
            };
            let table: Vec<Vec<u32>> = (1..=k)
                .map(|x| vectors.iter().map(|r| hash_of(x, r)).collect())
                .collect();
            for x in 0..k as usize {
                for v in 0..k as usize {
                    if x == v {
                        continue;
                    }
                    let coll = table[x]
                        .iter()
                        .zip(&table[v])
                        .filter(|(a, b)| a == b)
                        .count() as u64;
                    out.check(
                        coll * u64::from(g) == count,
                        format!("OLH k={k} g={g}: {coll}/{count}"),
                    );
                }
            }
        }
    }
    let hr = MechanismConfig::new(Hr, 16, 1.0).unwrap();
    let d = 1u64 << hr.hadamard_order().unwrap();
    out.check(d == 32, format!("HR order gives d={d}"));
    let support = |x: u32| -> Vec<u64> { (0..d).filter(|&j| hadamard_positive(x, j)).collect() };
    for x in 1..=16 {
        let sx = support(x);
        out.check(sx.len() as u64 == d / 2, format!("|S_{x}| = {}", sx.len()));
        for v in 1..=16 {
            if v != x {
                let both = support(v).iter().filter(|j| sx.contains(j)).count() as u64;
                out.check(both == d / 4, format!("|S_{x} ∩ S_{v}| = {both}"));
            }
        }
    }
    out.budget(start.elapsed(), Duration::from_secs(10));
    out
}

fn ac5() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    for safe in [false, true] {
        for n in 1..=20usize {
            let brute = (0..1u64 << n)
                .filter(|&w| constrained_oracle(w, n, safe))
                .count() as u64;
            out.check(
                brute == rll_count(n, safe),
                format!("count n={n} safe={safe}"),
            );
        }
    }
    let book16 = Codebook::build(16, true).unwrap();
    out.check(
        book16.word_len() == 9,
        format!("S=16 safe has n={}", book16.word_len()),
    );

    for safe in [false, true] {
        for size in [2u64, 3, 5, 16, 37, 81, 128, 500, 4096] {
            let book = Codebook::build(size, safe).unwrap();
            let n = book.word_len();
            out.check(
                rll_count(n, safe) >= size,
                format!("S={size} n={n} too short"),
            );
            out.check(
                n == 1 || rll_count(n - 1, safe) < size,
                format!("S={size} n={n} not minimal"),
            );
            let words = book.words();
            out.check(words.len() as u64 == size, format!("S={size} size"));
            for &w in words {
                out.check(
                    constrained_oracle(w, n, safe),
                    format!("S={size}: {w:b} violates"),
                );
            }
            let heaviest = words.iter().map(|w| w.count_ones()).max().unwrap();
            let lightest_left = (0..1u64 << n)
                .filter(|&w| constrained_oracle(w, n, safe) && !words.contains(&w))
                .map(|w| w.count_ones())
                .min();
            if let Some(light) = lightest_left {
                out.check(
                    heaviest <= light,
                    format!("S={size}: weight {heaviest} kept over {light}"),
                );
            }
        }
    }

    let mut min_edit_mismatch = None;
    let mut mismatches = 0u64;
    for n in 0..=12usize {
        for w in 0..1u64 << n {
            let bits = to_bits(w, n);
            for safe in [false, true] {
                let once = rlim_correct(&bits, safe);
                out.check(
                    rlim_correct(&once, safe) == once,
                    format!("not idempotent on {w:0n$b}"),
                );
                out.check(
                    is_constrained(&once, safe),
                    format!("unconstrained output on {w:0n$b}"),
                );
                out.check(
                    once == local_rule_oracle(&bits, safe),
                    format!("local rule on {w:0n$b}"),
                );
            }
            let repaired = rlim_correct(&bits, false);
            if repaired != to_bits(min_edit_oracle(w, n), n) {
                mismatches += 1;
                if min_edit_mismatch.is_none() {
                    min_edit_mismatch = Some(format!(
                        "{w:0n$b} → {} but minimal edit gives {:0n$b}",
                        repaired
                            .iter()
                            .map(|&b| if b { '1' } else { '0' })
                            .collect::<String>(),
                        min_edit_oracle(w, n)
                    ));
                }
            }
        }
    }
    if let Some(first) = min_edit_mismatch {
        out.check(
            false,
            format!("differs from minimal-edit oracle on {mismatches} strings, first {first}"),
        );
    }
    out.budget(start.elapsed(), Duration::from_secs(30));
    out
}

fn ac6() -> Outcome {
    let mut out = Outcome::new();
    for seed in [0u64, 1] {
        let cfg = ExperimentConfig {
            channel: perfect_channel(),
            users: 2000,
            distributions: 20,
            seed,
            ..ExperimentConfig::default()
        };
        let ideal = run(&cfg, Pipeline::Ideal).unwrap();
        for pipeline in [Pipeline::Uncoded, Pipeline::Rlim] {
            let res = run(&cfg, pipeline).unwrap();
            for (a, b) in ideal.mechanisms.iter().zip(&res.mechanisms) {
                let same =
                    a.l1.iter()
                        .zip(&b.l1)
                        .all(|(x, y)| x.to_bits() == y.to_bits());
                out.check(
                    same,
                    format!("seed {seed} {} {}: ℓ1 differs", pipeline.name(), b.kind),
                );
                out.check(
                    b.invalid == 0,
                    format!(
                        "seed {seed} {} {}: {} invalid",
                        pipeline.name(),
                        b.kind,
                        b.invalid
                    ),
                );
            }
        }
    }
    out
}

fn count_seeds(out: &mut Outcome, label: &str, wins: usize, need: usize) {
    out.note(format!("{label}: {wins}/10"));
    out.check(wins >= need, format!("{label}: only {wins}/10 seeds"));
}

fn ac7() -> Outcome {
    let mut out = Outcome::new();
    let results = seeds_run(&desk(0), Pipeline::Uncoded);
    let mut wins = 0;
    for res in &results {
        let mut ranked: Vec<(f64, MechanismKind)> =
            res.mechanisms.iter().map(|m| (m.l1_mean, m.kind)).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        let top: Vec<MechanismKind> = ranked[..2].iter().map(|r| r.1).collect();
        if top.contains(&Krr) && top.contains(&Olh) {
            wins += 1;
        }
        out.note(format!(
            "seed {}: {}",
            res.config.seed,
            ranked
                .iter()
                .map(|(l, k)| format!("{k}={l:.4}"))
                .collect::<Vec<_>>()
                .join(" ")
        ));
    }
    count_seeds(&mut out, "KRR and OLH lowest two", wins, 8);
    out
}

fn ac8() -> Outcome {
    let mut out = Outcome::new();
    let degraded = [
        (
            "t_s,0=0.2",
            ChannelParams {
                slot_duration: 0.2,
                molecules: 100,
                ..ChannelParams::default()
            },
        ),
        (
            "r0=14",
            ChannelParams {
                distance: 14.0,
                molecules: 100,
                ..ChannelParams::default()
            },
        ),
    ];
    let mut best = 0;
    for (label, channel) in degraded {
        let base = ExperimentConfig {
            channel,
            mechanisms: vec![Krr, Olh],
            ..desk(0)
        };
        let results = seeds_run(&base, Pipeline::Uncoded);
        let wins = results.iter().filter(|r| l1(r, Krr) <= l1(r, Olh)).count();
        let mean = |k| results.iter().map(|r| l1(r, k)).sum::<f64>() / 10.0;
        out.note(format!(
            "{label}: KRR ≤ OLH in {wins}/10 (mean KRR {:.4}, OLH {:.4})",
            mean(Krr),
            mean(Olh)
        ));
        best = best.max(wins);
    }
    out.check(
        best >= 7,
        format!("KRR ≤ OLH in only {best}/10 seeds under either degradation"),
    );
    out
}

fn ac9() -> Outcome {
    let mut out = Outcome::new();
    let base = ExperimentConfig {
        channel: ChannelParams {
            slot_duration: 0.3,
            molecules: 100,
            ..ChannelParams::default()
        },
        mechanisms: vec![Krr, Olh],
        ..desk(0)
    };
    let uncoded = seeds_run(&base, Pipeline::Uncoded);
    let coded = seeds_run(&base, Pipeline::Rlim);
    for kind in [Krr, Olh] {
        let wins = uncoded
            .iter()
            .zip(&coded)
            .filter(|(u, c)| l1(c, kind) < l1(u, kind))
            .count();
        let mean = |rs: &[ExperimentResult]| rs.iter().map(|r| l1(r, kind)).sum::<f64>() / 10.0;
        out.note(format!(
            "{kind} mean uncoded {:.4} rlim {:.4}",
            mean(&uncoded),
            mean(&coded)
        ));
        count_seeds(&mut out, &format!("{kind} coded beats uncoded"), wins, 7);
    }
    out
}

fn ac10() -> Outcome {
    let mut out = Outcome::new();
    let at = |users| {
        let base = ExperimentConfig {
            channel: perfect_channel(),
            users,
            distributions: 20,
            ..ExperimentConfig::default()
        };
        seeds_run(&base, Pipeline::Ideal)
    };
    let small = at(2000);
    let large = at(8000);
    for kind in MechanismKind::ALL {
        let mean =
            |rs: &[ExperimentResult]| rs.iter().map(|r| l1(r, kind)).sum::<f64>() / rs.len() as f64;
        let (a, b) = (mean(&small), mean(&large));
        out.note(format!("{kind}: {a:.4} → {b:.4}"));
        out.check(
            b < a,
            format!("{kind}: ℓ1 {a:.4} at N=2000 vs {b:.4} at N=8000"),
        );
    }
    out
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("ac1", "channel coefficients", ac1),
        ("ac2", "ε-LDP likelihood ratios", ac2),
        ("ac3", "estimator unbiasedness", ac3),
        ("ac4", "hash and Hadamard structure", ac4),
        ("ac5", "RLL codebook and repair", ac5),
        ("ac6", "error-free link equivalence", ac6),
        ("ac7", "KRR and OLH lead on the baseline link", ac7),
        ("ac8", "KRR overtakes OLH on a degraded link", ac8),
        ("ac9", "RLIM gain at short slots", ac9),
        ("ac10", "error falls with more users", ac10),
    ];
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.starts_with("ac"))
        .collect();
    let verbose = std::env::var_os("ACCEPTANCE_VERBOSE").is_some();
    let mut failed = 0;
    for (id, title, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|x| x == id) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let status = if outcome.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!("{status} {id} {title} ({:.1?})", start.elapsed());
        if verbose || !outcome.failures.is_empty() {
            for note in &outcome.notes {
                println!("    {note}");
            }
        }
        for failure in outcome.failures.iter().take(10) {
            println!("    ✗ {failure}");
        }
        if outcome.failures.len() > 10 {
            println!("    … {} more", outcome.failures.len() - 10);
        }
        if !outcome.failures.is_empty() {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
