//! Runs every (axis value, pipeline, seed, mechanism) point of a sweep.

use mcldp_core::harness::{run, ExperimentConfig, MechanismResult, Pipeline};
use mcldp_core::ldp::MechanismKind;
use serde::{Deserialize, Serialize};

use crate::config::SweepSpec;

/// One result line.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub axis_value: f64,
    pub mechanism: String,
    pub coded: String,
    pub seed: u64,
    pub l1_mean: f64,
    pub tau_star: Option<u32>,
    pub t_s_m: f64,
    pub M_m: u64,
    pub l_m: usize,
    pub W_m: u64,
    pub invalid_count: u64,
}

impl Row {
    fn new(axis_value: f64, pipeline: Pipeline, seed: u64, m: &MechanismResult) -> Self {
        Row {
            axis_value,
            mechanism: m.kind.name().to_owned(),
            coded: pipeline.name().to_owned(),
            seed,
            l1_mean: m.l1_mean,
            tau_star: m.threshold,
            t_s_m: m.slot_duration,
            M_m: m.molecules,
            l_m: m.report_len,
            W_m: m.ones,
            invalid_count: m.invalid,
        }
    }
}

/// Identifies one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub axis_value: f64,
    pub pipeline: Pipeline,
    pub seed: u64,
    pub mechanism: MechanismKind,
}

pub struct Progress<'a> {
    pub done: usize,
    pub total: usize,
    pub point: Point,
    pub outcome: Result<&'a Row, &'a mcldp_core::Error>,
}

#[derive(Debug, Default)]
pub struct SweepOutcome {
    /// Completed points in sweep order.
    pub rows: Vec<Row>,
    pub failures: Vec<(Point, mcldp_core::Error)>,
}

impl SweepOutcome {
    pub fn complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Points in output order: axis value, then pipeline, then seed, then mechanism.
pub fn points(spec: &SweepSpec) -> Vec<Point> {
    let mut out = Vec::new();
    for &axis_value in &spec.values {
        for &pipeline in spec.coded.pipelines() {
            for seed in spec.seed_list() {
                for &mechanism in &spec.template.mechanisms {
                    out.push(Point {
                        axis_value,
                        pipeline,
                        seed,
                        mechanism,
                    });
                }
            }
        }
    }
    out
}

fn run_point(spec: &SweepSpec, point: &Point) -> Result<Row, mcldp_core::Error> {
    let base = spec
        .point(point.axis_value)
        .map_err(|_| mcldp_core::Error::InvalidExperiment {
            field: "sweep.values",
            reason: "axis value does not fit its field",
        })?;
    let cfg = ExperimentConfig {
        mechanisms: vec![point.mechanism],
        seed: point.seed,
        ..base
    };
    let result = run(&cfg, point.pipeline)?;
    Ok(Row::new(
        point.axis_value,
        point.pipeline,
        point.seed,
        &result.mechanisms[0],
    ))
}

/// Runs the sweep, calling `progress` after every point. Failed points are
/// collected and the remaining points still run.
pub fn run_sweep(spec: &SweepSpec, mut progress: impl FnMut(Progress<'_>, &[Row])) -> SweepOutcome {
    let all = points(spec);
    let total = all.len();
    let mut outcome = SweepOutcome::default();
    for (i, point) in all.into_iter().enumerate() {
        match run_point(spec, &point) {
            Ok(row) => {
                outcome.rows.push(row);
                let row = outcome.rows.last().expect("just pushed");
                progress(
                    Progress {
                        done: i + 1,
                        total,
                        point,
                        outcome: Ok(row),
                    },
                    &outcome.rows,
                );
            }
            Err(err) => {
                progress(
                    Progress {
                        done: i + 1,
                        total,
                        point,
                        outcome: Err(&err),
                    },
                    &outcome.rows,
                );
                outcome.failures.push((point, err));
            }
        }
    }
    outcome
}
