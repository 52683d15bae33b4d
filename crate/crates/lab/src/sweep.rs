use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::config::{ExperimentConfig, SweepParameter};
use crate::error::{LabError, LabResult};
use crate::output::write_atomic;
use crate::run::{run_experiment, RunOptions, RunReport, FORMAT_VERSION};

/// One row per sweep value, in sweep order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub value: f64,
    /// `ok`, or the error that stopped this member.
    pub status: String,
    pub break_times: BTreeMap<String, Option<f64>>,
    pub lambda: Option<f64>,
    /// Last sample of every series, keyed `engine/diagnostic`.
    pub final_values: BTreeMap<String, f64>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub parameter: SweepParameter,
    pub runs: Vec<LabResult<RunReport>>,
    pub aggregate: Vec<AggregateRow>,
}

#[derive(Serialize)]
struct AggregateFile<'a> {
    format_version: u32,
    parameter: &'a str,
    rows: &'a [AggregateRow],
}

impl SweepOutcome {
    /// First member failure, if any.
    pub fn first_error(&self) -> Option<&LabError> {
        self.runs.iter().find_map(|r| r.as_ref().err())
    }

    pub fn aggregate_json(&self) -> String {
        let file = AggregateFile {
            format_version: FORMAT_VERSION,
            parameter: self.parameter.as_str(),
            rows: &self.aggregate,
        };
        serde_json::to_string_pretty(&file).expect("aggregate serialises")
    }
}

fn row(value: f64, run: &LabResult<RunReport>) -> AggregateRow {
    match run {
        Ok(r) => AggregateRow {
            value,
            status: "ok".into(),
            break_times: r.derived.break_times.clone(),
            lambda: r.derived.lyapunov.as_ref().map(|l| l.lambda),
            final_values: r
                .series
                .iter()
                .filter_map(|s| {
                    s.series
                        .values()
                        .last()
                        .map(|v| (format!("{}/{}", s.engine, s.diagnostic), *v))
                })
                .collect(),
        },
        Err(e) => AggregateRow {
            value,
            status: e.to_string(),
            break_times: BTreeMap::new(),
            lambda: None,
            final_values: BTreeMap::new(),
        },
    }
}

/// Runs one experiment per sweep value on a pool of `threads` workers.
///
/// Members are independent; a failing member is recorded in its row and
/// the others still run. Results come back in sweep order whatever the
/// scheduling, so the aggregate is deterministic. With an output
/// directory, member `i` writes to `run-<i>` and the table goes to
/// `aggregate.json`.
pub fn run_sweep(config: &ExperimentConfig, threads: usize, out_dir: Option<PathBuf>, snapshots: bool) -> LabResult<SweepOutcome> {
    let Some(sweep) = &config.sweep else {
        return Err(LabError::validation("sweep", "config has no sweep section"));
    };
    if threads == 0 {
        return Err(LabError::validation("threads", "must be at least 1"));
    }
    // Validate the base and every member before any compute.
    config.setup()?;
    let base_dir = out_dir.clone().unwrap_or_else(|| config.output_dir());
    let members: Vec<ExperimentConfig> = sweep
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| config.sweep_member(v, base_dir.join(format!("run-{i:03}"))))
        .collect();
    for m in &members {
        crate::run::validate(m)?;
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<LabResult<RunReport>>>> = Mutex::new((0..members.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.min(members.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(member) = members.get(i) else { break };
                let options = RunOptions {
                    out_dir: out_dir.as_ref().and(member.output_dir.clone()),
                    snapshots,
                };
                let result = run_experiment(member, &options);
                results.lock().expect("no worker panicked")[i] = Some(result);
            });
        }
    });
    let runs: Vec<LabResult<RunReport>> = results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every member ran"))
        .collect();
    let aggregate = sweep.values.iter().zip(&runs).map(|(&v, r)| row(v, r)).collect();
    let outcome = SweepOutcome {
        parameter: sweep.parameter,
        runs,
        aggregate,
    };
    if out_dir.is_some() {
        write_atomic(&base_dir.join("aggregate.json"), outcome.aggregate_json().as_bytes())?;
    }
    Ok(outcome)
}
