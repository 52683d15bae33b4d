use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use moyal_core::classical::{
    ensemble_diffusion, lyapunov_exponent, standard_map_lyapunov, LiouvilleEngine, LyapunovUnit, TrajectoryState,
};
use moyal_core::decoherence::DecoherentEngine;
use moyal_core::diagnostics::{
    break_time, derivative_norm, l2_distance, negativity_volume, norm, purity, DiagnosticSeries,
};
use moyal_core::quantum::MoyalEngine;
use moyal_core::{Axis, Distribution, Error as CoreError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{DiagnosticKind, EngineKind, ExperimentConfig, Setup};
use crate::error::{LabError, LabResult};
use crate::output::{create_dir, write_atomic, write_snapshot, Record};

/// Bumped whenever a written file changes shape.
pub const FORMAT_VERSION: u32 = 1;

/// Mass fraction in the outer band above which a run warns that the
/// periodic wrap may be felt.
pub const EDGE_MASS_LIMIT: f64 = 1e-8;
/// Width of that band as a fraction of each axis.
pub const EDGE_BAND: f64 = 0.1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Where to write files; `None` keeps everything in memory.
    pub out_dir: Option<PathBuf>,
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEntry {
    pub engine: String,
    pub diagnostic: String,
    pub series: DiagnosticSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovSummary {
    pub lambda: f64,
    pub unit: &'static str,
    pub n_steps: u64,
    pub x0: f64,
    pub p0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardMapSummary {
    pub k: f64,
    /// Per iteration.
    pub lambda: f64,
    pub diffusion: f64,
    pub diffusion_standard_error: f64,
    /// Uncorrelated-kick value `K²/4`.
    pub quasilinear_diffusion: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Derived {
    pub lyapunov: Option<LyapunovSummary>,
    /// First crossing of the break threshold per non-classical engine;
    /// `null` when it is never crossed.
    pub break_times: BTreeMap<String, Option<f64>>,
    pub standard_map: Option<StandardMapSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub steps: u64,
    pub samples: usize,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub format_version: u32,
    /// Resolved config: defaults expanded, output directory filled in.
    pub config: ExperimentConfig,
    pub series: Vec<SeriesEntry>,
    pub derived: Derived,
    pub metadata: Metadata,
    pub warnings: Vec<String>,
    /// Final fields, in engine order.
    pub finals: Vec<(EngineKind, Distribution)>,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    format_version: u32,
    config: &'a ExperimentConfig,
    derived: &'a Derived,
    metadata: &'a Metadata,
    warnings: &'a [String],
}

impl RunReport {
    pub fn series(&self, engine: &str, diagnostic: &str) -> Option<&DiagnosticSeries> {
        self.series
            .iter()
            .find(|s| s.engine == engine && s.diagnostic == diagnostic)
            .map(|s| &s.series)
    }

    pub fn final_field(&self, engine: EngineKind) -> Option<&Distribution> {
        self.finals.iter().find(|(e, _)| *e == engine).map(|(_, d)| d)
    }

    /// Diagnostics as NDJSON, one line per (time, engine, diagnostic),
    /// ordered by sample, then engine, then diagnostic as configured.
    pub fn to_ndjson(&self) -> String {
        let samples = self.series.iter().map(|s| s.series.len()).max().unwrap_or(0);
        let mut out = String::new();
        for i in 0..samples {
            for s in self.series.iter().filter(|s| i < s.series.len()) {
                let rec = Record {
                    t: s.series.times()[i],
                    engine: &s.engine,
                    diagnostic: &s.diagnostic,
                    value: s.series.values()[i],
                };
                out.push_str(&serde_json::to_string(&rec).expect("record serialises"));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let file = ReportFile {
            format_version: self.format_version,
            config: &self.config,
            derived: &self.derived,
            metadata: &self.metadata,
            warnings: &self.warnings,
        };
        serde_json::to_string_pretty(&file).expect("report serialises")
    }

    /// Writes `config.json`, `diagnostics.ndjson` and `report.json`.
    pub fn write(&self, dir: &Path) -> LabResult<()> {
        create_dir(dir)?;
        write_atomic(&dir.join("config.json"), self.config.to_json().as_bytes())?;
        write_atomic(&dir.join("diagnostics.ndjson"), self.to_ndjson().as_bytes())?;
        write_atomic(&dir.join("report.json"), self.to_json().as_bytes())
    }
}

enum Engine {
    Classical(LiouvilleEngine),
    Quantum(MoyalEngine),
    Decoherent(DecoherentEngine),
}

impl Engine {
    fn build(kind: EngineKind, cfg: &ExperimentConfig, setup: &Setup) -> LabResult<Self> {
        let (g, pot, params, dt) = (&setup.grid, &setup.potential, &setup.params, cfg.time.dt);
        let built = match kind {
            EngineKind::Classical => LiouvilleEngine::new(g, pot, params, dt).map(Self::Classical),
            EngineKind::Quantum => MoyalEngine::new(g, pot, params, cfg.moyal.to_core(), dt).map(Self::Quantum),
            EngineKind::Decoherent => {
                DecoherentEngine::new(g, pot, params, cfg.moyal.to_core(), &cfg.decoherence_core(), dt)
                    .map(Self::Decoherent)
            }
        };
        built.map_err(|e| LabError::from_core(e, "time"))
    }

    fn advance(&mut self, dist: &mut Distribution, n: u64) -> Result<(), CoreError> {
        match self {
            Self::Classical(e) => e.advance(dist, n),
            Self::Quantum(e) => e.advance(dist, n),
            Self::Decoherent(e) => e.advance(dist, n),
        }
    }
}

fn l2_norm(d: &Distribution) -> f64 {
    (d.values().iter().map(|v| v * v).sum::<f64>() * d.grid().cell_area()).sqrt()
}

fn evaluate(
    diag: DiagnosticKind,
    dist: &Distribution,
    classical: Option<&Distribution>,
    setup: &Setup,
) -> LabResult<f64> {
    let against = || {
        classical.ok_or_else(|| LabError::validation("diagnostics", format!("`{diag}` needs the classical engine")))
    };
    let core = |e| LabError::from_core(e, "diagnostics");
    Ok(match diag {
        DiagnosticKind::Norm => norm(dist),
        DiagnosticKind::Purity => purity(dist, &setup.params),
        DiagnosticKind::NegativityVolume => negativity_volume(dist),
        DiagnosticKind::L2ToClassical => l2_distance(dist, against()?).map_err(core)?,
        DiagnosticKind::RelativeL2ToClassical => {
            let c = against()?;
            l2_distance(dist, c).map_err(core)? / l2_norm(c)
        }
        DiagnosticKind::DerivativeNorm(n) => derivative_norm(dist, n as usize).map_err(core)?,
        DiagnosticKind::MeanX => dist.moments(Axis::X).0,
        DiagnosticKind::VarX => dist.moments(Axis::X).1,
        DiagnosticKind::MeanP => dist.moments(Axis::P).0,
        DiagnosticKind::VarP => dist.moments(Axis::P).1,
        DiagnosticKind::EdgeMass => dist.edge_mass(EDGE_BAND),
    })
}

fn applies(diag: DiagnosticKind, engine: EngineKind) -> bool {
    !(diag.needs_classical() && engine == EngineKind::Classical)
}

/// Validates the config and builds every engine without stepping.
pub fn validate(config: &ExperimentConfig) -> LabResult<Setup> {
    let setup = config.setup()?;
    for &kind in &config.engines {
        Engine::build(kind, config, &setup)?;
    }
    Ok(setup)
}

/// Runs every configured engine from the same initial field, sampling the
/// configured diagnostics every `sample_stride` steps and at the end.
///
/// Engines advance in chunks that end on sample and snapshot boundaries.
/// The boundaries depend only on the config, never on whether snapshots
/// are written, so the diagnostic stream is bit-identical either way.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> LabResult<RunReport> {
    if config.sweep.is_some() {
        return Err(LabError::validation("sweep", "config has a sweep; run it with the sweep command"));
    }
    let started = Instant::now();
    let setup = config.setup()?;
    let mut engines = config
        .engines
        .iter()
        .map(|&k| Engine::build(k, config, &setup))
        .collect::<LabResult<Vec<_>>>()?;
    let mut fields: Vec<Distribution> = config.engines.iter().map(|_| setup.initial.clone()).collect();
    let classical_idx = config.engines.iter().position(|e| *e == EngineKind::Classical);

    let mut resolved = config.clone();
    if let Some(dir) = &options.out_dir {
        resolved.output_dir = Some(dir.clone());
    }
    let snapshot_dir = match (&options.out_dir, options.snapshots) {
        (Some(dir), true) => {
            let d = dir.join("snapshots");
            create_dir(&d)?;
            Some(d)
        }
        _ => None,
    };

    let mut series: Vec<SeriesEntry> = Vec::new();
    for &engine in &config.engines {
        for &diag in config.diagnostics.iter().filter(|d| applies(**d, engine)) {
            series.push(SeriesEntry {
                engine: engine.to_string(),
                diagnostic: diag.to_string(),
                series: DiagnosticSeries::new(format!("{engine}/{diag}")),
            });
        }
    }
    let mut warned = vec![false; engines.len()];
    let mut warnings = Vec::new();

    let dt = config.time.dt;
    let n_steps = setup.n_steps;
    let sample_stride = config.time.sample_stride;
    let snapshot_stride = config.time.snapshot_stride;
    let mut step = 0u64;
    let mut samples = 0usize;
    loop {
        let t = step as f64 * dt;
        if step % sample_stride == 0 || step == n_steps {
            let classical = classical_idx.map(|i| &fields[i]);
            let mut entries = series.iter_mut();
            for (idx, &engine) in config.engines.iter().enumerate() {
                for &diag in config.diagnostics.iter().filter(|d| applies(**d, engine)) {
                    let value = evaluate(diag, &fields[idx], classical, &setup)?;
                    let entry = entries.next().expect("one entry per engine and diagnostic");
                    entry
                        .series
                        .push(t, value)
                        .map_err(|e| LabError::from_core(e, "time"))?;
                }
                let edge = fields[idx].edge_mass(EDGE_BAND);
                if edge > EDGE_MASS_LIMIT && !warned[idx] {
                    warned[idx] = true;
                    warnings.push(format!(
                        "{engine}: {edge:.3e} of the mass lies in the outer {:.0}% band at t = {t}; the periodic wrap may be felt",
                        EDGE_BAND * 100.0
                    ));
                }
            }
            samples += 1;
        }
        let snapshot_due = snapshot_stride.map_or(step == n_steps, |s| step % s == 0 || step == n_steps);
        if let (Some(dir), true) = (&snapshot_dir, snapshot_due) {
            for (idx, &engine) in config.engines.iter().enumerate() {
                write_snapshot(dir, engine, step, t, &fields[idx])?;
            }
        }
        if step == n_steps {
            break;
        }
        let mut next = ((step / sample_stride) + 1) * sample_stride;
        if let Some(s) = snapshot_stride {
            next = next.min(((step / s) + 1) * s);
        }
        let next = next.min(n_steps);
        for (idx, engine) in engines.iter_mut().enumerate() {
            engine.advance(&mut fields[idx], next - step).map_err(|e| match e {
                CoreError::NumericalBlowup { step: s, .. } => LabError::Numerical {
                    engine: config.engines[idx].to_string(),
                    detail: format!("non-finite field at step {s}"),
                },
                other => LabError::from_core(other, config.engines[idx].as_str()),
            })?;
        }
        step = next;
    }

    let mut derived = derive(config, &setup)?;
    if let Some(th) = config.break_threshold {
        for entry in series
            .iter()
            .filter(|s| s.diagnostic == DiagnosticKind::RelativeL2ToClassical.to_string())
        {
            let tb = break_time(&entry.series, th);
            derived
                .break_times
                .insert(entry.engine.clone(), tb.is_finite().then_some(tb));
        }
    }

    let report = RunReport {
        format_version: FORMAT_VERSION,
        config: resolved,
        series,
        derived,
        metadata: Metadata {
            steps: n_steps,
            samples,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
        warnings,
        finals: config.engines.iter().copied().zip(fields).collect(),
    };
    if let Some(dir) = &options.out_dir {
        report.write(dir)?;
    }
    Ok(report)
}

/// Only the trajectory-level scalars: flow and standard-map exponents and
/// the standard-map diffusion coefficient. The running exponent estimates
/// are returned as series on the `trajectory` and `standard_map` engines.
pub fn run_lyapunov(config: &ExperimentConfig, options: &RunOptions) -> LabResult<RunReport> {
    if config.lyapunov.is_none() && config.standard_map.is_none() {
        return Err(LabError::validation(
            "lyapunov",
            "config has neither a lyapunov nor a standard_map section",
        ));
    }
    let started = Instant::now();
    let setup = config.setup()?;
    let (derived, series) = derive_with_series(config, &setup)?;
    let mut resolved = config.clone();
    if let Some(dir) = &options.out_dir {
        resolved.output_dir = Some(dir.clone());
    }
    let report = RunReport {
        format_version: FORMAT_VERSION,
        config: resolved,
        series,
        derived,
        metadata: Metadata {
            steps: 0,
            samples: 0,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
        warnings: Vec::new(),
        finals: Vec::new(),
    };
    if let Some(dir) = &options.out_dir {
        report.write(dir)?;
    }
    Ok(report)
}

fn derive(config: &ExperimentConfig, setup: &Setup) -> LabResult<Derived> {
    derive_with_series(config, setup).map(|(d, _)| d)
}

fn derive_with_series(config: &ExperimentConfig, setup: &Setup) -> LabResult<(Derived, Vec<SeriesEntry>)> {
    let mut derived = Derived::default();
    let mut series = Vec::new();
    if let Some(l) = &config.lyapunov {
        let (x0, p0) = config.initial_state.center();
        let dt = l.dt.unwrap_or(config.time.dt);
        let state = TrajectoryState::new(x0, p0)
            .with_tangent(l.tangent)
            .map_err(|e| LabError::from_core(e, "lyapunov"))?;
        let r = lyapunov_exponent(state, &setup.potential, &setup.params, dt, l.n_steps, l.renorm_every)
            .map_err(|e| LabError::from_core(e, "lyapunov"))?;
        let times = (1..=r.convergence_series.len())
            .map(|i| ((i as u64 * l.renorm_every).min(l.n_steps)) as f64 * dt)
            .collect();
        series.push(running_series("trajectory", times, r.convergence_series.clone())?);
        derived.lyapunov = Some(LyapunovSummary {
            lambda: r.lambda,
            unit: unit_name(r.unit),
            n_steps: r.n_steps,
            x0,
            p0,
        });
    }
    if let Some(s) = &config.standard_map {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let ensemble: Vec<TrajectoryState> = (0..s.ensemble)
            .map(|_| TrajectoryState::new(rng.gen::<f64>() * std::f64::consts::TAU, 0.0))
            .collect();
        let start = ensemble[0];
        let r = standard_map_lyapunov(start.x, start.p, s.k, [1.0, 0.0], s.lyapunov_steps, s.renorm_every)
            .map_err(|e| LabError::from_core(e, "standard_map"))?;
        let times = (1..=r.convergence_series.len())
            .map(|i| ((i as u64 * s.renorm_every).min(s.lyapunov_steps)) as f64)
            .collect();
        series.push(running_series("standard_map", times, r.convergence_series.clone())?);
        let d = ensemble_diffusion(&ensemble, s.k, s.steps, s.batches)
            .map_err(|e| LabError::from_core(e, "standard_map"))?;
        derived.standard_map = Some(StandardMapSummary {
            k: s.k,
            lambda: r.lambda,
            diffusion: d.coefficient,
            diffusion_standard_error: d.standard_error,
            quasilinear_diffusion: 0.25 * s.k * s.k,
        });
    }
    Ok((derived, series))
}

fn running_series(engine: &str, times: Vec<f64>, values: Vec<f64>) -> LabResult<SeriesEntry> {
    Ok(SeriesEntry {
        engine: engine.into(),
        diagnostic: "lyapunov".into(),
        series: DiagnosticSeries::from_parts(format!("{engine}/lyapunov"), times, values)
            .map_err(|e| LabError::from_core(e, "lyapunov"))?,
    })
}

fn unit_name(unit: LyapunovUnit) -> &'static str {
    match unit {
        LyapunovUnit::PerUnitTime => "per_unit_time",
        LyapunovUnit::PerStep => "per_step",
    }
}
