//! Declarative experiment description.
//!
//! A config is a single JSON document. Every struct rejects unknown keys,
//! optional sections default to "absent", and serialising a parsed config
//! writes every field out, so `parse -> serialize -> parse` is the identity
//! and the written form is the fully resolved one.

use std::fmt;
use std::path::{Path, PathBuf};

use moyal_core::decoherence::{DecoherenceConfig, MeasurementConfig};
use moyal_core::quantum::{MoyalConfig, Truncation};
use moyal_core::{init_gaussian, Distribution, Kick, KickShape, PhaseSpaceGrid, PhysicalParams, Potential};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// Relative slack when checking that `t_final` is covered by whole steps.
const STEP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub system: SystemConfig,
    pub grid: GridConfig,
    pub initial_state: InitialState,
    pub engines: Vec<EngineKind>,
    #[serde(default)]
    pub moyal: MoyalSettings,
    #[serde(default)]
    pub decoherence: Option<DecoherenceSettings>,
    pub time: TimeConfig,
    pub diagnostics: Vec<DiagnosticKind>,
    /// Threshold on `relative_l2_to_classical` that defines the break time.
    #[serde(default)]
    pub break_threshold: Option<f64>,
    #[serde(default)]
    pub lyapunov: Option<LyapunovSettings>,
    #[serde(default)]
    pub standard_map: Option<StandardMapSettings>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    /// Defaults to `out/<name>`; the CLI `--out` flag wins over both.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// `c[k]` multiplies `x^k`.
    pub potential: Vec<f64>,
    #[serde(default)]
    pub kick: Option<KickConfig>,
    pub mass: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickConfig {
    pub strength: f64,
    pub period: f64,
    pub shape: KickShapeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KickShapeConfig {
    Cosine,
    Polynomial(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Uncorrelated Gaussian with explicit widths.
    Gaussian { x0: f64, p0: f64, sigma_x: f64, sigma_p: f64 },
    /// Minimum-uncertainty Gaussian, `σx·σp = ħ/2` with `σx/σp = aspect`.
    /// The widths follow ħ, which is what an ħ sweep wants.
    Coherent {
        x0: f64,
        p0: f64,
        #[serde(default = "unit_aspect")]
        aspect: f64,
    },
}

fn unit_aspect() -> f64 {
    1.0
}

impl InitialState {
    pub fn center(&self) -> (f64, f64) {
        match *self {
            Self::Gaussian { x0, p0, .. } | Self::Coherent { x0, p0, .. } => (x0, p0),
        }
    }

    /// `(σx, σp)` at the given ħ.
    pub fn widths(&self, hbar: f64) -> (f64, f64) {
        match *self {
            Self::Gaussian { sigma_x, sigma_p, .. } => (sigma_x, sigma_p),
            Self::Coherent { aspect, .. } => ((0.5 * hbar * aspect).sqrt(), (0.5 * hbar / aspect).sqrt()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// Liouville transport.
    Classical,
    /// Wigner-Moyal evolution.
    Quantum,
    /// Wigner-Moyal evolution with the configured environment.
    Decoherent,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Quantum => "quantum",
            Self::Decoherent => "decoherent",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoyalSettings {
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub antialias: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationConfig {
    #[default]
    Exact,
    Order(usize),
}

impl MoyalSettings {
    pub fn to_core(self) -> MoyalConfig {
        MoyalConfig {
            truncation: match self.truncation {
                TruncationConfig::Exact => Truncation::Exact,
                TruncationConfig::Order(n) => Truncation::Order(n),
            },
            antialias: self.antialias,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceSettings {
    #[serde(default)]
    pub diffusion_d: f64,
    #[serde(default)]
    pub diffusion_x: f64,
    #[serde(default)]
    pub measurement: Option<MeasurementSettings>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSettings {
    pub period: f64,
    #[serde(default)]
    pub sigma_x_meas: Option<f64>,
    #[serde(default)]
    pub sigma_p_meas: Option<f64>,
}

impl DecoherenceSettings {
    pub fn to_core(self) -> DecoherenceConfig {
        DecoherenceConfig {
            diffusion_d: self.diffusion_d,
            diffusion_x: self.diffusion_x,
            measurement: self.measurement.map(|m| MeasurementConfig {
                period: m.period,
                sigma_x: m.sigma_x_meas,
                sigma_p: m.sigma_p_meas,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    /// The run covers `[0, n·dt]` with `n = ⌈t_final/dt⌉`.
    pub t_final: f64,
    /// Steps between diagnostic samples.
    #[serde(default = "unit_stride")]
    pub sample_stride: u64,
    /// Steps between field snapshots; without it only the final field is
    /// written when snapshots are on.
    #[serde(default)]
    pub snapshot_stride: Option<u64>,
}

fn unit_stride() -> u64 {
    1
}

impl TimeConfig {
    pub fn n_steps(&self) -> u64 {
        (self.t_final / self.dt - STEP_SLACK * (self.t_final / self.dt).max(1.0)).ceil() as u64
    }
}

/// A scalar recorded per engine at every sample time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DiagnosticKind {
    Norm,
    Purity,
    NegativityVolume,
    /// Absolute L2 distance to the classical field.
    L2ToClassical,
    /// L2 distance to the classical field over the classical field's L2 norm.
    RelativeL2ToClassical,
    /// `‖∂ⁿρ/∂pⁿ‖₂`, `n <= 8`.
    DerivativeNorm(u8),
    MeanX,
    VarX,
    MeanP,
    VarP,
    /// Fraction of `∫|ρ|` in the outer band of the grid.
    EdgeMass,
}

impl DiagnosticKind {
    /// Whether this diagnostic compares against the classical engine.
    pub fn needs_classical(self) -> bool {
        matches!(self, Self::L2ToClassical | Self::RelativeL2ToClassical)
    }
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Norm => f.write_str("norm"),
            Self::Purity => f.write_str("purity"),
            Self::NegativityVolume => f.write_str("negativity_volume"),
            Self::L2ToClassical => f.write_str("l2_to_classical"),
            Self::RelativeL2ToClassical => f.write_str("relative_l2_to_classical"),
            Self::DerivativeNorm(n) => write!(f, "derivative_norm_{n}"),
            Self::MeanX => f.write_str("mean_x"),
            Self::VarX => f.write_str("var_x"),
            Self::MeanP => f.write_str("mean_p"),
            Self::VarP => f.write_str("var_p"),
            Self::EdgeMass => f.write_str("edge_mass"),
        }
    }
}

impl TryFrom<String> for DiagnosticKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        Ok(match s.as_str() {
            "norm" => Self::Norm,
            "purity" => Self::Purity,
            "negativity_volume" => Self::NegativityVolume,
            "l2_to_classical" => Self::L2ToClassical,
            "relative_l2_to_classical" => Self::RelativeL2ToClassical,
            "mean_x" => Self::MeanX,
            "var_x" => Self::VarX,
            "mean_p" => Self::MeanP,
            "var_p" => Self::VarP,
            "edge_mass" => Self::EdgeMass,
            other => match other.strip_prefix("derivative_norm_").map(str::parse::<u8>) {
                Some(Ok(n)) if (n as usize) <= moyal_core::diagnostics::MAX_DERIVATIVE_NORM_ORDER => {
                    Self::DerivativeNorm(n)
                }
                _ => return Err(format!("unknown diagnostic `{other}`")),
            },
        })
    }
}

impl From<DiagnosticKind> for String {
    fn from(d: DiagnosticKind) -> String {
        d.to_string()
    }
}

/// Benettin estimate for the trajectory started at the initial state's
/// centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovSettings {
    /// Defaults to `time.dt`.
    #[serde(default)]
    pub dt: Option<f64>,
    pub n_steps: u64,
    pub renorm_every: u64,
    #[serde(default = "x_tangent")]
    pub tangent: [f64; 2],
}

fn x_tangent() -> [f64; 2] {
    [1.0, 0.0]
}

/// Standard-map exponent and ensemble diffusion at kick strength `k`.
/// Ensemble angles are uniform on `[0, 2π)` drawn from the config seed,
/// momenta start at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StandardMapSettings {
    pub k: f64,
    pub lyapunov_steps: u64,
    pub renorm_every: u64,
    pub ensemble: usize,
    pub steps: usize,
    pub batches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Hbar,
    Mass,
    DiffusionD,
    DiffusionX,
    KickStrength,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hbar => "hbar",
            Self::Mass => "mass",
            Self::DiffusionD => "diffusion_d",
            Self::DiffusionX => "diffusion_x",
            Self::KickStrength => "kick_strength",
        }
    }
}

/// Objects built from a validated config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub grid: PhaseSpaceGrid,
    pub params: PhysicalParams,
    pub potential: Potential,
    pub initial: Distribution,
    pub n_steps: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        serde_json::from_str(text).map_err(|e| LabError::validation("config", e.to_string()))
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| Path::new("out").join(&self.name))
    }

    pub fn grid(&self) -> LabResult<PhaseSpaceGrid> {
        let g = &self.grid;
        PhaseSpaceGrid::new(g.x_min, g.x_max, g.n_x, g.p_min, g.p_max, g.n_p)
            .map_err(|e| LabError::from_core(e, "grid"))
    }

    pub fn params(&self) -> LabResult<PhysicalParams> {
        PhysicalParams::new(self.system.hbar, self.system.mass).map_err(|e| LabError::from_core(e, "system"))
    }

    pub fn potential(&self) -> LabResult<Potential> {
        let mut pot = Potential::polynomial(&self.system.potential)
            .map_err(|e| LabError::validation("system.potential", e.to_string()))?;
        if let Some(k) = &self.system.kick {
            let shape = match &k.shape {
                KickShapeConfig::Cosine => KickShape::Cosine,
                KickShapeConfig::Polynomial(c) => KickShape::Polynomial(c.clone()),
            };
            let kick = Kick::new(k.strength, k.period, shape)
                .map_err(|e| LabError::validation("system.kick", e.to_string()))?;
            pot = pot.with_kick(kick);
        }
        Ok(pot)
    }

    pub fn initial_distribution(&self, grid: &PhaseSpaceGrid) -> LabResult<Distribution> {
        let (x0, p0) = self.initial_state.center();
        let (sx, sp) = self.initial_state.widths(self.system.hbar);
        if let InitialState::Coherent { aspect, .. } = self.initial_state {
            if !(aspect.is_finite() && aspect > 0.0) {
                return Err(LabError::validation("initial_state.aspect", "must be positive"));
            }
        }
        init_gaussian(grid, x0, p0, sx, sp).map_err(|e| LabError::from_core(e, "initial_state"))
    }

    pub fn decoherence_core(&self) -> DecoherenceConfig {
        self.decoherence.map(|d| d.to_core()).unwrap_or_default()
    }

    /// Checks every invariant that does not need an engine, then builds the
    /// shared objects. Engine-level checks (time-step guards, kick and
    /// measurement commensurability) run when the engines are built, still
    /// before any step is taken.
    pub fn setup(&self) -> LabResult<Setup> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(LabError::validation("name", "must be a non-empty plain file name"));
        }
        let grid = self.grid()?;
        let params = self.params()?;
        let potential = self.potential()?;
        self.check_engines()?;
        self.check_time()?;
        self.check_diagnostics()?;
        if self.engines.iter().any(|e| *e != EngineKind::Classical) {
            params.check_resolvable(&grid).map_err(|e| LabError::from_core(e, "grid"))?;
        }
        if let Some(d) = &self.decoherence {
            d.to_core()
                .validate(&grid)
                .map_err(|e| LabError::from_core(e, "decoherence"))?;
        }
        self.check_derived()?;
        self.check_sweep()?;
        let initial = self.initial_distribution(&grid)?;
        Ok(Setup {
            grid,
            params,
            potential,
            initial,
            n_steps: self.time.n_steps(),
        })
    }

    fn check_engines(&self) -> LabResult<()> {
        if self.engines.is_empty() {
            return Err(LabError::validation("engines", "at least one engine is required"));
        }
        for (i, e) in self.engines.iter().enumerate() {
            if self.engines[..i].contains(e) {
                return Err(LabError::validation("engines", format!("`{e}` listed twice")));
            }
        }
        if self.engines.contains(&EngineKind::Decoherent) && self.decoherence.is_none() {
            return Err(LabError::validation(
                "decoherence",
                "the decoherent engine needs a decoherence section",
            ));
        }
        Ok(())
    }

    fn check_time(&self) -> LabResult<()> {
        let t = &self.time;
        if !(t.dt.is_finite() && t.dt > 0.0) {
            return Err(LabError::validation("time.dt", "must be positive"));
        }
        if !(t.t_final.is_finite() && t.t_final > 0.0) {
            return Err(LabError::validation("time.t_final", "must be positive"));
        }
        if t.sample_stride == 0 {
            return Err(LabError::validation("time.sample_stride", "must be at least 1"));
        }
        if t.dt * t.sample_stride as f64 > t.t_final {
            return Err(LabError::validation("time.sample_stride", "dt * sample_stride exceeds t_final"));
        }
        if let Some(s) = t.snapshot_stride {
            if s == 0 {
                return Err(LabError::validation("time.snapshot_stride", "must be at least 1"));
            }
            if t.dt * s as f64 > t.t_final {
                return Err(LabError::validation(
                    "time.snapshot_stride",
                    "dt * snapshot_stride exceeds t_final",
                ));
            }
        }
        Ok(())
    }

    fn check_diagnostics(&self) -> LabResult<()> {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if self.diagnostics[..i].contains(d) {
                return Err(LabError::validation("diagnostics", format!("`{d}` listed twice")));
            }
            if d.needs_classical() {
                if !self.engines.contains(&EngineKind::Classical) {
                    return Err(LabError::validation(
                        "diagnostics",
                        format!("`{d}` needs the classical engine"),
                    ));
                }
                if self.engines.len() < 2 {
                    return Err(LabError::validation(
                        "diagnostics",
                        format!("`{d}` needs a quantum or decoherent engine to compare"),
                    ));
                }
            }
        }
        if let Some(th) = self.break_threshold {
            if !(th.is_finite() && th > 0.0) {
                return Err(LabError::validation("break_threshold", "must be positive"));
            }
            if !self.diagnostics.contains(&DiagnosticKind::RelativeL2ToClassical) {
                return Err(LabError::validation(
                    "break_threshold",
                    "needs the relative_l2_to_classical diagnostic",
                ));
            }
        }
        Ok(())
    }

    fn check_derived(&self) -> LabResult<()> {
        if let Some(l) = &self.lyapunov {
            if let Some(dt) = l.dt {
                if !(dt.is_finite() && dt > 0.0) {
                    return Err(LabError::validation("lyapunov.dt", "must be positive"));
                }
            }
            if l.renorm_every == 0 || l.n_steps < 10 * l.renorm_every {
                return Err(LabError::validation(
                    "lyapunov.n_steps",
                    "need renorm_every >= 1 and at least 10 renormalisations",
                ));
            }
        }
        if let Some(s) = &self.standard_map {
            if !s.k.is_finite() {
                return Err(LabError::validation("standard_map.k", "must be finite"));
            }
            if s.renorm_every == 0 || s.lyapunov_steps < 10 * s.renorm_every {
                return Err(LabError::validation(
                    "standard_map.lyapunov_steps",
                    "need renorm_every >= 1 and at least 10 renormalisations",
                ));
            }
            if s.ensemble < moyal_core::classical::MIN_ENSEMBLE {
                return Err(LabError::validation(
                    "standard_map.ensemble",
                    format!("need at least {} members", moyal_core::classical::MIN_ENSEMBLE),
                ));
            }
            if s.steps < 4 {
                return Err(LabError::validation("standard_map.steps", "need at least 4 steps"));
            }
            if s.batches < 2 || s.batches > s.ensemble {
                return Err(LabError::validation(
                    "standard_map.batches",
                    "need between 2 and ensemble batches",
                ));
            }
        }
        Ok(())
    }

    fn check_sweep(&self) -> LabResult<()> {
        let Some(s) = &self.sweep else { return Ok(()) };
        if s.values.is_empty() {
            return Err(LabError::validation("sweep.values", "must not be empty"));
        }
        if s.values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::validation("sweep.values", "must be finite"));
        }
        let exists = match s.parameter {
            SweepParameter::Hbar | SweepParameter::Mass => true,
            SweepParameter::DiffusionD | SweepParameter::DiffusionX => self.decoherence.is_some(),
            SweepParameter::KickStrength => self.system.kick.is_some(),
        };
        if !exists {
            return Err(LabError::validation(
                "sweep.parameter",
                format!("`{}` does not exist in this config", s.parameter.as_str()),
            ));
        }
        Ok(())
    }

    /// This config with the sweep parameter set to `value`, the sweep
    /// removed and the output redirected to `dir`.
    pub fn sweep_member(&self, value: f64, dir: PathBuf) -> Self {
        let mut c = self.clone();
        let parameter = self.sweep.as_ref().map(|s| s.parameter);
        c.sweep = None;
        c.output_dir = Some(dir);
        match parameter {
            Some(SweepParameter::Hbar) => c.system.hbar = value,
            Some(SweepParameter::Mass) => c.system.mass = value,
            Some(SweepParameter::DiffusionD) => {
                if let Some(d) = c.decoherence.as_mut() {
                    d.diffusion_d = value;
                }
            }
            Some(SweepParameter::DiffusionX) => {
                if let Some(d) = c.decoherence.as_mut() {
                    d.diffusion_x = value;
                }
            }
            Some(SweepParameter::KickStrength) => {
                if let Some(k) = c.system.kick.as_mut() {
                    k.strength = value;
                }
            }
            None => {}
        }
        c
    }
}
