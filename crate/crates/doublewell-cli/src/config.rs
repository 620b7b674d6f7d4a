//! Run configuration: JSON schema, validation, and flag overrides.

use std::path::PathBuf;

use serde::Deserialize;

use doublewell::gatesim::{RampProfile, RampShape};
use doublewell::grid::{build_grid, Grid};
use doublewell::potential::PotentialSpec;
use doublewell::twobody::ContactInteraction;

use crate::CliError;

/// Subcommand selector, also accepted as `command` inside the config file
/// (the CLI subcommand wins).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Spectrum,
    Tunnel,
    Twobody,
    Leveldiagram,
    Gate,
    Sweep,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Number of states solved for (single-particle export and two-body levels).
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_k() -> usize {
    4
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    450
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { k: default_k(), tol: default_tol(), max_iter: default_max_iter() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    /// Total evolution time; defaults to 1.25 tunneling periods.
    #[serde(default)]
    pub t_final: Option<f64>,
    /// Step size; defaults to period/10000, adjusted to divide t_final.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_evolve_stride")]
    pub store_stride: usize,
}

fn default_evolve_stride() -> usize {
    5
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig { t_final: None, dt: None, store_stride: default_evolve_stride() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    #[serde(default = "default_target_phase")]
    pub target_phase: f64,
    /// Calibrate t_hold to the target phase before simulating.
    #[serde(default = "default_true")]
    pub calibrate: bool,
    #[serde(default = "default_gate_dt")]
    pub dt: f64,
    #[serde(default = "default_n_quad")]
    pub n_quad: usize,
    #[serde(default = "default_store_stride")]
    pub store_stride: usize,
    #[serde(default = "default_max_hold")]
    pub max_hold: f64,
    /// Also write the decimated sector trajectories as CSV.
    #[serde(default)]
    pub write_trajectory: bool,
}

fn default_target_phase() -> f64 {
    std::f64::consts::PI
}
fn default_true() -> bool {
    true
}
fn default_gate_dt() -> f64 {
    1e-3
}
fn default_n_quad() -> usize {
    16
}
fn default_store_stride() -> usize {
    200
}
fn default_max_hold() -> f64 {
    2000.0
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            target_phase: default_target_phase(),
            calibrate: true,
            dt: default_gate_dt(),
            n_quad: default_n_quad(),
            store_stride: default_store_stride(),
            max_hold: default_max_hold(),
            write_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    BarrierHeight,
    THold,
    InteractionStrength,
}

impl SweepParam {
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepParam::BarrierHeight => "barrier_height",
            SweepParam::THold => "t_hold",
            SweepParam::InteractionStrength => "interaction_strength",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepConfig {
    /// Axis values: `count` points from start to stop inclusive.
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n as f64 - 1.0))
                .collect(),
        }
    }
}

/// Top-level run configuration. Unknown keys are rejected everywhere.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<CommandKind>,
    pub grid: GridConfig,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub interaction: Option<ContactInteraction>,
    #[serde(default)]
    pub ramp: Option<RampProfile>,
    #[serde(default)]
    pub gate: Option<GateConfig>,
    #[serde(default)]
    pub evolve: Option<EvolveConfig>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config schema: {e}")))
    }

    /// Build the validated grid.
    pub fn build_grid(&self) -> Result<Grid, CliError> {
        build_grid(self.grid.n, self.grid.x_min, self.grid.x_max)
            .map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    pub fn solver(&self) -> SolverConfig {
        self.solver.clone().unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0x00c0_ffee)
    }

    pub fn interaction_required(&self) -> Result<ContactInteraction, CliError> {
        self.interaction
            .ok_or_else(|| CliError::Config("this command needs an `interaction` section".into()))
    }

    pub fn ramp_required(&self) -> Result<RampProfile, CliError> {
        let ramp = self
            .ramp
            .ok_or_else(|| CliError::Config("this command needs a `ramp` section".into()))?;
        ramp.validate().map_err(|e| CliError::Config(format!("ramp: {e}")))?;
        Ok(ramp)
    }

    pub fn sweep_required(&self) -> Result<SweepConfig, CliError> {
        let sweep = self
            .sweep
            .clone()
            .ok_or_else(|| CliError::Config("this command needs a `sweep` section".into()))?;
        if !sweep.start.is_finite() || !sweep.stop.is_finite() {
            return Err(CliError::Config("sweep bounds must be finite".into()));
        }
        Ok(sweep)
    }

    /// Geometry of the double box, required by tunnel/leveldiagram/gate.
    pub fn double_box_geometry(&self) -> Result<(f64, f64), CliError> {
        match self.potential {
            PotentialSpec::DoubleBox { length, barrier_width, .. } => {
                Ok((length, barrier_width))
            }
            _ => Err(CliError::Config(
                "this command needs a double_box potential".into(),
            )),
        }
    }

    /// Validate the parts every command touches.
    pub fn validate_common(&self) -> Result<(), CliError> {
        self.build_grid()?;
        self.potential
            .validate()
            .map_err(|e| CliError::Config(format!("potential: {e}")))?;
        if let Some(ContactInteraction { strength }) = self.interaction {
            if !strength.is_finite() {
                return Err(CliError::Config("interaction strength must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Flag overrides; every field mirrors a config entry and wins over it.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Interior grid points.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Box length L of the potential.
    #[arg(long)]
    pub box_length: Option<f64>,
    #[arg(long)]
    pub barrier_width: Option<f64>,
    #[arg(long)]
    pub barrier_height: Option<f64>,
    /// Contact interaction strength a.
    #[arg(long)]
    pub strength: Option<f64>,
    #[arg(long)]
    pub v_high: Option<f64>,
    #[arg(long)]
    pub v_low: Option<f64>,
    #[arg(long)]
    pub t_ramp: Option<f64>,
    #[arg(long)]
    pub t_hold: Option<f64>,
    /// Ramp edge shape: smoothstep, linear or cosine.
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long)]
    pub target_phase: Option<f64>,
    /// Skip hold-time calibration and simulate the ramp as given.
    #[arg(long)]
    pub no_calibrate: bool,
    /// Stepper dt for gate runs.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub n_quad: Option<usize>,
    /// Evolution time for tunnel runs.
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Stepper dt for tunnel runs.
    #[arg(long)]
    pub evolve_dt: Option<f64>,
    /// Number of states to solve for.
    #[arg(long)]
    pub k: Option<usize>,
    /// Sweep parameter: barrier_height, t_hold or interaction_strength.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(n) = self.n {
            cfg.grid.n = n;
        }
        if let Some(x) = self.x_min {
            cfg.grid.x_min = x;
        }
        if let Some(x) = self.x_max {
            cfg.grid.x_max = x;
        }
        self.apply_potential(cfg)?;
        if let Some(a) = self.strength {
            cfg.interaction = Some(ContactInteraction { strength: a });
        }
        self.apply_ramp(cfg)?;
        let gate_touched = self.target_phase.is_some()
            || self.no_calibrate
            || self.dt.is_some()
            || self.n_quad.is_some();
        if gate_touched {
            let gate = cfg.gate.get_or_insert_with(GateConfig::default);
            if let Some(p) = self.target_phase {
                gate.target_phase = p;
            }
            if self.no_calibrate {
                gate.calibrate = false;
            }
            if let Some(dt) = self.dt {
                gate.dt = dt;
            }
            if let Some(nq) = self.n_quad {
                gate.n_quad = nq;
            }
        }
        if self.t_final.is_some() || self.evolve_dt.is_some() {
            let ev = cfg.evolve.get_or_insert_with(EvolveConfig::default);
            if self.t_final.is_some() {
                ev.t_final = self.t_final;
            }
            if self.evolve_dt.is_some() {
                ev.dt = self.evolve_dt;
            }
        }
        if let Some(k) = self.k {
            let solver = cfg.solver.get_or_insert_with(SolverConfig::default);
            solver.k = k;
        }
        self.apply_sweep(cfg)?;
        Ok(())
    }

    fn apply_potential(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if self.box_length.is_none() && self.barrier_width.is_none() && self.barrier_height.is_none()
        {
            return Ok(());
        }
        match &mut cfg.potential {
            PotentialSpec::InfiniteBox { length } => {
                if let Some(l) = self.box_length {
                    *length = l;
                }
                if self.barrier_width.is_some() || self.barrier_height.is_some() {
                    return Err(CliError::Config(
                        "barrier flags apply only to a double_box potential".into(),
                    ));
                }
            }
            PotentialSpec::DoubleBox { length, barrier_width, barrier_height } => {
                if let Some(l) = self.box_length {
                    *length = l;
                }
                if let Some(w) = self.barrier_width {
                    *barrier_width = w;
                }
                if let Some(h) = self.barrier_height {
                    *barrier_height = h;
                }
            }
            PotentialSpec::Biquartic { .. } => {
                return Err(CliError::Config(
                    "box flags do not apply to a biquartic potential".into(),
                ));
            }
        }
        Ok(())
    }

    fn apply_ramp(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let touched = self.v_high.is_some()
            || self.v_low.is_some()
            || self.t_ramp.is_some()
            || self.t_hold.is_some()
            || self.shape.is_some();
        if !touched {
            return Ok(());
        }
        let ramp = cfg
            .ramp
            .as_mut()
            .ok_or_else(|| CliError::Config("ramp flags need a `ramp` section in the config".into()))?;
        if let Some(v) = self.v_high {
            ramp.v_high = v;
        }
        if let Some(v) = self.v_low {
            ramp.v_low = v;
        }
        if let Some(t) = self.t_ramp {
            ramp.t_ramp = t;
        }
        if let Some(t) = self.t_hold {
            ramp.t_hold = t;
        }
        if let Some(s) = &self.shape {
            ramp.shape = parse_shape(s)?;
        }
        Ok(())
    }

    fn apply_sweep(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let touched = self.param.is_some()
            || self.start.is_some()
            || self.stop.is_some()
            || self.count.is_some();
        if !touched {
            return Ok(());
        }
        if cfg.sweep.is_none() {
            let param = self
                .param
                .as_deref()
                .ok_or_else(|| CliError::Config("sweep flags need --param or a `sweep` section".into()))?;
            cfg.sweep = Some(SweepConfig {
                param: parse_param(param)?,
                start: 0.0,
                stop: 0.0,
                count: 0,
            });
        }
        let sweep = cfg.sweep.as_mut().expect("just ensured");
        if let Some(p) = &self.param {
            sweep.param = parse_param(p)?;
        }
        if let Some(v) = self.start {
            sweep.start = v;
        }
        if let Some(v) = self.stop {
            sweep.stop = v;
        }
        if let Some(v) = self.count {
            sweep.count = v;
        }
        Ok(())
    }
}

fn parse_shape(s: &str) -> Result<RampShape, CliError> {
    match s {
        "smoothstep" => Ok(RampShape::Smoothstep),
        "linear" => Ok(RampShape::Linear),
        "cosine" => Ok(RampShape::Cosine),
        other => Err(CliError::Config(format!(
            "unknown ramp shape {other:?} (expected smoothstep, linear or cosine)"
        ))),
    }
}

fn parse_param(s: &str) -> Result<SweepParam, CliError> {
    match s {
        "barrier_height" => Ok(SweepParam::BarrierHeight),
        "t_hold" => Ok(SweepParam::THold),
        "interaction_strength" => Ok(SweepParam::InteractionStrength),
        other => Err(CliError::Config(format!(
            "unknown sweep parameter {other:?} (expected barrier_height, t_hold or interaction_strength)"
        ))),
    }
}
