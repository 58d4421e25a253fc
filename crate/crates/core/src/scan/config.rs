//! Versioned JSON run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::probe::{DelayGrid, DetectionModel};
use crate::pulse::{TimeGrid, CENTER_WAVELENGTH_NM, DEFAULT_THRESHOLD};
use crate::rotor::RotorSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauRange {
    pub start_fs: f64,
    pub stop_fs: f64,
    pub step_fs: f64,
}

impl TauRange {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_fs - self.start_fs) / self.step_fs + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start_fs + k as f64 * self.step_fs).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitationMode {
    DoubleKick,
    Chiral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMode {
    Impulsive,
    Field,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Excitation {
    pub mode: ExcitationMode,
    /// Period used by `delay-scan`, `populations` and `train preview`.
    pub tau_fs: f64,
    pub tau_range: TauRange,
    #[serde(default = "default_alpha")]
    pub alpha_deg: f64,
    #[serde(default = "default_mod_amp")]
    pub mod_amp: f64,
    /// Total kick strength of the train, `P_total`.
    pub kick_strength: f64,
    #[serde(default = "default_propagation")]
    pub propagation: PropagationMode,
    #[serde(default = "default_fwhm")]
    pub pulse_fwhm_fs: f64,
    #[serde(default = "default_center")]
    pub center_nm: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_step")]
    pub field_step_fs: f64,
    #[serde(default)]
    pub grid: TimeGrid,
    /// Periods for the population report; empty selects the defaults.
    #[serde(default)]
    pub population_taus_fs: Vec<f64>,
}

fn default_alpha() -> f64 {
    45.0
}
fn default_mod_amp() -> f64 {
    2.6
}
fn default_propagation() -> PropagationMode {
    PropagationMode::Impulsive
}
fn default_fwhm() -> f64 {
    50.0
}
fn default_center() -> f64 {
    CENTER_WAVELENGTH_NM
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_step() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbePair {
    /// Fixed linear probe along the quantization axis; kicks parallel vs
    /// perpendicular to it.
    Linear,
    /// Fixed circular probe; chiral trains of opposite handedness.
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub pair: ProbePair,
    #[serde(default)]
    pub model: DetectionModel,
    #[serde(default)]
    pub delays: DelayGrid,
    /// Circular probe used by `delay-scan`.
    #[serde(default = "default_handedness")]
    pub handedness: Handedness,
}

fn default_handedness() -> Handedness {
    Handedness::Plus
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    /// Omit wall-clock timestamps so that repeated runs are byte-identical.
    #[serde(default = "default_true")]
    pub deterministic: bool,
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            format: OutputFormat::Csv,
            deterministic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub rotor: RotorSpec,
    pub excitation: Excitation,
    pub probe: ProbeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Double-kick linear-dichroism defaults: τ over [150, 715] fs in 5 fs
    /// steps, 0.3 per kick.
    pub fn ld_default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            rotor: RotorSpec::he2_metastable(),
            excitation: Excitation {
                mode: ExcitationMode::DoubleKick,
                tau_fs: 440.0,
                tau_range: TauRange {
                    start_fs: 150.0,
                    stop_fs: 715.0,
                    step_fs: 5.0,
                },
                alpha_deg: 0.0,
                mod_amp: default_mod_amp(),
                kick_strength: 0.6,
                propagation: PropagationMode::Impulsive,
                pulse_fwhm_fs: default_fwhm(),
                center_nm: default_center(),
                threshold: default_threshold(),
                field_step_fs: default_step(),
                grid: TimeGrid::default(),
                population_taus_fs: Vec::new(),
            },
            probe: ProbeConfig {
                pair: ProbePair::Linear,
                model: DetectionModel::default(),
                delays: DelayGrid::default(),
                handedness: Handedness::Plus,
            },
            output: OutputConfig::default(),
        }
    }

    /// Chiral-train circular-dichroism defaults: α = 45°, A = 2.6, τ over
    /// [50, 715] fs.
    pub fn cd_default() -> Self {
        let mut cfg = Self::ld_default();
        cfg.excitation.mode = ExcitationMode::Chiral;
        cfg.excitation.tau_fs = 330.0;
        cfg.excitation.tau_range.start_fs = 50.0;
        cfg.excitation.alpha_deg = 45.0;
        cfg.probe.pair = ProbePair::Circular;
        cfg
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Canonical form: keys sorted, no insignificant whitespace.
    pub fn canonical_json(&self) -> String {
        // serde_json::Value keeps object keys in a BTreeMap.
        serde_json::to_value(self)
            .and_then(|v| serde_json::to_string(&v))
            .expect("configuration serializes")
    }

    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.rotor.validate()?;
        let ex = &self.excitation;
        let r = ex.tau_range;
        if !(r.start_fs > 0.0 && r.step_fs > 0.0 && r.stop_fs >= r.start_fs)
            || !(r.start_fs.is_finite() && r.stop_fs.is_finite() && r.step_fs.is_finite())
        {
            return Err(Error::Config("τ range must be positive and ordered".into()));
        }
        if !(ex.tau_fs >= 0.0 && ex.tau_fs.is_finite()) {
            return Err(Error::Config("τ must be non-negative".into()));
        }
        if ex.mode == ExcitationMode::Chiral && !(ex.tau_fs > 0.0) {
            return Err(Error::Config("chiral trains need τ > 0".into()));
        }
        if !(ex.kick_strength >= 0.0 && ex.kick_strength.is_finite()) {
            return Err(Error::Config("kick_strength must be non-negative".into()));
        }
        if !ex.alpha_deg.is_finite() || !ex.mod_amp.is_finite() {
            return Err(Error::Config("alpha_deg and mod_amp must be finite".into()));
        }
        if !(ex.threshold > 0.0 && ex.threshold < 1.0) {
            return Err(Error::Config("threshold must lie in (0, 1)".into()));
        }
        if !(ex.pulse_fwhm_fs > 0.0) || !(ex.field_step_fs > 0.0) || !(ex.center_nm > 0.0) {
            return Err(Error::Config("pulse parameters must be positive".into()));
        }
        ex.grid.validate()?;
        if ex.population_taus_fs.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::Config("population τ values must be non-negative".into()));
        }
        match (ex.mode, self.probe.pair) {
            (ExcitationMode::DoubleKick, ProbePair::Linear) | (ExcitationMode::Chiral, ProbePair::Circular) => {}
            (m, p) => {
                return Err(Error::Config(format!(
                    "excitation mode {m:?} is incompatible with the {p:?} probe pair"
                )))
            }
        }
        if self.probe.pair == ProbePair::Circular && self.probe.model == DetectionModel::AlignmentProxy {
            return Err(Error::Config(
                "circular dichroism needs the two-photon detection model".into(),
            ));
        }
        self.probe.delays.validate()?;
        // The probe window must start after the longest train.
        let longest = r.stop_fs.max(ex.tau_fs).max(ex.population_taus_fs.iter().cloned().fold(0.0, f64::max));
        let end = match ex.mode {
            ExcitationMode::DoubleKick => 0.5 * longest,
            ExcitationMode::Chiral => {
                crate::pulse::PulseTrainDescriptor::chiral(longest.max(1.0), 0.0, ex.mod_amp, 1.0, ex.threshold, 0.0)?
                    .last_time()
                    .unwrap_or(0.0)
            }
        } + match ex.propagation {
            PropagationMode::Impulsive => 0.0,
            PropagationMode::Field => 0.5 * ex.grid.window_fs(),
        };
        if self.probe.delays.start_fs < end {
            return Err(Error::Config(format!(
                "probe delays start at {} fs, before the train ends at {end} fs",
                self.probe.delays.start_fs
            )));
        }
        Ok(())
    }
}
