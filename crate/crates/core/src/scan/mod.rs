//! Scan drivers reproducing the τ and Δt dependences of the dichroism
//! signals, and population reports.
//!
//! Linear dichroism uses a fixed probe along the quantization axis; the two
//! arms are double kicks parallel (`ẑ`) and perpendicular (`x̂`) to it.
//! Circular dichroism uses a fixed circular probe; the two arms are chiral
//! trains with twist `+α` and `−α` in the plane transverse to the beam.

mod config;
mod output;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DensityEnsemble, FieldFrame, RotorSystem};
use crate::error::{Error, Result};
use crate::probe::{
    dichroism_of_arms, population_map, CoherenceAmplitude, DichroismTrace, PopulationEntry, ProbeOperator,
};
use crate::pulse::{
    apply_chiral_mask, apply_double_kick_mask, cross_correlation, find_peaks, gaussian_spectrum,
    polarization_angle, to_descriptor, PulseTrainDescriptor, VectorField,
};
use crate::rotor::PolarizationState;

pub use config::{
    Excitation, ExcitationMode, Handedness, OutputConfig, OutputFormat, ProbeConfig, ProbePair,
    PropagationMode, RunConfig, TauRange, SCHEMA_VERSION,
};
pub use output::{write_populations, write_preview, write_scan, write_trace};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Norm deviation above which a row is flagged.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Top-shell population above which a row is flagged as unconverged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Plus,
    Minus,
}

/// Kick train of one dichroism arm at period `tau_fs`.
pub fn arm_train(cfg: &RunConfig, tau_fs: f64, alpha_rad: f64, arm: Arm) -> Result<PulseTrainDescriptor> {
    let ex = &cfg.excitation;
    match ex.mode {
        ExcitationMode::DoubleKick => {
            let pol = match arm {
                Arm::Plus => PolarizationState::LinearAlongAxis,
                Arm::Minus => PolarizationState::linear(0.0),
            };
            PulseTrainDescriptor::double_kick(tau_fs, ex.kick_strength, pol)
        }
        ExcitationMode::Chiral => {
            let a = match arm {
                Arm::Plus => alpha_rad,
                Arm::Minus => -alpha_rad,
            };
            PulseTrainDescriptor::chiral(tau_fs, a, ex.mod_amp, ex.kick_strength, ex.threshold, 0.0)
        }
    }
}

/// Shaped field of one arm, in kick units, and the lab frame of its two
/// components.
pub fn arm_field(cfg: &RunConfig, tau_fs: f64, alpha_rad: f64, arm: Arm) -> Result<(VectorField, FieldFrame)> {
    let ex = &cfg.excitation;
    let base = gaussian_spectrum(ex.pulse_fwhm_fs, ex.center_nm, ex.grid)?;
    let (shaped, frame) = match ex.mode {
        ExcitationMode::DoubleKick => (
            apply_double_kick_mask(&base, tau_fs)?,
            FieldFrame::probe_axis(arm == Arm::Plus),
        ),
        ExcitationMode::Chiral => {
            let a = if arm == Arm::Plus { alpha_rad } else { -alpha_rad };
            (apply_chiral_mask(&base, tau_fs, a, ex.mod_amp)?, FieldFrame::along_propagation())
        }
    };
    let field = shaped.to_time().scaled_to_strength(ex.kick_strength)?;
    Ok((field, frame))
}

fn propagate_arm(
    system: &RotorSystem,
    initial: &DensityEnsemble,
    cfg: &RunConfig,
    tau_fs: f64,
    alpha_rad: f64,
    arm: Arm,
) -> Result<DensityEnsemble> {
    match cfg.excitation.propagation {
        PropagationMode::Impulsive => {
            let train = arm_train(cfg, tau_fs, alpha_rad, arm)?;
            let start = system.evolve_ensemble_to(initial, train.first_time().unwrap_or(0.0))?;
            system.propagate_train(&start, &train)
        }
        PropagationMode::Field => {
            let (field, frame) = arm_field(cfg, tau_fs, alpha_rad, arm)?;
            let start = system.evolve_ensemble_to(initial, field.grid().time(0))?;
            system.propagate_field(&start, &field, frame, cfg.excitation.field_step_fs)
        }
    }
}

/// Both arms of one scan point, with diagnostics.
#[derive(Debug, Clone)]
pub struct PointState {
    pub plus: DensityEnsemble,
    pub minus: DensityEnsemble,
    pub norm_deviation: f64,
    pub top_shell_population: f64,
}

pub fn propagate_point(system: &RotorSystem, cfg: &RunConfig, tau_fs: f64, alpha_rad: f64) -> Result<PointState> {
    let initial = system.initial_ensemble()?;
    let plus = propagate_arm(system, &initial, cfg, tau_fs, alpha_rad, Arm::Plus)?;
    let minus = propagate_arm(system, &initial, cfg, tau_fs, alpha_rad, Arm::Minus)?;
    let basis = system.basis();
    Ok(PointState {
        norm_deviation: plus.max_norm_deviation().max(minus.max_norm_deviation()),
        top_shell_population: plus.top_shell_population(basis).max(minus.top_shell_population(basis)),
        plus,
        minus,
    })
}

/// The fixed probe polarization of the run family.
pub fn probe_polarization(cfg: &RunConfig, handedness: Handedness) -> PolarizationState {
    match cfg.probe.pair {
        ProbePair::Linear => PolarizationState::LinearAlongAxis,
        ProbePair::Circular => match handedness {
            Handedness::Plus => PolarizationState::CircularPlus,
            Handedness::Minus => PolarizationState::CircularMinus,
        },
    }
}

/// Shared state of a run: the rotor system and probe operators.
pub struct Session {
    pub cfg: RunConfig,
    pub system: RotorSystem,
    probe_plus: ProbeOperator,
    probe_minus: ProbeOperator,
    delays: Vec<f64>,
    nu_thz: f64,
}

impl Session {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let system = RotorSystem::new(cfg.rotor.clone())?;
        let probe_plus = ProbeOperator::new(
            system.basis(),
            probe_polarization(cfg, Handedness::Plus),
            &cfg.probe.model,
        )?;
        let probe_minus = ProbeOperator::new(
            system.basis(),
            probe_polarization(cfg, Handedness::Minus),
            &cfg.probe.model,
        )?;
        Ok(Session {
            nu_thz: cfg.rotor.nu13_thz(),
            delays: cfg.probe.delays.points(),
            cfg: cfg.clone(),
            system,
            probe_plus,
            probe_minus,
        })
    }

    pub fn nu_thz(&self) -> f64 {
        self.nu_thz
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn alpha_rad(&self) -> f64 {
        self.cfg.excitation.alpha_deg.to_radians()
    }

    fn probe(&self, h: Handedness) -> &ProbeOperator {
        match h {
            Handedness::Plus => &self.probe_plus,
            Handedness::Minus => &self.probe_minus,
        }
    }

    pub fn trace(&self, point: &PointState, h: Handedness, phi_ref: f64) -> Result<DichroismTrace> {
        dichroism_of_arms(&self.system, &point.plus, &point.minus, self.probe(h), &self.delays)?
            .with_amplitude(self.nu_thz, phi_ref)
    }

    /// The phase reference of the run family: the phase of `Z` for the
    /// double kick at `τ = 1/ν₁,₃` (linear dichroism), or for the chiral
    /// train with `α = 45°`, `τ = 3/(4ν₁,₃)` and the `σ⁺` probe (circular
    /// dichroism).
    pub fn phi_ref(&self) -> Result<f64> {
        let (tau, alpha) = match self.cfg.excitation.mode {
            ExcitationMode::DoubleKick => (1e3 / self.nu_thz, 0.0),
            ExcitationMode::Chiral => (0.75e3 / self.nu_thz, PI / 4.0),
        };
        let point = propagate_point(&self.system, &self.cfg, tau, alpha)?;
        let tr = self.trace(&point, Handedness::Plus, 0.0)?;
        Ok(tr.amplitude.unwrap().phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub tau_fs: f64,
    pub magnitude: f64,
    pub signed_value: f64,
    pub phase: f64,
    pub norm_ok: bool,
    pub converged: bool,
    pub error: Option<String>,
}

impl ScanRow {
    fn failed(tau_fs: f64, err: &Error) -> Self {
        ScanRow {
            tau_fs,
            magnitude: f64::NAN,
            signed_value: f64::NAN,
            phase: f64::NAN,
            norm_ok: false,
            converged: false,
            error: Some(err.to_string()),
        }
    }

    fn from_amplitude(tau_fs: f64, a: &CoherenceAmplitude, point: &PointState) -> Self {
        let rel = (a.z() * crate::C64::from_polar(1.0, -a.phi_ref)).arg();
        ScanRow {
            tau_fs,
            magnitude: a.magnitude,
            signed_value: a.signed_value,
            phase: rel,
            norm_ok: point.norm_deviation <= NORM_TOLERANCE,
            converged: point.top_shell_population < CONVERGENCE_TOLERANCE,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSeries {
    pub name: String,
    pub rows: Vec<ScanRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub observable: String,
    pub schema_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub nu_thz: f64,
    pub phi_ref: f64,
    pub series: Vec<ScanSeries>,
    /// τ values whose step to the next row is a continuity outlier.
    pub continuity_outliers: Vec<f64>,
    pub timestamp_unix_s: Option<u64>,
}

impl ScanResult {
    pub fn series(&self, name: &str) -> Option<&ScanSeries> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn failed_rows(&self) -> usize {
        self.series
            .iter()
            .flat_map(|s| &s.rows)
            .filter(|r| r.error.is_some())
            .count()
    }
}

fn timestamp(cfg: &RunConfig) -> Option<u64> {
    if cfg.output.deterministic {
        None
    } else {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs())
    }
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Steps `|v[i+1] − v[i]|` exceeding three times the median of the
/// neighbouring steps (up to three on each side) and 5% of the series
/// peak. Returns the τ at the start of each offending step.
pub fn continuity_outliers(taus: &[f64], values: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let floor = 0.05 * values.iter().filter(|v| v.is_finite()).fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut out = Vec::new();
    for i in 0..d.len() {
        if !d[i].is_finite() {
            continue;
        }
        let mut nb: Vec<f64> = (i.saturating_sub(3)..(i + 4).min(d.len()))
            .filter(|&k| k != i && d[k].is_finite())
            .map(|k| d[k])
            .collect();
        if nb.len() < 2 {
            continue;
        }
        nb.sort_by(f64::total_cmp);
        let med = if nb.len() % 2 == 1 {
            nb[nb.len() / 2]
        } else {
            0.5 * (nb[nb.len() / 2 - 1] + nb[nb.len() / 2])
        };
        if d[i] > 3.0 * med && d[i] > floor.max(1e-12) {
            out.push(taus[i]);
        }
    }
    out
}

/// Evaluates `row` for every τ on the worker pool and transposes the
/// per-τ row sets into series, kept in τ order.
fn scan<F>(taus: &[f64], jobs: usize, row: F) -> Result<Vec<Vec<ScanRow>>>
where
    F: Fn(f64) -> Vec<ScanRow> + Sync,
{
    with_pool(jobs, || taus.par_iter().map(|&t| row(t)).collect::<Vec<_>>()).map(|rows| {
        let n = rows.first().map_or(0, |r| r.len());
        (0..n).map(|k| rows.iter().map(|r| r[k].clone()).collect()).collect()
    })
}

/// Linear-dichroism amplitude `|LD₁,₃|` versus double-kick separation.
pub fn run_ld_scan(cfg: &RunConfig, jobs: usize) -> Result<ScanResult> {
    if cfg.excitation.mode != ExcitationMode::DoubleKick {
        return Err(Error::Config("ld-scan needs a double-kick excitation".into()));
    }
    let session = Session::new(cfg)?;
    let phi_ref = session.phi_ref()?;
    let taus = cfg.excitation.tau_range.points();
    let mut series = scan(&taus, jobs, |tau| {
        let r = propagate_point(&session.system, cfg, tau, 0.0)
            .and_then(|p| session.trace(&p, Handedness::Plus, phi_ref).map(|t| (p, t)));
        vec![match r {
            Ok((p, t)) => ScanRow::from_amplitude(tau, t.amplitude.as_ref().unwrap(), &p),
            Err(e) => ScanRow::failed(tau, &e),
        }]
    })?;
    let rows = series.remove(0);
    let outliers = continuity_outliers(&taus, &rows.iter().map(|r| r.magnitude).collect::<Vec<_>>());
    Ok(ScanResult {
        observable: "ld".into(),
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        config_hash: cfg.config_hash(),
        nu_thz: session.nu_thz(),
        phi_ref,
        series: vec![ScanSeries { name: "ld".into(), rows }],
        continuity_outliers: outliers,
        timestamp_unix_s: timestamp(cfg),
    })
}

/// Signed circular-dichroism amplitude `CD₁,₃` versus chiral-train period,
/// for both circular probes.
pub fn run_cd_scan(cfg: &RunConfig, jobs: usize) -> Result<ScanResult> {
    if cfg.excitation.mode != ExcitationMode::Chiral {
        return Err(Error::Config("cd-scan needs a chiral excitation".into()));
    }
    let session = Session::new(cfg)?;
    let phi_ref = session.phi_ref()?;
    let alpha = session.alpha_rad();
    let taus = cfg.excitation.tau_range.points();
    let series = scan(&taus, jobs, |tau| {
        match propagate_point(&session.system, cfg, tau, alpha) {
            Ok(p) => [Handedness::Plus, Handedness::Minus]
                .into_iter()
                .map(|h| match session.trace(&p, h, phi_ref) {
                    Ok(t) => ScanRow::from_amplitude(tau, t.amplitude.as_ref().unwrap(), &p),
                    Err(e) => ScanRow::failed(tau, &e),
                })
                .collect(),
            Err(e) => vec![ScanRow::failed(tau, &e), ScanRow::failed(tau, &e)],
        }
    })?;
    let outliers = continuity_outliers(&taus, &series[0].iter().map(|r| r.signed_value).collect::<Vec<_>>());
    let mut it = series.into_iter();
    Ok(ScanResult {
        observable: "cd".into(),
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        config_hash: cfg.config_hash(),
        nu_thz: session.nu_thz(),
        phi_ref,
        series: vec![
            ScanSeries {
                name: "cd_sigma_plus".into(),
                rows: it.next().unwrap(),
            },
            ScanSeries {
                name: "cd_sigma_minus".into(),
                rows: it.next().unwrap(),
            },
        ],
        continuity_outliers: outliers,
        timestamp_unix_s: timestamp(cfg),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub observable: String,
    pub tau_fs: f64,
    pub nu_thz: f64,
    pub re_z: f64,
    pub im_z: f64,
    pub magnitude: f64,
    pub phase: f64,
    pub signed_value: f64,
    pub phi_ref: f64,
    pub norm_ok: bool,
    pub converged: bool,
    pub config_hash: String,
    pub schema_version: u32,
    pub tool_version: String,
    pub timestamp_unix_s: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayScanResult {
    pub trace: DichroismTrace,
    pub summary: TraceSummary,
}

/// Full dichroism trace at the configured single τ.
pub fn run_delay_scan(cfg: &RunConfig) -> Result<DelayScanResult> {
    let session = Session::new(cfg)?;
    let phi_ref = session.phi_ref()?;
    let tau = cfg.excitation.tau_fs;
    let point = propagate_point(&session.system, cfg, tau, session.alpha_rad())?;
    let trace = session.trace(&point, cfg.probe.handedness, phi_ref)?;
    let a = trace.amplitude.unwrap();
    let observable = match cfg.probe.pair {
        ProbePair::Linear => "ld".to_string(),
        ProbePair::Circular => match cfg.probe.handedness {
            Handedness::Plus => "cd_sigma_plus".to_string(),
            Handedness::Minus => "cd_sigma_minus".to_string(),
        },
    };
    let summary = TraceSummary {
        observable,
        tau_fs: tau,
        nu_thz: a.nu_thz,
        re_z: a.re_z,
        im_z: a.im_z,
        magnitude: a.magnitude,
        phase: a.phase,
        signed_value: a.signed_value,
        phi_ref,
        norm_ok: point.norm_deviation <= NORM_TOLERANCE,
        converged: point.top_shell_population < CONVERGENCE_TOLERANCE,
        config_hash: cfg.config_hash(),
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        timestamp_unix_s: timestamp(cfg),
    };
    Ok(DelayScanResult { trace, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationTable {
    pub tau_fs: f64,
    pub scenario: String,
    pub total: f64,
    pub entries: Vec<PopulationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationReport {
    pub config_hash: String,
    pub schema_version: u32,
    pub tool_version: String,
    pub tables: Vec<PopulationTable>,
    pub timestamp_unix_s: Option<u64>,
}

impl PopulationReport {
    pub fn table(&self, tau_fs: f64, scenario: &str) -> Option<&PopulationTable> {
        self.tables
            .iter()
            .find(|t| (t.tau_fs - tau_fs).abs() < 1e-9 && t.scenario == scenario)
    }
}

/// Default periods of the population report: 440 and 220 fs for double
/// kicks, 330, 550 and 440 fs for chiral trains.
pub fn default_population_taus(cfg: &RunConfig) -> Vec<f64> {
    if !cfg.excitation.population_taus_fs.is_empty() {
        return cfg.excitation.population_taus_fs.clone();
    }
    match cfg.excitation.mode {
        ExcitationMode::DoubleKick => vec![440.0, 220.0],
        ExcitationMode::Chiral => vec![330.0, 550.0, 440.0],
    }
}

/// Final-state population tables for each τ and both arms: kicks
/// `parallel`/`perpendicular` to the probe, or train handedness
/// `plus`/`minus`.
pub fn emit_population_report(cfg: &RunConfig, taus: &[f64]) -> Result<PopulationReport> {
    let session = Session::new(cfg)?;
    let names = match cfg.excitation.mode {
        ExcitationMode::DoubleKick => ["parallel", "perpendicular"],
        ExcitationMode::Chiral => ["plus", "minus"],
    };
    let mut tables = Vec::new();
    for &tau in taus {
        let point = propagate_point(&session.system, cfg, tau, session.alpha_rad())?;
        for (name, ens) in names.iter().zip([&point.plus, &point.minus]) {
            let map = population_map(ens, session.system.basis());
            tables.push(PopulationTable {
                tau_fs: tau,
                scenario: name.to_string(),
                total: map.total(),
                entries: map.entries,
            });
        }
    }
    Ok(PopulationReport {
        config_hash: cfg.config_hash(),
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        tables,
        timestamp_unix_s: timestamp(cfg),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainPreview {
    pub tau_fs: f64,
    #[serde(skip)]
    pub samples: Vec<(f64, f64, f64)>,
    pub descriptor: Option<PulseTrainDescriptor>,
    pub reduction_error: Option<String>,
    pub cross_correlation_peaks_fs: Vec<f64>,
    pub config_hash: String,
    pub schema_version: u32,
}

/// Time-domain intensity and polarization angle of the shaped train at the
/// configured τ (the `+` arm), its kick reduction and cross-correlation
/// peak positions.
pub fn train_preview(cfg: &RunConfig) -> Result<TrainPreview> {
    cfg.validate()?;
    let ex = &cfg.excitation;
    let (field, _) = arm_field(cfg, ex.tau_fs, ex.alpha_deg.to_radians(), Arm::Plus)?;
    let grid = field.grid();
    let [e1, e2] = field.components();
    let samples = (0..grid.n)
        .map(|j| {
            let i = e1[j].norm_sqr() + e2[j].norm_sqr();
            (grid.time(j), i, polarization_angle(e1[j], e2[j]).to_degrees())
        })
        .collect();
    let (descriptor, reduction_error) = match to_descriptor(&field, ex.threshold) {
        Ok(d) => (Some(d), None),
        Err(e @ Error::ReductionUnavailable(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let xc = cross_correlation(&field, ex.pulse_fwhm_fs)?;
    let peaks = find_peaks(&xc, ex.threshold).into_iter().map(|j| grid.time(j)).collect();
    Ok(TrainPreview {
        tau_fs: ex.tau_fs,
        samples,
        descriptor,
        reduction_error,
        cross_correlation_peaks_fs: peaks,
        config_hash: cfg.config_hash(),
        schema_version: SCHEMA_VERSION,
    })
}
