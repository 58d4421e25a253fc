//! Probe-induced fluorescence, dichroism traces and their Fourier amplitude
//! at the `J=1 ↔ J=3` coherence frequency.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DensityEnsemble, RotorSystem};
use crate::error::{Error, Result};
use crate::rotor::{cos2_matrix, dipole_matrix, BasisIndex, Parity, PolarizationState};
use crate::C64;

/// How the probe pulse converts rotational coherence into fluorescence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectionModel {
    /// Signal `∝ ⟨cos²θ_probe⟩`. Linear probes only.
    AlignmentProxy,
    /// Two-photon `a → d` excitation through rotor intermediate states with
    /// flat energy denominators. The amplitude into final state `f` is
    /// `Σ_i ⟨f|ε̂·r̂|i⟩⟨i|ε̂·r̂|J,M⟩`; both photons share the probe
    /// polarization. Only the final rotational shells in `final_shells`
    /// contribute (all shells when empty).
    TwoPhoton { final_shells: Vec<u32> },
}

impl Default for DetectionModel {
    fn default() -> Self {
        DetectionModel::TwoPhoton {
            final_shells: vec![1, 3],
        }
    }
}

fn opposite(p: Parity) -> Parity {
    match p {
        Parity::Odd => Parity::Even,
        Parity::Even => Parity::Odd,
        Parity::Any => Parity::Any,
    }
}

/// Hermitian operator `O` on the rotor basis with signal `⟨ψ|O|ψ⟩`.
#[derive(Debug, Clone)]
pub struct ProbeOperator {
    matrix: DMatrix<C64>,
}

impl ProbeOperator {
    pub fn new(basis: &BasisIndex, probe: PolarizationState, model: &DetectionModel) -> Result<Self> {
        match model {
            DetectionModel::AlignmentProxy => {
                if !probe.is_linear() {
                    return Err(Error::Unsupported(
                        "the alignment proxy is blind to circular probe handedness; use the two-photon model"
                            .into(),
                    ));
                }
                Ok(ProbeOperator {
                    matrix: cos2_matrix(basis, probe)?,
                })
            }
            DetectionModel::TwoPhoton { final_shells } => {
                let mid = BasisIndex::new(opposite(basis.parity()), basis.j_max() + 1)?;
                let fin = BasisIndex::new(basis.parity(), basis.j_max() + 2)?;
                for &j in final_shells {
                    if fin.shell_range(j).is_none() {
                        return Err(Error::InvalidInput(format!(
                            "final shell J = {j} is not reachable from the rotor basis"
                        )));
                    }
                }
                let amp = dipole_matrix(&fin, &mid, probe) * dipole_matrix(&mid, basis, probe);
                let keep: Vec<usize> = if final_shells.is_empty() {
                    (0..fin.dim()).collect()
                } else {
                    final_shells
                        .iter()
                        .flat_map(|&j| fin.shell_range(j).unwrap())
                        .collect()
                };
                let rows = amp.select_rows(keep.iter());
                Ok(ProbeOperator {
                    matrix: rows.adjoint() * rows,
                })
            }
        }
    }

    /// Operator the alignment proxy would use for a circular probe,
    /// `|ε̂±·r̂|² = (1 − cos²θ)/2`. It is `M`-diagonal and even in `M`, so
    /// any circular dichroism built from it vanishes identically.
    pub fn circular_alignment_proxy(basis: &BasisIndex) -> Self {
        let n = basis.dim();
        let c = cos2_matrix(basis, PolarizationState::LinearAlongAxis).unwrap();
        let matrix = (DMatrix::identity(n, n) - c) * C64::new(0.5, 0.0);
        ProbeOperator { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

/// Inclusive, uniformly spaced probe delays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayGrid {
    pub start_fs: f64,
    pub stop_fs: f64,
    pub step_fs: f64,
}

impl Default for DelayGrid {
    fn default() -> Self {
        DelayGrid {
            start_fs: 11000.0,
            stop_fs: 17000.0,
            step_fs: 10.0,
        }
    }
}

impl DelayGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_fs > 0.0 && self.step_fs.is_finite()) {
            return Err(Error::Config("delay step must be positive".into()));
        }
        if !(self.stop_fs > self.start_fs) || !self.start_fs.is_finite() || !self.stop_fs.is_finite() {
            return Err(Error::Config("delay range must be finite and increasing".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop_fs - self.start_fs) / self.step_fs + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.start_fs + k as f64 * self.step_fs)
            .collect()
    }
}

/// Ensemble-averaged fluorescence `Σ_members w ⟨ψ(Δt)|O|ψ(Δt)⟩`.
pub fn lif_signal(
    system: &RotorSystem,
    ens: &DensityEnsemble,
    probe: &ProbeOperator,
    delays: &[f64],
) -> Result<Vec<f64>> {
    let stamp = ens.time_stamp();
    if let Some(&d) = delays.iter().find(|&&d| d < stamp - 1e-9) {
        return Err(Error::InvalidInput(format!(
            "probe delay {d} fs precedes the end of the pulse train at {stamp} fs"
        )));
    }
    // ⟨ψ(t)|O|ψ(t)⟩ = Σ_{a,b} c_a* O_ab c_b e^{i(E_a−E_b)(t−t₀)}: aggregate the
    // coefficients by shell pair, since E depends on J only.
    let basis = system.basis();
    let shells: Vec<u32> = basis.shells().collect();
    let shell_of: Vec<usize> = basis
        .states()
        .iter()
        .map(|s| shells.iter().position(|&j| j == s.j).unwrap())
        .collect();
    let ns = shells.len();
    let o = &probe.matrix;
    let mut out = vec![0.0; delays.len()];
    for m in &ens.members {
        let e = system.energies(m.packet.vib)?;
        let c = &m.packet.amplitudes;
        let mut k = vec![C64::new(0.0, 0.0); ns * ns];
        for a in 0..c.len() {
            if c[a].norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..c.len() {
                let oab = o[(a, b)];
                if oab.re == 0.0 && oab.im == 0.0 {
                    continue;
                }
                k[shell_of[a] * ns + shell_of[b]] += c[a].conj() * oab * c[b];
            }
        }
        let e_shell: Vec<f64> = shells
            .iter()
            .map(|&j| e[basis.shell_range(j).unwrap().start])
            .collect();
        let terms: Vec<(C64, f64)> = (0..ns * ns)
            .filter(|&i| k[i].norm() > 0.0)
            .map(|i| (k[i], e_shell[i / ns] - e_shell[i % ns]))
            .collect();
        for (s, &d) in out.iter_mut().zip(delays) {
            let dt = d - m.packet.time_fs;
            let v: f64 = terms
                .iter()
                .map(|(kv, de)| (kv * C64::from_polar(1.0, de * dt)).re)
                .sum();
            *s += m.weight * v;
        }
    }
    // Signals at roundoff level relative to the operator scale count as zero.
    let floor = 1e-12 * o.iter().map(|z| z.norm()).fold(0.0, f64::max) * ens.total_weight();
    if let Some((k, v)) = out.iter().enumerate().find(|(_, &v)| !(v > floor)) {
        return Err(Error::DegenerateSignal(format!(
            "fluorescence signal {v:e} at delay {} fs is not positive",
            delays[k]
        )));
    }
    Ok(out)
}

/// Coherence amplitude `Z` at frequency `nu_thz`, with its signed projection
/// `Re[Z e^{−iφ_ref}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceAmplitude {
    pub nu_thz: f64,
    pub re_z: f64,
    pub im_z: f64,
    pub magnitude: f64,
    pub phase: f64,
    pub signed_value: f64,
    pub phi_ref: f64,
}

impl CoherenceAmplitude {
    pub fn z(&self) -> C64 {
        C64::new(self.re_z, self.im_z)
    }

    pub fn with_reference(&self, phi_ref: f64) -> Self {
        let z = self.z();
        CoherenceAmplitude {
            signed_value: (z * C64::from_polar(1.0, -phi_ref)).re,
            phi_ref,
            ..*self
        }
    }
}

fn check_uniform(delays: &[f64]) -> Result<f64> {
    if delays.len() < 3 {
        return Err(Error::Resolution("too few delay samples".into()));
    }
    let step = delays[1] - delays[0];
    if !(step > 0.0) {
        return Err(Error::InvalidInput("delays must increase".into()));
    }
    for w in delays.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-6 * step {
            return Err(Error::InvalidInput("delay grid is not uniform".into()));
        }
    }
    Ok(step)
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// Hann-windowed single-bin DFT after removal of the windowed mean,
/// normalized by the window's coherent gain so that `cos(2πνt)` gives
/// `|Z| = 1`.
pub fn extract_coherence_amplitude(
    delays: &[f64],
    values: &[f64],
    nu_thz: f64,
    phi_ref: f64,
) -> Result<CoherenceAmplitude> {
    if delays.len() != values.len() {
        return Err(Error::InvalidInput("delay and signal lengths differ".into()));
    }
    check_uniform(delays)?;
    let span = delays[delays.len() - 1] - delays[0];
    let periods = span * nu_thz * 1e-3;
    if periods < 5.0 {
        return Err(Error::Resolution(format!(
            "delay span of {span} fs covers only {periods:.2} periods at {nu_thz} THz (need ≥ 5)"
        )));
    }
    let w = hann(values.len());
    let wsum: f64 = w.iter().sum();
    let mean = w.iter().zip(values).map(|(a, b)| a * b).sum::<f64>() / wsum;
    let omega = 2.0 * PI * nu_thz * 1e-3;
    let mut z = C64::new(0.0, 0.0);
    for ((&t, &s), &wk) in delays.iter().zip(values).zip(&w) {
        z += C64::from_polar(wk * (s - mean), omega * t);
    }
    z *= 2.0 / wsum;
    Ok(CoherenceAmplitude {
        nu_thz,
        re_z: z.re,
        im_z: z.im,
        magnitude: z.norm(),
        phase: z.arg(),
        signed_value: (z * C64::from_polar(1.0, -phi_ref)).re,
        phi_ref,
    })
}

/// Hann-windowed, zero-padded amplitude spectrum: `(frequency THz, |X|)`.
pub fn amplitude_spectrum(delays: &[f64], values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if delays.len() != values.len() {
        return Err(Error::InvalidInput("delay and signal lengths differ".into()));
    }
    let step = check_uniform(delays)?;
    let w = hann(values.len());
    let wsum: f64 = w.iter().sum();
    let mean = w.iter().zip(values).map(|(a, b)| a * b).sum::<f64>() / wsum;
    let n_fft = (8 * values.len()).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); n_fft];
    for (k, (&s, &wk)) in values.iter().zip(&w).enumerate() {
        buf[k] = C64::new(wk * (s - mean), 0.0);
    }
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    let df = 1e3 / (n_fft as f64 * step);
    Ok(buf[..n_fft / 2]
        .iter()
        .enumerate()
        .map(|(k, x)| (k as f64 * df, 2.0 * x.norm() / wsum))
        .collect())
}

/// Frequency (THz) of the largest non-DC spectral peak.
pub fn dominant_frequency(delays: &[f64], values: &[f64]) -> Result<f64> {
    let spec = amplitude_spectrum(delays, values)?;
    let (f, mag) = spec
        .iter()
        .skip(1)
        .cloned()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Resolution("empty spectrum".into()))?;
    if !(mag > 0.0) {
        return Err(Error::DegenerateSignal("signal has no oscillating component".into()));
    }
    Ok(f)
}

/// `I⁺`, `I⁻` and their normalized difference `(I⁺ − I⁻)/((I⁺ + I⁻)/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichroismTrace {
    pub delays_fs: Vec<f64>,
    pub i_plus: Vec<f64>,
    pub i_minus: Vec<f64>,
    pub dichroism: Vec<f64>,
    pub amplitude: Option<CoherenceAmplitude>,
}

impl DichroismTrace {
    pub fn from_signals(delays_fs: Vec<f64>, i_plus: Vec<f64>, i_minus: Vec<f64>) -> Result<Self> {
        if i_plus.len() != delays_fs.len() || i_minus.len() != delays_fs.len() {
            return Err(Error::InvalidInput("signal lengths differ".into()));
        }
        let mut dichroism = Vec::with_capacity(delays_fs.len());
        for ((&p, &m), &d) in i_plus.iter().zip(&i_minus).zip(&delays_fs) {
            let mean = 0.5 * (p + m);
            if mean == 0.0 || !mean.is_finite() {
                return Err(Error::DegenerateSignal(format!(
                    "I⁺ + I⁻ vanishes at delay {d} fs"
                )));
            }
            dichroism.push((p - m) / mean);
        }
        Ok(DichroismTrace {
            delays_fs,
            i_plus,
            i_minus,
            dichroism,
            amplitude: None,
        })
    }

    /// Attaches the coherence amplitude at `nu_thz`.
    pub fn with_amplitude(mut self, nu_thz: f64, phi_ref: f64) -> Result<Self> {
        self.amplitude = Some(extract_coherence_amplitude(
            &self.delays_fs,
            &self.dichroism,
            nu_thz,
            phi_ref,
        )?);
        Ok(self)
    }
}

/// Dichroism between two probe polarizations on one ensemble.
pub fn dichroism(
    system: &RotorSystem,
    ens: &DensityEnsemble,
    pair: (PolarizationState, PolarizationState),
    model: &DetectionModel,
    delays: &[f64],
) -> Result<DichroismTrace> {
    let basis = system.basis();
    let plus = lif_signal(system, ens, &ProbeOperator::new(basis, pair.0, model)?, delays)?;
    let minus = lif_signal(system, ens, &ProbeOperator::new(basis, pair.1, model)?, delays)?;
    DichroismTrace::from_signals(delays.to_vec(), plus, minus)
}

/// Dichroism between two excitation arms probed with a fixed polarization;
/// this is the train-modulation scheme, where the excitation polarization
/// or handedness alternates and the probe is held constant.
pub fn dichroism_of_arms(
    system: &RotorSystem,
    plus: &DensityEnsemble,
    minus: &DensityEnsemble,
    probe: &ProbeOperator,
    delays: &[f64],
) -> Result<DichroismTrace> {
    let i_plus = lif_signal(system, plus, probe, delays)?;
    let i_minus = lif_signal(system, minus, probe, delays)?;
    DichroismTrace::from_signals(delays.to_vec(), i_plus, i_minus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationEntry {
    pub j: u32,
    pub m: i32,
    pub population: f64,
}

/// Ensemble-weighted `|c_{J,M}|²` in basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationMap {
    pub entries: Vec<PopulationEntry>,
}

impl PopulationMap {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.population).sum()
    }

    pub fn get(&self, j: u32, m: i32) -> f64 {
        self.entries
            .iter()
            .find(|e| e.j == j && e.m == m)
            .map_or(0.0, |e| e.population)
    }

    pub fn shell(&self, j: u32) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.j == j)
            .map(|e| e.population)
            .sum()
    }

    /// `max |P(J,M) − P(J,−M)|`.
    pub fn m_asymmetry(&self) -> f64 {
        self.mirror_deviation(self)
    }

    /// `max |P(J,M) − P′(J,−M)|`.
    pub fn mirror_deviation(&self, other: &PopulationMap) -> f64 {
        self.entries
            .iter()
            .map(|e| (e.population - other.get(e.j, -e.m)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn population_map(ens: &DensityEnsemble, basis: &BasisIndex) -> PopulationMap {
    let mut pops = vec![0.0; basis.dim()];
    for m in &ens.members {
        for (p, c) in pops.iter_mut().zip(m.packet.amplitudes.iter()) {
            *p += m.weight * c.norm_sqr();
        }
    }
    PopulationMap {
        entries: basis
            .states()
            .iter()
            .zip(pops)
            .map(|(s, population)| PopulationEntry {
                j: s.j,
                m: s.m,
                population,
            })
            .collect(),
    }
}
