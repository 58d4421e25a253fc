//! Pulse-shaper synthesis and the reduction of shaped fields to kick trains.
//!
//! Fields are complex envelopes about the carrier `ω₀`. The spectral axis is
//! the detuning `Ω = ω − ω₀` in rad/fs and the two components are
//! orthogonal transverse polarizations, the first being the input
//! polarization `ε̂₀`. Grids are centred: `t_j = (j − N/2)·dt` and
//! `Ω_k = (k − N/2)·dΩ` with `dt·dΩ = 2π/N`. The time-domain field is
//! `E(t_j) = N^{-1/2} Σ_k Ẽ(Ω_k) e^{−iΩ_k t_j}`, so a spectral phase
//! `e^{+inΩτ}` moves a pulse to `t = nτ`. Energies are `dt·Σ|E|²` in both
//! domains.

mod bessel;
mod reduce;
mod shaper;
mod train;

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub use bessel::bessel_j;
pub use reduce::{cross_correlation, find_peaks, polarization_angle, to_descriptor, DEFAULT_THRESHOLD};
pub use shaper::{apply_chiral_mask, apply_double_kick_mask, gaussian_spectrum, CENTER_WAVELENGTH_NM};
pub use train::{DiscardedPulse, PulseTrainDescriptor};

/// Uniform sampling shared by the temporal and spectral representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub n: usize,
    pub dt_fs: f64,
}

impl Default for TimeGrid {
    /// 16384 samples at 0.5 fs: an 8.2 ps window.
    fn default() -> Self {
        TimeGrid {
            n: 16384,
            dt_fs: 0.5,
        }
    }
}

impl TimeGrid {
    pub fn new(n: usize, dt_fs: f64) -> Result<Self> {
        let g = TimeGrid { n, dt_fs };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_multiple_of(4) {
            return Err(Error::Config(format!(
                "grid size must be a multiple of 4 and at least 8, got {}",
                self.n
            )));
        }
        if !(self.dt_fs > 0.0 && self.dt_fs.is_finite()) {
            return Err(Error::Config("grid spacing must be positive".into()));
        }
        Ok(())
    }

    pub fn time(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dt_fs
    }

    pub fn window_fs(&self) -> f64 {
        self.n as f64 * self.dt_fs
    }

    /// Spectral resolution `dΩ` in rad/fs.
    pub fn d_omega(&self) -> f64 {
        2.0 * PI / self.window_fs()
    }

    pub fn omega(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.d_omega()
    }

    /// Index of the sample nearest to `t_fs`, if inside the window.
    pub fn index_of(&self, t_fs: f64) -> Option<usize> {
        let x = (t_fs / self.dt_fs).round() + (self.n / 2) as f64;
        (x >= 0.0 && x < self.n as f64).then_some(x as usize)
    }

    fn plans(&self) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let mut planner = FftPlanner::new();
        (planner.plan_fft_forward(self.n), planner.plan_fft_inverse(self.n))
    }
}

fn energy_of(components: &[Vec<C64>; 2], dt: f64) -> f64 {
    dt * components
        .iter()
        .flat_map(|c| c.iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
}

fn alternate(v: &mut [C64]) {
    for z in v.iter_mut().skip(1).step_by(2) {
        *z = -*z;
    }
}

fn transform(data: &[C64], fft: &dyn Fft<f64>) -> Vec<C64> {
    let mut buf = data.to_vec();
    alternate(&mut buf);
    fft.process(&mut buf);
    alternate(&mut buf);
    let scale = 1.0 / (data.len() as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Two-component complex spectral amplitude on the detuning axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TimeGrid,
    center_nm: f64,
    components: [Vec<C64>; 2],
    pulse_fwhm_fs: Option<f64>,
}

impl SpectralField {
    pub fn new(grid: TimeGrid, center_nm: f64, components: [Vec<C64>; 2]) -> Result<Self> {
        grid.validate()?;
        if components.iter().any(|c| c.len() != grid.n) {
            return Err(Error::InvalidInput("component length does not match the grid".into()));
        }
        Ok(SpectralField {
            grid,
            center_nm,
            components,
            pulse_fwhm_fs: None,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn center_nm(&self) -> f64 {
        self.center_nm
    }

    /// Intensity FWHM of the unshaped pulse the field was built from.
    pub fn pulse_fwhm_fs(&self) -> Option<f64> {
        self.pulse_fwhm_fs
    }

    pub fn with_pulse_fwhm(mut self, fwhm_fs: f64) -> Self {
        self.pulse_fwhm_fs = Some(fwhm_fs);
        self
    }

    pub fn components(&self) -> [&[C64]; 2] {
        [&self.components[0], &self.components[1]]
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<C64>; 2] {
        &mut self.components
    }

    pub fn energy(&self) -> f64 {
        energy_of(&self.components, self.grid.dt_fs)
    }

    pub fn to_time(&self) -> VectorField {
        let (fwd, _) = self.grid.plans();
        VectorField {
            grid: self.grid,
            center_nm: self.center_nm,
            components: [
                transform(&self.components[0], fwd.as_ref()),
                transform(&self.components[1], fwd.as_ref()),
            ],
            pulse_fwhm_fs: self.pulse_fwhm_fs,
        }
    }
}

/// Two-component complex temporal envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: TimeGrid,
    center_nm: f64,
    components: [Vec<C64>; 2],
    pulse_fwhm_fs: Option<f64>,
}

impl VectorField {
    pub fn new(grid: TimeGrid, center_nm: f64, components: [Vec<C64>; 2]) -> Result<Self> {
        grid.validate()?;
        if components.iter().any(|c| c.len() != grid.n) {
            return Err(Error::InvalidInput("component length does not match the grid".into()));
        }
        Ok(VectorField {
            grid,
            center_nm,
            components,
            pulse_fwhm_fs: None,
        })
    }

    pub fn zeros(grid: TimeGrid) -> Result<Self> {
        let z = vec![C64::new(0.0, 0.0); grid.n];
        Self::new(grid, CENTER_WAVELENGTH_NM, [z.clone(), z])
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn center_nm(&self) -> f64 {
        self.center_nm
    }

    /// Intensity FWHM of the unshaped pulse the field was built from.
    pub fn pulse_fwhm_fs(&self) -> Option<f64> {
        self.pulse_fwhm_fs
    }

    pub fn with_pulse_fwhm(mut self, fwhm_fs: f64) -> Self {
        self.pulse_fwhm_fs = Some(fwhm_fs);
        self
    }

    pub fn components(&self) -> [&[C64]; 2] {
        [&self.components[0], &self.components[1]]
    }

    pub fn energy(&self) -> f64 {
        energy_of(&self.components, self.grid.dt_fs)
    }

    /// Total intensity `|E₁|² + |E₂|²` per sample.
    pub fn intensity(&self) -> Vec<f64> {
        self.components[0]
            .iter()
            .zip(&self.components[1])
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    /// Rescales the field so that its energy equals `strength`. In kick
    /// units, energy is the integrated interaction `P`.
    pub fn scaled_to_strength(&self, strength: f64) -> Result<Self> {
        let e = self.energy();
        if !(e > 0.0) {
            return Err(Error::InvalidInput("cannot rescale a zero field".into()));
        }
        if !(strength >= 0.0 && strength.is_finite()) {
            return Err(Error::InvalidInput(format!("kick strength must be non-negative, got {strength}")));
        }
        let s = (strength / e).sqrt();
        let mut out = self.clone();
        for c in &mut out.components {
            c.iter_mut().for_each(|z| *z *= s);
        }
        Ok(out)
    }

    pub fn to_spectral(&self) -> SpectralField {
        let (_, inv) = self.grid.plans();
        SpectralField {
            grid: self.grid,
            center_nm: self.center_nm,
            components: [
                transform(&self.components[0], inv.as_ref()),
                transform(&self.components[1], inv.as_ref()),
            ],
            pulse_fwhm_fs: self.pulse_fwhm_fs,
        }
    }
}
