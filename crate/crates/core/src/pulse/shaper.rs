//! Spectral masks of a 4f pulse shaper.
//!
//! Jones convention: component 0 is the input polarization `ε̂₀`, component 1
//! the orthogonal transverse axis. The chiral shaper has its eigen-axes at
//! ±45° to `ε̂₀` and is followed by a quarter-wave plate with its fast axis
//! along `ε̂₀`, which turns each sub-pulse into a linear one.

use crate::error::{Error, Result};
use crate::C64;

use super::bessel::bessel_j;
use super::reduce::DEFAULT_THRESHOLD;
use super::{SpectralField, TimeGrid};

pub const CENTER_WAVELENGTH_NM: f64 = 793.0;

/// Transform-limited Gaussian with intensity FWHM `duration_fs`, polarized
/// along `ε̂₀`, normalized to unit energy.
pub fn gaussian_spectrum(duration_fs: f64, center_nm: f64, grid: TimeGrid) -> Result<SpectralField> {
    grid.validate()?;
    if !(duration_fs > 0.0 && duration_fs.is_finite()) {
        return Err(Error::InvalidInput(format!("pulse duration must be positive, got {duration_fs}")));
    }
    if !(center_nm > 0.0) {
        return Err(Error::InvalidInput("center wavelength must be positive".into()));
    }
    if grid.dt_fs > duration_fs / 8.0 {
        return Err(Error::Config(format!(
            "grid spacing {} fs does not resolve a {duration_fs} fs pulse",
            grid.dt_fs
        )));
    }
    if grid.window_fs() < 10.0 * duration_fs {
        return Err(Error::Config(format!(
            "time window {} fs is too short for a {duration_fs} fs pulse",
            grid.window_fs()
        )));
    }
    // |E(t)|² ∝ exp(−4 ln2 t²/τ²)  ⇔  Ẽ(Ω) ∝ exp(−Ω² τ²/(8 ln2))
    let w = duration_fs * duration_fs / (8.0 * 2f64.ln());
    let amp: Vec<C64> = (0..grid.n)
        .map(|k| {
            let om = grid.omega(k);
            C64::new((-om * om * w).exp(), 0.0)
        })
        .collect();
    let energy: f64 = grid.dt_fs * amp.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let s = 1.0 / energy.sqrt();
    let c0 = amp.into_iter().map(|z| z * s).collect();
    Ok(SpectralField::new(grid, center_nm, [c0, vec![C64::new(0.0, 0.0); grid.n]])?.with_pulse_fwhm(duration_fs))
}

/// Amplitude mask `cos(Ωτ/2)`: two replicas at `±τ/2`.
pub fn apply_double_kick_mask(field: &SpectralField, tau_fs: f64) -> Result<SpectralField> {
    if !(tau_fs >= 0.0 && tau_fs.is_finite()) {
        return Err(Error::InvalidInput(format!("τ must be non-negative, got {tau_fs}")));
    }
    let grid = field.grid();
    if tau_fs >= 0.5 * grid.window_fs() {
        return Err(Error::Config(format!(
            "time window {} fs cannot hold two pulses {tau_fs} fs apart",
            grid.window_fs()
        )));
    }
    let mut out = field.clone();
    for c in out.components_mut().iter_mut() {
        for (k, z) in c.iter_mut().enumerate() {
            *z *= (0.5 * grid.omega(k) * tau_fs).cos();
        }
    }
    Ok(out)
}

/// Dual phase masks `φ₁,₂(Ω) = A sin(Ωτ ± α)` on the shaper eigen-axes.
///
/// Expanding `e^{iA sin x} = Σ_n J_n(A) e^{inx}` shows that the output is a
/// train of pulses at `t = nτ` with amplitude `J_n(A)` and linear
/// polarization at angle `nα` from `ε̂₀`.
pub fn apply_chiral_mask(
    field: &SpectralField,
    tau_fs: f64,
    alpha_rad: f64,
    mod_amp: f64,
) -> Result<SpectralField> {
    if !(tau_fs >= 0.0 && tau_fs.is_finite()) {
        return Err(Error::InvalidInput(format!("τ must be non-negative, got {tau_fs}")));
    }
    if !mod_amp.is_finite() || !alpha_rad.is_finite() {
        return Err(Error::InvalidInput("mask parameters must be finite".into()));
    }
    let [e0, e1] = field.components();
    let p0: f64 = e0.iter().map(|z| z.norm_sqr()).sum();
    let p1: f64 = e1.iter().map(|z| z.norm_sqr()).sum();
    if p1 > 1e-20 * p0 {
        return Err(Error::InvalidInput(
            "chiral mask expects a field polarized along the input axis".into(),
        ));
    }
    let grid = field.grid();
    let jmax = (0..50).map(|n| bessel_j(n, mod_amp).powi(2)).fold(0.0, f64::max);
    let n_pulses = (-50..=50)
        .filter(|&n| bessel_j(n, mod_amp).powi(2) >= DEFAULT_THRESHOLD * jmax)
        .count();
    if tau_fs > 0.0 && grid.window_fs() <= n_pulses as f64 * tau_fs {
        return Err(Error::Config(format!(
            "time window {} fs is shorter than {n_pulses} periods of {tau_fs} fs",
            grid.window_fs()
        )));
    }

    let minus_i = C64::new(0.0, -1.0);
    let mut x = Vec::with_capacity(grid.n);
    let mut y = Vec::with_capacity(grid.n);
    for (k, &e) in e0.iter().enumerate() {
        let phase = grid.omega(k) * tau_fs;
        let m1 = C64::from_polar(1.0, mod_amp * (phase + alpha_rad).sin());
        let m2 = C64::from_polar(1.0, mod_amp * (phase - alpha_rad).sin());
        x.push(e * (m1 + m2) * 0.5);
        y.push(minus_i * e * (m1 - m2) * 0.5);
    }
    let out = SpectralField::new(grid, field.center_nm(), [x, y])?;
    Ok(match field.pulse_fwhm_fs() {
        Some(w) => out.with_pulse_fwhm(w),
        None => out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::new(4096, 0.5).unwrap()
    }

    #[test]
    fn gaussian_is_normalized_and_rejects_coarse_grids() {
        let f = gaussian_spectrum(50.0, 793.0, grid()).unwrap();
        assert!((f.energy() - 1.0).abs() < 1e-12);
        assert!((f.to_time().energy() - 1.0).abs() < 1e-12);
        assert!(matches!(
            gaussian_spectrum(50.0, 793.0, TimeGrid::new(64, 10.0).unwrap()),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            gaussian_spectrum(50.0, 793.0, TimeGrid::new(64, 0.5).unwrap()),
            Err(Error::Config(_))
        ));
        assert!(gaussian_spectrum(-1.0, 793.0, grid()).is_err());
    }

    #[test]
    fn zero_parameters_leave_field_unchanged() {
        let f = gaussian_spectrum(50.0, 793.0, grid()).unwrap();
        assert_eq!(apply_double_kick_mask(&f, 0.0).unwrap(), f);
        let c = apply_chiral_mask(&f, 330.0, 0.7, 0.0).unwrap();
        for (a, b) in c.components().iter().zip(f.components()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn phase_mask_conserves_energy() {
        let f = gaussian_spectrum(50.0, 793.0, grid()).unwrap();
        let c = apply_chiral_mask(&f, 200.0, 0.785, 2.6).unwrap();
        assert!((c.energy() - 1.0).abs() < 1e-12);
        let d = apply_double_kick_mask(&f, 200.0).unwrap();
        assert!(d.energy() <= f.energy());
    }

    #[test]
    fn chiral_mask_rejects_mixed_input() {
        let f = gaussian_spectrum(50.0, 793.0, grid()).unwrap();
        let c = apply_chiral_mask(&f, 200.0, 0.785, 1.0).unwrap();
        assert!(matches!(apply_chiral_mask(&c, 200.0, 0.785, 1.0), Err(Error::InvalidInput(_))));
    }
}
