mod common;

use std::f64::consts::PI;

use rotorkick::pulse::{
    apply_chiral_mask, apply_double_kick_mask, bessel_j, cross_correlation, find_peaks, gaussian_spectrum,
    to_descriptor,
};
use rotorkick::{Error, PolarizationState, TimeGrid};

fn grid() -> TimeGrid {
    TimeGrid::default()
}

/// FWHM of a single-peaked sampled curve, by linear interpolation.
fn fwhm(x: &[f64], y: &[f64]) -> f64 {
    let (imax, &ymax) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let half = 0.5 * ymax;
    let mut l = imax;
    while y[l] > half {
        l -= 1;
    }
    let mut r = imax;
    while y[r] > half {
        r += 1;
    }
    let xl = x[l] + (half - y[l]) / (y[l + 1] - y[l]) * (x[l + 1] - x[l]);
    let xr = x[r - 1] + (half - y[r - 1]) / (y[r] - y[r - 1]) * (x[r] - x[r - 1]);
    xr - xl
}

fn angle_diff_mod_pi(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

#[test]
fn bessel_matches_integral_representation() {
    for n in -8..=8 {
        for x in [0.0, 0.5, 1.3, 2.6, 4.0, 7.5] {
            let a = bessel_j(n, x);
            let b = common::bessel_integral(n, x);
            assert!((a - b).abs() < 1e-10, "J_{n}({x}): {a} vs {b}");
        }
    }
}

#[test]
fn transform_limited_duration_and_bandwidth() {
    let g = grid();
    let spec = gaussian_spectrum(50.0, 793.0, g).unwrap();
    let field = spec.to_time();
    let t: Vec<f64> = (0..g.n).map(|j| g.time(j)).collect();
    let dt = fwhm(&t, &field.intensity());
    assert!((dt / 50.0 - 1.0).abs() < 0.01, "{dt}");
    let nu: Vec<f64> = (0..g.n).map(|k| g.omega(k) / (2.0 * PI)).collect();
    let s: Vec<f64> = spec.components()[0].iter().map(|z| z.norm_sqr()).collect();
    let tbp = fwhm(&nu, &s) * dt;
    assert!((tbp - 2.0 * 2f64.ln() / PI).abs() < 0.005, "{tbp}");
}

#[test]
fn double_kick_mask_splits_energy_equally() {
    let g = grid();
    let base = gaussian_spectrum(50.0, 793.0, g).unwrap();
    for tau in [220.0, 440.0, 660.0] {
        let field = apply_double_kick_mask(&base, tau).unwrap().to_time();
        let d = to_descriptor(&field, 0.02).unwrap();
        assert_eq!(d.kicks.len(), 2);
        assert!((d.kicks[0].time_fs + tau / 2.0).abs() < g.dt_fs);
        assert!((d.kicks[1].time_fs - tau / 2.0).abs() < g.dt_fs);
        assert!((d.kicks[0].strength / d.kicks[1].strength - 1.0).abs() < 1e-6);
        assert!((d.total_strength() - field.energy()).abs() < 1e-6);
    }
}

#[test]
fn chiral_train_amplitudes_and_angles() {
    let g = grid();
    let base = gaussian_spectrum(50.0, 793.0, g).unwrap();
    let (tau, alpha, a) = (330.0, PI / 4.0, 2.6);
    let field = apply_chiral_mask(&base, tau, alpha, a).unwrap().to_time();
    let d = to_descriptor(&field, 0.02).unwrap();
    assert_eq!(d.kicks.len(), 9);
    let total = field.energy();
    for k in &d.kicks {
        let n = (k.time_fs / tau).round() as i32;
        assert!((k.time_fs - n as f64 * tau).abs() < g.dt_fs);
        let amp = (k.strength / total).sqrt();
        let oracle = common::bessel_integral(n, a).abs();
        assert!((amp / oracle - 1.0).abs() < 0.02, "n = {n}: {amp} vs {oracle}");
        let PolarizationState::LinearInPlane { angle_rad } = k.pol else {
            panic!("{:?}", k.pol)
        };
        assert!(angle_diff_mod_pi(angle_rad, n as f64 * alpha) < 1f64.to_radians(), "n = {n}");
    }
    assert!((d.period_fs - tau).abs() < g.dt_fs);
    assert!(angle_diff_mod_pi(d.twist_rad, alpha) < 1f64.to_radians());
}

#[test]
fn reversed_twist_mirrors_the_angles() {
    let g = grid();
    let base = gaussian_spectrum(50.0, 793.0, g).unwrap();
    let plus = to_descriptor(&apply_chiral_mask(&base, 330.0, 0.5, 2.6).unwrap().to_time(), 0.02).unwrap();
    let minus = to_descriptor(&apply_chiral_mask(&base, 330.0, -0.5, 2.6).unwrap().to_time(), 0.02).unwrap();
    let mirrored = plus.mirrored();
    assert_eq!(mirrored.kicks.len(), minus.kicks.len());
    for (a, b) in mirrored.kicks.iter().zip(&minus.kicks) {
        let (PolarizationState::LinearInPlane { angle_rad: x }, PolarizationState::LinearInPlane { angle_rad: y }) =
            (a.pol, b.pol)
        else {
            panic!()
        };
        assert!(angle_diff_mod_pi(x, y) < 1e-6);
        assert!((a.strength - b.strength).abs() < 1e-9);
    }
}

#[test]
fn cross_correlation_peaks_at_pulse_times() {
    let g = grid();
    let base = gaussian_spectrum(50.0, 793.0, g).unwrap();
    let field = apply_chiral_mask(&base, 330.0, PI / 4.0, 2.6).unwrap().to_time();
    let xc = cross_correlation(&field, 50.0).unwrap();
    let peaks: Vec<f64> = find_peaks(&xc, 0.02).into_iter().map(|j| g.time(j)).collect();
    assert_eq!(peaks.len(), 9);
    for (k, t) in peaks.iter().enumerate() {
        assert!((t - (k as f64 - 4.0) * 330.0).abs() <= g.dt_fs);
    }
}

#[test]
fn overlapping_pulses_have_no_reduction() {
    let g = grid();
    let base = gaussian_spectrum(50.0, 793.0, g).unwrap();
    let field = apply_double_kick_mask(&base, 40.0).unwrap().to_time();
    assert!(matches!(to_descriptor(&field, 0.02), Err(Error::ReductionUnavailable(_))));
}

#[test]
fn undersized_window_is_a_config_error() {
    let small = TimeGrid::new(2048, 0.5).unwrap();
    let base = gaussian_spectrum(50.0, 793.0, small).unwrap();
    assert!(matches!(apply_chiral_mask(&base, 330.0, 0.5, 2.6), Err(Error::Config(_))));
    assert!(matches!(apply_double_kick_mask(&base, 600.0), Err(Error::Config(_))));
}
