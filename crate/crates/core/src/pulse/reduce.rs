//! Reduction of a shaped field to discrete kicks, and cross-correlation
//! traces.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::dynamics::KickEvent;
use crate::error::{Error, Result};
use crate::rotor::PolarizationState;
use crate::C64;

use super::train::{DiscardedPulse, PulseTrainDescriptor};
use super::VectorField;

/// Pulses whose peak intensity is below this fraction of the strongest
/// pulse are dropped from a reduced train.
pub const DEFAULT_THRESHOLD: f64 = 0.02;

/// Local maxima below this fraction of the global peak are not pulses.
const CANDIDATE_FLOOR: f64 = 1e-5;

/// Reduced pulses wider than this multiple of the transform-limited
/// duration are taken to be unresolved replicas.
const MAX_BROADENING: f64 = 1.2;

/// Full width at half maximum of the peak at `idx`, with linear
/// interpolation at both edges.
fn fwhm_at(values: &[f64], idx: usize, dt: f64) -> f64 {
    let half = 0.5 * values[idx];
    let mut l = idx;
    while l > 0 && values[l] > half {
        l -= 1;
    }
    let mut r = idx;
    while r + 1 < values.len() && values[r] > half {
        r += 1;
    }
    let edge = |a: usize, b: usize| {
        let (va, vb) = (values[a], values[b]);
        if (vb - va).abs() < f64::MIN_POSITIVE {
            a as f64
        } else {
            a as f64 + (half - va) / (vb - va) * (b as f64 - a as f64)
        }
    };
    let left = if l < idx { edge(l, l + 1) } else { l as f64 };
    let right = if r > idx { edge(r, r - 1) } else { r as f64 };
    (right - left) * dt
}

/// Intensity FWHM of the transform-limited pulse with the same spectrum.
fn transform_limited_fwhm(field: &VectorField) -> f64 {
    let spec = field.to_spectral();
    let [s0, s1] = spec.components();
    let amp: Vec<C64> = s0
        .iter()
        .zip(s1)
        .map(|(a, b)| C64::new((a.norm_sqr() + b.norm_sqr()).sqrt(), 0.0))
        .collect();
    let zero = vec![C64::new(0.0, 0.0); amp.len()];
    let tl = super::SpectralField::new(spec.grid(), spec.center_nm(), [amp, zero])
        .unwrap()
        .to_time()
        .intensity();
    fwhm_at(&tl, field.grid().n / 2, field.grid().dt_fs)
}

/// Principal-axis angle in `[0, π)` of the polarization described by the
/// coherency sums `a = Σ|E₁|²`, `b = Σ|E₂|²`, `c = Σ Re(E₁E₂*)`.
fn principal_angle(a: f64, b: f64, c: f64) -> f64 {
    (0.5 * (2.0 * c).atan2(a - b)).rem_euclid(PI)
}

/// Angle in `[0, π)` of the major polarization axis at one sample, measured
/// from component 1 toward component 2.
pub fn polarization_angle(e1: C64, e2: C64) -> f64 {
    principal_angle(e1.norm_sqr(), e2.norm_sqr(), (e1 * e2.conj()).re)
}

/// Indices of local maxima with `v ≥ rel_threshold·max(v)`.
pub fn find_peaks(values: &[f64], rel_threshold: f64) -> Vec<usize> {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Vec::new();
    }
    let floor = rel_threshold * peak;
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let v = values[i];
            let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
            let right = if i + 1 == n { f64::NEG_INFINITY } else { values[i + 1] };
            v >= floor && v > left && v >= right
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Locates the pulses of `field`, integrates each one's fluence into a kick
/// strength and fits its polarization angle (measured from component 1
/// toward component 2). Pulses with peak intensity below
/// `threshold·peak` are reported in `discarded`.
pub fn to_descriptor(field: &VectorField, threshold: f64) -> Result<PulseTrainDescriptor> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidInput(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let grid = field.grid();
    let intensity = field.intensity();
    let peak = intensity.iter().cloned().fold(0.0, f64::max);
    let peaks = find_peaks(&intensity, CANDIDATE_FLOOR);
    if peaks.is_empty() {
        return Ok(PulseTrainDescriptor::from_kicks(Vec::new()));
    }

    // Segment boundaries at the intensity minimum between neighbours.
    let mut bounds = vec![0];
    for w in peaks.windows(2) {
        let valley = (w[0]..=w[1])
            .min_by(|&a, &b| intensity[a].total_cmp(&intensity[b]))
            .unwrap();
        if intensity[valley] > threshold * peak {
            return Err(Error::ReductionUnavailable(format!(
                "pulses at {:.1} fs and {:.1} fs overlap (valley at {:.3} of peak); use field propagation",
                grid.time(w[0]),
                grid.time(w[1]),
                intensity[valley] / peak
            )));
        }
        bounds.push(valley);
    }
    bounds.push(grid.n);

    let tl_fwhm = field.pulse_fwhm_fs().unwrap_or_else(|| transform_limited_fwhm(field));

    let [e1, e2] = field.components();
    let mut kicks = Vec::new();
    let mut discarded = Vec::new();
    for (i, &p) in peaks.iter().enumerate() {
        let range = bounds[i]..bounds[i + 1];
        let (mut fluence, mut moment) = (0.0, 0.0);
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for j in range {
            fluence += intensity[j];
            moment += intensity[j] * grid.time(j);
            a += e1[j].norm_sqr();
            b += e2[j].norm_sqr();
            c += (e1[j] * e2[j].conj()).re;
        }
        let time_fs = moment / fluence;
        let strength = fluence * grid.dt_fs;
        let relative_peak = intensity[p] / peak;
        if relative_peak >= threshold {
            let width = fwhm_at(&intensity, p, grid.dt_fs);
            if width > MAX_BROADENING * tl_fwhm {
                return Err(Error::ReductionUnavailable(format!(
                    "pulse at {time_fs:.1} fs is {width:.1} fs wide against a {tl_fwhm:.1} fs transform limit; \
                     use field propagation"
                )));
            }
            kicks.push(KickEvent {
                time_fs,
                strength,
                pol: PolarizationState::linear(principal_angle(a, b, c)),
            });
        } else {
            discarded.push(DiscardedPulse {
                time_fs,
                strength,
                relative_peak,
            });
        }
    }

    let angle = |k: &KickEvent| match k.pol {
        PolarizationState::LinearInPlane { angle_rad } => angle_rad,
        _ => 0.0,
    };
    let period_fs = median(kicks.windows(2).map(|w| w[1].time_fs - w[0].time_fs).collect());
    let twist_rad = median(
        kicks
            .windows(2)
            .map(|w| {
                let d = (angle(&w[1]) - angle(&w[0])).rem_euclid(PI);
                if d > 0.5 * PI {
                    d - PI
                } else {
                    d
                }
            })
            .collect(),
    );
    Ok(PulseTrainDescriptor {
        kicks,
        period_fs,
        twist_rad,
        mod_amp: None,
        discarded,
    })
}

/// Intensity cross-correlation `S(t) = ∫ I(t′) G(t − t′) dt′` with a
/// unit-area Gaussian gate of intensity FWHM `gate_fwhm_fs`, on the field's
/// time grid.
pub fn cross_correlation(field: &VectorField, gate_fwhm_fs: f64) -> Result<Vec<f64>> {
    let grid = field.grid();
    if !(gate_fwhm_fs > 0.0 && gate_fwhm_fs.is_finite()) {
        return Err(Error::InvalidInput("gate duration must be positive".into()));
    }
    if gate_fwhm_fs > 0.25 * grid.window_fs() {
        return Err(Error::Config("gate longer than a quarter of the time window".into()));
    }
    let n = grid.n;
    let k = 4.0 * 2f64.ln() / (gate_fwhm_fs * gate_fwhm_fs);
    let norm = (k / PI).sqrt();
    let mut gate: Vec<C64> = (0..n)
        .map(|j| {
            let s = if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * grid.dt_fs;
            C64::new(norm * (-k * s * s).exp() * grid.dt_fs, 0.0)
        })
        .collect();
    let mut signal: Vec<C64> = field.intensity().into_iter().map(|v| C64::new(v, 0.0)).collect();

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    fwd.process(&mut gate);
    fwd.process(&mut signal);
    for (s, g) in signal.iter_mut().zip(&gate) {
        *s *= g;
    }
    inv.process(&mut signal);
    Ok(signal.iter().map(|z| (z.re / n as f64).max(0.0)).collect())
}
