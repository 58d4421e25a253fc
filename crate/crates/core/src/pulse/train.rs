use serde::{Deserialize, Serialize};

use crate::dynamics::KickEvent;
use crate::error::{Error, Result};
use crate::rotor::PolarizationState;

use super::bessel::bessel_j;

/// A pulse that fell below the reduction threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscardedPulse {
    pub time_fs: f64,
    pub strength: f64,
    /// Peak intensity relative to the strongest pulse.
    pub relative_peak: f64,
}

/// Discrete kick sequence on the shaper clock (`t = 0` is the unshaped
/// pulse).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseTrainDescriptor {
    pub kicks: Vec<KickEvent>,
    pub period_fs: f64,
    pub twist_rad: f64,
    pub mod_amp: Option<f64>,
    #[serde(default)]
    pub discarded: Vec<DiscardedPulse>,
}

fn check(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite and non-negative, got {v}")))
    }
}

impl PulseTrainDescriptor {
    pub fn from_kicks(kicks: Vec<KickEvent>) -> Self {
        let period_fs = if kicks.len() > 1 {
            (kicks[kicks.len() - 1].time_fs - kicks[0].time_fs) / (kicks.len() - 1) as f64
        } else {
            0.0
        };
        PulseTrainDescriptor {
            kicks,
            period_fs,
            twist_rad: 0.0,
            mod_amp: None,
            discarded: Vec::new(),
        }
    }

    /// Two identical kicks at `±τ/2`, each carrying `P_total/2`. `τ = 0`
    /// gives a single kick of strength `P_total` at `t = 0`.
    pub fn double_kick(tau_fs: f64, p_total: f64, pol: PolarizationState) -> Result<Self> {
        check("τ", tau_fs)?;
        check("kick strength", p_total)?;
        if !pol.is_linear() {
            return Err(Error::Unsupported("kick pulses must be linearly polarized".into()));
        }
        let kicks = if tau_fs == 0.0 {
            vec![KickEvent {
                time_fs: 0.0,
                strength: p_total,
                pol,
            }]
        } else {
            [-0.5 * tau_fs, 0.5 * tau_fs]
                .into_iter()
                .map(|t| KickEvent {
                    time_fs: t,
                    strength: 0.5 * p_total,
                    pol,
                })
                .collect()
        };
        Ok(PulseTrainDescriptor {
            kicks,
            period_fs: tau_fs,
            twist_rad: 0.0,
            mod_amp: None,
            discarded: Vec::new(),
        })
    }

    /// In-plane chiral train: kick `n` at `nτ` with strength
    /// `P_total·J_n(A)²` and polarization angle `base + nα`. Kicks with
    /// `J_n² < threshold·max J_n²` are discarded and reported.
    pub fn chiral(
        tau_fs: f64,
        alpha_rad: f64,
        mod_amp: f64,
        p_total: f64,
        threshold: f64,
        base_angle_rad: f64,
    ) -> Result<Self> {
        check("τ", tau_fs)?;
        check("kick strength", p_total)?;
        check("threshold", threshold)?;
        if !(tau_fs > 0.0) {
            return Err(Error::InvalidInput("chiral train needs τ > 0".into()));
        }
        if !alpha_rad.is_finite() || !mod_amp.is_finite() {
            return Err(Error::InvalidInput("train parameters must be finite".into()));
        }
        let n_max = (mod_amp.abs() + 30.0) as i32;
        let weights: Vec<(i32, f64)> = (-n_max..=n_max)
            .map(|n| (n, bessel_j(n, mod_amp).powi(2)))
            .collect();
        let w_max = weights.iter().map(|w| w.1).fold(0.0, f64::max);
        let mut kicks = Vec::new();
        let mut discarded = Vec::new();
        for (n, w) in weights {
            let time_fs = n as f64 * tau_fs;
            if w >= threshold * w_max {
                kicks.push(KickEvent {
                    time_fs,
                    strength: p_total * w,
                    pol: PolarizationState::linear(base_angle_rad + n as f64 * alpha_rad),
                });
            } else if w > 1e-12 * w_max {
                discarded.push(DiscardedPulse {
                    time_fs,
                    strength: p_total * w,
                    relative_peak: w / w_max,
                });
            }
        }
        Ok(PulseTrainDescriptor {
            kicks,
            period_fs: tau_fs,
            twist_rad: alpha_rad,
            mod_amp: Some(mod_amp),
            discarded,
        })
    }

    pub fn total_strength(&self) -> f64 {
        self.kicks.iter().map(|k| k.strength).sum()
    }

    pub fn first_time(&self) -> Option<f64> {
        self.kicks.first().map(|k| k.time_fs)
    }

    pub fn last_time(&self) -> Option<f64> {
        self.kicks.last().map(|k| k.time_fs)
    }

    /// Image under `y → −y`: every in-plane angle changes sign.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for k in &mut out.kicks {
            k.pol = k.pol.mirrored();
        }
        out.twist_rad = -self.twist_rad;
        out
    }
}
