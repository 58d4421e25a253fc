//! Propagation of rotational wave packets through pulse sequences.
//!
//! The interaction with a nonresonant pulse is `V(t) = −¼ Δα cos²θ ℰ²(t)`.
//! In the impulsive limit a pulse delivers the unitary `exp(+i P cos²θ)`,
//! with the dimensionless kick strength `P = (Δα/4ħ) ∫ℰ²(t) dt`. The sign
//! follows from the attractive potential for `Δα > 0`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::angular::Direction;
use crate::error::{Error, Result};
use crate::pulse::{PulseTrainDescriptor, VectorField};
use crate::rotor::{
    build_basis, cos2_for_direction, BasisIndex, PolarizationState, RotorSpec, WavePacket,
};
use crate::C64;

const KICK_NORM_TOLERANCE: f64 = 1e-8;
const FIELD_NORM_TOLERANCE: f64 = 1e-6;
/// Samples whose intensity is below this fraction of the peak are treated
/// as field-free.
const FIELD_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickEvent {
    pub time_fs: f64,
    pub strength: f64,
    pub pol: PolarizationState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub weight: f64,
    pub packet: WavePacket,
}

/// Incoherent mixture of pure rotational states.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEnsemble {
    pub members: Vec<EnsembleMember>,
}

impl DensityEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|m| m.weight).sum()
    }

    /// Weighted total norm; 1 for a normalized ensemble.
    pub fn total_norm(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.weight * m.packet.norm_sqr())
            .sum()
    }

    /// Largest deviation of any member's norm from one.
    pub fn max_norm_deviation(&self) -> f64 {
        self.members
            .iter()
            .map(|m| (m.packet.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn time_stamp(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.packet.time_fs)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Population of the highest shell of `basis`, for convergence checks.
    pub fn top_shell_population(&self, basis: &BasisIndex) -> f64 {
        let range = basis.shell_range(basis.j_max()).unwrap();
        self.members
            .iter()
            .map(|m| {
                m.weight
                    * m.packet.amplitudes.as_slice()[range.clone()]
                        .iter()
                        .map(|c| c.norm_sqr())
                        .sum::<f64>()
            })
            .sum()
    }
}

/// Orientation of the two field components of a [`VectorField`] in the lab
/// frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldFrame {
    pub e1: [f64; 3],
    pub e2: [f64; 3],
}

impl FieldFrame {
    /// Beam along the quantization axis: components map to `x̂`, `ŷ`.
    pub fn along_propagation() -> Self {
        FieldFrame {
            e1: [1.0, 0.0, 0.0],
            e2: [0.0, 1.0, 0.0],
        }
    }

    /// Quantization axis in the transverse plane (linear probe). With
    /// `parallel`, the input polarization lies along `ẑ`; otherwise it is
    /// rotated by 90° onto `x̂`.
    pub fn probe_axis(parallel: bool) -> Self {
        if parallel {
            FieldFrame {
                e1: [0.0, 0.0, 1.0],
                e2: [1.0, 0.0, 0.0],
            }
        } else {
            FieldFrame {
                e1: [1.0, 0.0, 0.0],
                e2: [0.0, 0.0, -1.0],
            }
        }
    }
}

#[derive(Debug, Clone)]
struct HermitianEigen {
    values: DVector<f64>,
    vectors: DMatrix<C64>,
    adjoint: DMatrix<C64>,
}

impl HermitianEigen {
    fn new(m: DMatrix<C64>) -> Self {
        let eig = m.symmetric_eigen();
        let adjoint = eig.eigenvectors.adjoint();
        HermitianEigen {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
            adjoint,
        }
    }

    /// `exp(i s M) psi`.
    fn exp_apply(&self, s: f64, psi: &DVector<C64>) -> DVector<C64> {
        let mut y = &self.adjoint * psi;
        for (yi, &ev) in y.iter_mut().zip(self.values.iter()) {
            *yi *= C64::from_polar(1.0, s * ev);
        }
        &self.vectors * y
    }
}

enum Generator {
    Axis,
    Plane(f64),
    General(Arc<HermitianEigen>),
}

/// A rotor species with its basis and precomputed operators. Immutable after
/// construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct RotorSystem {
    spec: RotorSpec,
    basis: BasisIndex,
    energies: Vec<(u32, Vec<f64>)>,
    m_values: Vec<f64>,
    axis: Arc<HermitianEigen>,
    plane: Arc<HermitianEigen>,
}

impl RotorSystem {
    pub fn new(spec: RotorSpec) -> Result<Self> {
        spec.validate()?;
        let basis = build_basis(&spec)?;
        let mut energies = Vec::with_capacity(spec.levels.len());
        for level in &spec.levels {
            let e = basis
                .states()
                .iter()
                .map(|s| spec.energy(level.v, s.j))
                .collect::<Result<Vec<_>>>()?;
            energies.push((level.v, e));
        }
        let m_values = basis.states().iter().map(|s| s.m as f64).collect();
        let axis = Arc::new(HermitianEigen::new(cos2_for_direction(&basis, Direction::Z)));
        let plane = Arc::new(HermitianEigen::new(cos2_for_direction(&basis, Direction::X)));
        Ok(RotorSystem {
            spec,
            basis,
            energies,
            m_values,
            axis,
            plane,
        })
    }

    pub fn spec(&self) -> &RotorSpec {
        &self.spec
    }

    pub fn basis(&self) -> &BasisIndex {
        &self.basis
    }

    pub(crate) fn energies(&self, v: u32) -> Result<&[f64]> {
        self.energies
            .iter()
            .find(|(lv, _)| *lv == v)
            .map(|(_, e)| e.as_slice())
            .ok_or_else(|| Error::InvalidSpec(format!("unknown vibrational level v={v}")))
    }

    /// Isotropic `J = 1` mixture: `(w_v/3, |1,M⟩)` for every level `v` and
    /// `M ∈ {−1, 0, 1}`, stamped at `t = 0`.
    pub fn initial_ensemble(&self) -> Result<DensityEnsemble> {
        initial_ensemble(&self.spec, &self.basis)
    }

    fn generator_for(&self, dir: Direction, cache: &mut HashMap<[u64; 3], Arc<HermitianEigen>>) -> Generator {
        let [x, y, z] = dir.components();
        if z.abs() < 1e-14 {
            return Generator::Plane(y.atan2(x));
        }
        if x.abs() < 1e-14 && y.abs() < 1e-14 {
            return Generator::Axis;
        }
        let key = [x.to_bits(), y.to_bits(), z.to_bits()];
        let eig = cache
            .entry(key)
            .or_insert_with(|| Arc::new(HermitianEigen::new(cos2_for_direction(&self.basis, dir))))
            .clone();
        Generator::General(eig)
    }

    fn exp_generator(&self, gen: &Generator, s: f64, psi: &DVector<C64>) -> DVector<C64> {
        match gen {
            Generator::Axis => self.axis.exp_apply(s, psi),
            Generator::General(eig) => eig.exp_apply(s, psi),
            Generator::Plane(angle) => {
                // C(α) = R C(0) R†, R = diag(e^{−iMα})
                let mut rotated = psi.clone();
                for (c, &m) in rotated.iter_mut().zip(&self.m_values) {
                    *c *= C64::from_polar(1.0, m * angle);
                }
                let mut out = self.plane.exp_apply(s, &rotated);
                for (c, &m) in out.iter_mut().zip(&self.m_values) {
                    *c *= C64::from_polar(1.0, -m * angle);
                }
                out
            }
        }
    }

    /// Impulsive kick `exp(+i P cos²θ)`.
    pub fn apply_kick(&self, psi: &WavePacket, kick: &KickEvent) -> Result<WavePacket> {
        let dir = kick.pol.direction().ok_or_else(|| {
            Error::Unsupported("kick pulses must be linearly polarized".into())
        })?;
        if psi.amplitudes.len() != self.basis.dim() {
            return Err(Error::InvalidInput("wave packet does not match the basis".into()));
        }
        if kick.strength == 0.0 {
            return Ok(psi.clone());
        }
        let mut cache = HashMap::new();
        let gen = self.generator_for(dir, &mut cache);
        let before = psi.norm_sqr();
        let amplitudes = self.exp_generator(&gen, kick.strength, &psi.amplitudes);
        let out = WavePacket {
            amplitudes,
            vib: psi.vib,
            time_fs: psi.time_fs,
        };
        let drift = (out.norm_sqr() - before).abs();
        if drift > KICK_NORM_TOLERANCE {
            return Err(Error::numerical(format!(
                "kick of strength {} changed the norm by {drift:e}",
                kick.strength
            )));
        }
        Ok(out)
    }

    /// Exact free evolution by `dt_fs` (may be negative).
    pub fn evolve_free(&self, psi: &WavePacket, dt_fs: f64) -> Result<WavePacket> {
        let e = self.energies(psi.vib)?;
        let mut out = psi.clone();
        if dt_fs != 0.0 {
            for (c, &ej) in out.amplitudes.iter_mut().zip(e) {
                *c *= C64::from_polar(1.0, -ej * dt_fs);
            }
        }
        out.time_fs = psi.time_fs + dt_fs;
        Ok(out)
    }

    /// Moves every member to absolute time `t_fs` by free evolution.
    pub fn evolve_ensemble_to(&self, ens: &DensityEnsemble, t_fs: f64) -> Result<DensityEnsemble> {
        let members = ens
            .members
            .iter()
            .map(|m| {
                Ok(EnsembleMember {
                    weight: m.weight,
                    packet: self.evolve_free(&m.packet, t_fs - m.packet.time_fs)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DensityEnsemble { members })
    }

    /// Interleaves free evolution and impulsive kicks; the result is stamped
    /// at the last kick time.
    pub fn propagate_train(
        &self,
        ens: &DensityEnsemble,
        train: &PulseTrainDescriptor,
    ) -> Result<DensityEnsemble> {
        let kicks = &train.kicks;
        if kicks.windows(2).any(|w| !(w[1].time_fs > w[0].time_fs)) {
            return Err(Error::InvalidInput("kick times must be strictly increasing".into()));
        }
        if let Some(first) = kicks.first() {
            if first.time_fs < ens.time_stamp() - 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "first kick at {} fs precedes the ensemble time stamp {} fs",
                    first.time_fs,
                    ens.time_stamp()
                )));
            }
        }
        let mut cache = HashMap::new();
        let gens = kicks
            .iter()
            .map(|k| {
                let dir = k.pol.direction().ok_or_else(|| {
                    Error::Unsupported("kick pulses must be linearly polarized".into())
                })?;
                Ok(self.generator_for(dir, &mut cache))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut members = Vec::with_capacity(ens.members.len());
        for m in &ens.members {
            let mut psi = m.packet.clone();
            let before = psi.norm_sqr();
            for (k, gen) in kicks.iter().zip(&gens) {
                psi = self.evolve_free(&psi, k.time_fs - psi.time_fs)?;
                psi.amplitudes = self.exp_generator(gen, k.strength, &psi.amplitudes);
            }
            let drift = (psi.norm_sqr() - before).abs();
            if drift > KICK_NORM_TOLERANCE {
                return Err(Error::numerical(format!(
                    "pulse train changed a member norm by {drift:e}"
                )));
            }
            members.push(EnsembleMember {
                weight: m.weight,
                packet: psi,
            });
        }
        Ok(DensityEnsemble { members })
    }

    /// Integrates `i dc/dt = [H₀ − (Δα/4)|ℰ(t)·r̂|²] c` across the full time
    /// grid of `field` with Strang splitting. `field` must be expressed in
    /// kick units (`Σ|E|² dt` equals the total kick strength, see
    /// [`VectorField::scaled_to_strength`]). The instantaneous interaction
    /// is diagonalized in the plane of the two field components, and each
    /// principal axis contributes an exact unitary factor. The result is
    /// stamped at the last grid time.
    pub fn propagate_field(
        &self,
        ens: &DensityEnsemble,
        field: &VectorField,
        frame: FieldFrame,
        step_fs: f64,
    ) -> Result<DensityEnsemble> {
        let grid = field.grid();
        if !(step_fs > 0.0 && step_fs.is_finite()) {
            return Err(Error::Config("integration step must be positive".into()));
        }
        if grid.dt_fs > step_fs * (1.0 + 1e-9) {
            return Err(Error::Config(format!(
                "field sampled at {} fs is coarser than the {step_fs} fs integration step",
                grid.dt_fs
            )));
        }
        let t_first = grid.time(0);
        let t_last = grid.time(grid.n - 1);
        if ens.time_stamp() > t_first + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "ensemble stamped at {} fs is later than the field start {t_first} fs",
                ens.time_stamp()
            )));
        }

        let [f1, f2] = field.components();
        let a: Vec<f64> = f1.iter().map(|c| c.norm_sqr()).collect();
        let b: Vec<f64> = f2.iter().map(|c| c.norm_sqr()).collect();
        let c: Vec<f64> = f1.iter().zip(f2).map(|(x, y)| (x * y.conj()).re).collect();
        let peak = a.iter().zip(&b).map(|(x, y)| x + y).fold(0.0, f64::max);
        let cutoff = peak * FIELD_CUTOFF;

        let n_steps = ((t_last - t_first) / step_fs).ceil().max(1.0) as usize;
        let h = (t_last - t_first) / n_steps as f64;
        let interp = |v: &[f64], t: f64| -> f64 {
            let x = (t - t_first) / grid.dt_fs;
            let i = (x.floor() as usize).min(grid.n - 2);
            let f = x - i as f64;
            v[i] * (1.0 - f) + v[i + 1] * f
        };

        // Interaction factors per step: None for field-free steps.
        let mut cache = HashMap::new();
        let mut factors: Vec<Option<Vec<(Generator, f64)>>> = Vec::with_capacity(n_steps);
        for k in 0..n_steps {
            let t = t_first + (k as f64 + 0.5) * h;
            let (xa, xb, xc) = (interp(&a, t), interp(&b, t), interp(&c, t));
            if xa + xb <= cutoff {
                factors.push(None);
                continue;
            }
            let mean = 0.5 * (xa + xb);
            let radius = (0.25 * (xa - xb).powi(2) + xc * xc).sqrt();
            let beta = 0.5 * (2.0 * xc).atan2(xa - xb);
            let (cb, sb) = (beta.cos(), beta.sin());
            let mut parts = Vec::with_capacity(2);
            for (lambda, u) in [
                (mean + radius, [cb, sb]),
                ((mean - radius).max(0.0), [-sb, cb]),
            ] {
                if lambda <= cutoff {
                    continue;
                }
                let v = [
                    u[0] * frame.e1[0] + u[1] * frame.e2[0],
                    u[0] * frame.e1[1] + u[1] * frame.e2[1],
                    u[0] * frame.e1[2] + u[1] * frame.e2[2],
                ];
                let dir = Direction::new(v)
                    .ok_or_else(|| Error::InvalidInput("degenerate field frame".into()))?;
                parts.push((self.generator_for(dir, &mut cache), lambda * h));
            }
            factors.push(Some(parts));
        }

        let mut members = Vec::with_capacity(ens.members.len());
        for m in &ens.members {
            let mut psi = self.evolve_free(&m.packet, t_first - m.packet.time_fs)?;
            let before = psi.norm_sqr();
            let mut pending = 0.0;
            for f in &factors {
                match f {
                    None => pending += h,
                    Some(parts) => {
                        psi = self.evolve_free(&psi, pending + 0.5 * h)?;
                        for (gen, s) in parts {
                            psi.amplitudes = self.exp_generator(gen, *s, &psi.amplitudes);
                        }
                        pending = 0.5 * h;
                    }
                }
            }
            psi = self.evolve_free(&psi, t_last - psi.time_fs)?;
            let drift = (psi.norm_sqr() - before).abs();
            if drift > FIELD_NORM_TOLERANCE {
                return Err(Error::Numerical {
                    message: format!("field propagation changed a member norm by {drift:e}"),
                    hint: Some(format!("reduce the integration step below {step_fs} fs")),
                });
            }
            members.push(EnsembleMember {
                weight: m.weight,
                packet: psi,
            });
        }
        Ok(DensityEnsemble { members })
    }
}

pub fn initial_ensemble(spec: &RotorSpec, basis: &BasisIndex) -> Result<DensityEnsemble> {
    if basis.shell_range(1).is_none() {
        return Err(Error::InvalidSpec("basis does not contain J = 1".into()));
    }
    let mut members = Vec::with_capacity(3 * spec.levels.len());
    for level in &spec.levels {
        for m in -1..=1 {
            members.push(EnsembleMember {
                weight: level.weight / 3.0,
                packet: WavePacket::eigenstate(basis, 1, m, level.v)?,
            });
        }
    }
    Ok(DensityEnsemble { members })
}

/// Kick strength `P = (Δα/4ħ) ∫ℰ²dt` of a Gaussian pulse with the given
/// peak intensity (W/cm²) and intensity FWHM (fs), for `Δα` in Å³.
///
/// With `I = c ε₀ ℰ²/2` and `α_SI = 4π ε₀ Δα`, the strength reduces to
/// `P = 2π Δα ∫I dt / (ħ c)`, where `∫I dt = I₀ τ sqrt(π / (4 ln 2))`.
pub fn kick_strength_from_peak_intensity(peak_w_cm2: f64, fwhm_fs: f64, delta_alpha_a3: f64) -> f64 {
    const HBAR: f64 = 1.054_571_817e-34;
    const C: f64 = 299_792_458.0;
    let fluence = peak_w_cm2 * 1e4 * fwhm_fs * 1e-15 * (std::f64::consts::PI / (4.0 * 2f64.ln())).sqrt();
    2.0 * std::f64::consts::PI * delta_alpha_a3 * 1e-30 * fluence / (HBAR * C)
}
