//! Rotor basis, molecular constants and angular operators.
//!
//! Lab frame: `z` is the quantization axis. For linear-dichroism geometry it
//! coincides with the fixed linear probe polarization; for circular-dichroism
//! geometry it is the beam propagation axis and all kick polarizations lie in
//! the `xy` plane.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::angular::{harmonic_element, Direction};
use crate::error::{Error, Result};
use crate::C64;

/// Frequency of the `J=1 ↔ J=3` rotational coherence of He₂* (a state).
pub const NU_13_THZ: f64 = 2.27;

/// Polarizability anisotropy of He₂* in Å³.
pub const HE2_DELTA_ALPHA: f64 = 35.1;

/// Rotational constant that places the `J=1 ↔ J=3` line at `nu13`:
/// `E₃ − E₁ = B·(12 − 2) = 10 B`.
pub fn rotational_constant_from_nu13(nu13_thz: f64) -> f64 {
    nu13_thz / 10.0
}

/// Converts a frequency in THz to an angular frequency in rad/fs.
pub fn thz_to_rad_per_fs(nu_thz: f64) -> f64 {
    2.0 * PI * nu_thz * 1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
    Any,
}

impl Parity {
    pub fn admits(self, j: u32) -> bool {
        match self {
            Parity::Odd => j % 2 == 1,
            Parity::Even => j.is_multiple_of(2),
            Parity::Any => true,
        }
    }
}

/// A vibrational level: its rotational constant and its share of the
/// initial ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibLevel {
    pub v: u32,
    pub b_rot_thz: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotorSpec {
    pub levels: Vec<VibLevel>,
    /// Polarizability anisotropy Δα in Å³.
    pub delta_alpha: f64,
    pub j_parity: Parity,
    pub j_max: u32,
    /// Centrifugal distortion constant, `E_J = B J(J+1) − D [J(J+1)]²`.
    #[serde(default)]
    pub centrifugal_d_thz: f64,
}

impl Default for RotorSpec {
    fn default() -> Self {
        Self::he2_metastable()
    }
}

impl RotorSpec {
    /// He₂* in the a³Σᵤ⁺ state: odd `J` only, `B₀ = ν₁,₃/10 = 0.227 THz`,
    /// single vibrational level.
    pub fn he2_metastable() -> Self {
        RotorSpec {
            levels: vec![VibLevel {
                v: 0,
                b_rot_thz: rotational_constant_from_nu13(NU_13_THZ),
                weight: 1.0,
            }],
            delta_alpha: HE2_DELTA_ALPHA,
            j_parity: Parity::Odd,
            j_max: 11,
            centrifugal_d_thz: 0.0,
        }
    }

    /// Adds a second vibrational level whose rotational constant is
    /// `(1 + rel_offset)·B₀`, taking `fraction` of the population from the
    /// existing levels proportionally.
    pub fn with_extra_level(mut self, v: u32, rel_offset: f64, fraction: f64) -> Self {
        let b0 = self.levels[0].b_rot_thz;
        for l in &mut self.levels {
            l.weight *= 1.0 - fraction;
        }
        self.levels.push(VibLevel {
            v,
            b_rot_thz: b0 * (1.0 + rel_offset),
            weight: fraction,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidSpec("no vibrational levels".into()));
        }
        let mut total = 0.0;
        for (i, l) in self.levels.iter().enumerate() {
            if !(l.b_rot_thz > 0.0 && l.b_rot_thz.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "b_rot for v={} must be positive, got {}",
                    l.v, l.b_rot_thz
                )));
            }
            if !(0.0..=1.0).contains(&l.weight) {
                return Err(Error::InvalidSpec(format!(
                    "weight for v={} outside [0, 1]: {}",
                    l.v, l.weight
                )));
            }
            if self.levels[..i].iter().any(|o| o.v == l.v) {
                return Err(Error::InvalidSpec(format!("duplicate level v={}", l.v)));
            }
            total += l.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "vibrational weights sum to {total}, expected 1"
            )));
        }
        if !(self.delta_alpha > 0.0 && self.delta_alpha.is_finite()) {
            return Err(Error::InvalidSpec("delta_alpha must be positive".into()));
        }
        if !self.centrifugal_d_thz.is_finite() {
            return Err(Error::InvalidSpec("centrifugal_d_thz must be finite".into()));
        }
        if self.j_max < 1 {
            return Err(Error::InvalidSpec("j_max must be at least 1".into()));
        }
        if !self.j_parity.admits(self.j_max) {
            return Err(Error::InvalidSpec(format!(
                "j_max = {} violates the {:?} parity restriction",
                self.j_max, self.j_parity
            )));
        }
        Ok(())
    }

    pub fn level(&self, v: u32) -> Result<&VibLevel> {
        self.levels
            .iter()
            .find(|l| l.v == v)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown vibrational level v={v}")))
    }

    /// Rotational energy of level `j` in rad/fs.
    pub fn energy(&self, v: u32, j: u32) -> Result<f64> {
        let l = self.level(v)?;
        let x = (j * (j + 1)) as f64;
        Ok(thz_to_rad_per_fs(l.b_rot_thz * x - self.centrifugal_d_thz * x * x))
    }

    /// Frequency in THz of the `J=1 ↔ J=3` coherence of the first level.
    pub fn nu13_thz(&self) -> f64 {
        let b = self.levels[0].b_rot_thz;
        10.0 * b - self.centrifugal_d_thz * (144.0 - 4.0)
    }

    /// `T₁,₃ = 2/ν₁,₃`; the double-kick maximum sits at `½T₁,₃ = 1/ν₁,₃`.
    pub fn rotational_period_fs(&self) -> f64 {
        2.0 / (self.nu13_thz() * 1e-3)
    }
}

/// A rotational eigenstate label `|J,M⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RotState {
    pub j: u32,
    pub m: i32,
}

/// Ordered `|J,M⟩` basis: ascending `J`, then ascending `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisIndex {
    parity: Parity,
    j_max: u32,
    states: Vec<RotState>,
    /// Offset of the `M = −J` state of each admitted shell, indexed by `J`.
    offsets: Vec<Option<usize>>,
}

impl BasisIndex {
    pub fn new(parity: Parity, j_max: u32) -> Result<Self> {
        if !parity.admits(j_max) {
            return Err(Error::InvalidSpec(format!(
                "j_max = {j_max} violates the {parity:?} parity restriction"
            )));
        }
        let mut states = Vec::new();
        let mut offsets = vec![None; j_max as usize + 1];
        for j in (0..=j_max).filter(|&j| parity.admits(j)) {
            offsets[j as usize] = Some(states.len());
            for m in -(j as i32)..=(j as i32) {
                states.push(RotState { j, m });
            }
        }
        Ok(BasisIndex {
            parity,
            j_max,
            states,
            offsets,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn states(&self) -> &[RotState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> RotState {
        self.states[index]
    }

    pub fn index(&self, j: u32, m: i32) -> Option<usize> {
        let off = (*self.offsets.get(j as usize)?)?;
        if m.unsigned_abs() > j {
            return None;
        }
        Some(off + (m + j as i32) as usize)
    }

    pub fn shells(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=self.j_max).filter(move |&j| self.parity.admits(j))
    }

    pub fn shell_range(&self, j: u32) -> Option<std::ops::Range<usize>> {
        let off = (*self.offsets.get(j as usize)?)?;
        Some(off..off + 2 * j as usize + 1)
    }
}

/// Builds the parity-filtered, `M`-complete basis of `spec`.
pub fn build_basis(spec: &RotorSpec) -> Result<BasisIndex> {
    if spec.j_max < 1 {
        return Err(Error::InvalidSpec("j_max must be at least 1".into()));
    }
    BasisIndex::new(spec.j_parity, spec.j_max)
}

/// Complex amplitudes `c_{J,M}` of a pure rotational state at `time_fs`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub amplitudes: DVector<C64>,
    pub vib: u32,
    pub time_fs: f64,
}

impl WavePacket {
    pub fn eigenstate(basis: &BasisIndex, j: u32, m: i32, vib: u32) -> Result<Self> {
        let idx = basis
            .index(j, m)
            .ok_or_else(|| Error::InvalidInput(format!("|{j},{m}⟩ is not in the basis")))?;
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(WavePacket {
            amplitudes,
            vib,
            time_fs: 0.0,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Polarization of a kick or probe pulse.
///
/// `LinearInPlane` is the lab vector `(cos a, sin a, 0)`, perpendicular to
/// the quantization axis. Circular states are the spherical unit vectors
/// `ê₊ = −(x̂ + iŷ)/√2` and `ê₋ = (x̂ − iŷ)/√2`; absorption of `ê₊` raises
/// `M` by one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolarizationState {
    LinearInPlane { angle_rad: f64 },
    CircularPlus,
    CircularMinus,
    LinearAlongAxis,
}

impl PolarizationState {
    /// In-plane linear polarization with the angle folded into `[0, π)`.
    pub fn linear(angle_rad: f64) -> Self {
        let mut a = angle_rad.rem_euclid(PI);
        if a >= PI {
            a = 0.0;
        }
        PolarizationState::LinearInPlane { angle_rad: a }
    }

    pub fn is_linear(&self) -> bool {
        matches!(
            self,
            PolarizationState::LinearInPlane { .. } | PolarizationState::LinearAlongAxis
        )
    }

    pub fn direction(&self) -> Option<Direction> {
        match *self {
            PolarizationState::LinearInPlane { angle_rad } => Some(Direction::in_plane(angle_rad)),
            PolarizationState::LinearAlongAxis => Some(Direction::Z),
            _ => None,
        }
    }

    /// Image under the reflection `y → −y`, which maps `M → −M`.
    pub fn mirrored(&self) -> Self {
        match *self {
            PolarizationState::LinearInPlane { angle_rad } => PolarizationState::linear(-angle_rad),
            PolarizationState::CircularPlus => PolarizationState::CircularMinus,
            PolarizationState::CircularMinus => PolarizationState::CircularPlus,
            PolarizationState::LinearAlongAxis => PolarizationState::LinearAlongAxis,
        }
    }
}

/// Free-evolution phases `exp(−i E_J dt)` for level `v`.
pub fn free_phases(basis: &BasisIndex, spec: &RotorSpec, v: u32, dt_fs: f64) -> Result<DVector<C64>> {
    let mut out = DVector::zeros(basis.dim());
    for shell in basis.shells() {
        let e = spec.energy(v, shell)?;
        let ph = C64::from_polar(1.0, -e * dt_fs);
        for i in basis.shell_range(shell).unwrap() {
            out[i] = ph;
        }
    }
    Ok(out)
}

fn tensor_matrix(final_basis: &BasisIndex, basis: &BasisIndex, rank: u32, q: i32) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(final_basis.dim(), basis.dim());
    for (col, s) in basis.states().iter().enumerate() {
        let mf = s.m + q;
        for jf in final_basis.shells() {
            if jf + rank < s.j || s.j + rank < jf || (jf + rank + s.j) % 2 == 1 {
                continue;
            }
            if let Some(row) = final_basis.index(jf, mf) {
                out[(row, col)] = harmonic_element(jf, mf, rank, q, s.j, s.m);
            }
        }
    }
    out
}

/// `⟨J',M'|(û·r̂)²|J,M⟩` for an arbitrary real unit vector `û`, from
/// `(û·r̂)² = 1/3 + (2/3) Σ_q C_{2q}(û)* C_{2q}(r̂)`.
pub fn cos2_for_direction(basis: &BasisIndex, dir: Direction) -> DMatrix<C64> {
    let n = basis.dim();
    let mut out = DMatrix::from_diagonal_element(n, n, C64::new(1.0 / 3.0, 0.0));
    for q in -2..=2 {
        let coeff = dir.harmonic(2, q).conj() * (2.0 / 3.0);
        if coeff.norm() < 1e-300 {
            continue;
        }
        let t = tensor_matrix(basis, basis, 2, q);
        out.zip_apply(&t, |o, e| *o += coeff * e);
    }
    out
}

/// Matrix of `cos²θ` between the molecular axis and a linear polarization.
pub fn cos2_matrix(basis: &BasisIndex, pol: PolarizationState) -> Result<DMatrix<C64>> {
    let dir = pol.direction().ok_or_else(|| {
        Error::Unsupported("cos²θ interaction requires a linear polarization".into())
    })?;
    Ok(cos2_for_direction(basis, dir))
}

/// Direction-cosine matrix `⟨J',M'|ε̂·r̂|J,M⟩` from `basis` to `final_basis`.
///
/// For circular polarization `ε̂·r̂ = C_{1,±1}(r̂)` (no complex conjugation of
/// `ε̂`), so `CircularPlus` couples `M → M+1` and `CircularMinus` `M → M−1`.
pub fn dipole_matrix(
    final_basis: &BasisIndex,
    basis: &BasisIndex,
    pol: PolarizationState,
) -> DMatrix<C64> {
    let weights: Vec<(i32, C64)> = match pol {
        PolarizationState::CircularPlus => vec![(1, C64::new(1.0, 0.0))],
        PolarizationState::CircularMinus => vec![(-1, C64::new(1.0, 0.0))],
        linear => {
            let dir = linear.direction().unwrap();
            (-1..=1).map(|q| (q, dir.harmonic(1, q).conj())).collect()
        }
    };
    let mut out = DMatrix::zeros(final_basis.dim(), basis.dim());
    for (q, w) in weights {
        if w.norm() < 1e-300 {
            continue;
        }
        let t = tensor_matrix(final_basis, basis, 1, q);
        out.zip_apply(&t, |o, e| *o += w * e);
    }
    out
}
