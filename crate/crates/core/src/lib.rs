//! Rigid-rotor wave packets driven by femtosecond pulse trains.
//!
//! The crate is organised bottom-up:
//!
//! * [`angular`] – Wigner 3-j symbols and renormalized spherical-harmonic
//!   matrix elements.
//! * [`rotor`] – molecular constants, the `|J,M⟩` basis, wave packets and the
//!   angular operators (`cos²θ`, direction cosines).
//! * [`dynamics`] – impulsive kicks, free evolution and full-field
//!   integration of the time-dependent Schrödinger equation.
//! * [`pulse`] – pulse-shaper synthesis of double-kick and chiral trains,
//!   reduction of shaped fields to discrete kick sequences.
//! * [`probe`] – fluorescence proxies, linear/circular dichroism traces and
//!   their Fourier amplitude at the `J=1 ↔ J=3` coherence frequency.
//! * [`scan`] – run configuration, scan drivers and result persistence.
//!
//! Units: time in fs, frequency in THz, `ħ = 1` with energies expressed as
//! angular frequencies in rad/fs. Kick strengths are dimensionless.

// `!(x > 0.0)` is used on purpose so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod dynamics;
pub mod error;
pub mod probe;
pub mod pulse;
pub mod rotor;
pub mod scan;

pub use num_complex::Complex64 as C64;

pub use dynamics::{DensityEnsemble, EnsembleMember, FieldFrame, KickEvent, RotorSystem};
pub use error::{Error, Result};
pub use probe::{CoherenceAmplitude, DelayGrid, DetectionModel, DichroismTrace, PopulationMap};
pub use pulse::{PulseTrainDescriptor, SpectralField, TimeGrid, VectorField};
pub use rotor::{BasisIndex, Parity, PolarizationState, RotState, RotorSpec, VibLevel, WavePacket};
