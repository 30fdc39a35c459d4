//! Open-system dynamics of two giant atoms coupled to a one-dimensional
//! waveguide.
//!
//! Each atom couples to the guided modes through a spatial profile `g_μ(x)`.
//! The crate discretizes the waveguide continuum, tabulates the bath
//! correlation kernels, samples the matching colored noises, evolves the
//! noise-free O-operators on a two-time grid, and propagates both linear
//! stochastic Schrödinger trajectories and the equivalent master equation.
//! Dressed-state wavefunction solvers on the same mode grid serve as exact
//! references in the one- and two-excitation sectors.
//!
//! Units: ω_a = ω_b = 1, c = 1, lengths in λ = c/ω, times in ωt.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the precision for everyday use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod hilbert;
mod linalg;
pub mod noise;
pub mod oracle;
pub mod osolver;
pub mod scalar;
pub mod stats;
pub mod thermal;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub use correlation::{CorrelationKernel, KernelArgument, SqueezedKernelPair, ThermalKernelPair};
pub use coupling::{CouplingDistribution, ModeCouplings, ModeGrid, Shape};
pub use dynamics::{DensitySeries, EnsembleResult, EnsembleSettings};
pub use hilbert::{Atom, DensityMatrix, Populations, QubitOperator, StateVector};
pub use noise::{NoiseRealization, NoiseSampler, SamplingMeasure};
pub use oracle::{DoubleExcitationState, SingleExcitationState};
pub use osolver::{Channel, CoefficientField, OField};
pub use thermal::DualOField;

pub type CouplingDistribution64 = CouplingDistribution<f64>;
pub type CouplingDistribution32 = CouplingDistribution<f32>;
pub type ModeGrid64 = ModeGrid<f64>;
pub type ModeGrid32 = ModeGrid<f32>;
pub type ModeCouplings64 = ModeCouplings<f64>;
pub type ModeCouplings32 = ModeCouplings<f32>;
pub type CorrelationKernel64 = CorrelationKernel<f64>;
pub type CorrelationKernel32 = CorrelationKernel<f32>;
pub type QubitOperator64 = QubitOperator<f64>;
pub type QubitOperator32 = QubitOperator<f32>;
pub type StateVector64 = StateVector<f64>;
pub type StateVector32 = StateVector<f32>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type OField64 = OField<f64>;
pub type OField32 = OField<f32>;
pub type NoiseRealization64 = NoiseRealization<f64>;
pub type NoiseRealization32 = NoiseRealization<f32>;
