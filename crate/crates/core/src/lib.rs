//! Variational spectra of one-dimensional polynomial potentials in a
//! harmonic-oscillator basis whose frequency Ω (and coordinate shift σ) are
//! fixed by the principle of minimal sensitivity on the truncated trace,
//! plus time evolution of Gaussian wave packets by the method of stationary
//! states.
//!
//! All numerical code is generic over [`Real`] (`f32`/`f64`); the `f64`
//! aliases below are what most callers want.

pub mod analysis;
pub mod eigen;
pub mod error;
pub mod evolve;
pub mod matrix;
pub mod optimize;
pub mod oscbasis;
pub mod pms;
pub mod potential;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod spectrum;

pub use eigen::{diagonalize, EigenSolution};
pub use error::{Error, Result};
pub use evolve::{EvolutionState, InitialGaussian, Observables};
pub use matrix::Matrix;
pub use oscbasis::{assemble_hamiltonian, BasisConfig, HamiltonianMatrix};
pub use pms::{pms_optimize, PmsOptions, PmsResult, TraceSpan};
pub use potential::{PolynomialPotential, Sign};
pub use scalar::Real;
pub use spectrum::{ConvergenceRow, SolveOptions, SpectrumReport};

pub type Potential = PolynomialPotential<f64>;
pub type Basis = BasisConfig<f64>;
pub type Hamiltonian = HamiltonianMatrix<f64>;
pub type Eigensystem = EigenSolution<f64>;
pub type Pms = PmsResult<f64>;
pub type Spectrum = SpectrumReport<f64>;
pub type Evolution = EvolutionState<f64>;
pub type Gaussian = InitialGaussian<f64>;
