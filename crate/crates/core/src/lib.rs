//! Greedy pulse-train control of thermal rigid-rotor ensembles.
//!
//! The crate builds the kinematically optimal target density matrix for
//! molecular alignment (`⟨cos² θ⟩`) or orientation (`⟨cos θ⟩`), drives a
//! thermal state toward it with sudden kicks fired at free-evolution maxima
//! (strategies S1 and S2), and analyzes controllability and fixed points of
//! the resulting iteration.
//!
//! Numeric modules are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod basis;
pub mod commands;
pub mod config;
pub mod controllability;
pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod linalg;
pub mod molecule;
pub mod operators;
pub mod output;
pub mod scalar;
pub mod signal;

pub use basis::{block_decomposition, build_basis, Basis, BasisIndex, BlockDecomposition, ProcessKind};
pub use error::{Error, Result};
pub use scalar::Real;

pub type HermitianOperator = operators::HermitianOperator<f64>;
pub type DensityMatrix = operators::DensityMatrix<f64>;
pub type TargetState = kinematics::TargetState<f64>;
pub type ControlSpace = dynamics::ControlSpace<f64>;
pub type PulseTrainRecord = dynamics::PulseTrainRecord<f64>;
pub type StrategyRun = dynamics::StrategyRun<f64>;
pub type Complex = num_complex::Complex<f64>;
pub type Matrix = scalar::CMatrix<f64>;
