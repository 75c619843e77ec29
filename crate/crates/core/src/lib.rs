//! Scaled chains from local symmetry dynamics and their tight-binding physics.
//!
//! The crate generates the chain, builds its open-boundary Hamiltonian,
//! diagonalizes it, derives spectral and localization diagnostics, evaluates
//! the closed-form local resonator model, and computes lead-to-lead
//! transmission.

pub mod chain;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod export;
pub mod hamiltonian;
pub mod lrm;
pub mod peaks;
pub mod spectral;
pub mod transmission;

pub use chain::{
    apply_reflection, lsd_generate, run_length_decomposition, scaled_chain, ReflectionSchedule,
    Run, Symbol, SymbolChain,
};
pub use eigen::{eig_all, eig_values_only, SpectralResult};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, TbParams, TridiagonalHamiltonian};
pub use transmission::{
    transmission_at, transmission_sweep, EnergyGrid, LeadParams, Leads, TransmissionCurve,
};
