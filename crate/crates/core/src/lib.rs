//! Numerical core for the boron-vacancy (V_B⁻) spin defect in hexagonal boron
//! nitride coupled to its three nearest ¹⁴N nuclei.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It covers:
//!
//! * [`spinops`]: spin-1 matrices and Kronecker composition over the
//!   electron ⊗ N1 ⊗ N2 ⊗ N3 space (dimension 81).
//! * [`hamiltonian`]: ground/excited manifold Hamiltonians and drive operators.
//! * [`spectra`]: eigensystems, level sweeps, anti-crossing search, transition
//!   catalogs, and synthetic ODMR / ODNMR spectra.
//! * [`dynamics`]: the optical nuclear-polarization chain, time-domain Rabi
//!   propagation and hyperfine enhancement.
//! * [`analysis`]: Levenberg–Marquardt fits of Lorentzian spectra and damped
//!   Rabi traces, polarization extraction, linear regression.
//!
//! Units: energies are frequencies in MHz (H/h), fields in mT, times in µs.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod nuclear;
pub mod spectra;
pub mod spinops;

pub use error::{Error, Result};
pub use hamiltonian::{
    build_hamiltonian, default_params, drive_operator, DriveKind, HyperfineTensor, Manifold,
    SpinSystemParams,
};
pub use linalg::{Operator, C64};
pub use nuclear::NuclearDistribution;
pub use spinops::SiteLayout;
