//! Dense complex matrices and the Hermitian eigensolver.

mod eigh;
mod operator;
mod real;

pub use eigh::{eigh_raw, HermitianEigen};
pub use operator::Operator;
pub use real::solve_spd;

pub type C64 = num_complex::Complex64;

/// ⟨a|b⟩ for column vectors stored as slices.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}
