use alloc::vec::Vec;

use super::propagate::{propagate, LocalDrive, PropagationConfig, StaticPropagator, Waveform};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, SpinSystemParams};
use crate::linalg::{inner, norm_sqr, C64};
use crate::spectra::{eigh, EigenSystem};

/// Population of one state sampled at a list of times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    /// µs.
    pub times: Vec<f64>,
    pub population: Vec<f64>,
    /// max |‖ψ(t)‖² − 1| over the samples.
    pub norm_defect: f64,
}

/// Frequency and drive coupling of an eigenstate pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoupling {
    /// E_target − E_initial, MHz.
    pub freq: f64,
    /// |⟨target|V|initial⟩| per mT of drive, MHz.
    pub coupling: f64,
}

pub fn pair_coupling(es: &EigenSystem, drive: &LocalDrive, initial: usize, target: usize) -> Result<PairCoupling> {
    let n = es.dim();
    for k in [initial, target] {
        if k >= n {
            return Err(Error::param("transition", "eigenstate index out of range"));
        }
    }
    let v = drive.to_operator();
    let m = v.matrix_element(&es.vector(target), &es.vector(initial));
    Ok(PairCoupling {
        freq: es.values[target] - es.values[initial],
        coupling: m.norm(),
    })
}

/// Starts in eigenstate `initial` of the static Hamiltonian at `p.b0`, drives
/// with `b1·cos(2π·drive_freq·t)` (mT) along x, and records the population
/// of eigenstate `target` at each time (µs).
pub fn rabi_evolve(
    p: &SpinSystemParams,
    drive_freq: f64,
    b1: f64,
    times: &[f64],
    initial: usize,
    target: usize,
    cfg: &PropagationConfig,
) -> Result<TimeTrace> {
    if !(b1 >= 0.0) || !b1.is_finite() {
        return Err(Error::param("b1", "drive amplitude must be finite and >= 0"));
    }
    if !drive_freq.is_finite() || drive_freq < 0.0 {
        return Err(Error::param("drive_freq", "must be finite and >= 0"));
    }
    let h0 = build_hamiltonian(p)?;
    let es = eigh(&h0)?;
    if initial >= es.dim() || target >= es.dim() {
        return Err(Error::param("transition", "eigenstate index out of range"));
    }
    let sp = StaticPropagator::new(&h0)?;
    let drive = LocalDrive::in_plane(p);
    let psi0 = es.vector(initial);
    let goal = es.vector(target);
    let states = propagate(&sp, &drive, &Waveform::cosine(b1, drive_freq), &psi0, times, cfg)?;
    let mut norm_defect = 0.0f64;
    let population = states
        .iter()
        .map(|psi| {
            norm_defect = norm_defect.max((norm_sqr(psi) - 1.0).abs());
            let a: C64 = inner(&goal, psi);
            a.norm_sqr()
        })
        .collect();
    Ok(TimeTrace {
        times: times.to_vec(),
        population,
        norm_defect,
    })
}
