//! Optical nuclear-polarization pumping, time-domain Rabi propagation and
//! hyperfine enhancement of the nuclear drive.

mod enhancement;
mod propagate;
mod pump;
mod rabi;

pub use crate::nuclear::NuclearDistribution;
pub use enhancement::{
    dominant_nuclear_line, hyperfine_enhancement, hyperfine_enhancement_in, perturbative_enhancement,
};
pub use propagate::{max_step, propagate, LocalDrive, PropagationConfig, StaticPropagator, Waveform};
pub use pump::{
    flip_probabilities, flip_probability, flip_probability_in, pump_from, pump_steady_state,
    PumpOutcome, PumpParams, PUMP_TOLERANCE,
};
pub use rabi::{pair_coupling, rabi_evolve, PairCoupling, TimeTrace};
