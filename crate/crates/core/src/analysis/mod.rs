//! Inverse problems: multi-Lorentzian spectrum fits, polarization
//! extraction, damped-cosine Rabi fits and linear regression.

mod lm;
mod lorentz;
mod rabi_fit;
mod regression;

pub use lm::{levenberg_marquardt, LeastSquares, LmOptions, LmReport};
pub use lorentz::{
    fit_lorentzians, fit_lorentzians_xy, seed_peaks, LorentzianModel, PeakConstraints, PeakFit, PeakSet, Widths,
};
pub use rabi_fit::{
    estimate_frequency, fit_damped_cosine, DampedCosineModel, DecayTerm, RabiFit, RabiFitOptions, RabiInit,
    MIN_RABI_SAMPLES,
};
pub use regression::{fit_linear, LinearFit};

use crate::error::{Error, Result};

/// Σ m_I·ρ / (3·Σ ρ) over m_I = −3..+3 (index m_I + 3). The weights need
/// not be normalized.
pub fn polarization(weights: &[f64; 7]) -> Result<f64> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidDistribution("weights must be finite and >= 0".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDistribution("all weights are zero".into()));
    }
    let first: f64 = (1..=3).map(|m| m as f64 * (weights[3 + m] - weights[3 - m])).sum();
    Ok(first / (3.0 * total))
}
