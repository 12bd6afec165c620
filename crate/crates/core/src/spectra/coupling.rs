use alloc::format;

use crate::constants::{A_TRAN_MHZ, D_GS_MHZ, GAMMA_E_MHZ_PER_MT, GAMMA_N_MHZ_PER_MT, HBAR, MU_0};
use crate::error::{Error, Result};
use crate::hamiltonian::SpinSystemParams;

/// Electron-mediated nuclear-nuclear coupling A_tran²/|D − γ_e·B| in MHz
/// with the default ground-state constants.
pub fn c_nn(b_mt: f64) -> Result<f64> {
    c_nn_from(A_TRAN_MHZ, D_GS_MHZ, GAMMA_E_MHZ_PER_MT, b_mt)
}

/// [`c_nn`] for the first nucleus's transverse hyperfine and the ZFS of `p`.
pub fn c_nn_for(p: &SpinSystemParams, b_mt: f64) -> Result<f64> {
    c_nn_from(p.hyperfine[0].transverse_mean(), p.d_zfs, p.gamma_e, b_mt)
}

fn c_nn_from(a_tran: f64, d: f64, gamma_e: f64, b_mt: f64) -> Result<f64> {
    let detuning = (d - gamma_e * b_mt).abs();
    if !(detuning > 1.0) {
        return Err(Error::Domain(format!(
            "|D - gamma_e*B| = {detuning} MHz at B = {b_mt} mT is too close to the ground-state anti-crossing"
        )));
    }
    Ok(a_tran * a_tran / detuning)
}

/// How γ_n enters μ0·γ_n²·ħ/(2r³).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GyromagneticUnits {
    /// γ_n in Hz/T; the formula yields Hz directly.
    Cyclic,
    /// γ_n in rad·s⁻¹/T; the rad/s result is converted to Hz. Larger than
    /// `Cyclic` by 2π.
    Angular,
}

/// Direct ¹⁴N–¹⁴N dipolar coupling constant in Hz at separation `r_nm`.
pub fn d_nn(r_nm: f64, units: GyromagneticUnits) -> Result<f64> {
    if !(r_nm > 0.0) || !r_nm.is_finite() {
        return Err(Error::param("r_nn", "separation must be finite and > 0"));
    }
    let two_pi = 2.0 * core::f64::consts::PI;
    // MHz/mT → Hz/T
    let gamma_hz_per_t = GAMMA_N_MHZ_PER_MT * 1e9;
    let r = r_nm * 1e-9;
    let base = MU_0 * gamma_hz_per_t * gamma_hz_per_t * HBAR / (2.0 * r * r * r);
    Ok(match units {
        GyromagneticUnits::Cyclic => base,
        GyromagneticUnits::Angular => base * two_pi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_nn_values() {
        assert!((c_nn(74.0).unwrap() - 4624.0 / 1378.0).abs() < 1e-12);
        assert!((c_nn(3300.0).unwrap() - 4624.0 / 88950.0).abs() < 1e-12);
        assert!((c_nn(0.0).unwrap() - 68.0 * 68.0 / 3450.0).abs() < 1e-12);
    }

    #[test]
    fn c_nn_refuses_near_crossing() {
        let b = 3450.0 / 28.0;
        assert!(matches!(c_nn(b), Err(Error::Domain(_))));
    }

    #[test]
    fn d_nn_inverse_cube() {
        let a = d_nn(0.25, GyromagneticUnits::Cyclic).unwrap();
        let b = d_nn(0.5, GyromagneticUnits::Cyclic).unwrap();
        assert!((a / b - 8.0).abs() < 1e-12);
    }

    #[test]
    fn d_nn_unit_tracked_oracle() {
        // γ_n = 3.076 MHz/T; μ0 in T·m/A, ħ in J·s, r in m.
        let gamma = 3.076e6_f64;
        let r = 0.250e-9_f64;
        let want = 1.25663706212e-6 * gamma * gamma * 1.054571817e-34 / (2.0 * r * r * r);
        let got = d_nn(0.25, GyromagneticUnits::Cyclic).unwrap();
        assert!((got / want - 1.0).abs() < 1e-12);
        assert!((got - 40.1).abs() < 0.1, "{got}");
        let ang = d_nn(0.25, GyromagneticUnits::Angular).unwrap();
        assert!((ang / got - 2.0 * core::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn d_nn_rejects_nonpositive_distance() {
        assert!(d_nn(0.0, GyromagneticUnits::Cyclic).is_err());
    }
}
