//! Physical constants of the V_B⁻ / ¹⁴N system, in the crate's natural units
//! (MHz, mT). Loaded verbatim by [`crate::default_params`]; nothing here is
//! recomputed at run time except the derived ratio.

/// Ground-state zero-field splitting, MHz.
pub const D_GS_MHZ: f64 = 3450.0;
/// Excited-state zero-field splitting, MHz.
pub const D_ES_MHZ: f64 = 2100.0;
/// Electron gyromagnetic ratio, MHz/mT (28 GHz/T).
pub const GAMMA_E_MHZ_PER_MT: f64 = 28.0;
/// ¹⁴N gyromagnetic ratio, MHz/mT (3.076 MHz/T).
pub const GAMMA_N_MHZ_PER_MT: f64 = 0.003076;
/// Axial hyperfine constant of each nearest nitrogen, MHz.
pub const A_ZZ_MHZ: f64 = 47.0;
/// Mean transverse hyperfine constant (A_xx + A_yy)/2, MHz.
pub const A_TRAN_MHZ: f64 = 68.0;
/// Default quadrupole constant; unknown, so zero unless configured.
pub const Q_DEFAULT_MHZ: f64 = 0.0;

/// Vacuum permeability, T·m/A.
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// γ_e / γ_n, dimensionless.
pub fn gamma_ratio() -> f64 {
    GAMMA_E_MHZ_PER_MT / GAMMA_N_MHZ_PER_MT
}

/// One row of the dumpable constants table.
#[derive(Debug, Clone, Copy)]
pub struct ConstantEntry {
    pub key: &'static str,
    pub value: f64,
    pub note: &'static str,
}

/// Table of every embedded constant with a short provenance note.
pub fn table() -> [ConstantEntry; 9] {
    [
        ConstantEntry {
            key: "D_GS_MHz",
            value: D_GS_MHZ,
            note: "ground-state zero-field splitting (3.45 GHz)",
        },
        ConstantEntry {
            key: "D_ES_MHz",
            value: D_ES_MHZ,
            note: "excited-state zero-field splitting (2.1 GHz)",
        },
        ConstantEntry {
            key: "gamma_e_MHz_per_mT",
            value: GAMMA_E_MHZ_PER_MT,
            note: "electron gyromagnetic ratio (28 GHz/T)",
        },
        ConstantEntry {
            key: "gamma_n_MHz_per_mT",
            value: GAMMA_N_MHZ_PER_MT,
            note: "14N gyromagnetic ratio (3.076 MHz/T)",
        },
        ConstantEntry {
            key: "A_zz_MHz",
            value: A_ZZ_MHZ,
            note: "axial hyperfine constant, nearest nitrogens",
        },
        ConstantEntry {
            key: "A_tran_MHz",
            value: A_TRAN_MHZ,
            note: "transverse hyperfine constant (A_xx + A_yy)/2",
        },
        ConstantEntry {
            key: "Q_default_MHz",
            value: Q_DEFAULT_MHZ,
            note: "quadrupole constant; not published, configurable",
        },
        ConstantEntry {
            key: "mu_0_T_m_per_A",
            value: MU_0,
            note: "vacuum permeability (CODATA 2018)",
        },
        ConstantEntry {
            key: "gamma_ratio",
            value: gamma_ratio(),
            note: "derived: gamma_e / gamma_n",
        },
    ]
}
