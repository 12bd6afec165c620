use alloc::vec::Vec;

use super::eigensystem::{eigh, EigenSystem, Ms};
use super::spectrum::{FrequencyGrid, LineShape, Spectrum};
use super::transitions::{transition_catalog_where, CatalogOptions, TransitionLine};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, drive_operator, DriveKind, SpinSystemParams};
use crate::nuclear::{NuclearDistribution, M_I_VALUES, MULTIPLICITY};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmrOptions {
    pub shape: LineShape,
    pub catalog: CatalogOptions,
}

impl Default for NmrOptions {
    fn default() -> Self {
        NmrOptions {
            shape: LineShape::Lorentzian,
            catalog: CatalogOptions::default(),
        }
    }
}

/// Eigenstate populations after optical pumping leaves the nuclei in `rho`
/// with the electron in `ms`: each m_I share is spread evenly over the
/// product states of that m_I and projected onto the eigenbasis.
pub fn branch_populations(es: &EigenSystem, ms: Ms, rho: &NuclearDistribution) -> Vec<f64> {
    let r = rho.as_array();
    (0..es.dim())
        .map(|k| {
            M_I_VALUES
                .iter()
                .enumerate()
                .map(|(j, &m)| r[j] * es.sector_weight(k, ms, m) / MULTIPLICITY[j] as f64)
                .sum()
        })
        .collect()
}

/// Nuclear transitions between eigenstates of the `branch` (m_s = 0 or −1,
/// mixed states included). With `mw_pi` the pumped population is moved to
/// m_s = −1 before the RF pulse; without it the population stays in
/// m_s = 0.
pub fn odnmr_lines(
    p: &SpinSystemParams,
    branch: Ms,
    mw_pi: bool,
    rho: &NuclearDistribution,
    opts: &NmrOptions,
) -> Result<(EigenSystem, Vec<TransitionLine>)> {
    if branch == Ms::Plus {
        return Err(Error::param("branch", "ODNMR branch must be m_s = 0 or -1"));
    }
    let es = eigh(&build_hamiltonian(p)?)?;
    let populated = if mw_pi { Ms::Minus } else { Ms::Zero };
    let pops = branch_populations(&es, populated, rho);
    let v = drive_operator(p, DriveKind::RfInPlane);
    let lines = transition_catalog_where(
        &es,
        &v,
        (0.0, f64::INFINITY),
        &pops,
        &opts.catalog,
        |k| es.labels[k].branch.admits(branch),
    )?;
    Ok((es, lines))
}

/// Broadened ODNMR spectrum; each line has height population × strength.
pub fn odnmr_spectrum(
    p: &SpinSystemParams,
    branch: Ms,
    fwhm: f64,
    grid: FrequencyGrid,
    mw_pi: bool,
    rho: &NuclearDistribution,
    opts: &NmrOptions,
) -> Result<Spectrum> {
    if !(fwhm > 0.0) {
        return Err(Error::param("fwhm", "linewidth must be > 0"));
    }
    let (_, lines) = odnmr_lines(p, branch, mw_pi, rho, opts)?;
    let peaks: Vec<(f64, f64)> = lines.iter().map(|l| (l.freq, l.weight * l.strength)).collect();
    Spectrum::from_lines(grid, &peaks, fwhm, opts.shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{default_params, Manifold};

    fn gs74() -> SpinSystemParams {
        default_params(Manifold::Ground).with_field(74.0)
    }

    fn grid() -> FrequencyGrid {
        FrequencyGrid::from_range(0.0, 100.0, 0.05).unwrap()
    }

    #[test]
    fn populations_sum_to_one_on_pure_branch() {
        let p = default_params(Manifold::Ground).without_hyperfine().with_field(74.0);
        let es = eigh(&build_hamiltonian(&p).unwrap()).unwrap();
        let pops = branch_populations(&es, Ms::Minus, &NuclearDistribution::unpolarized());
        assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pumped_band_centroid_near_45_mhz() {
        let rho = NuclearDistribution::unpolarized();
        let s = odnmr_spectrum(&gs74(), Ms::Minus, 1.0, grid(), true, &rho, &NmrOptions::default()).unwrap();
        let c = s.centroid(35.0, 60.0).unwrap();
        assert!((40.0..=50.0).contains(&c), "{c}");
    }

    #[test]
    fn reference_without_pi_pulse_is_negligible() {
        let rho = NuclearDistribution::unpolarized();
        let opts = NmrOptions::default();
        let on = odnmr_spectrum(&gs74(), Ms::Minus, 1.0, grid(), true, &rho, &opts).unwrap();
        let off = odnmr_spectrum(&gs74(), Ms::Minus, 1.0, grid(), false, &rho, &opts).unwrap();
        assert!(off.integrated(35.0, 60.0) <= 0.05 * on.integrated(35.0, 60.0));
    }

    #[test]
    fn zero_branch_band_lies_below_10_mhz() {
        let rho = NuclearDistribution::unpolarized();
        let (_, lines) = odnmr_lines(&gs74(), Ms::Zero, false, &rho, &NmrOptions::default()).unwrap();
        let strongest = lines.iter().max_by(|a, b| a.strength.total_cmp(&b.strength)).unwrap();
        assert!(strongest.freq < 10.0);
    }

    #[test]
    fn zero_hyperfine_band_collapses() {
        let p = gs74().without_hyperfine();
        let rho = NuclearDistribution::unpolarized();
        let (_, lines) = odnmr_lines(&p, Ms::Minus, true, &rho, &NmrOptions::default()).unwrap();
        let larmor = 0.003076 * 74.0;
        assert!(lines.iter().all(|l| (l.freq - larmor).abs() < 1e-8));
    }

    #[test]
    fn plus_branch_is_rejected() {
        let rho = NuclearDistribution::unpolarized();
        assert!(odnmr_lines(&gs74(), Ms::Plus, true, &rho, &NmrOptions::default()).is_err());
    }
}
