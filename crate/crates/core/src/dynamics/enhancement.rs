use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, drive_operator, DriveKind, SpinSystemParams};
use crate::linalg::{norm_sqr, Operator, C64};
use crate::nuclear::NuclearDistribution;
use crate::spectra::{
    eigh, odnmr_lines, strongest_near, Branch, EigenSystem, Ms, NmrOptions, TransitionLine,
};
use crate::spinops::{embed, spin1_operators, SiteLayout};

/// Ratio of the full drive matrix element of a nuclear-like transition to
/// the bare nuclear one: |⟨f|γ_e·S_x + γ_n·ΣI_x|i⟩| / (γ_n·M_bare).
///
/// The bare states are the normalized projections of i and f onto their
/// dominant (m_s, m_I) sectors, and M_bare = |⟨f_bare|ΣI_x|i_bare⟩|.
pub fn hyperfine_enhancement(p: &SpinSystemParams, initial: usize, target: usize) -> Result<f64> {
    let es = eigh(&build_hamiltonian(p)?)?;
    hyperfine_enhancement_in(&es, p, initial, target)
}

pub fn hyperfine_enhancement_in(
    es: &EigenSystem,
    p: &SpinSystemParams,
    initial: usize,
    target: usize,
) -> Result<f64> {
    let ill = Error::IllMatchedTransition { initial, target };
    if initial >= es.dim() || target >= es.dim() || es.labels.is_empty() {
        return Err(ill);
    }
    let (li, lf) = (es.labels[initial], es.labels[target]);
    let ms = match (li.branch, lf.branch) {
        (Branch::Pure(a), Branch::Pure(b)) if a == b => a,
        _ => return Err(ill),
    };
    if (li.m_i - lf.m_i).abs() != 1 {
        return Err(ill);
    }
    let layout = SiteLayout::standard();
    let bare_i = sector_projection(&es.vector(initial), ms, li.m_i, &layout).ok_or(ill.clone())?;
    let bare_f = sector_projection(&es.vector(target), ms, lf.m_i, &layout).ok_or(ill.clone())?;
    let ix = nuclear_ix(&layout);
    let m_bare = ix.matrix_element(&bare_f, &bare_i).norm();
    if m_bare < 1e-9 {
        return Err(ill);
    }
    let v = drive_operator(p, DriveKind::RfInPlane);
    let full = v.matrix_element(&es.vector(target), &es.vector(initial)).norm();
    Ok(full / (p.gamma_n * m_bare))
}

fn sector_projection(psi: &[C64], ms: Ms, m_i: i32, layout: &SiteLayout) -> Option<Vec<C64>> {
    let proj: Vec<C64> = psi
        .iter()
        .enumerate()
        .map(|(idx, &a)| {
            let inside = layout.projection(idx, SiteLayout::ELECTRON) == ms.value()
                && layout.total_nuclear_projection(idx) == m_i;
            if inside {
                a
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let n = libm::sqrt(norm_sqr(&proj));
    (n > 1e-9).then(|| proj.iter().map(|x| x / n).collect())
}

fn nuclear_ix(layout: &SiteLayout) -> Operator {
    let (sx, _, _) = spin1_operators();
    let mut ix = Operator::zeros(layout.total_dim());
    for site in 1..=3 {
        ix.add_scaled(&embed(&sx, site, layout).expect("nuclear site"), 1.0);
    }
    ix
}

/// First-order estimate (γ_e/γ_n)·A_tran/|D − γ_e·B| for the m_s = −1 branch.
pub fn perturbative_enhancement(p: &SpinSystemParams) -> Result<f64> {
    let detuning = (p.d_zfs - p.gamma_e * p.b0).abs();
    if !(detuning > 1.0) {
        return Err(Error::Domain(format!(
            "|D - gamma_e*B| = {detuning} MHz: perturbative estimate invalid at the anti-crossing"
        )));
    }
    Ok(p.gamma_e / p.gamma_n * p.hyperfine[0].transverse_mean() / detuning)
}

/// Strongest nuclear line of the `ms` branch within `half_width` MHz of
/// `near`.
pub fn dominant_nuclear_line(
    p: &SpinSystemParams,
    ms: Ms,
    near: f64,
    half_width: f64,
) -> Result<(EigenSystem, TransitionLine)> {
    let rho = NuclearDistribution::unpolarized();
    let (es, lines) = odnmr_lines(p, ms, ms == Ms::Minus, &rho, &NmrOptions::default())?;
    let pure: Vec<TransitionLine> = lines
        .into_iter()
        .filter(|l| l.branch == (Branch::Pure(ms), Branch::Pure(ms)))
        .collect();
    let line = strongest_near(&pure, near, half_width).ok_or_else(|| {
        Error::param("near", format!("no nuclear line within {half_width} MHz of {near} MHz"))
    })?;
    Ok((es, line))
}
