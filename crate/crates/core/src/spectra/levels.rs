use alloc::vec::Vec;

use super::eigensystem::{eigh, EigenSystem, Ms};
use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianParts, SpinSystemParams};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub b_mt: f64,
    /// All 81 eigenvalues at `b_mt`, ascending, MHz.
    pub values: Vec<f64>,
}

/// Eigenvalues at each field in `fields`, rows in input order.
pub fn level_sweep(p: &SpinSystemParams, fields: &[f64]) -> Result<Vec<LevelRow>> {
    if fields.is_empty() {
        return Err(Error::param("fields", "field list is empty"));
    }
    let parts = HamiltonianParts::new(p)?;
    fields
        .iter()
        .map(|&b| level_row(&parts, b))
        .collect()
}

/// One row of [`level_sweep`], for callers that distribute field points
/// themselves.
pub fn level_row(parts: &HamiltonianParts, b_mt: f64) -> Result<LevelRow> {
    if !b_mt.is_finite() || b_mt < 0.0 {
        return Err(Error::param("b0", "field must be finite and >= 0"));
    }
    let es = eigh(&parts.at(b_mt))?;
    Ok(LevelRow {
        b_mt,
        values: es.values,
    })
}

/// Search interval of [`find_lac`], mT.
pub const LAC_SEARCH_RANGE: (f64, f64) = (1.0, 300.0);
const LAC_SCAN_STEP: f64 = 1.0;
const LAC_RESOLUTION: f64 = 0.01;

/// Weight-averaged energy of the m_s = `ms` sector.
fn sector_centroid(es: &EigenSystem, ms: Ms) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..es.dim() {
        let w = es.branch_weight(k, ms);
        num += w * es.values[k];
        den += w;
    }
    num / den
}

fn centroid_gap(parts: &HamiltonianParts, b: f64) -> Result<f64> {
    let es = eigh(&parts.at(b))?;
    Ok((sector_centroid(&es, Ms::Zero) - sector_centroid(&es, Ms::Minus)).abs())
}

/// Field (mT) where the m_s = 0 and m_s = −1 sectors meet, i.e. the level
/// anti-crossing of the manifold described by `p` (its `b0` is ignored).
///
/// The gap between the weight-averaged energies of the two sectors is
/// scanned on a 1 mT grid over [`LAC_SEARCH_RANGE`], and the best interior
/// grid point is refined by golden-section search to 0.01 mT.
pub fn find_lac(p: &SpinSystemParams) -> Result<f64> {
    let parts = HamiltonianParts::new(p)?;
    let (lo, hi) = LAC_SEARCH_RANGE;
    let steps = libm::round((hi - lo) / LAC_SCAN_STEP) as usize;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=steps {
        let g = centroid_gap(&parts, lo + i as f64 * LAC_SCAN_STEP)?;
        if g < best.1 {
            best = (i, g);
        }
    }
    if best.0 == 0 || best.0 == steps {
        return Err(Error::NoBracket { lo, hi });
    }
    let centre = lo + best.0 as f64 * LAC_SCAN_STEP;
    golden_section(
        |b| centroid_gap(&parts, b),
        centre - LAC_SCAN_STEP,
        centre + LAC_SCAN_STEP,
        LAC_RESOLUTION,
    )
}

/// Minimizes a unimodal function on [a, b] until the bracket is shorter
/// than `tol`; returns the bracket midpoint.
fn golden_section(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<f64> {
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}
