use alloc::vec::Vec;

use super::eigensystem::{Branch, EigenSystem};
use crate::error::{Error, Result};
use crate::linalg::Operator;

/// Strength floor relative to the strongest line in the window.
pub const DEFAULT_STRENGTH_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionLine {
    /// Lower eigenstate index.
    pub initial: usize,
    /// Upper eigenstate index.
    pub target: usize,
    /// E_target − E_initial, MHz.
    pub freq: f64,
    /// |⟨target|V|initial⟩|², MHz² per mT².
    pub strength: f64,
    /// Population of the initial state.
    pub weight: f64,
    pub branch: (Branch, Branch),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogOptions {
    pub strength_floor: f64,
}

impl Default for CatalogOptions {
    fn default() -> Self {
        CatalogOptions {
            strength_floor: DEFAULT_STRENGTH_FLOOR,
        }
    }
}

/// Every pair (i < f) with frequency in `window` whose strength exceeds
/// `strength_floor × (strongest in window)`. Lines are ordered by
/// (initial, target). `populations` holds one entry per eigenstate.
pub fn transition_catalog(
    es: &EigenSystem,
    v: &Operator,
    window: (f64, f64),
    populations: &[f64],
    opts: &CatalogOptions,
) -> Result<Vec<TransitionLine>> {
    transition_catalog_where(es, v, window, populations, opts, |_| true)
}

/// [`transition_catalog`] restricted to pairs whose both states satisfy
/// `keep`.
pub fn transition_catalog_where(
    es: &EigenSystem,
    v: &Operator,
    window: (f64, f64),
    populations: &[f64],
    opts: &CatalogOptions,
    keep: impl Fn(usize) -> bool,
) -> Result<Vec<TransitionLine>> {
    let n = es.dim();
    if v.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.dim(),
        });
    }
    if populations.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: populations.len(),
        });
    }
    if !(window.0 >= 0.0) || !(window.1 >= window.0) {
        return Err(Error::param("window", "need 0 <= min <= max"));
    }
    let vt = es.to_eigenbasis(v);
    let mut candidates = Vec::new();
    let mut strongest = 0.0f64;
    for i in (0..n).filter(|&i| keep(i)) {
        for f in (i + 1..n).filter(|&f| keep(f)) {
            let freq = es.values[f] - es.values[i];
            if freq < window.0 || freq > window.1 {
                continue;
            }
            let strength = vt.get(f, i).norm_sqr();
            strongest = strongest.max(strength);
            candidates.push((i, f, freq, strength));
        }
    }
    // Below this, |V_fi|² is round-off from the basis change.
    let noise = (1e-12 * v.max_abs()) * (1e-12 * v.max_abs());
    let floor = (opts.strength_floor * strongest).max(noise);
    let branch_of = |k: usize| es.labels.get(k).map_or(Branch::Mixed, |l| l.branch);
    Ok(candidates
        .into_iter()
        .filter(|c| c.3 > floor)
        .map(|(i, f, freq, strength)| TransitionLine {
            initial: i,
            target: f,
            freq,
            strength,
            weight: populations[i].clamp(0.0, 1.0),
            branch: (branch_of(i), branch_of(f)),
        })
        .collect())
}

/// Strongest line with frequency within `half_width` of `target`.
pub fn strongest_near(lines: &[TransitionLine], target: f64, half_width: f64) -> Option<TransitionLine> {
    lines
        .iter()
        .filter(|l| (l.freq - target).abs() <= half_width)
        .copied()
        .max_by(|a, b| a.strength.total_cmp(&b.strength))
}
