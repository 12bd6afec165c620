use alloc::vec::Vec;

use super::eigensystem::{eigh, EigenSystem, Ms};
use super::spectrum::{FrequencyGrid, LineShape, Spectrum};
use crate::error::Result;
use crate::hamiltonian::{build_hamiltonian, drive_operator, DriveKind, SpinSystemParams};
use crate::linalg::Operator;
use crate::nuclear::{NuclearDistribution, M_I_VALUES, MULTIPLICITY};

/// How the seven hyperfine lines are weighted beyond their population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineStrengths {
    /// Every m_I line has the same transition strength.
    #[default]
    Uniform,
    /// Per-state mean |⟨f|V|i⟩|² from the eigensystem, scaled so the
    /// strongest line is 1.
    Computed,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OdmrOptions {
    pub shape: LineShape,
    pub strengths: LineStrengths,
    /// Also emit the m_s = 0 → +1 lines.
    pub include_upper: bool,
}

/// Centres (MHz) and relative strengths of the electron lines for each m_I,
/// array index m_I + 3.
#[derive(Debug, Clone, PartialEq)]
pub struct OdmrLines {
    pub centres: [f64; 7],
    pub strengths: [f64; 7],
    pub upper_centres: [f64; 7],
    pub upper_strengths: [f64; 7],
}

/// Electron-line centres and strengths of the m_s = 0 → −1 (and 0 → +1)
/// transitions at `p.b0`, one per total nuclear projection.
///
/// Each centre is the strength-weighted mean of all eigenstate pairs, with
/// a pair (i, f) counted in proportion to the weight of i on (0, m_I), of f
/// on (∓1, m_I), and |⟨f|V|i⟩|².
pub fn odmr_lines(p: &SpinSystemParams) -> Result<OdmrLines> {
    let es = eigh(&build_hamiltonian(p)?)?;
    let vt = es.to_eigenbasis(&drive_operator(p, DriveKind::Microwave));
    let (centres, lower) = lines_to(&es, &vt, Ms::Minus);
    let (upper_centres, upper) = lines_to(&es, &vt, Ms::Plus);
    let top = lower.iter().chain(&upper).copied().fold(0.0, f64::max);
    let scale = |s: [f64; 7]| s.map(|x| if top > 0.0 { x / top } else { 0.0 });
    Ok(OdmrLines {
        centres,
        strengths: scale(lower),
        upper_centres,
        upper_strengths: scale(upper),
    })
}

fn lines_to(es: &EigenSystem, vt: &Operator, to: Ms) -> ([f64; 7], [f64; 7]) {
    let n = es.dim();
    let mut centres = [0.0; 7];
    let mut strengths = [0.0; 7];
    for (k, &m) in M_I_VALUES.iter().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let a = es.sector_weight(i, Ms::Zero, m);
            if a < 1e-12 {
                continue;
            }
            for f in 0..n {
                let b = es.sector_weight(f, to, m);
                if b < 1e-12 {
                    continue;
                }
                let w = a * b * vt.get(f, i).norm_sqr();
                num += w * (es.values[f] - es.values[i]).abs();
                den += w;
            }
        }
        centres[k] = if den > 0.0 { num / den } else { f64::NAN };
        strengths[k] = den / MULTIPLICITY[k] as f64;
    }
    (centres, strengths)
}

impl OdmrLines {
    /// `(centre, height)` pairs with height ρ(m_I)·strength.
    pub fn weighted(&self, rho: &NuclearDistribution, opts: &OdmrOptions) -> Vec<(f64, f64)> {
        let strength = |s: f64| match opts.strengths {
            LineStrengths::Uniform => 1.0,
            LineStrengths::Computed => s,
        };
        let r = rho.as_array();
        let mut out: Vec<(f64, f64)> = (0..7)
            .map(|k| (self.centres[k], r[k] * strength(self.strengths[k])))
            .collect();
        if opts.include_upper {
            out.extend((0..7).map(|k| (self.upper_centres[k], r[k] * strength(self.upper_strengths[k]))));
        }
        out
    }

    pub fn spectrum(
        &self,
        rho: &NuclearDistribution,
        fwhm: f64,
        grid: FrequencyGrid,
        opts: &OdmrOptions,
    ) -> Result<Spectrum> {
        Spectrum::from_lines(grid, &self.weighted(rho, opts), fwhm, opts.shape)
    }

    /// The m_s = 0 → −1 centres sorted by frequency, paired with their m_I.
    pub fn by_frequency(&self) -> [(f64, i32); 7] {
        let mut v: [(f64, i32); 7] = core::array::from_fn(|k| (self.centres[k], M_I_VALUES[k]));
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

/// Synthetic ODMR spectrum: one line per m_I with height ρ(m_I)·strength,
/// so a distribution of unit total weight and uniform strengths has its
/// tallest isolated line at height max ρ.
pub fn odmr_spectrum(
    p: &SpinSystemParams,
    rho: &NuclearDistribution,
    fwhm: f64,
    grid: FrequencyGrid,
    opts: &OdmrOptions,
) -> Result<Spectrum> {
    odmr_lines(p)?.spectrum(rho, fwhm, grid, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{default_params, Manifold};

    fn lines_at(b: f64) -> OdmrLines {
        odmr_lines(&default_params(Manifold::Ground).with_field(b)).unwrap()
    }

    #[test]
    fn zero_hyperfine_lines_coincide() {
        let p = default_params(Manifold::Ground).without_hyperfine().with_field(20.0);
        let l = odmr_lines(&p).unwrap();
        for c in l.centres {
            assert!((c - (3450.0 - 28.0 * 20.0)).abs() < 1e-6);
        }
        for c in l.upper_centres {
            assert!((c - (3450.0 + 28.0 * 20.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn centres_descend_with_nuclear_projection() {
        // First order: D − γ_e·B − A_zz·m_I. The transverse terms add a
        // second-order shift of order A_tran²/D per nucleus.
        let l = lines_at(20.0);
        for k in 0..6 {
            let gap = l.centres[k] - l.centres[k + 1];
            assert!((gap - 47.0).abs() < 3.0, "{gap}");
        }
        let mid = 3450.0 - 28.0 * 20.0;
        assert!((l.centres[3] - mid).abs() < 3.0 * 68.0 * 68.0 / 3450.0 * 3.0, "{:?}", l.centres);
    }

    #[test]
    fn delta_distribution_gives_single_line() {
        let l = lines_at(20.0);
        let rho = NuclearDistribution::delta(3).unwrap();
        let c = l.centres[6];
        let grid = FrequencyGrid::from_range(c - 400.0, c + 400.0, 0.5).unwrap();
        let s = l.spectrum(&rho, 5.0, grid, &OdmrOptions::default()).unwrap();
        assert_eq!(s.local_maxima().len(), 1);
        assert!((s.max() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn unpolarized_has_seven_peaks_in_multiplicity_ratio() {
        let l = lines_at(20.0);
        let rho = NuclearDistribution::unpolarized();
        let heights = l.weighted(&rho, &OdmrOptions::default());
        for (k, (_, h)) in heights.iter().enumerate() {
            assert!((h * 27.0 - MULTIPLICITY[k] as f64).abs() < 1e-12);
        }
        let grid = FrequencyGrid::from_range(2700.0, 3100.0, 0.25).unwrap();
        let s = l.spectrum(&rho, 8.0, grid, &OdmrOptions::default()).unwrap();
        assert_eq!(s.local_maxima().len(), 7);
    }

    #[test]
    fn upper_lines_only_on_request() {
        let l = lines_at(20.0);
        let rho = NuclearDistribution::unpolarized();
        assert_eq!(l.weighted(&rho, &OdmrOptions::default()).len(), 7);
        let opts = OdmrOptions {
            include_upper: true,
            ..OdmrOptions::default()
        };
        assert_eq!(l.weighted(&rho, &opts).len(), 14);
    }

    #[test]
    fn computed_strengths_are_normalized() {
        let l = lines_at(20.0);
        let top = l.strengths.iter().chain(&l.upper_strengths).copied().fold(0.0, f64::max);
        assert!((top - 1.0).abs() < 1e-12);
        assert!(l.strengths.iter().all(|s| *s > 0.5));
    }
}
