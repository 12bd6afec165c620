//! Piecewise-constant propagation of ψ under `H0 + a(t)·V`, with `V` a sum of
//! single-site operators.
//!
//! Each step is the symmetric splitting `e^{−iH0·dt/2} · e^{−i·a(t_mid)·V·dt} ·
//! e^{−iH0·dt/2}`. The static factor is exact: `H0` is split into its
//! connected blocks and each block is exponentiated through its own
//! eigendecomposition. The drive factor is exact as well, because the
//! single-site terms commute and exponentiate site by site.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hamiltonian::SpinSystemParams;
use crate::linalg::{eigh_raw, Operator, C64};
use crate::spinops::{embed, spin1_operators, SiteLayout, SITES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    /// Steps per period of the fastest frequency in the problem.
    pub steps_per_period: f64,
    /// Smallest admissible step, µs.
    pub min_step_us: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            steps_per_period: 50.0,
            min_step_us: 1e-9,
        }
    }
}

/// `a(t) = amplitude·cos(2π·freq·t + phase)` in mT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform {
    pub amplitude: f64,
    pub freq: f64,
    pub phase: f64,
}

impl Waveform {
    pub fn cosine(amplitude: f64, freq: f64) -> Self {
        Waveform {
            amplitude,
            freq,
            phase: 0.0,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * libm::cos(2.0 * PI * self.freq * t + self.phase)
    }

    /// The waveform that undoes this one when played backwards over [0, T]
    /// with the static Hamiltonian negated: `−a(T − s)`.
    pub fn reversed(&self, total: f64) -> Self {
        Waveform {
            amplitude: -self.amplitude,
            freq: self.freq,
            phase: -self.phase - 2.0 * PI * self.freq * total,
        }
    }
}

/// Drive operator `V = Σ_site c_site·O_site` with 3×3 Hermitian `O_site`.
#[derive(Debug, Clone)]
pub struct LocalDrive {
    layout: SiteLayout,
    sites: Vec<SiteFactor>,
}

#[derive(Debug, Clone)]
struct SiteFactor {
    site: usize,
    /// Eigenvalues of the (coefficient-weighted) site operator.
    values: [f64; 3],
    /// Eigenvectors, column k = vector k.
    vectors: [[C64; 3]; 3],
    op: Operator,
}

impl LocalDrive {
    pub fn new(terms: &[(usize, f64, &Operator)]) -> Result<Self> {
        let layout = SiteLayout::standard();
        let mut per_site: [Option<Operator>; SITES] = Default::default();
        for &(site, coeff, op) in terms {
            if site >= SITES {
                return Err(Error::SiteOutOfRange { site, sites: SITES });
            }
            if op.dim() != 3 {
                return Err(Error::DimensionMismatch {
                    expected: 3,
                    got: op.dim(),
                });
            }
            let scaled = op.scale(coeff);
            per_site[site] = Some(match per_site[site].take() {
                Some(acc) => &acc + &scaled,
                None => scaled,
            });
        }
        let mut sites = Vec::new();
        for (site, op) in per_site.into_iter().enumerate() {
            let Some(op) = op else { continue };
            let eig = eigh_raw(&op)?;
            let vectors = core::array::from_fn(|r| core::array::from_fn(|c| eig.vectors.get(r, c)));
            sites.push(SiteFactor {
                site,
                values: [eig.values[0], eig.values[1], eig.values[2]],
                vectors,
                op,
            });
        }
        Ok(LocalDrive { layout, sites })
    }

    /// In-plane x drive per mT: γ_e·S_x on the electron, γ_n·I_x on each
    /// nucleus.
    pub fn in_plane(p: &SpinSystemParams) -> Self {
        let (sx, _, _) = spin1_operators();
        LocalDrive::new(&[
            (SiteLayout::ELECTRON, p.gamma_e, &sx),
            (1, p.gamma_n, &sx),
            (2, p.gamma_n, &sx),
            (3, p.gamma_n, &sx),
        ])
        .expect("spin-1 x operators on valid sites")
    }

    /// Full 81×81 operator.
    pub fn to_operator(&self) -> Operator {
        let n = self.layout.total_dim();
        let mut v = Operator::zeros(n);
        for f in &self.sites {
            v.add_scaled(&embed(&f.op, f.site, &self.layout).expect("valid site"), 1.0);
        }
        v
    }

    /// Upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        self.sites
            .iter()
            .map(|f| f.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .sum()
    }

    /// ψ ← exp(−2πi·θ·V)·ψ.
    fn apply_exp(&self, theta: f64, psi: &mut [C64]) {
        for f in &self.sites {
            let phases: [C64; 3] =
                core::array::from_fn(|k| C64::from_polar(1.0, -2.0 * PI * theta * f.values[k]));
            let w = &f.vectors;
            let m: [[C64; 3]; 3] = core::array::from_fn(|r| {
                core::array::from_fn(|c| (0..3).map(|k| w[r][k] * phases[k] * w[c][k].conj()).sum())
            });
            let stride = self.layout.stride(f.site);
            let block = 3 * stride;
            for base in (0..psi.len()).step_by(block) {
                for off in 0..stride {
                    let i0 = base + off;
                    let (a, b, c) = (psi[i0], psi[i0 + stride], psi[i0 + 2 * stride]);
                    psi[i0] = m[0][0] * a + m[0][1] * b + m[0][2] * c;
                    psi[i0 + stride] = m[1][0] * a + m[1][1] * b + m[1][2] * c;
                    psi[i0 + 2 * stride] = m[2][0] * a + m[2][1] * b + m[2][2] * c;
                }
            }
        }
    }
}

/// `H0` split into independent blocks, each with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct StaticPropagator {
    dim: usize,
    blocks: Vec<Block>,
    spectral_radius: f64,
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    values: Vec<f64>,
    vectors: Operator,
}

/// A block unitary for one fixed step.
struct BlockUnitaries {
    mats: Vec<Vec<C64>>,
}

impl StaticPropagator {
    pub fn new(h0: &Operator) -> Result<Self> {
        let n = h0.dim();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if h0.get(i, j) != C64::new(0.0, 0.0) || h0.get(j, i) != C64::new(0.0, 0.0) {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = root(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        let mut blocks = Vec::with_capacity(groups.len());
        let mut spectral_radius = 0.0f64;
        for indices in groups {
            let sub = Operator::from_fn(indices.len(), |a, b| h0.get(indices[a], indices[b]));
            let eig = eigh_raw(&sub)?;
            for v in &eig.values {
                spectral_radius = spectral_radius.max(v.abs());
            }
            blocks.push(Block {
                indices,
                values: eig.values,
                vectors: eig.vectors,
            });
        }
        Ok(StaticPropagator {
            dim: n,
            blocks,
            spectral_radius,
        })
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.indices.len()).collect()
    }

    fn unitaries(&self, dt: f64) -> BlockUnitaries {
        let mats = self
            .blocks
            .iter()
            .map(|b| {
                let m = b.indices.len();
                let phases: Vec<C64> = b
                    .values
                    .iter()
                    .map(|e| C64::from_polar(1.0, -2.0 * PI * e * dt))
                    .collect();
                let mut u = vec![C64::new(0.0, 0.0); m * m];
                for r in 0..m {
                    for c in 0..m {
                        u[r * m + c] = (0..m)
                            .map(|k| b.vectors.get(r, k) * phases[k] * b.vectors.get(c, k).conj())
                            .sum();
                    }
                }
                u
            })
            .collect();
        BlockUnitaries { mats }
    }

    fn apply(&self, u: &BlockUnitaries, psi: &mut [C64], scratch: &mut Vec<C64>) {
        for (b, mat) in self.blocks.iter().zip(&u.mats) {
            let m = b.indices.len();
            scratch.clear();
            scratch.extend(b.indices.iter().map(|&i| psi[i]));
            for r in 0..m {
                let row = &mat[r * m..(r + 1) * m];
                psi[b.indices[r]] = row.iter().zip(scratch.iter()).map(|(x, y)| x * y).sum();
            }
        }
    }
}

/// Largest admissible step for the given static part, drive and waveform.
pub fn max_step(h0: &StaticPropagator, drive: &LocalDrive, w: &Waveform, cfg: &PropagationConfig) -> f64 {
    let fastest = w.freq.abs().max(h0.spectral_radius() + w.amplitude.abs() * drive.norm_bound());
    1.0 / (cfg.steps_per_period * fastest)
}

/// Evolves `psi0` from t = 0 and returns the state at each of `times`
/// (ascending, ≥ 0).
pub fn propagate(
    h0: &StaticPropagator,
    drive: &LocalDrive,
    w: &Waveform,
    psi0: &[C64],
    times: &[f64],
    cfg: &PropagationConfig,
) -> Result<Vec<Vec<C64>>> {
    if psi0.len() != h0.dim {
        return Err(Error::DimensionMismatch {
            expected: h0.dim,
            got: psi0.len(),
        });
    }
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::param("times", "must be finite, >= 0 and ascending"));
    }
    let dt_max = max_step(h0, drive, w, cfg);
    if !(dt_max >= cfg.min_step_us) {
        return Err(Error::StepUnderflow {
            step: dt_max,
            time: 0.0,
        });
    }
    let mut psi = psi0.to_vec();
    let mut scratch = Vec::with_capacity(h0.dim);
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let n = libm::ceil(span / dt_max).max(1.0) as usize;
            let dt = span / n as f64;
            if dt < cfg.min_step_us && span >= cfg.min_step_us {
                return Err(Error::StepUnderflow { step: dt, time: t });
            }
            let half = h0.unitaries(0.5 * dt);
            let full = h0.unitaries(dt);
            h0.apply(&half, &mut psi, &mut scratch);
            for k in 0..n {
                let mid = t + (k as f64 + 0.5) * dt;
                drive.apply_exp(w.at(mid) * dt, &mut psi);
                let u = if k + 1 == n { &half } else { &full };
                h0.apply(u, &mut psi, &mut scratch);
            }
            t = target;
        }
        out.push(psi.clone());
    }
    Ok(out)
}
