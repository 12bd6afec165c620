use alloc::vec::Vec;

use crate::error::Result;
use crate::linalg::{eigh_raw, Operator, C64};
use crate::nuclear;
use crate::spinops::SiteLayout;

/// Electron spin projection of a basis sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ms {
    Plus,
    Zero,
    Minus,
}

impl Ms {
    pub const ALL: [Ms; 3] = [Ms::Plus, Ms::Zero, Ms::Minus];

    pub fn value(self) -> i32 {
        match self {
            Ms::Plus => 1,
            Ms::Zero => 0,
            Ms::Minus => -1,
        }
    }

    pub fn from_value(m: i32) -> Option<Ms> {
        match m {
            1 => Some(Ms::Plus),
            0 => Some(Ms::Zero),
            -1 => Some(Ms::Minus),
            _ => None,
        }
    }

    /// Position in the per-site (+1, 0, −1) basis.
    pub fn index(self) -> usize {
        (1 - self.value()) as usize
    }
}

/// Dominant electron branch of an eigenstate. A state belongs to a branch
/// when more than half of its weight lies in that m_s sector; otherwise it
/// is `Mixed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Pure(Ms),
    Mixed,
}

impl Branch {
    /// True for `Pure(ms)` and for `Mixed`, which belongs to every branch.
    pub fn admits(self, ms: Ms) -> bool {
        match self {
            Branch::Pure(m) => m == ms,
            Branch::Mixed => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateLabel {
    pub branch: Branch,
    /// Dominant total nuclear projection.
    pub m_i: i32,
    /// Weight of the state on the (m_s, m_I) sector named by this label.
    pub weight: f64,
}

/// Weight of one eigenstate on each (m_s, m_I) sector, indexed
/// `[Ms::index()][m_I + 3]`.
pub type SectorWeights = [[f64; 7]; 3];

#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Ascending, MHz.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: Operator,
    /// Present when the matrix lives on the standard 81-dimensional layout.
    pub labels: Vec<StateLabel>,
    pub sector_weights: Vec<SectorWeights>,
}

/// Diagonalizes a Hermitian operator; labels each state when the dimension
/// matches the standard electron ⊗ 3·¹⁴N layout.
pub fn eigh(h: &Operator) -> Result<EigenSystem> {
    let raw = eigh_raw(h)?;
    let layout = SiteLayout::standard();
    let n = h.dim();
    let (labels, sector_weights) = if n == layout.total_dim() {
        let weights: Vec<SectorWeights> = (0..n)
            .map(|k| sector_weights_of(&raw.vectors, k, &layout))
            .collect();
        (weights.iter().map(label_from_weights).collect(), weights)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(EigenSystem {
        values: raw.values,
        vectors: raw.vectors,
        labels,
        sector_weights,
    })
}

fn sector_weights_of(vectors: &Operator, k: usize, layout: &SiteLayout) -> SectorWeights {
    let mut w = [[0.0; 7]; 3];
    for idx in 0..vectors.dim() {
        let ms = layout.local_index(idx, SiteLayout::ELECTRON);
        let mi = layout.total_nuclear_projection(idx);
        w[ms][(mi + 3) as usize] += vectors.get(idx, k).norm_sqr();
    }
    w
}

fn label_from_weights(w: &SectorWeights) -> StateLabel {
    let marginals: [f64; 3] = core::array::from_fn(|s| w[s].iter().sum());
    let branch = Ms::ALL
        .iter()
        .find(|m| marginals[m.index()] > 0.5)
        .map_or(Branch::Mixed, |m| Branch::Pure(*m));
    let rows: &[usize] = match branch {
        Branch::Pure(m) => &[m.index()][..],
        Branch::Mixed => &[0, 1, 2][..],
    };
    let (mut best, mut best_w) = (0i32, -1.0);
    for &s in rows {
        for (k, &x) in w[s].iter().enumerate() {
            if x > best_w {
                best_w = x;
                best = nuclear::M_I_VALUES[k];
            }
        }
    }
    StateLabel {
        branch,
        m_i: best,
        weight: best_w,
    }
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// Weight of eigenstate `k` on the (ms, m_i) sector.
    pub fn sector_weight(&self, k: usize, ms: Ms, m_i: i32) -> f64 {
        match nuclear::index_of(m_i) {
            Some(j) => self.sector_weights[k][ms.index()][j],
            None => 0.0,
        }
    }

    /// Total weight of eigenstate `k` on the m_s = `ms` subspace.
    pub fn branch_weight(&self, k: usize, ms: Ms) -> f64 {
        self.sector_weights[k][ms.index()].iter().sum()
    }

    /// Indices of states whose label is `Pure(ms)`.
    pub fn states_in(&self, ms: Ms) -> Vec<usize> {
        (0..self.dim())
            .filter(|&k| self.labels[k].branch == Branch::Pure(ms))
            .collect()
    }

    /// `U†·V·U`.
    pub fn to_eigenbasis(&self, v: &Operator) -> Operator {
        self.vectors.adjoint().matmul(&v.matmul(&self.vectors))
    }

    /// max |H − U·Λ·U†| / max |H|.
    pub fn reconstruction_residual(&self, h: &Operator) -> f64 {
        let lam = Operator::diag_real(&self.values);
        let recon = self.vectors.matmul(&lam).matmul(&self.vectors.adjoint());
        recon.max_abs_diff(h) / h.max_abs().max(f64::MIN_POSITIVE)
    }

    /// max |U†U − I|.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.vectors.adjoint().matmul(&self.vectors);
        g.max_abs_diff(&Operator::identity(self.dim()))
    }

    /// Number of distinct values among `indices` when energies are compared
    /// at resolution `tol` (MHz).
    pub fn distinct_levels(&self, indices: &[usize], tol: f64) -> usize {
        let mut e: Vec<f64> = indices.iter().map(|&k| self.values[k]).collect();
        e.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        if e.is_empty() {
            return 0;
        }
        1 + e.windows(2).filter(|w| w[1] - w[0] > tol).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, default_params, Manifold};

    #[test]
    fn labels_without_hyperfine_are_pure() {
        let p = default_params(Manifold::Ground).without_hyperfine().with_field(20.0);
        let es = eigh(&build_hamiltonian(&p).unwrap()).unwrap();
        for l in &es.labels {
            assert!(matches!(l.branch, Branch::Pure(_)));
            assert!((l.weight - 1.0).abs() < 1e-12);
        }
        assert_eq!(es.states_in(Ms::Minus).len(), 27);
        assert_eq!(es.states_in(Ms::Zero).len(), 27);
    }

    #[test]
    fn sector_weights_sum_to_one() {
        let p = default_params(Manifold::Excited).with_field(74.0);
        let es = eigh(&build_hamiltonian(&p).unwrap()).unwrap();
        for w in &es.sector_weights {
            let total: f64 = w.iter().flatten().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_layout_matrix_has_no_labels() {
        let es = eigh(&Operator::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(es.values, alloc::vec![1.0, 2.0, 3.0]);
        assert!(es.labels.is_empty());
    }

    #[test]
    fn repeated_calls_are_bit_identical() {
        let p = default_params(Manifold::Ground).with_field(74.0);
        let h = build_hamiltonian(&p).unwrap();
        let a = eigh(&h).unwrap();
        let b = eigh(&h).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }
}
