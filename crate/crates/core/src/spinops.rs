//! Spin-1 operator algebra and composition over the four-site
//! electron ⊗ N1 ⊗ N2 ⊗ N3 Hilbert space.
//!
//! Basis convention, everywhere in the crate: each site is ordered
//! (m = +1, 0, −1) and sites are ordered (electron, N1, N2, N3), so the
//! product index is `((i_e·3 + i_1)·3 + i_2)·3 + i_3`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Operator, C64};

/// Number of sites: the electron plus three nitrogen nuclei.
pub const SITES: usize = 4;

/// Local dimensions of the composed Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteLayout {
    site_dims: [usize; SITES],
}

impl SiteLayout {
    pub const ELECTRON: usize = 0;

    /// Spin-1 electron and three spin-1 nuclei: 3·3·3·3 = 81.
    pub const fn standard() -> Self {
        SiteLayout {
            site_dims: [3; SITES],
        }
    }

    pub fn site_dims(&self) -> &[usize; SITES] {
        &self.site_dims
    }

    pub fn total_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    /// Distance in the flat index between consecutive values of `site`.
    pub fn stride(&self, site: usize) -> usize {
        self.site_dims[site + 1..].iter().product()
    }

    /// Local index of `site` within flat index `idx`.
    pub fn local_index(&self, idx: usize, site: usize) -> usize {
        (idx / self.stride(site)) % self.site_dims[site]
    }

    /// Spin projection m ∈ {+1, 0, −1} of `site` in basis state `idx`.
    pub fn projection(&self, idx: usize, site: usize) -> i32 {
        1 - self.local_index(idx, site) as i32
    }

    /// Total nuclear projection m_I = m_1 + m_2 + m_3 of basis state `idx`.
    pub fn total_nuclear_projection(&self, idx: usize) -> i32 {
        (1..SITES).map(|s| self.projection(idx, s)).sum()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= SITES {
            return Err(Error::SiteOutOfRange { site, sites: SITES });
        }
        Ok(())
    }
}

impl Default for SiteLayout {
    fn default() -> Self {
        Self::standard()
    }
}

/// Spin-1 matrices (S_x, S_y, S_z) in the (+1, 0, −1) basis.
pub fn spin1_operators() -> (Operator, Operator, Operator) {
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let re = |x: f64| C64::new(x, 0.0);
    let im = |x: f64| C64::new(0.0, x);
    let sx = Operator::from_vec(3, alloc::vec![z, re(r), z, re(r), z, re(r), z, re(r), z])
        .expect("3x3");
    let sy = Operator::from_vec(
        3,
        alloc::vec![z, im(-r), z, im(r), z, im(-r), z, im(r), z],
    )
    .expect("3x3");
    let sz = Operator::diag_real(&[1.0, 0.0, -1.0]);
    (sx, sy, sz)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (na, nb) = (a.dim(), b.dim());
    Operator::from_fn(na * nb, |i, j| {
        a.get(i / nb, j / nb) * b.get(i % nb, j % nb)
    })
}

/// `op` acting on `site`, identity elsewhere.
pub fn embed(op: &Operator, site: usize, layout: &SiteLayout) -> Result<Operator> {
    embed_product(&[(site, op)], layout)
}

/// Tensor product of single-site factors (identity on unlisted sites).
///
/// Equivalent to the ordered product of the individual embeddings, which
/// commute because their supports are disjoint.
pub fn embed_product(factors: &[(usize, &Operator)], layout: &SiteLayout) -> Result<Operator> {
    let mut local: [Option<&Operator>; SITES] = [None; SITES];
    for &(site, op) in factors {
        layout.check_site(site)?;
        let want = layout.site_dims[site];
        if op.dim() != want {
            return Err(Error::DimensionMismatch {
                expected: want,
                got: op.dim(),
            });
        }
        if local[site].is_some() {
            return Err(Error::param(
                "factors",
                "each site may appear at most once in embed_product",
            ));
        }
        local[site] = Some(op);
    }

    let n = layout.total_dim();
    let strides: Vec<usize> = (0..SITES).map(|s| layout.stride(s)).collect();
    let mut out = Operator::zeros(n);
    for row in 0..n {
        'col: for col in 0..n {
            let mut v = C64::new(1.0, 0.0);
            for s in 0..SITES {
                let d = layout.site_dims[s];
                let (r, c) = ((row / strides[s]) % d, (col / strides[s]) % d);
                match local[s] {
                    Some(op) => {
                        let x = op.get(r, c);
                        if x.re == 0.0 && x.im == 0.0 {
                            continue 'col;
                        }
                        v *= x;
                    }
                    None => {
                        if r != c {
                            continue 'col;
                        }
                    }
                }
            }
            out.set(row, col, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh_raw;
    use alloc::vec;

    fn i3() -> Operator {
        Operator::identity(3)
    }

    #[test]
    fn sz_is_diagonal() {
        let (_, _, sz) = spin1_operators();
        assert_eq!(sz, Operator::diag_real(&[1.0, 0.0, -1.0]));
    }

    #[test]
    fn su2_commutator() {
        let (sx, sy, sz) = spin1_operators();
        let lhs = Operator::commutator(&sx, &sy);
        let rhs = sz.scale_complex(C64::new(0.0, 1.0));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn casimir_is_two() {
        let (sx, sy, sz) = spin1_operators();
        let c = &(&sx.matmul(&sx) + &sy.matmul(&sy)) + &sz.matmul(&sz);
        assert!(c.max_abs_diff(&Operator::identity(3).scale(2.0)) < 1e-12);
    }

    #[test]
    fn spin_matrices_hermitian() {
        let (sx, sy, sz) = spin1_operators();
        assert!(sx.is_hermitian() && sy.is_hermitian() && sz.is_hermitian());
    }

    #[test]
    fn kron_identity() {
        let k = kron(&i3(), &i3());
        assert_eq!(k.dim(), 9);
        assert_eq!(k, Operator::identity(9));
    }

    #[test]
    fn kron_diag_triples_eigenvalues() {
        let (_, _, sz) = spin1_operators();
        let k = kron(&sz, &i3());
        let diag: Vec<f64> = (0..9).map(|i| k.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0, -1.0, -1.0, -1.0]);
        assert!((0..9).all(|i| (0..9).all(|j| i == j || k.get(i, j).norm() == 0.0)));
    }

    #[test]
    fn embed_identity_is_identity() {
        let layout = SiteLayout::standard();
        for site in 0..SITES {
            assert_eq!(embed(&i3(), site, &layout).unwrap(), Operator::identity(81));
        }
    }

    #[test]
    fn embed_disjoint_sites_commute() {
        let layout = SiteLayout::standard();
        let (sx, sy, _) = spin1_operators();
        let a = embed(&sx, 1, &layout).unwrap();
        let b = embed(&sy, 2, &layout).unwrap();
        assert!(Operator::commutator(&a, &b).max_abs() < 1e-12);
    }

    #[test]
    fn embed_traceless() {
        let (_, _, sz) = spin1_operators();
        let e = embed(&sz, 0, &SiteLayout::standard()).unwrap();
        assert!(e.trace().norm() < 1e-12);
    }

    #[test]
    fn embed_rejects_bad_site() {
        let err = embed(&i3(), 4, &SiteLayout::standard()).unwrap_err();
        assert_eq!(err, Error::SiteOutOfRange { site: 4, sites: 4 });
    }

    #[test]
    fn embed_rejects_wrong_dim() {
        let err = embed(&Operator::identity(2), 1, &SiteLayout::standard()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn embed_matches_kron_chain() {
        let (sx, _, sz) = spin1_operators();
        let layout = SiteLayout::standard();
        let direct = embed_product(&[(0, &sz), (2, &sx)], &layout).unwrap();
        let chain = kron(&kron(&kron(&sz, &i3()), &sx), &i3());
        assert!(direct.max_abs_diff(&chain) < 1e-15);
    }

    #[test]
    fn embed_preserves_spectrum_with_multiplicity_27() {
        let (sx, _, _) = spin1_operators();
        let e = embed(&sx, 3, &SiteLayout::standard()).unwrap();
        let eig = eigh_raw(&e).unwrap();
        for (k, want) in [-1.0, 0.0, 1.0].iter().enumerate() {
            let block = &eig.values[27 * k..27 * (k + 1)];
            assert!(block.iter().all(|v| (v - want).abs() < 1e-12));
        }
    }

    #[test]
    fn projections_follow_basis_order() {
        let layout = SiteLayout::standard();
        assert_eq!(layout.total_dim(), 81);
        assert_eq!(layout.projection(0, 0), 1);
        assert_eq!(layout.projection(80, 0), -1);
        assert_eq!(layout.total_nuclear_projection(0), 3);
        assert_eq!(layout.total_nuclear_projection(26), -3);
    }
}
