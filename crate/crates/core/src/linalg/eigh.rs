//! Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL iterations (the `tql2`
//! scheme of EISPACK/JAMA), with eigenvectors accumulated throughout.
//!
//! Output is deterministic: eigenvalues ascending, ties kept in QL order,
//! and each eigenvector's phase fixed so its first non-negligible component
//! is real and positive.

use alloc::vec;
use alloc::vec::Vec;

use super::{Operator, C64};
use crate::error::{Error, Result};

/// Components below this magnitude are skipped when fixing phases.
const PHASE_EPS: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: Operator,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

pub fn eigh_raw(h: &Operator) -> Result<HermitianEigen> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian {
            defect: h.hermiticity_defect(),
        });
    }
    let n = h.dim();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: Operator::zeros(0),
        });
    }

    let (diag, off, q) = tridiagonalize(h);

    // Rotate the complex off-diagonal into a real one: T = D·T_r·D†.
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n - 1 {
        let c = off[k];
        let r = c.norm();
        e[k] = r;
        phases[k + 1] = if r > 0.0 { phases[k] * (c / r) } else { phases[k] };
    }
    let mut d = diag;
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut z, n)?;

    // vectors = Q · D · Z
    let mut qd = q;
    for i in 0..n {
        for k in 0..n {
            qd[i * n + k] *= phases[k];
        }
    }
    let mut vecs = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let qrow = &qd[i * n..(i + 1) * n];
        let out = &mut vecs[i * n..(i + 1) * n];
        for (k, qk) in qrow.iter().enumerate() {
            if qk.re == 0.0 && qk.im == 0.0 {
                continue;
            }
            let zrow = &z[k * n..(k + 1) * n];
            for (o, zk) in out.iter_mut().zip(zrow) {
                *o += qk * zk;
            }
        }
    }

    // Phase convention.
    for col in 0..n {
        let pivot = (0..n)
            .map(|i| vecs[i * n + col])
            .find(|c| c.norm() > PHASE_EPS);
        if let Some(p) = pivot {
            let rot = p.conj() / p.norm();
            for i in 0..n {
                vecs[i * n + col] *= rot;
            }
        }
    }

    Ok(HermitianEigen {
        values: d,
        vectors: Operator::from_vec(n, vecs)?,
    })
}

/// Returns (real diagonal, complex sub-diagonal T[k+1,k], Q) with A = Q·T·Q†.
fn tridiagonalize(h: &Operator) -> (Vec<f64>, Vec<C64>, Vec<C64>) {
    let n = h.dim();
    let mut a: Vec<C64> = h.as_slice().to_vec();
    let mut q = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        q[i * n + i] = C64::new(1.0, 0.0);
    }
    let mut off = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
    let mut u = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];

    for k in 0..n.saturating_sub(1) {
        let start = k + 1;
        let alpha = a[start * n + k];
        let tail: f64 = (start + 1..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            off[k] = alpha;
            continue;
        }
        let abs_alpha = alpha.norm();
        let xnorm = libm::sqrt(abs_alpha * abs_alpha + tail);
        let phase = if abs_alpha > 0.0 {
            alpha / abs_alpha
        } else {
            C64::new(1.0, 0.0)
        };
        // w = x + phase·|x|·e1, u = w/|w|; P = I − 2uu† maps x to −phase·|x|·e1.
        for i in start..n {
            u[i] = a[i * n + k];
        }
        u[start] += phase * xnorm;
        let wnorm = libm::sqrt(2.0 * xnorm * (xnorm + abs_alpha));
        for ui in u[start..n].iter_mut() {
            *ui /= wnorm;
        }

        // Trailing block B ← P·B·P = B − 2u·q† − 2q·u†, q = Bu − (u†Bu)u.
        for i in start..n {
            let row = &a[i * n + start..i * n + n];
            p[i] = row.iter().zip(&u[start..n]).map(|(x, y)| x * y).sum();
        }
        let kappa: f64 = (start..n).map(|i| (u[i].conj() * p[i]).re).sum();
        for i in start..n {
            p[i] -= u[i] * kappa;
        }
        for i in start..n {
            let ui2 = u[i] * 2.0;
            let pi2 = p[i] * 2.0;
            for j in start..n {
                let upd = ui2 * p[j].conj() + pi2 * u[j].conj();
                a[i * n + j] -= upd;
            }
        }
        let beta = -phase * xnorm;
        off[k] = beta;
        a[start * n + k] = beta;
        a[k * n + start] = beta.conj();
        for i in start + 1..n {
            a[i * n + k] = C64::new(0.0, 0.0);
            a[k * n + i] = C64::new(0.0, 0.0);
        }

        // Q ← Q·P on the trailing columns.
        for i in 0..n {
            let row = &mut q[i * n + start..i * n + n];
            let qu: C64 = row.iter().zip(&u[start..n]).map(|(x, y)| x * y).sum();
            let s = qu * 2.0;
            for (x, y) in row.iter_mut().zip(&u[start..n]) {
                *x -= s * y.conj();
            }
        }
        for ui in u[start..n].iter_mut() {
            *ui = C64::new(0.0, 0.0);
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    (diag, off, q)
}

/// Symmetric tridiagonal QL with implicit shifts. `e[i]` holds T[i+1,i],
/// `e[n-1]` is ignored. `z` (row-major, n×n) is multiplied by the rotations;
/// on exit eigenvalues in `d` are sorted ascending with matching columns.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let max_iter = 30 * n.max(1);

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence { iterations: iter });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk = &mut z[k * n..(k + 1) * n];
                        let hh = zk[i + 1];
                        zk[i + 1] = s * zk[i] + c * hh;
                        zk[i] = c * zk[i] - s * hh;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort keeps equal eigenvalues in their QL order.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, dj) in d.iter().enumerate().skip(i + 1) {
            if *dj < p {
                k = j;
                p = *dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                z.swap(row * n + i, row * n + k);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residuals(h: &Operator, eig: &HermitianEigen) -> (f64, f64) {
        let n = h.dim();
        let v = &eig.vectors;
        let lam = Operator::diag_real(&eig.values);
        let recon = v.matmul(&lam).matmul(&v.adjoint());
        let ortho = v.adjoint().matmul(v);
        (
            recon.max_abs_diff(h) / h.max_abs().max(1e-300),
            ortho.max_abs_diff(&Operator::identity(n)),
        )
    }

    #[test]
    fn diagonal_input_gives_permutation_vectors() {
        let h = Operator::diag_real(&[3.0, 1.0, 2.0]);
        let eig = eigh_raw(&h).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
        let expected = [1usize, 2, 0];
        for (col, &row) in expected.iter().enumerate() {
            for i in 0..3 {
                let want = if i == row { 1.0 } else { 0.0 };
                assert!((eig.vectors.get(i, col) - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn pauli_x_block() {
        let mut h = Operator::zeros(4);
        h.set(1, 2, C64::new(1.0, 0.0));
        h.set(2, 1, C64::new(1.0, 0.0));
        let eig = eigh_raw(&h).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[3] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let n = 7;
        let h = Operator::from_fn(n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let re = libm::sin(a * 1.3 + b * 0.7) + if i == j { i as f64 } else { 0.0 };
            let im = if i == j {
                0.0
            } else {
                let s = libm::cos(a * 0.4 - b * 2.1);
                if i < j {
                    s
                } else {
                    -s
                }
            };
            C64::new(re, im)
        });
        let eig = eigh_raw(&h).unwrap();
        let (rec, orth) = residuals(&h, &eig);
        assert!(rec < 1e-12, "reconstruction {rec}");
        assert!(orth < 1e-12, "orthonormality {orth}");
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = Operator::zeros(2);
        h.set(0, 1, C64::new(1.0, 0.0));
        assert!(matches!(eigh_raw(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn phase_convention_first_component_real_positive() {
        let h = Operator::from_fn(3, |i, j| {
            if i == j {
                C64::new(i as f64, 0.0)
            } else if i < j {
                C64::new(0.3, 0.2)
            } else {
                C64::new(0.3, -0.2)
            }
        });
        let eig = eigh_raw(&h).unwrap();
        for k in 0..3 {
            let c = eig.vectors.column(k);
            let p = c.iter().find(|x| x.norm() > PHASE_EPS).unwrap();
            assert!(p.im.abs() < 1e-15 && p.re > 0.0);
        }
    }
}
