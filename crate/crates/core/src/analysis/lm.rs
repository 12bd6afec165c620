//! Levenberg–Marquardt least squares with Marquardt diagonal scaling,
//! box projection and a fixed-parameter mask.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::solve_spd;

/// A residual vector r(p) with an analytic Jacobian ∂r_i/∂p_j.
pub trait LeastSquares {
    fn residual_count(&self) -> usize;
    fn param_count(&self) -> usize;
    fn residuals(&self, p: &[f64], r: &mut [f64]);
    /// Row-major, `residual_count × param_count`.
    fn jacobian(&self, p: &[f64], jac: &mut [f64]);
    /// Maps a trial point back into the feasible set.
    fn project(&self, _p: &mut [f64]) {}
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the cost by less than this
    /// fraction.
    pub rel_tolerance: f64,
    pub initial_damping: f64,
    /// `true` marks a parameter held at its initial value. Empty = all free.
    pub fixed: Vec<bool>,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 500,
            rel_tolerance: 1e-10,
            initial_damping: 1e-3,
            fixed: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// ½·Σ r².
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after each accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

const MAX_DAMPING: f64 = 1e16;

fn half_sum_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

pub fn levenberg_marquardt<P: LeastSquares + ?Sized>(
    problem: &P,
    p0: &[f64],
    opts: &LmOptions,
) -> Result<LmReport> {
    let n = problem.param_count();
    let m = problem.residual_count();
    if p0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p0.len(),
        });
    }
    if !opts.fixed.is_empty() && opts.fixed.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: opts.fixed.len(),
        });
    }
    let free: Vec<usize> = (0..n)
        .filter(|&j| !opts.fixed.get(j).copied().unwrap_or(false))
        .collect();
    let k = free.len();

    let mut p = p0.to_vec();
    problem.project(&mut p);
    let mut r = vec![0.0; m];
    problem.residuals(&p, &mut r);
    let mut cost = half_sum_sq(&r);
    if !cost.is_finite() {
        return Err(Error::FitFailed {
            reason: "non-finite residuals at the initial point".into(),
            iterations: 0,
            last: p,
        });
    }
    let mut history = vec![cost];
    if k == 0 || cost == 0.0 {
        return Ok(LmReport {
            params: p,
            cost,
            iterations: 0,
            converged: true,
            cost_history: history,
        });
    }

    let mut jac = vec![0.0; m * n];
    let mut trial = vec![0.0; n];
    let mut r_trial = vec![0.0; m];
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        iterations += 1;
        problem.jacobian(&p, &mut jac);
        let mut a = vec![0.0; k * k];
        let mut g = vec![0.0; k];
        for row in 0..m {
            let jr = &jac[row * n..(row + 1) * n];
            for (ai, &pi) in free.iter().enumerate() {
                let x = jr[pi];
                if x == 0.0 {
                    continue;
                }
                g[ai] += x * r[row];
                for (bi, &pj) in free.iter().enumerate().skip(ai) {
                    a[ai * k + bi] += x * jr[pj];
                }
            }
        }
        for ai in 0..k {
            for bi in 0..ai {
                a[ai * k + bi] = a[bi * k + ai];
            }
        }
        if a.iter().chain(&g).any(|x| !x.is_finite()) {
            return Err(Error::FitFailed {
                reason: "non-finite Jacobian".into(),
                iterations,
                last: p,
            });
        }
        let diag_max = (0..k).map(|i| a[i * k + i]).fold(0.0, f64::max);
        let floor = (diag_max * 1e-12).max(f64::MIN_POSITIVE);

        let mut accepted = false;
        while lambda <= MAX_DAMPING {
            let mut damped = a.clone();
            for i in 0..k {
                damped[i * k + i] += lambda * a[i * k + i].max(floor);
            }
            let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
            let Some(step) = solve_spd(&damped, &neg_g) else {
                lambda *= 4.0;
                continue;
            };
            trial.copy_from_slice(&p);
            for (ai, &pi) in free.iter().enumerate() {
                trial[pi] += step[ai];
            }
            problem.project(&mut trial);
            problem.residuals(&trial, &mut r_trial);
            let c = half_sum_sq(&r_trial);
            if c.is_finite() && c < cost {
                let rel = (cost - c) / cost;
                p.copy_from_slice(&trial);
                core::mem::swap(&mut r, &mut r_trial);
                cost = c;
                history.push(cost);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if rel < opts.rel_tolerance || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No damping level lowers the cost: p is a local minimum to
            // working precision, unless the normal equations never solved.
            let grad = g.iter().map(|x| x * x).sum::<f64>();
            if grad.is_finite() {
                converged = true;
                break;
            }
            return Err(Error::FitFailed {
                reason: "singular Jacobian; damping did not recover".into(),
                iterations,
                last: p,
            });
        }
        if converged {
            break;
        }
    }
    Ok(LmReport {
        params: p,
        cost,
        iterations,
        converged,
        cost_history: history,
    })
}

#[cfg(test)]
pub(crate) mod fd {
    use super::LeastSquares;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Central-difference Jacobian, step 1e-6 relative.
    pub fn jacobian<P: LeastSquares + ?Sized>(problem: &P, p: &[f64]) -> Vec<f64> {
        let (m, n) = (problem.residual_count(), problem.param_count());
        let mut out = vec![0.0; m * n];
        let (mut rp, mut rm) = (vec![0.0; m], vec![0.0; m]);
        for j in 0..n {
            let h = 1e-6 * p[j].abs().max(1e-3);
            let mut hi = p.to_vec();
            let mut lo = p.to_vec();
            hi[j] += h;
            lo[j] -= h;
            problem.residuals(&hi, &mut rp);
            problem.residuals(&lo, &mut rm);
            for i in 0..m {
                out[i * n + j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// r_i = a·exp(−b·x_i) − y_i.
    struct ExpDecay {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquares for ExpDecay {
        fn residual_count(&self) -> usize {
            self.x.len()
        }
        fn param_count(&self) -> usize {
            2
        }
        fn residuals(&self, p: &[f64], r: &mut [f64]) {
            for i in 0..self.x.len() {
                r[i] = p[0] * libm::exp(-p[1] * self.x[i]) - self.y[i];
            }
        }
        fn jacobian(&self, p: &[f64], j: &mut [f64]) {
            for i in 0..self.x.len() {
                let e = libm::exp(-p[1] * self.x[i]);
                j[2 * i] = e;
                j[2 * i + 1] = -p[0] * self.x[i] * e;
            }
        }
    }

    fn problem() -> ExpDecay {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y = x.iter().map(|t| 2.5 * libm::exp(-1.3 * t)).collect();
        ExpDecay { x, y }
    }

    #[test]
    fn recovers_exponential() {
        let rep = levenberg_marquardt(&problem(), &[1.0, 0.5], &LmOptions::default()).unwrap();
        assert!(rep.converged);
        assert!((rep.params[0] - 2.5).abs() < 1e-8);
        assert!((rep.params[1] - 1.3).abs() < 1e-8);
    }

    #[test]
    fn cost_never_increases() {
        let rep = levenberg_marquardt(&problem(), &[0.2, 3.0], &LmOptions::default()).unwrap();
        assert!(rep.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn fixed_parameter_is_held() {
        let opts = LmOptions {
            fixed: vec![false, true],
            ..LmOptions::default()
        };
        let rep = levenberg_marquardt(&problem(), &[1.0, 1.3], &opts).unwrap();
        assert_eq!(rep.params[1], 1.3);
        assert!((rep.params[0] - 2.5).abs() < 1e-9);
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let pb = problem();
        let p = [1.7, 0.9];
        let mut j = vec![0.0; 60];
        pb.jacobian(&p, &mut j);
        let f = fd::jacobian(&pb, &p);
        for (a, b) in j.iter().zip(&f) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn nan_start_fails_with_last_iterate() {
        let err = levenberg_marquardt(&problem(), &[f64::NAN, 1.0], &LmOptions::default()).unwrap_err();
        assert!(matches!(err, Error::FitFailed { .. }));
    }
}
