use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::lm::{levenberg_marquardt, LeastSquares, LmOptions};
use crate::error::{Error, Result};

/// `a·e^{−γt}·cos(2πft + φ) + Σ_k c_k·e^{−κ_k t} + b`, with decay rates
/// γ = 1/T₂* and κ_k = 1/τ_k so that an undamped trace sits at γ = 0
/// instead of T₂* = ∞. Parameters: `[a, γ, f, φ, b, c_1, κ_1, …]`.
#[derive(Debug, Clone)]
pub struct DampedCosineModel {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub decay_terms: usize,
}

impl DampedCosineModel {
    pub fn eval(&self, p: &[f64], t: f64) -> f64 {
        let mut v = p[0] * libm::exp(-p[1] * t) * libm::cos(2.0 * PI * p[2] * t + p[3]) + p[4];
        for k in 0..self.decay_terms {
            v += p[5 + 2 * k] * libm::exp(-p[6 + 2 * k] * t);
        }
        v
    }
}

impl LeastSquares for DampedCosineModel {
    fn residual_count(&self) -> usize {
        self.t.len()
    }

    fn param_count(&self) -> usize {
        5 + 2 * self.decay_terms
    }

    fn residuals(&self, p: &[f64], r: &mut [f64]) {
        for (i, (&t, &y)) in self.t.iter().zip(&self.y).enumerate() {
            r[i] = self.eval(p, t) - y;
        }
    }

    fn jacobian(&self, p: &[f64], jac: &mut [f64]) {
        let np = self.param_count();
        for (i, &t) in self.t.iter().enumerate() {
            let row = &mut jac[i * np..(i + 1) * np];
            let e = libm::exp(-p[1] * t);
            let th = 2.0 * PI * p[2] * t + p[3];
            let (s, c) = (libm::sin(th), libm::cos(th));
            row[0] = e * c;
            row[1] = -t * p[0] * e * c;
            row[2] = -p[0] * e * s * 2.0 * PI * t;
            row[3] = -p[0] * e * s;
            row[4] = 1.0;
            for k in 0..self.decay_terms {
                let d = libm::exp(-p[6 + 2 * k] * t);
                row[5 + 2 * k] = d;
                row[6 + 2 * k] = -t * p[5 + 2 * k] * d;
            }
        }
    }

    fn project(&self, p: &mut [f64]) {
        p[1] = p[1].max(0.0);
        p[2] = p[2].abs();
        for k in 0..self.decay_terms {
            p[6 + 2 * k] = p[6 + 2 * k].max(0.0);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayTerm {
    pub amplitude: f64,
    /// µs; infinite for a constant offset.
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiInit {
    pub f_rabi: f64,
    pub t2_star: f64,
    pub amp: f64,
    pub phase: f64,
    pub baseline: f64,
    pub decays: Vec<DecayTerm>,
}

impl RabiInit {
    /// Frequency from the periodogram peak, amplitude and phase from the
    /// first sample, T₂* and decay times from the trace length.
    pub fn guess(t: &[f64], y: &[f64], decay_terms: usize) -> Result<Self> {
        let f = estimate_frequency(t, y)?;
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let span = t[t.len() - 1] - t[0];
        let amp = y[0] - mean;
        Ok(RabiInit {
            f_rabi: f,
            t2_star: 10.0 * span,
            amp: if amp == 0.0 { 0.5 } else { amp },
            phase: 0.0,
            baseline: mean,
            decays: vec![
                DecayTerm {
                    amplitude: 0.0,
                    tau: span,
                };
                decay_terms
            ],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiFitOptions {
    /// A fitted T₂* beyond this multiple of the trace span is reported as
    /// unresolved.
    pub t2_bound_factor: f64,
}

impl Default for RabiFitOptions {
    fn default() -> Self {
        RabiFitOptions {
            t2_bound_factor: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiFit {
    /// MHz.
    pub f_rabi: f64,
    /// µs; infinite when the fitted decay rate is exactly zero.
    pub t2_star: f64,
    /// T₂* exceeds `t2_bound_factor × span`: the trace does not resolve
    /// the decay.
    pub t2_at_bound: bool,
    pub amp: f64,
    pub phase: f64,
    pub baseline: f64,
    pub decays: Vec<DecayTerm>,
    pub rms: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// Minimum number of samples for [`fit_damped_cosine`].
pub const MIN_RABI_SAMPLES: usize = 8;

pub fn fit_damped_cosine(t: &[f64], y: &[f64], init: &RabiInit, opts: &RabiFitOptions) -> Result<RabiFit> {
    if t.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: y.len(),
        });
    }
    if t.len() < MIN_RABI_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples, need at least {MIN_RABI_SAMPLES}",
            t.len()
        )));
    }
    if !(init.f_rabi > 0.0) || !(init.t2_star > 0.0) {
        return Err(Error::param("init", "f_rabi and t2_star must be > 0"));
    }
    let span = t[t.len() - 1] - t[0];
    if span * init.f_rabi < 1.0 {
        return Err(Error::InsufficientData(format!(
            "trace spans {:.3} periods of the initial frequency, need at least 1",
            span * init.f_rabi
        )));
    }
    let model = DampedCosineModel {
        t: t.to_vec(),
        y: y.to_vec(),
        decay_terms: init.decays.len(),
    };
    let mut p0 = vec![init.amp, 1.0 / init.t2_star, init.f_rabi, init.phase, init.baseline];
    for d in &init.decays {
        p0.push(d.amplitude);
        p0.push(1.0 / d.tau);
    }
    let rep = levenberg_marquardt(&model, &p0, &LmOptions::default())?;
    let p = &rep.params;
    let mut residuals = vec![0.0; t.len()];
    model.residuals(p, &mut residuals);
    let t2_star = 1.0 / p[1];
    let decays = (0..model.decay_terms)
        .map(|k| DecayTerm {
            amplitude: p[5 + 2 * k],
            tau: 1.0 / p[6 + 2 * k],
        })
        .collect();
    Ok(RabiFit {
        f_rabi: p[2],
        t2_star,
        t2_at_bound: t2_star > opts.t2_bound_factor * span,
        amp: p[0],
        phase: p[3],
        baseline: p[4],
        decays,
        rms: libm::sqrt(2.0 * rep.cost / t.len() as f64),
        converged: rep.converged,
        iterations: rep.iterations,
        residuals,
    })
}

/// Dominant oscillation frequency (MHz for µs input) from the peak of the
/// mean-removed periodogram, refined by golden-section search.
pub fn estimate_frequency(t: &[f64], y: &[f64]) -> Result<f64> {
    if t.len() != y.len() || t.len() < 4 {
        return Err(Error::InsufficientData("need at least 4 samples".into()));
    }
    let span = t[t.len() - 1] - t[0];
    let min_dt = t
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !(span > 0.0) || !min_dt.is_finite() {
        return Err(Error::InsufficientData("samples span no time".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (&ti, &yi) in t.iter().zip(y) {
            let th = 2.0 * PI * f * ti;
            re += (yi - mean) * libm::cos(th);
            im += (yi - mean) * libm::sin(th);
        }
        re * re + im * im
    };
    let (f_lo, f_hi) = (0.5 / span, 0.5 / min_dt);
    let df = 0.1 / span;
    let steps = libm::ceil((f_hi - f_lo) / df) as usize;
    let mut best = (f_lo, -1.0);
    for i in 0..=steps {
        let f = f_lo + i as f64 * df;
        let pw = power(f);
        if pw > best.1 {
            best = (f, pw);
        }
    }
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let (mut a, mut b) = ((best.0 - df).max(0.0), best.0 + df);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut pc, mut pd) = (power(c), power(d));
    while b - a > 1e-9 * best.0.max(1e-12) {
        if pc >= pd {
            b = d;
            d = c;
            pd = pc;
            c = b - inv_phi * (b - a);
            pc = power(c);
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + inv_phi * (b - a);
            pd = power(d);
        }
    }
    Ok(0.5 * (a + b))
}
