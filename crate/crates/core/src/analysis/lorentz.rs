use alloc::vec;
use alloc::vec::Vec;

use super::lm::{levenberg_marquardt, LeastSquares, LmOptions};
use crate::error::{Error, Result};
use crate::spectra::Spectrum;

#[derive(Debug, Clone, PartialEq)]
pub enum Widths {
    Shared(f64),
    PerPeak(Vec<f64>),
}

/// Sum of peak-normalized Lorentzians on a constant baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet {
    /// MHz, ascending.
    pub centres: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub widths: Widths,
    pub baseline: f64,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.centres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centres.is_empty()
    }

    pub fn fwhm(&self, k: usize) -> f64 {
        match &self.widths {
            Widths::Shared(w) => *w,
            Widths::PerPeak(w) => w[k],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.centres.len();
        if n == 0 {
            return Err(Error::param("peaks", "need at least one peak"));
        }
        if self.amplitudes.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.amplitudes.len(),
            });
        }
        if let Widths::PerPeak(w) = &self.widths {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: w.len(),
                });
            }
        }
        if self.amplitudes.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::param("amplitudes", "must be >= 0"));
        }
        if (0..n).any(|k| !(self.fwhm(k) > 0.0)) {
            return Err(Error::param("fwhm", "must be > 0"));
        }
        if self.centres.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("centres", "must be strictly ascending"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.baseline
            + (0..self.len())
                .map(|k| {
                    let u = 2.0 * (x - self.centres[k]) / self.fwhm(k);
                    self.amplitudes[k] / (1.0 + u * u)
                })
                .sum::<f64>()
    }
}

/// Which groups of parameters stay at their initial values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PeakConstraints {
    pub fix_centres: bool,
    pub fix_widths: bool,
    pub fix_baseline: bool,
}

/// Least-squares problem for a [`PeakSet`] against sampled data. The flat
/// parameter vector is `[centres…, amplitudes…, widths…, baseline]`.
#[derive(Debug, Clone)]
pub struct LorentzianModel {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub peaks: usize,
    pub shared_width: bool,
}

impl LorentzianModel {
    fn width_count(&self) -> usize {
        if self.shared_width {
            1
        } else {
            self.peaks
        }
    }

    pub fn pack(&self, s: &PeakSet) -> Vec<f64> {
        let mut p = s.centres.clone();
        p.extend_from_slice(&s.amplitudes);
        match &s.widths {
            Widths::Shared(w) => p.push(*w),
            Widths::PerPeak(w) => p.extend_from_slice(w),
        }
        p.push(s.baseline);
        p
    }

    pub fn unpack(&self, p: &[f64]) -> PeakSet {
        let n = self.peaks;
        let widths = if self.shared_width {
            Widths::Shared(p[2 * n])
        } else {
            Widths::PerPeak(p[2 * n..3 * n].to_vec())
        };
        PeakSet {
            centres: p[..n].to_vec(),
            amplitudes: p[n..2 * n].to_vec(),
            widths,
            baseline: p[2 * n + self.width_count()],
        }
    }

    fn width_index(&self, k: usize) -> usize {
        2 * self.peaks + if self.shared_width { 0 } else { k }
    }
}

impl LeastSquares for LorentzianModel {
    fn residual_count(&self) -> usize {
        self.x.len()
    }

    fn param_count(&self) -> usize {
        2 * self.peaks + self.width_count() + 1
    }

    fn residuals(&self, p: &[f64], r: &mut [f64]) {
        let n = self.peaks;
        let base = p[2 * n + self.width_count()];
        for (i, (&x, &y)) in self.x.iter().zip(&self.y).enumerate() {
            let mut model = base;
            for k in 0..n {
                let u = 2.0 * (x - p[k]) / p[self.width_index(k)];
                model += p[n + k] / (1.0 + u * u);
            }
            r[i] = model - y;
        }
    }

    fn jacobian(&self, p: &[f64], jac: &mut [f64]) {
        let n = self.peaks;
        let np = self.param_count();
        jac.fill(0.0);
        for (i, &x) in self.x.iter().enumerate() {
            let row = &mut jac[i * np..(i + 1) * np];
            for k in 0..n {
                let wi = self.width_index(k);
                let w = p[wi];
                let u = 2.0 * (x - p[k]) / w;
                let l = 1.0 / (1.0 + u * u);
                let a = p[n + k];
                row[k] = a * l * l * 4.0 * u / w;
                row[n + k] = l;
                row[wi] += a * l * l * 2.0 * u * u / w;
            }
            row[np - 1] = 1.0;
        }
    }

    fn project(&self, p: &mut [f64]) {
        let n = self.peaks;
        for a in &mut p[n..2 * n] {
            *a = a.max(0.0);
        }
        for k in 0..self.width_count() {
            let w = &mut p[2 * n + k];
            *w = w.max(1e-9);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakFit {
    pub peaks: PeakSet,
    pub converged: bool,
    pub iterations: usize,
    /// sqrt(mean squared residual).
    pub rms: f64,
    pub residuals: Vec<f64>,
    pub cost_history: Vec<f64>,
}

/// Least-squares fit of `init` to `spectrum`.
pub fn fit_lorentzians(spectrum: &Spectrum, init: &PeakSet, constraints: PeakConstraints) -> Result<PeakFit> {
    fit_lorentzians_xy(&spectrum.freqs(), &spectrum.intensity, init, constraints)
}

pub fn fit_lorentzians_xy(x: &[f64], y: &[f64], init: &PeakSet, constraints: PeakConstraints) -> Result<PeakFit> {
    init.validate()?;
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InsufficientData("spectrum is empty or ragged".into()));
    }
    let model = LorentzianModel {
        x: x.to_vec(),
        y: y.to_vec(),
        peaks: init.len(),
        shared_width: matches!(init.widths, Widths::Shared(_)),
    };
    let n = init.len();
    let np = model.param_count();
    let mut fixed = vec![false; np];
    if constraints.fix_centres {
        fixed[..n].fill(true);
    }
    if constraints.fix_widths {
        fixed[2 * n..np - 1].fill(true);
    }
    fixed[np - 1] = constraints.fix_baseline;
    let opts = LmOptions {
        fixed,
        ..LmOptions::default()
    };
    let rep = levenberg_marquardt(&model, &model.pack(init), &opts)?;
    let mut residuals = vec![0.0; x.len()];
    model.residuals(&rep.params, &mut residuals);
    let rms = libm::sqrt(2.0 * rep.cost / x.len() as f64);
    Ok(PeakFit {
        peaks: model.unpack(&rep.params),
        converged: rep.converged,
        iterations: rep.iterations,
        rms,
        residuals,
        cost_history: rep.cost_history,
    })
}

/// Initial peak set at the given centres: amplitudes read from the data at
/// the nearest sample, shared width `fwhm`, zero baseline.
pub fn seed_peaks(x: &[f64], y: &[f64], centres: &[f64], fwhm: f64) -> PeakSet {
    let amplitudes = centres
        .iter()
        .map(|&c| {
            let nearest = x
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - c).abs().total_cmp(&(b.1 - c).abs()))
                .map_or(0, |(i, _)| i);
            y.get(nearest).copied().unwrap_or(0.0).max(0.0)
        })
        .collect();
    PeakSet {
        centres: centres.to_vec(),
        amplitudes,
        widths: Widths::Shared(fwhm),
        baseline: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::super::lm::fd;
    use super::*;

    fn truth() -> PeakSet {
        PeakSet {
            centres: (0..7).map(|k| 2750.0 + 47.0 * k as f64).collect(),
            amplitudes: vec![0.05, 0.1, 0.2, 0.3, 0.2, 0.1, 0.05],
            widths: Widths::Shared(12.0),
            baseline: 0.0,
        }
    }

    fn sample(s: &PeakSet) -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..1201).map(|i| 2650.0 + 0.5 * i as f64).collect();
        let y = x.iter().map(|&f| s.eval(f)).collect();
        (x, y)
    }

    #[test]
    fn noise_free_roundtrip() {
        let t = truth();
        let (x, y) = sample(&t);
        let mut init = seed_peaks(&x, &y, &t.centres.iter().map(|c| c + 1.5).collect::<Vec<_>>(), 10.0);
        init.baseline = 0.01;
        let fit = fit_lorentzians_xy(&x, &y, &init, PeakConstraints::default()).unwrap();
        assert!(fit.converged);
        for (a, b) in fit.peaks.amplitudes.iter().zip(&t.amplitudes) {
            assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn single_peak_is_exact() {
        let s = PeakSet {
            centres: vec![100.0],
            amplitudes: vec![1.0],
            widths: Widths::Shared(3.0),
            baseline: 0.0,
        };
        let x: Vec<f64> = (0..401).map(|i| 80.0 + 0.1 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&f| s.eval(f)).collect();
        let init = PeakSet {
            centres: vec![100.7],
            amplitudes: vec![0.8],
            widths: Widths::Shared(2.0),
            baseline: 0.0,
        };
        let fit = fit_lorentzians_xy(&x, &y, &init, PeakConstraints::default()).unwrap();
        assert!((fit.peaks.centres[0] - 100.0).abs() < 1e-8);
        assert!((fit.peaks.fwhm(0) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn fixed_centres_match_free_fit_on_exact_data() {
        let t = truth();
        let (x, y) = sample(&t);
        let init = seed_peaks(&x, &y, &t.centres, 10.0);
        let fixed = PeakConstraints {
            fix_centres: true,
            ..PeakConstraints::default()
        };
        let a = fit_lorentzians_xy(&x, &y, &init, fixed).unwrap();
        let b = fit_lorentzians_xy(&x, &y, &init, PeakConstraints::default()).unwrap();
        assert_eq!(a.peaks.centres, t.centres);
        for (u, v) in a.peaks.amplitudes.iter().zip(&b.peaks.amplitudes) {
            assert!((u - v).abs() < 1e-6);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for shared in [true, false] {
            let mut t = truth();
            if !shared {
                t.widths = Widths::PerPeak(vec![9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0]);
            }
            t.baseline = 0.02;
            let (x, y) = sample(&t);
            let model = LorentzianModel {
                x,
                y,
                peaks: 7,
                shared_width: shared,
            };
            let mut p = model.pack(&t);
            p[0] += 3.0;
            p[8] *= 1.3;
            let np = model.param_count();
            let mut j = vec![0.0; model.x.len() * np];
            model.jacobian(&p, &mut j);
            let f = fd::jacobian(&model, &p);
            let scale = j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in j.iter().zip(&f) {
                assert!((a - b).abs() <= 1e-4 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn rejects_bad_initial_set() {
        let mut s = truth();
        s.centres.swap(0, 1);
        let (x, y) = sample(&truth());
        assert!(fit_lorentzians_xy(&x, &y, &s, PeakConstraints::default()).is_err());
    }
}
