use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Uniform, strictly increasing frequency grid in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !start.is_finite() || !(step > 0.0) || !step.is_finite() {
            return Err(Error::param("grid", "start must be finite and step > 0"));
        }
        if len == 0 {
            return Err(Error::param("grid", "grid must have at least one point"));
        }
        Ok(FrequencyGrid { start, step, len })
    }

    /// Points `start, start + step, …` up to and including `stop` (within
    /// rounding).
    pub fn from_range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(stop >= start) || !stop.is_finite() {
            return Err(Error::param("grid", "stop must be finite and >= start"));
        }
        if !(step > 0.0) {
            return Err(Error::param("grid", "step must be > 0"));
        }
        let len = libm::floor((stop - start) / step + 1e-9) as usize + 1;
        Self::new(start, step, len)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn stop(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineShape {
    #[default]
    Lorentzian,
    Gaussian,
}

impl LineShape {
    /// Unit-height profile centred on `centre` with full width `fwhm`.
    pub fn eval(self, x: f64, centre: f64, fwhm: f64) -> f64 {
        let u = (x - centre) / fwhm;
        match self {
            LineShape::Lorentzian => 1.0 / (1.0 + 4.0 * u * u),
            LineShape::Gaussian => libm::exp(-4.0 * core::f64::consts::LN_2 * u * u),
        }
    }
}

/// Sampled line spectrum. Dips are stored as positive intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub intensity: Vec<f64>,
    pub fwhm: f64,
    pub shape: LineShape,
}

impl Spectrum {
    /// Sum of unit-height profiles scaled by each `(centre, height)`.
    pub fn from_lines(
        grid: FrequencyGrid,
        lines: &[(f64, f64)],
        fwhm: f64,
        shape: LineShape,
    ) -> Result<Self> {
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(Error::param("fwhm", "linewidth must be finite and > 0"));
        }
        let intensity = (0..grid.len())
            .map(|i| {
                let x = grid.at(i);
                lines
                    .iter()
                    .map(|&(c, h)| h * shape.eval(x, c, fwhm))
                    .sum()
            })
            .collect();
        Ok(Spectrum {
            grid,
            intensity,
            fwhm,
            shape,
        })
    }

    pub fn freqs(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn max(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }

    /// Trapezoidal integral over grid points with frequency in [lo, hi].
    pub fn integrated(&self, lo: f64, hi: f64) -> f64 {
        let pts = self.band(lo, hi);
        pts.windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum()
    }

    /// Intensity-weighted mean frequency over [lo, hi]; `None` for an
    /// empty or zero-intensity band.
    pub fn centroid(&self, lo: f64, hi: f64) -> Option<f64> {
        let pts = self.band(lo, hi);
        let total: f64 = pts.iter().map(|p| p.1).sum();
        if pts.is_empty() || total <= 0.0 {
            return None;
        }
        Some(pts.iter().map(|p| p.0 * p.1).sum::<f64>() / total)
    }

    /// Grid indices of strict local maxima.
    pub fn local_maxima(&self) -> Vec<usize> {
        let y = &self.intensity;
        (1..y.len().saturating_sub(1))
            .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
            .collect()
    }

    fn band(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        (0..self.grid.len())
            .map(|i| (self.grid.at(i), self.intensity[i]))
            .filter(|(f, _)| *f >= lo && *f <= hi)
            .collect()
    }
}
