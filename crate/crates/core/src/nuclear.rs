//! Distributions over the total projection m_I = m_1 + m_2 + m_3 of the three
//! nearest nitrogen nuclei. Index `k` of every 7-array is m_I = k − 3.

use alloc::format;

use crate::error::{Error, Result};

/// m_I values in array order.
pub const M_I_VALUES: [i32; 7] = [-3, -2, -1, 0, 1, 2, 3];

/// Number of product states of three spin-1 nuclei with each m_I.
pub const MULTIPLICITY: [u32; 7] = [1, 3, 6, 7, 6, 3, 1];

#[inline]
pub fn index_of(m_i: i32) -> Option<usize> {
    if (-3..=3).contains(&m_i) {
        Some((m_i + 3) as usize)
    } else {
        None
    }
}

/// Normalized, nonnegative populations ρ over m_I = −3..+3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuclearDistribution {
    rho: [f64; 7],
}

impl NuclearDistribution {
    pub fn new(rho: [f64; 7]) -> Result<Self> {
        if let Some(bad) = rho.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entries must be finite and >= 0, found {bad}"
            )));
        }
        let total: f64 = rho.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "entries must sum to 1, sum is {total}"
            )));
        }
        Ok(NuclearDistribution { rho })
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_weights(weights: [f64; 7]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and >= 0".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        let mut rho = weights;
        for r in rho.iter_mut() {
            *r /= total;
        }
        Ok(NuclearDistribution { rho })
    }

    /// Infinite-temperature distribution (1, 3, 6, 7, 6, 3, 1)/27.
    pub fn unpolarized() -> Self {
        let mut rho = [0.0; 7];
        for (r, g) in rho.iter_mut().zip(MULTIPLICITY) {
            *r = g as f64 / 27.0;
        }
        NuclearDistribution { rho }
    }

    /// All weight on a single m_I.
    pub fn delta(m_i: i32) -> Result<Self> {
        let k = index_of(m_i)
            .ok_or_else(|| Error::InvalidDistribution(format!("m_I = {m_i} out of range")))?;
        let mut rho = [0.0; 7];
        rho[k] = 1.0;
        Ok(NuclearDistribution { rho })
    }

    pub fn as_array(&self) -> &[f64; 7] {
        &self.rho
    }

    pub fn get(&self, m_i: i32) -> f64 {
        index_of(m_i).map_or(0.0, |k| self.rho[k])
    }

    /// Σ m_I·ρ / 3.
    pub fn polarization(&self) -> f64 {
        self.rho
            .iter()
            .zip(M_I_VALUES)
            .map(|(r, m)| r * m as f64)
            .sum::<f64>()
            / 3.0
    }

    /// Σ |ρ − other|.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities_by_enumeration() {
        let mut counts = [0u32; 7];
        for a in -1..=1 {
            for b in -1..=1 {
                for c in -1..=1 {
                    counts[index_of(a + b + c).unwrap()] += 1;
                }
            }
        }
        assert_eq!(counts, MULTIPLICITY);
    }

    #[test]
    fn validation() {
        assert!(NuclearDistribution::new([0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]).is_ok());
        assert!(NuclearDistribution::new([0.5, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(NuclearDistribution::new([1.5, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(NuclearDistribution::from_weights([0.0; 7]).is_err());
        assert!(NuclearDistribution::delta(4).is_err());
    }

    #[test]
    fn unpolarized_has_zero_polarization() {
        assert!(NuclearDistribution::unpolarized().polarization().abs() < 1e-15);
        assert_eq!(NuclearDistribution::delta(3).unwrap().polarization(), 1.0);
    }
}
