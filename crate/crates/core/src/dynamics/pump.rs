use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, default_params, Manifold, SpinSystemParams};
use crate::nuclear::{NuclearDistribution, M_I_VALUES};
use crate::spectra::{eigh, EigenSystem, Ms};

/// Hybridization of |0, m_I⟩ with |−1, m_I + 1⟩ in the eigenstates of `es`:
/// `max_k 4·w₀(k)·w₋₁(k)`, where w are the weights of eigenstate k on the two
/// sectors. For an isolated pair with bare gap Δ and off-diagonal element c
/// this is A²/(A² + Δ²) with A = 2c: 1 on resonance, 0 without transverse
/// hyperfine coupling.
pub fn flip_probability_in(es: &EigenSystem, m_i: i32) -> Result<f64> {
    if !(-3..=3).contains(&m_i) {
        return Err(Error::param("m_I", "must lie in -3..=3"));
    }
    if m_i == 3 {
        return Ok(0.0);
    }
    let p = (0..es.dim())
        .map(|k| 4.0 * es.sector_weight(k, Ms::Zero, m_i) * es.sector_weight(k, Ms::Minus, m_i + 1))
        .fold(0.0, f64::max);
    Ok(p.clamp(0.0, 1.0))
}

/// Flip probability for one m_I at the field `p.b0`.
pub fn flip_probability(p: &SpinSystemParams, m_i: i32) -> Result<f64> {
    let es = eigh(&build_hamiltonian(p)?)?;
    flip_probability_in(&es, m_i)
}

/// All seven flip probabilities from a single diagonalization; index m_I + 3.
pub fn flip_probabilities(p: &SpinSystemParams) -> Result<[f64; 7]> {
    let es = eigh(&build_hamiltonian(p)?)?;
    let mut out = [0.0; 7];
    for (k, &m) in M_I_VALUES.iter().enumerate() {
        out[k] = flip_probability_in(&es, m)?;
    }
    Ok(out)
}

/// Phenomenological optical pumping chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpParams {
    /// Optical cycles per second.
    pub pump_rate: f64,
    /// Nuclear depolarization events per second.
    pub depol_rate: f64,
    pub es_params: SpinSystemParams,
    pub gs_params: SpinSystemParams,
    /// Which manifold's hybridization drives the flips.
    pub mixing: Manifold,
    pub cycles_cap: usize,
}

impl PumpParams {
    pub fn new(pump_rate: f64, depol_rate: f64, b_mt: f64) -> Self {
        PumpParams {
            pump_rate,
            depol_rate,
            es_params: default_params(Manifold::Excited).with_field(b_mt),
            gs_params: default_params(Manifold::Ground).with_field(b_mt),
            mixing: Manifold::Excited,
            cycles_cap: 1_000_000,
        }
    }

    /// Same rates at another field.
    pub fn at_field(&self, b_mt: f64) -> Self {
        let mut p = self.clone();
        p.es_params.b0 = b_mt;
        p.gs_params.b0 = b_mt;
        p
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pump_rate >= 0.0) || !self.pump_rate.is_finite() {
            return Err(Error::param("pump_rate", "must be finite and >= 0"));
        }
        if !(self.depol_rate >= 0.0) || !self.depol_rate.is_finite() {
            return Err(Error::param("depol_rate", "must be finite and >= 0"));
        }
        if self.cycles_cap == 0 {
            return Err(Error::param("cycles_cap", "must be >= 1"));
        }
        self.es_params.validate()?;
        self.gs_params.validate()
    }

    fn mixing_params(&self) -> &SpinSystemParams {
        match self.mixing {
            Manifold::Excited => &self.es_params,
            Manifold::Ground => &self.gs_params,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpOutcome {
    pub distribution: NuclearDistribution,
    pub polarization: f64,
    pub cycles: usize,
    /// False when `cycles_cap` was reached before the L1 change per cycle
    /// fell below [`PUMP_TOLERANCE`].
    pub converged: bool,
    pub flip: [f64; 7],
}

pub const PUMP_TOLERANCE: f64 = 1e-10;

/// Fixed point of the pumping chain started from the unpolarized state.
pub fn pump_steady_state(p: &PumpParams) -> Result<PumpOutcome> {
    pump_from(p, NuclearDistribution::unpolarized())
}

/// Iterates the chain from `start`. Each cycle moves weight from m_I to
/// m_I + 1 with the flip probability, then relaxes a fraction
/// 1 − exp(−depol_rate/pump_rate) of the population toward the unpolarized
/// distribution (relaxation at rate depol_rate/pump_rate per cycle).
pub fn pump_from(p: &PumpParams, start: NuclearDistribution) -> Result<PumpOutcome> {
    p.validate()?;
    let bath = NuclearDistribution::unpolarized();
    if p.pump_rate == 0.0 {
        return Ok(PumpOutcome {
            distribution: bath,
            polarization: 0.0,
            cycles: 0,
            converged: true,
            flip: [0.0; 7],
        });
    }
    let flip = flip_probabilities(p.mixing_params())?;
    let eps = -libm::expm1(-p.depol_rate / p.pump_rate);
    let b = bath.as_array();
    let mut rho = *start.as_array();
    let mut cycles = 0;
    let mut converged = false;
    while cycles < p.cycles_cap {
        let mut next = [0.0; 7];
        for k in 0..7 {
            let moved = flip[k] * rho[k];
            next[k] += rho[k] - moved;
            if k < 6 {
                next[k + 1] += moved;
            }
        }
        let mut change = 0.0;
        for k in 0..7 {
            next[k] = (1.0 - eps) * next[k] + eps * b[k];
            change += (next[k] - rho[k]).abs();
        }
        rho = next;
        cycles += 1;
        if change < PUMP_TOLERANCE {
            converged = true;
            break;
        }
    }
    let distribution = NuclearDistribution::from_weights(rho)?;
    Ok(PumpOutcome {
        polarization: distribution.polarization(),
        distribution,
        cycles,
        converged,
        flip,
    })
}
