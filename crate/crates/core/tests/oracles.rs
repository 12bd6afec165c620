use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use spinlab_core::analysis::{
    fit_damped_cosine, fit_lorentzians, polarization, seed_peaks, PeakConstraints, RabiFitOptions, RabiInit,
};
use spinlab_core::constants::{A_ZZ_MHZ, GAMMA_E_MHZ_PER_MT};
use spinlab_core::dynamics::{dominant_nuclear_line, pair_coupling, rabi_evolve, LocalDrive, PropagationConfig};
use spinlab_core::nuclear::{M_I_VALUES, MULTIPLICITY};
use spinlab_core::spectra::{eigh, odmr_spectrum, FrequencyGrid, Ms, OdmrOptions, Spectrum};
use spinlab_core::{default_params, Manifold, NuclearDistribution, Operator, C64};

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    let n = Normal::new(0.0, 1.0).unwrap();
    let mut h = Operator::zeros(dim);
    for i in 0..dim {
        h.set(i, i, C64::new(n.sample(rng), 0.0));
        for j in 0..i {
            let z = C64::new(n.sample(rng), n.sample(rng));
            h.set(i, j, z);
            h.set(j, i, z.conj());
        }
    }
    h
}

#[test]
fn eigh_on_random_81_dim_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let h = random_hermitian(&mut rng, 81);
        let es = eigh(&h).unwrap();
        assert!(es.reconstruction_residual(&h) <= 1e-8 * h.max_abs());
        assert!(es.orthonormality_defect() <= 1e-9);
    }
}

/// Trace of `pop(t)` for the dominant m_s = −1 nuclear line at 74 mT,
/// together with the analytic on-resonance Rabi frequency b1·|V|.
fn rabi_trace(b1: f64, detuning: f64, periods: f64, samples: usize) -> (Vec<f64>, Vec<f64>, f64, f64) {
    let p = default_params(Manifold::Ground).with_field(74.0);
    let (es, line) = dominant_nuclear_line(&p, Ms::Minus, 52.0, 2.5).unwrap();
    let pc = pair_coupling(&es, &LocalDrive::in_plane(&p), line.initial, line.target).unwrap();
    let f_r = b1 * pc.coupling;
    let f_gen = (f_r * f_r + detuning * detuning).sqrt();
    let span = periods / f_gen;
    let times: Vec<f64> = (0..samples).map(|k| span * k as f64 / (samples - 1) as f64).collect();
    let tr = rabi_evolve(
        &p,
        pc.freq.abs() + detuning,
        b1,
        &times,
        line.initial,
        line.target,
        &PropagationConfig::default(),
    )
    .unwrap();
    assert!(tr.norm_defect <= 1e-8, "norm defect {}", tr.norm_defect);
    (tr.times, tr.population, f_r, f_gen)
}

fn fitted_frequency(t: &[f64], y: &[f64]) -> f64 {
    let init = RabiInit::guess(t, y, 0).unwrap();
    fit_damped_cosine(t, y, &init, &RabiFitOptions::default()).unwrap().f_rabi
}

#[test]
fn resonant_rabi_matches_two_level_oracle() {
    let (t, y, f_r, _) = rabi_trace(0.2, 0.0, 2.0, 60);
    for (&ti, &yi) in t.iter().zip(&y) {
        let oracle = (std::f64::consts::PI * f_r * ti).sin().powi(2);
        assert!((yi - oracle).abs() < 0.05, "t={ti} sim={yi} oracle={oracle}");
    }
    let f = fitted_frequency(&t, &y);
    assert!((f - f_r).abs() <= 0.02 * f_r, "fit {f} vs {f_r}");
}

#[test]
fn detuned_rabi_follows_generalized_frequency() {
    let (t, y, f_r, f_gen) = rabi_trace(0.2, 0.3, 2.0, 60);
    let peak = y.iter().copied().fold(0.0, f64::max);
    let depth = f_r * f_r / (f_gen * f_gen);
    assert!((peak - depth).abs() < 0.05, "max population {peak} vs {depth}");
    let f = fitted_frequency(&t, &y);
    assert!((f - f_gen).abs() <= 0.05 * f_gen, "fit {f} vs {f_gen}");
}

fn unpolarized_spectrum() -> (Spectrum, Vec<f64>) {
    let p = default_params(Manifold::Ground).with_field(20.0);
    let grid = FrequencyGrid::from_range(2700.0, 3150.0, 0.5).unwrap();
    let s = odmr_spectrum(&p, &NuclearDistribution::unpolarized(), 20.0, grid, &OdmrOptions::default()).unwrap();
    let seeds = M_I_VALUES
        .iter()
        .rev()
        .map(|&m| p.d_zfs - GAMMA_E_MHZ_PER_MT * p.b0 - A_ZZ_MHZ * m as f64)
        .collect();
    (s, seeds)
}

#[test]
fn lorentzian_amplitudes_survive_one_percent_noise() {
    let (clean, seeds) = unpolarized_spectrum();
    let x = clean.freqs();
    let truth: Vec<f64> = MULTIPLICITY.iter().rev().map(|&m| m as f64 / 27.0).collect();
    let noise = Normal::new(0.0, 0.01 * clean.max()).unwrap();
    let mut sq = 0.0;
    let mut count = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = clean.intensity.iter().map(|v| v + noise.sample(&mut rng)).collect();
        let init = seed_peaks(&x, &y, &seeds, 20.0);
        let fit = spinlab_core::analysis::fit_lorentzians_xy(&x, &y, &init, PeakConstraints::default()).unwrap();
        for (a, t) in fit.peaks.amplitudes.iter().zip(&truth) {
            sq += ((a - t) / t).powi(2);
            count += 1;
        }
    }
    let rms = (sq / count as f64).sqrt();
    assert!(rms <= 0.03, "relative amplitude rms {rms}");
}

/// ρ ∝ multiplicity·e^{βm}, with β chosen by bisection to hit `target`.
fn tilted_distribution(target: f64) -> NuclearDistribution {
    let make = |beta: f64| {
        let w: [f64; 7] = core::array::from_fn(|k| MULTIPLICITY[k] as f64 * (beta * M_I_VALUES[k] as f64).exp());
        NuclearDistribution::from_weights(w).unwrap()
    };
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if make(mid).polarization() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    make(0.5 * (lo + hi))
}

#[test]
fn polarization_roundtrip_through_fit() {
    let rho = tilted_distribution(0.32);
    assert!((rho.polarization() - 0.32).abs() < 1e-12);
    let p = default_params(Manifold::Ground).with_field(20.0);
    let grid = FrequencyGrid::from_range(2700.0, 3150.0, 0.5).unwrap();
    let s = odmr_spectrum(&p, &rho, 20.0, grid, &OdmrOptions::default()).unwrap();
    let (_, seeds) = unpolarized_spectrum();
    let init = seed_peaks(&s.freqs(), &s.intensity, &seeds, 20.0);
    let fit = fit_lorentzians(&s, &init, PeakConstraints::default()).unwrap();
    let mut by_m = [0.0; 7];
    for (k, a) in fit.peaks.amplitudes.iter().enumerate() {
        by_m[6 - k] = a.max(0.0);
    }
    let got = polarization(&by_m).unwrap();
    assert!((got - 0.32).abs() <= 0.02, "{got}");
}
