//! One function per subcommand. Each resolves the `auto` entries of its
//! config in place, so the manifest written afterwards pins every value
//! the run used.

use std::fmt;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use spinlab_core::analysis::{
    fit_damped_cosine, fit_lorentzians_xy, polarization, seed_peaks, PeakConstraints, RabiFitOptions, RabiInit,
};
use spinlab_core::constants;
use spinlab_core::dynamics::{
    dominant_nuclear_line, hyperfine_enhancement_in, pair_coupling, pump_steady_state, rabi_evolve, LocalDrive,
    PropagationConfig, PumpParams,
};
use spinlab_core::hamiltonian::HamiltonianParts;
use spinlab_core::nuclear::M_I_VALUES;
use spinlab_core::spectra::{
    eigh, find_lac, level_row, odmr_lines, odnmr_lines, FrequencyGrid, NmrOptions, OdmrOptions, Spectrum,
};
use spinlab_core::{build_hamiltonian, Manifold, NuclearDistribution, SpinSystemParams};

use crate::config::{Auto, Range, RhoSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{csv, fmt_num, manifest, read_xy_csv, report, write_atomic, xy_csv, MANIFEST_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Levels,
    Odmr,
    Nmr,
    Pump,
    Rabi,
    FitOdmr,
    FitRabi,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Levels,
        Command::Odmr,
        Command::Nmr,
        Command::Pump,
        Command::Rabi,
        Command::FitOdmr,
        Command::FitRabi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Levels => "levels",
            Command::Odmr => "odmr",
            Command::Nmr => "nmr",
            Command::Pump => "pump",
            Command::Rabi => "rabi",
            Command::FitOdmr => "fit-odmr",
            Command::FitRabi => "fit-rabi",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Output of one run: named files (manifest included) and a short summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub command: Command,
    pub files: Vec<(String, String)>,
    pub summary: Vec<(String, String)>,
}

impl Run {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Writes every file under `dir` and returns their paths.
    pub fn write(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        self.files
            .iter()
            .map(|(name, contents)| {
                let path = dir.join(name);
                write_atomic(&path, contents)?;
                Ok(path)
            })
            .collect()
    }
}

struct Builder {
    files: Vec<(String, String)>,
    summary: Vec<(String, String)>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            files: Vec::new(),
            summary: Vec::new(),
        }
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    fn finish(mut self, command: Command, cfg: &RunConfig) -> Run {
        self.files.push((MANIFEST_FILE.to_string(), manifest(command.name(), &cfg.dump())));
        Run {
            command,
            files: self.files,
            summary: self.summary,
        }
    }
}

/// Runs `command`; `base` resolves a relative `input_csv`.
pub fn execute(command: Command, cfg: &mut RunConfig, base: &Path) -> CliResult<Run> {
    match command {
        Command::Levels => levels(cfg),
        Command::Odmr => odmr(cfg),
        Command::Nmr => nmr(cfg),
        Command::Pump => pump(cfg),
        Command::Rabi => rabi(cfg),
        Command::FitOdmr => fit_odmr(cfg, base),
        Command::FitRabi => fit_rabi(cfg, base),
    }
}

/// The embedded constants with their notes.
pub fn constants_text() -> String {
    let mut out = String::from("# embedded constants (MHz, mT)\n");
    for e in constants::table() {
        out.push_str(&format!("{} = {}  # {}\n", e.key, fmt_num(e.value), e.note));
    }
    out
}

fn grid_of(r: Range) -> CliResult<FrequencyGrid> {
    Ok(FrequencyGrid::from_range(r.start, r.stop, r.step)?)
}

fn pump_params(cfg: &RunConfig, b_mt: f64) -> CliResult<PumpParams> {
    let p = PumpParams {
        pump_rate: cfg.pump_rate_per_s,
        depol_rate: cfg.depol_rate_per_s,
        es_params: cfg.spin_params_for(Manifold::Excited)?.with_field(b_mt),
        gs_params: cfg.spin_params_for(Manifold::Ground)?.with_field(b_mt),
        mixing: cfg.pump_mixing,
        cycles_cap: cfg.cycles_cap,
    };
    p.validate()?;
    Ok(p)
}

fn resolve_rho(cfg: &RunConfig) -> CliResult<NuclearDistribution> {
    Ok(match cfg.rho {
        RhoSpec::UniformMultiplicity => NuclearDistribution::unpolarized(),
        RhoSpec::Delta(m) => NuclearDistribution::delta(m)?,
        RhoSpec::Weights(w) => NuclearDistribution::from_weights(w)?,
        RhoSpec::Pumped => pump_steady_state(&pump_params(cfg, cfg.b0_mt)?)?.distribution,
    })
}

fn levels(cfg: &mut RunConfig) -> CliResult<Run> {
    let p = cfg.spin_params()?;
    let sweep = cfg.b_sweep_mt.or(Range {
        start: 0.0,
        stop: 150.0,
        step: 0.5,
    });
    cfg.b_sweep_mt = Auto::Set(sweep);
    let parts = HamiltonianParts::new(&p)?;
    let rows = sweep
        .points()
        .par_iter()
        .map(|&b| level_row(&parts, b))
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["b_mT".to_string()];
    header.extend((0..81).map(|k| format!("level_{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let body = rows.iter().map(|r| {
        let mut v = vec![fmt_num(r.b_mt)];
        v.extend(r.values.iter().map(|x| fmt_num(*x)));
        v
    });
    let mut b = Builder::new();
    b.file("levels.csv", csv(&header, body));
    b.note("rows", rows.len());
    b.note("lac_mT", fmt_num(find_lac(&p)?));
    Ok(b.finish(Command::Levels, cfg))
}

fn odmr_options(cfg: &RunConfig) -> OdmrOptions {
    OdmrOptions {
        shape: cfg.line_shape,
        strengths: cfg.line_strengths,
        include_upper: cfg.include_upper,
    }
}

type OdmrModel = (Spectrum, Vec<(f64, f64)>, NuclearDistribution);

/// Synthetic ODMR spectrum for `cfg`, filling in the grid and width.
fn odmr_model(cfg: &mut RunConfig) -> CliResult<OdmrModel> {
    let p = cfg.spin_params()?;
    let rho = resolve_rho(cfg)?;
    let lines = odmr_lines(&p)?;
    let opts = odmr_options(cfg);
    let fwhm = cfg.fwhm_mhz.or(20.0);
    cfg.fwhm_mhz = Auto::Set(fwhm);
    let peaks = lines.weighted(&rho, &opts);
    let range = match cfg.freq_grid_mhz {
        Auto::Set(r) => r,
        Auto::Auto => {
            let lo = peaks.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
            let hi = peaks.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
            Range::new(((lo - 5.0 * fwhm).floor()).max(0.0), (hi + 5.0 * fwhm).ceil(), 0.5)
                .map_err(|e| CliError::value("freq_grid_MHz", e))?
        }
    };
    cfg.freq_grid_mhz = Auto::Set(range);
    let s = Spectrum::from_lines(grid_of(range)?, &peaks, fwhm, opts.shape)?;
    Ok((s, peaks, rho))
}

fn odmr(cfg: &mut RunConfig) -> CliResult<Run> {
    let (s, peaks, rho) = odmr_model(cfg)?;
    let mut b = Builder::new();
    b.file("odmr.csv", xy_csv(["frequency_mhz", "intensity"], &s.freqs(), &s.intensity));
    let per_m = rho.as_array();
    let lines = peaks.iter().enumerate().map(|(k, &(c, h))| {
        let m = M_I_VALUES[k % 7];
        vec![
            m.to_string(),
            if k < 7 { "-1" } else { "+1" }.to_string(),
            fmt_num(c),
            fmt_num(h),
            fmt_num(per_m[k % 7]),
        ]
    });
    b.file(
        "odmr_lines.csv",
        csv(&["m_i", "target_ms", "centre_mhz", "height", "population"], lines),
    );
    b.note("peaks", s.local_maxima().len());
    b.note("polarization", fmt_num(rho.polarization()));
    Ok(b.finish(Command::Odmr, cfg))
}

fn nmr(cfg: &mut RunConfig) -> CliResult<Run> {
    let p = cfg.spin_params()?;
    let rho = resolve_rho(cfg)?;
    let fwhm = cfg.fwhm_mhz.or(1.0);
    cfg.fwhm_mhz = Auto::Set(fwhm);
    let range = cfg.freq_grid_mhz.or(Range {
        start: 0.0,
        stop: 100.0,
        step: 0.05,
    });
    cfg.freq_grid_mhz = Auto::Set(range);
    let opts = NmrOptions {
        shape: cfg.line_shape,
        ..NmrOptions::default()
    };
    let (_, lines) = odnmr_lines(&p, cfg.branch, cfg.mw_pi, &rho, &opts)?;
    let peaks: Vec<(f64, f64)> = lines.iter().map(|l| (l.freq, l.weight * l.strength)).collect();
    let s = Spectrum::from_lines(grid_of(range)?, &peaks, fwhm, opts.shape)?;
    let mut b = Builder::new();
    b.file("odnmr.csv", xy_csv(["frequency_mhz", "intensity"], &s.freqs(), &s.intensity));
    let rows = lines.iter().map(|l| {
        vec![
            fmt_num(l.freq),
            fmt_num(l.strength),
            fmt_num(l.weight),
            l.initial.to_string(),
            l.target.to_string(),
        ]
    });
    b.file(
        "odnmr_lines.csv",
        csv(&["frequency_mhz", "strength", "weight", "initial", "target"], rows),
    );
    b.note("lines", lines.len());
    b.note(
        "band_centroid_MHz",
        s.centroid(35.0, 60.0).map_or_else(|| "none".to_string(), fmt_num),
    );
    b.note("band_integral", fmt_num(s.integrated(35.0, 60.0)));
    Ok(b.finish(Command::Nmr, cfg))
}

fn pump(cfg: &mut RunConfig) -> CliResult<Run> {
    let sweep = cfg.b_sweep_mt.or(Range {
        start: 7.0,
        stop: 110.0,
        step: 1.0,
    });
    cfg.b_sweep_mt = Auto::Set(sweep);
    let params = sweep
        .points()
        .into_iter()
        .map(|b| pump_params(cfg, b))
        .collect::<CliResult<Vec<_>>>()?;
    let outcomes = params
        .par_iter()
        .map(pump_steady_state)
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["b_mT", "polarization", "converged", "cycles"];
    header.extend(["rho_m3", "rho_m2", "rho_m1", "rho_0", "rho_p1", "rho_p2", "rho_p3"]);
    let rows = sweep.points().into_iter().zip(&outcomes).map(|(bf, o)| {
        let mut v = vec![fmt_num(bf), fmt_num(o.polarization), o.converged.to_string(), o.cycles.to_string()];
        v.extend(o.distribution.as_array().iter().map(|x| fmt_num(*x)));
        v
    });
    let mut b = Builder::new();
    b.file("pump.csv", csv(&header, rows));
    let (best_b, best_p) = sweep
        .points()
        .into_iter()
        .zip(&outcomes)
        .map(|(bf, o)| (bf, o.polarization))
        .fold((f64::NAN, f64::NEG_INFINITY), |a, x| if x.1 > a.1 { x } else { a });
    b.note("max_polarization", fmt_num(best_p));
    b.note("max_at_mT", fmt_num(best_b));
    b.note("unconverged_points", outcomes.iter().filter(|o| !o.converged).count());
    Ok(b.finish(Command::Pump, cfg))
}

struct RabiSetup {
    p: SpinSystemParams,
    initial: usize,
    target: usize,
    transition: f64,
    coupling: f64,
    drive: f64,
    enhancement: Option<f64>,
}

fn rabi_setup(cfg: &mut RunConfig) -> CliResult<RabiSetup> {
    let p = cfg.spin_params()?;
    let (es, initial, target) = match (cfg.initial_state.get(), cfg.target_state.get()) {
        (Some(i), Some(f)) => (eigh(&build_hamiltonian(&p)?)?, i, f),
        (None, None) => {
            let (es, line) = dominant_nuclear_line(&p, cfg.branch, cfg.line_near_mhz, cfg.line_window_mhz)?;
            (es, line.initial, line.target)
        }
        _ => return Err(CliError::value("target_state", "set both initial_state and target_state, or neither")),
    };
    cfg.initial_state = Auto::Set(initial);
    cfg.target_state = Auto::Set(target);
    let pc = pair_coupling(&es, &LocalDrive::in_plane(&p), initial, target)?;
    let drive = cfg.rf_frequency_mhz.or(pc.freq.abs());
    cfg.rf_frequency_mhz = Auto::Set(drive);
    Ok(RabiSetup {
        enhancement: hyperfine_enhancement_in(&es, &p, initial, target).ok(),
        p,
        initial,
        target,
        transition: pc.freq.abs(),
        coupling: pc.coupling,
        drive,
    })
}

fn rabi_trace(cfg: &mut RunConfig) -> CliResult<(RabiSetup, Vec<f64>, Vec<f64>, f64)> {
    let s = rabi_setup(cfg)?;
    let f_r = cfg.rf_amplitude_mt * s.coupling;
    let range = match cfg.time_grid_us {
        Auto::Set(r) => r,
        Auto::Auto => {
            let span = if f_r > 0.0 { 2.0 / f_r } else { 10.0 };
            Range::new(0.0, span, span / 80.0).map_err(|e| CliError::value("time_grid_us", e))?
        }
    };
    cfg.time_grid_us = Auto::Set(range);
    let pc = PropagationConfig {
        steps_per_period: cfg.steps_per_period as f64,
        ..PropagationConfig::default()
    };
    let tr = rabi_evolve(&s.p, s.drive, cfg.rf_amplitude_mt, &range.points(), s.initial, s.target, &pc)?;
    Ok((s, tr.times, tr.population, tr.norm_defect))
}

fn rabi(cfg: &mut RunConfig) -> CliResult<Run> {
    let (s, t, y, norm_defect) = rabi_trace(cfg)?;
    let mut b = Builder::new();
    b.file("rabi.csv", xy_csv(["time_us", "population"], &t, &y));
    let mut rep = vec![
        ("initial_state".to_string(), s.initial.to_string()),
        ("target_state".to_string(), s.target.to_string()),
        ("transition_MHz".to_string(), fmt_num(s.transition)),
        ("drive_MHz".to_string(), fmt_num(s.drive)),
        ("coupling_MHz_per_mT".to_string(), fmt_num(s.coupling)),
        ("f_rabi_resonant_MHz".to_string(), fmt_num(cfg.rf_amplitude_mt * s.coupling)),
        ("norm_defect".to_string(), fmt_num(norm_defect)),
    ];
    rep.push((
        "enhancement".to_string(),
        s.enhancement.map_or_else(|| "none".to_string(), fmt_num),
    ));
    for (k, v) in &rep {
        b.note(k, v);
    }
    b.file("rabi_report.txt", report(&rep));
    Ok(b.finish(Command::Rabi, cfg))
}

fn input_path(cfg: &RunConfig, base: &Path) -> Option<PathBuf> {
    cfg.input_csv.as_ref().map(|s| {
        let p = PathBuf::from(s);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    })
}

fn add_noise(y: &mut [f64], sigma: f64, seed: u64) -> CliResult<()> {
    if sigma == 0.0 {
        return Ok(());
    }
    let n = Normal::new(0.0, sigma).map_err(|e| CliError::value("noise_rel", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in y {
        *v += n.sample(&mut rng);
    }
    Ok(())
}

fn fit_odmr(cfg: &mut RunConfig, base: &Path) -> CliResult<Run> {
    let mut b = Builder::new();
    let (x, y) = match input_path(cfg, base) {
        Some(path) => read_xy_csv(&path, ["frequency_mhz", "intensity"])?,
        None => {
            let (s, _, _) = odmr_model(cfg)?;
            let mut y = s.intensity.clone();
            add_noise(&mut y, cfg.noise_rel * s.max(), cfg.seed)?;
            let x = s.freqs();
            b.file("data.csv", xy_csv(["frequency_mhz", "intensity"], &x, &y));
            (x, y)
        }
    };
    let fwhm = cfg.fwhm_mhz.or(20.0);
    cfg.fwhm_mhz = Auto::Set(fwhm);
    let p = cfg.spin_params()?;
    let mut seeds: Vec<(f64, i32)> = M_I_VALUES
        .iter()
        .map(|&m| (p.d_zfs - p.gamma_e * p.b0 - cfg.hyperfine_zz_mhz * m as f64, m))
        .collect();
    seeds.sort_by(|a, c| a.0.total_cmp(&c.0));
    let centres: Vec<f64> = seeds.iter().map(|s| s.0).collect();
    let init = seed_peaks(&x, &y, &centres, fwhm);
    let constraints = PeakConstraints {
        fix_centres: cfg.fix_centres,
        ..PeakConstraints::default()
    };
    let fit = fit_lorentzians_xy(&x, &y, &init, constraints)?;
    let mut by_m = [0.0; 7];
    for (k, &(_, m)) in seeds.iter().enumerate() {
        by_m[(m + 3) as usize] = fit.peaks.amplitudes[k].max(0.0);
    }
    let pol = polarization(&by_m)?;
    let mut rep = vec![
        ("converged".to_string(), fit.converged.to_string()),
        ("iterations".to_string(), fit.iterations.to_string()),
        ("rms".to_string(), fmt_num(fit.rms)),
        ("polarization".to_string(), fmt_num(pol)),
        ("fwhm_MHz".to_string(), fmt_num(fit.peaks.fwhm(0))),
        ("baseline".to_string(), fmt_num(fit.peaks.baseline)),
    ];
    for (k, &(_, m)) in seeds.iter().enumerate() {
        rep.push((format!("centre_mI_{m:+}_MHz"), fmt_num(fit.peaks.centres[k])));
        rep.push((format!("amplitude_mI_{m:+}"), fmt_num(fit.peaks.amplitudes[k])));
    }
    b.note("converged", fit.converged);
    b.note("polarization", fmt_num(pol));
    b.note("rms", fmt_num(fit.rms));
    b.file("fit_report.txt", report(&rep));
    b.file("residuals.csv", xy_csv(["frequency_mhz", "residual"], &x, &fit.residuals));
    Ok(b.finish(Command::FitOdmr, cfg))
}

fn fit_rabi(cfg: &mut RunConfig, base: &Path) -> CliResult<Run> {
    let mut b = Builder::new();
    let (t, y) = match input_path(cfg, base) {
        Some(path) => read_xy_csv(&path, ["time_us", "population"])?,
        None => {
            let (_, t, mut y, _) = rabi_trace(cfg)?;
            if let Some(t2) = cfg.inject_t2_us {
                let mean = y.iter().sum::<f64>() / y.len() as f64;
                for (v, ti) in y.iter_mut().zip(&t) {
                    *v = mean + (*v - mean) * (-ti / t2).exp();
                }
            }
            let amp = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            add_noise(&mut y, cfg.noise_rel * amp, cfg.seed)?;
            b.file("data.csv", xy_csv(["time_us", "population"], &t, &y));
            (t, y)
        }
    };
    let init = RabiInit::guess(&t, &y, cfg.decay_terms)?;
    let fit = fit_damped_cosine(&t, &y, &init, &RabiFitOptions::default())?;
    let mut rep = vec![
        ("converged".to_string(), fit.converged.to_string()),
        ("iterations".to_string(), fit.iterations.to_string()),
        ("rms".to_string(), fmt_num(fit.rms)),
        ("f_rabi_MHz".to_string(), fmt_num(fit.f_rabi)),
        ("t2_star_us".to_string(), fmt_num(fit.t2_star)),
        ("t2_at_bound".to_string(), fit.t2_at_bound.to_string()),
        ("amplitude".to_string(), fmt_num(fit.amp)),
        ("phase_rad".to_string(), fmt_num(fit.phase)),
        ("baseline".to_string(), fmt_num(fit.baseline)),
    ];
    for (k, d) in fit.decays.iter().enumerate() {
        rep.push((format!("decay_{k}_amplitude"), fmt_num(d.amplitude)));
        rep.push((format!("decay_{k}_tau_us"), fmt_num(d.tau)));
    }
    b.note("converged", fit.converged);
    b.note("f_rabi_MHz", fmt_num(fit.f_rabi));
    b.note("t2_star_us", fmt_num(fit.t2_star));
    b.file("fit_report.txt", report(&rep));
    b.file("residuals.csv", xy_csv(["time_us", "residual"], &t, &fit.residuals));
    Ok(b.finish(Command::FitRabi, cfg))
}
