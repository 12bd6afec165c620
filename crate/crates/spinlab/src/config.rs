//! Flat `key = value` run configuration. Units live in the key names.
//!
//! A file is parsed into raw pairs, flag overrides are layered on top, and
//! the merged map is resolved into a typed [`RunConfig`]. [`RunConfig::dump`]
//! writes every key in a fixed order, so `dump(parse(dump(c)))` equals
//! `dump(c)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use spinlab_core::hamiltonian::HyperfineTensor;
use spinlab_core::spectra::{LineShape, LineStrengths, Ms};
use spinlab_core::{default_params, Manifold, NuclearDistribution, SpinSystemParams};

use crate::error::{CliError, CliResult};
use crate::output::fmt_num;

/// Keys that describe a run rather than configure it; accepted in any
/// config so a manifest can be fed back as one.
pub const METADATA_KEYS: [&str; 2] = ["command", "version"];

/// Inclusive `start:stop:step` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, String> {
        if ![start, stop, step].iter().all(|v| v.is_finite()) {
            return Err("start, stop and step must be finite".into());
        }
        if step <= 0.0 {
            return Err(format!("step must be > 0, got {step}"));
        }
        if stop < start {
            return Err(format!("stop {stop} is below start {start}"));
        }
        Ok(Range { start, stop, step })
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got `{s}`"));
        }
        let num = |t: &str| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        Range::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", fmt_num(self.start), fmt_num(self.stop), fmt_num(self.step))
    }
}

/// A value the command fills in when left as `auto`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Auto<T> {
    Auto,
    Set(T),
}

impl<T: Copy> Auto<T> {
    pub fn or(self, fallback: T) -> T {
        match self {
            Auto::Auto => fallback,
            Auto::Set(v) => v,
        }
    }

    pub fn get(self) -> Option<T> {
        match self {
            Auto::Auto => None,
            Auto::Set(v) => Some(v),
        }
    }
}

/// Nuclear m_I distribution as written in a config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoSpec {
    /// Multiplicities 1,3,6,7,6,3,1 over 27.
    UniformMultiplicity,
    /// All weight on one m_I.
    Delta(i32),
    /// Weights for m_I = −3..+3, normalized on use.
    Weights([f64; 7]),
    /// Steady state of the pumping chain at the configured rates and field.
    Pumped,
}

impl FromStr for RhoSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform-multiplicity" | "unpolarized" => return Ok(RhoSpec::UniformMultiplicity),
            "pumped" => return Ok(RhoSpec::Pumped),
            _ => {}
        }
        if let Some(m) = s.strip_prefix("delta:") {
            let m: i32 = m.trim().parse().map_err(|_| format!("bad m_I in `{s}`"))?;
            if !(-3..=3).contains(&m) {
                return Err(format!("m_I {m} outside -3..=3"));
            }
            return Ok(RhoSpec::Delta(m));
        }
        let vals: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("expected uniform-multiplicity, pumped, delta:<m> or 7 weights, got `{s}`"))?;
        let w: [f64; 7] = vals
            .try_into()
            .map_err(|v: Vec<f64>| format!("expected 7 weights, got {}", v.len()))?;
        NuclearDistribution::from_weights(w).map_err(|e| e.to_string())?;
        Ok(RhoSpec::Weights(w))
    }
}

impl fmt::Display for RhoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoSpec::UniformMultiplicity => f.write_str("uniform-multiplicity"),
            RhoSpec::Pumped => f.write_str("pumped"),
            RhoSpec::Delta(m) => write!(f, "delta:{m:+}"),
            RhoSpec::Weights(w) => {
                let s: Vec<String> = w.iter().map(|v| fmt_num(*v)).collect();
                f.write_str(&s.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifold: Manifold,
    pub b0_mt: f64,
    pub d_zfs_mhz: f64,
    pub gamma_e_mhz_per_mt: f64,
    pub gamma_n_mhz_per_mt: f64,
    pub hyperfine_xx_mhz: f64,
    pub hyperfine_yy_mhz: f64,
    pub hyperfine_zz_mhz: f64,
    pub quadrupole_mhz: [f64; 3],
    pub b_sweep_mt: Auto<Range>,
    pub freq_grid_mhz: Auto<Range>,
    pub fwhm_mhz: Auto<f64>,
    pub rho: RhoSpec,
    pub line_shape: LineShape,
    pub line_strengths: LineStrengths,
    pub include_upper: bool,
    pub branch: Ms,
    pub mw_pi: bool,
    pub pump_rate_per_s: f64,
    pub depol_rate_per_s: f64,
    /// Manifold whose hybridization drives the pumping flips.
    pub pump_mixing: Manifold,
    pub cycles_cap: usize,
    pub rf_amplitude_mt: f64,
    pub rf_frequency_mhz: Auto<f64>,
    pub line_near_mhz: f64,
    pub line_window_mhz: f64,
    pub initial_state: Auto<usize>,
    pub target_state: Auto<usize>,
    pub time_grid_us: Auto<Range>,
    pub steps_per_period: usize,
    pub input_csv: Option<String>,
    pub noise_rel: f64,
    pub seed: u64,
    pub fix_centres: bool,
    pub decay_terms: usize,
    pub inject_t2_us: Option<f64>,
}

/// Every accepted key, in dump order.
pub const KEYS: [&str; 36] = [
    "manifold",
    "b0_mT",
    "d_zfs_MHz",
    "gamma_e_MHz_per_mT",
    "gamma_n_MHz_per_mT",
    "hyperfine_xx_MHz",
    "hyperfine_yy_MHz",
    "hyperfine_zz_MHz",
    "quadrupole_MHz",
    "b_sweep_mT",
    "freq_grid_MHz",
    "fwhm_MHz",
    "rho",
    "line_shape",
    "line_strengths",
    "include_upper",
    "branch_ms",
    "mw_pi",
    "pump_rate_per_s",
    "depol_rate_per_s",
    "pump_mixing",
    "cycles_cap",
    "rf_amplitude_mT",
    "rf_frequency_MHz",
    "line_near_MHz",
    "line_window_MHz",
    "initial_state",
    "target_state",
    "time_grid_us",
    "steps_per_period",
    "input_csv",
    "noise_rel",
    "seed",
    "fix_centres",
    "decay_terms",
    "inject_t2_us",
];

impl RunConfig {
    pub fn defaults(manifold: Manifold) -> Self {
        let p = default_params(manifold);
        let a = p.hyperfine[0].0;
        RunConfig {
            manifold,
            b0_mt: 74.0,
            d_zfs_mhz: p.d_zfs,
            gamma_e_mhz_per_mt: p.gamma_e,
            gamma_n_mhz_per_mt: p.gamma_n,
            hyperfine_xx_mhz: a[0][0],
            hyperfine_yy_mhz: a[1][1],
            hyperfine_zz_mhz: a[2][2],
            quadrupole_mhz: p.quadrupole,
            b_sweep_mt: Auto::Auto,
            freq_grid_mhz: Auto::Auto,
            fwhm_mhz: Auto::Auto,
            rho: RhoSpec::UniformMultiplicity,
            line_shape: LineShape::Lorentzian,
            line_strengths: LineStrengths::Uniform,
            include_upper: false,
            branch: Ms::Minus,
            mw_pi: true,
            pump_rate_per_s: 1.0,
            depol_rate_per_s: 0.01,
            pump_mixing: Manifold::Excited,
            cycles_cap: 1_000_000,
            rf_amplitude_mt: 0.2,
            rf_frequency_mhz: Auto::Auto,
            line_near_mhz: 52.0,
            line_window_mhz: 2.5,
            initial_state: Auto::Auto,
            target_state: Auto::Auto,
            time_grid_us: Auto::Auto,
            steps_per_period: 50,
            input_csv: None,
            noise_rel: 0.01,
            seed: 1,
            fix_centres: false,
            decay_terms: 1,
            inject_t2_us: None,
        }
    }

    /// Resolves merged raw pairs. `manifold` is applied first so that an
    /// unset `d_zfs_MHz` takes that manifold's default.
    pub fn from_map(map: &BTreeMap<String, String>) -> CliResult<Self> {
        let manifold = match map.get("manifold") {
            Some(v) => parse_manifold(v)?,
            None => Manifold::Ground,
        };
        let mut cfg = RunConfig::defaults(manifold);
        for (k, v) in map {
            if k == "manifold" || METADATA_KEYS.contains(&k.as_str()) {
                continue;
            }
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let (map, _) = parse_pairs(text)?;
        RunConfig::from_map(&map)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        match key {
            "manifold" => {
                let m = parse_manifold(v)?;
                if m != self.manifold {
                    self.d_zfs_mhz = m.default_zfs();
                }
                self.manifold = m;
            }
            "b0_mT" => self.b0_mt = nonneg(key, v)?,
            "d_zfs_MHz" => self.d_zfs_mhz = positive(key, v)?,
            "gamma_e_MHz_per_mT" => self.gamma_e_mhz_per_mt = positive(key, v)?,
            "gamma_n_MHz_per_mT" => self.gamma_n_mhz_per_mt = positive(key, v)?,
            "hyperfine_xx_MHz" => self.hyperfine_xx_mhz = number(key, v)?,
            "hyperfine_yy_MHz" => self.hyperfine_yy_mhz = number(key, v)?,
            "hyperfine_zz_MHz" => self.hyperfine_zz_mhz = number(key, v)?,
            "quadrupole_MHz" => {
                let q: Vec<f64> = v.split(',').map(|t| number(key, t.trim())).collect::<CliResult<_>>()?;
                self.quadrupole_mhz = match q.as_slice() {
                    [a] => [*a; 3],
                    [a, b, c] => [*a, *b, *c],
                    _ => return Err(CliError::config(key, "expected 1 or 3 comma-separated values")),
                };
            }
            "b_sweep_mT" => self.b_sweep_mt = auto(key, v, parse_range)?,
            "freq_grid_MHz" => self.freq_grid_mhz = auto(key, v, parse_range)?,
            "fwhm_MHz" => self.fwhm_mhz = auto(key, v, positive)?,
            "rho" => self.rho = v.parse().map_err(|e| CliError::value(key, e))?,
            "line_shape" => {
                self.line_shape = match v {
                    "lorentzian" => LineShape::Lorentzian,
                    "gaussian" => LineShape::Gaussian,
                    _ => return Err(CliError::config(key, "expected lorentzian or gaussian")),
                }
            }
            "line_strengths" => {
                self.line_strengths = match v {
                    "uniform" => LineStrengths::Uniform,
                    "computed" => LineStrengths::Computed,
                    _ => return Err(CliError::config(key, "expected uniform or computed")),
                }
            }
            "include_upper" => self.include_upper = boolean(key, v)?,
            "branch_ms" => {
                self.branch = match v {
                    "0" => Ms::Zero,
                    "-1" => Ms::Minus,
                    _ => return Err(CliError::value(key, "expected 0 or -1")),
                }
            }
            "mw_pi" => self.mw_pi = boolean(key, v)?,
            "pump_rate_per_s" => self.pump_rate_per_s = nonneg(key, v)?,
            "depol_rate_per_s" => self.depol_rate_per_s = nonneg(key, v)?,
            "pump_mixing" => self.pump_mixing = parse_manifold(v)?,
            "cycles_cap" => self.cycles_cap = count(key, v, 1)?,
            "rf_amplitude_mT" => self.rf_amplitude_mt = nonneg(key, v)?,
            "rf_frequency_MHz" => self.rf_frequency_mhz = auto(key, v, nonneg)?,
            "line_near_MHz" => self.line_near_mhz = nonneg(key, v)?,
            "line_window_MHz" => self.line_window_mhz = positive(key, v)?,
            "initial_state" => self.initial_state = auto(key, v, |k, t| count(k, t, 0))?,
            "target_state" => self.target_state = auto(key, v, |k, t| count(k, t, 0))?,
            "time_grid_us" => self.time_grid_us = auto(key, v, parse_range)?,
            "steps_per_period" => self.steps_per_period = count(key, v, 1)?,
            "input_csv" => self.input_csv = if v == "none" { None } else { Some(v.to_string()) },
            "noise_rel" => self.noise_rel = nonneg(key, v)?,
            "seed" => self.seed = v.parse().map_err(|_| CliError::config(key, format!("`{v}` is not a u64")))?,
            "fix_centres" => self.fix_centres = boolean(key, v)?,
            "decay_terms" => self.decay_terms = count(key, v, 0)?,
            "inject_t2_us" => self.inject_t2_us = if v == "none" { None } else { Some(positive(key, v)?) },
            _ => return Err(CliError::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        fn a<T: Copy>(v: Auto<T>, f: impl Fn(T) -> String) -> String {
            v.get().map_or_else(|| "auto".to_string(), f)
        }
        let q = &self.quadrupole_mhz;
        let values = [
            self.manifold.short_name().to_string(),
            fmt_num(self.b0_mt),
            fmt_num(self.d_zfs_mhz),
            fmt_num(self.gamma_e_mhz_per_mt),
            fmt_num(self.gamma_n_mhz_per_mt),
            fmt_num(self.hyperfine_xx_mhz),
            fmt_num(self.hyperfine_yy_mhz),
            fmt_num(self.hyperfine_zz_mhz),
            if q[0] == q[1] && q[1] == q[2] {
                fmt_num(q[0])
            } else {
                format!("{},{},{}", fmt_num(q[0]), fmt_num(q[1]), fmt_num(q[2]))
            },
            a(self.b_sweep_mt, |r| r.to_string()),
            a(self.freq_grid_mhz, |r| r.to_string()),
            a(self.fwhm_mhz, fmt_num),
            self.rho.to_string(),
            match self.line_shape {
                LineShape::Lorentzian => "lorentzian",
                LineShape::Gaussian => "gaussian",
            }
            .to_string(),
            match self.line_strengths {
                LineStrengths::Uniform => "uniform",
                LineStrengths::Computed => "computed",
            }
            .to_string(),
            self.include_upper.to_string(),
            self.branch.value().to_string(),
            self.mw_pi.to_string(),
            fmt_num(self.pump_rate_per_s),
            fmt_num(self.depol_rate_per_s),
            self.pump_mixing.short_name().to_string(),
            self.cycles_cap.to_string(),
            fmt_num(self.rf_amplitude_mt),
            a(self.rf_frequency_mhz, fmt_num),
            fmt_num(self.line_near_mhz),
            fmt_num(self.line_window_mhz),
            a(self.initial_state, |v| v.to_string()),
            a(self.target_state, |v| v.to_string()),
            a(self.time_grid_us, |r| r.to_string()),
            self.steps_per_period.to_string(),
            self.input_csv.clone().unwrap_or_else(|| "none".into()),
            fmt_num(self.noise_rel),
            self.seed.to_string(),
            self.fix_centres.to_string(),
            self.decay_terms.to_string(),
            self.inject_t2_us.map_or_else(|| "none".into(), fmt_num),
        ];
        KEYS.into_iter().zip(values).collect()
    }

    /// One `key = value` line per key, LF-terminated.
    pub fn dump(&self) -> String {
        self.pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn spin_params(&self) -> CliResult<SpinSystemParams> {
        let mut p = default_params(self.manifold).with_field(self.b0_mt);
        p.d_zfs = self.d_zfs_mhz;
        p.gamma_e = self.gamma_e_mhz_per_mt;
        p.gamma_n = self.gamma_n_mhz_per_mt;
        p.hyperfine = [HyperfineTensor::diagonal(self.hyperfine_xx_mhz, self.hyperfine_yy_mhz, self.hyperfine_zz_mhz); 3];
        p.quadrupole = self.quadrupole_mhz;
        p.validate()?;
        Ok(p)
    }

    /// The same spin constants on the other manifold's zero-field splitting.
    pub fn spin_params_for(&self, manifold: Manifold) -> CliResult<SpinSystemParams> {
        let mut p = self.spin_params()?;
        if manifold != self.manifold {
            p.manifold = manifold;
            p.d_zfs = manifold.default_zfs();
        }
        Ok(p)
    }
}

/// Raw pairs of a config text plus any metadata keys. Later duplicates are
/// rejected rather than silently winning.
pub fn parse_pairs(text: &str) -> CliResult<(BTreeMap<String, String>, BTreeMap<String, String>)> {
    let mut map = BTreeMap::new();
    let mut meta = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Syntax {
                line: n + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            });
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k.is_empty() {
            return Err(CliError::Syntax {
                line: n + 1,
                reason: "empty key".into(),
            });
        }
        let target = if METADATA_KEYS.contains(&k.as_str()) { &mut meta } else { &mut map };
        if target.insert(k.clone(), v).is_some() {
            return Err(CliError::Syntax {
                line: n + 1,
                reason: format!("duplicate key `{k}`"),
            });
        }
    }
    Ok((map, meta))
}

fn parse_manifold(v: &str) -> CliResult<Manifold> {
    Manifold::from_short_name(v).ok_or_else(|| CliError::config("manifold", format!("expected GS or ES, got `{v}`")))
}

fn number(key: &str, v: &str) -> CliResult<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| CliError::config(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::value(key, "must be finite"));
    }
    Ok(x)
}

fn nonneg(key: &str, v: &str) -> CliResult<f64> {
    let x = number(key, v)?;
    if x < 0.0 {
        return Err(CliError::value(key, format!("must be >= 0, got {v}")));
    }
    Ok(x)
}

fn positive(key: &str, v: &str) -> CliResult<f64> {
    let x = number(key, v)?;
    if x <= 0.0 {
        return Err(CliError::value(key, format!("must be > 0, got {v}")));
    }
    Ok(x)
}

fn count(key: &str, v: &str, min: usize) -> CliResult<usize> {
    let n: usize = v
        .parse()
        .map_err(|_| CliError::config(key, format!("`{v}` is not a non-negative integer")))?;
    if n < min {
        return Err(CliError::value(key, format!("must be >= {min}")));
    }
    Ok(n)
}

fn boolean(key: &str, v: &str) -> CliResult<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CliError::config(key, format!("expected true or false, got `{v}`"))),
    }
}

fn parse_range(key: &str, v: &str) -> CliResult<Range> {
    v.parse().map_err(|e: String| CliError::value(key, e))
}

fn auto<T>(key: &str, v: &str, f: impl Fn(&str, &str) -> CliResult<T>) -> CliResult<Auto<T>> {
    if v == "auto" {
        Ok(Auto::Auto)
    } else {
        f(key, v).map(Auto::Set)
    }
}
