//! File formats, configuration and reproducible runs on top of
//! `spinlab_core`. The `hbn-spinlab` binary is a thin clap layer over this.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub use commands::{constants_text, execute, Command, Run};
pub use config::{RunConfig, KEYS};
pub use error::{CliError, CliResult};

/// Reads `file` (if any), layers `overrides` on top, and resolves the result.
pub fn resolve_config(file: Option<&Path>, overrides: &[(String, String)]) -> CliResult<RunConfig> {
    let mut map = match file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            config::parse_pairs(&text)?.0
        }
        None => BTreeMap::new(),
    };
    for (k, v) in overrides {
        if config::METADATA_KEYS.contains(&k.as_str()) {
            continue;
        }
        map.insert(k.clone(), v.clone());
    }
    RunConfig::from_map(&map)
}

/// Command and config recorded in a manifest.
pub fn read_manifest(path: &Path) -> CliResult<(Command, RunConfig)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let (map, meta) = config::parse_pairs(&text)?;
    let name = meta
        .get("command")
        .ok_or_else(|| CliError::config("command", "manifest does not name a command"))?;
    let command = Command::from_name(name).ok_or_else(|| CliError::config("command", format!("unknown command `{name}`")))?;
    Ok((command, RunConfig::from_map(&map)?))
}

/// Re-executes a manifest. Relative inputs resolve against its directory.
pub fn rerun(path: &Path) -> CliResult<Run> {
    let (command, mut cfg) = read_manifest(path)?;
    execute(command, &mut cfg, path.parent().unwrap_or(Path::new(".")))
}

/// One entry of the reproduction recipe list.
#[derive(Debug, Clone)]
pub struct Recipe {
    pub name: &'static str,
    pub command: Command,
    pub overrides: &'static [(&'static str, &'static str)],
}

/// Recipes exercised by `repro`, one per kind of output.
pub fn recipes() -> Vec<Recipe> {
    vec![
        Recipe {
            name: "levels_es",
            command: Command::Levels,
            overrides: &[("manifold", "ES"), ("b_sweep_mT", "60:90:0.5")],
        },
        Recipe {
            name: "odmr_unpolarized",
            command: Command::Odmr,
            overrides: &[("b0_mT", "20"), ("rho", "uniform-multiplicity")],
        },
        Recipe {
            name: "odnmr_pi",
            command: Command::Nmr,
            overrides: &[("b0_mT", "74"), ("mw_pi", "true")],
        },
        Recipe {
            name: "odnmr_reference",
            command: Command::Nmr,
            overrides: &[("b0_mT", "74"), ("mw_pi", "false")],
        },
        Recipe {
            name: "pump_sweep",
            command: Command::Pump,
            overrides: &[("b_sweep_mT", "7:110:1")],
        },
        Recipe {
            name: "rabi_74",
            command: Command::Rabi,
            overrides: &[("b0_mT", "74")],
        },
        Recipe {
            name: "fit_odmr_synthetic",
            command: Command::FitOdmr,
            overrides: &[("b0_mT", "20"), ("rho", "pumped"), ("noise_rel", "0.01"), ("seed", "7")],
        },
        Recipe {
            name: "fit_rabi_synthetic",
            command: Command::FitRabi,
            overrides: &[("inject_t2_us", "3.5"), ("noise_rel", "0.01"), ("seed", "7")],
        },
    ]
}

/// Outcome of reproducing one recipe.
#[derive(Debug, Clone)]
pub struct ReproCheck {
    pub name: &'static str,
    pub dir: PathBuf,
    /// Files whose bytes differ between the first run and the rerun.
    pub mismatched: Vec<String>,
}

/// Runs each recipe into `out/<name>`, re-executes it from the manifest it
/// wrote, and compares every file byte for byte.
pub fn repro(out: &Path) -> CliResult<Vec<ReproCheck>> {
    let mut checks = Vec::new();
    for r in recipes() {
        let overrides: Vec<(String, String)> =
            r.overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let mut cfg = resolve_config(None, &overrides)?;
        let dir = out.join(r.name);
        let first = execute(r.command, &mut cfg, &dir)?;
        first.write(&dir)?;
        let second = rerun(&dir.join(output::MANIFEST_FILE))?;
        let mut mismatched = Vec::new();
        for (name, contents) in &second.files {
            let path = dir.join(name);
            let on_disk = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
            if on_disk != contents.as_bytes() {
                mismatched.push(name.clone());
            }
        }
        if second.files.len() != first.files.len() {
            mismatched.push("<file set>".into());
        }
        checks.push(ReproCheck {
            name: r.name,
            dir,
            mismatched,
        });
    }
    Ok(checks)
}
