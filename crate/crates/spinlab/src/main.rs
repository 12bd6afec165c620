use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spinlab::output::{write_atomic, MANIFEST_FILE};
use spinlab::{constants_text, execute, repro, rerun, resolve_config, CliError, CliResult, Command, Run};

/// Spin simulator for the boron-vacancy defect in hBN and its three
/// nearest 14N nuclei.
#[derive(Parser)]
#[command(name = "hbn-spinlab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the embedded constants table.
    Constants,
    /// Energy levels over a field sweep.
    Levels(RunArgs),
    /// Synthetic ODMR spectrum.
    Odmr(RunArgs),
    /// Synthetic ODNMR spectrum of one electron branch.
    Nmr(RunArgs),
    /// Steady-state nuclear polarization over a field sweep.
    Pump(RunArgs),
    /// Driven nuclear Rabi oscillation.
    Rabi(RunArgs),
    /// Seven-Lorentzian fit of an ODMR spectrum.
    FitOdmr(RunArgs),
    /// Damped-cosine fit of a Rabi trace.
    FitRabi(RunArgs),
    /// Print the resolved configuration.
    Config(RunArgs),
    /// Re-execute a run from its manifest.
    Rerun {
        manifest: PathBuf,
        /// Output directory [default: <manifest dir>/rerun].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every recipe, rerun each from its manifest and compare bytes.
    Repro {
        #[arg(long, default_value = "hbn-spinlab-out/repro")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: hbn-spinlab-out/<command>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// GS or ES.
    #[arg(long)]
    manifold: Option<String>,
    /// Field in mT, or a start:stop:step sweep.
    #[arg(long = "b")]
    b: Option<String>,
    /// uniform-multiplicity, pumped, delta:<m> or 7 weights.
    #[arg(long)]
    rho: Option<String>,
    /// Line width, MHz.
    #[arg(long)]
    fwhm: Option<String>,
    /// start:stop:step; frequency in MHz, or time in µs for rabi and fit-rabi.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// CSV to fit instead of synthetic data.
    #[arg(long)]
    input: Option<String>,
    /// Any config key, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn overrides(&self, command: Option<Command>) -> CliResult<Vec<(String, String)>> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        };
        push("manifold", &self.manifold);
        if let Some(b) = &self.b {
            let key = if b.contains(':') { "b_sweep_mT" } else { "b0_mT" };
            push(key, &self.b);
        }
        push("rho", &self.rho);
        push("fwhm_MHz", &self.fwhm);
        let grid_key = match command {
            Some(Command::Rabi | Command::FitRabi) => "time_grid_us",
            _ => "freq_grid_MHz",
        };
        push(grid_key, &self.grid);
        push("seed", &self.seed);
        push("input_csv", &self.input);
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }
}

fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("HBN_SPINLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| CliError::Usage(format!("HBN_SPINLAB_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn print_run(run: &Run, dir: &Path) {
    for (k, v) in &run.summary {
        println!("{k} = {v}");
    }
    println!("output = {}", dir.display());
}

fn run_command(command: Command, args: &RunArgs) -> CliResult<()> {
    let mut cfg = resolve_config(args.config.as_deref(), &args.overrides(Some(command))?)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("hbn-spinlab-out").join(command.name()));
    let base = args
        .config
        .as_deref()
        .and_then(Path::parent)
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    let run = execute(command, &mut cfg, &base)?;
    run.write(&dir)?;
    print_run(&run, &dir);
    Ok(())
}

fn dispatch(cmd: Cmd) -> CliResult<()> {
    init_threads()?;
    match cmd {
        Cmd::Constants => {
            print!("{}", constants_text());
            Ok(())
        }
        Cmd::Levels(a) => run_command(Command::Levels, &a),
        Cmd::Odmr(a) => run_command(Command::Odmr, &a),
        Cmd::Nmr(a) => run_command(Command::Nmr, &a),
        Cmd::Pump(a) => run_command(Command::Pump, &a),
        Cmd::Rabi(a) => run_command(Command::Rabi, &a),
        Cmd::FitOdmr(a) => run_command(Command::FitOdmr, &a),
        Cmd::FitRabi(a) => run_command(Command::FitRabi, &a),
        Cmd::Config(a) => {
            let cfg = resolve_config(a.config.as_deref(), &a.overrides(None)?)?;
            match &a.out {
                Some(path) => write_atomic(path, &cfg.dump()),
                None => {
                    print!("{}", cfg.dump());
                    Ok(())
                }
            }
        }
        Cmd::Rerun { manifest, out } => {
            let run = rerun(&manifest)?;
            let dir = out.unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).join("rerun"));
            run.write(&dir)?;
            print_run(&run, &dir);
            Ok(())
        }
        Cmd::Repro { out } => {
            let checks = repro(&out)?;
            let mut failed = Vec::new();
            for c in &checks {
                if c.mismatched.is_empty() {
                    println!("PASS {} ({})", c.name, c.dir.join(MANIFEST_FILE).display());
                } else {
                    println!("FAIL {} differs: {}", c.name, c.mismatched.join(", "));
                    failed.push(c.name);
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Mismatch(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp
                    | clap::error::ErrorKind::DisplayVersion
                    | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(first.to_string()).one_line());
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::from(e.exit_code())
        }
    }
}
