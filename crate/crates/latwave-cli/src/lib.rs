//! Batch front-end for the `latwave` library.
//!
//! Every subcommand writes its CSV/JSON outputs into `--out` together with a
//! `<subcommand>.manifest.json` that records the full parameter set, the
//! seed, timestamps and SHA-256 digests of the outputs. `--replay` re-runs a
//! manifest and compares digests.
//!
//! Exit codes: 0 success, 1 replay mismatch or I/O failure, 2 invalid input,
//! 3 cost guard, 4 numerical non-convergence.

pub mod commands;
pub mod manifest;

use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::{Parser, Subcommand};
use serde_json::{Map, Value};

use commands::*;
use manifest::{config_to_argv, params_to_argv, parse_config, read_manifest, sha256_hex, OutputDigest, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_COST: i32 = 3;
pub const EXIT_NONCONVERGENT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "latwave", version, about = "Dispersive estimates for discrete wave equations on the integer lattice")]
pub struct Cli {
    /// Worker threads; 1 gives bitwise reproducible output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// File of `key = value` lines supplying subcommand flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Re-run the manifest and compare output digests.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Fundamental solution G(x,t) at lattice points.
    Green(GreenArgs),
    /// Fitted decay of sup_x |G(x,t)|.
    SupDecay(SupDecayArgs),
    /// Oscillatory integrals for library or user phases.
    Oscint(OscintArgs),
    /// The four-variable cubic phase through its two-variable reduction.
    P4Appendix(P4AppendixArgs),
    /// Newton distance and principal face of a support set.
    Newton(NewtonArgs),
    /// Adaptedness of a two-variable phase.
    Adapted(AdaptedArgs),
    /// Classification of a binary quartic form.
    Quartic(QuarticArgs),
    /// Decay-index calculus.
    IndexCalc(IndexCalcArgs),
    /// Degenerate critical points of the lattice phase.
    SigmaScan(SigmaScanArgs),
    /// Strichartz ratio test on a periodic box.
    Strichartz(StrichartzArgs),
    /// Nonlinear small-data evolution on a periodic box.
    Nls(NlsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Green(_) => "green",
            Command::SupDecay(_) => "sup-decay",
            Command::Oscint(_) => "oscint",
            Command::P4Appendix(_) => "p4-appendix",
            Command::Newton(_) => "newton",
            Command::Adapted(_) => "adapted",
            Command::Quartic(_) => "quartic",
            Command::IndexCalc(_) => "index-calc",
            Command::SigmaScan(_) => "sigma-scan",
            Command::Strichartz(_) => "strichartz",
            Command::Nls(_) => "nls",
        }
    }

    fn positional(&self) -> &'static [&'static str] {
        match self {
            Command::IndexCalc(_) => &["op"],
            _ => &[],
        }
    }

    pub fn params(&self) -> Map<String, Value> {
        let v = match self {
            Command::Green(a) => serde_json::to_value(a),
            Command::SupDecay(a) => serde_json::to_value(a),
            Command::Oscint(a) => serde_json::to_value(a),
            Command::P4Appendix(a) => serde_json::to_value(a),
            Command::Newton(a) => serde_json::to_value(a),
            Command::Adapted(a) => serde_json::to_value(a),
            Command::Quartic(a) => serde_json::to_value(a),
            Command::IndexCalc(a) => serde_json::to_value(a),
            Command::SigmaScan(a) => serde_json::to_value(a),
            Command::Strichartz(a) => serde_json::to_value(a),
            Command::Nls(a) => serde_json::to_value(a),
        };
        match v.expect("argument structs serialize") {
            Value::Object(m) => m,
            _ => unreachable!("argument structs serialize to objects"),
        }
    }

    pub fn to_argv(&self) -> Vec<String> {
        params_to_argv(self.name(), &self.params(), self.positional())
    }

    fn seed_mut(&mut self) -> Option<&mut u64> {
        match self {
            Command::Oscint(a) => Some(&mut a.seed),
            Command::Strichartz(a) => Some(&mut a.seed),
            _ => None,
        }
    }

    fn execute(&self) -> Result<Outputs, CliError> {
        match self {
            Command::Green(a) => green(a),
            Command::SupDecay(a) => sup_decay(a),
            Command::Oscint(a) => oscint(a),
            Command::P4Appendix(a) => p4_appendix(a),
            Command::Newton(a) => newton(a),
            Command::Adapted(a) => adapted(a),
            Command::Quartic(a) => quartic(a),
            Command::IndexCalc(a) => index_calc(a),
            Command::SigmaScan(a) => sigma_scan(a),
            Command::Strichartz(a) => strichartz(a),
            Command::Nls(a) => nls(a),
        }
    }
}

fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Lib(latwave::Error::CostGuard(_)) => EXIT_COST,
        CliError::Lib(latwave::Error::NonConvergent(_)) => EXIT_NONCONVERGENT,
        CliError::Lib(_) | CliError::Usage(_) => EXIT_INVALID,
        CliError::Io(_) => EXIT_FAILURE,
    }
}

fn parse(argv: &[String]) -> Result<Cli, i32> {
    Cli::try_parse_from(argv).map_err(|e| {
        let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        let _ = e.print();
        code
    })
}

const SUBCOMMANDS: [&str; 11] =
    ["green", "sup-decay", "oscint", "p4-appendix", "newton", "adapted", "quartic", "index-calc", "sigma-scan", "strichartz", "nls"];

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Insert config-file flags right after the subcommand name. Keys also
/// given on the command line are dropped from the config.
fn apply_config(argv: &[String]) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(argv) else { return Ok(argv.to_vec()) };
    let Some(pos) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else { return Ok(argv.to_vec()) };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let given: Vec<&str> = argv[pos + 1..].iter().filter_map(|a| a.strip_prefix("--")).map(|a| a.split('=').next().unwrap_or(a)).collect();
    let entries: Vec<_> = parse_config(&text).map_err(CliError::Usage)?.into_iter().filter(|(k, _)| !given.contains(&k.as_str())).collect();
    let extra = config_to_argv(&entries);
    let mut out = argv[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

fn init_threads(n: Option<usize>) -> usize {
    let n = n.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
    // Only the first call per process takes effect.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    n
}

fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var("LATWAVE_SEED") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| CliError::Usage(format!("LATWAVE_SEED={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Run one subcommand, write its outputs and manifest; returns the manifest.
pub fn execute(mut cmd: Command, out: &Path, threads: usize) -> Result<RunManifest, CliError> {
    if let Some(seed) = seed_from_env()? {
        if let Some(s) = cmd.seed_mut() {
            *s = seed;
        }
    }
    let started = Utc::now().to_rfc3339();
    let outputs = cmd.execute()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
    let mut digests = Vec::new();
    for (name, bytes) in &outputs.files {
        let p = out.join(name);
        std::fs::write(&p, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
        digests.push(OutputDigest { path: name.clone(), sha256: sha256_hex(bytes) });
    }
    let manifest = RunManifest {
        subcommand: cmd.name().to_string(),
        params: cmd.params(),
        seed: cmd.seed_mut().map(|s| *s),
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads,
        started,
        finished: Utc::now().to_rfc3339(),
        outputs: digests,
    };
    let p = out.join(format!("{}.manifest.json", cmd.name()));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&p, text + "\n").map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
    print!("{}", outputs.stdout);
    Ok(manifest)
}

fn replay(path: &Path, cli: &Cli) -> i32 {
    let m = match read_manifest(path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let mut argv = vec!["latwave".to_string()];
    argv.extend(params_to_argv(&m.subcommand, &m.params, if m.subcommand == "index-calc" { &["op"] } else { &[] }));
    let parsed = match parse(&argv) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let Some(cmd) = parsed.command else {
        eprintln!("error: manifest names no subcommand");
        return EXIT_INVALID;
    };
    let threads = init_threads(cli.threads.or(Some(m.threads)));
    match execute(cmd, &cli.out, threads) {
        Ok(new) => {
            let mut same = true;
            for old in &m.outputs {
                match new.outputs.iter().find(|o| o.path == old.path) {
                    Some(o) if o.sha256 == old.sha256 => {}
                    Some(_) => {
                        eprintln!("replay: {} differs from the recorded digest", old.path);
                        same = false;
                    }
                    None => {
                        eprintln!("replay: {} was not produced", old.path);
                        same = false;
                    }
                }
            }
            if same {
                eprintln!("replay: all {} outputs match", m.outputs.len());
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point; `argv[0]` is the program name.
pub fn run(argv: Vec<String>) -> i32 {
    let argv = match apply_config(&argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let cli = match parse(&argv) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(path) = &cli.replay {
        return replay(path, &cli);
    }
    let Some(cmd) = cli.command.clone() else {
        eprintln!("error: a subcommand or --replay is required (see --help)");
        return EXIT_INVALID;
    };
    let threads = init_threads(cli.threads);
    match execute(cmd, &cli.out, threads) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parsed(args: &[&str]) -> Command {
        let argv: Vec<String> = std::iter::once("latwave").chain(args.iter().copied()).map(String::from).collect();
        Cli::try_parse_from(argv).unwrap().command.unwrap()
    }

    #[test]
    fn argv_round_trip() {
        for args in [
            &["green", "--d", "2", "--t", "0,1.5", "--x", "-3,4", "--m", "0.5"][..],
            &["index-calc", "combine", "--alpha", "1/3,1/3,1/3", "--a", "-5/6,0", "--b", "-1,0"],
            &["oscint", "--phase", "t444", "--t-min", "10", "--t-max", "1000", "--probe", "--seed", "9"],
            &["nls", "--layout", "full", "--linear", "--richardson-tol", "1e-6"],
            &["sigma-scan", "--k", "3,4"],
        ] {
            let cmd = parsed(args);
            let mut argv = vec!["latwave".to_string()];
            argv.extend(cmd.to_argv());
            assert_eq!(Cli::try_parse_from(&argv).unwrap().command.unwrap(), cmd, "{argv:?}");
        }
    }

    #[test]
    fn config_inserted_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("latwave-cfg-{}", std::process::id()));
        std::fs::write(&dir, "t = 1,2\nm = 0.5\n").unwrap();
        let argv: Vec<String> = ["latwave", "--config", dir.to_str().unwrap(), "green", "--m", "1"].map(String::from).to_vec();
        let full = apply_config(&argv).unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!(full[3..], ["green", "--t", "1,2", "--m", "1"].map(String::from));
    }
}
