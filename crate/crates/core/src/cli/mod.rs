// SPDX-License-Identifier: Apache-2.0

//! The `xt` command line.
//!
//! Exit codes: 0 success, 1 parse error, 2 semantic or mapping error,
//! 3 verification failure, 4 I/O error. Human messages go to the diagnostic
//! stream, machine output to the data stream.

use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::gatelib::{builtin_library, TemplateSet};
use crate::mapper::{map_network, MapOptions, PolySpec, Style};
use crate::metrics::{compare_cmos, emit_report, CmosRefLibrary, ReportFormat};
use crate::netlist::{parse_blif, parse_xtn, serialize_xtn, validate, CrosstalkNetlist, LogicNetwork};
use crate::polymorph::{
    apply_key, brute_force_key, enumerate_functions, keyed_oracle, AttackOutcome, Key, KeyManifest, DEFAULT_KEY_LIMIT,
};
use crate::sim::{self, verify_equivalence, write_csv, write_vcd, Stimulus, Strategy, DEFAULT_RANDOM_VECTORS};

/// Environment variable naming a template library JSON file.
pub const LIBRARY_ENV: &str = "XT_LIBRARY";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Parse = 1,
    Semantic = 2,
    VerifyFailed = 3,
    Io = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn fail(code: ExitCode, message: impl fmt::Display) -> CliError {
    CliError { code, message: message.to_string() }
}

fn parse_err(path: &Path, e: impl fmt::Display) -> CliError {
    fail(ExitCode::Parse, format!("{}: {e}", path.display()))
}

fn semantic(e: impl fmt::Display) -> CliError {
    fail(ExitCode::Semantic, e)
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    fail(ExitCode::Io, format!("{}: {e}", path.display()))
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("bad seed {s:?}: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "xt", version, about = "Crosstalk gate mapping, simulation and costing")]
pub struct Cli {
    /// Template library JSON (overrides XT_LIBRARY; defaults to the builtin set).
    #[arg(long, global = true)]
    pub library: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, value_parser = parse_seed, default_value = "0xC0FFEE")]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map a BLIF network onto the gate library.
    Map(MapArgs),
    /// Simulate a netlist under a stimulus file.
    Sim(SimArgs),
    /// Check a netlist against a reference BLIF.
    Verify(VerifyArgs),
    /// Transistor counts against the CMOS reference.
    Report(ReportArgs),
    /// Polymorphic key operations.
    #[command(subcommand)]
    Key(KeyCommand),
}

#[derive(Debug, Args)]
pub struct MapArgs {
    pub input: PathBuf,
    /// Output netlist; the report and key manifest are written beside it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "nand-nand")]
    pub style: Style,
    #[arg(long, default_value_t = 4)]
    pub fanout_limit: usize,
    #[arg(long)]
    pub no_composites: bool,
    /// Nodes to realize as polymorphic cells, `node` or `node:PAIR`.
    #[arg(long, value_delimiter = ',')]
    pub poly: Vec<PolySpec>,
}

/// Key for designs with free control nets.
#[derive(Debug, Args, Default)]
pub struct KeyArgs {
    /// Key as hex, first control in the least significant bit.
    #[arg(long)]
    pub key: Option<String>,
    /// Key manifest JSON; its control order applies to `--key` too.
    #[arg(long)]
    pub keys: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    pub design: PathBuf,
    #[arg(long)]
    pub stimulus: PathBuf,
    #[arg(long)]
    pub vcd: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Clock periods per stimulus row.
    #[arg(long)]
    pub settle: Option<usize>,
    #[command(flatten)]
    pub key: KeyArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub design: PathBuf,
    #[arg(long)]
    pub against: PathBuf,
    #[arg(long, conflicts_with = "random")]
    pub exhaustive: bool,
    /// Number of seeded random vectors.
    #[arg(long)]
    pub random: Option<usize>,
    #[command(flatten)]
    pub key: KeyArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub design: PathBuf,
    #[arg(long)]
    pub against: PathBuf,
    #[arg(long, default_value = "text")]
    pub format: ReportFormat,
}

#[derive(Debug, Subcommand)]
pub enum KeyCommand {
    /// Bind every free control and write the configured netlist.
    Apply {
        design: PathBuf,
        #[command(flatten)]
        key: KeyArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Count the distinct functions over all keys.
    Enumerate {
        design: PathBuf,
        #[arg(long, default_value_t = DEFAULT_KEY_LIMIT)]
        limit: usize,
    },
    /// Recover a key from a black-box oracle configured with `--oracle-key`.
    Attack {
        design: PathBuf,
        #[arg(long)]
        oracle_key: String,
        #[arg(long)]
        max_queries: Option<u64>,
    },
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::Parse } else { ExitCode::Success };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code as i32;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code as i32,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code as i32
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, data).map_err(|e| io_err(path, e))
}

fn library(cli: &Cli) -> Result<TemplateSet, CliError> {
    let path = cli.library.clone().or_else(|| std::env::var_os(LIBRARY_ENV).map(PathBuf::from));
    match path {
        None => Ok(builtin_library()),
        Some(p) => TemplateSet::from_json(&read(&p)?).map_err(|e| parse_err(&p, e)),
    }
}

fn load_blif(path: &Path) -> Result<LogicNetwork, CliError> {
    parse_blif(&read(path)?).map_err(|e| parse_err(path, e))
}

fn load_design(path: &Path, lib: &TemplateSet, err: &mut dyn Write) -> Result<CrosstalkNetlist, CliError> {
    let netlist = parse_xtn(&read(path)?, lib).map_err(|e| parse_err(path, e))?;
    let diags = validate(&netlist, lib);
    for w in diags.warnings() {
        let _ = writeln!(err, "warning: {}: {}", w.location, w.message);
    }
    if diags.has_errors() {
        let msgs: Vec<String> = diags.errors().map(|d| format!("{}: {}", d.location, d.message)).collect();
        return Err(semantic(format!("{}: {}", path.display(), msgs.join("; "))));
    }
    Ok(netlist)
}

fn key_for(netlist: &CrosstalkNetlist, args: &KeyArgs) -> Result<Option<Key>, CliError> {
    let manifest = match &args.keys {
        Some(p) => {
            let m: KeyManifest = serde_json::from_str(&read(p)?).map_err(|e| parse_err(p, e))?;
            Some(m)
        }
        None => None,
    };
    let key = match (manifest, &args.key) {
        (None, None) => return Ok(None),
        (Some(m), None) => Key::from_manifest(&m),
        (Some(m), Some(hex)) => Key::from_hex(m.controls, hex),
        (None, Some(hex)) => Key::from_hex(netlist.free_controls().into_iter().map(String::from).collect(), hex),
    };
    key.map(Some).map_err(semantic)
}

/// The design with its free controls bound, when a key is given.
fn configured(netlist: CrosstalkNetlist, args: &KeyArgs) -> Result<CrosstalkNetlist, CliError> {
    match key_for(&netlist, args)? {
        Some(k) => apply_key(&netlist, &k).map_err(semantic),
        None => Ok(netlist),
    }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<ExitCode, CliError> {
    let lib = library(cli)?;
    let stdout = |e: io::Error| fail(ExitCode::Io, format!("standard output: {e}"));
    match &cli.command {
        Command::Map(a) => {
            let network = load_blif(&a.input)?;
            let options = MapOptions {
                style: a.style,
                fanout_limit: a.fanout_limit,
                use_composites: !a.no_composites,
                polymorphic_cells: a.poly.clone(),
            };
            let (netlist, report, key) = map_network(&network, &lib, &options).map_err(semantic)?;
            let diags = validate(&netlist, &lib);
            if diags.has_errors() {
                return Err(semantic(format!("mapped netlist is invalid: {diags}")));
            }
            let target = a.output.clone().unwrap_or_else(|| a.input.with_extension("xtn"));
            write_file(&target, serialize_xtn(&netlist).as_bytes())?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            write_file(&sibling(&target, ".map.json"), json.as_bytes())?;
            if key.width() > 0 {
                let json = serde_json::to_string_pretty(&key.manifest()).expect("manifest serializes") + "\n";
                write_file(&sibling(&target, ".keys.json"), json.as_bytes())?;
            }
            let _ = writeln!(
                err,
                "mapped {}: {} instances, {} transistors",
                report.design,
                netlist.instances.len(),
                report.total
            );
            writeln!(out, "{}", target.display()).map_err(stdout)?;
        }
        Command::Sim(a) => {
            let netlist = configured(load_design(&a.design, &lib, err)?, &a.key)?;
            let text = read(&a.stimulus)?;
            let stimulus = Stimulus::parse(&text).map_err(|e| parse_err(&a.stimulus, e))?;
            let trace = sim::run(&netlist, &lib, &stimulus, a.settle).map_err(semantic)?;
            if let Some(p) = &a.vcd {
                let mut buf = Vec::new();
                write_vcd(&trace, &mut buf).map_err(|e| io_err(p, e))?;
                write_file(p, &buf)?;
            }
            if let Some(p) = &a.csv {
                let mut buf = Vec::new();
                write_csv(&trace, &mut buf).map_err(|e| io_err(p, e))?;
                write_file(p, &buf)?;
            }
            writeln!(out, "{} -> {}", stimulus.inputs.join(" "), trace.outputs.join(" ")).map_err(stdout)?;
            for (row, outs) in stimulus.rows.iter().zip(trace.sampled_outputs()) {
                writeln!(out, "{} -> {}", bits(row), bits(&outs)).map_err(stdout)?;
            }
        }
        Command::Verify(a) => {
            let netlist = configured(load_design(&a.design, &lib, err)?, &a.key)?;
            let reference = load_blif(&a.against)?;
            let strategy = match (a.exhaustive, a.random) {
                (true, _) => Strategy::Exhaustive,
                (false, Some(count)) => Strategy::Random { count, seed: cli.seed },
                (false, None) => Strategy::Auto { count: DEFAULT_RANDOM_VECTORS, seed: cli.seed },
            };
            let report = verify_equivalence(&netlist, &lib, &reference, strategy).map_err(semantic)?;
            writeln!(out, "{}", report.summary()).map_err(stdout)?;
            if let Some(m) = report.mismatches.first() {
                writeln!(out, "counterexample: {}", m.describe(&report)).map_err(stdout)?;
                return Ok(ExitCode::VerifyFailed);
            }
        }
        Command::Report(a) => {
            let netlist = load_design(&a.design, &lib, err)?;
            let network = load_blif(&a.against)?;
            let report =
                compare_cmos(&network.name, &network, &netlist, &lib, &CmosRefLibrary::default()).map_err(semantic)?;
            let mut buf = Vec::new();
            emit_report(std::slice::from_ref(&report), a.format, &mut buf).map_err(stdout)?;
            out.write_all(&buf).map_err(stdout)?;
            if a.format != ReportFormat::Text {
                for w in &report.warnings {
                    let _ = writeln!(err, "warning: {}: {w}", report.design);
                }
            }
        }
        Command::Key(KeyCommand::Apply { design, key, output }) => {
            let netlist = load_design(design, &lib, err)?;
            let k = key_for(&netlist, key)?.ok_or_else(|| semantic("--key or --keys is required"))?;
            let bound = apply_key(&netlist, &k).map_err(semantic)?;
            write_file(output, serialize_xtn(&bound).as_bytes())?;
            writeln!(out, "{}", output.display()).map_err(stdout)?;
        }
        Command::Key(KeyCommand::Enumerate { design, limit }) => {
            let netlist = load_design(design, &lib, err)?;
            let atlas = enumerate_functions(&netlist, &lib, *limit, cli.seed).map_err(semantic)?;
            writeln!(out, "{} distinct functions over {} keys", atlas.distinct_functions(), atlas.keys())
                .map_err(stdout)?;
            for class in atlas.classes() {
                let keys: Vec<String> =
                    class.iter().map(|&k| Key::from_value(atlas.controls.clone(), k).to_hex()).collect();
                writeln!(out, "keys {}", keys.join(" ")).map_err(stdout)?;
            }
        }
        Command::Key(KeyCommand::Attack { design, oracle_key, max_queries }) => {
            let netlist = load_design(design, &lib, err)?;
            let controls = netlist.free_controls().into_iter().map(String::from).collect();
            let secret = Key::from_hex(controls, oracle_key).map_err(semantic)?;
            let mut oracle = keyed_oracle(&netlist, &lib, &secret).map_err(semantic)?;
            let report =
                brute_force_key(&netlist, &lib, &mut oracle, max_queries.unwrap_or(u64::MAX)).map_err(semantic)?;
            match &report.outcome {
                AttackOutcome::Recovered(k) => writeln!(out, "recovered {}", k.to_hex()),
                AttackOutcome::Ambiguous(ks) => {
                    let hex: Vec<String> = ks.iter().map(Key::to_hex).collect();
                    writeln!(out, "ambiguous {}", hex.join(" "))
                }
                AttackOutcome::NotFound => writeln!(out, "not found"),
            }
            .map_err(stdout)?;
            writeln!(out, "queries {}", report.queries).map_err(stdout)?;
        }
    }
    Ok(ExitCode::Success)
}
