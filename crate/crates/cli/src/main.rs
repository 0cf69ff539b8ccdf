//! `spikearith`: run, verify and export spiking arithmetic circuits.
//!
//! Exit status: 0 on success, 1 when a verification sweep finds failures,
//! 2 on usage errors, 3 on I/O errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spikearith_core::bricks::{BuildOptions, InequalityVariant, MinMaxMode};
use spikearith_core::verify::{
    sweep, Circuit, CircuitOptions, Mutation, SweepMode, SweepSpec, DEFAULT_SAMPLES, DEFAULT_SEED,
};
use spikearith_core::{DelayStrategy, LeakMode, LoweredNetwork};

/// Overrides the directory for raster, report and netlist files.
const OUT_DIR_ENV: &str = "SPIKEARITH_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "spikearith",
    version,
    about = "Streaming binary arithmetic on spiking neurons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a circuit on concrete operands and print the decoded result.
    Run(RunArgs),
    /// Sweep circuits against their integer oracles.
    Verify(VerifyArgs),
    /// Write a circuit's netlist or Graphviz description.
    Export(ExportArgs),
    /// Load a netlist file and write it back out.
    Import(ImportArgs),
}

#[derive(Args)]
struct CircuitArgs {
    /// adder, not, inequality, mux, minmax, subtractor, scalar_mult, variable_mult
    circuit: String,
    #[arg(long, short = 'k')]
    width: u32,
    /// min or max (minmax)
    #[arg(long, value_parser = parse_via::<MinMaxMode>)]
    mode: Option<MinMaxMode>,
    /// arithmetic or decay (inequality)
    #[arg(long, value_parser = parse_via::<InequalityVariant>)]
    variant: Option<InequalityVariant>,
    /// additive or multiplicative (not)
    #[arg(long, value_parser = parse_via::<LeakMode>)]
    leak: Option<LeakMode>,
    /// Constant factor (scalar_mult)
    #[arg(long)]
    scalar: Option<u64>,
    /// Realize padding with relay neurons instead of long synapses.
    #[arg(long)]
    relay_chain: bool,
}

impl CircuitArgs {
    fn circuit(&self) -> Result<Circuit, Failure> {
        let opts = CircuitOptions {
            leak: self.leak,
            variant: self.variant,
            mode: self.mode,
            scalar: self.scalar,
        };
        Circuit::named(&self.circuit, &opts).map_err(usage)
    }

    fn lower(&self) -> Result<(Circuit, LoweredNetwork), Failure> {
        let c = self.circuit()?;
        let strategy = if self.relay_chain {
            DelayStrategy::RelayChain
        } else {
            DelayStrategy::Synapse
        };
        let net = c
            .lower(self.width, &BuildOptions::default(), strategy)
            .map_err(usage)?;
        Ok((c, net))
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[arg(long)]
    a: Option<i64>,
    #[arg(long)]
    b: Option<i64>,
    #[arg(long)]
    x: Option<i64>,
    #[arg(long)]
    y: Option<i64>,
    /// 0 routes A to the mux output, 1 routes B.
    #[arg(long)]
    select: Option<i64>,
    /// Print output spike times instead of the decoded value.
    #[arg(long)]
    raw: bool,
    /// Write the spike raster as CSV.
    #[arg(long)]
    raster: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Random,
}

#[derive(Args)]
struct VerifyArgs {
    /// Circuit family or `all`.
    #[arg(long, default_value = "all")]
    circuit: String,
    /// Widths as `N`, `LO..HI` (inclusive) or a comma list.
    #[arg(long, default_value = "1..4", value_parser = parse_widths)]
    widths: Widths,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// JSON report path.
    #[arg(long, default_value = "verify-report.json")]
    report: PathBuf,
    #[arg(long)]
    relay_chain: bool,
    /// Apply the N-th documented mutation (0-based) before sweeping.
    #[arg(long)]
    mutation: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Netlist,
    Dot,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[arg(long, value_enum, default_value = "netlist")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    netlist: PathBuf,
    #[arg(long, value_enum, default_value = "netlist")]
    format: Format,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Io(String),
    Verification,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn parse_via<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

#[derive(Clone)]
struct Widths(Vec<u32>);

fn parse_widths(s: &str) -> Result<Widths, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|e| format!("bad width `{t}`: {e}"))
    };
    let mut out = Vec::new();
    for part in s.split(',') {
        if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
            if lo > hi {
                return Err(format!("empty width range `{part}`"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(num(part)?);
        }
    }
    Ok(Widths(out))
}

fn out_path(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn write(p: &Path, text: &str) -> Result<PathBuf, Failure> {
    let p = out_path(p);
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(&p, text).map_err(|e| io_err(&p, e))?;
    Ok(p)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let (circuit, net) = args.circuit.lower()?;
    let given: BTreeMap<&str, Option<i64>> = BTreeMap::from([
        ("A", args.a),
        ("B", args.b),
        ("X", args.x),
        ("Y", args.y),
        ("select", args.select),
    ]);
    let mut values = Vec::new();
    for (name, _) in circuit.operands(args.circuit.width) {
        let v = given[name]
            .ok_or_else(|| usage(format!("{circuit} needs --{}", name.to_lowercase())))?;
        values.push(v);
    }
    let operands = circuit.bind(args.circuit.width, &values);
    let raster = net.simulate(&operands).map_err(usage)?;
    if let Some(p) = &args.raster {
        let p = write(p, &raster.to_csv())?;
        eprintln!("raster written to {}", p.display());
    }
    let out = circuit.output();
    if args.raw {
        let id = net.network.output(out).map_err(usage)?;
        let times: Vec<String> = raster.spike_times(id).iter().map(u64::to_string).collect();
        let s = &net.schedule[out];
        println!(
            "{out} offset={} width={}: {}",
            s.offset,
            s.width,
            times.join(" ")
        );
    } else {
        println!("{}", net.read(&raster, out).map_err(usage)?);
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let circuits = Circuit::family(&args.circuit).map_err(usage)?;
    let mode = match args.mode {
        ModeArg::Exhaustive => SweepMode::Exhaustive,
        ModeArg::Random => SweepMode::Randomized {
            samples: args.samples,
            seed: args.seed,
        },
    };
    let mut spec = SweepSpec::new(circuits, args.widths.0, mode);
    if args.relay_chain {
        spec.delay = DelayStrategy::RelayChain;
    }
    if let Some(i) = args.mutation {
        let all = Mutation::documented();
        let m = all
            .get(i)
            .ok_or_else(|| usage(format!("mutation index {i} out of range 0..{}", all.len())))?;
        spec.mutation = Some(*m);
    }
    let report = sweep(&spec).map_err(usage)?;
    print!("{}", report.to_text());
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let p = write(&args.report, &json)?;
    eprintln!("report written to {}", p.display());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn render(net: &LoweredNetwork, format: Format) -> String {
    match format {
        Format::Netlist => net.to_netlist_json(),
        Format::Dot => net.to_dot(),
    }
}

fn export(args: ExportArgs) -> Result<(), Failure> {
    let (circuit, net) = args.circuit.lower()?;
    let ext = match args.format {
        Format::Netlist => "netlist.json",
        Format::Dot => "dot",
    };
    let default = PathBuf::from(format!(
        "{}_k{}.{ext}",
        circuit
            .to_string()
            .replace(['[', ']', '='], "_")
            .trim_end_matches('_'),
        args.circuit.width
    ));
    let p = write(
        args.out.as_ref().unwrap_or(&default),
        &render(&net, args.format),
    )?;
    println!("{}", p.display());
    Ok(())
}

fn import(args: ImportArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.netlist).map_err(|e| io_err(&args.netlist, e))?;
    let net = LoweredNetwork::from_netlist_json(&text).map_err(usage)?;
    let p = write(&args.out, &render(&net, args.format))?;
    println!("{}", p.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Verify(a) => verify(a),
        Command::Export(a) => export(a),
        Command::Import(a) => import(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
