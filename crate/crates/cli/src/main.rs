//! `sumtree`: plan, solve and stress-test addition trees from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 size cap exceeded.

use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sumtree::fpsim::{round_all, simulate_adversarial};
use sumtree::hardness::parse_3par;
use sumtree::io::drop_zeros;
use sumtree::oracle::{optimal_cost_dp_capped, DEFAULT_DP_CAP, MAX_DP_CAP};
use sumtree::tree::serialize;
use sumtree::{
    parse_value, parse_values, plan, reduce_to_addition_tree, simulate, Error, ErrorModel, PlanOptions, Precision,
    Strategy, Value,
};

#[derive(Parser, Debug)]
#[command(name = "sumtree", version, about = "Low-error addition trees for floating-point sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an addition tree with a chosen strategy and report its cost.
    Plan(PlanArgs),
    /// Exact minimum cost and a witness tree (small inputs only).
    Oracle(OracleArgs),
    /// Turn a 3-partition instance into an addition-tree instance.
    Reduce(ReduceArgs),
    /// Evaluate a planned tree in simulated binary floating point.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Values file, one value per line; `-` reads standard input.
    input: PathBuf,

    /// Drop zero values with a warning instead of rejecting the input.
    #[arg(long)]
    drop_zeros: bool,
}

#[derive(Args, Debug)]
struct TreeArgs {
    #[arg(long, default_value = "huffman", value_parser = parse_strategy)]
    strategy: Strategy,

    /// Group exponent for the grouped strategy (groups of 2^t values).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=62))]
    t: Option<u32>,

    /// Assert that the input is sorted nondecreasing; enables linear-time paths.
    #[arg(long)]
    sorted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Sexpr,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    tree: TreeArgs,

    /// Unit roundoff as a rational literal, e.g. `2^-53` is `1/9007199254740992`.
    #[arg(long, value_parser = parse_alpha, conflicts_with = "precision")]
    alpha: Option<ErrorModel>,

    /// Significand bits; sets alpha to 2^-p.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=1_000_000))]
    precision: Option<u32>,

    /// Also compute the optimal cost and the observed ratio.
    #[arg(long)]
    with_oracle: bool,

    #[arg(long, default_value_t = DEFAULT_DP_CAP, value_parser = parse_cap)]
    oracle_cap: usize,

    #[arg(long, value_enum, default_value = "json")]
    output: OutputFormat,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, default_value_t = DEFAULT_DP_CAP, value_parser = parse_cap)]
    oracle_cap: usize,

    #[arg(long, value_enum, default_value = "json")]
    output: OutputFormat,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Instance file: `K m` followed by the 3m integers.
    input: PathBuf,

    /// Where to write the values file [default: <input>.x.txt].
    #[arg(long)]
    values_out: Option<PathBuf>,

    /// Where to write the parameter sidecar [default: <input>.x.json].
    #[arg(long)]
    sidecar_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    tree: TreeArgs,

    /// Significand bits of the simulated format.
    #[arg(long, default_value_t = 53, value_parser = clap::value_parser!(u32).range(2..=1_000_000))]
    precision: u32,

    /// Round the inputs to the precision instead of rejecting unrepresentable ones.
    #[arg(long)]
    round_inputs: bool,

    /// Push every addition error to +-alpha in the direction of its node value.
    #[arg(long)]
    adversarial: bool,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: Error| {
        let names: Vec<&str> = Strategy::ALL.iter().map(|s| s.name()).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
}

fn parse_alpha(s: &str) -> Result<ErrorModel, String> {
    let v = parse_value(s).map_err(|e| e.to_string())?;
    ErrorModel::new(v).map_err(|e| e.to_string())
}

fn parse_cap(s: &str) -> Result<usize, String> {
    let cap: usize = s.parse().map_err(|_| format!("`{s}` is not a size"))?;
    if cap > MAX_DP_CAP {
        return Err(format!("oracle cap may not exceed {MAX_DP_CAP}"));
    }
    Ok(cap)
}

enum Failure {
    Usage(String),
    Input(String),
    Cap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SizeCap { .. } => Failure::Cap(e.to_string()),
            Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

fn read_values(args: &InputArgs) -> Result<Vec<Value>, Failure> {
    let values = parse_values(&read_text(&args.input)?)?;
    if !args.drop_zeros {
        return Ok(values);
    }
    let (kept, dropped) = drop_zeros(values);
    if !dropped.is_empty() {
        let shown: Vec<String> = dropped.iter().take(10).map(|i| (i + 1).to_string()).collect();
        let more = if dropped.len() > 10 { ", ..." } else { "" };
        eprintln!("warning: dropped {} zero value(s) at value positions {}{more}", dropped.len(), shown.join(", "));
    }
    if kept.is_empty() {
        return Err(Failure::Input("no nonzero values remain".into()));
    }
    Ok(kept)
}

fn check_group_flag(tree: &TreeArgs) -> CmdResult {
    if tree.t.is_some() && tree.strategy != Strategy::Grouped {
        return Err(Failure::Usage(format!("--t applies to the grouped strategy, not {}", tree.strategy)));
    }
    Ok(())
}

fn emit(text: &str) -> CmdResult {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Input(format!("cannot write output: {e}"))),
        _ => Ok(()),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json serialises")
}

fn cmd_plan(args: PlanArgs) -> CmdResult {
    check_group_flag(&args.tree)?;
    let values = read_values(&args.input)?;
    let model = match (args.alpha, args.precision) {
        (Some(m), _) => m,
        (None, Some(p)) => ErrorModel::binary(p),
        (None, None) => ErrorModel::default(),
    };
    let options = PlanOptions {
        group_parameter: args.tree.t,
        sorted: args.tree.sorted,
        model,
        with_oracle: args.with_oracle,
        oracle_cap: args.oracle_cap,
    };
    let report = plan(&values, args.tree.strategy, &options)?;
    match args.output {
        OutputFormat::Json => emit(&report.to_json_string()),
        OutputFormat::Sexpr => emit(&serialize(&report.tree)),
    }
}

fn cmd_oracle(args: OracleArgs) -> CmdResult {
    let values = read_values(&args.input)?;
    let result = optimal_cost_dp_capped(&values, args.oracle_cap)?;
    let witness = serialize(&result.witness);
    match args.output {
        OutputFormat::Json => emit(&pretty(&serde_json::json!({
            "n": values.len(),
            "optimal_cost": result.optimal_cost,
            "witness": witness,
        }))),
        OutputFormat::Sexpr => emit(&witness),
    }
}

fn cmd_reduce(args: ReduceArgs) -> CmdResult {
    let instance = parse_3par(&read_text(&args.input)?)?;
    let reduction = reduce_to_addition_tree(&instance)?;
    let values_out = args.values_out.unwrap_or_else(|| args.input.with_extension("x.txt"));
    let sidecar_out = args.sidecar_out.unwrap_or_else(|| args.input.with_extension("x.json"));
    let sidecar = pretty(&reduction.sidecar_json());
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
    };
    write(&values_out, &reduction.values_file())?;
    write(&sidecar_out, &format!("{sidecar}\n"))?;
    eprintln!(
        "wrote {} values to {} and parameters to {}",
        reduction.x.len(),
        values_out.display(),
        sidecar_out.display()
    );
    emit(&sidecar)
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    check_group_flag(&args.tree)?;
    let precision = Precision::new(args.precision)?;
    let mut values = read_values(&args.input)?;
    if args.round_inputs {
        values = round_all(&values, precision);
        if values.iter().any(Value::is_zero) {
            return Err(Failure::Input("rounding produced a zero value".into()));
        }
    }
    let options = PlanOptions {
        group_parameter: args.tree.t,
        sorted: args.tree.sorted,
        model: ErrorModel::binary(args.precision),
        ..Default::default()
    };
    let report = plan(&values, args.tree.strategy, &options)?;
    let sim = if args.adversarial {
        simulate_adversarial(&report.tree, precision)
    } else {
        simulate(&report.tree, precision)?
    };
    emit(&pretty(&sim.to_json()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
