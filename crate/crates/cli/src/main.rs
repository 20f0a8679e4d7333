mod commands;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use circuitum::boolean::{ReversibilityMethod, DEFAULT_TABLE_CAP};
use clap::{Parser, Subcommand, ValueEnum};

use commands::Output;
use error::CliError;

#[derive(Parser)]
#[command(name = "circuitum", version, about = "Validate, slice, schedule and simulate circuits")]
struct Cli {
    /// Emit one JSON object on standard output instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Gates,
    Table,
    Cross,
}

#[derive(Subcommand)]
enum Command {
    /// Check a circuit file; exit 1 if it has diagnostics or violations.
    Validate { file: PathBuf },
    /// Width, depth, gate count, balancedness and the timeline table.
    Info { file: PathBuf },
    /// Print a coherent partition of the gates.
    Schedule {
        file: PathBuf,
        /// eager, lazy, linear, or an explicit partition like "G1,G2|G3".
        #[arg(long, default_value = "eager")]
        strategy: String,
    },
    /// Print the slice generated by a convex gate set.
    Slice {
        file: PathBuf,
        #[arg(long)]
        gates: String,
    },
    /// Split a circuit into slices along a coherent convex partition.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        partition: String,
        /// Write one file per part instead of printing them.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Find an isomorphism between two circuits; exit 1 if none exists.
    Isomorphic { a: PathBuf, b: PathBuf },
    /// Evaluate a Boolean circuit on an input word.
    Eval {
        file: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        trace: bool,
    },
    /// Decide reversibility of a Boolean circuit.
    CheckReversible {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "gates")]
        method: Method,
        /// Largest input width for which a full truth table is built.
        #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
        table_cap: usize,
    },
    /// Run a quantum (or permutation-lifted Boolean) circuit on a state.
    Simulate {
        file: PathBuf,
        /// A basis label like "|01>", or a file of `index re im` lines.
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        trace: bool,
    },
    /// Compare eager, lazy, linear and seeded random schedules.
    EquivOrders {
        file: PathBuf,
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Adjacent transpositions between two linear extensions of a poset.
    TransposePath {
        #[arg(long)]
        poset: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
}

fn dispatch(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::Validate { file } => commands::validate(file),
        Command::Info { file } => commands::info(file),
        Command::Schedule { file, strategy } => commands::schedule(file, strategy),
        Command::Slice { file, gates } => commands::slice_cmd(file, gates),
        Command::Decompose { file, partition, out_dir } => commands::decompose_cmd(file, partition, out_dir.as_deref()),
        Command::Isomorphic { a, b } => commands::isomorphic_cmd(a, b),
        Command::Eval { file, input, schedule, trace } => commands::eval(file, input, schedule.as_deref(), *trace),
        Command::CheckReversible { file, method, table_cap } => {
            let m = match method {
                Method::Gates => ReversibilityMethod::ByGates,
                Method::Table => ReversibilityMethod::ByTable,
                Method::Cross => ReversibilityMethod::CrossCheck,
            };
            commands::check_reversible(file, m, *table_cap)
        }
        Command::Simulate { file, input, schedule, trace } => {
            commands::simulate_cmd(file, input.as_deref(), schedule.as_deref(), *trace)
        }
        Command::EquivOrders { file, input, trials, seed, tol } => {
            if tol.is_nan() || *tol < 0.0 {
                return Err(CliError::usage("--tol must be a nonnegative number"));
            }
            commands::equiv_orders(file, input.as_deref(), *trials, *seed, *tol)
        }
        Command::TransposePath { poset, from, to } => commands::transpose_path(poset, from, to),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match dispatch(&cli.command) {
        Ok(o) => {
            for w in &o.warnings {
                eprintln!("warning: {w}");
            }
            if cli.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&o.json).expect("json values serialize"));
            } else {
                let _ = out.write_all(o.text.as_bytes());
            }
            o.exit
        }
        Err(e) => {
            if cli.json {
                let v = serde_json::json!({"error": {"code": e.code, "message": e.message}});
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json values serialize"));
            }
            eprintln!("{e}");
            if e.exit == 2 {
                eprintln!("hint: run `circuitum --help` for usage");
            }
            e.exit
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
