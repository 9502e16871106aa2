//! `kdveq`: classify KdV-type equations, print their invariants, decide
//! contact equivalence and check structure equations. Output is JSON.

mod batch;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "kdveq", version, about = "Contact classification of u_xxx = u_t + Q(u, u_x)")]
pub struct Cli {
    /// Worker threads for sampling and search (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print a human summary to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct EquationArgs {
    /// Q(u, ux) in the expression grammar.
    #[arg(long)]
    q: String,
    /// Parameter value, e.g. `C=2`. Repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Keep unbound parameters symbolic.
    #[arg(long)]
    generic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Subclass and second partials of Q.
    Classify {
        #[command(flatten)]
        eq: EquationArgs,
        #[arg(long)]
        id: Option<String>,
    },
    /// Symbolic invariants, optionally evaluated at a jet point.
    Invariants {
        #[command(flatten)]
        eq: EquationArgs,
        /// Jet point `u,ux,w,u_t,v_t`.
        #[arg(long, value_name = "U,V,W,UT,VT")]
        at: Option<String>,
        /// Use the alternative readings of the doubtful invariant formulas.
        #[arg(long)]
        alternate: bool,
        #[arg(long)]
        id: Option<String>,
    },
    /// Decide contact equivalence of two equations.
    Equiv {
        #[arg(long)]
        qa: String,
        #[arg(long)]
        qb: String,
        /// Parameter value for the first equation. Repeatable.
        #[arg(long = "param-a", value_name = "NAME=VALUE")]
        params_a: Vec<String>,
        /// Parameter value for the second equation. Repeatable.
        #[arg(long = "param-b", value_name = "NAME=VALUE")]
        params_b: Vec<String>,
        /// Sampling seed (default: $KDVEQ_SEED, else 0).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Overlap tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        id: Option<String>,
    },
    /// Check d(d form) = 0 for a structure-equation model.
    Structure {
        /// Built-in model name.
        #[arg(long, conflicts_with = "model_file", required_unless_present = "model_file")]
        model: Option<String>,
        /// Model in the plain-text format.
        #[arg(long)]
        model_file: Option<std::path::PathBuf>,
        #[arg(long)]
        id: Option<String>,
    },
    /// Run one command per JSON line of FILE (`-` for stdin).
    Batch { file: String },
}

fn init_logging(verbose: bool) {
    let level = if verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.verbose);
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("kdveq: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Batch { file } => batch::run(&file, cli.verbose),
        cmd => commands::execute(cmd, cli.verbose),
    };
    outcome.emit()
}
