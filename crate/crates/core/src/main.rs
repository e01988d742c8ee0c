use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use plqnewton::harness::{
    error_exit_code, load_problem, read_problem, run_report, Command, MethodName, PointChoice, RunOptions, ScheduleName,
};
use plqnewton::Error;

#[derive(Parser)]
#[command(name = "plqnewton", version, about = "Newton methods for piecewise linear-quadratic composite problems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the PLQ representation of h.
    Validate(Args),
    /// Certify constraint qualifications, partial smoothness, SOSC and subregularity at a point.
    Certify(Args),
    /// Run a local solver from the start point.
    Solve(Args),
    /// Run a solver and classify its convergence rate.
    Rate(Args),
    /// Compare automatic derivatives of c against finite differences.
    CheckDerivs(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Problem file (JSON).
    file: PathBuf,
    #[arg(long, value_enum)]
    method: Option<MethodName>,
    /// Hessian schedule for `--method quasi`.
    #[arg(long, value_enum, default_value_t = ScheduleName::Exact)]
    schedule: ScheduleName,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Use exact LPs for the pairwise piece-overlap check.
    #[arg(long)]
    strict: bool,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// A point file `{"x": [...], "y": [...]}`, or `random`.
    #[arg(long)]
    point: Option<String>,
}

fn run(cmd: Cmd) -> Result<i32, Error> {
    let (command, args) = match cmd {
        Cmd::Validate(a) => (Command::Validate, a),
        Cmd::Certify(a) => (Command::Certify, a),
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Rate(a) => (Command::Rate, a),
        Cmd::CheckDerivs(a) => (Command::CheckDerivs, a),
    };
    let loaded = if command == Command::Validate {
        read_problem(&args.file, args.seed, args.strict)?
    } else {
        load_problem(&args.file, args.seed, args.strict)?
    };
    let point = match args.point.as_deref() {
        None => PointChoice::Default,
        Some("random") => PointChoice::Random,
        Some(p) => PointChoice::File(PathBuf::from(p)),
    };
    let opts = RunOptions {
        method: args.method,
        schedule: args.schedule,
        tol: args.tol,
        max_iter: args.max_iter,
        seed: args.seed,
        point,
    };
    let report = run_report(&loaded, command, &opts)?;
    print!("{}", report.to_text());
    if let Some(path) = &args.json {
        std::fs::write(path, report.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &args.trace {
        let trace = report.trace.as_ref().ok_or_else(|| Error::Argument("--trace needs a solve or rate command".into()))?;
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        trace.write_csv(file)?;
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
