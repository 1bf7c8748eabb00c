//! Command-line front end: `solve`, `compare` and `coc`.
//!
//! Exit codes: 0 success (converged / grid executed / order computed),
//! 1 usage error, 2 divergence or no usable convergence data,
//! 3 derivative breakdown.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{self, format_significant, ConvergenceReport};
use crate::bench::{self, builtin_suite, format_records, format_table, run_comparison, OutputFormat, SuiteEntry};
use crate::error::Error;
use crate::methods::{iterate, FsVariant, Method, DEFAULT_HAAR_POINTS};
use crate::problem::{Outcome, Status, StopCriteria};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "haar-newton",
    version,
    about = "Third-order Newton-type root finders and their comparison"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one built-in equation with one method.
    Solve(SolveArgs),
    /// Run a grid of equations by methods and print the comparison table.
    Compare(CompareArgs),
    /// Estimate the order of convergence and the asymptotic error constant.
    Coc(CocArgs),
}

/// Settings shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct RunOpts {
    /// Haar resolution M; the new method uses 2M nodes.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,
    /// Node count for the new method, overrides --m.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub points: Option<u64>,
    /// Starting point, overrides the built-in x0.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Step and residual tolerance.
    #[arg(long, default_value_t = StopCriteria::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = StopCriteria::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Inner point of the FS step: as-printed or standard-midpoint.
    #[arg(long, default_value = "standard-midpoint")]
    pub fs_variant: FsVariant,
    /// Write the report to PATH instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_parser = parse_function)]
    pub function: String,
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    #[command(flatten)]
    pub run: RunOpts,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    pub format: OutputFormat,
    /// Also print every iterate and its residual.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Comma-separated equation names (default: all).
    #[arg(long, value_delimiter = ',', value_parser = parse_function)]
    pub functions: Vec<String>,
    /// Comma-separated method labels (default: wf,fs,oz,klw,new).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub run: RunOpts,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct CocArgs {
    #[arg(long, value_parser = parse_function)]
    pub function: String,
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    #[command(flatten)]
    pub run: RunOpts,
    /// C2 = f''(a) / (2 f'(a)) at the root, for the theoretical constant.
    #[arg(long, allow_negative_numbers = true, requires = "c3")]
    pub c2: Option<f64>,
    /// C3 = f'''(a) / (6 f'(a)) at the root.
    #[arg(long, allow_negative_numbers = true, requires = "c2")]
    pub c3: Option<f64>,
    /// Root to measure errors against (default: the run's final iterate).
    #[arg(long, allow_negative_numbers = true)]
    pub root: Option<f64>,
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    pub format: String,
}

fn parse_function(s: &str) -> Result<String, Error> {
    bench::suite_entry(s).map(|_| s.to_string())
}

fn parse_method(s: &str) -> Result<Method, Error> {
    s.parse()
}

fn parse_format(s: &str) -> Result<OutputFormat, Error> {
    s.parse()
}

impl RunOpts {
    fn criteria(&self) -> Result<StopCriteria, Error> {
        StopCriteria::new(self.tol, self.tol, self.max_iter, StopCriteria::DEFAULT_ESCAPE_RADIUS)
    }

    fn haar_points(&self) -> usize {
        self.points.unwrap_or(2 * self.m) as usize
    }

    fn entry(&self, name: &str) -> SuiteEntry {
        let mut entry = bench::suite_entry(name).expect("validated by the parser");
        if let Some(x0) = self.x0 {
            entry.x0 = x0;
        }
        entry
    }
}

/// Applies `--m/--points` and `--fs-variant` to methods given by their bare
/// labels (`new`, `fs`); labels naming a node count or variant keep it.
fn configured(run: &RunOpts, method: Method) -> Method {
    match method {
        Method::HaarNewton { points } if points == DEFAULT_HAAR_POINTS => Method::HaarNewton {
            points: run.haar_points(),
        },
        Method::Fs(v) if v == FsVariant::default() => Method::Fs(run.fs_variant),
        m => m,
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };

    let (run_opts, result) = match &cli.command {
        Command::Solve(a) => (&a.run, cmd_solve(a)),
        Command::Compare(a) => (&a.run, cmd_compare(a)),
        Command::Coc(a) => (&a.run, cmd_coc(a)),
    };
    let (report, code) = match result {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };

    match &run_opts.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &report) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => {
            if stdout.write_all(report.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
        }
    }
    code
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::Converged => EXIT_OK,
        Status::Diverged | Status::MaxIterReached => EXIT_NOT_CONVERGED,
        Status::DerivativeBreakdown => EXIT_BREAKDOWN,
    }
}

fn single_run(function: &str, method: Method, opts: &RunOpts) -> Result<(SuiteEntry, Method, Outcome), Error> {
    let criteria = opts.criteria()?;
    let entry = opts.entry(function);
    let method = configured(opts, method);
    let outcome = iterate(method, &entry.problem, entry.x0, &criteria);
    Ok((entry, method, outcome))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<(String, i32), Error> {
    let (entry, method, outcome) = single_run(&args.function, args.method, &args.run)?;
    let row = bench::ComparisonRow {
        function: entry.problem.name().to_string(),
        x0: entry.x0,
        method,
        outcome,
    };
    let code = status_code(row.outcome.status);

    let mut out = match args.format {
        OutputFormat::Text => {
            let rec = row.record();
            format!(
                "function    {}\nx0          {}\nmethod      {}\nstatus      {}\nxn          {}\nIT          {}\nNFE         {}\n",
                rec.function, rec.x0, rec.method, rec.status, rec.root, rec.iterations, rec.nfe
            )
        }
        fmt => format_records(&[row.record()], fmt),
    };
    if args.trace {
        out.push_str("\n n  x_n                     f(x_n)\n");
        let trace = &row.outcome.trace;
        for (n, (x, fx)) in trace.iterates.iter().zip(&trace.residuals).enumerate() {
            out.push_str(&format!(
                "{n:>2}  {:<22}  {}\n",
                format_significant(*x, 17),
                format_significant(*fx, 6)
            ));
        }
    }
    Ok((out, code))
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(String, i32), Error> {
    let criteria = args.run.criteria()?;
    let suite: Vec<SuiteEntry> = if args.functions.is_empty() {
        builtin_suite()
            .into_iter()
            .map(|mut e| {
                if let Some(x0) = args.run.x0 {
                    e.x0 = x0;
                }
                e
            })
            .collect()
    } else {
        args.functions.iter().map(|name| args.run.entry(name)).collect()
    };
    let methods: Vec<Method> = if args.methods.is_empty() {
        Method::standard_lineup()
    } else {
        args.methods.clone()
    };
    let methods: Vec<Method> = methods.into_iter().map(|m| configured(&args.run, m)).collect();
    let table = run_comparison(&suite, &methods, &criteria);
    Ok((format_table(&table, args.format), EXIT_OK))
}

#[derive(Debug, Serialize)]
struct CocReport<'a> {
    function: &'a str,
    method: String,
    status: &'static str,
    iterations: usize,
    root: f64,
    coc: Option<f64>,
    error_constant_empirical: Option<f64>,
    error_constant_theoretical: Option<f64>,
    usable_triples: usize,
}

pub fn cmd_coc(args: &CocArgs) -> Result<(String, i32), Error> {
    let (entry, method, outcome) = single_run(&args.function, args.method, &args.run)?;
    let constants = match (method, args.c2, args.c3) {
        (Method::HaarNewton { points }, Some(c2), Some(c3)) => Some((c2, c3, points)),
        _ => None,
    };
    let measurable = outcome.status.is_converged() || args.root.is_some();
    let root = args.root.unwrap_or(outcome.root);

    let (coc, empirical, usable) = if measurable {
        let rep = ConvergenceReport::new(&outcome.trace, root, constants);
        (
            analysis::coc(&outcome.trace, root).ok(),
            analysis::empirical_error_constant(&outcome.trace, root).ok(),
            rep.usable_triples,
        )
    } else {
        (None, None, 0)
    };
    let theoretical = constants.map(|(c2, c3, n)| analysis::theoretical_error_constant(c2, c3, n));

    let report = CocReport {
        function: entry.problem.name(),
        method: method.to_string(),
        status: outcome.status.as_str(),
        iterations: outcome.iterations,
        root,
        coc,
        error_constant_empirical: empirical,
        error_constant_theoretical: theoretical,
        usable_triples: usable,
    };
    let code = if coc.is_some() { EXIT_OK } else { EXIT_NOT_CONVERGED };

    let out = if args.format == "json" {
        let mut s = serde_json::to_string_pretty(&report).expect("report serialises");
        s.push('\n');
        s
    } else {
        let num = |v: Option<f64>| v.map_or_else(|| "unavailable".to_string(), |v| format_significant(v, 6));
        let mut s = format!(
            "function    {}\nmethod      {}\nstatus      {}\nIT          {}\nroot        {}\ncoc         {}\nC empirical {}\n",
            report.function,
            report.method,
            report.status,
            report.iterations,
            format_significant(root, analysis::ROOT_DIGITS),
            num(coc),
            num(empirical),
        );
        if theoretical.is_some() {
            s.push_str(&format!("C theory    {}\n", num(theoretical)));
        }
        s
    };
    Ok((out, code))
}
