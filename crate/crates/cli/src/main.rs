use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spfit::experiments::{
    compare_reference, default_epsilons, default_ns, error_en, run_table, solve_example,
    CellStatus, ConvergenceTable, RunSettings,
};
use spfit::notation::{format_real, format_sci, parse_real};
use spfit::{Error, Example, LayerMesh, MeshKind, MeshParams, NewtonSettings};

const EXIT_USAGE: u8 = 1;
const EXIT_NO_CONVERGENCE: u8 = 2;
const EXIT_COMPARISON: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "spfit",
    version,
    about = "Fitted finite differences for singularly perturbed reaction-diffusion problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and print the nodal solution.
    Solve(SolveArgs),
    /// Run an error/order table over a grid of epsilon and N.
    Table(TableArgs),
    /// Dump mesh nodes as `index<TAB>x<TAB>h`.
    Mesh(MeshArgs),
    /// Compare a table against the reference values.
    Compare(CompareArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    TsvPlot,
}

#[derive(Args, Debug, Clone)]
struct MeshOpts {
    /// smoothed-shishkin, shishkin or uniform
    #[arg(long, default_value = "smoothed-shishkin", value_parser = parse_mesh)]
    mesh: MeshKind,
    #[arg(long, default_value = "0.25", value_parser = parse_num)]
    q: f64,
    #[arg(long, default_value = "2", value_parser = parse_num)]
    sigma: f64,
}

#[derive(Args, Debug, Clone)]
struct SolverOpts {
    /// Override the example's fitting constant.
    #[arg(long, value_parser = parse_num)]
    gamma: Option<f64>,
    /// Constant initial guess for the interior nodes.
    #[arg(long, value_parser = parse_num, allow_hyphen_values = true)]
    initial_guess: Option<f64>,
    #[arg(long, default_value = "1e-12", value_parser = parse_num)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
}

impl SolverOpts {
    fn settings(&self, mesh: &MeshOpts) -> RunSettings {
        RunSettings {
            newton: NewtonSettings {
                tol: self.tol,
                max_iter: self.max_iter,
                ..NewtonSettings::default()
            },
            q: mesh.q,
            sigma: mesh.sigma,
            gamma: self.gamma,
            initial_guess: self.initial_guess,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, value_parser = parse_example)]
    example: Example,
    /// Perturbation parameter, decimal or `2^-k`.
    #[arg(long, value_parser = parse_num)]
    epsilon: f64,
    /// Number of mesh intervals, decimal or `2^k`.
    #[arg(long, value_parser = parse_count)]
    n: usize,
    #[command(flatten)]
    mesh: MeshOpts,
    #[command(flatten)]
    solver: SolverOpts,
    #[arg(long, value_enum, default_value = "tsv-plot")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long, value_parser = parse_example)]
    example: Example,
    /// Use the reference epsilon and N grids.
    #[arg(long, conflicts_with_all = ["epsilons", "ns"])]
    defaults: bool,
    /// Comma-separated epsilon values.
    #[arg(long, value_delimiter = ',', value_parser = parse_num)]
    epsilons: Vec<f64>,
    /// Comma-separated N values.
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    ns: Vec<usize>,
    #[command(flatten)]
    mesh: MeshOpts,
    #[command(flatten)]
    solver: SolverOpts,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MeshArgs {
    #[arg(long, value_parser = parse_count)]
    n: usize,
    #[arg(long, value_parser = parse_num)]
    epsilon: f64,
    /// Lower bound on f_y entering the transition point.
    #[arg(long, default_value = "1", value_parser = parse_num)]
    m: f64,
    #[command(flatten)]
    mesh: MeshOpts,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Table CSV written by `spfit table`; `-` reads standard input.
    #[arg(long, conflicts_with = "example")]
    input: Option<PathBuf>,
    /// Run the default table for this example instead of reading one.
    #[arg(long, value_parser = parse_example)]
    example: Option<Example>,
    /// Largest accepted relative deviation of E_N, e.g. `2%` or `0.02`.
    #[arg(long, default_value = "2%", value_parser = parse_fraction)]
    threshold: f64,
    /// Largest accepted absolute deviation of Ord.
    #[arg(long, default_value = "0.05", value_parser = parse_num)]
    ord_threshold: f64,
}

fn parse_num(s: &str) -> Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

fn parse_count(s: &str) -> Result<usize, String> {
    let v = parse_num(s)?;
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(format!("'{s}' is not a positive integer"))
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    match s.trim().strip_suffix('%') {
        Some(p) => Ok(parse_num(p)? / 100.0),
        None => parse_num(s),
    }
}

fn parse_example(s: &str) -> Result<Example, String> {
    s.trim_start_matches("example")
        .parse()
        .map_err(|e: Error| e.to_string())
}

fn parse_mesh(s: &str) -> Result<MeshKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    NoConvergence(String),
    Comparison(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence(_) => Failure::NoConvergence(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let settings = args.solver.settings(&args.mesh);
    let (bvp, sol) = solve_example(
        args.example,
        args.epsilon,
        args.n,
        args.mesh.mesh,
        &settings,
    )?;
    eprintln!(
        "example {} eps={} N={} mesh={}: {} Newton iterations, |F y| = {:.3e}",
        args.example,
        format_real(args.epsilon),
        args.n,
        args.mesh.mesh,
        sol.iterations,
        sol.residual_norm
    );
    if let Some(exact) = bvp.exact_fn() {
        eprintln!("E_N = {}", format_sci(error_en(exact.as_ref(), &sol), 5));
    }
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }

    let mut out = open_output(&args.output)?;
    match args.format {
        Format::TsvPlot => {
            for (x, y) in sol.nodes().iter().zip(&sol.values) {
                writeln!(out, "{x:.16e}\t{y:.16e}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "x,y")?;
            for (x, y) in sol.nodes().iter().zip(&sol.values) {
                writeln!(out, "{x:.16e},{y:.16e}")?;
            }
        }
        Format::Json => {
            let doc = serde_json::json!({
                "example": args.example,
                "epsilon": args.epsilon,
                "n": args.n,
                "mesh": args.mesh.mesh,
                "settings": settings,
                "iterations": sol.iterations,
                "residual_norm": sol.residual_norm,
                "nodes": sol.nodes(),
                "values": sol.values,
            });
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::other)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn table(args: TableArgs) -> Result<(), Failure> {
    let epsilons = if args.epsilons.is_empty() {
        default_epsilons()
    } else {
        args.epsilons
    };
    let ns = if args.ns.is_empty() {
        default_ns()
    } else {
        args.ns
    };
    let settings = args.solver.settings(&args.mesh);
    let t = run_table(args.example, &epsilons, &ns, args.mesh.mesh, &settings)?;

    let mut out = open_output(&args.output)?;
    match args.format {
        Format::Csv => t.write_csv(&mut out)?,
        Format::Json => {
            t.write_json(&mut out)?;
            writeln!(out)?;
        }
        Format::TsvPlot => {
            return Err(Failure::Usage(
                "table output supports csv and json only".into(),
            ));
        }
    }
    out.flush()?;

    let failed = t
        .iter_cells()
        .filter(|c| c.status != CellStatus::Ok)
        .count();
    if failed > 0 {
        return Err(Failure::NoConvergence(format!(
            "{failed} cells did not converge"
        )));
    }
    Ok(())
}

fn mesh(args: MeshArgs) -> Result<(), Failure> {
    let params = MeshParams::new(args.n, args.epsilon, args.m)
        .with_q(args.mesh.q)
        .with_sigma(args.mesh.sigma);
    let mesh = LayerMesh::generate(&params, args.mesh.mesh)?;
    if mesh.is_clamped() {
        eprintln!("transition point clamped at q = {}", params.q);
    }
    let mut out = open_output(&args.output)?;
    mesh.write_tsv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), Failure> {
    let t = match (&args.input, args.example) {
        (Some(path), _) if path.as_os_str() == "-" => {
            ConvergenceTable::read_csv(io::stdin().lock())?
        }
        (Some(path), _) => ConvergenceTable::read_csv(BufReader::new(File::open(path)?))?,
        (None, Some(example)) => run_table(
            example,
            &default_epsilons(),
            &default_ns(),
            MeshKind::SmoothedShishkin,
            &RunSettings::default(),
        )?,
        (None, None) => return Err(Failure::Usage("compare needs --input or --example".into())),
    };
    let report = compare_reference(&t)?;
    print!("{report}");
    if report.passes(args.threshold, args.ord_threshold) {
        Ok(())
    } else {
        Err(Failure::Comparison(format!(
            "deviation above threshold ({:.2}% allowed for E_N, {} for Ord)",
            100.0 * args.threshold,
            args.ord_threshold
        )))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Table(a) => table(a),
        Command::Mesh(a) => mesh(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::NoConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NO_CONVERGENCE)
        }
        Err(Failure::Comparison(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_COMPARISON)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
