use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use poissonkit::manifest::{Manifest, Overrides};
use poissonkit::suites::Suite;

#[derive(Parser)]
#[command(name = "poissonkit", version, about = "Verify Poisson-geometric claims declared in a JSON manifest")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check [P,P] = 0 and report a violating triple otherwise.
    Jacobi(RunArgs),
    /// Randomized Schouten-bracket and Lie-derivative identities.
    SchoutenSuite(RunArgs),
    /// The Koszul differential: both definitions, its square, and the star conjugation.
    DeltaSuite(RunArgs),
    /// Modular fields, their change of volume, and a bounded triviality search.
    Modular(RunArgs),
    /// Bounded polynomial Casimir search.
    Casimirs(RunArgs),
    /// Bott connection at the declared point leaves.
    Bott(RunArgs),
    /// Generalized-Casimir test for each declared distribution.
    Genc(RunArgs),
    /// Leaf deltas: totals, Casimir property, annihilators and independence.
    Leafdelta(RunArgs),
    /// Transversal deltas: direct test against the Bott-flatness test.
    Flatness(RunArgs),
    /// Every suite above.
    All(RunArgs),
    /// Print the manifest with every expression in canonical form.
    Normalize {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    degree_bound: Option<u32>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    quadrature_order: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Include per-check runtimes; the report is then no longer reproducible byte for byte.
    #[arg(long)]
    timings: bool,
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn execute(name: &str, suites: &[Suite], args: RunArgs) -> Result<bool> {
    let text = read(&args.manifest)?;
    let overrides =
        Overrides { degree_bound: args.degree_bound, tolerance: args.tolerance, quadrature_order: args.quadrature_order };
    let out = poissonkit::run(name, &text, suites, overrides, args.timings)?;
    match &args.json {
        Some(p) => std::fs::write(p, &out.report).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{}", out.report),
    }
    Ok(out.failed)
}

fn dispatch(cli: Cli) -> Result<bool> {
    let (name, suites, args) = match cli.command {
        Command::Normalize { manifest } => {
            let m = Manifest::from_json(&read(&manifest)?)?;
            print!("{}", m.normalized()?.to_json());
            return Ok(false);
        }
        Command::Jacobi(a) => ("jacobi", vec![Suite::Jacobi], a),
        Command::SchoutenSuite(a) => ("schouten-suite", vec![Suite::SchoutenSuite], a),
        Command::DeltaSuite(a) => ("delta-suite", vec![Suite::DeltaSuite], a),
        Command::Modular(a) => ("modular", vec![Suite::Modular], a),
        Command::Casimirs(a) => ("casimirs", vec![Suite::Casimirs], a),
        Command::Bott(a) => ("bott", vec![Suite::Bott], a),
        Command::Genc(a) => ("genc", vec![Suite::Genc], a),
        Command::Leafdelta(a) => ("leafdelta", vec![Suite::Leafdelta], a),
        Command::Flatness(a) => ("flatness", vec![Suite::Flatness], a),
        Command::All(a) => ("all", Suite::ALL.to_vec(), a),
    };
    execute(name, &suites, args)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
