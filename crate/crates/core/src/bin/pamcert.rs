use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pamcert::optics::{estimate_witness, read_counts_csv, write_counts_csv, ShotConfig, DEFAULT_REPETITIONS, DEFAULT_SHOTS};
use pamcert::scan::{scan_region, GlobalSearch, Verdict};
use pamcert::scenario::{run_scenario, Scenario};
use pamcert::witness::{classical_optimum, PamWitness, DEFAULT_ENUMERATION_CAP};
use pamcert::{PamError, Result};

#[derive(Parser)]
#[command(name = "pamcert", version, about = "Prepare-and-measure nonclassicality certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the (theta1, theta2) plane at fixed theta3 and write CSV.
    Scan {
        /// Radians; also accepts forms like `pi/4` or `3pi/8`.
        #[arg(long, value_parser = parse_angle)]
        theta3: f64,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search all feasible pure triples for the largest S.
    Max {
        #[arg(long, default_value_t = 200)]
        refine: usize,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
    },
    /// Evaluate a built-in scenario (example, appendix-s, appendix-t) or a JSON file.
    Run {
        scenario: String,
        #[arg(long)]
        simulate: bool,
        #[arg(long, default_value_t = DEFAULT_SHOTS)]
        shots: u64,
        #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write simulated counts as CSV.
        #[arg(long)]
        counts_out: Option<PathBuf>,
    },
    /// Exhaustive classical bound of a witness.
    ClassicalBound {
        /// `S`, `T`, or a JSON witness file.
        #[arg(long)]
        witness: String,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u128,
    },
    /// Witness value with error bar from a counts CSV.
    Estimate {
        #[arg(long)]
        witness: String,
        #[arg(long)]
        counts: PathBuf,
    },
}

fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|e| format!("bad denominator: {e}"))?),
        None => (t, 1.0),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c.trim_end_matches('*').parse::<f64>().map_err(|e| format!("bad coefficient: {e}"))?,
        None => return Err(format!("cannot parse angle `{s}`")),
    };
    Ok(coeff * std::f64::consts::PI / den)
}

fn load_witness(spec: &str) -> Result<PamWitness> {
    match PamWitness::builtin(spec) {
        Ok(w) => Ok(w),
        Err(PamError::UnknownWitness(_)) if std::path::Path::new(spec).exists() => {
            PamWitness::from_json(&std::fs::read_to_string(spec)?)
        }
        Err(e) => Err(e),
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scan { theta3, resolution, out } => {
            let grid = scan_region(theta3, resolution)?;
            let mut w = output(out.as_ref())?;
            grid.write_csv(&mut w)?;
            w.flush()?;
            if out.is_some() {
                eprintln!(
                    "{} cells: {} violating, {} non_violating, {} infeasible",
                    grid.cells.len(),
                    grid.count(Verdict::Violating),
                    grid.count(Verdict::NonViolating),
                    grid.count(Verdict::Infeasible)
                );
            }
        }
        Command::Max { refine, resolution } => {
            let r = GlobalSearch { resolution, refine_iters: refine, ..GlobalSearch::default() }.run()?;
            println!("max_s = {:.6}", r.value);
            println!("angles = {}", r.angles);
            println!("labeling = {}", r.labeling.label());
            println!("reference 1+2*sqrt(2) = {:.6}", 1.0 + 2.0 * 2f64.sqrt());
        }
        Command::Run { scenario, simulate, shots, reps, seed, counts_out } => {
            let scenario = Scenario::load(&scenario)?;
            let cfg = (simulate || counts_out.is_some()).then(|| ShotConfig::new(shots, reps, seed)).transpose()?;
            let report = run_scenario(&scenario, cfg)?;
            print!("{report}");
            if let (Some(path), Some(sim)) = (counts_out, &report.simulation) {
                write_counts_csv(BufWriter::new(File::create(path)?), &sim.counts)?;
            }
        }
        Command::ClassicalBound { witness, cap } => {
            let w = load_witness(&witness)?;
            let (value, strategy) = classical_optimum(&w, cap)?;
            println!("{w}");
            println!("message_dimension = {}", w.message_dimension());
            println!("classical_bound = {value}");
            println!("encoding = {:?}", strategy.encoding);
            println!("decoding = {:?}", strategy.decoding);
        }
        Command::Estimate { witness, counts } => {
            let w = load_witness(&witness)?;
            let records = read_counts_csv(File::open(counts)?)?;
            let e = estimate_witness(&w, &records)?;
            println!("{w}");
            println!("estimate = {:.4} +- {:.4} ({} repetitions)", e.witness_mean, e.witness_std, e.repetitions_used);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
