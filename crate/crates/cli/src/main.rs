use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amap_core::chain::{run_chain, ObserverRegistry};
use amap_core::mapping::sample_uniform_acyclic;
use amap_core::montecarlo::{EstimatorReport, SuiteRegistry, VerifyConfig};
use amap_core::path_codec::{decode, encode};
use amap_core::rtree::{delta_bracket, delta_ghwr_exact, DeltaValue};
use amap_core::{rng, AcyclicMapping, LatticePath, RootedWeightedTree};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

/// Acyclic random mappings, their encodings and scaling-limit checks.
#[derive(Parser)]
#[command(name = "amap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform acyclic mappings of [n], one JSON object per line.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Run the subtree-relocation chain and record observers as CSV.
    Chain {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        steps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated observer names.
        #[arg(long, default_value = "fixed-points,height")]
        observe: String,
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Initial mapping as JSON; the identity if absent.
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Mapping JSON to lattice path JSON.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Lattice path JSON to mapping JSON (canonical labels).
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Distance between two weighted rooted trees.
    TreeDist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Run a named Monte Carlo verification suite and write its CSV report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 20_000)]
        reps: usize,
        #[arg(long, default_value_t = 8192)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Length-measure samples per path.
        #[arg(long, default_value_t = 16)]
        inner: usize,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Bracket,
}

fn output(path: &Path) -> Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let f = File::create(path).with_context(|| format!("cannot create output file {}", path.display()))?;
    Ok(Box::new(BufWriter::new(f)))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("invalid JSON in {}", path.display()))
}

// First non-blank line, so files written by `sample` can be fed back.
fn read_mapping(path: &Path) -> Result<AcyclicMapping> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    for line in BufReader::new(f).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            return serde_json::from_str(&line).with_context(|| format!("invalid mapping JSON in {}", path.display()));
        }
    }
    bail!("{} contains no mapping", path.display())
}

fn run(cmd: Command) -> Result<String> {
    match cmd {
        Command::Sample { n, count, seed, out } => {
            let mut r = rng::master(seed);
            let mut w = output(&out)?;
            for _ in 0..count {
                let m = sample_uniform_acyclic(n, &mut r)?;
                serde_json::to_writer(&mut w, &m)?;
                writeln!(w)?;
            }
            w.flush()?;
            Ok(format!("sampled {count} acyclic mappings of [{n}] with seed {seed}"))
        }
        Command::Chain {
            n,
            steps,
            seed,
            observe,
            stride,
            init,
            out,
        } => {
            let m0 = match init {
                Some(p) => read_mapping(&p)?,
                None => AcyclicMapping::identity(n)?,
            };
            if m0.n() != n {
                bail!("initial mapping has n = {} but --n is {n}", m0.n());
            }
            let observers = ObserverRegistry::with_builtins().parse_list(&observe)?;
            let refs: Vec<_> = observers.iter().map(|o| o.as_ref()).collect();
            let trace = run_chain(&m0, steps, stride, &refs, &mut rng::master(seed))?;
            let mut w = output(&out)?;
            let names: Vec<&str> = trace.columns.iter().map(|(name, _)| name.as_str()).collect();
            writeln!(w, "step,{}", names.join(","))?;
            for (k, t) in trace.times.iter().enumerate() {
                let row: Vec<String> = trace.columns.iter().map(|(_, c)| c[k].to_string()).collect();
                writeln!(w, "{t},{}", row.join(","))?;
            }
            w.flush()?;
            Ok(format!("ran {steps} steps on [{n}], {} rows, final fixed points {}", trace.times.len(), trace.final_state.fixed_points()))
        }
        Command::Encode { input, out } => {
            let m = read_mapping(&input)?;
            let p = encode(&m);
            let mut w = output(&out)?;
            serde_json::to_writer(&mut w, &p)?;
            writeln!(w)?;
            w.flush()?;
            Ok(format!("encoded a mapping of [{}] as a path of length {}", m.n(), 2 * p.n()))
        }
        Command::Decode { input, out } => {
            let p: LatticePath = read_json(&input)?;
            let m = decode(&p);
            let mut w = output(&out)?;
            serde_json::to_writer(&mut w, &m)?;
            writeln!(w)?;
            w.flush()?;
            Ok(format!("decoded a path of length {} into a mapping with {} fixed points", 2 * p.n(), m.fixed_points()))
        }
        Command::TreeDist { a, b, mode, out } => {
            let x: RootedWeightedTree = read_json(&a)?;
            let y: RootedWeightedTree = read_json(&b)?;
            let d = match mode {
                Mode::Exact => DeltaValue::Exact {
                    value: delta_ghwr_exact(&x, &y)?,
                },
                Mode::Bracket => {
                    let (lower, upper) = delta_bracket(&x, &y);
                    DeltaValue::Bracket { lower, upper }
                }
            };
            let mut w = output(&out)?;
            serde_json::to_writer(&mut w, &d)?;
            writeln!(w)?;
            w.flush()?;
            Ok(match d {
                DeltaValue::Exact { value } => format!("Δ = {value}"),
                DeltaValue::Bracket { lower, upper } => format!("{lower} <= Δ <= {upper}"),
            })
        }
        Command::Verify {
            suite,
            reps,
            grid,
            seed,
            inner,
            out,
        } => {
            let s = SuiteRegistry::with_builtins().get(&suite)?;
            let cfg = VerifyConfig { reps, grid, seed, inner };
            let reports = s.run(&cfg)?;
            let mut w = output(&out)?;
            writeln!(w, "{}", EstimatorReport::CSV_HEADER)?;
            for r in &reports {
                writeln!(w, "{}", r.csv_row())?;
            }
            w.flush()?;
            let worst = reports
                .iter()
                .filter_map(|r| r.z_score.map(|z| (z.abs(), r.name.as_str())))
                .fold((0.0, ""), |a, b| if b.0 > a.0 { b } else { a });
            Ok(format!("{suite}: {} reports, largest |z| {:.2} ({})", reports.len(), worst.0, worst.1))
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("AMAP_THREADS") else {
        return Ok(());
    };
    let threads: usize = match v.trim().parse() {
        Ok(t) if t >= 1 => t,
        _ => bail!("AMAP_THREADS = {v:?} must be a positive integer"),
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            // a bad name in a flag is an argument error
            if matches!(e.downcast_ref(), Some(amap_core::Error::UnknownName { .. })) {
                eprintln!("\nFor more information, try '--help'.");
                return ExitCode::from(2);
            }
            ExitCode::from(1)
        }
    }
}
