use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use padic_core::baire::{layer_cluster_counts, DigitArray, PrefixIndex};
use padic_core::error::{Error, Result};
use padic_core::eval::{digit_histogram, evaluate, EvalConfig};
use padic_core::ingest::{
    consensus_projection, extract_digits, generate_axes, load_matrix, MatrixFormat, DEFAULT_AXES,
    DEFAULT_DIGITS,
};
use padic_core::io::packed::{read_digit_array, write_digit_array};
use padic_core::io::plot::{write_error_curves, write_heatstrip};
use padic_core::io::text::{
    codebook_to_string, consensus_to_string, order_to_string, parse_codebook, parse_consensus,
    parse_order,
};
use padic_core::io::RunConfig;
use padic_core::quantize::{
    decode_with, encode_array, KMeansParams, DEFAULT_MAX_ITER, DEFAULT_RESTARTS,
};
use padic_core::reduce::{approximation_errors, reduce_chain, steps_to_csv};
use padic_core::rng::GENERATOR_ID;
use padic_core::{run_pipeline, synth};

#[derive(Parser)]
#[command(
    name = "padic",
    version,
    about = "Sparse p-adic coding of numeric data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    DenseCsv,
    SparseTriplet,
}

#[derive(clap::Args)]
struct InputArgs {
    /// Data matrix file
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "dense-csv")]
    format: Format,
    /// Column count for sparse-triplet input
    #[arg(long)]
    dims: Option<usize>,
}

impl InputArgs {
    fn format(&self) -> Result<MatrixFormat> {
        match (self.format, self.dims) {
            (Format::DenseCsv, _) => Ok(MatrixFormat::DenseCsv),
            (Format::SparseTriplet, Some(dims)) => Ok(MatrixFormat::SparseTriplet { dims }),
            (Format::SparseTriplet, None) => {
                Err(Error::Config("sparse-triplet input needs --dims".into()))
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded Gaussian-blob dataset as dense CSV
    Synth {
        #[arg(long, default_value_t = 10_000)]
        rows: usize,
        #[arg(long, default_value_t = 5)]
        dims: usize,
        #[arg(long, default_value_t = 6)]
        clusters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a data matrix and print its shape
    Ingest {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Consensus random projection into [0, 1)
    Project {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_AXES)]
        axes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decimal digit array of a consensus file (writes <out> and <out>.order)
    Digits {
        #[arg(long)]
        consensus: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Quantize a decimal digit array into base K
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        base: usize,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        codebook: PathBuf,
    },
    /// Reduce a digit array base by base down to m
    Reduce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        to: u8,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Prefix buckets at depth c, as CSV
    Index {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Object ids sharing a digit prefix
    Query {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        prefix: String,
    },
    /// Per-level cluster counts and digit histogram
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compare consensus values with a decoded encoding
    Eval {
        #[arg(long)]
        consensus: PathBuf,
        #[arg(long)]
        encoded: PathBuf,
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long, default_value_t = 2000)]
        max_objects: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Heat strip image of a digit array
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full run driven by a key = value config file
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

fn order_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".order");
    PathBuf::from(s)
}

/// Reads a packed array and, when present, its `.order` sidecar.
fn read_array(path: &Path) -> Result<(DigitArray, u64)> {
    let file = read_digit_array(path)?;
    let mut array = file.array;
    let sidecar = order_path(path);
    if sidecar.exists() {
        let order = parse_order(&fs::read_to_string(&sidecar)?)?;
        array
            .set_order(order)
            .map_err(|e| Error::CorruptFile(format!("{}: {e}", sidecar.display())))?;
    }
    Ok((array, file.seed))
}

fn write_array(path: &Path, array: &DigitArray, seed: u64) -> Result<()> {
    write_digit_array(path, array, GENERATOR_ID, seed)?;
    fs::write(order_path(path), order_to_string(array.order()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            rows,
            dims,
            clusters,
            seed,
            out,
        } => {
            let m = synth::gaussian_blobs(rows, dims, clusters, seed)?;
            fs::write(out, synth::to_csv(&m))?;
        }
        Command::Ingest { input } => {
            let m = load_matrix(&input.input, input.format()?)?;
            println!(
                "rows={} dims={} storage={}",
                m.rows(),
                m.dims(),
                if m.is_sparse() { "sparse" } else { "dense" }
            );
        }
        Command::Project {
            input,
            axes,
            seed,
            out,
        } => {
            let m = load_matrix(&input.input, input.format()?)?;
            let ensemble = generate_axes(m.dims(), axes, seed)?;
            let c = consensus_projection(&m, &ensemble)?;
            fs::write(out, consensus_to_string(&c))?;
        }
        Command::Digits {
            consensus,
            digits,
            out,
        } => {
            let c = parse_consensus(&fs::read_to_string(consensus)?)?;
            let a = extract_digits(&c, digits)?;
            write_array(&out, &a, c.seed)?;
        }
        Command::Encode {
            input,
            base,
            restarts,
            max_iter,
            seed,
            out,
            codebook,
        } => {
            let (a, _) = read_array(&input)?;
            let params = KMeansParams {
                restarts,
                max_iter,
                seed,
            };
            let q = encode_array(&a, base, params)?;
            write_array(&out, &q.encoded, seed)?;
            fs::write(codebook, codebook_to_string(&q.codebook))?;
            println!("level,mse");
            for (j, m) in q.mse_per_level.iter().enumerate() {
                println!("{},{m:.16e}", j + 1);
            }
        }
        Command::Reduce { input, to, out_dir } => {
            let (a, seed) = read_array(&input)?;
            let chain = reduce_chain(&a, to)?;
            let trace = approximation_errors(&chain, &a)?;
            fs::create_dir_all(&out_dir)?;
            for (arr, _) in &chain {
                write_array(
                    &out_dir.join(format!("reduced_base{}.bair", arr.base())),
                    arr,
                    seed,
                )?;
            }
            let steps: Vec<_> = chain.iter().map(|(_, s)| s).collect();
            fs::write(out_dir.join("reduction_steps.csv"), steps_to_csv(&steps))?;
            write_error_curves(
                &trace,
                &out_dir.join("error_trace.csv"),
                &out_dir.join("error_curves.svg"),
            )?;
            print!("{}", trace.to_csv());
        }
        Command::Index { input, depth } => {
            let (a, _) = read_array(&input)?;
            let idx = PrefixIndex::build(&a, depth)?;
            println!("prefix,count");
            for (key, ids) in idx.buckets() {
                println!("{key},{}", ids.len());
            }
        }
        Command::Query { input, prefix } => {
            let (a, _) = read_array(&input)?;
            let idx = PrefixIndex::build(&a, prefix.len())?;
            for id in idx.query(&prefix)? {
                println!("{id}");
            }
        }
        Command::Stats { input } => {
            let (a, _) = read_array(&input)?;
            print!("{}", layer_cluster_counts(&a).to_csv());
            println!();
            print!("{}", digit_histogram(&a).to_csv());
        }
        Command::Eval {
            consensus,
            encoded,
            codebook,
            max_objects,
            seed,
        } => {
            let c = parse_consensus(&fs::read_to_string(consensus)?)?;
            let (a, _) = read_array(&encoded)?;
            let cb = parse_codebook(&fs::read_to_string(codebook)?)?;
            if a.levels() != cb.levels().len() || a.rows() != c.values.len() {
                return Err(Error::InvalidArgument(
                    "encoded array, codebook and consensus disagree in shape".into(),
                ));
            }
            let original: Vec<f64> = a.order().iter().map(|&id| c.values[id]).collect();
            let decoded = decode_with(&a, &cb);
            let report = evaluate(
                &original,
                &decoded,
                EvalConfig {
                    max_objects,
                    seed,
                    check_ultrametric: false,
                },
            )?;
            print!("{}", report.to_text());
        }
        Command::Report { input, out } => {
            let (a, _) = read_array(&input)?;
            write_heatstrip(&a, &out)?;
        }
        Command::Pipeline { config } => {
            let cfg = RunConfig::load(&config)?;
            let output = run_pipeline(&cfg)?;
            for f in &output.files {
                println!("{}", cfg.output_dir.join(f).display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
