//! Batch driver: data file in, complete artifact bundle out.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::baire::{layer_cluster_counts, DigitArray, LayerStats, PrefixIndex};
use crate::error::{Result, StageExt};
use crate::eval::{digit_histogram, evaluate, EvalConfig, EvalReport};
use crate::ingest::{
    consensus_projection, extract_digits, generate_axes, load_matrix, ConsensusVector,
};
use crate::io::config::RunConfig;
use crate::io::packed::write_digit_array;
use crate::io::plot::{write_error_curves, write_heatstrip};
use crate::io::text::{codebook_to_string, consensus_to_string, fmt_real, order_to_string};
use crate::quantize::{decode_reals, encode_array, KMeansParams, QuantizationResult};
use crate::reduce::{approximation_errors, reduce_chain, steps_to_csv, ErrorTrace, ReductionStep};
use crate::rng::GENERATOR_ID;

/// Everything a pipeline run produced, in memory and on disk.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub consensus: ConsensusVector,
    pub digits: DigitArray,
    pub layer_stats: LayerStats,
    pub quantized: QuantizationResult,
    /// Two-class encoding used by the evaluation (same as `quantized` when K = 2).
    pub binary: QuantizationResult,
    pub chain: Vec<(DigitArray, ReductionStep)>,
    pub trace: ErrorTrace,
    pub index: PrefixIndex,
    pub eval: EvalReport,
    /// Written files, relative to the output directory, in write order.
    pub files: Vec<PathBuf>,
}

struct Bundle<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Bundle<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(PathBuf::from(name));
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(p, body)?;
        Ok(())
    }

    fn digits(&mut self, name: &str, array: &DigitArray, seed: u64) -> Result<()> {
        let p = self.path(name);
        write_digit_array(&p, array, GENERATOR_ID, seed)
    }
}

fn mse_csv(q: &QuantizationResult) -> String {
    let mut s = String::from("level,mse\n");
    for (j, m) in q.mse_per_level.iter().enumerate() {
        let _ = writeln!(s, "{},{}", j + 1, fmt_real(*m));
    }
    s
}

fn index_csv(index: &PrefixIndex) -> String {
    let mut s = String::from("prefix,count\n");
    for (key, ids) in index.buckets() {
        let _ = writeln!(s, "{key},{}", ids.len());
    }
    s
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut out = Bundle {
        dir: &cfg.output_dir,
        files: Vec::new(),
    };
    out.text("config.txt", &cfg.to_text())?;
    let seed = cfg.seed;

    let matrix = load_matrix(&cfg.input, cfg.format).stage("ingest")?;

    let consensus = generate_axes(matrix.dims(), cfg.axes, seed)
        .and_then(|axes| consensus_projection(&matrix, &axes))
        .stage("project")?;
    out.text("consensus.txt", &consensus_to_string(&consensus))?;

    let digits = extract_digits(&consensus, cfg.digits).stage("digits")?;
    out.digits("digits_base10.bair", &digits, seed)?;
    out.text("digits.order", &order_to_string(digits.order()))?;
    let layer_stats = layer_cluster_counts(&digits);
    out.text("layer_stats.csv", &layer_stats.to_csv())?;
    out.text("digit_histogram.csv", &digit_histogram(&digits).to_csv())?;
    write_heatstrip(&digits, &out.path("heatstrip_base10.png"))?;

    let params = KMeansParams {
        restarts: cfg.restarts,
        max_iter: cfg.max_iter,
        seed,
    };
    let k = cfg.quant_base;
    let quantized = encode_array(&digits, usize::from(k), params).stage("encode")?;
    out.digits(&format!("quantized_base{k}.bair"), &quantized.encoded, seed)?;
    out.text("codebook.txt", &codebook_to_string(&quantized.codebook))?;
    out.text("quantizer_mse.csv", &mse_csv(&quantized))?;
    write_heatstrip(
        &quantized.encoded,
        &out.path(&format!("heatstrip_quantized_base{k}.png")),
    )?;

    let chain = reduce_chain(&digits, cfg.target_base).stage("reduce")?;
    let trace = approximation_errors(&chain, &digits).stage("reduce")?;
    for (array, _) in &chain {
        let m = array.base();
        out.digits(&format!("reduced_base{m}.bair"), array, seed)?;
        write_heatstrip(array, &out.path(&format!("heatstrip_base{m}.png")))?;
    }
    let steps: Vec<&ReductionStep> = chain.iter().map(|(_, s)| s).collect();
    out.text("reduction_steps.csv", &steps_to_csv(&steps))?;
    let csv_path = out.path("error_trace.csv");
    let svg_path = out.path("error_curves.svg");
    write_error_curves(&trace, &csv_path, &svg_path)?;

    let index = PrefixIndex::build(&digits, cfg.index_depth).stage("index")?;
    out.text("index_buckets.csv", &index_csv(&index))?;

    let binary = if k == 2 {
        quantized.clone()
    } else {
        encode_array(&digits, 2, params).stage("eval")?
    };
    let decoded = decode_reals(&binary);
    let eval = evaluate(
        &consensus.sorted_values(),
        &decoded,
        EvalConfig {
            max_objects: cfg.eval_objects,
            seed,
            check_ultrametric: false,
        },
    )
    .stage("eval")?;
    out.text("eval_report.csv", &eval.to_csv())?;
    out.text("eval_report.txt", &eval.to_text())?;

    let files = out.files;
    Ok(PipelineOutput {
        consensus,
        digits,
        layer_stats,
        quantized,
        binary,
        chain,
        trace,
        index,
        eval,
        files,
    })
}
