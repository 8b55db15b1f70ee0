//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! input = data.csv
//! format = dense-csv        # or sparse-triplet (needs dims)
//! output_dir = out
//! seed = 42
//! axes = 99
//! digits = 8
//! quant_base = 3
//! target_base = 2
//! index_depth = 3
//! restarts = 50
//! max_iter = 500
//! eval_objects = 2000
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::{DEFAULT_EVAL_OBJECTS, MAX_WARD_OBJECTS};
use crate::ingest::{MatrixFormat, DEFAULT_AXES, DEFAULT_DIGITS, MAX_DIGITS};
use crate::quantize::{DEFAULT_MAX_ITER, DEFAULT_RESTARTS};
use crate::rng::GENERATOR_NAME;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: MatrixFormat,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Number of random axes `R`.
    pub axes: usize,
    /// Digit precision `J`.
    pub digits: usize,
    /// Target base `K` of the quantizer.
    pub quant_base: u8,
    /// Final base `m` of the reduction chain.
    pub target_base: u8,
    /// Prefix index depth `c`.
    pub index_depth: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub eval_objects: usize,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            format: MatrixFormat::DenseCsv,
            output_dir: output_dir.into(),
            seed: 0,
            axes: DEFAULT_AXES,
            digits: DEFAULT_DIGITS,
            quant_base: 3,
            target_base: 2,
            index_depth: 3,
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
            eval_objects: DEFAULT_EVAL_OBJECTS,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        if cfg.input.is_relative() {
            cfg.input = dir.join(&cfg.input);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = dir.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut input = None;
        let mut output_dir = None;
        let mut format_name = None;
        let mut dims = None;
        let mut cfg = Self::new("", "");
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || Error::Config(format!("line {}: bad value `{value}` for `{key}`", n + 1));
            match key {
                "input" => input = Some(PathBuf::from(value)),
                "output_dir" => output_dir = Some(PathBuf::from(value)),
                "format" => format_name = Some(value.to_string()),
                "dims" => dims = Some(value.parse::<usize>().map_err(|_| bad())?),
                "seed" => cfg.seed = value.parse().map_err(|_| bad())?,
                "axes" => cfg.axes = value.parse().map_err(|_| bad())?,
                "digits" => cfg.digits = value.parse().map_err(|_| bad())?,
                "quant_base" => cfg.quant_base = value.parse().map_err(|_| bad())?,
                "target_base" => cfg.target_base = value.parse().map_err(|_| bad())?,
                "index_depth" => cfg.index_depth = value.parse().map_err(|_| bad())?,
                "restarts" => cfg.restarts = value.parse().map_err(|_| bad())?,
                "max_iter" => cfg.max_iter = value.parse().map_err(|_| bad())?,
                "eval_objects" => cfg.eval_objects = value.parse().map_err(|_| bad())?,
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{key}`",
                        n + 1
                    )))
                }
            }
        }
        cfg.input = input.ok_or_else(|| Error::Config("missing `input`".into()))?;
        cfg.output_dir = output_dir.ok_or_else(|| Error::Config("missing `output_dir`".into()))?;
        cfg.format = match (format_name.as_deref(), dims) {
            (None | Some("dense-csv"), None) => MatrixFormat::DenseCsv,
            (Some("sparse-triplet"), Some(d)) => MatrixFormat::SparseTriplet { dims: d },
            (Some("sparse-triplet"), None) => {
                return Err(Error::Config("sparse-triplet needs `dims`".into()))
            }
            (None | Some("dense-csv"), Some(_)) => {
                return Err(Error::Config(
                    "`dims` only applies to sparse-triplet".into(),
                ))
            }
            (Some(other), _) => return Err(Error::Config(format!("unknown format `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.axes == 0 {
            return fail("axes must be >= 1".into());
        }
        if !(1..=MAX_DIGITS).contains(&self.digits) {
            return fail(format!("digits must be in 1..={MAX_DIGITS}"));
        }
        if !(2..=10).contains(&self.quant_base) {
            return fail("quant_base must be in 2..=10".into());
        }
        if !(2..=9).contains(&self.target_base) {
            return fail("target_base must be in 2..=9".into());
        }
        if !(1..=self.digits).contains(&self.index_depth) {
            return fail(format!("index_depth must be in 1..={}", self.digits));
        }
        if self.restarts == 0 || self.max_iter == 0 {
            return fail("restarts and max_iter must be >= 1".into());
        }
        if !(2..=MAX_WARD_OBJECTS).contains(&self.eval_objects) {
            return fail(format!("eval_objects must be in 2..={MAX_WARD_OBJECTS}"));
        }
        Ok(())
    }

    /// Canonical echo written next to every output.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "input = {}", self.input.display());
        match self.format {
            MatrixFormat::DenseCsv => {
                let _ = writeln!(s, "format = dense-csv");
            }
            MatrixFormat::SparseTriplet { dims } => {
                let _ = writeln!(s, "format = sparse-triplet");
                let _ = writeln!(s, "dims = {dims}");
            }
        }
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "axes = {}", self.axes);
        let _ = writeln!(s, "digits = {}", self.digits);
        let _ = writeln!(s, "quant_base = {}", self.quant_base);
        let _ = writeln!(s, "target_base = {}", self.target_base);
        let _ = writeln!(s, "index_depth = {}", self.index_depth);
        let _ = writeln!(s, "restarts = {}", self.restarts);
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "eval_objects = {}", self.eval_objects);
        let _ = writeln!(s, "# generator = {GENERATOR_NAME}");
        s
    }
}
