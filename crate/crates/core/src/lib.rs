//! Sparse p-adic coding of numeric data.
//!
//! Pipeline: a seeded consensus random projection maps every object to a
//! value in [0, 1); its decimal digits form a Baire array (objects x digit
//! levels) whose prefixes are the clusters of a regular 10-way hierarchy.
//! From there the array can be
//!
//! - quantized level by level into a base-K array plus codebook ([`quantize`]),
//! - reduced one base at a time down to binary ([`reduce`]),
//! - indexed by fixed-length prefix for constant-time retrieval ([`baire`]),
//! - stored bit-packed at `ceil(log2 m)` bits per digit ([`io::packed`]),
//! - compared against Ward clustering of the raw values ([`eval`]).

pub mod baire;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod io;
pub mod pipeline;
pub mod quantize;
pub mod reduce;
pub mod rng;
pub mod synth;

pub use baire::{baire_distance, layer_cluster_counts, DigitArray, LayerStats, PrefixIndex};
pub use error::{Error, Result};
pub use ingest::{
    consensus_projection, extract_digits, generate_axes, load_matrix, ConsensusVector, DataMatrix,
    MatrixFormat, ProjectionEnsemble,
};
pub use pipeline::{run_pipeline, PipelineOutput};
pub use quantize::{
    decode_reals, encode_array, exact_quantize_1d, kmeans_1d, Codebook, KMeansParams,
    QuantizationResult,
};
pub use reduce::{
    approximation_errors, candidate_pairs, reduce_base_once, reduce_chain, ErrorTrace,
    ReductionStep,
};
