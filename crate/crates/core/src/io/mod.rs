//! Persistence formats, plot emission and run configuration.

pub mod config;
pub mod packed;
pub mod plot;
pub mod text;

pub use config::RunConfig;
pub use packed::{
    bits_per_digit, read_digit_array, write_digit_array, PackedDigitFile, HEADER_LEN,
};
