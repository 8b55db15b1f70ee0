//! Seeded synthetic datasets for demos and tests.

use std::fmt::Write as _;

use crate::baire::DigitArray;
use crate::error::{Error, Result};
use crate::ingest::DataMatrix;
use crate::rng::SeededRng;

/// Gaussian blobs: `clusters` centres uniform in `[0, 10)^dims`, each row a
/// centre plus unit normal noise.
pub fn gaussian_blobs(rows: usize, dims: usize, clusters: usize, seed: u64) -> Result<DataMatrix> {
    if clusters == 0 {
        return Err(Error::invalid_arg("need at least one cluster"));
    }
    let mut rng = SeededRng::new(seed);
    let centres: Vec<f64> = (0..clusters * dims).map(|_| 10.0 * rng.uniform()).collect();
    let mut values = Vec::with_capacity(rows * dims);
    for _ in 0..rows {
        let c = rng.below(clusters as u64) as usize;
        values.extend((0..dims).map(|d| centres[c * dims + d] + rng.normal()));
    }
    DataMatrix::dense(rows, dims, values)
}

/// Dense CSV text of a matrix, 17 significant digits per cell.
pub fn to_csv(m: &DataMatrix) -> String {
    let mut s = String::new();
    for r in 0..m.rows() {
        for c in 0..m.dims() {
            if c > 0 {
                s.push(',');
            }
            let _ = write!(s, "{:.16e}", m.get(r, c));
        }
        s.push('\n');
    }
    s
}

/// I.i.d. uniform digits.
pub fn uniform_digits(base: u8, rows: usize, levels: usize, seed: u64) -> Result<DigitArray> {
    let mut rng = SeededRng::new(seed);
    let cells = (0..rows * levels)
        .map(|_| rng.below(u64::from(base)) as u8)
        .collect();
    DigitArray::new(base, rows, levels, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_matrix, MatrixFormat};

    #[test]
    fn blobs_are_seeded() {
        let a = gaussian_blobs(50, 3, 4, 1).unwrap();
        assert_eq!(a, gaussian_blobs(50, 3, 4, 1).unwrap());
        assert_ne!(a, gaussian_blobs(50, 3, 4, 2).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let a = gaussian_blobs(10, 2, 2, 5).unwrap();
        assert_eq!(
            parse_matrix(&to_csv(&a), MatrixFormat::DenseCsv).unwrap(),
            a
        );
    }
}
