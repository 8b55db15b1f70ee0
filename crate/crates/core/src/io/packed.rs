//! Bit-packed digit array files.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `BAIR`                  |
//! | 4      | 2    | format version (1)            |
//! | 6      | 1    | base `m`                      |
//! | 7      | 1    | generator id                  |
//! | 8      | 8    | seed                          |
//! | 16     | 8    | object count `I`              |
//! | 24     | 4    | level count `J`               |
//! | 28     | ...  | payload                       |
//!
//! The payload holds `I * J` digits at `b = ceil(log2 m)` bits each, object
//! major and level minor. Bits fill each byte least-significant first, and a
//! digit's own bits are emitted low bit first. Pad bits in the last byte are
//! zero. The row-to-object order is not part of this file; see
//! [`super::text::write_order`].

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::baire::DigitArray;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"BAIR";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;

/// `ceil(log2 base)`: 1 bit for base 2, 2 for 3-4, 3 for 5-8, 4 for 9-10.
pub fn bits_per_digit(base: u8) -> u32 {
    debug_assert!(base >= 2);
    u8::BITS - (base - 1).leading_zeros()
}

pub fn payload_len(base: u8, rows: usize, levels: usize) -> usize {
    (rows * levels * bits_per_digit(base) as usize).div_ceil(8)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedDigitFile {
    pub generator: u8,
    pub seed: u64,
    /// Rows come back with identity order.
    pub array: DigitArray,
}

pub fn encode(array: &DigitArray, generator: u8, seed: u64) -> Vec<u8> {
    let b = bits_per_digit(array.base()) as usize;
    let mut out =
        Vec::with_capacity(HEADER_LEN + payload_len(array.base(), array.rows(), array.levels()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(array.base());
    out.push(generator);
    out.extend_from_slice(&seed.to_le_bytes());
    out.extend_from_slice(&(array.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(array.levels() as u32).to_le_bytes());

    let mut payload = vec![0u8; payload_len(array.base(), array.rows(), array.levels())];
    for (cell, &d) in array.cells().iter().enumerate() {
        let pos = cell * b;
        for k in 0..b {
            if (d >> k) & 1 == 1 {
                let bit = pos + k;
                payload[bit / 8] |= 1 << (bit % 8);
            }
        }
    }
    out.extend_from_slice(&payload);
    out
}

pub fn decode(bytes: &[u8]) -> Result<PackedDigitFile> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::corrupt(format!(
            "{} bytes is shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::corrupt("bad magic (expected BAIR)"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::corrupt(format!("unsupported version {version}")));
    }
    let base = bytes[6];
    if !(2..=10).contains(&base) {
        return Err(Error::corrupt(format!("base {base} outside 2..=10")));
    }
    let generator = bytes[7];
    let seed = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let rows = usize::try_from(u64::from_le_bytes(bytes[16..24].try_into().unwrap()))
        .map_err(|_| Error::corrupt("object count overflows"))?;
    let levels = u32::from_le_bytes(bytes[24..28].try_into().unwrap()) as usize;
    if levels == 0 {
        return Err(Error::corrupt("zero levels"));
    }
    let cells_n = rows
        .checked_mul(levels)
        .ok_or_else(|| Error::corrupt("array size overflows"))?;
    let b = bits_per_digit(base) as usize;
    let expected = cells_n
        .checked_mul(b)
        .map(|bits| bits.div_ceil(8))
        .ok_or_else(|| Error::corrupt("array size overflows"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < expected {
        return Err(Error::corrupt(format!(
            "truncated payload: {} of {expected} bytes",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(Error::corrupt(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        )));
    }
    let mut cells = Vec::with_capacity(cells_n);
    for cell in 0..cells_n {
        let pos = cell * b;
        let mut d = 0u8;
        for k in 0..b {
            let bit = pos + k;
            d |= ((payload[bit / 8] >> (bit % 8)) & 1) << k;
        }
        if d >= base {
            return Err(Error::corrupt(format!(
                "cell {cell} holds {d}, not a base-{base} digit"
            )));
        }
        cells.push(d);
    }
    let used = cells_n * b;
    if !used.is_multiple_of(8) && payload[expected - 1] >> (used % 8) != 0 {
        return Err(Error::corrupt("non-zero pad bits"));
    }
    let array =
        DigitArray::new(base, rows, levels, cells).map_err(|e| Error::corrupt(e.to_string()))?;
    Ok(PackedDigitFile {
        generator,
        seed,
        array,
    })
}

pub fn write_digit_array(path: &Path, array: &DigitArray, generator: u8, seed: u64) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(array, generator, seed))?;
    Ok(())
}

pub fn read_digit_array(path: &Path) -> Result<PackedDigitFile> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}
