//! Line-oriented text formats: consensus vectors, codebooks and row orders.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), which round-trips
//! every `f64` exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ingest::ConsensusVector;
use crate::quantize::Codebook;

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// `consensus v1 I=<I> seed=<seed> R=<R>` followed by one value per object.
pub fn consensus_to_string(c: &ConsensusVector) -> String {
    let mut s = format!(
        "consensus v1 I={} seed={} R={}\n",
        c.values.len(),
        c.seed,
        c.axes
    );
    for &v in &c.values {
        s.push_str(&fmt_real(v));
        s.push('\n');
    }
    s
}

fn header_fields<'a>(line: &'a str, magic: &str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let mut parts = line.split_whitespace();
    let head = [parts.next(), parts.next()];
    if head != [Some(magic), Some("v1")] {
        return Err(Error::parse(1, format!("expected `{magic} v1` header")));
    }
    let mut out = Vec::with_capacity(keys.len());
    for key in keys {
        let field = parts
            .next()
            .and_then(|p| p.strip_prefix(key))
            .and_then(|p| p.strip_prefix('='))
            .ok_or_else(|| Error::parse(1, format!("missing `{key}=` in header")))?;
        out.push(field);
    }
    if parts.next().is_some() {
        return Err(Error::parse(1, "unexpected header field"));
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(v: &str, line: usize, what: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::parse(line, format!("bad {what} `{v}`")))
}

pub fn parse_consensus(text: &str) -> Result<ConsensusVector> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let fields = header_fields(header, "consensus", &["I", "seed", "R"])?;
    let count: usize = parse_field(fields[0], 1, "object count")?;
    let seed: u64 = parse_field(fields[1], 1, "seed")?;
    let axes: usize = parse_field(fields[2], 1, "axis count")?;
    let mut values = Vec::with_capacity(count);
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        values.push(parse_field::<f64>(line.trim(), n + 2, "value")?);
    }
    if values.len() != count {
        return Err(Error::parse(
            values.len() + 2,
            format!("header announces {count} values, found {}", values.len()),
        ));
    }
    ConsensusVector::from_values(values, seed, axes)
}

/// `codebook v1 K=<K> J=<J>` followed by `level <j>: <c_0> ... ` lines.
pub fn codebook_to_string(c: &Codebook) -> String {
    let mut s = format!("codebook v1 K={} J={}\n", c.base(), c.levels().len());
    for (j, level) in c.levels().iter().enumerate() {
        let _ = write!(s, "level {}:", j + 1);
        for &v in level {
            let _ = write!(s, " {}", fmt_real(v));
        }
        s.push('\n');
    }
    s
}

pub fn parse_codebook(text: &str) -> Result<Codebook> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let fields = header_fields(header, "codebook", &["K", "J"])?;
    let base: u8 = parse_field(fields[0], 1, "K")?;
    let levels_n: usize = parse_field(fields[1], 1, "J")?;
    let mut levels = Vec::with_capacity(levels_n);
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        if line.trim().is_empty() {
            continue;
        }
        let (label, rest) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, "expected `level <j>:`"))?;
        let expected = format!("level {}", levels.len() + 1);
        if label.trim() != expected {
            return Err(Error::parse(line_no, format!("expected `{expected}:`")));
        }
        let words = rest
            .split_whitespace()
            .map(|w| parse_field::<f64>(w, line_no, "codeword"))
            .collect::<Result<Vec<_>>>()?;
        levels.push(words);
    }
    if levels.len() != levels_n {
        return Err(Error::parse(
            levels.len() + 2,
            format!("header announces {levels_n} levels, found {}", levels.len()),
        ));
    }
    Codebook::new(base, levels).map_err(|e| Error::parse(1, e.to_string()))
}

/// `order v1 I=<I>` followed by the object id of each row.
pub fn order_to_string(order: &[usize]) -> String {
    let mut s = format!("order v1 I={}\n", order.len());
    for id in order {
        let _ = writeln!(s, "{id}");
    }
    s
}

pub fn parse_order(text: &str) -> Result<Vec<usize>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let fields = header_fields(header, "order", &["I"])?;
    let count: usize = parse_field(fields[0], 1, "object count")?;
    let order = lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| parse_field::<usize>(l.trim(), n + 2, "object id"))
        .collect::<Result<Vec<_>>>()?;
    if order.len() != count {
        return Err(Error::parse(
            order.len() + 2,
            format!("header announces {count} ids, found {}", order.len()),
        ));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consensus_round_trip() {
        let c = ConsensusVector::from_values(vec![0.25, 0.1 + 0.2, 0.0], 42, 99).unwrap();
        let s = consensus_to_string(&c);
        assert!(s.starts_with("consensus v1 I=3 seed=42 R=99\n2.5000000000000000e-1\n"));
        let back = parse_consensus(&s).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn consensus_errors() {
        assert!(parse_consensus("").is_err());
        assert!(parse_consensus("consensus v2 I=1 seed=0 R=1\n0.5\n").is_err());
        assert!(parse_consensus("consensus v1 I=2 seed=0 R=1\n0.5\n").is_err());
        match parse_consensus("consensus v1 I=2 seed=0 R=1\n0.5\nabc\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        assert!(parse_consensus("consensus v1 I=1 seed=0 R=1\n1.5\n").is_err());
    }

    #[test]
    fn codebook_round_trip() {
        let cb = Codebook::new(3, vec![vec![1.0, 4.5, 8.0], vec![0.5, 7.25]]).unwrap();
        let s = codebook_to_string(&cb);
        assert_eq!(s.lines().next().unwrap(), "codebook v1 K=3 J=2");
        assert_eq!(
            s.lines().nth(1).unwrap(),
            "level 1: 1.0000000000000000e0 4.5000000000000000e0 8.0000000000000000e0"
        );
        assert_eq!(parse_codebook(&s).unwrap(), cb);
    }

    #[test]
    fn codebook_errors() {
        assert!(parse_codebook("codebook v1 K=2 J=1\nlevel 2: 1 2\n").is_err());
        assert!(parse_codebook("codebook v1 K=2 J=1\nlevel 1: 2 1\n").is_err());
        assert!(parse_codebook("codebook v1 K=2 J=2\nlevel 1: 1 2\n").is_err());
        assert!(parse_codebook("codebook v1 K=2\nlevel 1: 1 2\n").is_err());
    }

    #[test]
    fn order_round_trip() {
        let o = vec![2, 0, 1];
        assert_eq!(parse_order(&order_to_string(&o)).unwrap(), o);
        assert!(parse_order("order v1 I=2\n0\n").is_err());
    }
}
