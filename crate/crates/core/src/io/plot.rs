//! Static figures: digit heat strips (PNG) and error curves (SVG).

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::baire::DigitArray;
use crate::error::{Error, Result};
use crate::reduce::ErrorTrace;

/// Ten-step rainbow, red to violet.
pub const PALETTE: [[u8; 3]; 10] = [
    [228, 26, 28],
    [255, 127, 0],
    [255, 215, 0],
    [166, 217, 38],
    [51, 160, 44],
    [27, 158, 119],
    [0, 191, 255],
    [31, 120, 180],
    [106, 61, 154],
    [190, 80, 200],
];

/// Palette slot of digit `d` in base `base`, spread over the whole rainbow.
pub fn palette_index(d: u8, base: u8) -> usize {
    if base <= 1 {
        return 0;
    }
    let span = usize::from(base - 1);
    (usize::from(d) * (PALETTE.len() - 1) + span / 2) / span
}

/// RGB raster of the array: one column per object, one row per level, level 1
/// at the bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<u8>,
}

pub fn heatstrip(array: &DigitArray) -> Raster {
    let width = array.rows();
    let height = array.levels();
    let mut rgb = vec![0u8; width * height * 3];
    for x in 0..width {
        for level in 0..height {
            let y = height - 1 - level;
            let colour = PALETTE[palette_index(array.get(x, level), array.base())];
            let at = (y * width + x) * 3;
            rgb[at..at + 3].copy_from_slice(&colour);
        }
    }
    Raster {
        width: width as u32,
        height: height as u32,
        rgb,
    }
}

pub fn encode_png(raster: &Raster) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, raster.width, raster.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(png_err)?;
        writer.write_image_data(&raster.rgb).map_err(png_err)?;
    }
    Ok(out)
}

fn png_err(e: png::EncodingError) -> Error {
    Error::Io(io::Error::other(e))
}

pub fn write_heatstrip(array: &DigitArray, path: &Path) -> Result<()> {
    fs::write(path, encode_png(&heatstrip(array))?)?;
    Ok(())
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Line plot of both error curves against the produced base.
///
/// Black: error against the original array. Red: error against the previous
/// approximation. Bases run left to right in chain order.
pub fn error_curves_svg(trace: &ErrorTrace) -> String {
    let n = trace.points.len();
    let ymax = trace
        .points
        .iter()
        .flat_map(|p| [p.err_vs_original, p.err_vs_previous])
        .fold(0.0f64, f64::max);
    let ymax = if ymax > 0.0 { ymax } else { 1.0 };
    let x_at = |i: usize| {
        if n <= 1 {
            W / 2.0
        } else {
            MARGIN + (W - 2.0 * MARGIN) * i as f64 / (n - 1) as f64
        }
    };
    let y_at = |v: f64| H - MARGIN - (H - 2.0 * MARGIN) * v / ymax;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{b} H{r}" stroke="gray" fill="none"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    for (i, p) in trace.points.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="middle">{}</text>"#,
            x_at(i),
            H - MARGIN + 18.0,
            p.base
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="12">{}</text>"#,
        4.0,
        MARGIN - 8.0,
        crate::io::text::fmt_real(ymax)
    );
    for (colour, pick) in [
        (
            "black",
            (|p: &crate::reduce::ErrorPoint| p.err_vs_original) as fn(&_) -> f64,
        ),
        ("red", |p: &crate::reduce::ErrorPoint| p.err_vs_previous),
    ] {
        let pts: Vec<String> = trace
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| format!("{:.3},{:.3}", x_at(i), y_at(pick(p))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" stroke="{colour}" stroke-width="2" fill="none"/>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_error_curves(trace: &ErrorTrace, csv_path: &Path, svg_path: &Path) -> Result<()> {
    if trace.points.is_empty() {
        return Err(Error::invalid_arg("empty error trace"));
    }
    fs::write(csv_path, trace.to_csv())?;
    fs::write(svg_path, error_curves_svg(trace))?;
    Ok(())
}
