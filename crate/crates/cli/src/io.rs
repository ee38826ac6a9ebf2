//! Matrix Market and PGM readers and writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use rqrcp_core::DenseMatrix;

pub fn read_matrix_market(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix_market(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Parses `matrix coordinate real general` or `matrix array real general`.
/// Coordinate duplicates are summed.
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty file"))?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    ensure!(
        fields.len() == 5 && fields[0] == "%%matrixmarket" && fields[1] == "matrix",
        "malformed header {header:?}"
    );
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => bail!("unknown storage format {other:?}"),
    };
    if fields[3] != "real" {
        bail!("only real matrices are supported, found {:?}", fields[3]);
    }
    if fields[4] != "general" {
        bail!("only general matrices are supported, found {:?}", fields[4]);
    }

    let mut body = lines.filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let size = body.next().ok_or_else(|| anyhow!("missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad size line {size:?}"))?;

    if coordinate {
        ensure!(
            dims.len() == 3,
            "coordinate size line needs rows, cols, entries"
        );
        let (m, n, nnz) = (dims[0], dims[1], dims[2]);
        let mut a = DenseMatrix::zeros(m, n);
        let mut seen = 0;
        for line in body {
            let t: Vec<&str> = line.split_whitespace().collect();
            ensure!(t.len() == 3, "bad entry line {line:?}");
            let i: usize = t[0]
                .parse()
                .with_context(|| format!("bad row index in {line:?}"))?;
            let j: usize = t[1]
                .parse()
                .with_context(|| format!("bad column index in {line:?}"))?;
            let v: f64 = t[2]
                .parse()
                .with_context(|| format!("bad value in {line:?}"))?;
            ensure!(
                (1..=m).contains(&i) && (1..=n).contains(&j),
                "entry ({i}, {j}) outside a {m}x{n} matrix"
            );
            a[(i - 1, j - 1)] += v;
            seen += 1;
        }
        ensure!(seen == nnz, "expected {nnz} entries, found {seen}");
        Ok(a)
    } else {
        ensure!(dims.len() == 2, "array size line needs rows and cols");
        let (m, n) = (dims[0], dims[1]);
        let data: Vec<f64> = body
            .flat_map(str::split_whitespace)
            .map(|t| t.parse::<f64>().with_context(|| format!("bad value {t:?}")))
            .collect::<Result<_>>()?;
        ensure!(
            data.len() == m * n,
            "expected {} values, found {}",
            m * n,
            data.len()
        );
        Ok(DenseMatrix::from_col_major(m, n, data)?)
    }
}

/// Writes array format with shortest round-trip formatting, so a read gives
/// back identical bits.
pub fn write_matrix_market(a: &DenseMatrix, path: &Path) -> Result<()> {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    out.push_str(&format!("{} {}\n", a.rows(), a.cols()));
    for v in a.as_slice() {
        out.push_str(&format!("{v:?}\n"));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn read_pgm(path: &Path) -> Result<DenseMatrix> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_pgm(&bytes).with_context(|| format!("parsing {}", path.display()))
}

/// Reads P2 or P5 into `[0, 1]` values.
pub fn parse_pgm(bytes: &[u8]) -> Result<DenseMatrix> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    let binary = match magic.as_str() {
        "P2" => false,
        "P5" => true,
        other => bail!("bad magic {other:?}"),
    };
    let width: usize = next_token(bytes, &mut pos)?.parse().context("bad width")?;
    let height: usize = next_token(bytes, &mut pos)?.parse().context("bad height")?;
    let maxval: u32 = next_token(bytes, &mut pos)?.parse().context("bad maxval")?;
    ensure!(
        (1..=65535).contains(&maxval),
        "maxval {maxval} out of range"
    );
    let scale = f64::from(maxval);

    let count = width * height;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        ensure!(bytes.len() >= pos + need, "truncated payload");
        let raster = &bytes[pos..pos + need];
        if wide {
            pixels.extend(
                raster
                    .chunks_exact(2)
                    .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]]))),
            );
        } else {
            pixels.extend(raster.iter().map(|&b| u32::from(b)));
        }
    } else {
        for _ in 0..count {
            let t = next_token(bytes, &mut pos).context("truncated payload")?;
            pixels.push(t.parse().with_context(|| format!("bad pixel {t:?}"))?);
        }
    }
    if let Some(p) = pixels.iter().find(|&&p| p > maxval) {
        bail!("pixel {p} exceeds maxval {maxval}");
    }
    Ok(DenseMatrix::from_fn(height, width, |i, j| {
        f64::from(pixels[i * width + j]) / scale
    }))
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    ensure!(*pos > start, "unexpected end of file");
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

/// Writes binary PGM, clamping to `[0, 1]` and rounding to `maxval` levels.
pub fn write_pgm(a: &DenseMatrix, path: &Path, maxval: u16) -> Result<()> {
    ensure!(maxval > 0, "maxval must be positive");
    let mut out = Vec::new();
    write!(out, "P5\n{} {}\n{}\n", a.cols(), a.rows(), maxval)?;
    let scale = f64::from(maxval);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let level = (a[(i, j)].clamp(0.0, 1.0) * scale).round() as u16;
            if maxval > 255 {
                out.extend_from_slice(&level.to_be_bytes());
            } else {
                out.push(level as u8);
            }
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
