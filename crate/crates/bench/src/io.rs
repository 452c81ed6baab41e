//! PPMAT1/PPVEC1 binary files, headerless CSV matrices and PGM images.

use std::fs;
use std::path::Path;

use proxproj::linalg::{DenseMatrix, DenseVector};
use proxproj::{Error, Result};

pub const MAT_MAGIC: &[u8; 8] = b"PPMAT1\0\0";
pub const VEC_MAGIC: &[u8; 8] = b"PPVEC1\0\0";

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format_err(self.bytes.len(), format!("truncated while reading {what}"))),
        }
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let start = self.pos;
        let len = count.checked_mul(8).ok_or_else(|| format_err(start, "dimension overflow"))?;
        let raw = self.take(len, "values")?;
        raw.chunks_exact(8)
            .enumerate()
            .map(|(i, c)| {
                let v = f64::from_le_bytes(c.try_into().unwrap());
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(format_err(start + 8 * i, "non-finite value"))
                }
            })
            .collect()
    }

    fn finish(&self) -> Result<()> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(format_err(self.pos, "trailing bytes"))
        }
    }
}

fn check_magic(c: &mut Cursor, magic: &[u8; 8]) -> Result<()> {
    let got = c.take(8, "magic")?;
    if got != magic {
        return Err(format_err(0, format!("bad magic, expected {:?}", String::from_utf8_lossy(&magic[..6]))));
    }
    Ok(())
}

pub fn encode_matrix(a: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 8 * a.len());
    out.extend_from_slice(MAT_MAGIC);
    out.extend_from_slice(&(a.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(a.ncols() as u64).to_le_bytes());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.extend_from_slice(&a[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DenseMatrix> {
    let mut c = Cursor { bytes, pos: 0 };
    check_magic(&mut c, MAT_MAGIC)?;
    let rows = c.u64("rows")? as usize;
    let cols = c.u64("cols")? as usize;
    let count = rows.checked_mul(cols).ok_or_else(|| format_err(8, "dimension overflow"))?;
    let values = c.f64s(count)?;
    c.finish()?;
    Ok(DenseMatrix::from_row_slice(rows, cols, &values))
}

pub fn encode_vector(v: &DenseVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * v.len());
    out.extend_from_slice(VEC_MAGIC);
    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for x in v.iter() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_vector(bytes: &[u8]) -> Result<DenseVector> {
    let mut c = Cursor { bytes, pos: 0 };
    check_magic(&mut c, VEC_MAGIC)?;
    let len = c.u64("length")? as usize;
    let values = c.f64s(len)?;
    c.finish()?;
    Ok(DenseVector::from_vec(values))
}

pub fn write_matrix(path: &Path, a: &DenseMatrix) -> Result<()> {
    Ok(fs::write(path, encode_matrix(a))?)
}

pub fn write_vector(path: &Path, v: &DenseVector) -> Result<()> {
    Ok(fs::write(path, encode_vector(v))?)
}

pub fn read_vector(path: &Path) -> Result<DenseVector> {
    decode_vector(&fs::read(path)?)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a `.csv` file as CSV, anything else as PPMAT1.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let bytes = fs::read(path)?;
    if is_csv(path) {
        matrix_from_csv(&bytes)
    } else {
        decode_matrix(&bytes)
    }
}

/// Reads a PPVEC1 file, or a one-column/one-row CSV.
pub fn read_vector_any(path: &Path) -> Result<DenseVector> {
    if is_csv(path) {
        let m = read_matrix(path)?;
        Ok(DenseVector::from_iterator(m.len(), m.transpose().iter().copied()))
    } else {
        read_vector(path)
    }
}

pub fn matrix_from_csv(bytes: &[u8]) -> Result<DenseMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let off = e.position().map_or(0, |p| p.byte());
            format_err(off as usize, e.to_string())
        })?;
        let off = rec.position().map_or(0, |p| p.byte()) as usize;
        if *cols.get_or_insert(rec.len()) != rec.len() {
            return Err(format_err(off, "ragged row"));
        }
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| format_err(off, format!("not a number: '{field}'")))?;
            if !v.is_finite() {
                return Err(format_err(off, "non-finite value"));
            }
            values.push(v);
        }
        rows += 1;
    }
    Ok(DenseMatrix::from_row_slice(rows, cols.unwrap_or(0), &values))
}

pub fn matrix_to_csv(a: &DenseMatrix) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..a.nrows() {
        w.write_record(a.row(i).iter().map(|v| v.to_string()))
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Writes CSV for a `.csv` path and PPMAT1 otherwise.
pub fn write_matrix_any(path: &Path, a: &DenseMatrix) -> Result<()> {
    if is_csv(path) {
        Ok(fs::write(path, matrix_to_csv(a)?)?)
    } else {
        write_matrix(path, a)
    }
}

/// Parses a P2 or P5 graymap into intensities scaled to `[0, 1]`.
pub fn decode_pgm(bytes: &[u8]) -> Result<DenseMatrix> {
    let mut pos = 0;
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(format_err(0, "expected P2 or P5 magic")),
    };
    pos += 2;
    let mut header = [0usize; 3];
    for (k, slot) in header.iter_mut().enumerate() {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| format_err(pos, "truncated header"))?;
        *slot = parse_uint(tok, pos)?;
        if k == 2 && !(1..=65535).contains(slot) {
            return Err(format_err(pos, format!("maxval {slot} outside 1..=65535")));
        }
    }
    let [width, height, maxval] = header;
    let count = width.checked_mul(height).ok_or_else(|| format_err(pos, "dimension overflow"))?;
    let mut raw = Vec::with_capacity(count);
    if binary {
        if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
            return Err(format_err(pos, "missing whitespace after maxval"));
        }
        pos += 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let data = bytes
            .get(pos..pos + need)
            .ok_or_else(|| format_err(bytes.len(), "truncated raster"))?;
        if wide {
            raw.extend(data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as usize));
        } else {
            raw.extend(data.iter().map(|&b| b as usize));
        }
    } else {
        for _ in 0..count {
            let tok = next_token(bytes, &mut pos).ok_or_else(|| format_err(bytes.len(), "truncated raster"))?;
            raw.push(parse_uint(tok, pos)?);
        }
    }
    if let Some(i) = raw.iter().position(|&v| v > maxval) {
        return Err(format_err(pos, format!("sample {i} exceeds maxval {maxval}")));
    }
    let scale = maxval as f64;
    Ok(DenseMatrix::from_iterator(
        width,
        height,
        raw.into_iter().map(|v| v as f64 / scale),
    )
    .transpose())
}

pub fn read_pgm(path: &Path) -> Result<DenseMatrix> {
    decode_pgm(&fs::read(path)?)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        match bytes.get(*pos)? {
            b'#' => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            b if b.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Some(&bytes[start..*pos])
}

fn parse_uint(tok: &[u8], pos: usize) -> Result<usize> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format_err(pos - tok.len(), format!("bad integer '{}'", String::from_utf8_lossy(tok))))
}

/// P2 encoding, used for fixtures.
pub fn encode_pgm_ascii(raw: &[u16], width: usize, maxval: u16) -> Vec<u8> {
    let mut s = format!("P2\n{width} {}\n{maxval}\n", raw.len() / width.max(1));
    for row in raw.chunks(width.max(1)) {
        let line: Vec<String> = row.iter().map(u16::to_string).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s.into_bytes()
}

/// P5 encoding, used for fixtures.
pub fn encode_pgm_binary(raw: &[u16], width: usize, maxval: u16) -> Vec<u8> {
    let mut out = format!("P5\n{width} {}\n{maxval}\n", raw.len() / width.max(1)).into_bytes();
    for &v in raw {
        if maxval > 255 {
            out.extend_from_slice(&v.to_be_bytes());
        } else {
            out.push(v as u8);
        }
    }
    out
}
