//! File formats: the weight-set envelope, `.w64` weight sidecars, the
//! binary dataset matrix and CSV datasets.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::compression::{Algorithm, Dataset, WeightSet};
use crate::error::{Error, Result};
use crate::index_sets::IndexSet;
use crate::lattice::LatticeRule;

const WEIGHTS_MAGIC: &[u8; 4] = b"LCW1";
const MATRIX_MAGIC: &[u8; 4] = b"LCM1";

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

/// Little-endian `f64` bytes, base64 encoded.
pub fn encode_f64s(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

pub fn decode_f64s(text: &str) -> Result<Vec<f64>> {
    let bytes = STANDARD
        .decode(text)
        .map_err(|e| format_err(format!("bad base64 array: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(format_err(format!("base64 array holds {} bytes, not a multiple of 8", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    rule: LatticeRule,
    index_set: IndexSet,
    algorithm: String,
    mean_y2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_xz: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_xyz: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_xz_imag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_xyz_imag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sidecar: Option<String>,
}

impl Envelope {
    fn new(w: &WeightSet, inline: bool, sidecar: Option<String>) -> Self {
        Self {
            rule: w.rule.clone(),
            index_set: w.index_set.clone(),
            algorithm: w.algorithm.name().to_string(),
            mean_y2: w.mean_y2,
            w_xz: inline.then(|| encode_f64s(&w.w_xz)),
            w_xyz: inline.then(|| encode_f64s(&w.w_xyz)),
            w_xz_imag: w.w_xz_imag.as_deref().map(encode_f64s),
            w_xyz_imag: w.w_xyz_imag.as_deref().map(encode_f64s),
            sidecar,
        }
    }

    fn into_weights(self, real: Option<(Vec<f64>, Vec<f64>)>) -> Result<WeightSet> {
        let (w_xz, w_xyz) = match real {
            Some(r) => r,
            None => {
                let a = self.w_xz.ok_or_else(|| format_err("envelope has neither w_xz nor a sidecar"))?;
                let b = self.w_xyz.ok_or_else(|| format_err("envelope has neither w_xyz nor a sidecar"))?;
                (decode_f64s(&a)?, decode_f64s(&b)?)
            }
        };
        let w_xz_imag = self.w_xz_imag.as_deref().map(decode_f64s).transpose()?;
        let w_xyz_imag = self.w_xyz_imag.as_deref().map(decode_f64s).transpose()?;
        let l = self.rule.size() as usize;
        for (name, len) in [
            ("w_xz", Some(w_xz.len())),
            ("w_xyz", Some(w_xyz.len())),
            ("w_xz_imag", w_xz_imag.as_ref().map(Vec::len)),
            ("w_xyz_imag", w_xyz_imag.as_ref().map(Vec::len)),
        ] {
            if let Some(len) = len {
                if len != l {
                    return Err(format_err(format!("{name} has {len} entries, lattice has L = {l}")));
                }
            }
        }
        if self.rule.dim() != self.index_set.dim() {
            return Err(format_err(format!(
                "lattice dimension {} differs from index-set dimension {}",
                self.rule.dim(),
                self.index_set.dim()
            )));
        }
        Ok(WeightSet {
            rule: self.rule,
            index_set: self.index_set,
            algorithm: Algorithm::parse(&self.algorithm)?,
            mean_y2: self.mean_y2,
            w_xz,
            w_xyz,
            w_xz_imag,
            w_xyz_imag,
        })
    }
}

/// The JSON envelope with both weight arrays inline as base64.
pub fn weights_to_json(w: &WeightSet) -> Result<String> {
    serde_json::to_string_pretty(&Envelope::new(w, true, None)).map_err(|e| format_err(e.to_string()))
}

pub fn weights_from_json(text: &str) -> Result<WeightSet> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| format_err(e.to_string()))?;
    if env.sidecar.is_some() {
        return Err(format_err("envelope refers to a sidecar; load it from a file"));
    }
    env.into_weights(None)
}

/// `.w64` layout: magic `LCW1`, `u32` L, `W_XZ` then `W_XYZ` as `2L`
/// little-endian `f64`.
pub fn encode_w64(w_xz: &[f64], w_xyz: &[f64]) -> Result<Vec<u8>> {
    if w_xz.len() != w_xyz.len() {
        return Err(Error::DimensionMismatch { expected: w_xz.len(), got: w_xyz.len() });
    }
    let l = u32::try_from(w_xz.len()).map_err(|_| format_err("L does not fit the .w64 header"))?;
    let mut out = Vec::with_capacity(8 + 16 * w_xz.len());
    out.extend_from_slice(WEIGHTS_MAGIC);
    out.extend_from_slice(&l.to_le_bytes());
    for v in w_xz.iter().chain(w_xyz) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_w64(bytes: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
    if bytes.len() < 8 || &bytes[..4] != WEIGHTS_MAGIC {
        return Err(format_err("not a .w64 file (missing LCW1 magic)"));
    }
    let l = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if bytes.len() != 8 + 16 * l {
        return Err(format_err(format!(
            ".w64 header says L = {l} ({} bytes expected), file has {} bytes",
            8 + 16 * l,
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[8..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (a, b) = values.split_at(l);
    Ok((a.to_vec(), b.to_vec()))
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("w64")
}

/// Writes the envelope to `path`. With `sidecar`, the real weight arrays go
/// to `path` with extension `.w64` and the envelope names that file.
pub fn save_weights(path: &Path, w: &WeightSet, sidecar: bool) -> Result<()> {
    let env = if sidecar {
        let side = sidecar_path(path);
        write_file(&side, &encode_w64(&w.w_xz, &w.w_xyz)?)?;
        let name = side.file_name().unwrap().to_string_lossy().into_owned();
        Envelope::new(w, false, Some(name))
    } else {
        Envelope::new(w, true, None)
    };
    let text = serde_json::to_string_pretty(&env).map_err(|e| format_err(e.to_string()))?;
    write_file(path, text.as_bytes())
}

pub fn load_weights(path: &Path) -> Result<WeightSet> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let env: Envelope = serde_json::from_str(&text).map_err(|e| format_err(format!("{}: {e}", path.display())))?;
    let real = match &env.sidecar {
        Some(name) => {
            let side = path.parent().unwrap_or(Path::new(".")).join(name);
            Some(decode_w64(&fs::read(&side).map_err(|e| io_err(&side, e))?)?)
        }
        None => None,
    };
    env.into_weights(real)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(bytes).map_err(|e| io_err(path, e))
}

/// Binary dataset matrix: magic `LCM1`, `u64` rows, `u32` columns, then the
/// rows as little-endian `f64`, each `x_1, …, x_d, y`.
pub fn encode_matrix(data: &Dataset) -> Vec<u8> {
    let cols = data.dim() + 1;
    let mut out = Vec::with_capacity(16 + 8 * cols * data.len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(data.len() as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for (x, y) in data.points().zip(data.responses()) {
        for v in x.iter().chain(std::iter::once(y)) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<Dataset> {
    if bytes.len() < 16 || &bytes[..4] != MATRIX_MAGIC {
        return Err(format_err("not a dataset matrix (missing LCM1 magic)"));
    }
    let rows = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if cols < 2 {
        return Err(format_err(format!("dataset matrix needs at least 2 columns, has {cols}")));
    }
    let expected = rows.checked_mul(cols).and_then(|n| n.checked_mul(8)).and_then(|n| n.checked_add(16));
    if expected != Some(bytes.len()) {
        return Err(format_err(format!(
            "dataset matrix header says {rows}×{cols}, file has {} bytes",
            bytes.len()
        )));
    }
    let d = cols - 1;
    let mut x = Vec::with_capacity(rows * d);
    let mut y = Vec::with_capacity(rows);
    for row in bytes[16..].chunks_exact(8 * cols) {
        let vals = row.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        for (j, v) in vals.enumerate() {
            if j < d {
                x.push(v);
            } else {
                y.push(v);
            }
        }
    }
    Dataset::from_flat(d, x, y)
}

/// Parses CSV text with `d + 1` numeric columns (`x_1..x_d, y`). A first row
/// that does not parse as numbers is taken as a header.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut cols: Option<usize> = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(format!("CSV: {e}")))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => {
                cols = Some(record.len());
                continue;
            }
            Err(e) => return Err(format_err(format!("line {line}: {e}"))),
        };
        let c = *cols.get_or_insert(values.len());
        if values.len() != c {
            return Err(format_err(format!("line {line}: expected {c} columns, found {}", values.len())));
        }
        if c < 2 {
            return Err(format_err(format!("line {line}: need at least one coordinate and a response")));
        }
        x.extend_from_slice(&values[..c - 1]);
        y.push(values[c - 1]);
    }
    let d = cols.map(|c| c.saturating_sub(1)).unwrap_or(0);
    Dataset::from_flat(d, x, y)
}

/// Dataset from a file: `.csv` (or anything not starting with the matrix
/// magic) as CSV, otherwise the binary matrix.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.starts_with(MATRIX_MAGIC) {
        return decode_matrix(&bytes);
    }
    let text = String::from_utf8(bytes).map_err(|_| format_err(format!("{}: not UTF-8 CSV", path.display())))?;
    parse_csv(&text)
}
