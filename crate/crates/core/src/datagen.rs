//! Synthetic instances, the standard-form transform, and CSV/libsvm I/O.
//!
//! Randomness comes from ChaCha20 seeded with `seed_from_u64(seed)`. Streams
//! are split by purpose: stream 0 draws features, stream 1 draws labels and
//! stream 2 anything else (e.g. a random β*). Changing `n` therefore never
//! perturbs the first rows of another instance with the same seed.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{sigma, DataSet};
use crate::linalg::{cholesky, dot, norm2, Matrix};

pub const FEATURE_STREAM: u64 = 0;
pub const LABEL_STREAM: u64 = 1;
pub const MISC_STREAM: u64 = 2;

/// ChaCha20 generator for `seed` positioned on `stream`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariance {
    Identity,
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeConfig {
    pub n: usize,
    pub d: usize,
    pub covariance: Covariance,
    pub sigma_x: f64,
    pub beta_true: Vec<f64>,
    pub seed: u64,
}

impl GenerativeConfig {
    /// Σ = I, σ_x = 1 and a β* of the given norm drawn uniformly on the
    /// sphere from the misc stream.
    pub fn isotropic(n: usize, d: usize, beta_norm: f64, seed: u64) -> Self {
        let mut rng = rng_for(seed, MISC_STREAM);
        let mut beta: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = norm2(&beta);
        for b in &mut beta {
            *b *= beta_norm / norm;
        }
        Self {
            n,
            d,
            covariance: Covariance::Identity,
            sigma_x: 1.0,
            beta_true: beta,
            seed,
        }
    }

    /// Lower-triangular `L` with `LLᵀ = Σ`.
    fn covariance_root(&self) -> Result<Matrix> {
        match &self.covariance {
            Covariance::Identity => Ok(Matrix::identity(self.d)),
            Covariance::Diagonal(v) => {
                if v.len() != self.d {
                    return Err(Error::DimensionMismatch(format!("{} variances for d = {}", v.len(), self.d)));
                }
                if v.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
                    return Err(Error::NotPositiveDefinite);
                }
                Ok(Matrix::from_diag(&v.iter().map(|s| s.sqrt()).collect::<Vec<_>>()))
            }
            Covariance::Full(rows) => {
                let s = Matrix::from_rows(rows)?;
                if s.shape() != (self.d, self.d) || !s.is_symmetric(1e-12) {
                    return Err(Error::InvalidInput("covariance must be a symmetric d x d matrix".into()));
                }
                Ok(cholesky(&s)?.factor().clone())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidInput("n and d must be at least 1".into()));
        }
        if self.beta_true.len() != self.d {
            return Err(Error::DimensionMismatch(format!("beta_true has {} entries, d = {}", self.beta_true.len(), self.d)));
        }
        if !(self.sigma_x > 0.0) || !self.sigma_x.is_finite() || self.beta_true.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("sigma_x must be positive and beta_true finite".into()));
        }
        Ok(())
    }
}

/// Rows `xᵢ = σ_x·L·gᵢ` with `gᵢ` standard Gaussian; `yᵢ = +1` with
/// probability `σ(xᵢᵀβ*)`, else −1.
pub fn generate_generative(cfg: &GenerativeConfig) -> Result<DataSet> {
    cfg.validate()?;
    let root = cfg.covariance_root()?;
    let mut features = rng_for(cfg.seed, FEATURE_STREAM);
    let mut labels = rng_for(cfg.seed, LABEL_STREAM);
    let mut x = Matrix::zeros(cfg.n, cfg.d);
    let mut y = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let g: Vec<f64> = (0..cfg.d).map(|_| StandardNormal.sample(&mut features)).collect();
        let row = root.matvec(&g);
        for (dst, v) in x.row_mut(i).iter_mut().zip(row) {
            *dst = cfg.sigma_x * v;
        }
        let p = sigma(dot(x.row(i), &cfg.beta_true));
        y.push(if labels.random::<f64>() < p { 1.0 } else { -1.0 });
    }
    DataSet::new(x, y)
}

/// Isotropic generative instance with ‖β*‖ = 1.
pub fn random_instance(n: usize, d: usize, seed: u64) -> Result<DataSet> {
    generate_generative(&GenerativeConfig::isotropic(n, d, 1.0, seed))
}

/// `X′ = −D_yX`, `y′ = −1`. Leaves every function of `D_yX` unchanged.
pub fn to_standard_form(data: &DataSet) -> DataSet {
    let x = data.x.scale_rows(&data.y.iter().map(|y| -y).collect::<Vec<_>>());
    let mut out = DataSet::new(x, vec![-1.0; data.n()]).expect("sign flips keep a valid dataset");
    out.feature_names = data.feature_names.clone();
    out
}

/// How labels are coded on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelCoding {
    /// ±1 only.
    #[default]
    PlusMinusOne,
    /// {0, 1}, recoded to {−1, +1}.
    ZeroOne,
}

impl LabelCoding {
    fn decode(self, raw: f64) -> Option<f64> {
        match (self, raw) {
            (LabelCoding::PlusMinusOne, v) if v == 1.0 || v == -1.0 => Some(v),
            (LabelCoding::ZeroOne, v) if v == 0.0 => Some(-1.0),
            (LabelCoding::ZeroOne, v) if v == 1.0 => Some(1.0),
            _ => None,
        }
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_finite(tok: &str) -> Option<f64> {
    tok.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn label_error(coding: LabelCoding, tok: &str) -> String {
    match coding {
        LabelCoding::PlusMinusOne => format!("label {tok:?} is not +1/-1 (use the 0/1 recode option for 0/1 labels)"),
        LabelCoding::ZeroOne => format!("label {tok:?} is not 0/1"),
    }
}

/// Comma-separated decimals; one column (0-based `label_column`) holds the
/// labels, the rest are features in file order.
pub fn load_csv(path: &Path, has_header: bool, label_column: usize, coding: LabelCoding) -> Result<DataSet> {
    read_csv(open(path)?, path, has_header, label_column, coding)
}

/// [`load_csv`] over any reader; `path` only labels error messages.
pub fn read_csv<R: Read>(
    reader: R,
    path: &Path,
    has_header: bool,
    label_column: usize,
    coding: LabelCoding,
) -> Result<DataSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names = if has_header {
        let h = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?;
        Some(
            h.iter()
                .enumerate()
                .filter(|(j, _)| *j != label_column)
                .map(|(_, s)| s.to_string())
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() <= label_column {
            return Err(parse_err(path, line, format!("no label column {label_column}")));
        }
        let mut row = Vec::with_capacity(rec.len() - 1);
        for (j, field) in rec.iter().enumerate() {
            let v = parse_finite(field).ok_or_else(|| parse_err(path, line, format!("column {j}: {field:?} is not a finite number")))?;
            if j == label_column {
                y.push(coding.decode(v).ok_or_else(|| parse_err(path, line, label_error(coding, field)))?);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 0, "no data rows"));
    }
    let data = DataSet::new(Matrix::from_rows(&rows)?, y)?;
    match names {
        Some(n) => data.with_feature_names(n),
        None => Ok(data),
    }
}

/// `label idx:val ...` with 1-based indices; `d` is the largest index seen,
/// or `d_hint` when given (which must cover every index).
pub fn load_libsvm(path: &Path, d_hint: Option<usize>, coding: LabelCoding) -> Result<DataSet> {
    read_libsvm(BufReader::new(open(path)?), path, d_hint, coding)
}

pub fn read_libsvm<R: BufRead>(reader: R, path: &Path, d_hint: Option<usize>, coding: LabelCoding) -> Result<DataSet> {
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut y = Vec::new();
    let mut max_idx = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let label_tok = toks.next().expect("nonempty line has a token");
        let label = parse_finite(label_tok)
            .and_then(|v| coding.decode(v))
            .ok_or_else(|| parse_err(path, lineno, label_error(coding, label_tok)))?;
        let mut row = Vec::new();
        for (pos, tok) in toks.enumerate() {
            let bad = |why: &str| parse_err(path, lineno, format!("token {} {tok:?}: {why}", pos + 2));
            let (idx, val) = tok.split_once(':').ok_or_else(|| bad("expected index:value"))?;
            let idx: usize = idx.parse().map_err(|_| bad("bad index"))?;
            if idx == 0 {
                return Err(bad("indices are 1-based"));
            }
            let val = parse_finite(val).ok_or_else(|| bad("value is not a finite number"))?;
            max_idx = max_idx.max(idx);
            row.push((idx - 1, val));
        }
        sparse.push(row);
        y.push(label);
    }
    if sparse.is_empty() {
        return Err(parse_err(path, 0, "no data rows"));
    }
    let d = match d_hint {
        Some(h) if h < max_idx => {
            return Err(parse_err(path, 0, format!("index {max_idx} exceeds d = {h}")));
        }
        Some(h) => h,
        None => max_idx,
    };
    let mut x = Matrix::zeros(sparse.len(), d);
    for (i, row) in sparse.iter().enumerate() {
        for &(j, v) in row {
            x[(i, j)] = v;
        }
    }
    DataSet::new(x, y)
}

/// Label in column 0, features after it. `f64` Display is the shortest
/// round-trip form, so reading back is exact.
pub fn write_csv<W: Write>(data: &DataSet, out: W, header: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("csv write failed: {e}"));
    if header {
        let mut h = vec!["y".to_string()];
        match &data.feature_names {
            Some(names) => h.extend(names.iter().cloned()),
            None => h.extend((1..=data.d()).map(|j| format!("x{j}"))),
        }
        w.write_record(&h).map_err(io)?;
    }
    for i in 0..data.n() {
        let rec = std::iter::once(data.y[i])
            .chain(data.x.row(i).iter().copied())
            .map(|v| v.to_string());
        w.write_record(rec).map_err(io)?;
    }
    w.flush().map_err(|e| io(e.into()))
}

/// Nonzero entries only; labels written as `+1`/`-1`.
pub fn write_libsvm<W: Write>(data: &DataSet, mut out: W) -> std::io::Result<()> {
    for i in 0..data.n() {
        write!(out, "{}", if data.y[i] > 0.0 { "+1" } else { "-1" })?;
        for (j, v) in data.x.row(i).iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}
