//! JSON and CSV encodings of matrices, distributions and function specs.
//!
//! Matrix JSON:
//!
//! ```json
//! {"rows": 2, "cols": 2, "scalar": "rational", "data": [["1/2", 3], [0, "-7/4"]]}
//! {"rows": 1, "cols": 2, "scalar": "complex", "data": [[[1.0, 0.5], 2.0]]}
//! ```
//!
//! Rational entries are integers or `"p/q"` / `"p"` strings; decimal strings
//! such as `"0.25"` are read exactly. Complex entries are `[re, im]` pairs or
//! plain numbers. Distributions add `"kind": "distribution"`.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use juryconv_core::probgrid::GridDistribution;
use juryconv_core::transforms::{FunctionSpec, Poly};
use juryconv_core::{Backend, ConvMatrix, Rational, C64};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("{path}: {message}")]
    Entry { path: String, message: String },
    #[error("expected a {expected} matrix, found {found}")]
    BackendMismatch { expected: &'static str, found: &'static str },
    #[error("{0}")]
    Core(#[from] juryconv_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(String),
}

pub type FormatResult<T> = Result<T, FormatError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Rational,
    Complex,
}

impl From<Backend> for ScalarKind {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Rational => ScalarKind::Rational,
            Backend::Complex => ScalarKind::Complex,
        }
    }
}

/// One entry as written in JSON, before the scalar kind is applied.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawEntry {
    Int(i64),
    Float(f64),
    Text(String),
    Pair([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    rows: usize,
    cols: usize,
    scalar: ScalarKind,
    data: Vec<Vec<RawEntry>>,
}

/// Reads `"p/q"`, `"p"` and finite decimals such as `"-0.125"` or `"1e-3"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    if let Ok(r) = t.parse::<Rational>() {
        return Ok(r);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| format!("bad exponent in {t:?}"))?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(format!("not a rational number: {text:?}"));
    }
    let numerator: Rational = format!("{int_part}{frac_part}").trim_start_matches('0').parse::<Rational>().unwrap_or_else(|_| Rational::zero());
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(10.into());
    let factor = num_traits::pow::pow(ten, scale.unsigned_abs() as usize);
    let value = if scale >= 0 { numerator * factor } else { numerator / factor };
    Ok(if negative { -value } else { value })
}

fn entry_to_rational(raw: &RawEntry) -> Result<Rational, String> {
    match raw {
        RawEntry::Int(n) => Ok(Rational::from_integer((*n).into())),
        RawEntry::Text(s) => parse_rational(s),
        RawEntry::Float(x) => Rational::from_float(*x)
            .ok_or_else(|| format!("{x} is not finite")),
        RawEntry::Pair(_) => Err(String::from("complex pair in a rational matrix")),
    }
}

fn entry_to_complex(raw: &RawEntry) -> Result<C64, String> {
    let z = match raw {
        RawEntry::Int(n) => C64::new(*n as f64, 0.0),
        RawEntry::Float(x) => C64::new(*x, 0.0),
        RawEntry::Pair([re, im]) => C64::new(*re, *im),
        RawEntry::Text(s) => {
            let r = parse_rational(s)?;
            C64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
        }
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(String::from("entry is not finite"));
    }
    Ok(z)
}

/// A matrix on whichever backend its file declared.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Rational(ConvMatrix<Rational>),
    Complex(ConvMatrix<C64>),
}

impl AnyMatrix {
    pub fn backend(&self) -> Backend {
        match self {
            AnyMatrix::Rational(_) => Backend::Rational,
            AnyMatrix::Complex(_) => Backend::Complex,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Rational(m) => m.shape(),
            AnyMatrix::Complex(m) => m.shape(),
        }
    }

    pub fn to_complex(&self) -> ConvMatrix<C64> {
        match self {
            AnyMatrix::Rational(m) => m.to_complex(),
            AnyMatrix::Complex(m) => m.clone(),
        }
    }

    /// Converts to `backend`; complex input cannot become rational.
    pub fn into_backend(self, backend: Backend) -> FormatResult<AnyMatrix> {
        match (self, backend) {
            (AnyMatrix::Rational(m), Backend::Complex) => Ok(AnyMatrix::Complex(m.to_complex())),
            (AnyMatrix::Complex(_), Backend::Rational) => {
                Err(FormatError::BackendMismatch { expected: "rational", found: "complex" })
            }
            (m, _) => Ok(m),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyMatrix::Rational(m) => matrix_to_json(m),
            AnyMatrix::Complex(m) => matrix_to_json(m),
        }
    }
}

impl fmt::Display for AnyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Scalars with a JSON encoding.
pub trait JsonScalar: juryconv_core::Scalar {
    const KIND: ScalarKind;
    fn to_value(&self) -> Value;
}

impl JsonScalar for Rational {
    const KIND: ScalarKind = ScalarKind::Rational;

    fn to_value(&self) -> Value {
        match self.to_integer().to_i64() {
            Some(n) if self.is_integer() => Value::from(n),
            _ => Value::String(self.to_string()),
        }
    }
}

impl JsonScalar for C64 {
    const KIND: ScalarKind = ScalarKind::Complex;

    fn to_value(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }
}

pub fn matrix_to_json<T: JsonScalar>(m: &ConvMatrix<T>) -> Value {
    serde_json::json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "scalar": T::KIND,
        "data": m.to_rows().iter().map(|r| r.iter().map(T::to_value).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn distribution_to_json<T: JsonScalar>(d: &GridDistribution<T>) -> Value {
    let mut v = matrix_to_json(d.matrix());
    v["kind"] = Value::from("distribution");
    v
}

fn json_error<E: fmt::Display>(err: serde_path_to_error::Error<E>) -> FormatError {
    let path = err.path().to_string();
    FormatError::Json { path: if path == "." { String::from("<root>") } else { path }, message: err.inner().to_string() }
}

fn parse_doc(text: &str) -> FormatResult<MatrixDoc> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(json_error)
}

fn convert<T: juryconv_core::Scalar>(
    doc: &MatrixDoc,
    f: impl Fn(&RawEntry) -> Result<T, String>,
) -> FormatResult<ConvMatrix<T>> {
    if doc.data.len() != doc.rows {
        return Err(FormatError::Entry {
            path: String::from("data"),
            message: format!("expected {} rows, found {}", doc.rows, doc.data.len()),
        });
    }
    let mut entries = Vec::with_capacity(doc.rows * doc.cols);
    for (i, row) in doc.data.iter().enumerate() {
        if row.len() != doc.cols {
            return Err(FormatError::Entry {
                path: format!("data[{i}]"),
                message: format!("expected {} entries, found {}", doc.cols, row.len()),
            });
        }
        for (j, raw) in row.iter().enumerate() {
            entries.push(f(raw).map_err(|message| FormatError::Entry { path: format!("data[{i}][{j}]"), message })?);
        }
    }
    Ok(ConvMatrix::from_vec(doc.rows, doc.cols, entries)?)
}

fn doc_to_matrix(doc: &MatrixDoc) -> FormatResult<AnyMatrix> {
    Ok(match doc.scalar {
        ScalarKind::Rational => AnyMatrix::Rational(convert(doc, entry_to_rational)?),
        ScalarKind::Complex => AnyMatrix::Complex(convert(doc, entry_to_complex)?),
    })
}

pub fn parse_matrix(text: &str) -> FormatResult<AnyMatrix> {
    let doc = parse_doc(text)?;
    if let Some(kind) = doc.kind.as_deref() {
        if kind != "matrix" && kind != "distribution" {
            return Err(FormatError::Entry { path: String::from("kind"), message: format!("unknown kind {kind:?}") });
        }
    }
    doc_to_matrix(&doc)
}

/// A grid distribution on either backend.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyDistribution {
    Rational(GridDistribution<Rational>),
    Complex(GridDistribution<C64>),
}

pub fn parse_distribution(text: &str) -> FormatResult<AnyDistribution> {
    let doc = parse_doc(text)?;
    if doc.kind.as_deref() != Some("distribution") {
        return Err(FormatError::Entry {
            path: String::from("kind"),
            message: String::from("expected \"distribution\""),
        });
    }
    Ok(match doc_to_matrix(&doc)? {
        AnyMatrix::Rational(m) => AnyDistribution::Rational(GridDistribution::new(m)?),
        AnyMatrix::Complex(m) => AnyDistribution::Complex(GridDistribution::new(m)?),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FunctionDoc {
    Power { alpha: f64 },
    Exp,
    Poly { coeffs: Vec<RawEntry> },
    Series { coeffs: Vec<RawEntry>, radius: f64 },
}

fn coeffs_from_raw(raw: &[RawEntry]) -> FormatResult<Vec<Rational>> {
    raw.iter()
        .enumerate()
        .map(|(k, r)| entry_to_rational(r).map_err(|message| FormatError::Entry { path: format!("coeffs[{k}]"), message }))
        .collect()
}

pub fn parse_function(text: &str) -> FormatResult<FunctionSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: FunctionDoc = serde_path_to_error::deserialize(de).map_err(json_error)?;
    Ok(match doc {
        FunctionDoc::Power { alpha } => {
            if !alpha.is_finite() {
                return Err(FormatError::Entry { path: String::from("alpha"), message: String::from("must be finite") });
            }
            FunctionSpec::Power { alpha }
        }
        FunctionDoc::Exp => FunctionSpec::Exp,
        FunctionDoc::Poly { coeffs } => FunctionSpec::Polynomial(Poly::new(coeffs_from_raw(&coeffs)?)),
        FunctionDoc::Series { coeffs, radius } => {
            if !(radius > 0.0) {
                return Err(FormatError::Entry { path: String::from("radius"), message: String::from("must be positive") });
            }
            FunctionSpec::Series { coeffs: coeffs_from_raw(&coeffs)?, radius }
        }
    })
}

pub fn function_to_json(f: &FunctionSpec) -> Value {
    let coeffs = |c: &[Rational]| c.iter().map(JsonScalar::to_value).collect::<Vec<_>>();
    match f {
        FunctionSpec::Power { alpha } => serde_json::json!({"kind": "power", "alpha": alpha}),
        FunctionSpec::Exp => serde_json::json!({"kind": "exp"}),
        FunctionSpec::Polynomial(p) => serde_json::json!({"kind": "poly", "coeffs": coeffs(p.coeffs())}),
        FunctionSpec::Series { coeffs: c, radius } => {
            serde_json::json!({"kind": "series", "coeffs": coeffs(c), "radius": radius})
        }
    }
}

pub fn read_text(path: &Path) -> FormatResult<String> {
    let mut s = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    Ok(s)
}

/// Reads a matrix file; the error path is prefixed with the file name.
pub fn read_matrix(path: &Path) -> FormatResult<AnyMatrix> {
    let text = read_text(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        return read_csv(text.as_bytes()).map(AnyMatrix::Complex);
    }
    parse_matrix(&text).map_err(|e| prefix_path(e, path))
}

pub fn read_distribution(path: &Path) -> FormatResult<AnyDistribution> {
    parse_distribution(&read_text(path)?).map_err(|e| prefix_path(e, path))
}

fn prefix_path(e: FormatError, file: &Path) -> FormatError {
    match e {
        FormatError::Json { path, message } => FormatError::Json { path: format!("{}: {path}", file.display()), message },
        FormatError::Entry { path, message } => FormatError::Entry { path: format!("{}: {path}", file.display()), message },
        other => other,
    }
}

/// Real matrix as CSV, one row per line. Rational entries are written as
/// `p/q`; complex entries must have zero imaginary part.
pub fn write_csv<W: Write>(m: &AnyMatrix, out: W) -> FormatResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let rows: Vec<Vec<String>> = match m {
        AnyMatrix::Rational(m) => m.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect(),
        AnyMatrix::Complex(m) => {
            if m.as_slice().iter().any(|z| z.im != 0.0) {
                return Err(FormatError::Csv(String::from("CSV export needs a real matrix")));
            }
            m.to_rows().iter().map(|r| r.iter().map(|z| format!("{:?}", z.re)).collect()).collect()
        }
    };
    for r in rows {
        w.write_record(&r).map_err(|e| FormatError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| FormatError::Csv(e.to_string()))
}

/// Real matrix from CSV; entries may be decimals or `p/q`.
pub fn read_csv<R: Read>(input: R) -> FormatResult<ConvMatrix<C64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| FormatError::Csv(e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                let value = field
                    .parse::<f64>()
                    .ok()
                    .or_else(|| parse_rational(field).ok().and_then(|r| r.to_f64()))
                    .filter(|x| x.is_finite());
                value.map(|x| C64::new(x, 0.0)).ok_or_else(|| FormatError::Entry {
                    path: format!("row {} column {}", i + 1, j + 1),
                    message: format!("not a number: {field:?}"),
                })
            })
            .collect::<FormatResult<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(ConvMatrix::from_rows(rows)?)
}
