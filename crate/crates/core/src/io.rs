//! CSV datasets, the model text format and a plain matrix exchange format.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), which
//! round-trips every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::eval::{DistanceMetric, Euclidean};
use crate::ldmlr::PsdMetric;
use crate::learner::LinearMetric;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const MODEL_VERSION: u32 = 1;

fn fmt_num<T: Scalar>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

fn parse_num<T: Scalar>(s: &str, line: usize) -> Result<T> {
    let t = s.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::parse(line, format!("'{t}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("'{t}' is not finite")));
    }
    <T as num_traits::FromPrimitive>::from_f64(v)
        .ok_or_else(|| Error::parse(line, format!("'{t}' is out of range")))
}

/// Reads a dataset with a `label` column; every other column is a feature.
/// Rows come back grouped by ascending label, original order within a label.
pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<LabeledDataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::parse(1, "missing header row"));
    }
    let label_col = header
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| Error::parse(1, "no column named 'label'"))?;
    let width = header.len();
    let mut labels = Vec::new();
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != width {
            return Err(Error::parse(
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (c, field) in rec.iter().enumerate() {
            let v = parse_num::<T>(field, line)?;
            if c == label_col {
                labels.push(v);
            } else {
                data.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::parse(2, "no data rows"));
    }
    let features = Matrix::from_vec(labels.len(), width - 1, data)?;
    Ok(LabeledDataset::new(features, labels)?.grouped())
}

pub fn load_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<LabeledDataset<T>> {
    read_csv(fs::File::open(path)?)
}

/// Writes `label,f0,f1,...` rows.
pub fn write_csv<T: Scalar, W: Write>(data: &LabeledDataset<T>, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["label".to_string()];
    header.extend((0..data.dim()).map(|j| format!("f{j}")));
    wtr.write_record(&header).map_err(csv_io)?;
    let mut row = Vec::with_capacity(data.dim() + 1);
    for i in 0..data.len() {
        row.clear();
        row.push(fmt_num(data.labels()[i]));
        row.extend(data.sample(i).iter().map(|&x| fmt_num(x)));
        wtr.write_record(&row).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv<T: Scalar>(data: &LabeledDataset<T>, path: impl AsRef<Path>) -> Result<()> {
    write_csv(data, fs::File::create(path)?)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes rows of `columns` as CSV with a header.
pub fn write_table<W: Write>(writer: W, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(columns).map_err(csv_io)?;
    for r in rows {
        wtr.write_record(r).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

/// A persisted metric of any supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T> {
    CmdsDml(LinearMetric<T>),
    Ldmlr(PsdMetric<T>),
    Euclidean(Euclidean),
}

impl<T: Scalar> Model<T> {
    pub fn method_name(&self) -> &'static str {
        match self {
            Model::CmdsDml(_) => "cmds-dml",
            Model::Ldmlr(_) => "ldmlr",
            Model::Euclidean(_) => "euclidean",
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version={MODEL_VERSION}");
        let _ = writeln!(out, "method={}", self.method_name());
        match self {
            Model::CmdsDml(m) => {
                let _ = writeln!(out, "s={}", m.s());
                let _ = writeln!(out, "d={}", m.d());
                let _ = writeln!(out, "c={}", fmt_num(m.c));
                let _ = writeln!(out, "center_offset={}", join(&m.center_offset));
                let _ = writeln!(out, "L={}", join(m.l.as_slice()));
            }
            Model::Ldmlr(m) => {
                let _ = writeln!(out, "d={}", m.dim());
                let _ = writeln!(out, "A={}", join(m.matrix().as_slice()));
            }
            Model::Euclidean(e) => {
                let _ = writeln!(out, "d={}", e.dim);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields: Vec<(&str, &str, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key=value"))?;
            fields.push((k.trim(), v.trim(), i + 1));
        }
        let get = |key: &str| -> Result<(&str, usize)> {
            fields
                .iter()
                .find(|f| f.0 == key)
                .map(|f| (f.1, f.2))
                .ok_or_else(|| Error::parse(0, format!("missing field '{key}'")))
        };
        let int = |key: &str| -> Result<usize> {
            let (v, line) = get(key)?;
            v.parse()
                .map_err(|_| Error::parse(line, format!("'{key}' must be a non-negative integer")))
        };
        let vec = |key: &str, len: usize| -> Result<Vec<T>> {
            let (v, line) = get(key)?;
            let xs: Vec<T> = if v.is_empty() {
                Vec::new()
            } else {
                v.split(',')
                    .map(|s| parse_num(s, line))
                    .collect::<Result<_>>()?
            };
            if xs.len() != len {
                return Err(Error::parse(
                    line,
                    format!("'{key}' has {} values, expected {len}", xs.len()),
                ));
            }
            Ok(xs)
        };
        let (version, vline) = get("version")?;
        if version != MODEL_VERSION.to_string() {
            return Err(Error::parse(
                vline,
                format!("unsupported model version {version}"),
            ));
        }
        let (method, mline) = get("method")?;
        let d = int("d")?;
        match method {
            "cmds-dml" => {
                let s = int("s")?;
                let (c, cline) = get("c")?;
                let l = Matrix::from_vec(s, d, vec("L", s * d)?)?;
                LinearMetric::new(l, parse_num(c, cline)?, vec("center_offset", d)?)
                    .map(Model::CmdsDml)
            }
            "ldmlr" => {
                let a = Matrix::from_vec(d, d, vec("A", d * d)?)?;
                PsdMetric::new(a).map(Model::Ldmlr)
            }
            "euclidean" => Ok(Model::Euclidean(Euclidean { dim: d })),
            other => Err(Error::parse(mline, format!("unknown method '{other}'"))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

impl<T: Scalar> DistanceMetric<T> for Model<T> {
    fn input_dim(&self) -> usize {
        match self {
            Model::CmdsDml(m) => m.input_dim(),
            Model::Ldmlr(m) => m.input_dim(),
            Model::Euclidean(e) => DistanceMetric::<T>::input_dim(e),
        }
    }

    fn embed(&self, x: &[T]) -> Result<Vec<T>> {
        match self {
            Model::CmdsDml(m) => m.embed(x),
            Model::Ldmlr(m) => m.embed(x),
            Model::Euclidean(e) => e.embed(x),
        }
    }
}

fn join<T: Scalar>(xs: &[T]) -> String {
    xs.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(",")
}

/// Plain matrix text: a first line `rows cols`, then one whitespace
/// separated row per line.
pub fn write_matrix<T: Scalar, W: Write>(m: &Matrix<T>, mut writer: W) -> Result<()> {
    writeln!(writer, "{} {}", m.rows(), m.cols())?;
    for r in m.row_iter() {
        let line: Vec<String> = r.iter().map(|&x| fmt_num(x)).collect();
        writeln!(writer, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_matrix<T: Scalar>(text: &str) -> Result<Matrix<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty matrix file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::parse(hl + 1, "header must be 'rows cols'"))
        })
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::parse(hl + 1, "header must be 'rows cols'"));
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (i, l) in lines {
        let before = data.len();
        for t in l.split_whitespace() {
            data.push(parse_num(t, i + 1)?);
        }
        if data.len() - before != cols {
            return Err(Error::parse(i + 1, format!("expected {cols} values")));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::parse(
            0,
            format!("expected {rows} rows, found {seen}"),
        ));
    }
    Matrix::from_vec(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_grouped_on_load() {
        let d: LabeledDataset<f64> = read_csv("f0,label\n5,1\n7,0\n".as_bytes()).unwrap();
        assert_eq!(d.labels(), &[0.0, 1.0]);
        assert_eq!(d.sample(0), &[7.0]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = read_csv::<f64, _>("label,x\n0,1\n1,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = read_csv::<f64, _>("label,x\n0,1\n1\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = read_csv::<f64, _>("a,b\n0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
        assert!(read_csv::<f64, _>("label,x\n".as_bytes()).is_err());
        assert!(read_csv::<f64, _>("".as_bytes()).is_err());
    }

    #[test]
    fn scientific_notation_is_accepted() {
        let d: LabeledDataset<f64> = read_csv("label,x\n1e0,-2.5E-3\n".as_bytes()).unwrap();
        assert_eq!(d.sample(0), &[-2.5e-3]);
    }

    #[test]
    fn model_round_trip_is_exact() {
        let l = Matrix::from_vec(1, 2, vec![0.1f64, 1.0 / 3.0]).unwrap();
        let m =
            Model::CmdsDml(LinearMetric::new(l, std::f64::consts::PI, vec![1e-300, -2.0]).unwrap());
        assert_eq!(Model::from_text(&m.to_text()).unwrap(), m);
        let p = Model::Ldmlr(PsdMetric::<f64>::identity(2));
        assert_eq!(Model::from_text(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn model_errors() {
        assert!(Model::<f64>::from_text("version=2\nmethod=euclidean\nd=1\n").is_err());
        assert!(Model::<f64>::from_text("version=1\nmethod=nope\nd=1\n").is_err());
        assert!(Model::<f64>::from_text("version=1\nmethod=ldmlr\nd=2\nA=1,0,0\n").is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let m = Matrix::from_vec(2, 2, vec![1.0f64, -0.1, 3e10, 0.0]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert_eq!(
            read_matrix::<f64>(std::str::from_utf8(&buf).unwrap()).unwrap(),
            m
        );
        assert!(read_matrix::<f64>("2 2\n1 2\n").is_err());
    }
}
