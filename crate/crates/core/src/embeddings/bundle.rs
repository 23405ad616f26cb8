//! Line-delimited JSON embedding bundles.
//!
//! Line 1 is a header `{"format_version": 1, "L": .., "d": ..}`; each later
//! line is `{"id": .., "tokens": [..], "layers": [[[..]]]}` with `L` layers of
//! `n` rows of `d` numbers. Bare `NaN` / `Infinity` literals are tolerated on
//! read so that validation can point at them.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::LayeredEmbedding;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleHeader {
    pub format_version: u32,
    #[serde(rename = "L")]
    pub layers: usize,
    pub d: usize,
}

enum RawNumber {
    Real(f64),
    Special(String),
}

impl<'de> Deserialize<'de> for RawNumber {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;

        impl serde::de::Visitor<'_> for Visitor {
            type Value = RawNumber;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a number")
            }

            fn visit_f64<E>(self, v: f64) -> std::result::Result<RawNumber, E> {
                Ok(RawNumber::Real(v))
            }

            fn visit_i64<E>(self, v: i64) -> std::result::Result<RawNumber, E> {
                Ok(RawNumber::Real(v as f64))
            }

            fn visit_u64<E>(self, v: u64) -> std::result::Result<RawNumber, E> {
                Ok(RawNumber::Real(v as f64))
            }

            fn visit_str<E>(self, v: &str) -> std::result::Result<RawNumber, E> {
                Ok(RawNumber::Special(v.to_owned()))
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    tokens: Vec<String>,
    layers: Vec<Vec<Vec<RawNumber>>>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    tokens: &'a [String],
    layers: Vec<Vec<&'a [f64]>>,
}

/// One invariant violated by one record.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub line: usize,
    pub record: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub header: BundleHeader,
    pub records: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Quotes bare `NaN`, `Infinity` and `-Infinity` tokens outside strings.
fn quote_special_literals(line: &str) -> std::borrow::Cow<'_, str> {
    if !line.contains("NaN") && !line.contains("Infinity") {
        return line.into();
    }
    let mut out = String::with_capacity(line.len() + 16);
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = line;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
            out.push(c);
            rest = &rest[1..];
            continue;
        }
        let special = ["-Infinity", "Infinity", "NaN"]
            .into_iter()
            .find(|lit| rest.starts_with(lit));
        if let Some(lit) = special {
            out.push('"');
            out.push_str(lit);
            out.push('"');
            rest = &rest[lit.len()..];
        } else {
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out.into()
}

fn parse_header(line: &str, line_no: usize) -> Result<BundleHeader> {
    let header: BundleHeader = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: format!("invalid header: {e}"),
    })?;
    let schema = |message: String| Error::Schema {
        line: line_no,
        record: None,
        message,
    };
    if header.format_version != FORMAT_VERSION {
        return Err(schema(format!(
            "unsupported format_version {}",
            header.format_version
        )));
    }
    if header.layers == 0 || header.d == 0 {
        return Err(schema("header L and d must be positive".into()));
    }
    Ok(header)
}

/// Checks a parsed record against the header; returns the tensor when clean.
fn check_record(raw: RawRecord, header: &BundleHeader) -> std::result::Result<LayeredEmbedding, Vec<String>> {
    let mut problems = Vec::new();
    let n = raw.tokens.len();
    if n == 0 {
        problems.push("empty text: no tokens".to_string());
    }
    if raw.layers.len() != header.layers {
        problems.push(format!(
            "layer count {} does not match header L={}",
            raw.layers.len(),
            header.layers
        ));
    }
    let mut flat = Vec::with_capacity(header.layers * n * header.d);
    for (l, layer) in raw.layers.iter().enumerate() {
        if layer.len() != n {
            problems.push(format!(
                "ragged layer: layer {l} has {} rows, expected {n}",
                layer.len()
            ));
            continue;
        }
        let mut non_finite = 0usize;
        for (i, row) in layer.iter().enumerate() {
            if row.len() != header.d {
                problems.push(format!(
                    "layer {l} row {i} has {} values, expected d={}",
                    row.len(),
                    header.d
                ));
                continue;
            }
            for value in row {
                let v = match value {
                    RawNumber::Real(v) => *v,
                    RawNumber::Special(s) if s == "NaN" => f64::NAN,
                    RawNumber::Special(s) if s == "Infinity" => f64::INFINITY,
                    RawNumber::Special(s) if s == "-Infinity" => f64::NEG_INFINITY,
                    RawNumber::Special(s) => {
                        problems.push(format!("layer {l} row {i}: non-numeric value {s:?}"));
                        f64::NAN
                    }
                };
                if !v.is_finite() {
                    non_finite += 1;
                }
                flat.push(v);
            }
        }
        if non_finite > 0 {
            problems.push(format!("non-finite value in layer {l} ({non_finite} entries)"));
        }
    }
    if !problems.is_empty() {
        return Err(problems);
    }
    let tensor = Array3::from_shape_vec((header.layers, n, header.d), flat)
        .map_err(|e| vec![e.to_string()])?;
    LayeredEmbedding::new(raw.id, raw.tokens, tensor).map_err(|e| vec![e.to_string()])
}

enum Line {
    Record(Box<LayeredEmbedding>),
    Invalid(Violation),
}

fn scan<R: BufRead>(reader: R, mut visit: impl FnMut(Line) -> Result<()>) -> Result<BundleHeader> {
    let mut header = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Some(h) = header.as_ref() else {
            header = Some(parse_header(&line, line_no)?);
            continue;
        };
        let raw: RawRecord = serde_json::from_str(&quote_special_literals(&line)).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let id = raw.id.clone();
        match check_record(raw, h) {
            Ok(emb) => visit(Line::Record(Box::new(emb)))?,
            Err(problems) => {
                for message in problems {
                    visit(Line::Invalid(Violation {
                        line: line_no,
                        record: id.clone(),
                        message,
                    }))?;
                }
            }
        }
    }
    header.ok_or(Error::Parse {
        line: 1,
        message: "missing header line".into(),
    })
}

/// Reads every record, failing on the first parse or schema problem.
pub fn read_bundle<R: BufRead>(reader: R) -> Result<(BundleHeader, Vec<LayeredEmbedding>)> {
    let mut records = Vec::new();
    let header = scan(reader, |line| match line {
        Line::Record(emb) => {
            records.push(*emb);
            Ok(())
        }
        Line::Invalid(v) => Err(Error::Schema {
            line: v.line,
            record: Some(v.record),
            message: v.message,
        }),
    })?;
    Ok((header, records))
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<(BundleHeader, Vec<LayeredEmbedding>)> {
    read_bundle(BufReader::new(File::open(path)?))
}

/// Collects every schema violation. Parse errors are still fatal because
/// nothing after a malformed line can be trusted.
pub fn validate_bundle<R: BufRead>(reader: R) -> Result<ValidationReport> {
    let mut records = 0;
    let mut violations = Vec::new();
    let mut last_bad_line = 0;
    let header = scan(reader, |line| {
        match line {
            Line::Record(_) => records += 1,
            Line::Invalid(v) => {
                if v.line != last_bad_line {
                    records += 1;
                    last_bad_line = v.line;
                }
                violations.push(v);
            }
        }
        Ok(())
    })?;
    Ok(ValidationReport {
        header,
        records,
        violations,
    })
}

/// Writes a header plus one line per record. All records must share `L` and `d`.
pub fn write_bundle<W: Write>(mut writer: W, records: &[LayeredEmbedding]) -> Result<BundleHeader> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidConfig("cannot write an empty bundle".into()))?;
    let header = BundleHeader {
        format_version: FORMAT_VERSION,
        layers: first.num_layers(),
        d: first.dim(),
    };
    let to_io = |e: serde_json::Error| Error::Io(e.into());
    serde_json::to_writer(&mut writer, &header).map_err(to_io)?;
    writer.write_all(b"\n")?;
    for rec in records {
        if rec.num_layers() != header.layers || rec.dim() != header.d {
            return Err(Error::ShapeMismatch(format!(
                "record {} has L={}, d={}; bundle has L={}, d={}",
                rec.text_id(),
                rec.num_layers(),
                rec.dim(),
                header.layers,
                header.d
            )));
        }
        let tensor = rec.tensor().as_standard_layout();
        let data = tensor.as_slice().expect("standard layout");
        let (n, d) = (rec.num_tokens(), rec.dim());
        let layers = (0..header.layers)
            .map(|l| (0..n).map(|i| &data[(l * n + i) * d..(l * n + i + 1) * d]).collect())
            .collect();
        let out = RecordOut {
            id: rec.text_id(),
            tokens: rec.tokens(),
            layers,
        };
        serde_json::to_writer(&mut writer, &out).map_err(to_io)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(header)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = r#"{"format_version":1,"L":2,"d":2}"#;

    fn parse(text: &str) -> Result<(BundleHeader, Vec<LayeredEmbedding>)> {
        read_bundle(text.as_bytes())
    }

    #[test]
    fn single_record() {
        let text = format!(
            "{HEADER}\n{}\n",
            r#"{"id":"a","tokens":["x","y"],"layers":[[[1,2],[3,4e-1]],[[5,6],[7,-8.5E2]]]}"#
        );
        let (header, recs) = parse(&text).unwrap();
        assert_eq!(header.layers, 2);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].layer(1)[[1, 1]], -850.0);
        assert_eq!(recs[0].layer(0)[[1, 1]], 0.4);
    }

    #[test]
    fn ragged_layer_is_a_schema_error() {
        let text = format!(
            "{HEADER}\n{}\n",
            r#"{"id":"a","tokens":["x","y"],"layers":[[[1,2],[3,4]],[[5,6]]]}"#
        );
        match parse(&text) {
            Err(Error::Schema { line, record, message }) => {
                assert_eq!(line, 2);
                assert_eq!(record.as_deref(), Some("a"));
                assert!(message.contains("ragged layer"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_mismatch_and_missing_header() {
        let text = format!("{HEADER}\n{}\n", r#"{"id":"a","tokens":["x"],"layers":[[[1,2]]]}"#);
        assert!(matches!(parse(&text), Err(Error::Schema { .. })));
        assert!(matches!(parse(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse(r#"{"format_version":2,"L":1,"d":1}"#),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn truncated_line_reports_line_number() {
        let text = format!(
            "{HEADER}\n{}\n{}",
            r#"{"id":"a","tokens":["x"],"layers":[[[1,2]],[[3,4]]]}"#,
            r#"{"id":"b","tokens":["x"],"layers":[[[1,2]],[[3"#
        );
        assert!(matches!(parse(&text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn nan_is_reported_with_record_and_layer() {
        let text = format!(
            "{HEADER}\n{}\n{}\n",
            r#"{"id":"ok","tokens":["x"],"layers":[[[1,2]],[[3,4]]]}"#,
            r#"{"id":"bad NaN","tokens":["NaN"],"layers":[[[1,2]],[[NaN,-Infinity]]]}"#
        );
        let report = validate_bundle(text.as_bytes()).unwrap();
        assert_eq!(report.records, 2);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.record, "bad NaN");
        assert!(v.message.contains("layer 1"), "{}", v.message);
    }

    #[test]
    fn special_literals_inside_strings_are_untouched() {
        let s = quote_special_literals(r#"{"id":"NaN \"Infinity\"","x":[NaN,-Infinity]}"#);
        assert_eq!(s, r#"{"id":"NaN \"Infinity\"","x":["NaN","-Infinity"]}"#);
    }

    #[test]
    fn write_then_read_is_bit_exact() {
        let tensor = Array3::from_shape_fn((3, 2, 4), |(l, i, k)| {
            ((l + 1) as f64 * 0.1 + i as f64 / 3.0 - k as f64 * 1e-7).exp() * if k % 2 == 0 { 1.0 } else { -1e-20 }
        });
        let emb = LayeredEmbedding::new("r", vec!["a".into(), "b\"q".into()], tensor).unwrap();
        let mut buf = Vec::new();
        write_bundle(&mut buf, std::slice::from_ref(&emb)).unwrap();
        let (_, back) = read_bundle(buf.as_slice()).unwrap();
        for (a, b) in back[0].tensor().iter().zip(emb.tensor().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back, vec![emb]);
    }
}
