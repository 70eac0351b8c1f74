use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::nn::Matrix;
use crate::{Error, Label, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    #[serde(default = "default_true")]
    pub has_header: bool,
}

fn default_true() -> bool {
    true
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label_column: LabelColumn::Name("label".into()),
            has_header: true,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path)?;
    Ok(parse_csv(file, opts)?.with_note(format!("csv:{}", path.display())))
}

/// Parses comma-separated numeric rows with one 0/1 label column.
pub fn parse_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(false)
        .from_reader(reader);
    let parse_err = |row: usize, msg: String| Error::Parse { row, msg };

    let mut label_idx = match &opts.label_column {
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Name(name) => {
            if !opts.has_header {
                return Err(parse_err(
                    0,
                    format!("label column {name:?} needs a header row"),
                ));
            }
            let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?;
            let pos = headers.iter().position(|h| h.trim() == name);
            Some(pos.ok_or_else(|| parse_err(1, format!("no column named {name:?}")))?)
        }
    };

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            parse_err(row, e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let li = *label_idx.get_or_insert(0);
        if li >= record.len() {
            return Err(parse_err(
                row,
                format!("label column {li} missing; row has {} fields", record.len()),
            ));
        }
        width.get_or_insert(record.len() - 1);
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if j == li {
                let label: Label = match cell {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(parse_err(row, format!("label {other:?} is not 0 or 1"))),
                };
                labels.push(label);
            } else {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| parse_err(row, format!("column {j}: {cell:?} is not a number")))?;
                if !v.is_finite() {
                    return Err(parse_err(row, format!("column {j}: non-finite value")));
                }
                data.push(v);
            }
        }
    }
    let cols = match width {
        Some(w) => w,
        None => return Err(parse_err(0, "no data rows".into())),
    };
    if cols == 0 {
        return Err(parse_err(0, "no feature columns".into()));
    }
    let features = Matrix::from_vec(labels.len(), cols, data)?;
    Dataset::new(features, labels)
}

/// Writes features as `x0..x{d-1}` followed by a `label` column, using the
/// shortest decimal form that round-trips each double.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    write_csv_to(ds, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(ds: &Dataset, out: &mut W) -> Result<()> {
    let header: Vec<String> = (0..ds.dim()).map(|j| format!("x{j}")).collect();
    writeln!(out, "{},label", header.join(","))?;
    for i in 0..ds.len() {
        for v in ds.row(i) {
            write!(out, "{v},")?;
        }
        writeln!(out, "{}", ds.label(i))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, opts: &CsvOptions) -> Result<Dataset> {
        parse_csv(text.as_bytes(), opts)
    }

    #[test]
    fn reads_three_rows() {
        let ds = parse(
            "a,b,label\n1,2,0\n3,4.5,1\n-1,0,0\n",
            &CsvOptions::default(),
        )
        .unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.minority_label(), 1);
        assert_eq!(ds.row(1), &[3.0, 4.5]);
    }

    #[test]
    fn label_by_index_without_header() {
        let opts = CsvOptions {
            label_column: LabelColumn::Index(0),
            has_header: false,
        };
        let ds = parse("1,0.5\n0,0.25\n", &opts).unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.row(1), &[0.25]);
    }

    #[test]
    fn rejects_malformed_input_with_row_numbers() {
        let opts = CsvOptions::default();
        assert!(matches!(parse("", &opts), Err(Error::Parse { .. })));
        assert!(matches!(
            parse("a,label\n", &opts),
            Err(Error::Parse { row: 0, .. })
        ));
        match parse("a,label\n1,0\nx,1\n", &opts) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("a,label\n1,2\n", &opts),
            Err(Error::Parse { row: 2, .. })
        ));
        assert!(matches!(
            parse("a,b\n1,0\n", &opts),
            Err(Error::Parse { row: 1, .. })
        ));
        assert!(parse("a,label\n1,0\n2\n", &opts).is_err());
        assert!(parse("a,label\nNaN,0\n", &opts).is_err());
        let idx = CsvOptions {
            label_column: LabelColumn::Index(5),
            has_header: false,
        };
        assert!(parse("1,0\n", &idx).is_err());
    }

    #[test]
    fn write_then_load_is_exact() {
        let features = Matrix::from_rows(&[
            [0.1, -1e-300, 1.0 / 3.0],
            [std::f64::consts::PI, 123456789.12345679, -0.0],
        ])
        .unwrap();
        let ds = Dataset::new(features, vec![1, 0]).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = parse_csv(buf.as_slice(), &CsvOptions::default()).unwrap();
        let bits = |d: &Dataset| -> Vec<u64> {
            d.features()
                .as_slice()
                .iter()
                .map(|v| v.to_bits())
                .collect()
        };
        assert_eq!(bits(&ds), bits(&back));
        assert_eq!(ds.labels(), back.labels());
    }
}
