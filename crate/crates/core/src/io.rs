//! CSV ingestion. Rows are observations, columns are coordinates.

use std::io::Read;
use std::path::Path;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CsvSchema {
    pub has_header: bool,
    pub delimiter: u8,
    /// Read the file as columns-are-observations and transpose on load.
    pub transpose: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            has_header: false,
            delimiter: b',',
            transpose: false,
        }
    }
}

pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<DataMatrix> {
    let file = std::fs::File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, schema)
}

/// Row and column numbers in errors are 1-based positions in the file,
/// counting the header line when present.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .delimiter(schema.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let offset = usize::from(schema.has_header) + 1;
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut n = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + offset;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    row,
                    col: record.len().min(w) + 1,
                    msg: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                col: j + 1,
                msg: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    col: j + 1,
                    msg: format!("'{cell}' is not finite"),
                });
            }
            values.push(v);
        }
        n += 1;
    }
    let Some(p) = width else {
        return Err(Error::Parse {
            row: offset,
            col: 1,
            msg: "no data rows".into(),
        });
    };
    let m = DataMatrix::from_vec(values, n, p)?;
    Ok(if schema.transpose { m.transpose() } else { m })
}

/// Writes `data` with shortest round-trip decimal formatting, so reloading
/// reproduces every value exactly.
pub fn write_csv(data: &DataMatrix, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in data.rows() {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(s: &str, schema: CsvSchema) -> Result<DataMatrix> {
        read_csv(s.as_bytes(), &schema)
    }

    #[test]
    fn three_by_two() {
        let m = read("1,2\n3,4\n5,6", CsvSchema::default()).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (3, 2));
        assert_eq!(m.row(2), &[5.0, 6.0]);
    }

    #[test]
    fn header_is_skipped() {
        let schema = CsvSchema {
            has_header: true,
            ..Default::default()
        };
        let m = read("a,b\n1,2\n3,4\n", schema).unwrap();
        assert_eq!(m.nrows(), 2);
    }

    #[test]
    fn nan_cell_is_named() {
        let err = read("1,2\n3,NaN\n", CsvSchema::default()).unwrap_err();
        match err {
            Error::Parse { row, col, msg } => {
                assert_eq!((row, col), (2, 2));
                assert!(msg.contains("NaN"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_and_ragged() {
        assert!(matches!(
            read("1,x\n", CsvSchema::default()),
            Err(Error::Parse { row: 1, col: 2, .. })
        ));
        assert!(matches!(
            read("1,2\n3\n", CsvSchema::default()),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn empty_file() {
        assert!(matches!(read("", CsvSchema::default()), Err(Error::Parse { .. })));
        let schema = CsvSchema {
            has_header: true,
            ..Default::default()
        };
        assert!(matches!(read("a,b\n", schema), Err(Error::Parse { .. })));
    }

    #[test]
    fn delimiter_and_transpose() {
        let schema = CsvSchema {
            delimiter: b';',
            transpose: true,
            ..Default::default()
        };
        let m = read("1;2;3\n4;5;6\n", schema).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (3, 2));
        assert_eq!(m.row(0), &[1.0, 4.0]);
    }

    proptest! {
        #[test]
        fn write_then_load_is_exact(
            v in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..40),
        ) {
            let p = 1 + v.len() % 4;
            let n = v.len() / p;
            prop_assume!(n > 0);
            let m = DataMatrix::from_vec(v[..n * p].to_vec(), n, p).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.csv");
            write_csv(&m, &path).unwrap();
            let back = load_csv(&path, &CsvSchema::default()).unwrap();
            prop_assert_eq!(
                m.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                back.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}
