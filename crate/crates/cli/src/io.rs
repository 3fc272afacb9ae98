//! CSV ingestion and sample output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use extint_core::SampleMatrix;

use crate::args::Layout;
use crate::error::CliError;

/// Parse a numeric CSV into rows. Ragged rows, empty input and
/// non-finite values are data errors.
pub fn parse_rows<R: Read>(reader: R, header: bool) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(header).flexible(false).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("malformed CSV: {e}")))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(col, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(CliError::Data(format!(
                    "record {}, field {}: '{field}' is not a finite number",
                    line + 1,
                    col + 1
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(CliError::Data("no data rows".into()));
    }
    Ok(rows)
}

pub fn read_rows(path: &Path, header: bool) -> Result<Vec<Vec<f64>>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    parse_rows(f, header)
}

/// The p pair-indexed vectors as matrix rows, whatever the file layout.
pub fn pair_units(rows: Vec<Vec<f64>>, layout: Layout) -> Result<SampleMatrix, CliError> {
    let m = SampleMatrix::from_rows(&rows)?;
    match layout {
        Layout::Rows => Ok(m),
        Layout::Cols => Ok(m.transpose()?),
    }
}

/// 17 significant digits, enough to recover every f64 exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_samples<W: Write>(w: W, columns: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    wtr.write_record(columns).map_err(io)?;
    for row in rows {
        wtr.write_record(row.iter().map(|&v| format_value(v))).map_err(io)?;
    }
    wtr.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_round_trip_exactly() {
        let rows = vec![vec![0.1, -1.0 / 3.0], vec![f64::MIN_POSITIVE, 1e300], vec![std::f64::consts::PI, -0.0]];
        let mut buf = Vec::new();
        write_samples(&mut buf, &["a".into(), "b".into()], &rows).unwrap();
        let back = parse_rows(buf.as_slice(), true).unwrap();
        for (r, b) in rows.iter().zip(&back) {
            for (x, y) in r.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn ragged_rows_are_data_errors() {
        let err = parse_rows("1,2\n3\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, CliError::Data(_)));
    }

    #[test]
    fn non_numeric_and_nan_rejected() {
        assert!(matches!(parse_rows("1,x\n".as_bytes(), false), Err(CliError::Data(_))));
        assert!(matches!(parse_rows("1,NaN\n".as_bytes(), false), Err(CliError::Data(_))));
    }

    #[test]
    fn header_is_skipped() {
        let rows = parse_rows("a,b\n1,2\n".as_bytes(), true).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn column_layout_transposes() {
        let m = pair_units(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]], Layout::Cols).unwrap();
        assert_eq!((m.p(), m.n()), (3, 2));
        assert_eq!(m.row(1), &[2.0, 5.0]);
    }
}
