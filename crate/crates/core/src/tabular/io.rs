use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tabular::schema::{ColumnKind, Schema};
use crate::tabular::table::{Cell, Table};

/// Loads an RFC-4180 CSV whose header matches `schema` column-for-column.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Table> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    for (pos, spec) in schema.columns().iter().enumerate() {
        let found = header.get(pos).unwrap_or("").trim();
        if found != spec.name {
            return Err(Error::MissingColumn {
                expected: spec.name.clone(),
                found: found.to_owned(),
                position: pos,
            });
        }
    }
    if header.len() != schema.len() {
        return Err(Error::InvalidSchema(format!(
            "CSV has {} columns, schema declares {}",
            header.len(),
            schema.len()
        )));
    }

    let mut rows = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut record = Vec::with_capacity(schema.len());
        for (spec, raw) in schema.columns().iter().zip(rec.iter()) {
            let raw = raw.trim();
            let cell = match spec.kind {
                ColumnKind::Continuous => match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Cell::Num(v),
                    _ => {
                        return Err(Error::NonNumericCell {
                            column: spec.name.clone(),
                            value: raw.to_owned(),
                            row,
                        })
                    }
                },
                ColumnKind::Categorical => match spec.category_index(raw) {
                    Some(c) => Cell::Cat(c),
                    None => {
                        return Err(Error::UnknownCategory {
                            column: spec.name.clone(),
                            value: raw.to_owned(),
                            row,
                        })
                    }
                },
            };
            record.push(cell);
        }
        rows.push(record);
    }
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    Table::with_shared_schema(Arc::new(schema.clone()), rows)
}

/// Writes `table` as CSV. Continuous values use the shortest representation
/// that parses back to the same `f64`, so a write/read cycle is lossless.
pub fn write_csv<W: Write>(writer: W, table: &Table) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let schema = table.schema();
    wtr.write_record(schema.columns().iter().map(|c| c.name.as_str()))?;
    let mut fields = Vec::with_capacity(schema.len());
    for row in table.rows() {
        fields.clear();
        for (spec, cell) in schema.columns().iter().zip(row) {
            fields.push(match cell {
                Cell::Num(v) => format!("{v}"),
                Cell::Cat(c) => spec.categories[*c].clone(),
            });
        }
        wtr.write_record(&fields)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, table: &Table) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(std::io::BufWriter::new(file), table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::ColumnSpec;

    fn schema() -> Schema {
        Schema::new(
            vec![
                ColumnSpec::continuous("x"),
                ColumnSpec::categorical("c", ["A", "B"]),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn header_only_is_empty() {
        let err = read_csv("x,c\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::EmptyTable));
    }

    #[test]
    fn unknown_category() {
        let err = read_csv("x,c\n1.0,A\n2.0,Z\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::UnknownCategory { ref value, row: 1, .. } if value == "Z"));
    }

    #[test]
    fn non_numeric_and_missing() {
        let err = read_csv("x,c\nabc,A\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::NonNumericCell { .. }));
        let err = read_csv("x,c\n,A\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::NonNumericCell { .. }));
        let err = read_csv("x,c\nNaN,A\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::NonNumericCell { .. }));
    }

    #[test]
    fn header_mismatch() {
        let err = read_csv("c,x\nA,1\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn { position: 0, .. }));
        let err = read_csv("x\n1\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn { position: 1, .. }));
    }

    #[test]
    fn write_then_read() {
        let t = read_csv("x,c\n0.1,B\n-3.25e10,A\n".as_bytes(), &schema()).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &t).unwrap();
        assert_eq!(read_csv(buf.as_slice(), &schema()).unwrap(), t);
    }
}
