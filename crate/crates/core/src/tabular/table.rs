use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tabular::schema::{ColumnKind, Schema};

/// A single value: a real number for continuous columns, or a 0-based
/// category index for categorical ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Cat(usize),
}

impl Cell {
    /// Numeric value of a continuous cell. Panics on a categorical cell.
    pub fn num(self) -> f64 {
        match self {
            Cell::Num(v) => v,
            Cell::Cat(_) => panic!("expected a continuous cell"),
        }
    }

    /// Category index of a categorical cell. Panics on a continuous cell.
    pub fn cat(self) -> usize {
        match self {
            Cell::Cat(c) => c,
            Cell::Num(_) => panic!("expected a categorical cell"),
        }
    }
}

pub type Record = Vec<Cell>;

/// Immutable mixed-type table. The schema is shared, so subsets and
/// generator outputs are cheap to produce.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Arc<Schema>,
    rows: Vec<Record>,
}

impl Table {
    pub fn new(schema: Schema, rows: Vec<Record>) -> Result<Self> {
        Self::with_shared_schema(Arc::new(schema), rows)
    }

    pub fn with_shared_schema(schema: Arc<Schema>, rows: Vec<Record>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            check_record(&schema, i, row)?;
        }
        Ok(Self { schema, rows })
    }

    /// New table over the same schema.
    pub fn with_rows(&self, rows: Vec<Record>) -> Result<Self> {
        Self::with_shared_schema(Arc::clone(&self.schema), rows)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn shared_schema(&self) -> Arc<Schema> {
        Arc::clone(&self.schema)
    }

    pub fn rows(&self) -> &[Record] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Record {
        &self.rows[i]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn into_rows(self) -> Vec<Record> {
        self.rows
    }

    /// Values of a continuous column.
    pub fn numeric_column(&self, col: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[col].num()).collect()
    }

    /// Label category of row `i`, if the schema has a label column.
    pub fn label_of(&self, i: usize) -> Option<usize> {
        self.schema.label_index().map(|l| self.rows[i][l].cat())
    }

    /// Row indices grouped by label category (one group per declared
    /// category, possibly empty). Returns `None` without a label column.
    pub fn label_groups(&self) -> Option<Vec<Vec<usize>>> {
        let l = self.schema.label_index()?;
        let mut groups = vec![Vec::new(); self.schema.column(l).categories.len()];
        for (i, r) in self.rows.iter().enumerate() {
            groups[r[l].cat()].push(i);
        }
        Some(groups)
    }

    pub fn subset(&self, indices: &[usize]) -> Table {
        Table {
            schema: Arc::clone(&self.schema),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Copy with row `i` removed.
    pub fn without_row(&self, i: usize) -> Table {
        let mut rows = self.rows.clone();
        rows.remove(i);
        Table {
            schema: Arc::clone(&self.schema),
            rows,
        }
    }

    pub fn ensure_non_empty(&self) -> Result<()> {
        if self.rows.is_empty() {
            Err(Error::EmptyTable)
        } else {
            Ok(())
        }
    }

    pub fn ensure_rows(&self, needed: usize) -> Result<()> {
        if self.rows.len() < needed {
            Err(Error::InsufficientRows {
                needed,
                got: self.rows.len(),
            })
        } else {
            Ok(())
        }
    }
}

pub(crate) fn check_record(schema: &Schema, row: usize, record: &Record) -> Result<()> {
    if record.len() != schema.len() {
        return Err(Error::InvalidRecord {
            row,
            reason: format!("expected {} cells, got {}", schema.len(), record.len()),
        });
    }
    for (spec, cell) in schema.columns().iter().zip(record) {
        match (spec.kind, cell) {
            (ColumnKind::Continuous, Cell::Num(v)) if v.is_finite() => {}
            (ColumnKind::Continuous, Cell::Num(v)) => {
                return Err(Error::InvalidRecord {
                    row,
                    reason: format!("non-finite value {v} in `{}`", spec.name),
                })
            }
            (ColumnKind::Categorical, Cell::Cat(c)) if *c < spec.categories.len() => {}
            (ColumnKind::Categorical, Cell::Cat(c)) => {
                return Err(Error::InvalidRecord {
                    row,
                    reason: format!("category index {c} out of range in `{}`", spec.name),
                })
            }
            _ => {
                return Err(Error::InvalidRecord {
                    row,
                    reason: format!("cell kind does not match column `{}`", spec.name),
                })
            }
        }
    }
    Ok(())
}
