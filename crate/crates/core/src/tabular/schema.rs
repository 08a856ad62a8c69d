use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Category labels in declared order; empty for continuous columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    /// Clamp range for noisy output. Continuous columns only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
}

impl ColumnSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Continuous,
            categories: Vec::new(),
            bounds: None,
        }
    }

    pub fn bounded(name: impl Into<String>, min: f64, max: f64) -> Self {
        Self {
            bounds: Some((min, max)),
            ..Self::continuous(name)
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
            categories: categories.into_iter().map(Into::into).collect(),
            bounds: None,
        }
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == ColumnKind::Categorical
    }

    /// Number of encoded dimensions this column occupies.
    pub fn encoded_width(&self) -> usize {
        match self.kind {
            ColumnKind::Continuous => 1,
            ColumnKind::Categorical => self.categories.len(),
        }
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidSchema("empty column name".into()));
        }
        match self.kind {
            ColumnKind::Categorical => {
                if self.categories.is_empty() {
                    return Err(Error::InvalidSchema(format!(
                        "categorical column `{}` has no categories",
                        self.name
                    )));
                }
                let mut seen = HashSet::new();
                for c in &self.categories {
                    if !seen.insert(c.as_str()) {
                        return Err(Error::InvalidSchema(format!(
                            "duplicate category `{c}` in column `{}`",
                            self.name
                        )));
                    }
                }
                if self.bounds.is_some() {
                    return Err(Error::InvalidSchema(format!(
                        "categorical column `{}` cannot carry bounds",
                        self.name
                    )));
                }
            }
            ColumnKind::Continuous => {
                if !self.categories.is_empty() {
                    return Err(Error::InvalidSchema(format!(
                        "continuous column `{}` cannot list categories",
                        self.name
                    )));
                }
                if let Some((lo, hi)) = self.bounds {
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(Error::InvalidSchema(format!(
                            "column `{}` has invalid bounds ({lo}, {hi})",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Ordered column list plus an optional categorical label column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<ColumnSpec>,
    label_column: Option<String>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>, label_column: Option<String>) -> Result<Self> {
        let schema = Self {
            columns,
            label_column,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::InvalidSchema("schema has no columns".into()));
        }
        let mut names = HashSet::new();
        for c in &self.columns {
            c.validate()?;
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate column `{}`", c.name)));
            }
        }
        if let Some(label) = &self.label_column {
            match self.columns.iter().find(|c| &c.name == label) {
                None => {
                    return Err(Error::InvalidSchema(format!(
                        "label column `{label}` does not exist"
                    )))
                }
                Some(c) if !c.is_categorical() => {
                    return Err(Error::InvalidSchema(format!(
                        "label column `{label}` must be categorical"
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &ColumnSpec {
        &self.columns[i]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn label_column(&self) -> Option<&str> {
        self.label_column.as_deref()
    }

    pub fn label_index(&self) -> Option<usize> {
        self.label_column.as_deref().and_then(|l| self.index_of(l))
    }

    /// Copy of this schema with a different (or no) label column.
    pub fn with_label(&self, label: Option<&str>) -> Result<Self> {
        Self::new(self.columns.clone(), label.map(str::to_owned))
    }

    pub fn encoded_dim(&self) -> usize {
        self.columns.iter().map(ColumnSpec::encoded_width).sum()
    }

    pub fn is_continuous_only(&self) -> bool {
        self.columns.iter().all(|c| !c.is_categorical())
    }

    pub fn continuous_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| !self.columns[i].is_categorical())
            .collect()
    }

    pub fn categorical_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| self.columns[i].is_categorical())
            .collect()
    }

    /// Parses the TOML sidecar format documented in the README.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SchemaFile = toml::from_str(text)?;
        file.into_schema()
    }

    pub fn to_toml_string(&self) -> String {
        let file = SchemaFile::from_schema(self);
        toml::to_string(&file).expect("schema sidecar serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }
}

// On-disk layout of the schema sidecar. Bounds are split into `min` / `max`
// keys so the file stays easy to write by hand.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    columns: Vec<ColumnEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnEntry {
    name: String,
    kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<f64>,
}

impl SchemaFile {
    fn into_schema(self) -> Result<Schema> {
        let columns = self
            .columns
            .into_iter()
            .map(|c| {
                let bounds = match (c.min, c.max) {
                    (Some(lo), Some(hi)) => Some((lo, hi)),
                    (None, None) => None,
                    _ => {
                        return Err(Error::InvalidSchema(format!(
                            "column `{}` must give both min and max or neither",
                            c.name
                        )))
                    }
                };
                Ok(ColumnSpec {
                    name: c.name,
                    kind: c.kind,
                    categories: c.categories.unwrap_or_default(),
                    bounds,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Schema::new(columns, self.label)
    }

    fn from_schema(schema: &Schema) -> Self {
        Self {
            label: schema.label_column.clone(),
            columns: schema
                .columns
                .iter()
                .map(|c| ColumnEntry {
                    name: c.name.clone(),
                    kind: c.kind,
                    categories: c.is_categorical().then(|| c.categories.clone()),
                    min: c.bounds.map(|b| b.0),
                    max: c.bounds.map(|b| b.1),
                })
                .collect(),
        }
    }
}
