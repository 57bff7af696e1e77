//! Rectangular named-column data used by the regression pipelines.

use std::collections::HashSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::input(format!("{} names for {} columns", names.len(), columns.len())));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::input(format!("duplicate column name `{name}`")));
            }
        }
        if let Some(first) = columns.first() {
            if let Some((i, _)) = columns.iter().enumerate().find(|(_, c)| c.len() != first.len()) {
                return Err(Error::input(format!("column `{}` has a different length than `{}`", names[i], names[0])));
            }
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("column `{name}` contains a non-finite value")));
            }
        }
        Ok(Self { names, columns })
    }

    /// Build from `(name, values)` pairs.
    pub fn from_pairs<S: Into<String>>(pairs: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let (names, columns) = pairs.into_iter().map(|(n, c)| (n.into(), c)).unzip();
        Self::new(names, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Rows in the given order (indices may repeat).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| rows.iter().map(|&r| c[r]).collect()).collect(),
        }
    }

    /// Copy with every entry of `name` replaced by `value`.
    pub fn with_constant(&self, name: &str, value: f64) -> Result<Dataset> {
        let i = self.index_of(name)?;
        let mut out = self.clone();
        out.columns[i].iter_mut().for_each(|v| *v = value);
        Ok(out)
    }

    /// Copy with an extra (or replaced) column.
    pub fn with_column(&self, name: &str, values: Vec<f64>) -> Result<Dataset> {
        if values.len() != self.n_rows() && !self.columns.is_empty() {
            return Err(Error::input(format!("column `{name}` has {} rows, expected {}", values.len(), self.n_rows())));
        }
        let mut out = self.clone();
        match self.names.iter().position(|n| n == name) {
            Some(i) => out.columns[i] = values,
            None => {
                out.names.push(name.to_string());
                out.columns.push(values);
            }
        }
        Ok(out)
    }

    /// Subtract the sample mean from each named column.
    pub fn center(&mut self, names: &[&str]) -> Result<()> {
        for name in names {
            let i = self.index_of(name)?;
            let col = &mut self.columns[i];
            if col.is_empty() {
                continue;
            }
            let m = col.iter().sum::<f64>() / col.len() as f64;
            col.iter_mut().for_each(|v| *v -= m);
        }
        Ok(())
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }
}
