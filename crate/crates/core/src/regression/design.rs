use std::fmt;
use std::str::FromStr;

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const INTERCEPT: &str = "(Intercept)";

/// Right-hand-side term of a model formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Column(String),
    /// `I(col^2)`
    Square(String),
    /// `a:b`
    Interaction(String, String),
}

impl Term {
    pub fn columns(&self) -> Vec<&str> {
        match self {
            Term::Column(c) | Term::Square(c) => vec![c],
            Term::Interaction(a, b) => vec![a, b],
        }
    }

    fn evaluate(&self, data: &Dataset) -> Result<Vec<f64>> {
        Ok(match self {
            Term::Column(c) => data.column(c)?.to_vec(),
            Term::Square(c) => data.column(c)?.iter().map(|v| v * v).collect(),
            Term::Interaction(a, b) => data.column(a)?.iter().zip(data.column(b)?).map(|(x, y)| x * y).collect(),
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Column(c) => write!(f, "{c}"),
            Term::Square(c) => write!(f, "I({c}^2)"),
            Term::Interaction(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

/// `outcome ~ term + term + ...`, with an intercept unless `- 1` is given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub outcome: String,
    pub terms: Vec<Term>,
    pub intercept: bool,
}

impl ModelSpec {
    pub fn new(outcome: impl Into<String>, terms: Vec<Term>) -> Self {
        Self { outcome: outcome.into(), terms, intercept: true }
    }

    /// `outcome ~ treatment + covariates...`
    pub fn additive(outcome: &str, treatment: &str, covariates: &[&str]) -> Self {
        let mut terms = vec![Term::Column(treatment.to_string())];
        terms.extend(covariates.iter().map(|c| Term::Column(c.to_string())));
        Self::new(outcome, terms)
    }

    /// Every data column the formula reads.
    pub fn columns(&self) -> Vec<&str> {
        let mut out = vec![self.outcome.as_str()];
        for t in &self.terms {
            for c in t.columns() {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn mentions(&self, column: &str) -> bool {
        self.terms.iter().any(|t| t.columns().contains(&column))
    }

    pub fn design(&self, data: &Dataset) -> Result<DesignMatrix> {
        let mut names = Vec::new();
        let mut cols = Vec::new();
        if self.intercept {
            names.push(INTERCEPT.to_string());
            cols.push(vec![1.0; data.n_rows()]);
        }
        for t in &self.terms {
            names.push(t.to_string());
            cols.push(t.evaluate(data)?);
        }
        DesignMatrix::from_columns(names, cols)
    }

    pub fn response<'a>(&self, data: &'a Dataset) -> Result<&'a [f64]> {
        data.column(&self.outcome)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~ ", self.outcome)?;
        let rhs: Vec<String> = self.terms.iter().map(Term::to_string).collect();
        write!(f, "{}", rhs.join(" + "))?;
        if !self.intercept {
            write!(f, " - 1")?;
        }
        Ok(())
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '.')
}

fn ident(s: &str) -> Result<String> {
    let s = s.trim();
    if is_ident(s) {
        Ok(s.to_string())
    } else {
        Err(Error::ModelSpec(format!("`{s}` is not a column name")))
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lhs, rhs) = s.split_once('~').ok_or_else(|| Error::ModelSpec("missing `~`".into()))?;
        let outcome = ident(lhs)?;
        let mut rhs = rhs.trim().to_string();
        let mut intercept = true;
        if let Some(stripped) = rhs.strip_suffix("- 1").or_else(|| rhs.strip_suffix("-1")) {
            intercept = false;
            rhs = stripped.trim().to_string();
        }
        let mut terms = Vec::new();
        for raw in rhs.split('+') {
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(Error::ModelSpec(format!("empty term in `{s}`")));
            }
            let term = if let Some(inner) = raw.strip_prefix("I(").and_then(|r| r.strip_suffix(')')) {
                let base = inner
                    .trim()
                    .strip_suffix("^2")
                    .ok_or_else(|| Error::ModelSpec(format!("only squares are supported inside I(): `{raw}`")))?;
                Term::Square(ident(base)?)
            } else if let Some((a, b)) = raw.split_once(':') {
                Term::Interaction(ident(a)?, ident(b)?)
            } else {
                Term::Column(ident(raw)?)
            };
            terms.push(term);
        }
        Ok(Self { outcome, terms, intercept })
    }
}

/// Dense `n × p` design, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
    names: Vec<String>,
}

impl DesignMatrix {
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() || columns.is_empty() {
            return Err(Error::input("design needs one name per column and at least one column"));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::input("design columns differ in length"));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input("design contains a non-finite value"));
        }
        let p = columns.len();
        Ok(Self { n, p, data: columns.concat(), names })
    }

    /// Row-major convenience constructor with generated column names.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::input("design rows differ in length"));
        }
        let cols = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self::from_columns((0..p).map(|j| format!("x{j}")).collect(), cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    pub fn has_intercept(&self) -> bool {
        self.names.iter().any(|n| n == INTERCEPT)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `X · beta`
    pub fn apply(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (j, b) in beta.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(self.column(j)) {
                *o += b * x;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_terms() {
        let m: ModelSpec = "sbp ~ t + age + I(age^2) + t:age".parse().unwrap();
        assert_eq!(m.outcome, "sbp");
        assert_eq!(
            m.terms,
            vec![
                Term::Column("t".into()),
                Term::Column("age".into()),
                Term::Square("age".into()),
                Term::Interaction("t".into(), "age".into())
            ]
        );
        assert!(m.intercept);
        assert_eq!(m.to_string(), "sbp ~ t + age + I(age^2) + t:age");
        assert_eq!(m.to_string().parse::<ModelSpec>().unwrap(), m);
        assert_eq!(m.columns(), vec!["sbp", "t", "age"]);
    }

    #[test]
    fn no_intercept_and_errors() {
        let m: ModelSpec = "y ~ x - 1".parse().unwrap();
        assert!(!m.intercept);
        assert!("y x".parse::<ModelSpec>().is_err());
        assert!("y ~ x + ".parse::<ModelSpec>().is_err());
        assert!("y ~ I(x^3)".parse::<ModelSpec>().is_err());
        assert!("y ~ a b".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn design_from_dataset() {
        let d = Dataset::from_pairs(vec![("y", vec![1.0, 2.0]), ("x", vec![2.0, 3.0]), ("t", vec![1.0, 0.0])]).unwrap();
        let m: ModelSpec = "y ~ x + I(x^2) + t:x".parse().unwrap();
        let x = m.design(&d).unwrap();
        assert_eq!(x.n_cols(), 4);
        assert_eq!(x.column(2), &[4.0, 9.0]);
        assert_eq!(x.column(3), &[2.0, 0.0]);
        let bad: ModelSpec = "y ~ z".parse().unwrap();
        assert!(matches!(bad.design(&d), Err(Error::UnknownColumn(c)) if c == "z"));
    }
}
