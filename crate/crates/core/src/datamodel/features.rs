use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// One column of a design matrix, expressed over 0-based covariate indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Intercept,
    Linear(usize),
    Square(usize),
    Interaction(usize, usize),
    Exp(usize),
}

impl Term {
    fn max_index(self) -> Option<usize> {
        match self {
            Term::Intercept => None,
            Term::Linear(j) | Term::Square(j) | Term::Exp(j) => Some(j),
            Term::Interaction(j, k) => Some(j.max(k)),
        }
    }

    fn eval(self, x: &[f64]) -> f64 {
        match self {
            Term::Intercept => 1.0,
            Term::Linear(j) => x[j],
            Term::Square(j) => x[j] * x[j],
            Term::Interaction(j, k) => x[j] * x[k],
            Term::Exp(j) => x[j].exp(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Term::Intercept => f.write_str("1"),
            Term::Linear(j) => write!(f, "x{}", j + 1),
            Term::Square(j) => write!(f, "x{}^2", j + 1),
            Term::Interaction(j, k) => write!(f, "x{}:x{}", j + 1, k + 1),
            Term::Exp(j) => write!(f, "exp(x{})", j + 1),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Ordered list of terms turning a raw covariate vector into a design row.
///
/// Text form mirrors R model formulas restricted to the supported terms:
/// `1 + x1 + x2 + x2^2 + x1:x2 + exp(x2)`. Covariates are 1-based (`x1` is
/// the first covariate column). The intercept is implied and always placed
/// first; a `0` or `-1` term removes it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureMap {
    terms: Vec<Term>,
}

impl FeatureMap {
    /// Intercept followed by `terms`.
    pub fn with_intercept(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut all = vec![Term::Intercept];
        all.extend(terms.into_iter().filter(|t| *t != Term::Intercept));
        Self { terms: all }
    }

    /// Exactly `terms`, in order, without adding an intercept.
    pub fn without_intercept(terms: impl IntoIterator<Item = Term>) -> Self {
        Self {
            terms: terms.into_iter().collect(),
        }
    }

    pub fn intercept_only() -> Self {
        Self::with_intercept([])
    }

    /// `1 + x1 + ... + xq`.
    pub fn linear(q: usize) -> Self {
        Self::with_intercept((0..q).map(Term::Linear))
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.parse()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_names(&self) -> Vec<String> {
        self.terms.iter().map(Term::to_string).collect()
    }

    /// Fails unless every referenced covariate index is below `q`.
    pub fn check_covariates(&self, q: usize) -> Result<()> {
        for term in &self.terms {
            if let Some(j) = term.max_index() {
                if j >= q {
                    return Err(Error::Specification(format!(
                        "term {term} needs covariate x{} but only {q} covariates are available",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes the design row for `x` into `out` (length `self.len()`).
    /// Indices must already have been checked.
    pub(crate) fn fill_row(&self, x: &[f64], out: &mut [f64]) {
        for (slot, term) in out.iter_mut().zip(&self.terms) {
            *slot = term.eval(x);
        }
    }
}

/// Design row for covariates `x` under `map`, in term order.
pub fn build_design_row(map: &FeatureMap, x: &[f64]) -> Result<Vec<f64>> {
    map.check_covariates(x.len())?;
    let mut row = vec![0.0; map.len()];
    map.fill_row(x, &mut row);
    Ok(row)
}

impl fmt::Display for FeatureMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::with_capacity(self.terms.len() + 1);
        if self.terms.first() != Some(&Term::Intercept) {
            parts.push("0".into());
        }
        parts.extend(self.terms.iter().map(Term::to_string));
        f.write_str(&parts.join(" + "))
    }
}

impl Serialize for FeatureMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for FeatureMap {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut intercept = true;
        let mut terms = Vec::new();
        let normalized = text.replace("- 1", "+ -1");
        for raw in normalized.split('+') {
            let token: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            match token.as_str() {
                "" => {
                    return Err(Error::Specification(format!(
                        "empty term in feature map {text:?}"
                    )))
                }
                "1" => {}
                "0" | "-1" => intercept = false,
                _ => {
                    let term = parse_term(&token)?;
                    if !terms.contains(&term) {
                        terms.push(term);
                    }
                }
            }
        }
        Ok(if intercept {
            FeatureMap::with_intercept(terms)
        } else {
            FeatureMap::without_intercept(terms)
        })
    }
}

fn parse_term(token: &str) -> Result<Term> {
    let bad = || Error::Specification(format!("cannot parse feature term {token:?}"));
    if let Some(inner) = token.strip_prefix("exp(").and_then(|s| s.strip_suffix(')')) {
        return Ok(Term::Exp(parse_var(inner).ok_or_else(bad)?));
    }
    if let Some(base) = token.strip_suffix("^2") {
        return Ok(Term::Square(parse_var(base).ok_or_else(bad)?));
    }
    if let Some((a, b)) = token.split_once(':') {
        let j = parse_var(a).ok_or_else(bad)?;
        let k = parse_var(b).ok_or_else(bad)?;
        return Ok(if j == k {
            Term::Square(j)
        } else {
            Term::Interaction(j.min(k), j.max(k))
        });
    }
    parse_var(token).map(Term::Linear).ok_or_else(bad)
}

fn parse_var(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    let j: usize = digits.parse().ok()?;
    j.checked_sub(1)
}
