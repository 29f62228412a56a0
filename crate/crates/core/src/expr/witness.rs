//! Witness files: a claimed optimum and a point, one `name = p/q` per line.
//!
//! ```text
//! claimed = -1/22
//! m = 15/11
//! n2prime = 3/10  # inferred
//! ```
//!
//! A trailing `# inferred` comment marks a coordinate that was not part
//! of the reference result.

use super::{ParseError, Point};
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub claimed: Option<Rational>,
    pub point: Point,
    pub inferred: Vec<String>,
}

pub fn parse_witness(text: &str) -> Result<Witness, ParseError> {
    let mut witness = Witness { claimed: None, point: Point::new(), inferred: Vec::new() };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (content, comment) = match raw.split_once('#') {
            Some((c, rest)) => (c, Some(rest.trim())),
            None => (raw, None),
        };
        if content.trim().is_empty() {
            continue;
        }
        let syntax = |column: usize, message: String| ParseError::Syntax { line, column, message };
        let (name, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(1, "expected `name = p/q`".into()))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(syntax(1, format!("invalid name `{name}`")));
        }
        let value_column = content.len() - value.trim_start().len() + 1;
        let value = parse_rational(value)
            .ok_or_else(|| syntax(value_column, format!("invalid rational `{}`", value.trim())))?;
        if name == "claimed" {
            witness.claimed = Some(value);
            continue;
        }
        if witness.point.insert(name.to_string(), value).is_some() {
            return Err(syntax(1, format!("duplicate coordinate `{name}`")));
        }
        if comment == Some("inferred") {
            witness.inferred.push(name.to_string());
        }
    }
    Ok(witness)
}
