//! External solution import/export.
//!
//! Format: UTF-8 lines of `<variable name> <value>`, `#` starts a comment,
//! blank lines ignored. This is how solutions produced by an external MPS
//! solve come back into the pipeline.

use super::MilpInstance;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolutionIoError {
    #[error("line {line}: expected `<name> <value>`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: bad number `{text}`")]
    BadNumber { line: usize, text: String },
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("line {line}: duplicate value for variable `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("no value for variable `{0}`")]
    Missing(String),
}

/// Parses a solution file against an instance, returning values in
/// variable-id order. Every variable must be covered exactly once.
pub fn parse_solution(
    instance: &MilpInstance,
    text: &str,
) -> Result<Vec<f64>, SolutionIoError> {
    let index: HashMap<&str, usize> = instance
        .variables()
        .iter()
        .map(|v| (v.name.as_str(), v.id.0))
        .collect();
    let mut values = vec![f64::NAN; instance.num_vars()];
    let mut seen = vec![false; instance.num_vars()];

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        // The value is the last whitespace-separated token; names may
        // contain interior spaces.
        let Some(split) = line.rfind(char::is_whitespace) else {
            return Err(SolutionIoError::Malformed {
                line: lineno,
                text: line.to_string(),
            });
        };
        let (name, value_text) = (line[..split].trim_end(), line[split..].trim());
        let value: f64 = value_text.parse().map_err(|_| SolutionIoError::BadNumber {
            line: lineno,
            text: value_text.to_string(),
        })?;
        let Some(&id) = index.get(name) else {
            return Err(SolutionIoError::UnknownVariable {
                line: lineno,
                name: name.to_string(),
            });
        };
        if seen[id] {
            return Err(SolutionIoError::Duplicate {
                line: lineno,
                name: name.to_string(),
            });
        }
        seen[id] = true;
        values[id] = value;
    }

    if let Some(i) = seen.iter().position(|&s| !s) {
        return Err(SolutionIoError::Missing(
            instance.variables()[i].name.clone(),
        ));
    }
    Ok(values)
}

/// Writes a solution in the line format accepted by [`parse_solution`].
pub fn format_solution(instance: &MilpInstance, values: &[f64]) -> String {
    let mut out = String::new();
    out.push_str("# <variable name> <value>\n");
    for v in instance.variables() {
        out.push_str(&v.name);
        out.push(' ');
        out.push_str(&format!("{}", values[v.id.0]));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{InstanceBuilder, Sense};
    use super::*;

    fn inst() -> super::super::MilpInstance {
        let mut b = InstanceBuilder::new("s");
        let x = b.continuous("x", 0.0, 1.0);
        let y = b.continuous("long name", 0.0, 1.0);
        b.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Sense::Le, 2.0);
        b.build().unwrap()
    }

    #[test]
    fn roundtrip() {
        let inst = inst();
        let vals = vec![0.25, 0.75];
        let text = format_solution(&inst, &vals);
        let back = parse_solution(&inst, &text).unwrap();
        assert_eq!(back, vals);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let inst = inst();
        let text = "# header\n\nx 1.0   # trailing\nlong name 0.5\n";
        let back = parse_solution(&inst, text).unwrap();
        assert_eq!(back, vec![1.0, 0.5]);
    }

    #[test]
    fn missing_variable_is_named() {
        let inst = inst();
        let e = parse_solution(&inst, "x 1.0\n").unwrap_err();
        assert!(e.to_string().contains("long name"), "{e}");
    }

    #[test]
    fn unknown_and_duplicate_rejected() {
        let inst = inst();
        assert!(parse_solution(&inst, "zzz 1.0\n").is_err());
        assert!(parse_solution(&inst, "x 1\nx 2\nlong name 0\n").is_err());
    }
}
