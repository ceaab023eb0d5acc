//! The values input format: one value per line, `#` comments to end of
//! line, blank lines ignored.

use crate::error::{Error, Result};
use crate::numeric::{parse_value, Value};

/// Parses a values file. Errors carry the 1-based line number.
pub fn parse_values(text: &str) -> Result<Vec<Value>> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let v = parse_value(content).map_err(|e| Error::ParseInput { line: idx + 1, reason: e.to_string() })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Empty);
    }
    Ok(values)
}

/// Renders `values` one per line.
pub fn format_values(values: &[Value]) -> String {
    let mut out = String::new();
    for v in values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

/// Removes zeros, returning the kept values and the input positions of the
/// dropped ones.
pub fn drop_zeros(values: Vec<Value>) -> (Vec<Value>, Vec<usize>) {
    let mut dropped = Vec::new();
    let kept = values
        .into_iter()
        .enumerate()
        .filter_map(|(i, v)| {
            if v.is_zero() {
                dropped.push(i);
                None
            } else {
                Some(v)
            }
        })
        .collect();
    (kept, dropped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blanks() {
        let v = parse_values("# header\n1\n\n  2.5  # trailing\n-3/4\n").unwrap();
        assert_eq!(v, vec![Value::from(1), Value::new(5, 2), Value::new(-3, 4)]);
        assert_eq!(parse_values(&format_values(&v)).unwrap(), v);
    }

    #[test]
    fn errors_name_the_line() {
        match parse_values("1\n2\nabc\n") {
            Err(Error::ParseInput { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("abc"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_values("# nothing\n\n"), Err(Error::Empty));
        assert!(parse_values("1 2\n").is_err());
    }

    #[test]
    fn zeros_are_dropped_with_positions() {
        let (kept, dropped) = drop_zeros(parse_values("0\n1\n0.0\n-2\n").unwrap());
        assert_eq!(kept, vec![Value::from(1), Value::from(-2)]);
        assert_eq!(dropped, vec![0, 2]);
    }
}
