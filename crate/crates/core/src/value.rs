use alloc::string::{String, ToString};
use core::fmt;

use serde::{Deserialize, Serialize};

/// A literal block input or variable value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            Value::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(t) => Some(t),
            Value::Number(_) => None,
        }
    }

    /// Parses a spoken token sequence: a single numeric token becomes a
    /// number, anything else is text.
    pub fn from_spoken(text: &str) -> Value {
        match parse_number(text) {
            Some(n) => Value::Number(n),
            None => Value::Text(text.to_string()),
        }
    }
}

/// Accepts `-?digits(.digits)?` only, the digit form produced by text
/// normalization.
pub fn parse_number(token: &str) -> Option<f64> {
    let body = token.strip_prefix('-').unwrap_or(token);
    let mut parts = body.splitn(2, '.');
    let int = parts.next()?;
    let frac = parts.next();
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || frac.is_some_and(|f| !digits(f)) {
        return None;
    }
    token.parse::<f64>().ok()
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) if libm::trunc(*n) == *n && libm::fabs(*n) < 1e15 => write!(f, "{}", *n as i64),
            Value::Number(n) => write!(f, "{n}"),
            Value::Text(t) => f.write_str(t),
        }
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::Number(n)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    #[test]
    fn numbers_display_without_trailing_zero() {
        assert_eq!(format!("{}", Value::Number(20.0)), "20");
        assert_eq!(format!("{}", Value::Number(-1.5)), "-1.5");
        assert_eq!(format!("{}", Value::from("hello")), "hello");
    }

    #[test]
    fn spoken_numbers() {
        assert_eq!(Value::from_spoken("20"), Value::Number(20.0));
        assert_eq!(Value::from_spoken("-0.5"), Value::Number(-0.5));
        assert_eq!(Value::from_spoken("abc"), Value::from("abc"));
        assert_eq!(Value::from_spoken("1e3"), Value::from("1e3"));
        assert_eq!(parse_number("."), None);
        assert_eq!(parse_number("5."), None);
    }
}
