use alloc::string::{String, ToString};
use core::fmt;

use thiserror::Error;

/// A normalized identifier: lowercase ASCII letters, digits, `_` and `-`.
///
/// Lifted operator parameters are symbols with a leading `?`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("empty identifier")]
    Empty,
    #[error("invalid character {ch:?} in identifier {raw:?}")]
    InvalidChar { raw: String, ch: char },
}

impl Symbol {
    pub const AIR: &'static str = "air";
    pub const TABLE: &'static str = "table";
    pub const HAND: &'static str = "hand";

    /// Accepts an already-normalized identifier.
    pub fn new(raw: &str) -> Result<Self, SymbolError> {
        let body = raw.strip_prefix('?').unwrap_or(raw);
        if body.is_empty() {
            return Err(SymbolError::Empty);
        }
        if let Some(ch) = body
            .chars()
            .find(|c| !(c.is_ascii_lowercase() || c.is_ascii_digit() || *c == '_' || *c == '-'))
        {
            return Err(SymbolError::InvalidChar { raw: raw.to_string(), ch });
        }
        Ok(Symbol(raw.to_string()))
    }

    /// Lowercases and joins whitespace-separated words with underscores,
    /// then validates.
    pub fn normalize(raw: &str) -> Result<Self, SymbolError> {
        let mut out = String::with_capacity(raw.len());
        for (i, word) in raw.split_whitespace().enumerate() {
            if i > 0 {
                out.push('_');
            }
            for c in word.chars() {
                out.extend(c.to_lowercase());
            }
        }
        Symbol::new(&out)
    }

    pub fn air() -> Self {
        Symbol(Symbol::AIR.to_string())
    }

    pub fn table() -> Self {
        Symbol(Symbol::TABLE.to_string())
    }

    pub fn hand() -> Self {
        Symbol(Symbol::HAND.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_variable(&self) -> bool {
        self.0.starts_with('?')
    }

    /// `air`, `table` or `hand`.
    pub fn is_reserved(&self) -> bool {
        matches!(self.0.as_str(), Symbol::AIR | Symbol::TABLE | Symbol::HAND)
    }

    pub fn is_air(&self) -> bool {
        self.0 == Symbol::AIR
    }

    pub fn is_hand(&self) -> bool {
        self.0 == Symbol::HAND
    }

    pub fn is_table(&self) -> bool {
        self.0 == Symbol::TABLE
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Symbol {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Shorthand for literals known to be valid. Panics otherwise.
#[doc(hidden)]
#[macro_export]
macro_rules! sym {
    ($s:expr) => {
        $crate::Symbol::new($s).expect("valid symbol literal")
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_joins_words() {
        assert_eq!(Symbol::normalize("  Drinking   Glass ").unwrap().as_str(), "drinking_glass");
        assert_eq!(Symbol::normalize("cell_12").unwrap().as_str(), "cell_12");
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(Symbol::normalize("   "), Err(SymbolError::Empty));
        assert!(matches!(Symbol::new("a(b"), Err(SymbolError::InvalidChar { ch: '(', .. })));
        assert!(Symbol::new("Bottle").is_err());
    }

    #[test]
    fn variables_and_reserved() {
        assert!(Symbol::new("?obj").unwrap().is_variable());
        assert!(Symbol::new("?").is_err());
        assert!(Symbol::air().is_reserved());
        assert!(!Symbol::new("bottle").unwrap().is_reserved());
    }
}
