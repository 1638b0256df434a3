//! Pluggable token counting for budget enforcement.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Vocabulary for greedy longest-match counting.
#[derive(Debug)]
pub struct TokenTable {
    source: PathBuf,
    tokens: HashSet<String>,
    max_chars: usize,
}

impl TokenTable {
    pub fn from_tokens<I: IntoIterator<Item = String>>(tokens: I) -> TokenTable {
        let tokens: HashSet<String> = tokens.into_iter().filter(|t| !t.is_empty()).collect();
        let max_chars = tokens.iter().map(|t| t.chars().count()).max().unwrap_or(0);
        TokenTable {
            source: PathBuf::new(),
            tokens,
            max_chars,
        }
    }

    /// One token per line; blank lines are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<TokenTable> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut table =
            TokenTable::from_tokens(text.lines().map(|l| l.trim_end_matches('\r').to_string()));
        table.source = path.to_path_buf();
        Ok(table)
    }

    /// Greedy longest match inside each whitespace-separated word; a
    /// character no entry covers counts as one token.
    fn count(&self, text: &str) -> usize {
        let mut total = 0;
        for word in text.split_whitespace() {
            let chars: Vec<(usize, char)> = word.char_indices().collect();
            let mut i = 0;
            while i < chars.len() {
                let longest = (2..=self.max_chars.min(chars.len() - i))
                    .rev()
                    .find(|&len| {
                        let start = chars[i].0;
                        let end = chars.get(i + len).map_or(word.len(), |c| c.0);
                        self.tokens.contains(&word[start..end])
                    })
                    .unwrap_or(1);
                i += longest;
                total += 1;
            }
        }
        total
    }
}

#[derive(Debug, Clone)]
pub enum CounterMode {
    Whitespace,
    CharsPerToken(f64),
    Table(Arc<TokenTable>),
}

#[derive(Debug, Clone)]
pub struct TokenCounter {
    pub mode: CounterMode,
    pub limit: usize,
}

impl TokenCounter {
    pub fn whitespace(limit: usize) -> Self {
        TokenCounter {
            mode: CounterMode::Whitespace,
            limit,
        }
    }

    pub fn chars_per_token(ratio: f64, limit: usize) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::Config(format!("chars per token must be > 0, got {ratio}")));
        }
        Ok(TokenCounter {
            mode: CounterMode::CharsPerToken(ratio),
            limit,
        })
    }

    pub fn table(table: TokenTable, limit: usize) -> Self {
        TokenCounter {
            mode: CounterMode::Table(Arc::new(table)),
            limit,
        }
    }

    /// Whitespace counting with no budget.
    pub fn unlimited() -> Self {
        TokenCounter::whitespace(usize::MAX)
    }

    pub fn is_unlimited(&self) -> bool {
        self.limit == usize::MAX
    }

    pub fn with_limit(&self, limit: usize) -> Self {
        TokenCounter {
            mode: self.mode.clone(),
            limit,
        }
    }

    /// Parses `whitespace`, `chars:R` or `table:PATH`.
    pub fn parse(spec: &str, limit: usize) -> Result<Self> {
        let spec = spec.trim();
        if spec == "whitespace" {
            return Ok(TokenCounter::whitespace(limit));
        }
        if let Some(r) = spec.strip_prefix("chars:") {
            let ratio = r
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad chars-per-token ratio {r:?}")))?;
            return TokenCounter::chars_per_token(ratio, limit);
        }
        if let Some(path) = spec.strip_prefix("table:") {
            return Ok(TokenCounter::table(TokenTable::load(path.trim())?, limit));
        }
        Err(Error::Config(format!("unknown counter {spec:?}")))
    }

    pub fn count(&self, text: &str) -> usize {
        match &self.mode {
            CounterMode::Whitespace => text.split_whitespace().count(),
            CounterMode::CharsPerToken(r) => (text.chars().count() as f64 / r).ceil() as usize,
            CounterMode::Table(t) => t.count(text),
        }
    }

    pub fn fits(&self, text: &str) -> bool {
        self.count(text) <= self.limit
    }
}

impl fmt::Display for CounterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CounterMode::Whitespace => f.write_str("whitespace"),
            CounterMode::CharsPerToken(r) => write!(f, "chars:{r}"),
            CounterMode::Table(t) => write!(f, "table:{}", t.source.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn whitespace_counts() {
        let c = TokenCounter::whitespace(10);
        assert_eq!(c.count("a b  c"), 3);
        assert_eq!(c.count(""), 0);
        assert_eq!(c.count("  \n\t "), 0);
    }

    #[test]
    fn chars_per_token_counts() {
        let c = TokenCounter::chars_per_token(4.0, 10).unwrap();
        assert_eq!(c.count(&"x".repeat(100)), 25);
        assert_eq!(c.count(&"x".repeat(101)), 26);
        assert_eq!(c.count(""), 0);
        assert!(TokenCounter::chars_per_token(0.0, 1).is_err());
    }

    #[test]
    fn table_longest_match() {
        let t = TokenTable::from_tokens(["<node_".into(), ">".into(), "conn".into(), "connected".into()]);
        let c = TokenCounter::table(t, 100);
        // "<node_" "1" "2" ">" / "connected"
        assert_eq!(c.count("<node_12> connected"), 5);
        assert_eq!(c.count("connect"), 4);
        assert_eq!(c.count(""), 0);
    }

    #[test]
    fn table_file_errors() {
        assert!(matches!(
            TokenCounter::parse("table:/nonexistent/vocab.txt", 5),
            Err(Error::Io { .. })
        ));
        assert!(TokenCounter::parse("bpe", 5).is_err());
        assert!(matches!(
            TokenCounter::parse("chars:3.5", 5).unwrap().mode,
            CounterMode::CharsPerToken(r) if r == 3.5
        ));
    }

    proptest! {
        #[test]
        fn monotone_under_concatenation(a in "[a-c <>_ \n]{0,40}", b in "[a-c <>_ \n]{0,40}", r in 1.0f64..8.0) {
            for c in [TokenCounter::whitespace(0), TokenCounter::chars_per_token(r, 0).unwrap()] {
                let joined = format!("{a}{b}");
                prop_assert!(c.count(&joined) >= c.count(&a).max(c.count(&b)));
            }
        }
    }
}
