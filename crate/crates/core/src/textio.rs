//! Line-numbered token scanning shared by the text formats.
//!
//! All formats are whitespace-separated token streams; `#` starts a comment
//! that runs to the end of the line.

use thiserror::Error;

/// Parse failure with the 1-based source line and the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// A token stream over text input, tracking line numbers and stripping
/// `#` comments.
pub struct Scanner<'a> {
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Scanner<'a> {
    pub fn new(input: &'a str) -> Self {
        let mut tokens = Vec::new();
        for (idx, raw_line) in input.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                tokens.push((idx + 1, tok));
            }
        }
        Scanner { tokens, pos: 0 }
    }

    /// Line number of the most recently consumed token (or 1 if none).
    pub fn line(&self) -> usize {
        if self.pos == 0 {
            self.tokens.first().map(|t| t.0).unwrap_or(1)
        } else {
            self.tokens[self.pos - 1].0
        }
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.1)
    }

    pub fn next_token(&mut self) -> Option<(usize, &'a str)> {
        let t = self.tokens.get(self.pos).copied();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn expect_token(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        self.next_token()
            .ok_or_else(|| ParseError::new(self.line(), format!("expected {what}, found end of input")))
    }

    /// Consumes a token that must equal `word`.
    pub fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        let (line, tok) = self.expect_token(&format!("`{word}`"))?;
        if tok != word {
            return Err(ParseError::new(line, format!("expected `{word}`, found `{tok}`")));
        }
        Ok(())
    }

    pub fn expect_usize(&mut self, what: &str) -> Result<usize, ParseError> {
        let (line, tok) = self.expect_token(what)?;
        tok.parse::<usize>()
            .map_err(|_| ParseError::new(line, format!("expected {what} (an integer), found `{tok}`")))
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        match self.tokens.get(self.pos) {
            None => Ok(()),
            Some((line, tok)) => Err(ParseError::new(*line, format!("unexpected trailing token `{tok}`"))),
        }
    }
}
