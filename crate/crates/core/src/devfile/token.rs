//! Stream tokenizer for development files.
//!
//! Every byte of the input belongs to exactly one token, so concatenating
//! token texts reproduces the source. Comments are `(* ... *)` and nest;
//! a keyword spelled inside a comment is part of the comment token and is
//! never reported as a [`TokenKind::Keyword`].

use std::ops::Range;

use super::DevFileError;

/// Words that have meaning to the parser when they occur outside comments.
pub const KEYWORDS: &[&str] = &["Definition", "Theorem", "Lemma", "Axiom", "Qed", "Admitted"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Comment,
    Keyword,
    Identifier,
    Punct,
    Whitespace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offset of the first byte of the token.
    pub offset: usize,
    /// 1-based line of the first byte of the token.
    pub line: usize,
}

impl Token {
    pub fn span(&self) -> Range<usize> {
        self.offset..self.offset + self.text.len()
    }

    /// Whitespace and comments.
    pub fn is_trivia(&self) -> bool {
        matches!(self.kind, TokenKind::Comment | TokenKind::Whitespace)
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == word
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punct && self.text.len() == c.len_utf8() && self.text.starts_with(c)
    }

    /// Text between the comment delimiters. Only meaningful for comments.
    pub fn comment_body(&self) -> &str {
        debug_assert_eq!(self.kind, TokenKind::Comment);
        &self.text[2..self.text.len() - 2]
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Tokenize raw bytes. Fails on invalid UTF-8 or an unterminated comment.
pub fn tokenize(source: &[u8]) -> Result<Vec<Token>, DevFileError> {
    let text = std::str::from_utf8(source).map_err(|e| DevFileError::InvalidUtf8 {
        offset: e.valid_up_to(),
    })?;
    tokenize_str(text)
}

pub fn tokenize_str(src: &str) -> Result<Vec<Token>, DevFileError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let mut line = 1;

    while pos < bytes.len() {
        let start = pos;
        let c = src[pos..].chars().next().expect("pos is on a char boundary");
        let kind = if bytes[pos..].starts_with(b"(*") {
            let mut depth = 0usize;
            loop {
                if pos >= bytes.len() {
                    return Err(DevFileError::UnterminatedComment { offset: start, line });
                }
                if bytes[pos..].starts_with(b"(*") {
                    depth += 1;
                    pos += 2;
                } else if bytes[pos..].starts_with(b"*)") {
                    depth -= 1;
                    pos += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    pos += 1;
                }
            }
            TokenKind::Comment
        } else if c.is_whitespace() {
            pos += src[pos..]
                .find(|ch: char| !ch.is_whitespace())
                .unwrap_or(bytes.len() - pos);
            TokenKind::Whitespace
        } else if is_ident_char(c) {
            pos += src[pos..]
                .find(|ch: char| !is_ident_char(ch))
                .unwrap_or(bytes.len() - pos);
            if KEYWORDS.contains(&&src[start..pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else {
            pos += c.len_utf8();
            TokenKind::Punct
        };
        let text = &src[start..pos];
        tokens.push(Token {
            kind,
            text: text.to_string(),
            offset: start,
            line,
        });
        line += text.bytes().filter(|&b| b == b'\n').count();
    }
    Ok(tokens)
}
