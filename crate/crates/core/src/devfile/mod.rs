//! Single-file formal developments with embedded marketplace annotations.
//!
//! A development is a sequence of items (`Definition`, `Theorem`, `Lemma`,
//! `Axiom`). Market state lives in comments: a header block of
//! `(* BALANCE: <agent> <int> *)` lines before the first item, and per-item
//! annotations (`BOUNTY`, `SUBBOUNTY`, `LOCK`, `COLLECTED`, `ESTIMATE`)
//! directly preceding the item they describe.

mod annotation;
mod parse;
mod render;
mod token;

use std::fmt;
use std::ops::Range;

use thiserror::Error;

pub use annotation::{Annotation, AnnotationKind, Estimate, Marker, MARKERS};
pub use parse::parse;
pub use render::render;
pub use token::{tokenize, tokenize_str, Token, TokenKind, KEYWORDS};

use crate::ledger::{AgentId, Tokens};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DevFileError {
    #[error("invalid UTF-8 at byte {offset}")]
    InvalidUtf8 { offset: usize },
    #[error("unterminated comment opened at line {line} (byte {offset})")]
    UnterminatedComment { offset: usize, line: usize },
    #[error("duplicate item name `{0}`")]
    DuplicateName(String),
    #[error("item `{0}` has a proof without a Qed/Admitted terminator")]
    MissingTerminator(String),
    #[error("annotation at bytes {}..{} is not followed by an item", .0.start, .0.end)]
    OrphanAnnotation(Range<usize>),
    #[error("malformed annotation at bytes {}..{}: {reason}", .span.start, .span.end)]
    MalformedAnnotation { span: Range<usize>, reason: String },
    #[error("malformed item at line {line}: {reason}")]
    MalformedItem { line: usize, reason: String },
    #[error("item `{0}` has an empty statement")]
    EmptyStatement(String),
    #[error("unexpected `{text}` at line {line}")]
    UnexpectedToken { line: usize, text: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ItemKind {
    Definition,
    Theorem,
    Lemma,
    Axiom,
}

impl ItemKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ItemKind::Definition => "Definition",
            ItemKind::Theorem => "Theorem",
            ItemKind::Lemma => "Lemma",
            ItemKind::Axiom => "Axiom",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "Definition" => ItemKind::Definition,
            "Theorem" => ItemKind::Theorem,
            "Lemma" => ItemKind::Lemma,
            "Axiom" => ItemKind::Axiom,
            _ => return None,
        })
    }

    /// Theorems and lemmas carry proofs.
    pub fn has_proof(self) -> bool {
        matches!(self, ItemKind::Theorem | ItemKind::Lemma)
    }
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProofStatus {
    Qed,
    Admitted,
    /// No proof body at all; also the status of definitions and axioms.
    Open,
}

impl fmt::Display for ProofStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProofStatus::Qed => "Qed",
            ProofStatus::Admitted => "Admitted",
            ProofStatus::Open => "Open",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub name: String,
    pub kind: ItemKind,
    /// Canonical statement, see [`canonical_statement`].
    pub statement_text: String,
    /// Raw source from the kind keyword through the closing `.`.
    pub statement_source: String,
    /// Raw source after the statement through the terminator's `.`, if any.
    pub proof_source: Option<String>,
    pub proof_status: ProofStatus,
    /// Tokens of the proof body, terminator included.
    pub proof_tokens: Vec<Token>,
    /// Tokens of the statement.
    pub statement_tokens: Vec<Token>,
    pub annotations: Vec<Annotation>,
    pub estimate: Option<Estimate>,
    pub position: usize,
    /// Source text between the previous item and this one, annotation
    /// comments removed.
    pub preceding: String,
    /// 1-based line of the kind keyword.
    pub line: usize,
}

impl Item {
    pub fn bounty(&self) -> Option<(Option<&AgentId>, Tokens)> {
        self.annotations.iter().find_map(|a| match &a.kind {
            AnnotationKind::Bounty { amount } => Some((None, *amount)),
            AnnotationKind::SubBounty { creator, amount } => Some((Some(creator), *amount)),
            _ => None,
        })
    }

    pub fn lock(&self) -> Option<(&AgentId, chrono::DateTime<chrono::Utc>)> {
        self.annotations.iter().find_map(|a| match &a.kind {
            AnnotationKind::Lock { agent, expires } => Some((agent, *expires)),
            _ => None,
        })
    }

    pub fn collected(&self) -> impl Iterator<Item = (&AgentId, Tokens)> {
        self.annotations.iter().filter_map(|a| match &a.kind {
            AnnotationKind::Collected { agent, amount } => Some((agent, *amount)),
            _ => None,
        })
    }

    /// Significant proof tokens, terminator excluded.
    pub fn proof_body(&self) -> Vec<&Token> {
        let mut body: Vec<&Token> = self.proof_tokens.iter().filter(|t| !t.is_trivia()).collect();
        if self.proof_status != ProofStatus::Open {
            body.truncate(body.len().saturating_sub(2));
        }
        body
    }

    pub fn has_proof_body(&self) -> bool {
        !self.proof_body().is_empty()
    }

    /// Canonical text of the proof body (comments dropped, tokens joined by
    /// single spaces), terminator excluded.
    pub fn canonical_proof(&self) -> String {
        join_tokens(self.proof_body())
    }

    /// Normalized length of the proof in logical steps, terminator included.
    pub fn normalized_proof_length(&self) -> usize {
        count_steps(&self.proof_tokens)
    }
}

/// A parsed development.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DevFile {
    pub items: Vec<Item>,
    /// Ledger header: `(* BALANCE: ... *)` entries in file order.
    pub balances: Vec<(AgentId, Tokens)>,
    /// Optional `(* SUPPLY: <int> *)` header entry.
    pub supply: Option<Tokens>,
    /// Header text with marker comments removed.
    pub header: String,
    /// Text after the last item.
    pub trailer: String,
    /// Comments that spell a marker but are not parsed as annotations
    /// (embedded in other text, or inside statements and proofs).
    pub stray_markers: Vec<String>,
    pub header_line_count: usize,
    pub raw_line_count: usize,
    pub normalized_line_count: usize,
}

impl DevFile {
    pub fn from_source(source: &str) -> Result<DevFile, DevFileError> {
        parse(&tokenize_str(source)?)
    }

    pub fn item(&self, name: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn item_mut(&mut self, name: &str) -> Option<&mut Item> {
        self.items.iter_mut().find(|i| i.name == name)
    }
}

pub(crate) fn join_tokens<'a>(tokens: impl IntoIterator<Item = &'a Token>) -> String {
    let mut out = String::new();
    for t in tokens.into_iter().filter(|t| !t.is_trivia()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&t.text);
    }
    out
}

/// Canonical form of an item's statement: comments removed and significant
/// tokens separated by exactly one space.
pub fn canonical_statement(item: &Item) -> String {
    join_tokens(&item.statement_tokens)
}

/// Canonicalize arbitrary statement source with the same rules as
/// [`canonical_statement`].
pub fn canonicalize(source: &str) -> Result<String, DevFileError> {
    Ok(join_tokens(&tokenize_str(source)?))
}

fn depth_delta(t: &Token) -> i64 {
    if t.kind != TokenKind::Punct {
        return 0;
    }
    match t.text.as_str() {
        "(" | "[" | "{" => 1,
        ")" | "]" | "}" => -1,
        _ => 0,
    }
}

/// Number of logical steps: sentences closed by `.` at bracket depth 0,
/// plus one for a trailing unterminated fragment.
pub(crate) fn count_steps(tokens: &[Token]) -> usize {
    let mut depth = 0i64;
    let mut steps = 0;
    let mut pending = false;
    for t in tokens.iter().filter(|t| !t.is_trivia()) {
        depth = (depth + depth_delta(t)).max(0);
        pending = true;
        if depth == 0 && t.is_punct('.') {
            steps += 1;
            pending = false;
        }
    }
    steps + usize::from(pending)
}

/// Normalized line count of a parsed file: every logical step rewrapped onto
/// its own line, blank and comment-only lines dropped.
pub fn count_normalized_lines(devfile: &DevFile) -> usize {
    devfile.normalized_line_count
}

pub fn count_raw_lines(source: &str) -> usize {
    source.lines().count()
}
