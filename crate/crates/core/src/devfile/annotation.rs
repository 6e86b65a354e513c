use std::fmt;
use std::ops::Range;

use chrono::{DateTime, Utc};

use crate::ledger::{AgentId, Tokens};
use crate::time::{format_instant, parse_instant};

/// Comment markers recognized by the parser, in the form they are written.
pub const MARKERS: &[&str] = &[
    "BOUNTY:",
    "SUBBOUNTY:",
    "LOCK:",
    "COLLECTED:",
    "ESTIMATE:",
    "BALANCE:",
    "SUPPLY:",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnnotationKind {
    /// Admin-funded bounty.
    Bounty { amount: Tokens },
    /// Agent-funded bounty on a lemma the agent introduced or picked.
    SubBounty { creator: AgentId, amount: Tokens },
    Lock { agent: AgentId, expires: DateTime<Utc> },
    Collected { agent: AgentId, amount: Tokens },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub kind: AnnotationKind,
    /// Byte span of the carrying comment in the source it was parsed from.
    pub span: Range<usize>,
}

impl Annotation {
    pub fn new(kind: AnnotationKind) -> Self {
        Annotation { kind, span: 0..0 }
    }
}

impl fmt::Display for AnnotationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnotationKind::Bounty { amount } => write!(f, "(* BOUNTY: {amount} *)"),
            AnnotationKind::SubBounty { creator, amount } => {
                write!(f, "(* SUBBOUNTY: {creator} {amount} *)")
            }
            AnnotationKind::Lock { agent, expires } => {
                write!(f, "(* LOCK: {agent} UNTIL {} *)", format_instant(*expires))
            }
            AnnotationKind::Collected { agent, amount } => {
                write!(f, "(* COLLECTED: {agent} {amount} *)")
            }
        }
    }
}

/// Effort estimate attached to a statement: textbook proof length,
/// difficulty on a 1-10 scale and cost in dollars at $100/hour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Estimate {
    pub textbook_lines: u32,
    pub difficulty: u8,
    pub usd_cost: u64,
}

impl Estimate {
    pub const USD_PER_HOUR: u64 = 100;

    pub fn hours(&self) -> f64 {
        self.usd_cost as f64 / Self::USD_PER_HOUR as f64
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(* ESTIMATE: lines={} difficulty={} usd={} *)",
            self.textbook_lines, self.difficulty, self.usd_cost
        )
    }
}

/// Result of reading a comment that starts with a marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Marker {
    Item(AnnotationKind),
    Estimate(Estimate),
    Balance(AgentId, Tokens),
    Supply(Tokens),
}

fn int(word: &str) -> Result<Tokens, String> {
    word.parse::<Tokens>().map_err(|_| format!("`{word}` is not an integer"))
}

fn agent(word: &str) -> Result<AgentId, String> {
    AgentId::new(word).map_err(|e| e.to_string())
}

fn keyed<T: std::str::FromStr>(word: &str, key: &str) -> Result<T, String> {
    word.strip_prefix(key)
        .and_then(|v| v.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("expected `{key}=<int>`, found `{word}`"))
}

/// Whether the comment body spells any marker anywhere.
pub(crate) fn mentions_marker(body: &str) -> bool {
    MARKERS.iter().any(|m| body.contains(m))
}

/// Interpret a comment body. `None` when the body does not start with a
/// marker; `Some(Err)` when it does but the rest does not follow the grammar.
pub(crate) fn read_marker(body: &str) -> Option<Result<Marker, String>> {
    let words: Vec<&str> = body.split_whitespace().collect();
    let (&head, rest) = words.split_first()?;
    if !MARKERS.contains(&head) {
        return None;
    }
    let arity = |n: usize| -> Result<(), String> {
        if rest.len() == n {
            Ok(())
        } else {
            Err(format!("{head} takes {n} field(s), found {}", rest.len()))
        }
    };
    let parsed = (|| -> Result<Marker, String> {
        Ok(match head {
            "BOUNTY:" => {
                arity(1)?;
                Marker::Item(AnnotationKind::Bounty { amount: int(rest[0])? })
            }
            "SUBBOUNTY:" => {
                arity(2)?;
                Marker::Item(AnnotationKind::SubBounty {
                    creator: agent(rest[0])?,
                    amount: int(rest[1])?,
                })
            }
            "LOCK:" => {
                arity(3)?;
                if rest[1] != "UNTIL" {
                    return Err(format!("expected UNTIL, found `{}`", rest[1]));
                }
                Marker::Item(AnnotationKind::Lock {
                    agent: agent(rest[0])?,
                    expires: parse_instant(rest[2]).map_err(|e| e.to_string())?,
                })
            }
            "COLLECTED:" => {
                arity(2)?;
                Marker::Item(AnnotationKind::Collected {
                    agent: agent(rest[0])?,
                    amount: int(rest[1])?,
                })
            }
            "ESTIMATE:" => {
                arity(3)?;
                let estimate = Estimate {
                    textbook_lines: keyed(rest[0], "lines")?,
                    difficulty: keyed(rest[1], "difficulty")?,
                    usd_cost: keyed(rest[2], "usd")?,
                };
                if !(1..=10).contains(&estimate.difficulty) {
                    return Err(format!("difficulty {} outside 1..=10", estimate.difficulty));
                }
                Marker::Estimate(estimate)
            }
            "BALANCE:" => {
                arity(2)?;
                Marker::Balance(agent(rest[0])?, int(rest[1])?)
            }
            "SUPPLY:" => {
                arity(1)?;
                Marker::Supply(int(rest[0])?)
            }
            _ => unreachable!("head is one of MARKERS"),
        })
    })();
    Some(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_every_marker() {
        assert_eq!(
            read_marker(" BOUNTY: 100 "),
            Some(Ok(Marker::Item(AnnotationKind::Bounty { amount: 100 })))
        );
        assert!(matches!(
            read_marker(" LOCK: Bob UNTIL 2026-02-17T10:00:00+05:00 "),
            Some(Ok(Marker::Item(AnnotationKind::Lock { .. })))
        ));
        assert_eq!(
            read_marker(" ESTIMATE: lines=40 difficulty=5 usd=100 "),
            Some(Ok(Marker::Estimate(Estimate { textbook_lines: 40, difficulty: 5, usd_cost: 100 })))
        );
        assert_eq!(read_marker(" SUPPLY: 45000 "), Some(Ok(Marker::Supply(45000))));
    }

    #[test]
    fn negative_amounts_are_syntax_not_semantics() {
        assert_eq!(
            read_marker(" BALANCE: Alice -5 "),
            Some(Ok(Marker::Balance(AgentId::new("Alice").unwrap(), -5)))
        );
    }

    #[test]
    fn plain_comments_are_not_markers() {
        assert_eq!(read_marker(" TODO Bob show the fibre is discrete "), None);
        assert_eq!(read_marker(" see BOUNTY: 5 below "), None);
        assert!(mentions_marker(" see BOUNTY: 5 below "));
    }

    #[test]
    fn malformed_markers() {
        assert!(matches!(read_marker(" BOUNTY: lots "), Some(Err(_))));
        assert!(matches!(read_marker(" BOUNTY: 1 2 "), Some(Err(_))));
        assert!(matches!(read_marker(" LOCK: Bob AFTER 2026-02-17T10:00:00Z "), Some(Err(_))));
        assert!(matches!(read_marker(" ESTIMATE: lines=1 difficulty=11 usd=5 "), Some(Err(_))));
        assert!(matches!(read_marker(" ESTIMATE: lines=1 difficulty=0 usd=5 "), Some(Err(_))));
    }

    #[test]
    fn annotation_display_reparses() {
        let kinds = [
            AnnotationKind::Bounty { amount: 7 },
            AnnotationKind::SubBounty { creator: AgentId::new("Dave").unwrap(), amount: 3 },
            AnnotationKind::Collected { agent: AgentId::new("Bob").unwrap(), amount: 165 },
            AnnotationKind::Lock {
                agent: AgentId::new("Bob").unwrap(),
                expires: parse_instant("2026-02-18T00:00:00Z").unwrap(),
            },
        ];
        for kind in kinds {
            let text = kind.to_string();
            let body = &text[2..text.len() - 2];
            assert_eq!(read_marker(body), Some(Ok(Marker::Item(kind))));
        }
    }
}
