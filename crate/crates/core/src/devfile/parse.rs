use std::collections::HashSet;

use super::annotation::{mentions_marker, read_marker, Annotation, Estimate, Marker};
use super::token::{Token, TokenKind};
use super::{count_raw_lines, count_steps, DevFile, DevFileError, Item, ItemKind, ProofStatus};

fn item_keyword(t: &Token) -> Option<ItemKind> {
    if t.kind == TokenKind::Keyword {
        ItemKind::from_keyword(&t.text)
    } else {
        None
    }
}

fn next_significant(tokens: &[Token], from: usize) -> Option<usize> {
    (from..tokens.len()).find(|&k| !tokens[k].is_trivia())
}

/// Concatenate `tokens[from..to]`, dropping the comments at `removed`. A
/// dropped comment that sat alone on its line takes the line with it.
fn gap_text(tokens: &[Token], from: usize, to: usize, removed: &[usize]) -> String {
    let mut out = String::new();
    let mut eat_newline = false;
    for (k, t) in tokens.iter().enumerate().take(to).skip(from) {
        if removed.contains(&k) {
            let line_start = out
                .rfind('\n')
                .map_or(&out[..], |p| &out[p + 1..])
                .chars()
                .all(|c| c == ' ' || c == '\t');
            let newline_follows = tokens
                .get(k + 1)
                .filter(|_| k + 1 < to)
                .is_some_and(|n| n.kind == TokenKind::Whitespace && n.text.contains('\n'));
            if line_start && newline_follows {
                out.truncate(out.trim_end_matches([' ', '\t']).len());
                eat_newline = true;
            }
            continue;
        }
        if eat_newline && t.kind == TokenKind::Whitespace {
            let cut = t.text.find('\n').map_or(0, |p| p + 1);
            out.push_str(&t.text[cut..]);
        } else {
            out.push_str(&t.text);
        }
        eat_newline = false;
    }
    out
}

fn stray_text(t: &Token) -> Option<String> {
    (t.kind == TokenKind::Comment && mentions_marker(t.comment_body()))
        .then(|| t.text.split_whitespace().collect::<Vec<_>>().join(" "))
}

struct ItemSyntax {
    kind: ItemKind,
    name: String,
    statement_end: usize,
    end: usize,
    status: ProofStatus,
}

fn parse_item(tokens: &[Token], start: usize) -> Result<ItemSyntax, DevFileError> {
    let kind = item_keyword(&tokens[start]).expect("caller checked the keyword");
    let line = tokens[start].line;
    let name_at = next_significant(tokens, start + 1)
        .filter(|&k| tokens[k].kind == TokenKind::Identifier)
        .ok_or_else(|| DevFileError::MalformedItem {
            line,
            reason: format!("expected a name after `{kind}`"),
        })?;
    let name = tokens[name_at].text.clone();

    let mut depth = 0i64;
    let mut statement_end = None;
    for (k, t) in tokens.iter().enumerate().skip(name_at + 1) {
        if t.is_trivia() {
            continue;
        }
        if item_keyword(t).is_some() {
            break;
        }
        match t.text.as_str() {
            "(" | "[" | "{" if t.kind == TokenKind::Punct => depth += 1,
            ")" | "]" | "}" if t.kind == TokenKind::Punct => depth = (depth - 1).max(0),
            "." if t.kind == TokenKind::Punct && depth == 0 => {
                statement_end = Some(k);
                break;
            }
            _ => {}
        }
    }
    let statement_end = statement_end.ok_or_else(|| DevFileError::MalformedItem {
        line,
        reason: format!("statement of `{name}` is not closed by `.`"),
    })?;
    let has_body = tokens[name_at + 1..statement_end]
        .iter()
        .any(|t| !t.is_trivia() && !(t.is_punct(':') || t.is_punct('=')));
    if !has_body {
        return Err(DevFileError::EmptyStatement(name));
    }

    if !kind.has_proof() {
        return Ok(ItemSyntax { kind, name, statement_end, end: statement_end + 1, status: ProofStatus::Open });
    }
    match next_significant(tokens, statement_end + 1) {
        None => {
            return Ok(ItemSyntax { kind, name, statement_end, end: statement_end + 1, status: ProofStatus::Open })
        }
        Some(k) if item_keyword(&tokens[k]).is_some() => {
            return Ok(ItemSyntax { kind, name, statement_end, end: statement_end + 1, status: ProofStatus::Open })
        }
        Some(_) => {}
    }
    let mut k = statement_end + 1;
    while let Some(at) = next_significant(tokens, k) {
        let t = &tokens[at];
        if item_keyword(t).is_some() {
            break;
        }
        let status = if t.is_keyword("Qed") {
            Some(ProofStatus::Qed)
        } else if t.is_keyword("Admitted") {
            Some(ProofStatus::Admitted)
        } else {
            None
        };
        if let Some(status) = status {
            return match next_significant(tokens, at + 1) {
                Some(dot) if tokens[dot].is_punct('.') => {
                    Ok(ItemSyntax { kind, name, statement_end, end: dot + 1, status })
                }
                _ => Err(DevFileError::MissingTerminator(name)),
            };
        }
        k = at + 1;
    }
    Err(DevFileError::MissingTerminator(name))
}

/// Parse a token stream produced by [`super::tokenize`].
pub fn parse(tokens: &[Token]) -> Result<DevFile, DevFileError> {
    let source: String = tokens.iter().map(|t| t.text.as_str()).collect();
    let mut items: Vec<Item> = Vec::new();
    let mut names = HashSet::new();
    let mut balances = Vec::new();
    let mut supply = None;
    let mut header = None;
    let mut stray_markers = Vec::new();

    let mut pending: Vec<Annotation> = Vec::new();
    let mut estimate: Option<(Estimate, std::ops::Range<usize>)> = None;
    let mut removed: Vec<usize> = Vec::new();
    let mut gap_start = 0;
    let mut header_line_count = None;

    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        match t.kind {
            TokenKind::Whitespace => i += 1,
            TokenKind::Comment => {
                let span = t.span();
                let in_header = items.is_empty();
                let malformed = |reason: &str| DevFileError::MalformedAnnotation {
                    span: span.clone(),
                    reason: reason.to_string(),
                };
                match read_marker(t.comment_body()) {
                    None => stray_markers.extend(stray_text(t)),
                    Some(Err(reason)) => return Err(malformed(&reason)),
                    Some(Ok(marker)) => {
                        removed.push(i);
                        match marker {
                            Marker::Balance(..) | Marker::Supply(_) if !in_header => {
                                return Err(malformed("ledger entries belong in the header"))
                            }
                            Marker::Balance(agent, amount) => {
                                if balances.iter().any(|(a, _)| *a == agent) {
                                    return Err(malformed("duplicate BALANCE entry"));
                                }
                                balances.push((agent, amount));
                            }
                            Marker::Supply(amount) => {
                                if supply.replace(amount).is_some() {
                                    return Err(malformed("duplicate SUPPLY entry"));
                                }
                            }
                            Marker::Estimate(e) => {
                                if estimate.replace((e, span.clone())).is_some() {
                                    return Err(malformed("two ESTIMATE annotations on one item"));
                                }
                            }
                            Marker::Item(kind) => pending.push(Annotation { kind, span }),
                        }
                    }
                }
                i += 1;
            }
            _ if item_keyword(t).is_some() => {
                let syntax = parse_item(tokens, i)?;
                if !names.insert(syntax.name.clone()) {
                    return Err(DevFileError::DuplicateName(syntax.name));
                }
                let preceding = gap_text(tokens, gap_start, i, &removed);
                let preceding = if header.is_none() {
                    header = Some(preceding);
                    header_line_count = Some(t.line - 1);
                    String::new()
                } else {
                    preceding
                };
                let statement_tokens = tokens[i..=syntax.statement_end].to_vec();
                let proof_tokens = tokens[syntax.statement_end + 1..syntax.end].to_vec();
                stray_markers.extend(statement_tokens.iter().chain(&proof_tokens).filter_map(stray_text));
                let item = Item {
                    name: syntax.name,
                    kind: syntax.kind,
                    statement_text: super::join_tokens(&statement_tokens),
                    statement_source: statement_tokens.iter().map(|t| t.text.as_str()).collect(),
                    proof_source: (syntax.end > syntax.statement_end + 1)
                        .then(|| proof_tokens.iter().map(|t| t.text.as_str()).collect()),
                    proof_status: syntax.status,
                    proof_tokens,
                    statement_tokens,
                    annotations: std::mem::take(&mut pending),
                    estimate: estimate.take().map(|(e, _)| e),
                    position: items.len(),
                    preceding,
                    line: t.line,
                };
                items.push(item);
                removed.clear();
                gap_start = syntax.end;
                i = syntax.end;
            }
            _ if items.is_empty() => i += 1,
            _ => {
                return Err(DevFileError::UnexpectedToken { line: t.line, text: t.text.clone() });
            }
        }
    }

    if let Some(a) = pending.first() {
        return Err(DevFileError::OrphanAnnotation(a.span.clone()));
    }
    if let Some((_, span)) = estimate {
        return Err(DevFileError::OrphanAnnotation(span));
    }
    let tail = gap_text(tokens, gap_start, tokens.len(), &removed);
    let (header, trailer) = match header {
        Some(h) => (h, tail),
        None => (tail, String::new()),
    };
    let raw_line_count = count_raw_lines(&source);
    Ok(DevFile {
        items,
        balances,
        supply,
        header,
        trailer,
        stray_markers,
        header_line_count: header_line_count.unwrap_or(raw_line_count),
        raw_line_count,
        normalized_line_count: count_steps(tokens),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{AnnotationKind, DevFile, DevFileError, ItemKind, ProofStatus};

    fn parse(src: &str) -> Result<DevFile, DevFileError> {
        DevFile::from_source(src)
    }

    #[test]
    fn bounty_attaches_to_following_theorem() {
        let f = parse(
            "(* BALANCE: Alice 500 *)\n\
             (* BOUNTY: 100 *)\n\
             Theorem fundamental_group_is_group : P. Admitted.\n",
        )
        .unwrap();
        assert_eq!(f.items.len(), 1);
        assert_eq!(f.items[0].annotations[0].kind, AnnotationKind::Bounty { amount: 100 });
        assert_eq!(f.balances.len(), 1);
        assert_eq!(f.header, "");
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let err = parse("Theorem t : P. Admitted.\nLemma t : Q. Admitted.").unwrap_err();
        assert_eq!(err, DevFileError::DuplicateName("t".into()));
    }

    #[test]
    fn admitted_inside_comment_does_not_change_status() {
        let f = parse("Theorem t : P.\nproof.\n  exact H. (* Admitted *)\nQed.\n").unwrap();
        assert_eq!(f.items[0].proof_status, ProofStatus::Qed);
    }

    #[test]
    fn qed_inside_comment_does_not_terminate() {
        let f = parse("Theorem t : P.\n(* Qed. *) apply H.\nAdmitted.\n").unwrap();
        assert_eq!(f.items[0].proof_status, ProofStatus::Admitted);
        assert_eq!(f.items[0].canonical_proof(), "apply H .");
    }

    #[test]
    fn missing_terminator() {
        let err = parse("Theorem t : P.\napply H.\nTheorem u : Q. Admitted.").unwrap_err();
        assert_eq!(err, DevFileError::MissingTerminator("t".into()));
        let err = parse("Theorem t : P.\napply H.\n").unwrap_err();
        assert_eq!(err, DevFileError::MissingTerminator("t".into()));
    }

    #[test]
    fn theorem_without_proof_is_open() {
        let f = parse("Theorem t : P.\nTheorem u : Q. Admitted.").unwrap();
        assert_eq!(f.items[0].proof_status, ProofStatus::Open);
        assert_eq!(f.items[1].proof_status, ProofStatus::Admitted);
    }

    #[test]
    fn orphan_annotation() {
        let err = parse("Theorem t : P. Admitted.\n(* BOUNTY: 5 *)\n").unwrap_err();
        assert!(matches!(err, DevFileError::OrphanAnnotation(_)));
    }

    #[test]
    fn malformed_annotation() {
        let err = parse("(* LOCK: Bob *)\nTheorem t : P. Admitted.").unwrap_err();
        assert!(matches!(err, DevFileError::MalformedAnnotation { .. }));
        let err = parse("Theorem t : P. Admitted.\n(* BALANCE: Bob 5 *)\nTheorem u : P. Admitted.")
            .unwrap_err();
        assert!(matches!(err, DevFileError::MalformedAnnotation { .. }));
    }

    #[test]
    fn empty_statement() {
        assert_eq!(parse("Theorem t : . Admitted.").unwrap_err(), DevFileError::EmptyStatement("t".into()));
    }

    #[test]
    fn stray_after_definition() {
        let err = parse("Definition d := x.\nfoo.").unwrap_err();
        assert!(matches!(err, DevFileError::UnexpectedToken { line: 2, .. }));
    }

    #[test]
    fn kinds_and_positions() {
        let f = parse(
            "Some background prose.\n\
             Definition d := fun x => x.\n\
             Axiom ax : False.\n\
             Lemma l : d = d. exact refl. Qed.\n",
        )
        .unwrap();
        let kinds: Vec<_> = f.items.iter().map(|i| (i.kind, i.position)).collect();
        assert_eq!(kinds, vec![(ItemKind::Definition, 0), (ItemKind::Axiom, 1), (ItemKind::Lemma, 2)]);
        assert_eq!(f.header_line_count, 1);
        assert_eq!(f.items[1].proof_status, ProofStatus::Open);
    }

    #[test]
    fn markers_inside_proofs_are_stray() {
        let f = parse("Theorem t : P.\n(* BOUNTY: 5 *) apply H.\nAdmitted.\n").unwrap();
        assert!(f.items[0].annotations.is_empty());
        assert_eq!(f.stray_markers, vec!["(* BOUNTY: 5 *)".to_string()]);
    }

    #[test]
    fn estimate_is_item_metadata() {
        let f = parse("(* ESTIMATE: lines=30 difficulty=5 usd=100 *)\nTheorem t : P. Admitted.").unwrap();
        assert_eq!(f.items[0].estimate.unwrap().difficulty, 5);
        assert!(f.items[0].annotations.is_empty());
    }
}
