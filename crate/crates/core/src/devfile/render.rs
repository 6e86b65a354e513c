use std::fmt::Write;

use super::DevFile;

/// Write a development back to source. Marker comments are emitted in a
/// fixed layout: the ledger block after the header prose followed by a
/// blank line, and each item's estimate and annotations on their own lines
/// right before the item. All other text is reproduced from the parsed file.
pub fn render(file: &DevFile) -> String {
    let mut out = String::with_capacity(file.raw_line_count * 40);
    let has_block = file.supply.is_some() || !file.balances.is_empty();
    if has_block {
        let prose = file.header.trim_end();
        out.push_str(prose);
        if !prose.is_empty() {
            out.push('\n');
        }
    } else {
        out.push_str(&file.header);
    }
    if let Some(supply) = file.supply {
        let _ = writeln!(out, "(* SUPPLY: {supply} *)");
    }
    for (agent, amount) in &file.balances {
        let _ = writeln!(out, "(* BALANCE: {agent} {amount} *)");
    }
    if has_block {
        out.push('\n');
    }
    for item in &file.items {
        out.push_str(&item.preceding);
        if let Some(e) = &item.estimate {
            let _ = writeln!(out, "{e}");
        }
        for a in &item.annotations {
            let _ = writeln!(out, "{}", a.kind);
        }
        out.push_str(&item.statement_source);
        if let Some(proof) = &item.proof_source {
            out.push_str(proof);
        }
    }
    out.push_str(&file.trailer);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "(* Background. *)\n\
        (* SUPPLY: 45000 *)\n\
        (* BALANCE: Alice 500 *)\n\
        (* BALANCE: Bob 480 *)\n\
        \n\
        Definition d := x.\n\
        \n\
        (* ESTIMATE: lines=20 difficulty=5 usd=100 *)\n\
        (* BOUNTY: 100 *)\n\
        (* LOCK: Bob UNTIL 2026-02-17T20:00:00Z *)\n\
        Theorem t : d = d.\n\
        (* partial *) apply refl.\n\
        Admitted.\n\
        (* trailing note *)\n";

    #[test]
    fn render_of_parse_is_identity_on_canonical_layout() {
        let f = DevFile::from_source(SRC).unwrap();
        assert_eq!(render(&f), SRC);
    }

    #[test]
    fn rendered_file_reparses_to_same_model() {
        let src = "Theorem a : P.   (* BOUNTY: 3 *) Admitted.\n(* COLLECTED: Bob 4 *) Lemma b : Q. Qed.";
        let f = DevFile::from_source(src).unwrap();
        let g = DevFile::from_source(&render(&f)).unwrap();
        let summary = |f: &DevFile| -> Vec<_> {
            f.items
                .iter()
                .map(|i| {
                    (
                        i.name.clone(),
                        i.statement_text.clone(),
                        i.proof_status,
                        i.annotations.iter().map(|a| a.kind.clone()).collect::<Vec<_>>(),
                    )
                })
                .collect()
        };
        assert_eq!(summary(&f), summary(&g));
        assert_eq!(f.stray_markers, g.stray_markers);
    }
}
