//! Reading and writing automata in the HOA (Hanoi Omega-Automata) format,
//! restricted to transition-based Büchi acceptance (`Acceptance: 1 Inf(0)`).
//!
//! Supported headers: `HOA: v1`, `States:`, `Start:` (one state per
//! occurrence, repeated for multiple initial states), `AP:`, `Acceptance:`,
//! `acc-name:`; the informational headers `name:`, `tool:` and `properties:`
//! are tolerated and ignored; anything else is rejected. Edge labels are
//! boolean formulas over AP indices with `t`, `f`, `!`, `&`, `|` and
//! parentheses. A `{0}` signature on a `State:` line marks every outgoing
//! transition of that state as accepting.
//!
//! The writer emits one edge per letter (explicit labels) so that a parse of
//! its output reproduces the automaton exactly.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::automata::{BuchiAutomaton, Letter, Transition, MAX_APS};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    /// Identifier immediately followed by `:` (header name, without colon).
    Header(String),
    /// Bare identifier.
    Ident(String),
    Int(u64),
    Str(String),
    Punct(char),
    BodyMarker,
    EndMarker,
}

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    line: usize,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::MalformedHoa {
        line,
        msg: msg.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<SpannedTok>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            ' ' | '\t' | '\r' => i += 1,
            '/' if bytes.get(i + 1) == Some(&b'*') => {
                // Block comment, possibly nested.
                let mut depth = 1;
                i += 2;
                while i < bytes.len() && depth > 0 {
                    if bytes[i] == b'\n' {
                        line += 1;
                        i += 1;
                    } else if bytes[i] == b'/' && bytes.get(i + 1) == Some(&b'*') {
                        depth += 1;
                        i += 2;
                    } else if bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/') {
                        depth -= 1;
                        i += 2;
                    } else {
                        i += 1;
                    }
                }
                if depth > 0 {
                    return Err(err(line, "unterminated comment"));
                }
            }
            '-' if bytes.get(i + 1) == Some(&b'-') => {
                let rest = &text[i..];
                if let Some(stripped) = rest.strip_prefix("--BODY--") {
                    let _ = stripped;
                    toks.push(SpannedTok {
                        tok: Tok::BodyMarker,
                        line,
                    });
                    i += "--BODY--".len();
                } else if rest.starts_with("--END--") {
                    toks.push(SpannedTok {
                        tok: Tok::EndMarker,
                        line,
                    });
                    i += "--END--".len();
                } else {
                    return Err(err(line, "expected --BODY-- or --END--"));
                }
            }
            '"' => {
                let start_line = line;
                let mut s = String::new();
                i += 1;
                loop {
                    if i >= bytes.len() {
                        return Err(err(start_line, "unterminated string"));
                    }
                    match bytes[i] {
                        b'"' => {
                            i += 1;
                            break;
                        }
                        b'\\' => {
                            let next = *bytes
                                .get(i + 1)
                                .ok_or_else(|| err(start_line, "unterminated string"))?;
                            s.push(next as char);
                            i += 2;
                        }
                        b'\n' => {
                            line += 1;
                            s.push('\n');
                            i += 1;
                        }
                        b => {
                            s.push(b as char);
                            i += 1;
                        }
                    }
                }
                toks.push(SpannedTok {
                    tok: Tok::Str(s),
                    line: start_line,
                });
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: u64 = text[start..i]
                    .parse()
                    .map_err(|_| err(line, "integer too large"))?;
                toks.push(SpannedTok {
                    tok: Tok::Int(n),
                    line,
                });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'-')
                {
                    i += 1;
                }
                let word = text[start..i].to_string();
                if bytes.get(i) == Some(&b':') {
                    i += 1;
                    toks.push(SpannedTok {
                        tok: Tok::Header(word),
                        line,
                    });
                } else {
                    toks.push(SpannedTok {
                        tok: Tok::Ident(word),
                        line,
                    });
                }
            }
            '[' | ']' | '{' | '}' | '(' | ')' | '!' | '&' | '|' => {
                toks.push(SpannedTok {
                    tok: Tok::Punct(c),
                    line,
                });
                i += 1;
            }
            other => return Err(err(line, format!("unexpected character {other:?}"))),
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Label expressions
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum LabelExpr {
    True,
    False,
    Ap(usize),
    Not(Box<LabelExpr>),
    And(Box<LabelExpr>, Box<LabelExpr>),
    Or(Box<LabelExpr>, Box<LabelExpr>),
}

impl LabelExpr {
    fn eval(&self, letter: Letter) -> bool {
        match self {
            LabelExpr::True => true,
            LabelExpr::False => false,
            LabelExpr::Ap(i) => letter & (1 << i) != 0,
            LabelExpr::Not(e) => !e.eval(letter),
            LabelExpr::And(a, b) => a.eval(letter) && b.eval(letter),
            LabelExpr::Or(a, b) => a.eval(letter) || b.eval(letter),
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&SpannedTok> {
        self.toks.get(self.pos)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|t| t.line)
            .unwrap_or(0)
    }

    fn next(&mut self) -> Option<SpannedTok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_int(&mut self, what: &str) -> Result<u64> {
        let line = self.line();
        match self.next() {
            Some(SpannedTok {
                tok: Tok::Int(n), ..
            }) => Ok(n),
            _ => Err(err(line, format!("expected integer ({what})"))),
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        let line = self.line();
        match self.next() {
            Some(SpannedTok {
                tok: Tok::Punct(p), ..
            }) if p == c => Ok(()),
            _ => Err(err(line, format!("expected `{c}`"))),
        }
    }

    /// Parses a label expression: `|` over `&` over `!`/atoms.
    fn label_expr(&mut self, num_aps: usize) -> Result<LabelExpr> {
        let mut e = self.label_conj(num_aps)?;
        while matches!(
            self.peek(),
            Some(SpannedTok {
                tok: Tok::Punct('|'),
                ..
            })
        ) {
            self.next();
            let rhs = self.label_conj(num_aps)?;
            e = LabelExpr::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn label_conj(&mut self, num_aps: usize) -> Result<LabelExpr> {
        let mut e = self.label_atom(num_aps)?;
        while matches!(
            self.peek(),
            Some(SpannedTok {
                tok: Tok::Punct('&'),
                ..
            })
        ) {
            self.next();
            let rhs = self.label_atom(num_aps)?;
            e = LabelExpr::And(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn label_atom(&mut self, num_aps: usize) -> Result<LabelExpr> {
        let line = self.line();
        match self.next() {
            Some(SpannedTok {
                tok: Tok::Punct('!'),
                ..
            }) => Ok(LabelExpr::Not(Box::new(self.label_atom(num_aps)?))),
            Some(SpannedTok {
                tok: Tok::Punct('('),
                ..
            }) => {
                let e = self.label_expr(num_aps)?;
                self.expect_punct(')')?;
                Ok(e)
            }
            Some(SpannedTok {
                tok: Tok::Int(n), ..
            }) => {
                let i = n as usize;
                if i >= num_aps {
                    return Err(err(
                        line,
                        format!("AP index {i} out of range ({num_aps} declared)"),
                    ));
                }
                Ok(LabelExpr::Ap(i))
            }
            Some(SpannedTok {
                tok: Tok::Ident(w), ..
            }) if w == "t" => Ok(LabelExpr::True),
            Some(SpannedTok {
                tok: Tok::Ident(w), ..
            }) if w == "f" => Ok(LabelExpr::False),
            _ => Err(err(line, "expected label atom (t, f, AP index, !, or `(`)")),
        }
    }

    /// Parses an optional `{...}` acceptance signature; only `{}`/`{0}` are
    /// meaningful for one Büchi set.
    fn acc_signature(&mut self) -> Result<bool> {
        if !matches!(
            self.peek(),
            Some(SpannedTok {
                tok: Tok::Punct('{'),
                ..
            })
        ) {
            return Ok(false);
        }
        let line = self.line();
        self.next();
        let mut accepting = false;
        loop {
            match self.next() {
                Some(SpannedTok {
                    tok: Tok::Punct('}'),
                    ..
                }) => break,
                Some(SpannedTok {
                    tok: Tok::Int(0), ..
                }) => accepting = true,
                Some(SpannedTok {
                    tok: Tok::Int(n),
                    line,
                }) => {
                    return Err(Error::UnsupportedAcceptance(format!(
                        "acceptance set {n} used at line {line}, but only set 0 exists"
                    )))
                }
                _ => return Err(err(line, "malformed acceptance signature")),
            }
        }
        Ok(accepting)
    }

    /// Skips the value tokens of a tolerated header (`name:`, `tool:`,
    /// `properties:`) up to the next header or body marker.
    fn skip_header_value(&mut self) {
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Header(_) | Tok::BodyMarker | Tok::EndMarker => return,
                _ => {
                    self.next();
                }
            }
        }
    }
}

/// Parses one automaton from HOA text.
pub fn parse_hoa(text: &str) -> Result<BuchiAutomaton> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };

    // Format line.
    let line = p.line();
    match p.next() {
        Some(SpannedTok {
            tok: Tok::Header(h),
            ..
        }) if h == "HOA" => {}
        _ => return Err(err(line, "expected `HOA: v1`")),
    }
    match p.next() {
        Some(SpannedTok {
            tok: Tok::Ident(v), ..
        }) if v == "v1" => {}
        _ => return Err(err(line, "expected version `v1`")),
    }

    let mut num_states: Option<usize> = None;
    let mut starts: Vec<usize> = Vec::new();
    let mut aps: Option<Vec<String>> = None;
    let mut acceptance_seen = false;

    loop {
        let line = p.line();
        match p.next() {
            Some(SpannedTok {
                tok: Tok::BodyMarker,
                ..
            }) => break,
            Some(SpannedTok {
                tok: Tok::Header(h),
                ..
            }) => match h.as_str() {
                "States" => {
                    if num_states.is_some() {
                        return Err(err(line, "duplicate States: header"));
                    }
                    num_states = Some(p.expect_int("state count")? as usize);
                }
                "Start" => {
                    let q = p.expect_int("initial state")? as usize;
                    if matches!(
                        p.peek(),
                        Some(SpannedTok {
                            tok: Tok::Punct('&'),
                            ..
                        })
                    ) {
                        return Err(err(
                            line,
                            "conjunctive initial states (alternation) are not supported",
                        ));
                    }
                    if matches!(p.peek(), Some(SpannedTok { tok: Tok::Int(_), .. })) {
                        return Err(err(
                            line,
                            "one state per Start: header; repeat the header for more",
                        ));
                    }
                    starts.push(q);
                }
                "AP" => {
                    if aps.is_some() {
                        return Err(err(line, "duplicate AP: header"));
                    }
                    let k = p.expect_int("AP count")? as usize;
                    if k > MAX_APS {
                        return Err(Error::TooManyAps(k));
                    }
                    let mut list = Vec::with_capacity(k);
                    for _ in 0..k {
                        match p.next() {
                            Some(SpannedTok {
                                tok: Tok::Str(s), ..
                            }) => list.push(s),
                            _ => return Err(err(line, "expected quoted AP name")),
                        }
                    }
                    aps = Some(list);
                }
                "Acceptance" => {
                    // Exactly `1 Inf(0)`.
                    let sets = p.expect_int("acceptance set count")?;
                    let mut rendered = format!("{sets}");
                    let mut ok = sets == 1;
                    match p.next() {
                        Some(SpannedTok {
                            tok: Tok::Ident(w), ..
                        }) => {
                            write!(rendered, " {w}").unwrap();
                            ok &= w == "Inf";
                        }
                        _ => ok = false,
                    }
                    if ok {
                        p.expect_punct('(')?;
                        let set = p.expect_int("acceptance set index")?;
                        write!(rendered, "({set})").unwrap();
                        ok &= set == 0;
                        p.expect_punct(')')?;
                    }
                    if !ok {
                        return Err(Error::UnsupportedAcceptance(rendered));
                    }
                    acceptance_seen = true;
                }
                "acc-name" => match p.next() {
                    Some(SpannedTok {
                        tok: Tok::Ident(w), ..
                    }) if w == "Buchi" => {}
                    Some(SpannedTok {
                        tok: Tok::Ident(w), ..
                    }) => return Err(Error::UnsupportedAcceptance(format!("acc-name {w}"))),
                    _ => return Err(err(line, "expected acceptance name")),
                },
                "name" | "tool" | "properties" => p.skip_header_value(),
                other => {
                    return Err(err(line, format!("unsupported header `{other}:`")));
                }
            },
            _ => return Err(err(line, "expected header or --BODY--")),
        }
    }

    let num_states = num_states.ok_or_else(|| err(p.line(), "missing States: header"))?;
    if !acceptance_seen {
        return Err(err(p.line(), "missing Acceptance: header"));
    }
    if starts.is_empty() {
        return Err(err(p.line(), "missing Start: header"));
    }
    let aps = aps.unwrap_or_default();
    let num_aps = aps.len();
    let num_letters: u32 = 1 << num_aps;

    let mut transitions: Vec<Transition> = Vec::new();
    let mut names: Vec<Option<String>> = vec![None; num_states];
    let mut declared = vec![false; num_states];

    loop {
        let line = p.line();
        match p.next() {
            Some(SpannedTok {
                tok: Tok::EndMarker,
                ..
            }) => break,
            Some(SpannedTok {
                tok: Tok::Header(h),
                ..
            }) if h == "State" => {
                let src = p.expect_int("state number")? as usize;
                if src >= num_states {
                    return Err(err(
                        line,
                        format!("state {src} out of range ({num_states} states)"),
                    ));
                }
                if declared[src] {
                    return Err(err(line, format!("duplicate State: {src} block")));
                }
                declared[src] = true;
                if let Some(SpannedTok {
                    tok: Tok::Str(_), ..
                }) = p.peek()
                {
                    match p.next() {
                        Some(SpannedTok {
                            tok: Tok::Str(s), ..
                        }) => names[src] = Some(s),
                        _ => unreachable!(),
                    }
                }
                let state_accepting = p.acc_signature()?;

                // Edges until the next `State:` or `--END--`.
                while matches!(
                    p.peek(),
                    Some(SpannedTok {
                        tok: Tok::Punct('['),
                        ..
                    })
                ) {
                    let edge_line = p.line();
                    p.expect_punct('[')?;
                    let expr = p.label_expr(num_aps)?;
                    p.expect_punct(']')?;
                    let dst = p.expect_int("edge target")? as usize;
                    if dst >= num_states {
                        return Err(err(
                            edge_line,
                            format!("edge target {dst} out of range ({num_states} states)"),
                        ));
                    }
                    let edge_accepting = p.acc_signature()?;
                    let accepting = state_accepting || edge_accepting;
                    for letter in 0..num_letters {
                        if expr.eval(letter) {
                            transitions.push(Transition {
                                src,
                                letter,
                                dst,
                                accepting,
                            });
                        }
                    }
                }
                if let Some(SpannedTok {
                    tok: Tok::Int(_),
                    line,
                }) = p.peek()
                {
                    return Err(err(*line, "implicit edge labels are not supported"));
                }
            }
            _ => return Err(err(line, "expected State: or --END--")),
        }
    }

    for &q in &starts {
        if q >= num_states {
            return Err(Error::InvalidAutomaton(format!(
                "initial state {q} out of range (have {num_states} states)"
            )));
        }
    }
    BuchiAutomaton::new(
        aps,
        num_states,
        starts.into_iter().collect::<BTreeSet<_>>(),
        transitions,
        names,
    )
}

/// Reads an automaton from a HOA file.
pub fn read_hoa_file(path: &std::path::Path) -> Result<BuchiAutomaton> {
    let text = std::fs::read_to_string(path)?;
    parse_hoa(&text)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Serializes an automaton to HOA text with one explicitly labelled edge per
/// letter; parsing the output yields the automaton back unchanged.
pub fn write_hoa(aut: &BuchiAutomaton) -> String {
    let mut out = String::new();
    out.push_str("HOA: v1\n");
    writeln!(out, "States: {}", aut.num_states()).unwrap();
    for &q in aut.initial() {
        writeln!(out, "Start: {q}").unwrap();
    }
    write!(out, "AP: {}", aut.ap_list().len()).unwrap();
    for ap in aut.ap_list() {
        write!(out, " \"{}\"", escape(ap)).unwrap();
    }
    out.push('\n');
    out.push_str("acc-name: Buchi\n");
    out.push_str("Acceptance: 1 Inf(0)\n");
    out.push_str("properties: trans-labels explicit-labels trans-acc\n");
    out.push_str("--BODY--\n");
    for q in 0..aut.num_states() {
        match aut.state_name(q) {
            Some(name) => writeln!(out, "State: {q} \"{}\"", escape(name)).unwrap(),
            None => writeln!(out, "State: {q}").unwrap(),
        }
        for t in aut.transitions_from(q) {
            let label = label_of(aut, t.letter);
            if t.accepting {
                writeln!(out, "[{label}] {} {{0}}", t.dst).unwrap();
            } else {
                writeln!(out, "[{label}] {}", t.dst).unwrap();
            }
        }
    }
    out.push_str("--END--\n");
    out
}

/// Writes an automaton to a HOA file.
pub fn write_hoa_file(aut: &BuchiAutomaton, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, write_hoa(aut))?;
    Ok(())
}

/// Label of a single letter: conjunction of literals by AP index.
fn label_of(aut: &BuchiAutomaton, letter: Letter) -> String {
    if aut.ap_list().is_empty() {
        return "t".to_string();
    }
    let mut parts = Vec::with_capacity(aut.ap_list().len());
    for i in 0..aut.ap_list().len() {
        if letter & (1 << i) != 0 {
            parts.push(format!("{i}"));
        } else {
            parts.push(format!("!{i}"));
        }
    }
    parts.join("&")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::StateId;

    fn tr(src: StateId, letter: Letter, dst: StateId, accepting: bool) -> Transition {
        Transition {
            src,
            letter,
            dst,
            accepting,
        }
    }

    #[test]
    fn parse_minimal() {
        let text = r#"
HOA: v1
States: 2
Start: 0
AP: 1 "p"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[!0] 0
[0] 1
State: 1
[0] 1 {0}
--END--
"#;
        let a = parse_hoa(text).unwrap();
        assert_eq!(a.num_states(), 2);
        assert_eq!(a.ap_list(), ["p"]);
        assert_eq!(a.initial().iter().copied().collect::<Vec<_>>(), [0]);
        assert_eq!(
            a.transitions(),
            [
                tr(0, 0, 0, false),
                tr(0, 1, 1, false),
                tr(1, 1, 1, true),
            ]
        );
    }

    #[test]
    fn label_expressions_expand_to_letters() {
        let text = r#"
HOA: v1
States: 1
Start: 0
AP: 2 "a" "b"
Acceptance: 1 Inf(0)
--BODY--
State: 0
[t] 0
--END--
"#;
        let a = parse_hoa(text).unwrap();
        assert_eq!(
            a.transitions(),
            [
                tr(0, 0, 0, false),
                tr(0, 1, 0, false),
                tr(0, 2, 0, false),
                tr(0, 3, 0, false),
            ]
        );
    }

    #[test]
    fn overlapping_labels_with_mixed_acceptance_conflict() {
        // [t] covers all four letters non-accepting; the second edge marks
        // letters {a-only, b-only, ab} accepting — same triples, both flags.
        let text = r#"
HOA: v1
States: 1
Start: 0
AP: 2 "a" "b"
Acceptance: 1 Inf(0)
--BODY--
State: 0
[t] 0
[!0 & 1 | 0] 0 {0}
--END--
"#;
        assert!(matches!(
            parse_hoa(text),
            Err(Error::ConflictingTransition { .. })
        ));
    }

    #[test]
    fn precedence_not_binds_tighter_than_and_than_or() {
        let text = r#"
HOA: v1
States: 2
Start: 0
AP: 2 "a" "b"
Acceptance: 1 Inf(0)
--BODY--
State: 0
[!0&1|0] 1
State: 1
--END--
"#;
        let a = parse_hoa(text).unwrap();
        // ((!a)&b)|a: letters {b-only=2, a-only=1, ab=3}.
        let letters: Vec<Letter> = a.transitions().iter().map(|t| t.letter).collect();
        assert_eq!(letters, [1, 2, 3]);
    }

    #[test]
    fn parenthesized_negation() {
        let text = r#"
HOA: v1
States: 1
Start: 0
AP: 2 "a" "b"
Acceptance: 1 Inf(0)
--BODY--
State: 0
[!(0|1)] 0
--END--
"#;
        let a = parse_hoa(text).unwrap();
        assert_eq!(a.transitions(), [tr(0, 0, 0, false)]);
    }

    #[test]
    fn state_level_acceptance_marks_all_outgoing() {
        let text = r#"
HOA: v1
States: 2
Start: 0
AP: 1 "p"
Acceptance: 1 Inf(0)
--BODY--
State: 0 {0}
[t] 0
[0] 1
State: 1
[f] 0
--END--
"#;
        let a = parse_hoa(text).unwrap();
        assert_eq!(
            a.transitions(),
            [
                tr(0, 0, 0, true),
                tr(0, 1, 0, true),
                tr(0, 1, 1, true),
            ]
        );
    }

    #[test]
    fn multiple_start_headers() {
        let text = r#"
HOA: v1
States: 3
Start: 2
Start: 0
AP: 0
Acceptance: 1 Inf(0)
--BODY--
State: 0
State: 1
State: 2
[t] 1 {0}
--END--
"#;
        let a = parse_hoa(text).unwrap();
        assert_eq!(a.initial().iter().copied().collect::<Vec<_>>(), [0, 2]);
        assert_eq!(a.num_letters(), 1);
    }

    #[test]
    fn tolerated_headers_are_ignored() {
        let text = r#"
HOA: v1
name: "example automaton"
States: 1
Start: 0
tool: "gadget" "1.0"
AP: 1 "p"
properties: trans-labels explicit-labels trans-acc deterministic
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0 "loop"
[0] 0 {0}
--END--
"#;
        let a = parse_hoa(text).unwrap();
        assert_eq!(a.state_name(0), Some("loop"));
    }

    #[test]
    fn unknown_header_is_rejected() {
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 0\nAcceptance: 1 Inf(0)\ncontrollable-AP: 0\n--BODY--\n--END--\n";
        let e = parse_hoa(text).unwrap_err();
        assert!(e.to_string().contains("controllable-AP"), "{e}");
    }

    #[test]
    fn non_buchi_acceptance_is_rejected() {
        for acc in [
            "Acceptance: 2 Inf(0) & Inf(1)",
            "Acceptance: 1 Fin(0)",
            "Acceptance: 1 Inf(1)",
        ] {
            let text = format!("HOA: v1\nStates: 1\nStart: 0\nAP: 0\n{acc}\n--BODY--\n--END--\n");
            assert!(
                matches!(parse_hoa(&text), Err(Error::UnsupportedAcceptance(_))),
                "{acc} should be rejected"
            );
        }
    }

    #[test]
    fn undeclared_ap_index_is_rejected() {
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"p\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\n[1] 0\n--END--\n";
        let e = parse_hoa(text).unwrap_err();
        assert!(e.to_string().contains("out of range"), "{e}");
    }

    #[test]
    fn too_many_aps_rejected() {
        let names: Vec<String> = (0..21).map(|i| format!("\"p{i}\"")).collect();
        let text = format!(
            "HOA: v1\nStates: 1\nStart: 0\nAP: 21 {}\nAcceptance: 1 Inf(0)\n--BODY--\n--END--\n",
            names.join(" ")
        );
        assert!(matches!(parse_hoa(&text), Err(Error::TooManyAps(21))));
    }

    #[test]
    fn duplicate_state_block_rejected() {
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 0\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\nState: 0\n--END--\n";
        assert!(parse_hoa(text).is_err());
    }

    #[test]
    fn implicit_labels_rejected() {
        let text = "HOA: v1\nStates: 2\nStart: 0\nAP: 1 \"p\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\n0 1\n--END--\n";
        let e = parse_hoa(text).unwrap_err();
        assert!(e.to_string().contains("implicit"), "{e}");
    }

    #[test]
    fn round_trip_preserves_everything() {
        let a = BuchiAutomaton::new(
            vec!["a".into(), "b".into()],
            3,
            [0, 2].into_iter().collect(),
            vec![
                tr(0, 0, 1, false),
                tr(0, 3, 2, true),
                tr(1, 1, 1, true),
                tr(1, 2, 0, false),
                tr(2, 0, 2, false),
            ],
            vec![
                Some("{0,1}".into()),
                Some("({0,1},{})".into()),
                None,
            ],
        )
        .unwrap();
        let text = write_hoa(&a);
        let b = parse_hoa(&text).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip_escapes_quotes() {
        let a = BuchiAutomaton::new(
            vec!["p".into()],
            1,
            [0].into_iter().collect(),
            vec![tr(0, 0, 0, true)],
            vec![Some("say \"hi\" \\ bye".into())],
        )
        .unwrap();
        let b = parse_hoa(&write_hoa(&a)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn comments_are_skipped() {
        let text = "HOA: v1 /* a /* nested */ comment */\nStates: 1\nStart: 0\nAP: 0\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\n[t] 0 {0}\n--END--\n";
        let a = parse_hoa(text).unwrap();
        assert_eq!(a.num_states(), 1);
    }
}
