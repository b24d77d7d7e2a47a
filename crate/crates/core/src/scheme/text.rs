//! Line-oriented text format for schemes.
//!
//! ```text
//! terminal a : o -> o
//! nonterminal F : (o -> o) -> o
//! inert Delta : o
//! var x : o
//! start S
//! rule F x = a x
//! ```
//!
//! Lines starting with `--` are comments. `inert` declares a non-terminal
//! that has no rule.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use super::{Rule, Scheme};
use crate::term::{Expr, Symbol, SymbolKind, Term};
use crate::types::SimpleType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: undeclared symbol {name}")]
    Undeclared {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: type error: {message}")]
    Type {
        line: usize,
        column: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Arrow,
    Colon,
    Equals,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '#' | '~')
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            out.push((Tok::LParen, col));
            i += 1;
        } else if c == ')' {
            out.push((Tok::RParen, col));
            i += 1;
        } else if c == ':' {
            out.push((Tok::Colon, col));
            i += 1;
        } else if c == '=' {
            out.push((Tok::Equals, col));
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push((Tok::Arrow, col));
            i += 2;
        } else if is_ident_char(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            return Err(ParseError::Syntax {
                line: lineno,
                column: col,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_col)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.col(),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok((s.clone(), col))
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn done(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            Err(self.err("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn ty(&mut self) -> Result<SimpleType, ParseError> {
        let arg = self.ty_atom()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rest = self.ty()?;
            Ok(SimpleType::arrow(arg, rest))
        } else {
            Ok(arg)
        }
    }

    fn ty_atom(&mut self) -> Result<SimpleType, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "o" => {
                self.pos += 1;
                Ok(SimpleType::ground())
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.ty()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => Err(self.err("expected a type")),
        }
    }
}

/// Syntax tree of a rule body before symbol resolution.
enum RawTerm {
    Name(String, usize),
    App(Box<RawTerm>, Vec<RawTerm>),
}

impl<'a> Cursor<'a> {
    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let head = self.term_atom()?;
        let mut args = Vec::new();
        while matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::LParen)) {
            args.push(self.term_atom()?);
        }
        if args.is_empty() {
            Ok(head)
        } else {
            Ok(RawTerm::App(Box::new(head), args))
        }
    }

    fn term_atom(&mut self) -> Result<RawTerm, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let (s, col) = self.ident("a symbol")?;
                Ok(RawTerm::Name(s, col))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

struct Decl {
    symbol: Symbol,
    inert: bool,
}

/// Parses a scheme. Declarations may appear in any order relative to rules.
/// The result is not validated beyond symbol resolution and typing.
pub fn parse(text: &str) -> Result<Scheme, ParseError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with("--") {
            continue;
        }
        let toks = tokenize(raw, i + 1)?;
        lines.push((i + 1, raw.chars().count() + 1, toks));
    }

    let mut decls: Vec<Decl> = Vec::new();
    let mut by_name: HashMap<String, usize> = HashMap::new();
    let mut start: Option<String> = None;
    let mut rule_lines = Vec::new();

    for (lineno, end_col, toks) in &lines {
        let mut cur = Cursor {
            toks,
            pos: 0,
            line: *lineno,
            end_col: *end_col,
        };
        let (kw, _) = cur.ident("a declaration keyword")?;
        let kind = match kw.as_str() {
            "terminal" => Some((SymbolKind::Terminal, false)),
            "nonterminal" => Some((SymbolKind::NonTerminal, false)),
            "inert" => Some((SymbolKind::NonTerminal, true)),
            "var" => Some((SymbolKind::Variable, false)),
            "start" => {
                let (name, _) = cur.ident("the start symbol")?;
                cur.done()?;
                if start.is_some() {
                    return Err(ParseError::Syntax {
                        line: *lineno,
                        column: 1,
                        message: "duplicate start declaration".into(),
                    });
                }
                start = Some(name);
                None
            }
            "rule" => {
                rule_lines.push((*lineno, *end_col, toks));
                None
            }
            other => {
                return Err(ParseError::Syntax {
                    line: *lineno,
                    column: 1,
                    message: format!("unknown keyword {other}"),
                })
            }
        };
        if let Some((kind, inert)) = kind {
            let (name, col) = cur.ident("a symbol name")?;
            if name == "o" {
                return Err(ParseError::Syntax {
                    line: *lineno,
                    column: col,
                    message: "o is reserved for the ground type".into(),
                });
            }
            cur.expect(Tok::Colon, "':'")?;
            let ty = cur.ty()?;
            cur.done()?;
            if by_name.contains_key(&name) {
                return Err(ParseError::Syntax {
                    line: *lineno,
                    column: col,
                    message: format!("{name} declared twice"),
                });
            }
            by_name.insert(name.clone(), decls.len());
            decls.push(Decl {
                symbol: Symbol::new(name, kind, ty),
                inert,
            });
        }
    }

    let lookup = |name: &str| by_name.get(name).map(|&i| &decls[i].symbol);

    let mut rules = Vec::new();
    for (lineno, end_col, toks) in rule_lines {
        let mut cur = Cursor {
            toks,
            pos: 1,
            line: lineno,
            end_col,
        };
        let (head, head_col) = cur.ident("a non-terminal")?;
        let head_sym = match lookup(&head) {
            Some(s) if s.is_nonterminal() => s.clone(),
            Some(_) => {
                return Err(ParseError::Type {
                    line: lineno,
                    column: head_col,
                    message: format!("{head} is not a non-terminal"),
                })
            }
            None => {
                return Err(ParseError::Undeclared {
                    line: lineno,
                    column: head_col,
                    name: head,
                })
            }
        };
        let mut params = Vec::new();
        while let Some(Tok::Ident(_)) = cur.peek() {
            let (p, col) = cur.ident("a parameter")?;
            match lookup(&p) {
                Some(s) if s.is_variable() => params.push(s.clone()),
                Some(_) => {
                    return Err(ParseError::Type {
                        line: lineno,
                        column: col,
                        message: format!("parameter {p} is not declared as a variable"),
                    })
                }
                None => {
                    return Err(ParseError::Undeclared {
                        line: lineno,
                        column: col,
                        name: p,
                    })
                }
            }
        }
        let expected = head_sym.ty().arguments();
        if expected.len() != params.len() {
            return Err(ParseError::Type {
                line: lineno,
                column: head_col,
                message: format!(
                    "{head} has arity {}, rule gives {} parameter(s)",
                    expected.len(),
                    params.len()
                ),
            });
        }
        for (p, t) in params.iter().zip(&expected) {
            if p.ty() != *t {
                return Err(ParseError::Type {
                    line: lineno,
                    column: head_col,
                    message: format!("parameter {} has type {}, expected {}", p.name(), p.ty(), t),
                });
            }
        }
        cur.expect(Tok::Equals, "'='")?;
        let raw = cur.term()?;
        cur.done()?;
        let expr = resolve(&raw, &|name| lookup(name), &params, lineno)?;
        let body = expr.to_term().map_err(|e| ParseError::Type {
            line: lineno,
            column: raw_col(&raw),
            message: e.to_string(),
        })?;
        rules.push(Rule::new(head_sym, params, body));
    }

    let mut variables = Vec::new();
    let mut terminals = Vec::new();
    let mut nonterminals = Vec::new();
    let mut inert = BTreeSet::new();
    for d in decls {
        match d.symbol.kind() {
            SymbolKind::Variable => variables.push(d.symbol),
            SymbolKind::Terminal => terminals.push(d.symbol),
            SymbolKind::NonTerminal => {
                if d.inert {
                    inert.insert(d.symbol.name_arc().clone());
                }
                nonterminals.push(d.symbol)
            }
        }
    }
    let start = start.ok_or(ParseError::Syntax {
        line: lines.last().map(|l| l.0).unwrap_or(1),
        column: 1,
        message: "missing start declaration".into(),
    })?;
    Ok(Scheme::from_parts(
        variables,
        terminals,
        nonterminals,
        inert,
        rules,
        Arc::from(start),
    ))
}

/// Parses a closed term over the symbols of `g`, e.g. `F (H a) c`.
pub fn parse_term(g: &Scheme, text: &str) -> Result<Term, ParseError> {
    let toks = tokenize(text, 1)?;
    let mut cur = Cursor {
        toks: &toks,
        pos: 0,
        line: 1,
        end_col: text.chars().count() + 1,
    };
    let raw = cur.term()?;
    cur.done()?;
    let expr = resolve(&raw, &|name| g.symbol(name), &[], 1)?;
    expr.to_term().map_err(|e| ParseError::Type {
        line: 1,
        column: raw_col(&raw),
        message: e.to_string(),
    })
}

fn raw_col(raw: &RawTerm) -> usize {
    match raw {
        RawTerm::Name(_, c) => *c,
        RawTerm::App(h, _) => raw_col(h),
    }
}

fn resolve<'s>(
    raw: &RawTerm,
    lookup: &dyn Fn(&str) -> Option<&'s Symbol>,
    params: &[Symbol],
    line: usize,
) -> Result<Expr, ParseError> {
    match raw {
        RawTerm::Name(name, col) => match lookup(name) {
            Some(s) if s.is_variable() && !params.contains(s) => Err(ParseError::Undeclared {
                line,
                column: *col,
                name: format!("{name} (not a parameter of this rule)"),
            }),
            Some(s) => Ok(Expr::leaf(s.clone())),
            None => Err(ParseError::Undeclared {
                line,
                column: *col,
                name: name.clone(),
            }),
        },
        RawTerm::App(head, args) => {
            let mut e = resolve(head, lookup, params, line)?;
            for a in args {
                e.args.push(resolve(a, lookup, params, line)?);
            }
            Ok(e)
        }
    }
}

/// Renders declarations sorted by name (per kind), then rules in the same
/// order as their non-terminals' declarations.
pub fn render(g: &Scheme) -> String {
    let mut out = String::new();
    let mut sorted = |syms: &[Symbol], kw: &str, filter: &dyn Fn(&Symbol) -> bool| {
        let mut v: Vec<&Symbol> = syms.iter().filter(|s| filter(s)).collect();
        v.sort_by(|a, b| a.name().cmp(b.name()));
        for s in v {
            let _ = writeln!(out, "{kw} {} : {}", s.name(), s.ty());
        }
    };
    sorted(g.terminals(), "terminal", &|_| true);
    sorted(g.nonterminals(), "nonterminal", &|s| !g.is_inert(s.name()));
    sorted(g.nonterminals(), "inert", &|s| g.is_inert(s.name()));
    sorted(g.variables(), "var", &|_| true);
    let _ = writeln!(out, "start {}", g.start_name());
    // Rules follow the rendered (sorted) declaration order, so that rendering
    // is idempotent across a parse.
    let mut rules: Vec<&Rule> = g.rules().iter().collect();
    rules.sort_by(|a, b| a.nonterminal().name().cmp(b.nonterminal().name()));
    for r in rules {
        write_rule(&mut out, r);
    }
    out
}

fn write_rule(out: &mut String, r: &Rule) {
    let _ = write!(out, "rule {}", r.nonterminal().name());
    for p in r.params() {
        let _ = write!(out, " {}", p.name());
    }
    let _ = writeln!(out, " = {}", r.body());
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEC2: &str = include_str!("../../../../schemes/sec2.hors");

    #[test]
    fn parses_running_example() {
        let g = parse(SEC2).unwrap();
        assert!(g.validate().is_ok(), "{:?}", g.validate());
        assert_eq!(g.rules().len(), 6);
        assert_eq!(g.rule("S").unwrap().body().to_string(), "F H I c");
    }

    #[test]
    fn round_trip_is_structural_identity() {
        let g = parse(SEC2).unwrap();
        let text = render(&g);
        let g2 = parse(&text).unwrap();
        assert_eq!(g, g2);
        assert_eq!(render(&g2), text);
    }

    #[test]
    fn self_application_is_a_type_error() {
        let text = "terminal c : o\nnonterminal S : o\nnonterminal F : o -> o\nvar x : o\nstart S\nrule S = F c\nrule F x = x x\n";
        match parse(text).unwrap_err() {
            ParseError::Type { line, .. } => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_location() {
        let text = "terminal c : o\nnonterminal S : o\nstart S\nrule S = (c\n";
        match parse(text).unwrap_err() {
            ParseError::Syntax { line, column, .. } => {
                assert_eq!(line, 4);
                assert_eq!(column, 12);
            }
            other => panic!("{other:?}"),
        }
        let text = "terminal c : o\nnonterminal S : o\nstart S\nrule S = d\n";
        assert!(matches!(
            parse(text).unwrap_err(),
            ParseError::Undeclared {
                line: 4,
                column: 10,
                ..
            }
        ));
        assert!(matches!(
            parse("terminal c : o -> \n").unwrap_err(),
            ParseError::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            parse("terminal c : o\nstart S\nfoo\n").unwrap_err(),
            ParseError::Syntax { line: 3, .. }
        ));
    }

    #[test]
    fn variables_must_be_parameters() {
        let text = "terminal c : o\nnonterminal S : o\nvar x : o\nstart S\nrule S = x\n";
        assert!(matches!(
            parse(text).unwrap_err(),
            ParseError::Undeclared { line: 5, .. }
        ));
    }

    #[test]
    fn standalone_terms() {
        let g = parse(SEC2).unwrap();
        let t = parse_term(&g, "a (J c) (K c) (I c)").unwrap();
        assert_eq!(t.to_string(), "a (J c) (K c) (I c)");
        assert!(matches!(
            parse_term(&g, "F c"),
            Err(ParseError::Type { .. })
        ));
        assert!(matches!(
            parse_term(&g, "x"),
            Err(ParseError::Undeclared { .. })
        ));
        assert!(matches!(
            parse_term(&g, "a (c"),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn inert_declarations_round_trip() {
        let text = "terminal c : o\nnonterminal S : o -> o\ninert D : o\nnonterminal I : o\nvar d : o\nstart I\nrule S d = c\nrule I = S D\n";
        let g = parse(text).unwrap();
        assert!(g.is_inert("D"));
        assert!(g.validate().is_ok());
        assert_eq!(parse(&render(&g)).unwrap(), g);
    }
}
