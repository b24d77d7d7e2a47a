//! Symbols, applicative terms, positions and substitution.
//!
//! A [`Term`] is always a head symbol applied to a list of argument terms.
//! Terms are immutable and share subterms through reference counting, so
//! rewriting copies only the path to the changed position.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::types::SimpleType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Terminal,
    NonTerminal,
    Variable,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolKind::Terminal => "terminal",
            SymbolKind::NonTerminal => "nonterminal",
            SymbolKind::Variable => "variable",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    kind: SymbolKind,
    ty: SimpleType,
}

impl Symbol {
    pub fn new(name: impl Into<Arc<str>>, kind: SymbolKind, ty: SimpleType) -> Self {
        Symbol {
            name: name.into(),
            kind,
            ty,
        }
    }

    pub fn terminal(name: impl Into<Arc<str>>, ty: SimpleType) -> Self {
        Symbol::new(name, SymbolKind::Terminal, ty)
    }

    pub fn nonterminal(name: impl Into<Arc<str>>, ty: SimpleType) -> Self {
        Symbol::new(name, SymbolKind::NonTerminal, ty)
    }

    pub fn variable(name: impl Into<Arc<str>>, ty: SimpleType) -> Self {
        Symbol::new(name, SymbolKind::Variable, ty)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn name_arc(&self) -> &Arc<str> {
        &self.name
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn ty(&self) -> &SimpleType {
        &self.ty
    }

    pub fn is_terminal(&self) -> bool {
        self.kind == SymbolKind::Terminal
    }

    pub fn is_nonterminal(&self) -> bool {
        self.kind == SymbolKind::NonTerminal
    }

    pub fn is_variable(&self) -> bool {
        self.kind == SymbolKind::Variable
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.ty)
    }
}

/// Path of 1-based argument indices from the root of a term.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn new(path: Vec<usize>) -> Self {
        Position(path)
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: usize) -> Position {
        let mut p = self.0.clone();
        p.push(index);
        Position(p)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Self {
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("ill-typed application at {position}: argument {index} of {head} expects {expected}, found {found}")]
    ArgumentMismatch {
        position: Position,
        head: String,
        index: usize,
        expected: SimpleType,
        found: SimpleType,
    },
    #[error(
        "ill-typed application at {position}: {head} takes {arity} argument(s), given {given}"
    )]
    TooManyArguments {
        position: Position,
        head: String,
        arity: usize,
        given: usize,
    },
    #[error("invalid position {0}")]
    InvalidPosition(Position),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch {
        expected: SimpleType,
        found: SimpleType,
    },
    #[error("{0} is not a variable")]
    NotAVariable(String),
}

impl TermError {
    fn nested(self, index: usize) -> TermError {
        let prefix = |p: Position| {
            let mut path = vec![index];
            path.extend_from_slice(p.path());
            Position(path)
        };
        match self {
            TermError::ArgumentMismatch {
                position,
                head,
                index: i,
                expected,
                found,
            } => TermError::ArgumentMismatch {
                position: prefix(position),
                head,
                index: i,
                expected,
                found,
            },
            TermError::TooManyArguments {
                position,
                head,
                arity,
                given,
            } => TermError::TooManyArguments {
                position: prefix(position),
                head,
                arity,
                given,
            },
            other => other,
        }
    }
}

struct TermNode {
    head: Symbol,
    args: Vec<Term>,
    ty: SimpleType,
    size: usize,
}

// Deep terms (long IO chains) would overflow the stack under the default
// recursive drop, so uniquely owned children are unlinked iteratively.
impl Drop for TermNode {
    fn drop(&mut self) {
        let mut stack = std::mem::take(&mut self.args);
        while let Some(t) = stack.pop() {
            if let Ok(mut node) = Arc::try_unwrap(t.0) {
                stack.append(&mut node.args);
            }
        }
    }
}

/// A well-typed applicative term `α t1 ... tm`.
#[derive(Clone)]
pub struct Term(Arc<TermNode>);

impl Term {
    pub fn symbol(head: Symbol) -> Term {
        let ty = head.ty.clone();
        Term(Arc::new(TermNode {
            head,
            args: Vec::new(),
            ty,
            size: 1,
        }))
    }

    /// Applies `head` to `args`, checking each argument against the head's
    /// declared type.
    pub fn apply(head: Symbol, args: Vec<Term>) -> Result<Term, TermError> {
        let params = head.ty.arguments();
        if args.len() > params.len() {
            return Err(TermError::TooManyArguments {
                position: Position::root(),
                head: head.name().to_string(),
                arity: params.len(),
                given: args.len(),
            });
        }
        for (i, (arg, expected)) in args.iter().zip(&params).enumerate() {
            if arg.ty() != *expected {
                return Err(TermError::ArgumentMismatch {
                    position: Position(vec![i + 1]),
                    head: head.name().to_string(),
                    index: i + 1,
                    expected: (*expected).clone(),
                    found: arg.ty().clone(),
                });
            }
        }
        Ok(Term::apply_unchecked(head, args))
    }

    /// Construction for callers that already guarantee well-typedness
    /// (rewriting and substitution preserve types).
    pub(crate) fn apply_unchecked(head: Symbol, args: Vec<Term>) -> Term {
        let ty = head
            .ty
            .after(args.len())
            .expect("argument count checked by caller")
            .clone();
        let size = args
            .iter()
            .fold(1usize, |acc, a| acc.saturating_add(a.size()));
        Term(Arc::new(TermNode {
            head,
            args,
            ty,
            size,
        }))
    }

    /// `self arg`.
    pub fn app(&self, arg: Term) -> Result<Term, TermError> {
        let mut args = self.0.args.clone();
        args.push(arg);
        Term::apply(self.0.head.clone(), args)
    }

    pub fn head(&self) -> &Symbol {
        &self.0.head
    }

    pub fn args(&self) -> &[Term] {
        &self.0.args
    }

    pub fn ty(&self) -> &SimpleType {
        &self.0.ty
    }

    /// Number of symbol occurrences, saturating.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Drops the last `n` arguments: the applicative prefix `α t1 ... t(m-n)`.
    pub fn prefix(&self, n: usize) -> Term {
        let keep = self.0.args.len() - n;
        Term::apply_unchecked(self.0.head.clone(), self.0.args[..keep].to_vec())
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in p.path() {
            cur = i
                .checked_sub(1)
                .and_then(|j| cur.args().get(j))
                .ok_or_else(|| TermError::InvalidPosition(p.clone()))?;
        }
        Ok(cur)
    }

    pub fn replace_at(&self, p: &Position, s: Term) -> Result<Term, TermError> {
        let old = self.subterm_at(p)?;
        if old.ty() != s.ty() {
            return Err(TermError::TypeMismatch {
                expected: old.ty().clone(),
                found: s.ty().clone(),
            });
        }
        Ok(self.replace_path(p.path(), s))
    }

    fn replace_path(&self, path: &[usize], s: Term) -> Term {
        match path.split_first() {
            None => s,
            Some((&i, rest)) => {
                let mut args = self.0.args.clone();
                args[i - 1] = args[i - 1].replace_path(rest, s);
                Term::apply_unchecked(self.0.head.clone(), args)
            }
        }
    }

    /// Replaces every occurrence of the variable `x` by `s`.
    pub fn substitute(&self, x: &Symbol, s: &Term) -> Result<Term, TermError> {
        if !x.is_variable() {
            return Err(TermError::NotAVariable(x.name().to_string()));
        }
        if x.ty() != s.ty() {
            return Err(TermError::TypeMismatch {
                expected: x.ty().clone(),
                found: s.ty().clone(),
            });
        }
        let mut map = HashMap::new();
        map.insert(x.name_arc().clone(), s.clone());
        Ok(self.substitute_all(&map))
    }

    /// Simultaneous substitution of variables by name. Types of the images
    /// must match the variables they replace.
    pub(crate) fn substitute_all(&self, map: &HashMap<Arc<str>, Term>) -> Term {
        let args: Vec<Term> = self.0.args.iter().map(|a| a.substitute_all(map)).collect();
        if self.0.head.is_variable() {
            if let Some(image) = map.get(self.0.head.name_arc()) {
                if args.is_empty() {
                    return image.clone();
                }
                let mut full = image.0.args.clone();
                full.extend(args);
                return Term::apply_unchecked(image.0.head.clone(), full);
            }
        }
        if args.iter().zip(&self.0.args).all(|(a, b)| a.ptr_eq(b)) {
            return self.clone();
        }
        Term::apply_unchecked(self.0.head.clone(), args)
    }

    /// All positions in preorder, arguments left to right.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position(path.clone()));
        for (i, a) in self.args().iter().enumerate() {
            path.push(i + 1);
            a.collect_positions(path, out);
            path.pop();
        }
    }

    /// Visits every symbol occurrence in preorder.
    pub fn for_each_symbol(&self, f: &mut impl FnMut(&Symbol)) {
        f(&self.0.head);
        for a in self.args() {
            a.for_each_symbol(f);
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.for_each_symbol(&mut |s| {
            out.insert(s.clone());
        });
        out
    }

    pub fn free_variables(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.for_each_symbol(&mut |s| {
            if s.is_variable() {
                out.insert(s.clone());
            }
        });
        out
    }

    pub fn is_closed(&self) -> bool {
        let mut closed = true;
        self.for_each_symbol(&mut |s| closed &= !s.is_variable());
        closed
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.0.head.name() == name || self.args().iter().any(|a| a.contains_symbol(name))
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other)
            || (self.0.size == other.0.size
                && self.0.head == other.0.head
                && self.0.args == other.0.args)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.head.name().hash(state);
        self.0.args.len().hash(state);
        for a in &self.0.args {
            a.hash(state);
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.head)?;
        for a in self.args() {
            if a.args().is_empty() {
                write!(f, " {a}")?;
            } else {
                write!(f, " ({a})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An untyped application tree, checked into a [`Term`] by [`Expr::to_term`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub head: Symbol,
    pub args: Vec<Expr>,
}

impl Expr {
    pub fn new(head: Symbol, args: Vec<Expr>) -> Self {
        Expr { head, args }
    }

    pub fn leaf(head: Symbol) -> Self {
        Expr {
            head,
            args: Vec::new(),
        }
    }

    pub fn type_of(&self) -> Result<SimpleType, TermError> {
        self.to_term().map(|t| t.ty().clone())
    }

    pub fn to_term(&self) -> Result<Term, TermError> {
        let args = self
            .args
            .iter()
            .enumerate()
            .map(|(i, a)| a.to_term().map_err(|e| e.nested(i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Term::apply(self.head.clone(), args)
    }
}
