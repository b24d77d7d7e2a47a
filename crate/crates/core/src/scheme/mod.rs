//! The recursion-scheme data model `⟨V, Σ, N, R, S⟩`.

mod text;

pub use text::{parse, parse_term, render, ParseError};

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{Symbol, SymbolKind, Term};
use crate::types::SimpleType;

/// `F x1 ... xk -> body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    nonterminal: Symbol,
    params: Vec<Symbol>,
    body: Term,
}

impl Rule {
    pub fn new(nonterminal: Symbol, params: Vec<Symbol>, body: Term) -> Self {
        Rule {
            nonterminal,
            params,
            body,
        }
    }

    pub fn nonterminal(&self) -> &Symbol {
        &self.nonterminal
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    pub fn body(&self) -> &Term {
        &self.body
    }

    /// The right-hand side with parameters replaced by `args`.
    pub fn instantiate(&self, args: &[Term]) -> Term {
        let map: HashMap<Arc<str>, Term> = self
            .params
            .iter()
            .map(|p| p.name_arc().clone())
            .zip(args.iter().cloned())
            .collect();
        self.body.substitute_all(&map)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.nonterminal)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        write!(f, " -> {}", self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("start term must have type o, found {0}")]
    StartNotGround(SimpleType),
    #[error("start term uses {0}, which is not a declared terminal or non-terminal")]
    UnknownSymbol(String),
    #[error("invalid scheme: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// A higher-order recursion scheme. Non-terminals declared `inert` carry no
/// rule; they only occur as argument tokens.
#[derive(Debug, Clone)]
pub struct Scheme {
    variables: Vec<Symbol>,
    terminals: Vec<Symbol>,
    nonterminals: Vec<Symbol>,
    inert: BTreeSet<Arc<str>>,
    rules: Vec<Rule>,
    start: Arc<str>,
    rule_index: HashMap<Arc<str>, usize>,
    symbols: HashMap<Arc<str>, Symbol>,
}

#[derive(Debug, Default, Clone)]
pub struct SchemeBuilder {
    variables: Vec<Symbol>,
    terminals: Vec<Symbol>,
    nonterminals: Vec<Symbol>,
    inert: BTreeSet<Arc<str>>,
    rules: Vec<Rule>,
    start: Option<Arc<str>>,
}

impl SchemeBuilder {
    pub fn new() -> Self {
        SchemeBuilder::default()
    }

    pub fn variable(&mut self, s: Symbol) -> &mut Self {
        self.variables.push(s);
        self
    }

    pub fn terminal(&mut self, s: Symbol) -> &mut Self {
        self.terminals.push(s);
        self
    }

    pub fn nonterminal(&mut self, s: Symbol) -> &mut Self {
        self.nonterminals.push(s);
        self
    }

    pub fn inert(&mut self, s: Symbol) -> &mut Self {
        self.inert.insert(s.name_arc().clone());
        self.nonterminals.push(s);
        self
    }

    pub fn rule(&mut self, r: Rule) -> &mut Self {
        self.rules.push(r);
        self
    }

    pub fn start(&mut self, name: impl Into<Arc<str>>) -> &mut Self {
        self.start = Some(name.into());
        self
    }

    /// Assembles the scheme without validating it; see [`Scheme::validate`].
    pub fn build(&self) -> Scheme {
        Scheme::assemble(
            self.variables.clone(),
            self.terminals.clone(),
            self.nonterminals.clone(),
            self.inert.clone(),
            self.rules.clone(),
            self.start.clone().unwrap_or_else(|| Arc::from("S")),
        )
    }
}

impl Scheme {
    fn assemble(
        variables: Vec<Symbol>,
        terminals: Vec<Symbol>,
        nonterminals: Vec<Symbol>,
        inert: BTreeSet<Arc<str>>,
        rules: Vec<Rule>,
        start: Arc<str>,
    ) -> Scheme {
        let mut rule_index = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            rule_index
                .entry(r.nonterminal.name_arc().clone())
                .or_insert(i);
        }
        let mut symbols = HashMap::new();
        for s in variables.iter().chain(&terminals).chain(&nonterminals) {
            symbols
                .entry(s.name_arc().clone())
                .or_insert_with(|| s.clone());
        }
        Scheme {
            variables,
            terminals,
            nonterminals,
            inert,
            rules,
            start,
            rule_index,
            symbols,
        }
    }

    pub fn variables(&self) -> &[Symbol] {
        &self.variables
    }

    pub fn terminals(&self) -> &[Symbol] {
        &self.terminals
    }

    /// Non-terminals in declaration order, inert ones included.
    pub fn nonterminals(&self) -> &[Symbol] {
        &self.nonterminals
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, nonterminal: &str) -> Option<&Rule> {
        self.rule_index.get(nonterminal).map(|&i| &self.rules[i])
    }

    pub fn is_inert(&self, name: &str) -> bool {
        self.inert.contains(name)
    }

    pub fn inert_names(&self) -> impl Iterator<Item = &str> {
        self.inert.iter().map(|s| s.as_ref())
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(name)
    }

    pub fn start_name(&self) -> &str {
        &self.start
    }

    pub fn start_symbol(&self) -> Option<&Symbol> {
        self.symbol(&self.start).filter(|s| s.is_nonterminal())
    }

    /// The start non-terminal as a term.
    pub fn start_term(&self) -> Term {
        Term::symbol(
            self.start_symbol()
                .cloned()
                .unwrap_or_else(|| Symbol::nonterminal(self.start.clone(), SimpleType::ground())),
        )
    }

    pub fn names(&self) -> HashSet<Arc<str>> {
        self.symbols.keys().cloned().collect()
    }

    /// Maximum order among the non-terminals.
    pub fn order(&self) -> usize {
        self.nonterminals
            .iter()
            .map(|n| n.ty().order())
            .max()
            .unwrap_or(0)
    }

    /// Checks every structural invariant, reporting all violations.
    pub fn validate(&self) -> Result<(), Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let mut push =
            |subject: String, message: String| diags.push(Diagnostic { subject, message });

        let mut seen: HashMap<&str, SymbolKind> = HashMap::new();
        for s in self
            .variables
            .iter()
            .chain(&self.terminals)
            .chain(&self.nonterminals)
        {
            if let Some(k) = seen.insert(s.name(), s.kind()) {
                push(
                    format!("{} {}", s.kind(), s.name()),
                    format!("name already declared as a {k}"),
                );
            }
        }
        for s in &self.variables {
            if !s.is_variable() {
                push(
                    format!("variable {}", s.name()),
                    "declared with wrong kind".into(),
                );
            }
        }
        for t in &self.terminals {
            if !t.is_terminal() {
                push(
                    format!("terminal {}", t.name()),
                    "declared with wrong kind".into(),
                );
            }
            if t.ty().order() > 1 {
                push(
                    format!("terminal {}", t.name()),
                    format!("terminal order > 1 (type {})", t.ty()),
                );
            }
        }
        for n in &self.nonterminals {
            if !n.is_nonterminal() {
                push(
                    format!("nonterminal {}", n.name()),
                    "declared with wrong kind".into(),
                );
            }
        }
        match self.symbol(&self.start) {
            Some(s) if s.is_nonterminal() => {
                if !s.ty().is_ground() {
                    push(
                        format!("start {}", self.start),
                        format!("start symbol must have type o, found {}", s.ty()),
                    );
                }
                if self.is_inert(&self.start) {
                    push(
                        format!("start {}", self.start),
                        "start symbol has no rule".into(),
                    );
                }
            }
            _ => push(
                format!("start {}", self.start),
                "start symbol is not a declared non-terminal".into(),
            ),
        }

        let mut rule_count: HashMap<&str, usize> = HashMap::new();
        for r in &self.rules {
            *rule_count.entry(r.nonterminal.name()).or_default() += 1;
        }
        for n in &self.nonterminals {
            let count = rule_count.get(n.name()).copied().unwrap_or(0);
            if self.is_inert(n.name()) {
                if count > 0 {
                    push(
                        format!("nonterminal {}", n.name()),
                        "inert non-terminal must not have a rule".into(),
                    );
                }
            } else if count == 0 {
                push(format!("nonterminal {}", n.name()), "missing rule".into());
            } else if count > 1 {
                push(
                    format!("nonterminal {}", n.name()),
                    format!("{count} rules; exactly one is allowed"),
                );
            }
        }

        for r in &self.rules {
            let subject = format!("rule {}", r.nonterminal.name());
            match self.symbol(r.nonterminal.name()) {
                Some(s) if s == &r.nonterminal => {}
                Some(s) if s.is_nonterminal() => {
                    push(subject.clone(), "head type differs from declaration".into())
                }
                _ => push(
                    subject.clone(),
                    "head is not a declared non-terminal".into(),
                ),
            }
            let expected = r.nonterminal.ty().arguments();
            if expected.len() != r.params.len() {
                push(
                    subject.clone(),
                    format!(
                        "{} parameter(s) given, arity is {}",
                        r.params.len(),
                        expected.len()
                    ),
                );
            }
            let mut param_names = HashSet::new();
            for (i, p) in r.params.iter().enumerate() {
                if !param_names.insert(p.name()) {
                    push(subject.clone(), format!("parameter {} repeated", p.name()));
                }
                if self.symbol(p.name()) != Some(p) || !p.is_variable() {
                    push(
                        subject.clone(),
                        format!("parameter {} is not a declared variable", p.name()),
                    );
                }
                if let Some(t) = expected.get(i) {
                    if p.ty() != *t {
                        push(
                            subject.clone(),
                            format!("parameter {} has type {}, expected {}", p.name(), p.ty(), t),
                        );
                    }
                }
            }
            if !r.body.ty().is_ground() {
                push(
                    subject.clone(),
                    format!("body not ground (type {})", r.body.ty()),
                );
            }
            for s in r.body.symbols() {
                match s.kind() {
                    SymbolKind::Variable => {
                        if !r.params.contains(&s) {
                            push(
                                subject.clone(),
                                format!("variable {} is not a parameter of the rule", s.name()),
                            );
                        }
                    }
                    _ => {
                        if self.symbol(s.name()) != Some(&s) {
                            push(
                                subject.clone(),
                                format!(
                                    "symbol {} is not declared with this kind and type",
                                    s.name()
                                ),
                            );
                        }
                    }
                }
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(diags)
        }
    }

    /// `G_t`: a fresh start symbol `S'` with the rule `S' -> t`.
    pub fn with_start(&self, t: &Term) -> Result<Scheme, SchemeError> {
        if !t.ty().is_ground() {
            return Err(SchemeError::StartNotGround(t.ty().clone()));
        }
        for s in t.symbols() {
            if s.is_variable() || self.symbol(s.name()) != Some(&s) {
                return Err(SchemeError::UnknownSymbol(s.name().to_string()));
            }
        }
        let names = self.names();
        let fresh = fresh_name(&format!("{}'", self.start), &names);
        let sym = Symbol::nonterminal(fresh.clone(), SimpleType::ground());
        let mut nonterminals = self.nonterminals.clone();
        nonterminals.push(sym.clone());
        let mut rules = self.rules.clone();
        rules.push(Rule::new(sym, Vec::new(), t.clone()));
        Ok(Scheme::assemble(
            self.variables.clone(),
            self.terminals.clone(),
            nonterminals,
            self.inert.clone(),
            rules,
            Arc::from(fresh),
        ))
    }

    /// Keeps only non-terminals reachable from the start symbol.
    pub fn prune_unreachable(&self) -> Scheme {
        let mut reached: HashSet<Arc<str>> = HashSet::new();
        let mut stack = vec![self.start.clone()];
        while let Some(n) = stack.pop() {
            if !reached.insert(n.clone()) {
                continue;
            }
            if let Some(r) = self.rule(&n) {
                r.body.for_each_symbol(&mut |s| {
                    if s.is_nonterminal() && !reached.contains(s.name()) {
                        stack.push(s.name_arc().clone());
                    }
                });
            }
        }
        let nonterminals: Vec<Symbol> = self
            .nonterminals
            .iter()
            .filter(|n| reached.contains(n.name()))
            .cloned()
            .collect();
        let rules: Vec<Rule> = self
            .rules
            .iter()
            .filter(|r| reached.contains(r.nonterminal.name()))
            .cloned()
            .collect();
        let mut used_vars: HashSet<&str> = HashSet::new();
        for r in &rules {
            for p in &r.params {
                used_vars.insert(p.name());
            }
        }
        let variables = self
            .variables
            .iter()
            .filter(|v| used_vars.contains(v.name()))
            .cloned()
            .collect();
        let inert = self
            .inert
            .iter()
            .filter(|n| reached.contains(n.as_ref()))
            .cloned()
            .collect();
        Scheme::assemble(
            variables,
            self.terminals.clone(),
            nonterminals,
            inert,
            rules,
            self.start.clone(),
        )
    }

    pub(crate) fn from_parts(
        variables: Vec<Symbol>,
        terminals: Vec<Symbol>,
        nonterminals: Vec<Symbol>,
        inert: BTreeSet<Arc<str>>,
        rules: Vec<Rule>,
        start: Arc<str>,
    ) -> Scheme {
        Scheme::assemble(variables, terminals, nonterminals, inert, rules, start)
    }
}

/// Order-insensitive structural equality: same declarations, same rules.
impl PartialEq for Scheme {
    fn eq(&self, other: &Self) -> bool {
        fn sorted<T: Clone + Ord>(v: &[T]) -> Vec<T> {
            let mut v = v.to_vec();
            v.sort();
            v
        }
        fn rule_key(r: &Rule) -> (String, String) {
            (r.nonterminal.name().to_string(), r.to_string())
        }
        let mut ra: Vec<&Rule> = self.rules.iter().collect();
        let mut rb: Vec<&Rule> = other.rules.iter().collect();
        ra.sort_by_key(|r| rule_key(r));
        rb.sort_by_key(|r| rule_key(r));
        self.start == other.start
            && self.inert == other.inert
            && sorted(&self.variables) == sorted(&other.variables)
            && sorted(&self.terminals) == sorted(&other.terminals)
            && sorted(&self.nonterminals) == sorted(&other.nonterminals)
            && ra == rb
    }
}

impl Eq for Scheme {}

/// `base`, or `base` followed by primes until it is not in `taken`.
pub fn fresh_name(base: &str, taken: &HashSet<Arc<str>>) -> String {
    let mut name = base.to_string();
    while taken.contains(name.as_str()) {
        name.push('\'');
    }
    name
}
