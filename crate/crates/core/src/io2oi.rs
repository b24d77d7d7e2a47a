//! The self-correcting construction: label every symbol with the semantics
//! of its arguments (`G′`), then send every application judged `q⊥` to a
//! diverging `Void` (`G″`). Unrestricted evaluation of `G″` computes the IO
//! value tree of `G`.
//!
//! An argument that is not fully applied cannot be labelled yet, so it is
//! passed once per possible labelling of its own arguments: a parameter of
//! type `τ` becomes `nbvar(τ)` parameters of type `τ⁺`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::scheme::{fresh_name, Rule, Scheme};
use crate::term::{Symbol, SymbolKind, Term};
use crate::types::SimpleType;
use crate::typesys::{conj_count, Atom, Conj, Environment, Semantics, TypeSysError};

/// Separator between a base name and its annotation index.
pub const ANNOTATION_SEPARATOR: char = '#';
/// Largest duplication width accepted for one argument type.
pub const MAX_NBVAR: u128 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error(transparent)]
    Analysis(#[from] TypeSysError),
    #[error("type {0} needs too many copies per argument")]
    TooWide(SimpleType),
    #[error("annotation has {given} component(s), {expected} expected for {symbol}")]
    AnnotationArity {
        symbol: String,
        expected: usize,
        given: usize,
    },
    #[error("{0} is not an annotated symbol of this scheme")]
    NotAnnotated(String),
}

/// `nbvar(τ)`: the number of argument-conjunction tuples of `τ`.
pub fn nbvar(ty: &SimpleType) -> Result<usize, LabelError> {
    let mut n: u128 = 1;
    for a in ty.arguments() {
        n = conj_count(a)
            .and_then(|c| n.checked_mul(c))
            .filter(|&c| c <= MAX_NBVAR)
            .ok_or_else(|| LabelError::TooWide(ty.clone()))?;
    }
    Ok(n as usize)
}

/// `τ⁺ = (τ1⁺)^nbvar(τ1) -> ... -> (τk⁺)^nbvar(τk) -> o`.
pub fn plus_type(ty: &SimpleType) -> Result<SimpleType, LabelError> {
    let args = ty.arguments();
    let mut out = SimpleType::ground();
    for a in args.into_iter().rev() {
        out = SimpleType::repeated(&plus_type(a)?, nbvar(a)?, out);
    }
    Ok(out)
}

/// Where an annotated symbol came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub base: Symbol,
    pub tuple: Vec<Conj>,
}

/// Naming and typing of annotated symbols, on top of the semantics of the
/// source scheme.
pub struct Labeller<'g> {
    sem: Semantics<'g>,
    conj_index: HashMap<SimpleType, HashMap<Conj, usize>>,
    symbols: HashMap<(Arc<str>, usize), Symbol>,
    annotations: HashMap<Arc<str>, Annotation>,
}

impl<'g> Labeller<'g> {
    pub fn new(g: &'g Scheme) -> Result<Self, LabelError> {
        Ok(Labeller {
            sem: Semantics::new(g)?,
            conj_index: HashMap::new(),
            symbols: HashMap::new(),
            annotations: HashMap::new(),
        })
    }

    pub fn semantics(&mut self) -> &mut Semantics<'g> {
        &mut self.sem
    }

    /// `σ⃗1^τ, ..., σ⃗_nbvar(τ)^τ`, lexicographic over the components in the
    /// canonical conjunction order.
    pub fn sigma_tuples(&mut self, ty: &SimpleType) -> Result<Vec<Vec<Conj>>, LabelError> {
        nbvar(ty)?;
        Ok(self.sem.space().tuples(&ty.arguments())?)
    }

    /// Position of `tuple` in [`Labeller::sigma_tuples`].
    pub fn tuple_index(&mut self, ty: &SimpleType, tuple: &[Conj]) -> Result<usize, LabelError> {
        let args = ty.arguments();
        if args.len() != tuple.len() {
            return Err(LabelError::AnnotationArity {
                symbol: ty.to_string(),
                expected: args.len(),
                given: tuple.len(),
            });
        }
        let mut index = 0usize;
        for (a, s) in args.iter().zip(tuple) {
            let table = self.index_table(a)?;
            let i = *table
                .get(s)
                .ok_or_else(|| LabelError::NotAnnotated(s.to_string()))?;
            index = index * table.len() + i;
        }
        Ok(index)
    }

    fn index_table(&mut self, ty: &SimpleType) -> Result<&HashMap<Conj, usize>, LabelError> {
        if !self.conj_index.contains_key(ty) {
            let conjs = self.sem.space().conjs(ty)?;
            let table = conjs
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, c)| (c, i))
                .collect();
            self.conj_index.insert(ty.clone(), table);
        }
        Ok(&self.conj_index[ty])
    }

    /// `α^{σ1,...,σk}` for a non-terminal or variable `α`. Symbols without
    /// arguments keep their name.
    pub fn annotated(&mut self, base: &Symbol, tuple: &[Conj]) -> Result<Symbol, LabelError> {
        let index = self.tuple_index(base.ty(), tuple)?;
        let key = (base.name_arc().clone(), index);
        if let Some(s) = self.symbols.get(&key) {
            return Ok(s.clone());
        }
        let name = if tuple.is_empty() {
            base.name().to_string()
        } else {
            format!("{}{ANNOTATION_SEPARATOR}{index}", base.name())
        };
        let sym = Symbol::new(name, base.kind(), plus_type(base.ty())?);
        self.symbols.insert(key, sym.clone());
        self.annotations.insert(
            sym.name_arc().clone(),
            Annotation {
                base: base.clone(),
                tuple: tuple.to_vec(),
            },
        );
        Ok(sym)
    }

    /// `t⁺^{ann}_{venv}`.
    pub fn plus_term(
        &mut self,
        t: &Term,
        venv: &Environment,
        ann: &[Conj],
    ) -> Result<Term, LabelError> {
        let head = t.head();
        let remaining = t.ty().arity();
        if ann.len() != remaining {
            return Err(LabelError::AnnotationArity {
                symbol: t.to_string(),
                expected: remaining,
                given: ann.len(),
            });
        }
        let mut args = Vec::new();
        let mut tuple = Vec::with_capacity(t.args().len() + ann.len());
        for a in t.args() {
            tuple.push(self.sem.of_in(a, venv)?);
            for rho in self.sigma_tuples(a.ty())? {
                args.push(self.plus_term(a, venv, &rho)?);
            }
        }
        tuple.extend(ann.iter().cloned());
        let head = match head.kind() {
            SymbolKind::Terminal => head.clone(),
            _ => self.annotated(head, &tuple)?,
        };
        Ok(Term::apply(head, args).expect("labelling preserves typing"))
    }

    /// The annotated parameters of a rule under `σ⃗`, block by block.
    fn params(&mut self, params: &[Symbol]) -> Result<Vec<Symbol>, LabelError> {
        let mut out = Vec::new();
        for p in params {
            for rho in self.sigma_tuples(p.ty())? {
                out.push(self.annotated(p, &rho)?);
            }
        }
        Ok(out)
    }
}

/// `G′` together with what is needed to correct it and read it back.
#[derive(Debug, Clone)]
pub struct LabelledScheme {
    pub scheme: Scheme,
    pub original: Scheme,
    /// `Θ⋆` of the original scheme.
    pub theta: Environment,
    pub theta_iterations: usize,
    /// Annotated non-terminal and variable names, with their origin.
    pub annotations: HashMap<Arc<str>, Annotation>,
    /// Annotated rule heads whose application is judged `q⊥`.
    pub bottom_heads: BTreeSet<Arc<str>>,
}

/// Builds `G′`: one rule per non-terminal and annotation tuple.
pub fn label_scheme(g: &Scheme) -> Result<LabelledScheme, LabelError> {
    let mut lab = Labeller::new(g)?;
    let mut nonterminals = Vec::new();
    let mut variables: Vec<Symbol> = Vec::new();
    let mut seen_vars: HashSet<Arc<str>> = HashSet::new();
    let mut rules = Vec::new();
    let mut bottom_heads = BTreeSet::new();

    for n in g.nonterminals() {
        let rule = g
            .rule(n.name())
            .ok_or_else(|| TypeSysError::Inert(n.name().to_string()))?;
        let params = lab.params(rule.params())?;
        for p in &params {
            if seen_vars.insert(p.name_arc().clone()) {
                variables.push(p.clone());
            }
        }
        for tuple in lab.sigma_tuples(n.ty())? {
            let head = lab.annotated(n, &tuple)?;
            let mut venv = Environment::new();
            for (x, s) in rule.params().iter().zip(&tuple) {
                venv.extend(x.name_arc(), s);
            }
            let body = lab.plus_term(rule.body(), &venv, &[])?;
            if lab.sem.apply_symbol(n, &tuple)?.contains(&Atom::Bot) {
                bottom_heads.insert(head.name_arc().clone());
            }
            nonterminals.push(head.clone());
            rules.push(Rule::new(head, params.clone(), body));
        }
    }
    let start = g
        .start_symbol()
        .ok_or_else(|| LabelError::NotAnnotated(g.start_name().to_string()))?
        .clone();
    let start = lab.annotated(&start, &[])?;
    let theta = lab.sem.theta_star().clone();
    let scheme = Scheme::from_parts(
        variables,
        g.terminals().to_vec(),
        nonterminals,
        BTreeSet::new(),
        rules,
        start.name_arc().clone(),
    );
    Ok(LabelledScheme {
        scheme,
        original: g.clone(),
        theta: theta.env,
        theta_iterations: theta.iterations,
        annotations: lab.annotations,
        bottom_heads,
    })
}

impl LabelledScheme {
    /// `t⁺` for a closed ground term of the original scheme.
    pub fn plus_term(&self, t: &Term) -> Result<Term, LabelError> {
        let mut lab = Labeller::new(&self.original)?;
        let out = lab.plus_term(t, &Environment::new(), &[])?;
        // Labels are named by tuple index only, so they agree with ours.
        for name in lab.annotations.keys() {
            if self.scheme.symbol(name).is_none() && !self.annotations.contains_key(name) {
                return Err(LabelError::NotAnnotated(name.to_string()));
            }
        }
        Ok(out)
    }

    /// The term of the original scheme a labelled term stands for: labels
    /// are dropped and each block of copies collapses to its first member.
    pub fn erase(&self, t: &Term) -> Result<Term, LabelError> {
        let head = t.head();
        let base = if head.is_terminal() {
            head.clone()
        } else {
            self.annotations
                .get(head.name())
                .map(|a| a.base.clone())
                .ok_or_else(|| LabelError::NotAnnotated(head.name().to_string()))?
        };
        let mut args = Vec::new();
        let mut i = 0;
        for ty in base.ty().arguments() {
            if i >= t.args().len() {
                break;
            }
            args.push(self.erase(&t.args()[i])?);
            i += nbvar(ty)?;
        }
        Ok(Term::apply(base, args).expect("erasure preserves typing"))
    }
}

/// Builds `G″` from `G′`: rules whose head is judged `q⊥` rewrite to `Void`,
/// and `Void -> Void` is added.
pub fn self_correct(labelled: &LabelledScheme) -> Scheme {
    let g = &labelled.scheme;
    let void = Symbol::nonterminal(fresh_name("Void", &g.names()), SimpleType::ground());
    let void_term = Term::symbol(void.clone());
    let mut rules: Vec<Rule> = g
        .rules()
        .iter()
        .map(|r| {
            if labelled.bottom_heads.contains(r.nonterminal().name()) {
                Rule::new(
                    r.nonterminal().clone(),
                    r.params().to_vec(),
                    void_term.clone(),
                )
            } else {
                r.clone()
            }
        })
        .collect();
    rules.push(Rule::new(void.clone(), Vec::new(), void_term));
    let mut nonterminals = g.nonterminals().to_vec();
    nonterminals.push(void);
    Scheme::from_parts(
        g.variables().to_vec(),
        g.terminals().to_vec(),
        nonterminals,
        BTreeSet::new(),
        rules,
        Arc::from(g.start_name()),
    )
}

/// Rule counts and duplication widths of a `G ↦ G″` run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeReport {
    pub rules_before: usize,
    pub rules_after: usize,
    pub nonterminals_before: usize,
    pub nonterminals_after: usize,
    /// `nbvar` of every argument type occurring in the source scheme.
    pub nbvar: Vec<(SimpleType, usize)>,
    /// Heads of the rules replaced by `Void`.
    pub voided: Vec<String>,
}

impl SizeReport {
    pub fn new(labelled: &LabelledScheme, corrected: &Scheme) -> Result<Self, LabelError> {
        let g = &labelled.original;
        let mut types = BTreeSet::new();
        for n in g.nonterminals() {
            for a in n.ty().arguments() {
                types.insert(a.clone());
            }
        }
        let nbvar = types
            .into_iter()
            .map(|t| nbvar(&t).map(|n| (t, n)))
            .collect::<Result<_, _>>()?;
        Ok(SizeReport {
            rules_before: g.rules().len(),
            rules_after: corrected.rules().len(),
            nonterminals_before: g.nonterminals().len(),
            nonterminals_after: corrected.nonterminals().len(),
            nbvar,
            voided: labelled
                .bottom_heads
                .iter()
                .map(|s| s.to_string())
                .collect(),
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "rules: {} -> {}", self.rules_before, self.rules_after);
        let _ = writeln!(
            out,
            "nonterminals: {} -> {}",
            self.nonterminals_before, self.nonterminals_after
        );
        for (t, n) in &self.nbvar {
            let _ = writeln!(out, "nbvar({t}) = {n}");
        }
        let _ = writeln!(out, "voided rules: {}", self.voided.len());
        for v in &self.voided {
            let _ = writeln!(out, "  {v}");
        }
        out
    }
}
