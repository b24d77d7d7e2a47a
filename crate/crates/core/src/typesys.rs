//! Intersection types over `Q = {q⊥, q∞}` that detect, for a term, whether
//! its IO value tree is `⊥` (`q⊥`) or whether it holds a redex whose IO
//! evaluation cannot terminate (`q∞`).
//!
//! Two independent routes are provided: [`judge`] searches derivations of the
//! judgement rules goal-first, while [`Semantics`] computes `⟦t⟧`
//! compositionally from the symbols' semantics and [`sem_apply`].
//!
//! Enumerations grow doubly exponentially with the order of a type
//! (`|conj(o -> o)| = 512`, `|conj(o -> o -> o)| = 2^37`), so they are capped
//! and report [`TypeSysError::Intractable`] beyond the cap.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::scheme::Scheme;
use crate::term::{Symbol, SymbolKind, Term};
use crate::types::SimpleType;

/// Largest number of atoms an enumeration may produce.
pub const MAX_ATOMS: u128 = 200_000;
/// Largest number of conjunctions an enumeration may produce.
pub const MAX_CONJUNCTIONS: u128 = 1 << 16;
/// Largest number of argument tuples examined for one non-terminal.
pub const MAX_TUPLES: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeSysError {
    #[error("enumerating {what} of type {ty} needs {count} elements, beyond the supported limit")]
    Intractable {
        what: &'static str,
        ty: SimpleType,
        count: String,
    },
    #[error("non-terminal {0} has no rule")]
    Inert(String),
    #[error("variable {0} is not bound in the environment")]
    Unbound(String),
    #[error("symbol {0} is not declared in the scheme")]
    Unknown(String),
}

/// An atomic mapping `θ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Bot,
    Inf,
    Arrow(Arc<Conj>, Arc<Atom>),
}

/// A conjunctive mapping `⋀{θ1, ..., θn}`: a canonical sorted set of atoms.
/// Conjunctions are ordered by size first, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Conj(Vec<Atom>);

impl Atom {
    pub fn arrow(argument: Conj, result: Atom) -> Atom {
        Atom::Arrow(Arc::new(argument), Arc::new(result))
    }

    /// `q∞ -> q∞`, matched by every arrow-typed term.
    pub fn inf_to_inf() -> Atom {
        Atom::arrow(Conj::single(Atom::Inf), Atom::Inf)
    }

    /// `σ1 -> ... -> σn -> result`.
    pub fn chain(arguments: &[Conj], result: Atom) -> Atom {
        arguments
            .iter()
            .rev()
            .fold(result, |acc, s| Atom::arrow(s.clone(), acc))
    }

    /// Splits `σ1 -> ... -> σn -> θ` with `θ` not an arrow.
    pub fn uncurry(&self) -> (Vec<&Conj>, &Atom) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Atom::Arrow(s, r) = cur {
            args.push(s.as_ref());
            cur = r;
        }
        (args, cur)
    }

    /// `θ ::a τ`.
    pub fn is_of(&self, ty: &SimpleType) -> bool {
        match (self, ty) {
            (Atom::Bot, SimpleType::Ground) => true,
            (Atom::Inf, _) => true,
            (Atom::Arrow(s, r), SimpleType::Arrow(a, b)) => s.is_of(a) && r.is_of(b),
            _ => false,
        }
    }
}

impl Conj {
    pub fn empty() -> Conj {
        Conj(Vec::new())
    }

    pub fn single(a: Atom) -> Conj {
        Conj(vec![a])
    }

    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Conj {
        let mut v: Vec<Atom> = atoms.into_iter().collect();
        v.sort();
        v.dedup();
        Conj(v)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.0.binary_search(a).is_ok()
    }

    pub fn is_subset(&self, other: &Conj) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for a in &self.0 {
            for b in it.by_ref() {
                match b.cmp(a) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &Conj) -> Conj {
        Conj::new(self.0.iter().chain(&other.0).cloned())
    }

    /// `σ :: τ`.
    pub fn is_of(&self, ty: &SimpleType) -> bool {
        self.0.iter().all(|a| a.is_of(ty))
    }
}

impl Ord for Conj {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Conj {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<Atom> for Conj {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Conj::new(iter)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Bot => f.write_str("q⊥"),
            Atom::Inf => f.write_str("q∞"),
            Atom::Arrow(s, r) => write!(f, "{s} -> {r}"),
        }
    }
}

impl fmt::Display for Conj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Conj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `|atoms(τ)|`, or `None` past `u128`.
pub fn atom_count(ty: &SimpleType) -> Option<u128> {
    match ty {
        SimpleType::Ground => Some(2),
        SimpleType::Arrow(a, r) => conj_count(a)?.checked_mul(atom_count(r)?)?.checked_add(1),
    }
}

/// `|conj(τ)| = 2^|atoms(τ)|`, or `None` past `u128`.
pub fn conj_count(ty: &SimpleType) -> Option<u128> {
    let n = atom_count(ty)?;
    if n >= 127 {
        None
    } else {
        Some(1u128 << n)
    }
}

fn count_string(c: Option<u128>) -> String {
    c.map(|c| c.to_string())
        .unwrap_or_else(|| "more than 2^127".into())
}

/// Cached enumerations of atoms and conjunctions per type, in canonical
/// order.
#[derive(Debug, Default, Clone)]
pub struct TypeSpace {
    atoms: HashMap<SimpleType, Arc<Vec<Atom>>>,
    conjs: HashMap<SimpleType, Arc<Vec<Conj>>>,
}

impl TypeSpace {
    pub fn new() -> Self {
        TypeSpace::default()
    }

    pub fn atoms(&mut self, ty: &SimpleType) -> Result<Arc<Vec<Atom>>, TypeSysError> {
        if let Some(v) = self.atoms.get(ty) {
            return Ok(v.clone());
        }
        let count = atom_count(ty);
        if count.is_none_or(|c| c > MAX_ATOMS) {
            return Err(TypeSysError::Intractable {
                what: "atoms",
                ty: ty.clone(),
                count: count_string(count),
            });
        }
        let mut v = match ty {
            SimpleType::Ground => vec![Atom::Bot, Atom::Inf],
            SimpleType::Arrow(a, r) => {
                let conjs = self.conjs(a)?;
                let results = self.atoms(r)?;
                let mut v = Vec::with_capacity(1 + conjs.len() * results.len());
                v.push(Atom::Inf);
                for s in conjs.iter() {
                    for t in results.iter() {
                        v.push(Atom::arrow(s.clone(), t.clone()));
                    }
                }
                v
            }
        };
        v.sort();
        let v = Arc::new(v);
        self.atoms.insert(ty.clone(), v.clone());
        Ok(v)
    }

    pub fn conjs(&mut self, ty: &SimpleType) -> Result<Arc<Vec<Conj>>, TypeSysError> {
        if let Some(v) = self.conjs.get(ty) {
            return Ok(v.clone());
        }
        let count = conj_count(ty);
        if count.is_none_or(|c| c > MAX_CONJUNCTIONS) {
            return Err(TypeSysError::Intractable {
                what: "conjunctions",
                ty: ty.clone(),
                count: count_string(count),
            });
        }
        let atoms = self.atoms(ty)?;
        let n = atoms.len();
        let mut v: Vec<Conj> = (0u64..1 << n)
            .map(|mask| {
                Conj(
                    (0..n)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| atoms[i].clone())
                        .collect(),
                )
            })
            .collect();
        v.sort();
        let v = Arc::new(v);
        self.conjs.insert(ty.clone(), v.clone());
        Ok(v)
    }

    /// All tuples in `conj(τ1) × ... × conj(τn)`, lexicographic over the
    /// components.
    pub fn tuples(&mut self, types: &[&SimpleType]) -> Result<Vec<Vec<Conj>>, TypeSysError> {
        let mut total: u128 = 1;
        for t in types {
            total = conj_count(t)
                .and_then(|c| total.checked_mul(c))
                .filter(|&c| c <= MAX_TUPLES)
                .ok_or_else(|| TypeSysError::Intractable {
                    what: "argument tuples",
                    ty: SimpleType::function(
                        types.iter().map(|t| (*t).clone()).collect::<Vec<_>>(),
                    ),
                    count: count_string(None),
                })?;
        }
        let mut out: Vec<Vec<Conj>> = vec![Vec::new()];
        for t in types {
            let cs = self.conjs(t)?;
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    cs.iter().map(move |c| {
                        let mut p = prefix.clone();
                        p.push(c.clone());
                        p
                    })
                })
                .collect();
        }
        Ok(out)
    }
}

/// Atoms of `τ` in canonical order.
pub fn enum_atoms(ty: &SimpleType) -> Result<Vec<Atom>, TypeSysError> {
    TypeSpace::new().atoms(ty).map(|v| v.as_ref().clone())
}

/// Conjunctions of `τ` in canonical order.
pub fn enum_conj(ty: &SimpleType) -> Result<Vec<Conj>, TypeSysError> {
    TypeSpace::new().conjs(ty).map(|v| v.as_ref().clone())
}

/// A partial map from non-terminals and variables to conjunctions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment(BTreeMap<Arc<str>, Conj>);

impl Environment {
    pub fn new() -> Self {
        Environment::default()
    }

    pub fn get(&self, name: &str) -> Option<&Conj> {
        self.0.get(name)
    }

    /// `Θ, α ▷ σ`: conjoins with any existing entry.
    pub fn extend(&mut self, name: &Arc<str>, s: &Conj) {
        let merged = match self.0.get(name) {
            Some(old) => old.union(s),
            None => s.clone(),
        };
        self.0.insert(name.clone(), merged);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Conj)> {
        self.0.iter().map(|(k, v)| (k.as_ref(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self(α) ⊆ other(α)` for every `α`.
    pub fn is_below(&self, other: &Environment) -> bool {
        self.0
            .iter()
            .all(|(k, v)| other.0.get(k).is_some_and(|w| v.is_subset(w)))
    }

    /// Total number of atoms over all entries.
    pub fn total_atoms(&self) -> usize {
        self.0.values().map(Conj::len).sum()
    }
}

/// Environment lookup with a parameter overlay: `Θ, x1 ▷ σ1, ..., xk ▷ σk`.
#[derive(Clone, Copy)]
struct Scope<'a> {
    base: &'a Environment,
    overlay: Option<&'a Environment>,
}

impl<'a> Scope<'a> {
    fn lookup(&self, name: &str) -> Option<Conj> {
        match (self.base.get(name), self.overlay.and_then(|o| o.get(name))) {
            (Some(a), Some(b)) => Some(a.union(b)),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        }
    }
}

/// Every atom a terminal `a` matches: `σ1 -> ... -> σi -> q∞` with
/// `1 ≤ i ≤ arity(a)` and `q∞` in some `σj`.
pub fn terminal_semantics(a: &Symbol, space: &mut TypeSpace) -> Result<Conj, TypeSysError> {
    let args = a.ty().arguments();
    let mut out = Vec::new();
    for i in 1..=args.len() {
        for tuple in space.tuples(&args[..i])? {
            if tuple.iter().any(|s| s.contains(&Atom::Inf)) {
                out.push(Atom::chain(&tuple, Atom::Inf));
            }
        }
    }
    Ok(Conj::new(out))
}

/// `⟦t1⟧ ⟦t2⟧` for `t1 : fun_ty`.
pub fn sem_apply(fun_ty: &SimpleType, f: &Conj, a: &Conj) -> Conj {
    let mut out = Vec::new();
    for atom in f.atoms() {
        match atom {
            Atom::Arrow(s, r) if s.is_subset(a) => out.push(r.as_ref().clone()),
            Atom::Inf => out.push(Atom::Inf),
            _ => {}
        }
    }
    if matches!(fun_ty.after(1), Some(SimpleType::Arrow(..))) {
        out.push(Atom::inf_to_inf());
    }
    Conj::new(out)
}

/// Semantics of a symbol occurrence under `scope`.
fn symbol_semantics(
    g: &Scheme,
    scope: Scope<'_>,
    s: &Symbol,
    space: &mut TypeSpace,
    terminals: &mut HashMap<Arc<str>, Conj>,
) -> Result<Conj, TypeSysError> {
    let mut c = match s.kind() {
        SymbolKind::Terminal => {
            if let Some(c) = terminals.get(s.name()) {
                return Ok(c.clone());
            }
            let c = terminal_semantics(s, space)?;
            terminals.insert(s.name_arc().clone(), c.clone());
            return Ok(c);
        }
        SymbolKind::NonTerminal => {
            if g.is_inert(s.name()) {
                return Err(TypeSysError::Inert(s.name().to_string()));
            }
            scope
                .lookup(s.name())
                .ok_or_else(|| TypeSysError::Unknown(s.name().to_string()))?
        }
        SymbolKind::Variable => scope
            .lookup(s.name())
            .ok_or_else(|| TypeSysError::Unbound(s.name().to_string()))?,
    };
    if !s.ty().is_ground() && !c.contains(&Atom::inf_to_inf()) {
        c = c.union(&Conj::single(Atom::inf_to_inf()));
    }
    Ok(c)
}

fn compose(
    g: &Scheme,
    scope: Scope<'_>,
    t: &Term,
    space: &mut TypeSpace,
    terminals: &mut HashMap<Arc<str>, Conj>,
) -> Result<Conj, TypeSysError> {
    let mut acc = symbol_semantics(g, scope, t.head(), space, terminals)?;
    let mut ty = t.head().ty().clone();
    for a in t.args() {
        let sa = compose(g, scope, a, space, terminals)?;
        acc = sem_apply(&ty, &acc, &sa);
        ty = ty.after(1).expect("well-typed application").clone();
    }
    Ok(acc)
}

/// `Θ0`: every atom of its type for every non-terminal with a rule.
pub fn top_environment(g: &Scheme, space: &mut TypeSpace) -> Result<Environment, TypeSysError> {
    let mut env = Environment::new();
    for n in g.nonterminals() {
        if g.is_inert(n.name()) {
            return Err(TypeSysError::Inert(n.name().to_string()));
        }
        let atoms = space.atoms(n.ty())?;
        env.0
            .insert(n.name_arc().clone(), Conj(atoms.as_ref().clone()));
    }
    Ok(env)
}

/// One application of `𝓕`.
pub fn step_f(
    g: &Scheme,
    theta: &Environment,
    space: &mut TypeSpace,
) -> Result<Environment, TypeSysError> {
    let mut next = Environment::new();
    let mut terminals = HashMap::new();
    for n in g.nonterminals() {
        let rule = g
            .rule(n.name())
            .ok_or_else(|| TypeSysError::Inert(n.name().to_string()))?;
        let types = n.ty().arguments();
        let k = types.len();
        let mut out = Vec::new();
        // Full chains: the body under x⃗ ▷ σ⃗ (clause i), or anything ending
        // in q⊥ once an argument is q∞ (clause iii).
        for tuple in space.tuples(&types)? {
            let mut overlay = Environment::new();
            for (p, s) in rule.params().iter().zip(&tuple) {
                overlay.extend(p.name_arc(), s);
            }
            let scope = Scope {
                base: theta,
                overlay: Some(&overlay),
            };
            let body = compose(g, scope, rule.body(), space, &mut terminals)?;
            for q in [Atom::Bot, Atom::Inf] {
                if body.contains(&q) {
                    out.push(Atom::chain(&tuple, q));
                }
            }
            if tuple.iter().any(|s| s.contains(&Atom::Inf)) {
                out.push(Atom::chain(&tuple, Atom::Bot));
            }
        }
        // Clause ii: chains of any length 1..k ending in q∞.
        for i in 1..=k {
            for tuple in space.tuples(&types[..i])? {
                if tuple.iter().any(|s| s.contains(&Atom::Inf)) {
                    out.push(Atom::chain(&tuple, Atom::Inf));
                }
            }
        }
        next.0.insert(n.name_arc().clone(), Conj::new(out));
    }
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct ThetaStar {
    pub env: Environment,
    /// Applications of `𝓕`, the final confirming one included.
    pub iterations: usize,
}

/// The greatest fixpoint of `𝓕`, reached by descending from `Θ0`.
pub fn theta_star(g: &Scheme, space: &mut TypeSpace) -> Result<ThetaStar, TypeSysError> {
    let mut env = top_environment(g, space)?;
    let mut iterations = 0;
    loop {
        let next = step_f(g, &env, space)?;
        iterations += 1;
        if next == env {
            return Ok(ThetaStar { env, iterations });
        }
        env = next;
    }
}

/// Compositional term semantics under `Θ⋆`, memoized per variable
/// environment. Not shareable across threads; create one per session.
pub struct Semantics<'g> {
    g: &'g Scheme,
    theta: ThetaStar,
    space: TypeSpace,
    terminals: HashMap<Arc<str>, Conj>,
    memo: HashMap<MemoKey, Conj>,
}

/// A term with the interpretation of its free variables.
type MemoKey = (Term, Vec<(Arc<str>, Conj)>);

impl<'g> Semantics<'g> {
    pub fn new(g: &'g Scheme) -> Result<Self, TypeSysError> {
        let mut space = TypeSpace::new();
        let theta = theta_star(g, &mut space)?;
        Ok(Semantics {
            g,
            theta,
            space,
            terminals: HashMap::new(),
            memo: HashMap::new(),
        })
    }

    pub fn scheme(&self) -> &'g Scheme {
        self.g
    }

    pub fn theta_star(&self) -> &ThetaStar {
        &self.theta
    }

    pub fn space(&mut self) -> &mut TypeSpace {
        &mut self.space
    }

    /// `⟦t⟧` for a term over terminals and non-terminals.
    pub fn of(&mut self, t: &Term) -> Result<Conj, TypeSysError> {
        self.of_in(t, &Environment::new())
    }

    /// `⟦t⟧_{venv}`.
    pub fn of_in(&mut self, t: &Term, venv: &Environment) -> Result<Conj, TypeSysError> {
        let key_env: Vec<(Arc<str>, Conj)> = t
            .free_variables()
            .iter()
            .map(|v| {
                venv.get(v.name())
                    .map(|c| (v.name_arc().clone(), c.clone()))
                    .ok_or_else(|| TypeSysError::Unbound(v.name().to_string()))
            })
            .collect::<Result<_, _>>()?;
        let key = (t.clone(), key_env);
        if let Some(c) = self.memo.get(&key) {
            return Ok(c.clone());
        }
        let scope = Scope {
            base: &self.theta.env,
            overlay: Some(venv),
        };
        let c = compose(self.g, scope, t, &mut self.space, &mut self.terminals)?;
        self.memo.insert(key, c.clone());
        Ok(c)
    }

    /// `⟦F⟧` applied to `σ1 ... σn`.
    pub fn apply_symbol(&mut self, f: &Symbol, args: &[Conj]) -> Result<Conj, TypeSysError> {
        let mut acc = self.of(&Term::symbol(f.clone()))?;
        let mut ty = f.ty().clone();
        for a in args {
            acc = sem_apply(&ty, &acc, a);
            ty = ty.after(1).expect("argument count within arity").clone();
        }
        Ok(acc)
    }
}

/// Goal-directed search for `Θ ⊢ t ▷ θ`.
pub struct Judge<'a> {
    g: &'a Scheme,
    env: &'a Environment,
    space: &'a mut TypeSpace,
    memo: HashMap<(Term, Atom), bool>,
}

impl<'a> Judge<'a> {
    pub fn new(g: &'a Scheme, env: &'a Environment, space: &'a mut TypeSpace) -> Self {
        Judge {
            g,
            env,
            space,
            memo: HashMap::new(),
        }
    }

    pub fn atom(&mut self, t: &Term, theta: &Atom) -> Result<bool, TypeSysError> {
        if !theta.is_of(t.ty()) {
            return Ok(false);
        }
        let key = (t.clone(), theta.clone());
        if let Some(&b) = self.memo.get(&key) {
            return Ok(b);
        }
        let b = self.search(t, theta)?;
        self.memo.insert(key, b);
        Ok(b)
    }

    /// Rule (Set).
    pub fn conj(&mut self, t: &Term, s: &Conj) -> Result<bool, TypeSysError> {
        for a in s.atoms() {
            if !self.atom(t, a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn search(&mut self, t: &Term, theta: &Atom) -> Result<bool, TypeSysError> {
        // (q∞ -> q∞ I)
        if !t.ty().is_ground() && *theta == Atom::inf_to_inf() {
            return Ok(true);
        }
        if t.args().is_empty() {
            let s = t.head();
            return match s.kind() {
                // (Σ)
                SymbolKind::Terminal => {
                    let (args, result) = theta.uncurry();
                    Ok(*result == Atom::Inf
                        && !args.is_empty()
                        && args.len() <= s.ty().arity()
                        && args.iter().any(|c| c.contains(&Atom::Inf)))
                }
                // (At)
                _ => {
                    if s.is_nonterminal() && self.g.is_inert(s.name()) {
                        return Err(TypeSysError::Inert(s.name().to_string()));
                    }
                    let c = self
                        .env
                        .get(s.name())
                        .ok_or_else(|| TypeSysError::Unbound(s.name().to_string()))?;
                    Ok(c.contains(theta))
                }
            };
        }
        let n = t.args().len();
        let t1 = t.prefix(1);
        let t2 = &t.args()[n - 1];
        // (q∞ I)
        if *theta == Atom::Inf && self.atom(&t1, &Atom::Inf)? {
            return Ok(true);
        }
        // (App): some σ with t1 ▷ σ -> θ and t2 ▷ σ.
        let arg_ty = t2.ty().clone();
        let mut matched = Vec::new();
        for a in self.space.atoms(&arg_ty)?.iter() {
            if self.atom(t2, a)? {
                matched.push(a.clone());
            }
        }
        let matched = Conj::new(matched);
        for s in self.space.conjs(&arg_ty)?.iter() {
            if s.is_subset(&matched) && self.atom(&t1, &Atom::arrow(s.clone(), theta.clone()))? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// `Θ ⊢ t ▷ θ`.
pub fn judge(
    g: &Scheme,
    env: &Environment,
    t: &Term,
    theta: &Atom,
    space: &mut TypeSpace,
) -> Result<bool, TypeSysError> {
    Judge::new(g, env, space).atom(t, theta)
}

/// Checks that `env` is a witness environment for `g`: defined on every
/// non-terminal with well-typed entries, and every atom it lets a
/// non-terminal match is justified by its rule. Returns one message per
/// violation.
pub fn witness_violations(
    g: &Scheme,
    env: &Environment,
    space: &mut TypeSpace,
) -> Result<Vec<String>, TypeSysError> {
    let mut out = Vec::new();
    let names: BTreeSet<&str> = g.nonterminals().iter().map(|n| n.name()).collect();
    for (k, _) in env.iter() {
        if !names.contains(k) {
            out.push(format!("{k} is not a non-terminal"));
        }
    }
    for n in g.nonterminals() {
        let Some(c) = env.get(n.name()) else {
            out.push(format!("{} missing from the environment", n.name()));
            continue;
        };
        if !c.is_of(n.ty()) {
            out.push(format!("{} has an ill-typed entry {c}", n.name()));
        }
        let rule = g
            .rule(n.name())
            .ok_or_else(|| TypeSysError::Inert(n.name().to_string()))?;
        let k = rule.params().len();
        let mut matched: Vec<Atom> = c.atoms().to_vec();
        if !n.ty().is_ground() {
            matched.push(Atom::inf_to_inf());
        }
        for theta in matched {
            let (args, q) = theta.uncurry();
            if args.iter().any(|s| s.contains(&Atom::Inf)) {
                continue;
            }
            let ok = args.len() == k && {
                let mut local = env.clone();
                for (p, s) in rule.params().iter().zip(&args) {
                    local.extend(p.name_arc(), s);
                }
                judge(g, &local, rule.body(), q, space)?
            };
            if !ok {
                out.push(format!(
                    "{} :: {theta} is not justified by its rule",
                    n.name()
                ));
            }
        }
    }
    Ok(out)
}

/// One line per non-terminal, in declaration order: `F :: { θ1, θ2 }`.
pub fn render_environment(g: &Scheme, env: &Environment) -> String {
    let mut out = String::new();
    for n in g.nonterminals() {
        if let Some(c) = env.get(n.name()) {
            let atoms: Vec<String> = c.atoms().iter().map(|a| a.to_string()).collect();
            if atoms.is_empty() {
                out.push_str(&format!("{} :: {{ }}\n", n.name()));
            } else {
                out.push_str(&format!("{} :: {{ {} }}\n", n.name(), atoms.join(", ")));
            }
        }
    }
    out
}
