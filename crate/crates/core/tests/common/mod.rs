//! Shared corpus: the hand-written example schemes and a seeded generator of
//! random order ≤ 2 schemes whose argument types are `o` and `o -> o`.

#![allow(dead_code)]

use hors::{parse, Rule, Scheme, SchemeBuilder, SimpleType, Symbol, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEC2: &str = include_str!("../../../../schemes/sec2.hors");
pub const SEC3: &str = include_str!("../../../../schemes/sec3.hors");
pub const MINI: &str = include_str!("../../../../schemes/mini.hors");

pub fn o() -> SimpleType {
    SimpleType::ground()
}

pub fn oo() -> SimpleType {
    SimpleType::arrow(o(), o())
}

/// Non-terminal types of generated schemes.
fn nonterminal_types() -> Vec<SimpleType> {
    vec![
        o(),
        oo(),
        SimpleType::function([o(), o()]),
        SimpleType::function([oo()]),
        SimpleType::function([oo(), o()]),
    ]
}

pub fn terminals() -> Vec<Symbol> {
    vec![
        Symbol::terminal("a", SimpleType::function([o(), o()])),
        Symbol::terminal("b", oo()),
        Symbol::terminal("c", o()),
    ]
}

/// Parameter `i` of a rule is `x<i>` at type `o` and `f<i>` at `o -> o`.
fn param(i: usize, ty: &SimpleType) -> Symbol {
    let base = if ty.is_ground() { "x" } else { "f" };
    Symbol::variable(format!("{base}{}", i + 1), ty.clone())
}

pub struct TermGen<'a> {
    pub rng: ChaCha8Rng,
    heads: Vec<&'a Symbol>,
}

impl<'a> TermGen<'a> {
    pub fn new(seed: u64, heads: Vec<&'a Symbol>) -> Self {
        TermGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            heads,
        }
    }

    /// A random term of type `ty` with at most `depth` nested applications.
    /// Every type requested has a nullary candidate among the heads.
    pub fn term(&mut self, ty: &SimpleType, depth: usize) -> Term {
        let mut options: Vec<(&Symbol, usize)> = Vec::new();
        for h in &self.heads {
            for m in 0..=h.ty().arity() {
                if h.ty().after(m) == Some(ty) && (m == 0 || depth > 0) {
                    options.push((h, m));
                }
            }
        }
        let with_args: Vec<_> = options.iter().copied().filter(|(_, m)| *m > 0).collect();
        let &(head, m) = if !with_args.is_empty() && self.rng.gen_bool(0.6) {
            with_args.choose(&mut self.rng).unwrap()
        } else {
            options.choose(&mut self.rng).expect("a nullary candidate")
        };
        let arg_types: Vec<SimpleType> = head.ty().arguments()[..m]
            .iter()
            .map(|t| (*t).clone())
            .collect();
        let args = arg_types.iter().map(|t| self.term(t, depth - 1)).collect();
        Term::apply(head.clone(), args).expect("well-typed by construction")
    }
}

/// A random valid scheme: start `S : o`, up to five non-terminals.
pub fn random_scheme(seed: u64) -> Scheme {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let menu = nonterminal_types();
    let n = rng.gen_range(1..=5);
    let mut nonterminals = vec![Symbol::nonterminal("S", o())];
    for i in 1..n {
        let ty = menu.choose(&mut rng).unwrap().clone();
        nonterminals.push(Symbol::nonterminal(format!("N{i}"), ty));
    }
    let terminals = terminals();
    let mut b = SchemeBuilder::new();
    for t in &terminals {
        b.terminal(t.clone());
    }
    let mut vars: Vec<Symbol> = Vec::new();
    for nt in &nonterminals {
        b.nonterminal(nt.clone());
        let params: Vec<Symbol> = nt
            .ty()
            .arguments()
            .iter()
            .enumerate()
            .map(|(i, t)| param(i, t))
            .collect();
        for p in &params {
            if !vars.contains(p) {
                vars.push(p.clone());
            }
        }
        let heads: Vec<&Symbol> = terminals
            .iter()
            .chain(&nonterminals)
            .chain(&params)
            .collect();
        let mut g = TermGen::new(rng.gen(), heads);
        let depth = rng.gen_range(1..=3);
        let body = g.term(&o(), depth);
        b.rule(Rule::new(nt.clone(), params, body));
    }
    for v in vars {
        b.variable(v);
    }
    b.start("S");
    let g = b.build();
    g.validate().expect("generated scheme is valid");
    g
}

/// A random closed term of type `ty` over the symbols of `g`.
pub fn random_closed_term(g: &Scheme, seed: u64, ty: &SimpleType, depth: usize) -> Term {
    let heads: Vec<&Symbol> = g
        .terminals()
        .iter()
        .chain(g.nonterminals().iter().filter(|n| !g.is_inert(n.name())))
        .collect();
    TermGen::new(seed, heads).term(ty, depth)
}

pub fn worked_examples() -> Vec<(&'static str, Scheme)> {
    vec![
        ("sec2", parse(SEC2).unwrap()),
        ("sec3", parse(SEC3).unwrap()),
        ("mini", parse(MINI).unwrap()),
    ]
}

/// The three examples followed by `random` generated schemes.
pub fn corpus(random: usize) -> Vec<(String, Scheme)> {
    let mut out: Vec<(String, Scheme)> = worked_examples()
        .into_iter()
        .map(|(n, g)| (n.to_string(), g))
        .collect();
    for seed in 0..random as u64 {
        out.push((format!("random-{seed}"), random_scheme(seed)));
    }
    out
}
