//! The extra-argument transformation `G ↦ Ḡ`: every non-terminal takes one
//! more ground argument, and only the outermost application ever receives
//! the token `Δ` that makes it a redex. Every derivation of `Ḡ` is then both
//! OI and IO, and its IO value tree equals the value tree of `G`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::scheme::{fresh_name, Rule, Scheme};
use crate::term::{Symbol, Term};
use crate::types::SimpleType;

/// Suffix marking barred symbols.
pub const BAR_SUFFIX: &str = "~";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BarError {
    #[error("symbol {0} has no barred counterpart")]
    Unmapped(String),
}

/// `ō = o -> o` and the bar distributes over arrows.
pub fn bar_type(t: &SimpleType) -> SimpleType {
    match t {
        SimpleType::Ground => SimpleType::arrow(SimpleType::ground(), SimpleType::ground()),
        SimpleType::Arrow(a, r) => SimpleType::arrow(bar_type(a), bar_type(r)),
    }
}

/// Names and types of every symbol of `Ḡ`.
#[derive(Debug, Clone)]
pub struct BarContext {
    symbol_map: HashMap<Arc<str>, Symbol>,
    etas: Vec<Symbol>,
    delta_var: Symbol,
    delta: Symbol,
    start: Symbol,
}

impl BarContext {
    pub fn new(g: &Scheme) -> Self {
        let mut taken: HashSet<Arc<str>> = g.names();
        let mut fresh = |base: &str| {
            let name = fresh_name(base, &taken);
            taken.insert(Arc::from(name.as_str()));
            name
        };
        let mut symbol_map = HashMap::new();
        for v in g.variables() {
            let name = fresh(&format!("{}{BAR_SUFFIX}", v.name()));
            symbol_map.insert(
                v.name_arc().clone(),
                Symbol::variable(name, bar_type(v.ty())),
            );
        }
        for s in g.terminals().iter().chain(g.nonterminals()) {
            let name = fresh(&format!("{}{BAR_SUFFIX}", s.name()));
            symbol_map.insert(
                s.name_arc().clone(),
                Symbol::nonterminal(name, bar_type(s.ty())),
            );
        }
        let ar_max = g
            .terminals()
            .iter()
            .map(|a| a.ty().arity())
            .max()
            .unwrap_or(0);
        let oo = bar_type(&SimpleType::ground());
        let etas = (1..=ar_max)
            .map(|i| Symbol::variable(fresh(&format!("eta{i}")), oo.clone()))
            .collect();
        let delta_var = Symbol::variable(fresh("delta"), SimpleType::ground());
        let delta = Symbol::nonterminal(fresh("Delta"), SimpleType::ground());
        let start = Symbol::nonterminal(fresh("I"), SimpleType::ground());
        BarContext {
            symbol_map,
            etas,
            delta_var,
            delta,
            start,
        }
    }

    /// The barred counterpart of a variable, terminal or non-terminal.
    pub fn image(&self, name: &str) -> Option<&Symbol> {
        self.symbol_map.get(name)
    }

    pub fn etas(&self) -> &[Symbol] {
        &self.etas
    }

    /// The ground variable `δ`.
    pub fn delta_var(&self) -> &Symbol {
        &self.delta_var
    }

    /// The rule-less token `Δ`.
    pub fn delta(&self) -> &Symbol {
        &self.delta
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }
}

/// The homomorphic image `t̄`.
pub fn bar_term(ctx: &BarContext, t: &Term) -> Result<Term, BarError> {
    let head = ctx
        .image(t.head().name())
        .ok_or_else(|| BarError::Unmapped(t.head().name().to_string()))?
        .clone();
    let args = t
        .args()
        .iter()
        .map(|a| bar_term(ctx, a))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Term::apply(head, args).expect("the bar transformation preserves typing"))
}

fn app(head: &Symbol, args: Vec<Term>) -> Term {
    Term::apply(head.clone(), args).expect("well-typed by construction")
}

/// `Ḡ`, together with the context naming its symbols.
pub fn bar_scheme_with_context(g: &Scheme) -> Result<(Scheme, BarContext), BarError> {
    let ctx = BarContext::new(g);
    let delta = Term::symbol(ctx.delta.clone());
    let image = |s: &Symbol| {
        ctx.image(s.name())
            .cloned()
            .ok_or_else(|| BarError::Unmapped(s.name().to_string()))
    };

    let mut variables: Vec<Symbol> = g.variables().iter().map(image).collect::<Result<_, _>>()?;
    variables.extend(ctx.etas.iter().cloned());
    variables.push(ctx.delta_var.clone());

    let mut nonterminals = Vec::new();
    let mut inert = BTreeSet::new();
    let mut rules = Vec::new();

    for a in g.terminals() {
        let abar = image(a)?;
        let k = a.ty().arity();
        let mut params: Vec<Symbol> = ctx.etas[..k].to_vec();
        params.push(ctx.delta_var.clone());
        let body = app(
            a,
            ctx.etas[..k]
                .iter()
                .map(|eta| app(eta, vec![delta.clone()]))
                .collect(),
        );
        rules.push(Rule::new(abar.clone(), params, body));
        nonterminals.push(abar);
    }
    for f in g.nonterminals() {
        let fbar = image(f)?;
        if g.is_inert(f.name()) {
            inert.insert(fbar.name_arc().clone());
        }
        nonterminals.push(fbar);
    }
    for r in g.rules() {
        let fbar = image(r.nonterminal())?;
        let mut params: Vec<Symbol> = r.params().iter().map(image).collect::<Result<_, _>>()?;
        params.push(ctx.delta_var.clone());
        let body = bar_term(&ctx, r.body())?
            .app(delta.clone())
            .expect("a barred ground body takes one more ground argument");
        rules.push(Rule::new(fbar, params, body));
    }
    let start_bar = ctx
        .image(g.start_name())
        .ok_or_else(|| BarError::Unmapped(g.start_name().to_string()))?;
    rules.push(Rule::new(
        ctx.start.clone(),
        Vec::new(),
        app(start_bar, vec![delta.clone()]),
    ));
    nonterminals.push(ctx.delta.clone());
    inert.insert(ctx.delta.name_arc().clone());
    nonterminals.push(ctx.start.clone());

    let scheme = Scheme::from_parts(
        variables,
        g.terminals().to_vec(),
        nonterminals,
        inert,
        rules,
        ctx.start.name_arc().clone(),
    );
    Ok((scheme, ctx))
}

/// `Ḡ`, whose IO value tree is the value tree of `g`.
pub fn bar_scheme(g: &Scheme) -> Result<Scheme, BarError> {
    bar_scheme_with_context(g).map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{derive, value_tree, EvalBudget, Policy};
    use crate::scheme::{parse, render};

    const SEC3: &str = include_str!("../../../schemes/sec3.hors");

    fn o() -> SimpleType {
        SimpleType::ground()
    }

    #[test]
    fn barred_types() {
        let oo = SimpleType::arrow(o(), o());
        assert_eq!(bar_type(&o()), oo);
        let t = SimpleType::function([o(), o()]);
        assert_eq!(
            bar_type(&t),
            SimpleType::function([oo.clone(), oo.clone(), o()])
        );
        let t = SimpleType::function([oo.clone(), o()]);
        let expected =
            SimpleType::function([SimpleType::arrow(oo.clone(), oo.clone()), oo.clone(), o()]);
        assert_eq!(bar_type(&t), expected);
        assert_eq!(bar_type(&t).order(), 3);
    }

    #[test]
    fn running_example_rules() {
        let g = parse(SEC3).unwrap();
        let gb = bar_scheme(&g).unwrap();
        assert!(gb.validate().is_ok(), "{:?}", gb.validate());
        assert_eq!(gb.order(), 2);
        let rules: Vec<String> = gb.rules().iter().map(|r| r.to_string()).collect();
        for expected in [
            "I -> S~ Delta",
            "S~ delta -> F~ (H~ a~) c~ Delta",
            "F~ x~ y~ delta -> y~ Delta",
            "H~ x~ delta -> H~ (H~ x~) Delta",
            "c~ delta -> c",
            "a~ delta -> a",
        ] {
            assert!(
                rules.contains(&expected.to_string()),
                "missing {expected} in {rules:?}"
            );
        }
        assert_eq!(rules.len(), 6);
        assert!(gb.is_inert("Delta"));
        assert_eq!(parse(&render(&gb)).unwrap(), gb);
    }

    #[test]
    fn running_example_derivation() {
        let g = parse(SEC3).unwrap();
        let gb = bar_scheme(&g).unwrap();
        let b = EvalBudget::new(100, 10_000, 3);
        for p in [Policy::Oi, Policy::Io, Policy::Unrestricted] {
            let tr = derive(&gb, &gb.start_term(), p, &b, None).unwrap();
            let shown: Vec<String> = tr.terms().map(|t| t.to_string()).collect();
            assert_eq!(
                shown,
                ["I", "S~ Delta", "F~ (H~ a~) c~ Delta", "c~ Delta", "c"]
            );
            assert!(tr.steps.iter().all(|s| s.redex.is_oi && s.redex.is_io));
        }
        assert_eq!(value_tree(&gb, Policy::Io, &b).to_string(), "c");
    }

    #[test]
    fn bar_term_examples() {
        let g = parse(SEC3).unwrap();
        let ctx = BarContext::new(&g);
        let body = g.rule("S").unwrap().body();
        assert_eq!(bar_term(&ctx, body).unwrap().to_string(), "F~ (H~ a~) c~");
        assert_eq!(
            bar_term(&ctx, &body.args()[0]).unwrap().to_string(),
            "H~ a~"
        );
        let x = g.symbol("x").unwrap().clone();
        assert_eq!(bar_term(&ctx, &Term::symbol(x)).unwrap().to_string(), "x~");
        let stray = Term::symbol(Symbol::terminal("zz", o()));
        assert_eq!(bar_term(&ctx, &stray), Err(BarError::Unmapped("zz".into())));
    }

    #[test]
    fn binary_terminal_rule_and_name_clashes() {
        let g = parse(
            "terminal b : o -> o -> o\nterminal c : o\nnonterminal S : o\nnonterminal Delta : o\nvar delta : o\nstart S\nrule S = b c Delta\nrule Delta = c\n",
        )
        .unwrap();
        let gb = bar_scheme(&g).unwrap();
        assert!(gb.validate().is_ok(), "{:?}", gb.validate());
        assert!(gb.is_inert("Delta'"));
        let r = gb.rule("b~").unwrap();
        assert_eq!(
            r.to_string(),
            "b~ eta1 eta2 delta' -> b (eta1 Delta') (eta2 Delta')"
        );
    }
}
