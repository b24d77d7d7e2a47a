//! One-step rewriting, OI/IO redex classification, budgeted derivations and
//! depth-truncated value trees.
//!
//! In a ground term over terminals and non-terminals every outermost redex
//! has only terminal ancestors, so the outermost redexes are exactly the
//! non-terminal frontier of the `⊥`-transform. The fair schedulers below
//! rewrite whole rounds of pairwise disjoint redexes; within a round the
//! positions and OI/IO flags of the remaining redexes stay valid.

mod innermost;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scheme::Scheme;
use crate::term::{Position, Symbol, Term};
use crate::tree::{bottom_transform_to_depth, PartialTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    Unrestricted,
    Oi,
    Io,
}

impl Policy {
    /// Whether a redex with these flags may be contracted under the policy.
    pub fn admits(self, r: &RedexInfo) -> bool {
        match self {
            Policy::Unrestricted => true,
            Policy::Oi => r.is_oi,
            Policy::Io => r.is_io,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Unrestricted => "any",
            Policy::Oi => "oi",
            Policy::Io => "io",
        })
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" | "unrestricted" => Ok(Policy::Unrestricted),
            "oi" => Ok(Policy::Oi),
            "io" => Ok(Policy::Io),
            other => Err(format!("unknown policy {other:?} (expected oi, io or any)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalBudget {
    pub max_steps: usize,
    pub max_term_size: usize,
    /// Output truncation depth; the root has depth 0.
    pub depth: usize,
}

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget {
            max_steps: 10_000,
            max_term_size: 100_000,
            depth: 5,
        }
    }
}

impl EvalBudget {
    pub fn new(max_steps: usize, max_term_size: usize, depth: usize) -> Self {
        EvalBudget {
            max_steps,
            max_term_size,
            depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedexInfo {
    pub position: Position,
    pub nonterminal: Symbol,
    pub is_oi: bool,
    pub is_io: bool,
}

#[derive(Debug, Clone)]
pub struct Step {
    pub before: Term,
    pub redex: RedexInfo,
    pub after: Term,
}

#[derive(Debug, Clone)]
pub struct DerivationTrace {
    pub start: Term,
    pub steps: Vec<Step>,
    pub exhausted_budget: bool,
}

impl DerivationTrace {
    pub fn final_term(&self) -> &Term {
        self.steps.last().map(|s| &s.after).unwrap_or(&self.start)
    }

    /// `t0, t1, ...`: the start term followed by every step's result.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.after))
    }

    /// One line per step: `<index> <position> <nonterminal> OI=<0|1> IO=<0|1>`,
    /// indices starting at 1.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{} {} {} OI={} IO={}\n",
                i + 1,
                s.redex.position,
                s.redex.nonterminal.name(),
                s.redex.is_oi as u8,
                s.redex.is_io as u8
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("no redex at position {0}")]
    NotARedex(Position),
    #[error("redex at {position} may not be contracted under policy {policy}")]
    PolicyViolation { position: Position, policy: Policy },
    #[error("start term {0} must be ground and closed over the scheme's symbols")]
    BadStart(String),
}

/// Chooses the next redex to contract, or `None` to stop the derivation.
pub trait Chooser {
    fn choose(&mut self, term: &Term, redexes: &[RedexInfo]) -> Option<Position>;
}

impl<F> Chooser for F
where
    F: FnMut(&Term, &[RedexInfo]) -> Option<Position>,
{
    fn choose(&mut self, term: &Term, redexes: &[RedexInfo]) -> Option<Position> {
        self(term, redexes)
    }
}

/// A full ground application of a non-terminal that has a rule.
pub fn is_redex(g: &Scheme, t: &Term) -> bool {
    t.head().is_nonterminal() && t.ty().is_ground() && g.rule(t.head().name()).is_some()
}

/// All redexes of `t` in preorder (arguments left to right).
pub fn redexes(g: &Scheme, t: &Term) -> Vec<RedexInfo> {
    let mut out = Vec::new();
    walk(g, t, &mut Vec::new(), false, &mut out);
    out
}

fn walk(
    g: &Scheme,
    t: &Term,
    path: &mut Vec<usize>,
    above: bool,
    out: &mut Vec<RedexInfo>,
) -> bool {
    let here = is_redex(g, t);
    let slot = if here {
        out.push(RedexInfo {
            position: Position::new(path.clone()),
            nonterminal: t.head().clone(),
            is_oi: !above,
            is_io: false,
        });
        Some(out.len() - 1)
    } else {
        None
    };
    let mut inside = false;
    for (i, a) in t.args().iter().enumerate() {
        path.push(i + 1);
        inside |= walk(g, a, path, above || here, out);
        path.pop();
    }
    if let Some(k) = slot {
        out[k].is_io = !inside;
    }
    here || inside
}

/// Contracts the redex at `p`.
pub fn step(g: &Scheme, t: &Term, p: &Position) -> Result<Term, EngineError> {
    let sub = t
        .subterm_at(p)
        .map_err(|_| EngineError::NotARedex(p.clone()))?;
    if !is_redex(g, sub) {
        return Err(EngineError::NotARedex(p.clone()));
    }
    let rule = g.rule(sub.head().name()).expect("checked by is_redex");
    let contractum = rule.instantiate(sub.args());
    t.replace_at(p, contractum)
        .map_err(|_| EngineError::NotARedex(p.clone()))
}

fn check_start(g: &Scheme, t: &Term) -> Result<(), EngineError> {
    let mut ok = t.ty().is_ground();
    t.for_each_symbol(&mut |s| {
        if s.is_variable() || g.symbol(s.name()) != Some(s) {
            ok = false;
        }
    });
    if ok {
        Ok(())
    } else {
        Err(EngineError::BadStart(t.to_string()))
    }
}

/// The redexes a fair round contracts. `depth` restricts the round to what
/// can still influence the prefix of that depth.
fn fair_round(g: &Scheme, t: &Term, policy: Policy, depth: usize) -> Vec<RedexInfo> {
    let mut frontier = Vec::new();
    collect_frontier(g, t, &mut Vec::new(), depth, &mut frontier);
    match policy {
        Policy::Unrestricted | Policy::Oi => frontier
            .into_iter()
            .map(|(pos, sub)| {
                let is_io = !sub.args().iter().any(|a| contains_redex(g, a));
                RedexInfo {
                    position: pos,
                    nonterminal: sub.head().clone(),
                    is_oi: true,
                    is_io,
                }
            })
            .collect(),
        Policy::Io => {
            let mut out = Vec::new();
            for (pos, sub) in frontier {
                let start = out.len();
                innermost(g, sub, &mut pos.path().to_vec(), &mut out);
                for r in &mut out[start..] {
                    r.is_oi = r.position == pos;
                }
            }
            out
        }
    }
}

/// Outermost redexes with position length below `depth`. Their ancestors are
/// all terminal-headed.
fn collect_frontier<'t>(
    g: &Scheme,
    t: &'t Term,
    path: &mut Vec<usize>,
    depth: usize,
    out: &mut Vec<(Position, &'t Term)>,
) {
    if path.len() >= depth {
        return;
    }
    if is_redex(g, t) {
        out.push((Position::new(path.clone()), t));
        return;
    }
    if !t.head().is_terminal() {
        // A stuck non-terminal (inert, or a rule-less head): its arguments
        // never surface in the tree, but they may still hold redexes.
        let mut inner = Vec::new();
        walk(g, t, path, false, &mut inner);
        for r in inner.into_iter().filter(|r| r.is_oi) {
            let sub = t
                .subterm_at(&Position::new(r.position.path()[path.len()..].to_vec()))
                .expect("position produced by walk");
            out.push((r.position, sub));
        }
        return;
    }
    for (i, a) in t.args().iter().enumerate() {
        path.push(i + 1);
        collect_frontier(g, a, path, depth, out);
        path.pop();
    }
}

/// Innermost redexes only; cheaper than [`walk`] on deep redex chains,
/// where materializing every position would be quadratic.
fn innermost(g: &Scheme, t: &Term, path: &mut Vec<usize>, out: &mut Vec<RedexInfo>) -> bool {
    let mut inside = false;
    for (i, a) in t.args().iter().enumerate() {
        path.push(i + 1);
        inside |= innermost(g, a, path, out);
        path.pop();
    }
    let here = is_redex(g, t);
    if here && !inside {
        out.push(RedexInfo {
            position: Position::new(path.clone()),
            nonterminal: t.head().clone(),
            is_oi: false,
            is_io: true,
        });
    }
    here || inside
}

fn contains_redex(g: &Scheme, t: &Term) -> bool {
    is_redex(g, t) || t.args().iter().any(|a| contains_redex(g, a))
}

/// Runs fair rounds (or the chooser) until no redex is eligible or the
/// budget runs out. `record` controls whether steps are kept.
fn run(
    g: &Scheme,
    t0: &Term,
    policy: Policy,
    budget: &EvalBudget,
    depth: usize,
    mut chooser: Option<&mut dyn Chooser>,
    record: bool,
) -> Result<(DerivationTrace, Term, usize), EngineError> {
    check_start(g, t0)?;
    let mut trace = DerivationTrace {
        start: t0.clone(),
        steps: Vec::new(),
        exhausted_budget: false,
    };
    let mut t = t0.clone();
    let mut count = 0usize;
    'outer: loop {
        let batch: Vec<RedexInfo> = match chooser.as_deref_mut() {
            Some(c) => {
                let all = redexes(g, &t);
                let Some(p) = c.choose(&t, &all) else {
                    break;
                };
                let r = all
                    .into_iter()
                    .find(|r| r.position == p)
                    .ok_or_else(|| EngineError::NotARedex(p.clone()))?;
                if !policy.admits(&r) {
                    return Err(EngineError::PolicyViolation {
                        position: p,
                        policy,
                    });
                }
                vec![r]
            }
            None => fair_round(g, &t, policy, depth),
        };
        if batch.is_empty() {
            break;
        }
        for r in batch {
            if count >= budget.max_steps || t.size() > budget.max_term_size {
                trace.exhausted_budget = true;
                break 'outer;
            }
            let next = step(g, &t, &r.position)?;
            count += 1;
            if record {
                trace.steps.push(Step {
                    before: t.clone(),
                    redex: r,
                    after: next.clone(),
                });
            }
            t = next;
        }
    }
    Ok((trace, t, count))
}

/// A derivation from `t0` under `policy`. Without a chooser the fair
/// scheduler for the policy is used: rounds of all outermost redexes for
/// `oi`/`any`, rounds of all innermost redexes for `io`.
pub fn derive(
    g: &Scheme,
    t0: &Term,
    policy: Policy,
    budget: &EvalBudget,
    chooser: Option<&mut dyn Chooser>,
) -> Result<DerivationTrace, EngineError> {
    run(g, t0, policy, budget, usize::MAX, chooser, true).map(|(trace, _, _)| trace)
}

#[derive(Debug, Clone)]
pub struct ValueTreeReport {
    pub tree: PartialTree,
    pub steps: usize,
    pub exhausted_budget: bool,
}

/// The depth-truncated prefix of the value tree of `g_t` under `policy`.
/// Unresolved nodes are `⊥`, so the result is a lower bound of the true
/// prefix; when the budget is not exhausted it is exact.
pub fn evaluate_from(
    g: &Scheme,
    t: &Term,
    policy: Policy,
    budget: &EvalBudget,
) -> Result<ValueTreeReport, EngineError> {
    if policy == Policy::Io {
        check_start(g, t)?;
        let out = innermost::evaluate(g, t, budget);
        return Ok(ValueTreeReport {
            tree: out.tree,
            steps: out.steps,
            exhausted_budget: out.exhausted_budget,
        });
    }
    let (trace, last, steps) = run(g, t, policy, budget, budget.depth, None, false)?;
    Ok(ValueTreeReport {
        tree: bottom_transform_to_depth(&last, budget.depth),
        steps,
        exhausted_budget: trace.exhausted_budget,
    })
}

/// Like [`evaluate_from`], also returning the steps taken.
pub fn evaluate_traced(
    g: &Scheme,
    t: &Term,
    policy: Policy,
    budget: &EvalBudget,
) -> Result<(ValueTreeReport, DerivationTrace), EngineError> {
    let (trace, last, steps) = run(g, t, policy, budget, budget.depth, None, true)?;
    let report = ValueTreeReport {
        tree: bottom_transform_to_depth(&last, budget.depth),
        steps,
        exhausted_budget: trace.exhausted_budget,
    };
    Ok((report, trace))
}

pub fn evaluate(g: &Scheme, policy: Policy, budget: &EvalBudget) -> ValueTreeReport {
    evaluate_from(g, &g.start_term(), policy, budget).unwrap_or(ValueTreeReport {
        tree: PartialTree::Bottom,
        steps: 0,
        exhausted_budget: false,
    })
}

pub fn value_tree(g: &Scheme, policy: Policy, budget: &EvalBudget) -> PartialTree {
    evaluate(g, policy, budget).tree
}
