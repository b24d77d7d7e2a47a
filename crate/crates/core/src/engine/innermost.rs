//! Fair parallel-innermost evaluation on a mutable arena.
//!
//! Produces exactly the rounds of the persistent scheduler in the parent
//! module, but a contraction costs time proportional to the rule body and
//! the copied arguments rather than to the depth of the redex: every redex
//! records its nearest redex ancestor and how many maximal redexes lie
//! strictly inside it, and the innermost redexes under each outermost
//! redex are kept in a work list. Contracting an innermost redex never
//! duplicates or erases another redex (its arguments are redex-free), so
//! this bookkeeping stays local.

use std::collections::HashMap;

use crate::scheme::Scheme;
use crate::term::{Symbol, Term};
use crate::tree::PartialTree;

use super::EvalBudget;

const NONE: u32 = u32::MAX;

struct Node {
    head: Symbol,
    args: Vec<u32>,
    parent: u32,
    /// Index in the parent's argument list.
    slot: u32,
    redex: bool,
    /// Nearest proper ancestor that is a redex.
    rparent: u32,
    /// Maximal redexes strictly inside this one.
    inner: u32,
    /// Outermost redex above or at this one.
    top: u32,
    /// Bumped on release so stale work-list entries can be told apart.
    generation: u32,
}

struct Arena<'g> {
    g: &'g Scheme,
    nodes: Vec<Node>,
    free: Vec<u32>,
    root: u32,
    live: usize,
    /// Innermost redexes per outermost redex, as `(id, generation)`.
    pending: HashMap<u32, Vec<(u32, u32)>>,
    /// Redexes created by the current operation, not yet filed.
    fresh: Vec<u32>,
}

pub(super) struct Outcome {
    pub tree: PartialTree,
    pub steps: usize,
    pub exhausted_budget: bool,
}

/// The depth-truncated IO value tree of the closed ground term `t`.
pub(super) fn evaluate(g: &Scheme, t: &Term, budget: &EvalBudget) -> Outcome {
    let mut a = Arena {
        g,
        nodes: Vec::new(),
        free: Vec::new(),
        root: NONE,
        live: 0,
        pending: HashMap::new(),
        fresh: Vec::new(),
    };
    a.root = a.build(t, NONE);
    a.file_fresh();
    let mut steps = 0usize;
    let mut exhausted = false;
    'rounds: loop {
        let batch = a.round(budget.depth);
        if batch.is_empty() {
            break;
        }
        for v in batch {
            if steps >= budget.max_steps || a.live > budget.max_term_size {
                exhausted = true;
                break 'rounds;
            }
            a.contract(v);
            steps += 1;
        }
    }
    Outcome {
        tree: a.to_tree(a.root, budget.depth),
        steps,
        exhausted_budget: exhausted,
    }
}

impl<'g> Arena<'g> {
    fn is_redex(&self, head: &Symbol, nargs: usize) -> bool {
        head.is_nonterminal()
            && head.ty().after(nargs).is_some_and(|t| t.is_ground())
            && self.g.rule(head.name()).is_some()
    }

    fn alloc(&mut self, head: Symbol) -> u32 {
        self.live += 1;
        let node = |generation| Node {
            head,
            args: Vec::new(),
            parent: NONE,
            slot: 0,
            redex: false,
            rparent: NONE,
            inner: 0,
            top: NONE,
            generation,
        };
        match self.free.pop() {
            Some(id) => {
                let generation = self.nodes[id as usize].generation;
                self.nodes[id as usize] = node(generation);
                id
            }
            None => {
                self.nodes.push(node(0));
                (self.nodes.len() - 1) as u32
            }
        }
    }

    fn release(&mut self, id: u32) {
        let n = &mut self.nodes[id as usize];
        n.generation = n.generation.wrapping_add(1);
        n.args = Vec::new();
        self.free.push(id);
        self.live -= 1;
    }

    fn release_subtree(&mut self, id: u32) {
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            stack.extend(std::mem::take(&mut self.nodes[n as usize].args));
            self.release(n);
        }
    }

    fn push_arg(&mut self, parent: u32, child: u32) {
        let slot = self.nodes[parent as usize].args.len() as u32;
        self.nodes[parent as usize].args.push(child);
        let c = &mut self.nodes[child as usize];
        c.parent = parent;
        c.slot = slot;
    }

    /// Marks `id` as a redex whose nearest redex ancestor is `ctx`.
    fn register(&mut self, id: u32, ctx: u32) {
        let top = if ctx == NONE {
            id
        } else {
            self.nodes[ctx as usize].inner += 1;
            self.nodes[ctx as usize].top
        };
        let n = &mut self.nodes[id as usize];
        n.redex = true;
        n.rparent = ctx;
        n.inner = 0;
        n.top = top;
        self.fresh.push(id);
    }

    /// Files the fresh redexes that are innermost.
    fn file_fresh(&mut self) {
        for id in std::mem::take(&mut self.fresh) {
            self.file_if_innermost(id);
        }
    }

    fn file_if_innermost(&mut self, id: u32) {
        let n = &self.nodes[id as usize];
        if n.redex && n.inner == 0 {
            let entry = (id, n.generation);
            self.pending.entry(n.top).or_default().push(entry);
        }
    }

    fn build(&mut self, t: &Term, ctx: u32) -> u32 {
        let id = self.alloc(t.head().clone());
        let inner_ctx = if self.is_redex(t.head(), t.args().len()) {
            self.register(id, ctx);
            id
        } else {
            ctx
        };
        for a in t.args() {
            let c = self.build(a, inner_ctx);
            self.push_arg(id, c);
        }
        id
    }

    /// A redex-free copy of the redex-free subtree at `id`.
    fn copy(&mut self, id: u32) -> u32 {
        let new = self.alloc(self.nodes[id as usize].head.clone());
        let mut stack = vec![(id, new)];
        while let Some((from, to)) = stack.pop() {
            for i in 0..self.nodes[from as usize].args.len() {
                let child = self.nodes[from as usize].args[i];
                let c = self.alloc(self.nodes[child as usize].head.clone());
                self.push_arg(to, c);
                stack.push((child, c));
            }
        }
        new
    }

    /// The rule body with parameters bound to the argument subtrees. Each
    /// argument is copied for all but its last occurrence, which takes the
    /// original: earlier occurrences may be extended in place.
    fn instantiate(
        &mut self,
        body: &Term,
        params: &[Symbol],
        args: &[u32],
        uses: &mut [usize],
        ctx: u32,
    ) -> u32 {
        let head = body.head();
        let (id, nargs) = if head.is_variable() {
            let i = params
                .iter()
                .position(|p| p.name() == head.name())
                .expect("rule bodies only use their parameters");
            uses[i] -= 1;
            let base = if uses[i] > 0 {
                self.copy(args[i])
            } else {
                args[i]
            };
            (
                base,
                self.nodes[base as usize].args.len() + body.args().len(),
            )
        } else {
            (self.alloc(head.clone()), body.args().len())
        };
        let h = self.nodes[id as usize].head.clone();
        let inner_ctx = if self.is_redex(&h, nargs) {
            self.register(id, ctx);
            id
        } else {
            ctx
        };
        for b in body.args() {
            let c = self.instantiate(b, params, args, uses, inner_ctx);
            self.push_arg(id, c);
        }
        id
    }

    fn contract(&mut self, v: u32) {
        let rule = self
            .g
            .rule(self.nodes[v as usize].head.name())
            .expect("only redexes are contracted");
        let (parent, slot, p) = {
            let n = &self.nodes[v as usize];
            (n.parent, n.slot, n.rparent)
        };
        let args = std::mem::take(&mut self.nodes[v as usize].args);
        let mut uses: Vec<usize> = rule
            .params()
            .iter()
            .map(|x| occurrences(rule.body(), x.name()))
            .collect();
        for (&a, &n) in args.iter().zip(&uses) {
            if n == 0 {
                self.release_subtree(a);
            }
        }
        let c = self.instantiate(rule.body(), rule.params(), &args, &mut uses, p);
        {
            let n = &mut self.nodes[c as usize];
            n.parent = parent;
            n.slot = slot;
        }
        if parent == NONE {
            self.root = c;
        } else {
            self.nodes[parent as usize].args[slot as usize] = c;
        }
        if p == NONE {
            self.pending.remove(&v);
        }
        self.release(v);
        self.file_fresh();
        if p != NONE {
            self.nodes[p as usize].inner -= 1;
            if self.nodes[p as usize].inner == 0 {
                self.file_if_innermost(p);
            }
        }
    }

    /// Outermost redexes at depth below `depth` with only terminal
    /// ancestors, plus the outermost redexes under stuck non-terminals, in
    /// preorder.
    fn frontier(&self, depth: usize) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            if d >= depth {
                continue;
            }
            let n = &self.nodes[id as usize];
            if n.redex {
                out.push(id);
            } else if n.head.is_terminal() {
                stack.extend(n.args.iter().rev().map(|&c| (c, d + 1)));
            } else {
                // Arguments of a stuck head never surface in the tree, but
                // may still hold redexes.
                let mut inner = n.args.iter().rev().copied().collect::<Vec<_>>();
                while let Some(c) = inner.pop() {
                    let m = &self.nodes[c as usize];
                    if m.redex {
                        out.push(c);
                    } else {
                        inner.extend(m.args.iter().rev());
                    }
                }
            }
        }
        out
    }

    /// The redexes of the next round: the innermost redexes under each
    /// frontier redex, left to right.
    fn round(&mut self, depth: usize) -> Vec<u32> {
        let mut batch = Vec::new();
        for top in self.frontier(depth) {
            let Some(list) = self.pending.remove(&top) else {
                continue;
            };
            let mut ids: Vec<u32> = list
                .into_iter()
                .filter(|&(id, generation)| self.nodes[id as usize].generation == generation)
                .map(|(id, _)| id)
                .collect();
            if ids.len() > 1 {
                let mut keyed: Vec<(Vec<u32>, u32)> =
                    ids.iter().map(|&id| (self.path(id), id)).collect();
                keyed.sort();
                ids = keyed.into_iter().map(|(_, id)| id).collect();
            }
            batch.extend(ids);
        }
        batch
    }

    fn path(&self, mut id: u32) -> Vec<u32> {
        let mut out = Vec::new();
        while self.nodes[id as usize].parent != NONE {
            out.push(self.nodes[id as usize].slot);
            id = self.nodes[id as usize].parent;
        }
        out.reverse();
        out
    }

    fn to_tree(&self, id: u32, depth: usize) -> PartialTree {
        let n = &self.nodes[id as usize];
        if depth == 0 || !n.head.is_terminal() {
            return PartialTree::Bottom;
        }
        PartialTree::Node {
            label: n.head.clone(),
            children: n.args.iter().map(|&c| self.to_tree(c, depth - 1)).collect(),
        }
    }
}

fn occurrences(t: &Term, name: &str) -> usize {
    let mut n = 0;
    t.for_each_symbol(&mut |s| {
        if s.is_variable() && s.name() == name {
            n += 1;
        }
    });
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{parse, parse_term};

    #[test]
    fn budget_cut_inside_a_round() {
        let g = parse(
            "terminal a : o -> o -> o\nterminal b : o -> o\nterminal c : o\n\
             nonterminal N1 : o -> o\nnonterminal N2 : (o -> o) -> o\nnonterminal S : o\n\
             var f1 : o -> o\nvar x1 : o\nstart S\n\
             rule N1 x1 = N1 (N1 x1)\nrule N2 f1 = a (f1 S) (N2 f1)\nrule S = b c\n",
        )
        .unwrap();
        let t = parse_term(&g, "N2 N1").unwrap();
        let out = evaluate(&g, &t, &EvalBudget::new(3, 5, 2));
        assert_eq!((out.steps, out.exhausted_budget), (2, true));
    }
}
