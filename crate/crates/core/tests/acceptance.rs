//! Acceptance suite: one pass/fail line per criterion. Runs without the
//! libtest harness so the summary is always printed.

mod common;

use std::collections::{HashSet, VecDeque};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{corpus, o, random_closed_term, worked_examples, MINI, SEC2, SEC3};
use hors::typesys::{atom_count, witness_violations, Judge, TypeSpace};
use hors::{
    bar_scheme, derive, evaluate, evaluate_from, label_scheme, parse, parse_term, redexes,
    self_correct, sem_apply, step, step_f, theta_star, Atom, Conj, EvalBudget, PartialTree, Policy,
    Scheme, Semantics, SimpleType, Symbol, Term, TypeSysError, ValueTreeReport,
};

/// Random schemes added to the three examples.
const RANDOM_SCHEMES: usize = 24;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

fn terminal(name: &str, arity: usize) -> Symbol {
    Symbol::terminal(name, SimpleType::function(vec![o(); arity]))
}

fn node(label: &str, children: Vec<PartialTree>) -> PartialTree {
    PartialTree::node(terminal(label, children.len()), children).unwrap()
}

/// The complete binary `b`-tree with `levels` levels of `b` above `⊥`.
fn b_tree(levels: usize) -> PartialTree {
    if levels == 0 {
        PartialTree::Bottom
    } else {
        node("b", vec![b_tree(levels - 1), b_tree(levels - 1)])
    }
}

fn criterion_1() -> Outcome {
    let g = parse(SEC2).unwrap();
    let start = Instant::now();
    let r = evaluate(&g, Policy::Oi, &EvalBudget::new(10_000, 100_000, 4));
    let elapsed = start.elapsed();
    let expected = node("a", vec![b_tree(3), PartialTree::Bottom, node("c", vec![])]);
    if r.tree != expected {
        return fail(format!("got {} expected {expected}", r.tree));
    }
    if elapsed >= Duration::from_secs(5) {
        return fail(format!("took {elapsed:?}, limit 5s"));
    }
    pass(format!(
        "exact tree after {} steps in {elapsed:.2?} (limit 5s)",
        r.steps
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let g = parse(SEC3).unwrap();
    let c = node("c", vec![]);
    let mut problems = Vec::new();

    let oi = evaluate(&g, Policy::Oi, &EvalBudget::new(1_000, 100_000, 3));
    if oi.tree != c {
        problems.push(format!("value tree {} != c", oi.tree));
    }
    let io = evaluate(&g, Policy::Io, &EvalBudget::new(1_000, 100_000, 3));
    if io.tree != PartialTree::Bottom || !io.exhausted_budget {
        problems.push(format!(
            "IO value tree {} (exhausted: {})",
            io.tree, io.exhausted_budget
        ));
    }

    let gb = bar_scheme(&g).unwrap();
    let mut rules: Vec<String> = gb.rules().iter().map(|r| r.to_string()).collect();
    rules.sort();
    let mut expected = vec![
        "I -> S~ Delta",
        "S~ delta -> F~ (H~ a~) c~ Delta",
        "F~ x~ y~ delta -> y~ Delta",
        "H~ x~ delta -> H~ (H~ x~) Delta",
        "c~ delta -> c",
        "a~ delta -> a",
    ];
    expected.sort();
    if rules != expected {
        problems.push(format!("bar rules {rules:?}"));
    }

    let want = ["I", "S~ Delta", "F~ (H~ a~) c~ Delta", "c~ Delta", "c"];
    for p in [Policy::Unrestricted, Policy::Oi, Policy::Io] {
        let tr = derive(
            &gb,
            &gb.start_term(),
            p,
            &EvalBudget::new(1_000, 100_000, 3),
            None,
        )
        .unwrap();
        let got: Vec<String> = tr.terms().map(|t| t.to_string()).collect();
        if got != want {
            problems.push(format!("{p} trace {got:?}"));
        }
    }
    let bio = evaluate(&gb, Policy::Io, &EvalBudget::new(1_000, 100_000, 3));
    if bio.tree != c {
        problems.push(format!("IO value tree of the transform {}", bio.tree));
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        problems.push(format!("took {elapsed:?}, limit 1s"));
    }
    if problems.is_empty() {
        pass(format!("all exact in {elapsed:.2?} (limit 1s)"))
    } else {
        fail(problems.join("; "))
    }
}

/// Every term reachable from the start of `gb` in at most `max_steps`
/// rewrite steps (breadth first over all redex choices), capped in size.
fn explore(gb: &Scheme, max_steps: usize, max_size: usize) -> (usize, usize, Vec<String>) {
    let mut seen: HashSet<Term> = HashSet::new();
    let mut queue = VecDeque::from([gb.start_term()]);
    let (mut steps, mut checked_redexes) = (0, 0);
    let mut violations = Vec::new();
    while let Some(t) = queue.pop_front() {
        if !seen.insert(t.clone()) {
            continue;
        }
        for r in redexes(gb, &t) {
            checked_redexes += 1;
            if !(r.is_oi && r.is_io) {
                violations.push(format!("{} at {} in {t}", r.nonterminal, r.position));
            }
            if steps < max_steps {
                steps += 1;
                let next = step(gb, &t, &r.position).unwrap();
                if next.size() <= max_size {
                    queue.push_back(next);
                }
            }
        }
    }
    (seen.len(), checked_redexes, violations)
}

fn criterion_3(corpus: &[(String, Scheme)]) -> Outcome {
    let mut terms = 0;
    let mut total = 0;
    let mut violations = Vec::new();
    for (name, g) in corpus {
        let gb = bar_scheme(g).unwrap();
        let (n, r, v) = explore(&gb, 500, 20_000);
        terms += n;
        total += r;
        violations.extend(v.into_iter().map(|v| format!("{name}: {v}")));
        // Fair derivations reach deeper than the breadth-first search.
        for p in [Policy::Oi, Policy::Io] {
            let tr = derive(
                &gb,
                &gb.start_term(),
                p,
                &EvalBudget::new(500, 20_000, 6),
                None,
            )
            .unwrap();
            for t in tr.terms() {
                for r in redexes(&gb, t) {
                    total += 1;
                    if !(r.is_oi && r.is_io) {
                        violations.push(format!("{name}: {} at {}", r.nonterminal, r.position));
                    }
                }
            }
        }
    }
    let detail = format!(
        "{} schemes, {terms} explored terms, {total} redexes checked, {} violations (tolerance 0)",
        corpus.len(),
        violations.len()
    );
    if violations.is_empty() {
        pass(detail)
    } else {
        fail(format!(
            "{detail}: {}",
            violations[..violations.len().min(5)].join("; ")
        ))
    }
}

fn criterion_4(corpus: &[(String, Scheme)]) -> Outcome {
    let mut compared = 0;
    let mut bounded = Vec::new();
    let mut skipped = Vec::new();
    let mut mismatches = Vec::new();
    for (name, g) in corpus {
        let gb = bar_scheme(g).unwrap();
        match agree(
            &[1_000, 10_000],
            |b| evaluate(&gb, Policy::Io, b),
            |b| evaluate(g, Policy::Oi, b),
        ) {
            Ok(Agreement::Exact) => compared += 1,
            Ok(Agreement::LowerBounds) => bounded.push(name.clone()),
            Err((l, r)) if l.exhausted_budget && r.exhausted_budget => skipped.push(name.clone()),
            Err((l, r)) => mismatches.push(format!("{name}: {} vs {}", l.tree, r.tree)),
        }
    }
    let detail = format!(
        "{compared} equal at depth 3, {} with equal lower bounds {bounded:?}, {} skipped with both budgets exhausted and different {skipped:?}, {} mismatches (tolerance 0)",
        bounded.len(),
        skipped.len(),
        mismatches.len()
    );
    if mismatches.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}: {}", mismatches.join("; ")))
    }
}

/// A term with its hand-derived `q⊥` and `q∞` membership.
type Truth = (&'static str, bool, bool);

/// Extra hand-analysed schemes: name, source, and `(term, q⊥, q∞)` truths.
fn hand_corpus() -> Vec<(&'static str, String, Vec<Truth>)> {
    vec![
        (
            "mini",
            MINI.to_string(),
            vec![("H", false, true), ("F H", true, true), ("S", true, true), ("F c", false, false), ("a c", false, false)],
        ),
        (
            "sec3",
            SEC3.to_string(),
            vec![
                ("S", true, true),
                ("H a", true, true),
                ("F c c", false, false),
                ("F c (H a)", true, true),
                ("F (H c) c", true, true),
            ],
        ),
        (
            "loop",
            "terminal c : o\nnonterminal S : o\nstart S\nrule S = S\n".to_string(),
            vec![("S", true, true), ("c", false, false)],
        ),
        (
            "twice",
            "terminal b : o -> o\nterminal c : o\nnonterminal S : o\nnonterminal T : (o -> o) -> o -> o\n\
             var f : o -> o\nvar x : o\nstart S\nrule S = T b c\nrule T f x = f (f x)\n"
                .to_string(),
            vec![("S", false, false), ("T b (T b c)", false, false)],
        ),
        (
            "stream",
            "terminal b : o -> o\nterminal c : o\nnonterminal S : o\nnonterminal H : o\n\
             nonterminal K : o -> o -> o\nvar x : o\nvar y : o\nstart S\n\
             rule S = b H\nrule H = b H\nrule K x y = x\n"
                .to_string(),
            vec![
                ("S", false, true),
                ("H", false, true),
                ("K c H", true, true),
                ("K c c", false, false),
                ("b (K c c)", false, false),
            ],
        ),
    ]
}

fn criterion_5() -> Outcome {
    let mut checks = 0;
    let mut mismatches = Vec::new();
    for (name, src, truths) in hand_corpus() {
        let g = parse(&src).unwrap();
        let mut sem = Semantics::new(&g).unwrap();
        for (text, bot, inf) in truths {
            let t = parse_term(&g, text).unwrap();
            let s = sem.of(&t).unwrap();
            let io =
                evaluate_from(&g, &t, Policy::Io, &EvalBudget::new(10_000, 100_000, 3)).unwrap();
            checks += 1;
            let has_bot = s.contains(&Atom::Bot);
            let io_bottom = io.tree == PartialTree::Bottom;
            if has_bot != io_bottom {
                mismatches.push(format!(
                    "{name} {text}: ⟦t⟧ = {s}, IO value tree {}",
                    io.tree
                ));
            }
            if has_bot != bot || s.contains(&Atom::Inf) != inf {
                mismatches.push(format!(
                    "{name} {text}: ⟦t⟧ = {s}, hand analysis q⊥={bot} q∞={inf}"
                ));
            }
        }
    }
    let detail = format!(
        "{checks} hand-analysed terms, {} mismatches (tolerance 0)",
        mismatches.len()
    );
    if mismatches.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}: {}", mismatches.join("; ")))
    }
}

fn criterion_6(corpus: &[(String, Scheme)]) -> Outcome {
    let mut problems = Vec::new();
    let mut excluded = Vec::new();
    let mut checked = 0;
    let mut slowest = Duration::ZERO;
    for (name, g) in corpus {
        let start = Instant::now();
        let mut space = TypeSpace::new();
        let ts = match theta_star(g, &mut space) {
            Ok(ts) => ts,
            Err(e @ TypeSysError::Intractable { .. }) if g.order() > 2 => {
                excluded.push(format!("{name} (order {}: {e})", g.order()));
                continue;
            }
            Err(e) => {
                problems.push(format!("{name}: {e}"));
                continue;
            }
        };
        let bound: u128 = g
            .nonterminals()
            .iter()
            .map(|n| atom_count(n.ty()).unwrap())
            .sum();
        if ts.iterations as u128 > bound {
            problems.push(format!("{name}: {} iterations > {bound}", ts.iterations));
        }
        if step_f(g, &ts.env, &mut space).unwrap() != ts.env {
            problems.push(format!("{name}: not a fixpoint"));
        }
        for v in witness_violations(g, &ts.env, &mut space).unwrap() {
            problems.push(format!("{name}: {v}"));
        }
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        if elapsed >= Duration::from_secs(60) {
            problems.push(format!("{name}: took {elapsed:?}"));
        }
        checked += 1;
    }
    let detail = format!(
        "{checked} schemes verified, slowest {slowest:.2?} (limit 60s), {} violations (tolerance 0); excluded {excluded:?}",
        problems.len()
    );
    if problems.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}: {}", problems.join("; ")))
    }
}

enum Agreement {
    /// Equal with neither evaluation cut short.
    Exact,
    /// Equal depth-3 prefixes at the largest budget, where at least one side
    /// is only a lower bound.
    LowerBounds,
}

/// Compares depth-3 value trees under escalating step budgets. Settles early
/// only on complete results; otherwise the last pair decides.
#[allow(clippy::result_large_err)]
fn agree(
    budgets: &[usize],
    lhs: impl Fn(&EvalBudget) -> ValueTreeReport,
    rhs: impl Fn(&EvalBudget) -> ValueTreeReport,
) -> Result<Agreement, (ValueTreeReport, ValueTreeReport)> {
    let mut last = None;
    for &steps in budgets {
        let b = EvalBudget::new(steps, 200_000, 3);
        let (l, r) = (lhs(&b), rhs(&b));
        if !l.exhausted_budget && !r.exhausted_budget {
            return if l.tree == r.tree {
                Ok(Agreement::Exact)
            } else {
                Err((l, r))
            };
        }
        last = Some((l, r));
    }
    let (l, r) = last.expect("at least one budget");
    if l.tree == r.tree {
        Ok(Agreement::LowerBounds)
    } else {
        Err((l, r))
    }
}

const BUDGETS: &[usize] = &[1_000, 10_000, 50_000];

fn criterion_7(corpus: &[(String, Scheme)]) -> Outcome {
    let mut problems = Vec::new();
    let mut checked = 0;
    for (name, g) in corpus.iter().filter(|(_, g)| g.order() <= 2) {
        let labelled = match label_scheme(g) {
            Ok(l) => l,
            Err(e) => {
                problems.push(format!("{name}: {e}"));
                continue;
            }
        };
        let g1 = &labelled.scheme;
        let g2 = self_correct(&labelled);
        let base = |b: &EvalBudget| evaluate(g, Policy::Io, b);
        if let Err((l, r)) = agree(BUDGETS, |b| evaluate(g1, Policy::Io, b), base) {
            problems.push(format!("{name}: annotated IO {} vs IO {}", l.tree, r.tree));
        }
        if let Err((l, r)) = agree(BUDGETS, |b| evaluate(&g2, Policy::Oi, b), base) {
            problems.push(format!("{name}: corrected OI {} vs IO {}", l.tree, r.tree));
        }
        if let Err((l, r)) = agree(BUDGETS, |b| evaluate(&g2, Policy::Io, b), base) {
            problems.push(format!("{name}: corrected IO {} vs IO {}", l.tree, r.tree));
        }
        if g2.order() != g.order() {
            problems.push(format!("{name}: order {} vs {}", g2.order(), g.order()));
        }
        // The start-term form, on the body of the start rule.
        if let Some(rule) = g.rule(g.start_name()) {
            let t = rule.body();
            match labelled.plus_term(t) {
                Ok(tp) => {
                    if let Err((l, r)) = agree(
                        BUDGETS,
                        |b| evaluate_from(g1, &tp, Policy::Io, b).unwrap(),
                        |b| evaluate_from(g, t, Policy::Io, b).unwrap(),
                    ) {
                        problems.push(format!("{name}: from {t}: {} vs {}", l.tree, r.tree));
                    }
                }
                Err(e) => problems.push(format!("{name}: {e}")),
            }
        }
        checked += 1;
    }
    let detail = format!(
        "{checked} schemes of order ≤ 2, {} mismatches (tolerance 0)",
        problems.len()
    );
    if problems.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}: {}", problems.join("; ")))
    }
}

/// `⟦t⟧` recomputed atom by atom with the goal-directed judgement.
fn judged(judge: &mut Judge, space: &mut TypeSpace, t: &Term) -> Conj {
    let atoms = space.atoms(t.ty()).unwrap();
    atoms
        .iter()
        .filter(|a| judge.atom(t, a).unwrap())
        .cloned()
        .collect()
}

fn criterion_8(corpus: &[(String, Scheme)]) -> Outcome {
    const TOTAL: usize = 1_000;
    let tractable: Vec<&(String, Scheme)> = corpus.iter().filter(|(_, g)| g.order() <= 2).collect();
    let quota = TOTAL.div_ceil(tractable.len());
    let mut violations = Vec::new();
    let mut cross_checked = 0;
    let mut done = 0;
    for (si, (name, g)) in tractable.iter().enumerate() {
        let mut sem = Semantics::new(g).unwrap();
        let env = sem.theta_star().env.clone();
        let mut space = TypeSpace::new();
        let mut oracle_space = TypeSpace::new();
        let mut judge = Judge::new(g, &env, &mut oracle_space);
        let target = quota.min(TOTAL - done);
        let mut here = 0;
        let mut seed = (si as u64) << 32;
        while here < target && seed & 0xffff_ffff < 100_000 {
            seed += 1;
            let whole = random_closed_term(g, seed, &o(), 3);
            // Every spine prefix `t1 t2` of a random ground term.
            let m = whole.args().len();
            for k in 1..=m {
                if here == target {
                    break;
                }
                let t = whole.prefix(m - k);
                let (t1, t2) = (t.prefix(1), &t.args()[k - 1]);
                let full = sem.of(&t).unwrap();
                let applied = sem_apply(t1.ty(), &sem.of(&t1).unwrap(), &sem.of(t2).unwrap());
                if full != applied {
                    violations.push(format!("{name}: ⟦{t}⟧ = {full} but ⟦t1⟧ ⟦t2⟧ = {applied}"));
                }
                if atom_count(t.ty()).is_some_and(|c| c <= 1_100) {
                    let j = judged(&mut judge, &mut space, &t);
                    cross_checked += 1;
                    if j != full {
                        violations.push(format!("{name}: ⟦{t}⟧ = {full} but judged {j}"));
                    }
                }
                here += 1;
            }
        }
        done += here;
    }
    let detail = format!(
        "{done} applications over {} signatures, {cross_checked} cross-checked by judgement, {} violations (tolerance 0)",
        tractable.len(),
        violations.len()
    );
    if done < TOTAL {
        fail(format!(
            "{detail}: only {done} of {TOTAL} applications generated"
        ))
    } else if violations.is_empty() {
        pass(detail)
    } else {
        fail(format!(
            "{detail}: {}",
            violations[..violations.len().min(5)].join("; ")
        ))
    }
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let worker = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(run)
        .expect("spawn acceptance worker");
    worker.join().expect("acceptance worker panicked")
}

fn run() -> ExitCode {
    let corpus = corpus(RANDOM_SCHEMES);
    println!(
        "acceptance corpus: {} schemes ({} examples + {RANDOM_SCHEMES} generated)",
        corpus.len(),
        worked_examples().len()
    );
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("1 running example value tree", Box::new(criterion_1)),
        (
            "2 call-by-need vs call-by-value example",
            Box::new(criterion_2),
        ),
        (
            "3 redexes of the transform are outermost and innermost",
            Box::new(|| criterion_3(&corpus)),
        ),
        (
            "4 transform IO value tree equals value tree",
            Box::new(|| criterion_4(&corpus)),
        ),
        ("5 type-system oracle", Box::new(criterion_5)),
        ("6 fixpoint sanity", Box::new(|| criterion_6(&corpus))),
        (
            "7 annotated and self-correcting schemes",
            Box::new(|| criterion_7(&corpus)),
        ),
        (
            "8 compositional semantics",
            Box::new(|| criterion_8(&corpus)),
        ),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let out = check();
        let mark = if out.ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {name}: {mark} [{:.2?}] {}",
            start.elapsed(),
            out.detail
        );
        if !out.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
