//! Higher-order recursion schemes: terms, value trees, OI/IO evaluation, and
//! the transformations between the two policies.

pub mod engine;
pub mod io2oi;
pub mod oi2io;
pub mod scheme;
pub mod term;
pub mod tree;
pub mod types;
pub mod typesys;

pub use engine::{
    derive, evaluate, evaluate_from, evaluate_traced, redexes, step, value_tree, Chooser,
    DerivationTrace, EngineError, EvalBudget, Policy, RedexInfo, Step, ValueTreeReport,
};
pub use io2oi::{
    label_scheme, nbvar, plus_type, self_correct, Annotation, LabelError, LabelledScheme, Labeller,
    SizeReport,
};
pub use oi2io::{bar_scheme, bar_term, bar_type, BarContext, BarError};
pub use scheme::{
    parse, parse_term, render, Diagnostic, ParseError, Rule, Scheme, SchemeBuilder, SchemeError,
};
pub use term::{Expr, Position, Symbol, SymbolKind, Term, TermError};
pub use tree::{bottom_transform, tree_lub, PartialTree, TreeError, TreeRecord};
pub use types::SimpleType;
pub use typesys::{
    enum_atoms, enum_conj, judge, sem_apply, step_f, theta_star, Atom, Conj, Environment,
    Semantics, ThetaStar, TypeSpace, TypeSysError,
};
