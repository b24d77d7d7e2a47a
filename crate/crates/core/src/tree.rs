//! Finite ranked trees over terminals plus `⊥`, their order `⊑`, and the
//! `⊥`-transformation of ground terms.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::term::{Position, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("incompatible labels {left} and {right} at {position}")]
    IncompatibleLabels {
        position: Position,
        left: String,
        right: String,
    },
    #[error("{label} expects {expected} children, given {given}")]
    Arity {
        label: String,
        expected: usize,
        given: usize,
    },
    #[error("{0} is not a terminal")]
    NotATerminal(String),
    #[error("term {0} is not ground")]
    NotGround(String),
    #[error("variable {0} in a term that should be closed")]
    OpenTerm(String),
}

/// A finite tree whose nodes are terminals (with as many children as their
/// arity) or `⊥` leaves.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum PartialTree {
    Bottom,
    Node {
        label: Symbol,
        children: Vec<PartialTree>,
    },
}

impl PartialTree {
    pub fn node(label: Symbol, children: Vec<PartialTree>) -> Result<Self, TreeError> {
        if !label.is_terminal() {
            return Err(TreeError::NotATerminal(label.name().to_string()));
        }
        if label.ty().arity() != children.len() {
            return Err(TreeError::Arity {
                label: label.name().to_string(),
                expected: label.ty().arity(),
                given: children.len(),
            });
        }
        Ok(PartialTree::Node { label, children })
    }

    pub fn leaf(label: Symbol) -> Result<Self, TreeError> {
        PartialTree::node(label, Vec::new())
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, PartialTree::Bottom)
    }

    /// `self ⊑ other`.
    pub fn leq(&self, other: &PartialTree) -> bool {
        match (self, other) {
            (PartialTree::Bottom, _) => true,
            (PartialTree::Node { .. }, PartialTree::Bottom) => false,
            (
                PartialTree::Node { label, children },
                PartialTree::Node {
                    label: l2,
                    children: c2,
                },
            ) => label == l2 && children.iter().zip(c2).all(|(a, b)| a.leq(b)),
        }
    }

    /// Replaces every node at depth `depth` or deeper by `⊥` (the root has
    /// depth 0).
    pub fn truncate(&self, depth: usize) -> PartialTree {
        match self {
            PartialTree::Bottom => PartialTree::Bottom,
            _ if depth == 0 => PartialTree::Bottom,
            PartialTree::Node { label, children } => PartialTree::Node {
                label: label.clone(),
                children: children.iter().map(|c| c.truncate(depth - 1)).collect(),
            },
        }
    }

    pub fn size(&self) -> usize {
        match self {
            PartialTree::Bottom => 1,
            PartialTree::Node { children, .. } => {
                1 + children.iter().map(PartialTree::size).sum::<usize>()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            PartialTree::Bottom => 0,
            PartialTree::Node { children, .. } => {
                1 + children.iter().map(PartialTree::depth).max().unwrap_or(0)
            }
        }
    }

    /// One node per line in preorder, children indented by two spaces.
    pub fn render_indented(&self) -> String {
        let mut out = String::new();
        self.write_indented(0, &mut out);
        out
    }

    fn write_indented(&self, indent: usize, out: &mut String) {
        for _ in 0..indent {
            out.push_str("  ");
        }
        match self {
            PartialTree::Bottom => out.push('⊥'),
            PartialTree::Node { label, children } => {
                out.push_str(label.name());
                out.push('\n');
                for c in children {
                    c.write_indented(indent + 1, out);
                }
                return;
            }
        }
        out.push('\n');
    }

    pub fn to_record(&self) -> TreeRecord {
        match self {
            PartialTree::Bottom => TreeRecord::Bottom,
            PartialTree::Node { label, children } => TreeRecord::Node {
                label: label.name().to_string(),
                children: children.iter().map(PartialTree::to_record).collect(),
            },
        }
    }
}

/// Serializable mirror of [`PartialTree`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeRecord {
    Bottom,
    Node {
        label: String,
        children: Vec<TreeRecord>,
    },
}

impl fmt::Display for PartialTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartialTree::Bottom => f.write_str("⊥"),
            PartialTree::Node { label, children } => {
                write!(f, "{label}")?;
                for c in children {
                    match c {
                        PartialTree::Node { children: cc, .. } if !cc.is_empty() => {
                            write!(f, " ({c})")?
                        }
                        _ => write!(f, " {c}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for PartialTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Least upper bound of pairwise compatible trees.
pub fn tree_lub(trees: &[PartialTree]) -> Result<PartialTree, TreeError> {
    let mut acc = PartialTree::Bottom;
    for t in trees {
        acc = lub2(&acc, t, &mut Vec::new())?;
    }
    Ok(acc)
}

fn lub2(a: &PartialTree, b: &PartialTree, path: &mut Vec<usize>) -> Result<PartialTree, TreeError> {
    match (a, b) {
        (PartialTree::Bottom, t) | (t, PartialTree::Bottom) => Ok(t.clone()),
        (
            PartialTree::Node { label, children },
            PartialTree::Node {
                label: l2,
                children: c2,
            },
        ) => {
            if label != l2 {
                return Err(TreeError::IncompatibleLabels {
                    position: Position::new(path.clone()),
                    left: label.name().to_string(),
                    right: l2.name().to_string(),
                });
            }
            let mut out = Vec::with_capacity(children.len());
            for (i, (x, y)) in children.iter().zip(c2).enumerate() {
                path.push(i + 1);
                out.push(lub2(x, y, path)?);
                path.pop();
            }
            Ok(PartialTree::Node {
                label: label.clone(),
                children: out,
            })
        }
    }
}

/// `t^⊥`: non-terminal headed subterms become `⊥`.
pub fn bottom_transform(t: &Term) -> Result<PartialTree, TreeError> {
    if !t.ty().is_ground() {
        return Err(TreeError::NotGround(t.to_string()));
    }
    if !t.is_closed() {
        return Err(TreeError::OpenTerm(
            t.free_variables().iter().next().unwrap().name().to_string(),
        ));
    }
    Ok(bottom_transform_to_depth(t, usize::MAX))
}

/// `t^⊥` with every node at depth `depth` or deeper replaced by `⊥`.
/// The term must be ground and closed.
pub fn bottom_transform_to_depth(t: &Term, depth: usize) -> PartialTree {
    if depth == 0 || !t.head().is_terminal() {
        return PartialTree::Bottom;
    }
    PartialTree::Node {
        label: t.head().clone(),
        children: t
            .args()
            .iter()
            .map(|a| bottom_transform_to_depth(a, depth - 1))
            .collect(),
    }
}
