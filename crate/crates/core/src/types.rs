//! Simple types `τ ::= o | τ -> τ`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A simple type. Arrows associate to the right, so every type reads uniquely
/// as `τ1 -> ... -> τk -> o`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SimpleType {
    Ground,
    Arrow(Arc<SimpleType>, Arc<SimpleType>),
}

impl SimpleType {
    pub fn ground() -> Self {
        SimpleType::Ground
    }

    pub fn arrow(argument: SimpleType, result: SimpleType) -> Self {
        SimpleType::Arrow(Arc::new(argument), Arc::new(result))
    }

    /// Builds `τ1 -> ... -> τk -> o` from its argument types.
    pub fn function<I>(arguments: I) -> Self
    where
        I: IntoIterator<Item = SimpleType>,
        I::IntoIter: DoubleEndedIterator,
    {
        arguments
            .into_iter()
            .rev()
            .fold(SimpleType::Ground, |acc, arg| SimpleType::arrow(arg, acc))
    }

    /// `τ^n -> rest`: `n` copies of `ty` in front of `rest`.
    pub fn repeated(ty: &SimpleType, n: usize, rest: SimpleType) -> Self {
        (0..n).fold(rest, |acc, _| SimpleType::arrow(ty.clone(), acc))
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, SimpleType::Ground)
    }

    pub fn arity(&self) -> usize {
        let mut k = 0;
        let mut cur = self;
        while let SimpleType::Arrow(_, r) = cur {
            k += 1;
            cur = r;
        }
        k
    }

    pub fn order(&self) -> usize {
        match self {
            SimpleType::Ground => 0,
            SimpleType::Arrow(a, r) => (a.order() + 1).max(r.order()),
        }
    }

    /// The argument types `τ1, ..., τk`.
    pub fn arguments(&self) -> Vec<&SimpleType> {
        let mut out = Vec::new();
        let mut cur = self;
        while let SimpleType::Arrow(a, r) = cur {
            out.push(a.as_ref());
            cur = r;
        }
        out
    }

    /// The type left after supplying `n` arguments, if there are that many.
    pub fn after(&self, n: usize) -> Option<&SimpleType> {
        let mut cur = self;
        for _ in 0..n {
            match cur {
                SimpleType::Arrow(_, r) => cur = r,
                SimpleType::Ground => return None,
            }
        }
        Some(cur)
    }

    pub fn split(&self) -> Option<(&SimpleType, &SimpleType)> {
        match self {
            SimpleType::Arrow(a, r) => Some((a, r)),
            SimpleType::Ground => None,
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Ground => write!(f, "o"),
            SimpleType::Arrow(a, r) => {
                if a.is_ground() {
                    write!(f, "o -> {r}")
                } else {
                    write!(f, "({a}) -> {r}")
                }
            }
        }
    }
}

impl fmt::Debug for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
