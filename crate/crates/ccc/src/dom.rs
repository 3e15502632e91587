//! Domain (type) expressions of the cartesian closed category.
//!
//! A domain is the terminal domain `O`, a named base domain, a binary
//! product, or a function space. Products and exponentials are binary and
//! non-associative: equality of domains is purely structural.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomExpr {
    /// The empty product `O`; it has exactly one element.
    Terminal,
    /// A named base domain with a finite carrier supplied by a semantics.
    Base(String),
    /// Binary product `A x B`.
    Prod(Box<DomExpr>, Box<DomExpr>),
    /// Function space `A -> B`.
    Exp(Box<DomExpr>, Box<DomExpr>),
}

impl DomExpr {
    pub fn base(name: impl Into<String>) -> DomExpr {
        DomExpr::Base(name.into())
    }

    pub fn prod(left: DomExpr, right: DomExpr) -> DomExpr {
        DomExpr::Prod(Box::new(left), Box::new(right))
    }

    pub fn exp(arg: DomExpr, result: DomExpr) -> DomExpr {
        DomExpr::Exp(Box::new(arg), Box::new(result))
    }

    /// The singleton domain `{a}` holding exactly the atom `a`.
    pub fn singleton(atom: &str) -> DomExpr {
        DomExpr::Base(format!("{{{atom}}}"))
    }

    /// If `name` is of the form `{a}`, the atom `a` inside the braces.
    pub fn singleton_atom(name: &str) -> Option<&str> {
        name.strip_prefix('{').and_then(|rest| rest.strip_suffix('}'))
    }

    /// Left-nested product of `rest` with each element of `parts` in order,
    /// the environment layout `(..(rest x d0) x d1) x ..`.
    pub fn left_nested(rest: DomExpr, parts: impl IntoIterator<Item = DomExpr>) -> DomExpr {
        parts.into_iter().fold(rest, DomExpr::prod)
    }

    pub fn is_prod(&self) -> bool {
        matches!(self, DomExpr::Prod(_, _))
    }

    /// Number of nodes in the expression tree.
    pub fn size(&self) -> usize {
        match self {
            DomExpr::Terminal | DomExpr::Base(_) => 1,
            DomExpr::Prod(l, r) | DomExpr::Exp(l, r) => 1 + l.size() + r.size(),
        }
    }
}

// Precedence levels for printing: `->` binds loosest and associates to the
// right, `x` binds tighter and associates to the left.
fn fmt_prec(d: &DomExpr, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match d {
        DomExpr::Terminal => write!(f, "O"),
        DomExpr::Base(name) => write!(f, "{name}"),
        DomExpr::Prod(l, r) => {
            let wrap = prec > 1;
            if wrap {
                write!(f, "(")?;
            }
            fmt_prec(l, 1, f)?;
            write!(f, " x ")?;
            fmt_prec(r, 2, f)?;
            if wrap {
                write!(f, ")")?;
            }
            Ok(())
        }
        DomExpr::Exp(a, b) => {
            let wrap = prec > 0;
            if wrap {
                write!(f, "(")?;
            }
            fmt_prec(a, 1, f)?;
            write!(f, " -> ")?;
            fmt_prec(b, 0, f)?;
            if wrap {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for DomExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}
