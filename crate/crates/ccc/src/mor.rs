//! Morphism expressions and their typing discipline.
//!
//! Every constructor that needs domain information carries it explicitly
//! (`Fst`, `Snd`, `EvalMap`, `Bang`, `Id`), so [`infer_type`] is a one-pass
//! fold with no inference context and normal forms compare syntactically.

use std::fmt;

use crate::dom::DomExpr;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MorExpr {
    /// Identity on a domain.
    Id(DomExpr),
    /// Composition `outer . inner`; the inner morphism applies first.
    Compose(Box<MorExpr>, Box<MorExpr>),
    /// First projection out of `Prod(l, r)`.
    Fst(DomExpr, DomExpr),
    /// Second projection out of `Prod(l, r)`.
    Snd(DomExpr, DomExpr),
    /// Pairing `<f, g>` of two morphisms with a common domain.
    Pair(Box<MorExpr>, Box<MorExpr>),
    /// Currying: from `Prod(a, b) -> c` to `a -> (b -> c)`.
    Curry(Box<MorExpr>),
    /// The evaluation map over `(arg, result)`: `(arg -> result) x arg -> result`.
    EvalMap(DomExpr, DomExpr),
    /// The unique morphism into the terminal domain.
    Bang(DomExpr),
    /// An element of `target` presented as a morphism `O -> target`.
    Point(String, DomExpr),
    /// A named function constant with declared domain and codomain.
    Prim(String, DomExpr, DomExpr),
}

impl MorExpr {
    pub fn compose(outer: MorExpr, inner: MorExpr) -> MorExpr {
        MorExpr::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn pair(f: MorExpr, g: MorExpr) -> MorExpr {
        MorExpr::Pair(Box::new(f), Box::new(g))
    }

    pub fn curry(g: MorExpr) -> MorExpr {
        MorExpr::Curry(Box::new(g))
    }

    pub fn point(atom: impl Into<String>, target: DomExpr) -> MorExpr {
        MorExpr::Point(atom.into(), target)
    }

    pub fn prim(name: impl Into<String>, dom: DomExpr, cod: DomExpr) -> MorExpr {
        MorExpr::Prim(name.into(), dom, cod)
    }

    /// Number of morphism nodes; the primary component of the rewrite
    /// termination measure.
    pub fn size(&self) -> usize {
        match self {
            MorExpr::Id(_)
            | MorExpr::Fst(_, _)
            | MorExpr::Snd(_, _)
            | MorExpr::EvalMap(_, _)
            | MorExpr::Bang(_)
            | MorExpr::Point(_, _)
            | MorExpr::Prim(_, _, _) => 1,
            MorExpr::Compose(f, g) | MorExpr::Pair(f, g) => 1 + f.size() + g.size(),
            MorExpr::Curry(g) => 1 + g.size(),
        }
    }
}

/// The typing of a morphism: its domain and codomain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorType {
    pub dom: DomExpr,
    pub cod: DomExpr,
}

impl MorType {
    pub fn new(dom: DomExpr, cod: DomExpr) -> MorType {
        MorType { dom, cod }
    }
}

impl fmt::Display for MorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.dom, self.cod)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeError {
    /// Two positions that must carry the same domain disagree.
    Mismatch {
        expr: MorExpr,
        expected: DomExpr,
        found: DomExpr,
    },
    /// `Curry` applied to a morphism whose domain is not a product.
    NonProductCurry { expr: MorExpr, found: DomExpr },
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeError::Mismatch {
                expr,
                expected,
                found,
            } => write!(
                f,
                "type mismatch in `{expr}`: expected `{expected}`, found `{found}`"
            ),
            TypeError::NonProductCurry { expr, found } => write!(
                f,
                "curry in `{expr}` needs a product domain, found `{found}`"
            ),
        }
    }
}

impl std::error::Error for TypeError {}

/// Infer the unique (dom, cod) typing of a morphism, or reject it.
pub fn infer_type(m: &MorExpr) -> Result<MorType, TypeError> {
    match m {
        MorExpr::Id(d) => Ok(MorType::new(d.clone(), d.clone())),
        MorExpr::Fst(l, r) => Ok(MorType::new(DomExpr::prod(l.clone(), r.clone()), l.clone())),
        MorExpr::Snd(l, r) => Ok(MorType::new(DomExpr::prod(l.clone(), r.clone()), r.clone())),
        MorExpr::Pair(f, g) => {
            let tf = infer_type(f)?;
            let tg = infer_type(g)?;
            if tf.dom != tg.dom {
                return Err(TypeError::Mismatch {
                    expr: m.clone(),
                    expected: tf.dom,
                    found: tg.dom,
                });
            }
            Ok(MorType::new(tf.dom, DomExpr::prod(tf.cod, tg.cod)))
        }
        MorExpr::Compose(outer, inner) => {
            let to = infer_type(outer)?;
            let ti = infer_type(inner)?;
            if ti.cod != to.dom {
                return Err(TypeError::Mismatch {
                    expr: m.clone(),
                    expected: to.dom,
                    found: ti.cod,
                });
            }
            Ok(MorType::new(ti.dom, to.cod))
        }
        MorExpr::Curry(g) => {
            let tg = infer_type(g)?;
            match tg.dom {
                DomExpr::Prod(a, b) => Ok(MorType::new(*a, DomExpr::exp(*b, tg.cod))),
                other => Err(TypeError::NonProductCurry {
                    expr: m.clone(),
                    found: other,
                }),
            }
        }
        MorExpr::EvalMap(a, r) => Ok(MorType::new(
            DomExpr::prod(DomExpr::exp(a.clone(), r.clone()), a.clone()),
            r.clone(),
        )),
        MorExpr::Bang(d) => Ok(MorType::new(d.clone(), DomExpr::Terminal)),
        MorExpr::Point(_, t) => Ok(MorType::new(DomExpr::Terminal, t.clone())),
        MorExpr::Prim(_, d, c) => Ok(MorType::new(d.clone(), c.clone())),
    }
}

/// The functor product `f x g`, reduced to its linear notation
/// `<f . Fst, g . Snd>` with projection annotations filled in from the
/// types of `f` and `g`. Identity legs collapse, so `f x id` comes out as
/// `<f . Fst, Snd>`.
pub fn desugar_functor_product(f: &MorExpr, g: &MorExpr) -> Result<MorExpr, TypeError> {
    let tf = infer_type(f)?;
    let tg = infer_type(g)?;
    let fst = MorExpr::Fst(tf.dom.clone(), tg.dom.clone());
    let snd = MorExpr::Snd(tf.dom, tg.dom);
    let left = match f {
        MorExpr::Id(_) => fst,
        _ => MorExpr::compose(f.clone(), fst),
    };
    let right = match g {
        MorExpr::Id(_) => snd,
        _ => MorExpr::compose(g.clone(), snd),
    };
    Ok(MorExpr::pair(left, right))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexError {
    pub shape: DomExpr,
    pub index: usize,
}

impl fmt::Display for IndexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "environment shape `{}` is too shallow for index {}",
            self.shape, self.index
        )
    }
}

impl std::error::Error for IndexError {}

/// The access pointer `Snd . Fst^index` into a left-nested product.
///
/// Index 0 selects the rightmost component, index k the k-th component
/// counting from the right. The result is a right-leaning composite so it
/// is already in the normal form the rewriter would produce.
pub fn access_path(env_shape: &DomExpr, index: usize) -> Result<MorExpr, IndexError> {
    let err = || IndexError {
        shape: env_shape.clone(),
        index,
    };
    let mut fsts = Vec::with_capacity(index);
    let mut cursor = env_shape;
    for _ in 0..index {
        match cursor {
            DomExpr::Prod(l, r) => {
                fsts.push(MorExpr::Fst((**l).clone(), (**r).clone()));
                cursor = l;
            }
            _ => return Err(err()),
        }
    }
    let snd = match cursor {
        DomExpr::Prod(l, r) => MorExpr::Snd((**l).clone(), (**r).clone()),
        _ => return Err(err()),
    };
    // fsts[0] applies first; build `Snd . (fst_last . (.. . fst_0))`.
    let mut chain = None;
    for fst in fsts {
        chain = Some(match chain {
            None => fst,
            Some(rest) => MorExpr::compose(fst, rest),
        });
    }
    Ok(match chain {
        None => snd,
        Some(rest) => MorExpr::compose(snd, rest),
    })
}

// Printing follows the textual syntax: composition `.` is the loosest
// operator and associates to the right; everything else is self-delimiting.
fn fmt_mor(m: &MorExpr, in_compose_left: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match m {
        MorExpr::Id(d) => write!(f, "id[{d}]"),
        MorExpr::Fst(l, r) => write!(f, "fst[{l}, {r}]"),
        MorExpr::Snd(l, r) => write!(f, "snd[{l}, {r}]"),
        MorExpr::EvalMap(a, r) => write!(f, "eps[{a}, {r}]"),
        MorExpr::Bang(d) => write!(f, "bang[{d}]"),
        MorExpr::Point(c, t) => write!(f, "point({c}, {t})"),
        MorExpr::Prim(n, d, c) => write!(f, "prim({n}, {d}, {c})"),
        MorExpr::Curry(g) => write!(f, "curry({g})"),
        MorExpr::Pair(a, b) => write!(f, "<{a}, {b}>"),
        MorExpr::Compose(outer, inner) => {
            if in_compose_left {
                write!(f, "({m})")
            } else {
                fmt_mor(outer, true, f)?;
                write!(f, " . ")?;
                fmt_mor(inner, false, f)
            }
        }
    }
}

impl fmt::Display for MorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_mor(self, false, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy() -> DomExpr {
        DomExpr::base("Dy")
    }

    fn dx() -> DomExpr {
        DomExpr::base("Dx")
    }

    fn env() -> DomExpr {
        DomExpr::left_nested(DomExpr::base("E"), [dy(), dx()])
    }

    #[test]
    fn projections_type_as_in_the_product_rule() {
        // Fst : Dy x Dx -> Dy and Snd : Dy x Dx -> Dx.
        let t = infer_type(&MorExpr::Fst(dy(), dx())).unwrap();
        assert_eq!(t, MorType::new(DomExpr::prod(dy(), dx()), dy()));
        let t = infer_type(&MorExpr::Snd(dy(), dx())).unwrap();
        assert_eq!(t, MorType::new(DomExpr::prod(dy(), dx()), dx()));
    }

    #[test]
    fn pairing_rule_types_into_the_product() {
        // f : Env -> Dy, g : Env -> Dx |- <f, g> : Env -> Dy x Dx.
        let f = MorExpr::prim("f", env(), dy());
        let g = MorExpr::prim("g", env(), dx());
        let t = infer_type(&MorExpr::pair(f, g)).unwrap();
        assert_eq!(t, MorType::new(env(), DomExpr::prod(dy(), dx())));
    }

    #[test]
    fn identity_composition_types() {
        let m = MorExpr::compose(
            MorExpr::Fst(dy(), dx()),
            MorExpr::Id(DomExpr::prod(dy(), dx())),
        );
        let t = infer_type(&m).unwrap();
        assert_eq!(t, MorType::new(DomExpr::prod(dy(), dx()), dy()));
    }

    #[test]
    fn composition_mismatch_is_a_type_error() {
        let f = MorExpr::prim("f", dy(), dx());
        let g = MorExpr::prim("g", env(), dx());
        let err = infer_type(&MorExpr::compose(f, g)).unwrap_err();
        match err {
            TypeError::Mismatch {
                expected, found, ..
            } => {
                assert_eq!(expected, dy());
                assert_eq!(found, dx());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn pair_mismatch_is_a_type_error() {
        let f = MorExpr::prim("f", env(), dy());
        let g = MorExpr::prim("g", dx(), dx());
        assert!(matches!(
            infer_type(&MorExpr::pair(f, g)),
            Err(TypeError::Mismatch { .. })
        ));
    }

    #[test]
    fn curry_needs_a_product_domain() {
        let g = MorExpr::prim("g", dx(), dx());
        assert!(matches!(
            infer_type(&MorExpr::curry(g)),
            Err(TypeError::NonProductCurry { .. })
        ));
        let g = MorExpr::prim("g", DomExpr::prod(env(), dx()), dy());
        let t = infer_type(&MorExpr::curry(g)).unwrap();
        assert_eq!(t, MorType::new(env(), DomExpr::exp(dx(), dy())));
    }

    #[test]
    fn eval_map_typing() {
        let t = infer_type(&MorExpr::EvalMap(dx(), dy())).unwrap();
        assert_eq!(
            t,
            MorType::new(
                DomExpr::prod(DomExpr::exp(dx(), dy()), dx()),
                dy()
            )
        );
    }

    #[test]
    fn typing_is_deterministic() {
        let m = MorExpr::pair(
            MorExpr::compose(MorExpr::Fst(dy(), dx()), MorExpr::Id(DomExpr::prod(dy(), dx()))),
            MorExpr::Snd(dy(), dx()),
        );
        assert_eq!(infer_type(&m), infer_type(&m));
    }

    #[test]
    fn functor_product_desugars_to_linear_notation() {
        // Fst x id collapses its identity leg: <Fst . Fst, Snd>, the
        // substitution pointer.
        let e1 = DomExpr::prod(DomExpr::base("E"), dy());
        let f = MorExpr::Fst(e1.clone(), dx());
        let g = MorExpr::Id(dx());
        let got = desugar_functor_product(&f, &g).unwrap();
        let expect = MorExpr::pair(
            MorExpr::compose(f.clone(), MorExpr::Fst(DomExpr::prod(e1.clone(), dx()), dx())),
            MorExpr::Snd(DomExpr::prod(e1, dx()), dx()),
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn functor_product_types_componentwise() {
        let f = MorExpr::prim("f", dy(), dx());
        let g = MorExpr::prim("g", dx(), dy());
        let got = desugar_functor_product(&f, &g).unwrap();
        let t = infer_type(&got).unwrap();
        assert_eq!(
            t,
            MorType::new(DomExpr::prod(dy(), dx()), DomExpr::prod(dx(), dy()))
        );
    }

    #[test]
    fn curried_functor_product_keeps_its_compose_leg() {
        let g = MorExpr::prim("g", DomExpr::prod(env(), dx()), dy());
        let c = MorExpr::curry(g);
        let got = desugar_functor_product(&c, &MorExpr::Id(dx())).unwrap();
        match got {
            MorExpr::Pair(left, right) => {
                assert!(matches!(*left, MorExpr::Compose(_, _)));
                assert!(matches!(*right, MorExpr::Snd(_, _)));
            }
            other => panic!("expected pair, got {other}"),
        }
    }

    #[test]
    fn access_path_indices() {
        // Env = (E x Dy) x Dx: index 0 is Snd with codomain Dx, index 1 is
        // Snd . Fst with codomain Dy.
        let m0 = access_path(&env(), 0).unwrap();
        assert_eq!(
            m0,
            MorExpr::Snd(DomExpr::prod(DomExpr::base("E"), dy()), dx())
        );
        assert_eq!(infer_type(&m0).unwrap().cod, dx());

        let m1 = access_path(&env(), 1).unwrap();
        assert_eq!(
            m1,
            MorExpr::compose(
                MorExpr::Snd(DomExpr::base("E"), dy()),
                MorExpr::Fst(DomExpr::prod(DomExpr::base("E"), dy()), dx())
            )
        );
        assert_eq!(infer_type(&m1).unwrap().cod, dy());
        assert_eq!(infer_type(&m1).unwrap().dom, env());
    }

    #[test]
    fn access_path_too_deep_is_an_index_error() {
        let shape = DomExpr::prod(DomExpr::base("E"), dx());
        let err = access_path(&shape, 5).unwrap_err();
        assert_eq!(err.index, 5);
    }

    #[test]
    fn access_path_deep_shape() {
        let shape = DomExpr::left_nested(
            DomExpr::base("E"),
            [DomExpr::base("A"), DomExpr::base("B"), DomExpr::base("C")],
        );
        for (k, want) in [(0, "C"), (1, "B"), (2, "A")] {
            let m = access_path(&shape, k).unwrap();
            let t = infer_type(&m).unwrap();
            assert_eq!(t.dom, shape);
            assert_eq!(t.cod, DomExpr::base(want), "index {k}");
        }
    }

    #[test]
    fn display_round_ready_forms() {
        let m = MorExpr::compose(
            MorExpr::Fst(dy(), dx()),
            MorExpr::compose(
                MorExpr::Id(DomExpr::prod(dy(), dx())),
                MorExpr::Id(DomExpr::prod(dy(), dx())),
            ),
        );
        assert_eq!(
            m.to_string(),
            "fst[Dy, Dx] . id[Dy x Dx] . id[Dy x Dx]"
        );
        let left = MorExpr::compose(
            MorExpr::compose(MorExpr::Id(dy()), MorExpr::Id(dy())),
            MorExpr::Id(dy()),
        );
        assert_eq!(left.to_string(), "(id[Dy] . id[Dy]) . id[Dy]");
        let pair = MorExpr::pair(
            MorExpr::compose(MorExpr::Snd(dy(), dx()), MorExpr::Id(DomExpr::prod(dy(), dx()))),
            MorExpr::Bang(DomExpr::prod(dy(), dx())),
        );
        assert_eq!(
            pair.to_string(),
            "<snd[Dy, Dx] . id[Dy x Dx], bang[Dy x Dx]>"
        );
    }
}
