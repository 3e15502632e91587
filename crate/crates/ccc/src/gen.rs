//! Deterministic generators for well-typed morphisms and terms.
//!
//! Used by the law-soundness battery and the verification batteries; the
//! generator is seeded, so every run sees the same stream.

use crate::dom::DomExpr;
use crate::lambda::{Context, LambdaTerm};
use crate::machine::{count_inhabitants, FiniteSemantics};
use crate::mor::MorExpr;

/// SplitMix64; deterministic and good enough for test-case generation.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

/// Generates well-typed morphisms between domains drawn from a pool of
/// small enumerable shapes over a semantics.
pub struct MorGen<'a> {
    s: &'a FiniteSemantics,
    pool: Vec<DomExpr>,
}

impl<'a> MorGen<'a> {
    /// Build a generator whose domain pool contains the terminal domain,
    /// every declared base, a few products, and one small exponential,
    /// keeping each pool member enumerable within `max_size` inhabitants.
    pub fn new(s: &'a FiniteSemantics, max_size: u128) -> MorGen<'a> {
        let bases: Vec<DomExpr> = s.domains().map(|(n, _)| DomExpr::base(n)).collect();
        let mut pool = vec![DomExpr::Terminal];
        pool.extend(bases.clone());
        for (i, a) in bases.iter().enumerate() {
            for b in bases.iter().skip(i) {
                pool.push(DomExpr::prod(a.clone(), b.clone()));
            }
        }
        for b in &bases {
            pool.push(DomExpr::exp(b.clone(), b.clone()));
            pool.push(DomExpr::prod(
                DomExpr::exp(b.clone(), b.clone()),
                b.clone(),
            ));
        }
        pool.retain(|d| matches!(count_inhabitants(d, s), Ok(n) if n > 0 && n <= max_size));
        MorGen { s, pool }
    }

    pub fn pool(&self) -> &[DomExpr] {
        &self.pool
    }

    pub fn random_dom(&self, rng: &mut Rng) -> DomExpr {
        self.pool[rng.below(self.pool.len())].clone()
    }

    /// A constant morphism `dom -> cod` built from points, pairing, and
    /// currying; total for every codomain assembled from nonempty carriers.
    fn const_route(&self, rng: &mut Rng, dom: &DomExpr, cod: &DomExpr) -> MorExpr {
        match cod {
            DomExpr::Terminal => MorExpr::Bang(dom.clone()),
            DomExpr::Base(name) => {
                let carrier = self.s.carrier(name).expect("pool domains are declared");
                assert!(!carrier.is_empty(), "pool carriers are nonempty");
                let atom = carrier[rng.below(carrier.len())].clone();
                MorExpr::compose(
                    MorExpr::Point(atom, cod.clone()),
                    MorExpr::Bang(dom.clone()),
                )
            }
            DomExpr::Prod(a, b) => MorExpr::pair(
                self.const_route(rng, dom, a),
                self.const_route(rng, dom, b),
            ),
            DomExpr::Exp(a, r) => MorExpr::curry(self.const_route(
                rng,
                &DomExpr::prod(dom.clone(), (**a).clone()),
                r,
            )),
        }
    }

    /// Generate a well-typed morphism `dom -> cod` of depth at most `depth`.
    pub fn gen(&self, rng: &mut Rng, dom: &DomExpr, cod: &DomExpr, depth: usize) -> MorExpr {
        enum Opt {
            Id,
            Bang,
            Fst,
            Snd,
            EvalMap,
            Point,
            Prim(String),
            Pair,
            Curry,
            Compose,
        }
        let mut opts = Vec::new();
        if dom == cod {
            opts.push(Opt::Id);
        }
        if *cod == DomExpr::Terminal {
            opts.push(Opt::Bang);
        }
        if let DomExpr::Prod(a, b) = dom {
            if **a == *cod {
                opts.push(Opt::Fst);
            }
            if **b == *cod {
                opts.push(Opt::Snd);
            }
            if let DomExpr::Exp(ea, er) = &**a {
                if **ea == **b && **er == *cod {
                    opts.push(Opt::EvalMap);
                }
            }
        }
        if *dom == DomExpr::Terminal {
            if let DomExpr::Base(name) = cod {
                if matches!(self.s.carrier(name), Ok(c) if !c.is_empty()) {
                    opts.push(Opt::Point);
                }
            }
        }
        for (name, def) in self.s.prims() {
            if def.dom == *dom && def.cod == *cod {
                opts.push(Opt::Prim(name.to_string()));
            }
        }
        if depth > 0 {
            if matches!(cod, DomExpr::Prod(_, _)) {
                opts.push(Opt::Pair);
                opts.push(Opt::Pair);
            }
            if matches!(cod, DomExpr::Exp(_, _)) {
                opts.push(Opt::Curry);
                opts.push(Opt::Curry);
            }
            opts.push(Opt::Compose);
            opts.push(Opt::Compose);
        }
        if opts.is_empty() {
            return self.const_route(rng, dom, cod);
        }
        match &opts[rng.below(opts.len())] {
            Opt::Id => MorExpr::Id(dom.clone()),
            Opt::Bang => MorExpr::Bang(dom.clone()),
            Opt::Fst => match dom {
                DomExpr::Prod(a, b) => MorExpr::Fst((**a).clone(), (**b).clone()),
                _ => unreachable!(),
            },
            Opt::Snd => match dom {
                DomExpr::Prod(a, b) => MorExpr::Snd((**a).clone(), (**b).clone()),
                _ => unreachable!(),
            },
            Opt::EvalMap => match dom {
                DomExpr::Prod(a, _) => match &**a {
                    DomExpr::Exp(ea, er) => MorExpr::EvalMap((**ea).clone(), (**er).clone()),
                    _ => unreachable!(),
                },
                _ => unreachable!(),
            },
            Opt::Point => match cod {
                DomExpr::Base(name) => {
                    let carrier = self.s.carrier(name).unwrap();
                    let atom = carrier[rng.below(carrier.len())].clone();
                    MorExpr::Point(atom, cod.clone())
                }
                _ => unreachable!(),
            },
            Opt::Prim(name) => MorExpr::prim(name.clone(), dom.clone(), cod.clone()),
            Opt::Pair => match cod {
                DomExpr::Prod(x, y) => MorExpr::pair(
                    self.gen(rng, dom, x, depth - 1),
                    self.gen(rng, dom, y, depth - 1),
                ),
                _ => unreachable!(),
            },
            Opt::Curry => match cod {
                DomExpr::Exp(a, r) => MorExpr::curry(self.gen(
                    rng,
                    &DomExpr::prod(dom.clone(), (**a).clone()),
                    r,
                    depth - 1,
                )),
                _ => unreachable!(),
            },
            Opt::Compose => {
                let mid = self.random_dom(rng);
                MorExpr::compose(
                    self.gen(rng, &mid, cod, depth - 1),
                    self.gen(rng, dom, &mid, depth - 1),
                )
            }
        }
    }
}

/// Generates well-scoped, well-typed lambda terms over a semantics, for
/// cross-checking the compiler against the oracle evaluator.
///
/// Target and argument types are drawn from the declared bases that have at
/// least one point constant (so every type is inhabited by a closed term)
/// plus the arrow types of the registered primitives.
pub struct TermGen<'a> {
    s: &'a FiniteSemantics,
    bases: Vec<DomExpr>,
    arrows: Vec<DomExpr>,
}

impl<'a> TermGen<'a> {
    pub fn new(s: &'a FiniteSemantics) -> TermGen<'a> {
        let mut bases = Vec::new();
        for (name, _) in s.domains() {
            let has_point = s.points().any(|(_, base)| base == name);
            if has_point {
                bases.push(DomExpr::base(name));
            }
        }
        let mut arrows = Vec::new();
        for (_, def) in s.prims() {
            let arrow = DomExpr::exp(def.dom.clone(), def.cod.clone());
            if bases.contains(&def.dom) && bases.contains(&def.cod) && !arrows.contains(&arrow) {
                arrows.push(arrow);
            }
        }
        assert!(!bases.is_empty(), "term generation needs a pointed base");
        TermGen { s, bases, arrows }
    }

    fn entry_pool(&self) -> Vec<DomExpr> {
        let mut pool = self.bases.clone();
        pool.extend(self.arrows.iter().cloned());
        pool
    }

    /// A context with up to `max_entries` entries, at most one of them an
    /// arrow type so instance spaces stay small.
    pub fn gen_ctx(&self, rng: &mut Rng, implicit_rest: DomExpr, max_entries: usize) -> Context {
        let mut ctx = Context::new(implicit_rest);
        let pool = self.entry_pool();
        let n = rng.below(max_entries + 1);
        let mut used_arrow = false;
        for i in 0..n {
            let mut d = pool[rng.below(pool.len())].clone();
            if matches!(d, DomExpr::Exp(_, _)) {
                if used_arrow {
                    d = self.bases[rng.below(self.bases.len())].clone();
                } else {
                    used_arrow = true;
                }
            }
            ctx.push(format!("v{i}"), d);
        }
        ctx
    }

    pub fn random_target(&self, rng: &mut Rng) -> DomExpr {
        let pool = self.entry_pool();
        pool[rng.below(pool.len())].clone()
    }

    fn points_in(&self, base: &str) -> Vec<String> {
        self.s
            .points()
            .filter(|(_, b)| *b == base)
            .map(|(a, _)| a.to_string())
            .collect()
    }

    /// A closed-form term of type `target` built from constants and
    /// abstraction only.
    fn rescue(&self, rng: &mut Rng, target: &DomExpr, fresh: &mut usize, binders: &mut Vec<(String, DomExpr)>) -> LambdaTerm {
        match target {
            DomExpr::Base(b) => {
                let points = self.points_in(b);
                assert!(!points.is_empty(), "pool bases are pointed");
                LambdaTerm::ConstAtom(points[rng.below(points.len())].clone())
            }
            DomExpr::Exp(a, r) => {
                let name = format!("w{}", *fresh);
                *fresh += 1;
                binders.push((name.clone(), (**a).clone()));
                LambdaTerm::lam(name, self.rescue(rng, r, fresh, binders))
            }
            other => unreachable!("no term forms inhabit `{other}`"),
        }
    }

    /// A well-typed term of type `target` under `ctx`; fresh binder
    /// annotations are appended to `binders` and must be added to the
    /// context before compiling.
    pub fn gen_term(
        &self,
        rng: &mut Rng,
        ctx: &Context,
        target: &DomExpr,
        depth: usize,
        fresh: &mut usize,
        binders: &mut Vec<(String, DomExpr)>,
    ) -> LambdaTerm {
        enum Opt {
            Var(String),
            ConstAtom(String),
            ConstFun(String),
            Lam,
            App,
        }
        let mut opts = Vec::new();
        for (name, d) in ctx.entries() {
            if d == target {
                opts.push(Opt::Var(name.clone()));
            }
        }
        if let DomExpr::Base(b) = target {
            for atom in self.points_in(b) {
                opts.push(Opt::ConstAtom(atom));
            }
        }
        if let DomExpr::Exp(a, r) = target {
            for (name, def) in self.s.prims() {
                if def.dom == **a && def.cod == **r {
                    opts.push(Opt::ConstFun(name.to_string()));
                }
            }
            if depth > 0 {
                opts.push(Opt::Lam);
                opts.push(Opt::Lam);
            }
        }
        if depth > 0 {
            opts.push(Opt::App);
        }
        if opts.is_empty() {
            return self.rescue(rng, target, fresh, binders);
        }
        match &opts[rng.below(opts.len())] {
            Opt::Var(name) => LambdaTerm::var(name.clone()),
            Opt::ConstAtom(atom) => LambdaTerm::ConstAtom(atom.clone()),
            Opt::ConstFun(name) => LambdaTerm::ConstFun(name.clone()),
            Opt::Lam => match target {
                DomExpr::Exp(a, r) => {
                    let name = format!("w{}", *fresh);
                    *fresh += 1;
                    binders.push((name.clone(), (**a).clone()));
                    let mut inner = ctx.clone();
                    inner.push(name.clone(), (**a).clone());
                    LambdaTerm::lam(name, self.gen_term(rng, &inner, r, depth - 1, fresh, binders))
                }
                _ => unreachable!(),
            },
            Opt::App => {
                let arg_ty = self.random_target(rng);
                let fun_ty = DomExpr::exp(arg_ty.clone(), target.clone());
                let fun = self.gen_term(rng, ctx, &fun_ty, depth - 1, fresh, binders);
                let arg = self.gen_term(rng, ctx, &arg_ty, depth - 1, fresh, binders);
                LambdaTerm::app(fun, arg)
            }
        }
    }
}
