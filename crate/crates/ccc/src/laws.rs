//! The equational engine: directed categorical laws, normalization, and a
//! decision procedure for equality of parallel morphisms.
//!
//! Rewriting is leftmost-innermost with a fixed rule priority, so normal
//! forms are deterministic and syntactic comparison is meaningful. The η
//! laws are applied as contractions only; what the rewrite system cannot
//! decide is settled by brute force over a finite semantics when one is
//! supplied, and reported as [`Verdict::Undecided`] otherwise.

use std::fmt;

use crate::dom::DomExpr;
use crate::machine::{apply_mor, enumerate, value_eq, FiniteSemantics, Value};
use crate::mor::{infer_type, MorExpr, MorType, TypeError};

/// The registered directed laws, in priority order.
///
/// - `cat-l`: `id . f` to `f`
/// - `cat-r`: `f . id` to `f`
/// - `assoc`: `(f . g) . h` to `f . (g . h)`
/// - `prod-beta1`: `fst . <f, g>` to `f`
/// - `prod-beta2`: `snd . <f, g>` to `g`
/// - `exp-beta`: `eps . <curry(g) . p, q>` to `g . <p, q>`, and directly to
///   `g` when `p = fst`, `q = snd`
/// - `prod-eta`: `<fst . h, snd . h>` to `h`, including `<fst, snd>` to `id`
/// - `exp-eta`: `curry(eps . <k . fst, snd>)` to `k`, including
///   `curry(eps)` to `id`
/// - `term`: any morphism into `O` other than `bang` collapses to `bang`
pub const RULE_NAMES: [&str; 9] = [
    "cat-l",
    "cat-r",
    "assoc",
    "prod-beta1",
    "prod-beta2",
    "exp-beta",
    "prod-eta",
    "exp-eta",
    "term",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: &'static str,
    pub before: MorExpr,
    pub after: MorExpr,
}

/// The chained record of a normalization run: `after` of each step is
/// `before` of the next.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Flatten the right-leaning spine of a composition.
fn chain(m: &MorExpr) -> Vec<&MorExpr> {
    let mut parts = Vec::new();
    let mut cur = m;
    while let MorExpr::Compose(outer, inner) = cur {
        parts.push(&**outer);
        cur = inner;
    }
    parts.push(cur);
    parts
}

fn rebuild_chain(parts: &[&MorExpr]) -> MorExpr {
    let mut it = parts.iter().rev();
    let mut acc = (*it.next().expect("chain is never empty")).clone();
    for p in it {
        acc = MorExpr::compose((*p).clone(), acc);
    }
    acc
}

/// Try the rules at the root of `m`, in priority order.
fn try_rules(m: &MorExpr) -> Option<(&'static str, MorExpr)> {
    if let MorExpr::Compose(outer, inner) = m {
        if matches!(**outer, MorExpr::Id(_)) {
            return Some(("cat-l", (**inner).clone()));
        }
        if matches!(**inner, MorExpr::Id(_)) {
            return Some(("cat-r", (**outer).clone()));
        }
        if let MorExpr::Compose(f, g) = &**outer {
            return Some((
                "assoc",
                MorExpr::compose(
                    (**f).clone(),
                    MorExpr::compose((**g).clone(), (**inner).clone()),
                ),
            ));
        }
        match (&**outer, &**inner) {
            (MorExpr::Fst(_, _), MorExpr::Pair(f, _)) => {
                return Some(("prod-beta1", (**f).clone()));
            }
            (MorExpr::Snd(_, _), MorExpr::Pair(_, g)) => {
                return Some(("prod-beta2", (**g).clone()));
            }
            (MorExpr::EvalMap(_, _), MorExpr::Pair(leg, q)) => match &**leg {
                MorExpr::Compose(head, p) if matches!(**head, MorExpr::Curry(_)) => {
                    let g = match &**head {
                        MorExpr::Curry(g) => &**g,
                        _ => unreachable!(),
                    };
                    if let (MorExpr::Fst(l1, r1), MorExpr::Snd(l2, r2)) = (&**p, &**q) {
                        if l1 == l2 && r1 == r2 {
                            return Some(("exp-beta", g.clone()));
                        }
                    }
                    return Some((
                        "exp-beta",
                        MorExpr::compose(
                            g.clone(),
                            MorExpr::pair((**p).clone(), (**q).clone()),
                        ),
                    ));
                }
                MorExpr::Curry(g) => {
                    if let Ok(t) = infer_type(q) {
                        return Some((
                            "exp-beta",
                            MorExpr::compose(
                                (**g).clone(),
                                MorExpr::pair(MorExpr::Id(t.dom), (**q).clone()),
                            ),
                        ));
                    }
                }
                _ => {}
            },
            _ => {}
        }
    }
    if let MorExpr::Pair(a, b) = m {
        if let (MorExpr::Fst(l1, r1), MorExpr::Snd(l2, r2)) = (&**a, &**b) {
            if l1 == l2 && r1 == r2 {
                return Some((
                    "prod-eta",
                    MorExpr::Id(DomExpr::prod(l1.clone(), r1.clone())),
                ));
            }
        }
        if let (MorExpr::Compose(fst, h1), MorExpr::Compose(snd, h2)) = (&**a, &**b) {
            if let (MorExpr::Fst(l1, r1), MorExpr::Snd(l2, r2)) = (&**fst, &**snd) {
                if l1 == l2 && r1 == r2 && h1 == h2 {
                    return Some(("prod-eta", (**h1).clone()));
                }
            }
        }
        // Instances modulo uniqueness into the terminal domain: a leg that
        // collapsed to bang is the projection leg of any parallel h.
        if let (MorExpr::Compose(fst, h), MorExpr::Bang(_)) = (&**a, &**b) {
            if matches!(&**fst, MorExpr::Fst(_, r) if *r == DomExpr::Terminal) {
                return Some(("prod-eta", (**h).clone()));
            }
        }
        if let (MorExpr::Bang(_), MorExpr::Compose(snd, h)) = (&**a, &**b) {
            if matches!(&**snd, MorExpr::Snd(l, _) if *l == DomExpr::Terminal) {
                return Some(("prod-eta", (**h).clone()));
            }
        }
        if let (MorExpr::Fst(l, r), MorExpr::Bang(d)) = (&**a, &**b) {
            if *r == DomExpr::Terminal && *d == DomExpr::prod(l.clone(), r.clone()) {
                return Some(("prod-eta", MorExpr::Id(d.clone())));
            }
        }
        if let (MorExpr::Bang(d), MorExpr::Snd(l, r)) = (&**a, &**b) {
            if *l == DomExpr::Terminal && *d == DomExpr::prod(l.clone(), r.clone()) {
                return Some(("prod-eta", MorExpr::Id(d.clone())));
            }
        }
    }
    if let MorExpr::Curry(body) = m {
        if let MorExpr::EvalMap(a, r) = &**body {
            return Some(("exp-eta", MorExpr::Id(DomExpr::exp(a.clone(), r.clone()))));
        }
        let body_parts = chain(body);
        if let MorExpr::Pair(x, snd) = body_parts[body_parts.len() - 1] {
            if let MorExpr::Snd(l2, r2) = &**snd {
                let parts = chain(x);
                if parts.len() >= 2 {
                    if let MorExpr::Fst(l1, r1) = parts[parts.len() - 1] {
                        if l1 == l2 && r1 == r2 {
                            let rest = rebuild_chain(&parts[..parts.len() - 1]);
                            let prefix = &body_parts[..body_parts.len() - 1];
                            // curry(eps . <k . fst, snd>) comes back to k;
                            // in general, curry(x . <rest . fst, snd>) is
                            // curry(x) . rest by the uniqueness of the
                            // correspondence.
                            match prefix {
                                [] => {}
                                [MorExpr::EvalMap(_, _)] => {
                                    return Some(("exp-eta", rest));
                                }
                                _ => {
                                    return Some((
                                        "exp-eta",
                                        MorExpr::compose(
                                            MorExpr::curry(rebuild_chain(prefix)),
                                            rest,
                                        ),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if !matches!(m, MorExpr::Bang(_)) {
        if let Ok(t) = infer_type(m) {
            if t.cod == DomExpr::Terminal {
                return Some(("term", MorExpr::Bang(t.dom)));
            }
        }
    }
    None
}

/// One leftmost-innermost rewrite step anywhere in `m`.
fn rewrite_once(m: &MorExpr) -> Option<(&'static str, MorExpr)> {
    match m {
        MorExpr::Compose(f, g) => {
            if let Some((rule, f2)) = rewrite_once(f) {
                return Some((rule, MorExpr::Compose(Box::new(f2), g.clone())));
            }
            if let Some((rule, g2)) = rewrite_once(g) {
                return Some((rule, MorExpr::Compose(f.clone(), Box::new(g2))));
            }
        }
        MorExpr::Pair(f, g) => {
            if let Some((rule, f2)) = rewrite_once(f) {
                return Some((rule, MorExpr::Pair(Box::new(f2), g.clone())));
            }
            if let Some((rule, g2)) = rewrite_once(g) {
                return Some((rule, MorExpr::Pair(f.clone(), Box::new(g2))));
            }
        }
        MorExpr::Curry(g) => {
            if let Some((rule, g2)) = rewrite_once(g) {
                return Some((rule, MorExpr::curry(g2)));
            }
        }
        _ => {}
    }
    try_rules(m)
}

/// Rewrite to fixpoint under the directed laws; the result is well-typed
/// with the same domain and codomain as the input.
pub fn normalize(m: &MorExpr) -> Result<(MorExpr, RewriteTrace), TypeError> {
    infer_type(m)?;
    let mut cur = m.clone();
    let mut steps = Vec::new();
    // Every rule shrinks the term except assoc (bounded by the left-spine
    // potential) and term on single nodes (fires at most once per node);
    // the limit only guards against rule bugs.
    let limit = 10_000 + 100 * m.size();
    while let Some((rule, next)) = rewrite_once(&cur) {
        steps.push(RewriteStep {
            rule,
            before: cur,
            after: next.clone(),
        });
        assert!(
            steps.len() <= limit,
            "rewriting exceeded {limit} steps; a rule fails to terminate"
        );
        cur = next;
    }
    Ok((cur, RewriteTrace { steps }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    /// Distinct, with the first enumerated input on which the sides differ.
    NotEqual(Value),
    /// Normal forms differ and no finite semantics can settle the question.
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equal => write!(f, "equal"),
            Verdict::NotEqual(v) => write!(f, "not-equal (at {v})"),
            Verdict::Undecided => write!(f, "undecided"),
        }
    }
}

/// Outcome of an equality query, with the normalization evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equality {
    pub verdict: Verdict,
    pub normal_left: MorExpr,
    pub normal_right: MorExpr,
    pub trace_left: RewriteTrace,
    pub trace_right: RewriteTrace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LawsError {
    Type(TypeError),
    NotParallel { left: MorType, right: MorType },
}

impl fmt::Display for LawsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawsError::Type(e) => e.fmt(f),
            LawsError::NotParallel { left, right } => {
                write!(f, "not parallel: `{left}` against `{right}`")
            }
        }
    }
}

impl std::error::Error for LawsError {}

impl From<TypeError> for LawsError {
    fn from(e: TypeError) -> Self {
        LawsError::Type(e)
    }
}

/// Decide equality of two parallel morphisms.
///
/// Normal forms that coincide syntactically are equal. Otherwise, with a
/// semantics supplied, both sides are evaluated on every inhabitant of the
/// common domain; the first disagreement is the counterexample. Without a
/// semantics, or when the domain cannot be enumerated or a symbolic
/// primitive cannot be evaluated, the verdict is `Undecided`.
pub fn equal(
    a: &MorExpr,
    b: &MorExpr,
    s: Option<&FiniteSemantics>,
) -> Result<Equality, LawsError> {
    let ta = infer_type(a)?;
    let tb = infer_type(b)?;
    if ta != tb {
        return Err(LawsError::NotParallel {
            left: ta,
            right: tb,
        });
    }
    let (na, tra) = normalize(a)?;
    let (nb, trb) = normalize(b)?;
    let mut verdict = if na == nb {
        Verdict::Equal
    } else {
        Verdict::Undecided
    };
    if verdict == Verdict::Undecided {
        if let Some(sem) = s {
            verdict = brute_force(a, b, &ta.dom, sem).unwrap_or(Verdict::Undecided);
        }
    }
    Ok(Equality {
        verdict,
        normal_left: na,
        normal_right: nb,
        trace_left: tra,
        trace_right: trb,
    })
}

fn brute_force(
    a: &MorExpr,
    b: &MorExpr,
    dom: &DomExpr,
    s: &FiniteSemantics,
) -> Option<Verdict> {
    let inputs = enumerate(dom, s).ok()?;
    for v in inputs {
        let ya = apply_mor(a, &v, s).ok()?;
        let yb = apply_mor(b, &v, s).ok()?;
        if !value_eq(&ya, &yb, Some(s)).ok()? {
            return Some(Verdict::NotEqual(v));
        }
    }
    Some(Verdict::Equal)
}

/// Per-rule record of the soundness battery.
#[derive(Debug, Clone)]
pub struct RuleCheck {
    pub rule: &'static str,
    pub instances: usize,
    pub inputs_checked: usize,
    pub failures: Vec<String>,
}

/// Report of [`soundness_battery`]: every directed law validated
/// element-wise, both on handcrafted instances and on every step the
/// rewriter takes on generated morphisms.
#[derive(Debug, Clone)]
pub struct BatteryReport {
    pub rules: Vec<RuleCheck>,
    pub generated_morphisms: usize,
    pub generated_steps: usize,
    pub failures: Vec<String>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.rules.iter().all(|r| r.failures.is_empty())
    }
}

/// Check that a single rewrite step did not change the map: the before and
/// after expressions agree on every enumerated input.
fn check_step_pointwise(
    step: &RewriteStep,
    s: &FiniteSemantics,
    failures: &mut Vec<String>,
) -> usize {
    let dom = match infer_type(&step.before) {
        Ok(t) => t.dom,
        Err(e) => {
            failures.push(format!("step `{}` has ill-typed before: {e}", step.rule));
            return 0;
        }
    };
    let inputs = match enumerate(&dom, s) {
        Ok(v) => v,
        Err(_) => return 0, // not enumerable under this semantics; skip
    };
    let mut checked = 0;
    for v in inputs {
        let ya = apply_mor(&step.before, &v, s);
        let yb = apply_mor(&step.after, &v, s);
        match (ya, yb) {
            (Ok(ya), Ok(yb)) => match value_eq(&ya, &yb, Some(s)) {
                Ok(true) => checked += 1,
                Ok(false) => failures.push(format!(
                    "rule {} changed the map at `{v}`: `{}` to `{}`",
                    step.rule, step.before, step.after
                )),
                Err(e) => failures.push(format!("rule {}: comparing at `{v}`: {e}", step.rule)),
            },
            (Err(_), _) | (_, Err(_)) => {} // symbolic primitive; skip this input
        }
    }
    checked
}

/// Handcrafted instances guaranteeing that every registered law is
/// exercised at least once, parameterized over a declared base domain.
fn rule_templates(s: &FiniteSemantics) -> Vec<(&'static str, MorExpr)> {
    let d = s
        .domains()
        .find(|(_, atoms)| !atoms.is_empty())
        .map(|(n, _)| DomExpr::base(n))
        .unwrap_or(DomExpr::Terminal);
    let dd = DomExpr::prod(d.clone(), d.clone());
    let fst = MorExpr::Fst(d.clone(), d.clone());
    let snd = MorExpr::Snd(d.clone(), d.clone());
    let ed = DomExpr::exp(d.clone(), d.clone());
    vec![
        (
            "cat-l",
            MorExpr::compose(MorExpr::Id(d.clone()), fst.clone()),
        ),
        (
            "cat-r",
            MorExpr::compose(fst.clone(), MorExpr::Id(dd.clone())),
        ),
        (
            "assoc",
            MorExpr::compose(
                MorExpr::compose(
                    MorExpr::Snd(d.clone(), d.clone()),
                    MorExpr::Fst(dd.clone(), d.clone()),
                ),
                MorExpr::Fst(DomExpr::prod(dd.clone(), d.clone()), d.clone()),
            ),
        ),
        (
            "prod-beta1",
            MorExpr::compose(fst.clone(), MorExpr::pair(snd.clone(), fst.clone())),
        ),
        (
            "prod-beta2",
            MorExpr::compose(snd.clone(), MorExpr::pair(snd.clone(), fst.clone())),
        ),
        (
            "exp-beta",
            MorExpr::compose(
                MorExpr::EvalMap(d.clone(), d.clone()),
                MorExpr::pair(
                    MorExpr::compose(MorExpr::curry(snd.clone()), fst.clone()),
                    snd.clone(),
                ),
            ),
        ),
        (
            "prod-eta",
            MorExpr::pair(
                MorExpr::compose(
                    MorExpr::Fst(d.clone(), d.clone()),
                    MorExpr::Snd(dd.clone(), dd.clone()),
                ),
                MorExpr::compose(
                    MorExpr::Snd(d.clone(), d.clone()),
                    MorExpr::Snd(dd.clone(), dd.clone()),
                ),
            ),
        ),
        (
            "exp-eta",
            MorExpr::curry(MorExpr::compose(
                MorExpr::EvalMap(d.clone(), d.clone()),
                MorExpr::pair(
                    MorExpr::compose(
                        MorExpr::Fst(ed.clone(), d.clone()),
                        MorExpr::Fst(DomExpr::prod(ed.clone(), d.clone()), d.clone()),
                    ),
                    MorExpr::Snd(DomExpr::prod(ed, d.clone()), d.clone()),
                ),
            )),
        ),
        (
            "term",
            MorExpr::compose(MorExpr::Bang(d.clone()), MorExpr::Fst(d.clone(), d)),
        ),
    ]
}

/// Run the rule-soundness battery over a semantics: each directed law is
/// instantiated and validated element-wise, and every rewrite step taken on
/// `generated` seeded morphisms is validated the same way.
pub fn soundness_battery(s: &FiniteSemantics, generated: usize, seed: u64) -> BatteryReport {
    use crate::gen::{MorGen, Rng};

    let mut rules: Vec<RuleCheck> = RULE_NAMES
        .iter()
        .map(|r| RuleCheck {
            rule: r,
            instances: 0,
            inputs_checked: 0,
            failures: Vec::new(),
        })
        .collect();
    let record = |step: &RewriteStep, s: &FiniteSemantics, rules: &mut Vec<RuleCheck>| {
        let entry = rules
            .iter_mut()
            .find(|r| r.rule == step.rule)
            .expect("every fired rule is registered");
        entry.instances += 1;
        let mut failures = Vec::new();
        entry.inputs_checked += check_step_pointwise(step, s, &mut failures);
        entry.failures.extend(failures);
    };

    let mut failures = Vec::new();
    for (expected_rule, m) in rule_templates(s) {
        match normalize(&m) {
            Ok((_, trace)) => {
                if !trace.steps.iter().any(|st| st.rule == expected_rule) {
                    failures.push(format!(
                        "template for {expected_rule} never fired it: `{m}`"
                    ));
                }
                for step in &trace.steps {
                    record(step, s, &mut rules);
                }
            }
            Err(e) => failures.push(format!("template for {expected_rule} is ill-typed: {e}")),
        }
    }

    let morgen = MorGen::new(s, 128);
    let mut rng = Rng::new(seed);
    let mut generated_steps = 0;
    for _ in 0..generated {
        let dom = morgen.random_dom(&mut rng);
        let cod = morgen.random_dom(&mut rng);
        let m = morgen.gen(&mut rng, &dom, &cod, 4);
        match normalize(&m) {
            Ok((_, trace)) => {
                generated_steps += trace.len();
                for step in &trace.steps {
                    record(step, s, &mut rules);
                }
            }
            Err(e) => failures.push(format!("generated morphism `{m}` is ill-typed: {e}")),
        }
    }

    BatteryReport {
        rules,
        generated_morphisms: generated,
        generated_steps,
        failures,
    }
}
