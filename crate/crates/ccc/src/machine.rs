//! Operational semantics over finite base domains.
//!
//! A [`FiniteSemantics`] declares carriers for base domains, total lookup
//! tables for function constants, and the base domain of each point
//! constant. Every domain built from declared bases can be enumerated, so
//! every equation can be checked exhaustively. Singleton domains `{a}` are
//! resolved structurally: their carrier is the one atom between the braces.

use std::collections::BTreeMap;
use std::fmt;

use crate::dom::DomExpr;
use crate::mor::{infer_type, MorExpr};
use crate::syntax::{ParseError, Parser, RawValue, Tok};

/// A semantic element.
///
/// Closures store the uncompiled body morphism together with the captured
/// environment instance, mirroring how currying produces them. Synthesized
/// inhabitants of a function space carry their lookup table inline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    /// The sole element of the terminal domain.
    Unit,
    /// An atom together with the base domain it is typed at.
    Atom(String, String),
    Pair(Box<Value>, Box<Value>),
    /// Result of applying a curried morphism: body plus captured instance.
    Closure(Box<MorExpr>, Box<Value>),
    /// A registered function constant as an element of a function space.
    Prim(String),
    /// A total lookup table, e.g. an enumerated inhabitant of `A -> B`.
    Table(FnTable),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnTable {
    pub arg: DomExpr,
    pub entries: Vec<(Value, Value)>,
}

impl Value {
    pub fn atom(name: impl Into<String>, domain: impl Into<String>) -> Value {
        Value::Atom(name.into(), domain.into())
    }

    pub fn pair(left: Value, right: Value) -> Value {
        Value::Pair(Box::new(left), Box::new(right))
    }

    fn is_function(&self) -> bool {
        matches!(self, Value::Closure(_, _) | Value::Prim(_) | Value::Table(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "()"),
            Value::Atom(name, _) => write!(f, "{name}"),
            Value::Pair(l, r) => write!(f, "[{l}, {r}]"),
            Value::Closure(body, captured) => write!(f, "closure({body} @ {captured})"),
            Value::Prim(name) => write!(f, "${name}"),
            Value::Table(t) => {
                write!(f, "{{")?;
                for (i, (k, v)) in t.entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k} |-> {v}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineError {
    UnknownDomain(String),
    SizeLimit {
        domain: DomExpr,
        count: u128,
        cap: u64,
    },
    UnknownPrimitive(String),
    UnknownAtom {
        atom: String,
        domain: String,
    },
    ShapeError {
        expected: &'static str,
        found: DomExpr,
    },
    /// A value fed to a morphism does not inhabit its domain; unreachable
    /// from pipelines that typecheck and elaborate their inputs.
    RuntimeTypeFault(String),
    BadLiteral {
        literal: String,
        expected: DomExpr,
        detail: String,
    },
}

impl fmt::Display for MachineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineError::UnknownDomain(name) => write!(f, "unknown domain `{name}`"),
            MachineError::SizeLimit { domain, count, cap } => write!(
                f,
                "domain `{domain}` has {count} inhabitants, over the cap of {cap}"
            ),
            MachineError::UnknownPrimitive(name) => write!(f, "unknown primitive `{name}`"),
            MachineError::UnknownAtom { atom, domain } => {
                write!(f, "atom `{atom}` is not in domain `{domain}`")
            }
            MachineError::ShapeError { expected, found } => {
                write!(f, "expected {expected}, found `{found}`")
            }
            MachineError::RuntimeTypeFault(detail) => write!(f, "runtime type fault: {detail}"),
            MachineError::BadLiteral {
                literal,
                expected,
                detail,
            } => write!(
                f,
                "literal `{literal}` does not inhabit `{expected}`: {detail}"
            ),
        }
    }
}

impl std::error::Error for MachineError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimDef {
    pub dom: DomExpr,
    pub cod: DomExpr,
    pub table: Vec<(Value, Value)>,
}

pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSemantics {
    domains: BTreeMap<String, Vec<String>>,
    prims: BTreeMap<String, PrimDef>,
    points: BTreeMap<String, String>,
    cap: u64,
}

impl Default for FiniteSemantics {
    fn default() -> Self {
        FiniteSemantics::new()
    }
}

impl FiniteSemantics {
    pub fn new() -> FiniteSemantics {
        FiniteSemantics {
            domains: BTreeMap::new(),
            prims: BTreeMap::new(),
            points: BTreeMap::new(),
            cap: DEFAULT_CAP,
        }
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn set_cap(&mut self, cap: u64) {
        self.cap = cap;
    }

    pub fn add_domain(&mut self, name: impl Into<String>, atoms: Vec<String>) {
        self.domains.insert(name.into(), atoms);
    }

    pub fn add_point(&mut self, atom: impl Into<String>, base: impl Into<String>) {
        self.points.insert(atom.into(), base.into());
    }

    pub fn add_prim(
        &mut self,
        name: impl Into<String>,
        dom: DomExpr,
        cod: DomExpr,
        table: Vec<(Value, Value)>,
    ) {
        self.prims.insert(name.into(), PrimDef { dom, cod, table });
    }

    /// Register a primitive by tabulating `f` over the enumeration of `dom`.
    pub fn add_prim_fn(
        &mut self,
        name: impl Into<String>,
        dom: DomExpr,
        cod: DomExpr,
        f: impl Fn(&Value) -> Value,
    ) -> Result<(), MachineError> {
        let table = enumerate(&dom, self)?
            .into_iter()
            .map(|k| {
                let v = f(&k);
                (k, v)
            })
            .collect();
        self.prims.insert(name.into(), PrimDef { dom, cod, table });
        Ok(())
    }

    /// The ordered carrier of a base domain name. Singleton names `{a}`
    /// resolve structurally to the one atom inside the braces.
    pub fn carrier(&self, name: &str) -> Result<Vec<String>, MachineError> {
        if let Some(atom) = DomExpr::singleton_atom(name) {
            return Ok(vec![atom.to_string()]);
        }
        self.domains
            .get(name)
            .cloned()
            .ok_or_else(|| MachineError::UnknownDomain(name.to_string()))
    }

    pub fn prim_def(&self, name: &str) -> Result<&PrimDef, MachineError> {
        self.prims
            .get(name)
            .ok_or_else(|| MachineError::UnknownPrimitive(name.to_string()))
    }

    pub fn point_domain(&self, atom: &str) -> Result<&str, MachineError> {
        self.points
            .get(atom)
            .map(String::as_str)
            .ok_or_else(|| MachineError::UnknownAtom {
                atom: atom.to_string(),
                domain: "<declared points>".to_string(),
            })
    }

    pub fn domains(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.domains.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn prims(&self) -> impl Iterator<Item = (&str, &PrimDef)> {
        self.prims.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn points(&self) -> impl Iterator<Item = (&str, &str)> {
        self.points.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Check table totality and membership of every declared point, and
    /// canonicalize table entry order to the enumeration order.
    pub fn validate(&mut self) -> Result<(), MachineError> {
        for (atom, base) in self.points.clone() {
            let carrier = self.carrier(&base)?;
            if !carrier.contains(&atom) {
                return Err(MachineError::UnknownAtom { atom, domain: base });
            }
        }
        let names: Vec<String> = self.prims.keys().cloned().collect();
        for name in names {
            let def = self.prims.get(&name).unwrap().clone();
            let keys = enumerate(&def.dom, self)?;
            let mut canonical = Vec::with_capacity(keys.len());
            for key in &keys {
                let hits: Vec<&(Value, Value)> =
                    def.table.iter().filter(|(k, _)| k == key).collect();
                match hits.as_slice() {
                    [(_, out)] => canonical.push((key.clone(), out.clone())),
                    [] => {
                        return Err(MachineError::RuntimeTypeFault(format!(
                            "table for `{name}` is missing an entry for `{key}`"
                        )));
                    }
                    _ => {
                        return Err(MachineError::RuntimeTypeFault(format!(
                            "table for `{name}` maps `{key}` more than once"
                        )));
                    }
                }
            }
            if def.table.len() != keys.len() {
                return Err(MachineError::RuntimeTypeFault(format!(
                    "table for `{name}` has {} entries, expected {}",
                    def.table.len(),
                    keys.len()
                )));
            }
            for (_, out) in &canonical {
                if !inhabits(out, &def.cod, self)? {
                    return Err(MachineError::RuntimeTypeFault(format!(
                        "table for `{name}` produces `{out}` outside `{}`",
                        def.cod
                    )));
                }
            }
            self.prims.get_mut(&name).unwrap().table = canonical;
        }
        Ok(())
    }

    /// Render in the semantics file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (name, atoms) in &self.domains {
            out.push_str(&format!("domain {name} = {{{}}}\n", atoms.join(", ")));
        }
        for (name, def) in &self.prims {
            let entries: Vec<String> = def
                .table
                .iter()
                .map(|(k, v)| format!("{k} |-> {v}"))
                .collect();
            out.push_str(&format!(
                "prim {name} : {} -> {} = {{{}}}\n",
                def.dom,
                def.cod,
                entries.join(", ")
            ));
        }
        for (atom, base) in &self.points {
            out.push_str(&format!("point {atom} : {base}\n"));
        }
        out
    }
}

/// How many inhabitants a domain has under `s`, without materializing them.
pub fn count_inhabitants(d: &DomExpr, s: &FiniteSemantics) -> Result<u128, MachineError> {
    let overflow = || MachineError::SizeLimit {
        domain: d.clone(),
        count: u128::MAX,
        cap: s.cap(),
    };
    match d {
        DomExpr::Terminal => Ok(1),
        DomExpr::Base(name) => Ok(s.carrier(name)?.len() as u128),
        DomExpr::Prod(l, r) => {
            let cl = count_inhabitants(l, s)?;
            let cr = count_inhabitants(r, s)?;
            cl.checked_mul(cr).ok_or_else(overflow)
        }
        DomExpr::Exp(a, r) => {
            let ca = count_inhabitants(a, s)?;
            let cr = count_inhabitants(r, s)?;
            let mut acc: u128 = 1;
            for _ in 0..ca {
                acc = acc.checked_mul(cr).ok_or_else(overflow)?;
                if acc > s.cap() as u128 {
                    return Err(MachineError::SizeLimit {
                        domain: d.clone(),
                        count: acc,
                        cap: s.cap(),
                    });
                }
            }
            Ok(acc)
        }
    }
}

/// Every inhabitant of `d`, exactly once, in a deterministic order:
/// carriers in declaration order, products lexicographic with the left
/// component outermost, function spaces as all total tables with the first
/// argument's image most significant.
pub fn enumerate(d: &DomExpr, s: &FiniteSemantics) -> Result<Vec<Value>, MachineError> {
    let count = count_inhabitants(d, s)?;
    if count > s.cap() as u128 {
        return Err(MachineError::SizeLimit {
            domain: d.clone(),
            count,
            cap: s.cap(),
        });
    }
    fn go(d: &DomExpr, s: &FiniteSemantics) -> Result<Vec<Value>, MachineError> {
        match d {
            DomExpr::Terminal => Ok(vec![Value::Unit]),
            DomExpr::Base(name) => Ok(s
                .carrier(name)?
                .into_iter()
                .map(|a| Value::Atom(a, name.clone()))
                .collect()),
            DomExpr::Prod(l, r) => {
                let ls = go(l, s)?;
                let rs = go(r, s)?;
                let mut out = Vec::with_capacity(ls.len() * rs.len());
                for lv in &ls {
                    for rv in &rs {
                        out.push(Value::pair(lv.clone(), rv.clone()));
                    }
                }
                Ok(out)
            }
            DomExpr::Exp(a, r) => {
                let args = go(a, s)?;
                let outs = go(r, s)?;
                let n = args.len();
                let base = outs.len();
                let mut total: usize = 1;
                for _ in 0..n {
                    total *= base;
                }
                let mut tables = Vec::with_capacity(total);
                for idx in 0..total {
                    // Mixed-radix digits of idx, first argument most
                    // significant. total > 0 forces base > 0 when n > 0.
                    let mut entries = Vec::with_capacity(n);
                    let mut weight = total;
                    for arg in &args {
                        weight /= base;
                        let digit = (idx / weight) % base;
                        entries.push((arg.clone(), outs[digit].clone()));
                    }
                    tables.push(Value::Table(FnTable {
                        arg: (**a).clone(),
                        entries,
                    }));
                }
                Ok(tables)
            }
        }
    }
    go(d, s)
}

/// One step of a recorded evaluation: a morphism node with the value that
/// flowed in and the value that came out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalStep {
    pub morphism: MorExpr,
    pub input: Value,
    pub output: Value,
}

/// Run a morphism on a value.
pub fn apply_mor(m: &MorExpr, v: &Value, s: &FiniteSemantics) -> Result<Value, MachineError> {
    eval(m, v, s, &mut None)
}

/// Run a morphism on a value, recording every node's input and output in
/// post-order.
pub fn apply_mor_traced(
    m: &MorExpr,
    v: &Value,
    s: &FiniteSemantics,
) -> Result<(Value, Vec<EvalStep>), MachineError> {
    let mut trace = Some(Vec::new());
    let out = eval(m, v, s, &mut trace)?;
    Ok((out, trace.unwrap()))
}

fn fault(m: &MorExpr, v: &Value, want: &str) -> MachineError {
    MachineError::RuntimeTypeFault(format!("`{m}` applied to `{v}`, which is not {want}"))
}

fn eval(
    m: &MorExpr,
    v: &Value,
    s: &FiniteSemantics,
    trace: &mut Option<Vec<EvalStep>>,
) -> Result<Value, MachineError> {
    let out = match m {
        MorExpr::Id(_) => v.clone(),
        MorExpr::Compose(outer, inner) => {
            let mid = eval(inner, v, s, trace)?;
            eval(outer, &mid, s, trace)?
        }
        MorExpr::Fst(_, _) => match v {
            Value::Pair(l, _) => (**l).clone(),
            _ => return Err(fault(m, v, "a pair")),
        },
        MorExpr::Snd(_, _) => match v {
            Value::Pair(_, r) => (**r).clone(),
            _ => return Err(fault(m, v, "a pair")),
        },
        MorExpr::Pair(f, g) => {
            let l = eval(f, v, s, trace)?;
            let r = eval(g, v, s, trace)?;
            Value::pair(l, r)
        }
        MorExpr::Curry(g) => Value::Closure(g.clone(), Box::new(v.clone())),
        MorExpr::EvalMap(_, _) => match v {
            Value::Pair(fun, arg) => apply_fn_value_inner(fun, arg, s, trace)?,
            _ => return Err(fault(m, v, "a pair")),
        },
        MorExpr::Bang(_) => Value::Unit,
        MorExpr::Point(c, t) => {
            if !matches!(v, Value::Unit) {
                return Err(fault(m, v, "the unit value"));
            }
            match t {
                DomExpr::Base(b) => {
                    let carrier = s.carrier(b)?;
                    if !carrier.iter().any(|a| a == c) {
                        return Err(MachineError::UnknownAtom {
                            atom: c.clone(),
                            domain: b.clone(),
                        });
                    }
                    Value::Atom(c.clone(), b.clone())
                }
                other => {
                    return Err(MachineError::RuntimeTypeFault(format!(
                        "point `{c}` targets `{other}`, which is not a base domain"
                    )));
                }
            }
        }
        MorExpr::Prim(name, _, _) => {
            let def = s.prim_def(name)?;
            lookup_table(&def.table, v, s)?.ok_or_else(|| {
                MachineError::RuntimeTypeFault(format!(
                    "table for `{name}` has no entry for `{v}`"
                ))
            })?
        }
    };
    if let Some(steps) = trace {
        steps.push(EvalStep {
            morphism: m.clone(),
            input: v.clone(),
            output: out.clone(),
        });
    }
    Ok(out)
}

fn lookup_table(
    table: &[(Value, Value)],
    key: &Value,
    s: &FiniteSemantics,
) -> Result<Option<Value>, MachineError> {
    for (k, out) in table {
        if k == key {
            return Ok(Some(out.clone()));
        }
    }
    // Non-canonical keys (closures) only match extensionally.
    if key.is_function() || matches!(key, Value::Pair(_, _)) {
        for (k, out) in table {
            if value_eq(k, key, Some(s))? {
                return Ok(Some(out.clone()));
            }
        }
    }
    Ok(None)
}

/// Apply an element of a function space to an argument.
pub fn apply_fn_value(
    fun: &Value,
    arg: &Value,
    s: &FiniteSemantics,
) -> Result<Value, MachineError> {
    apply_fn_value_inner(fun, arg, s, &mut None)
}

fn apply_fn_value_inner(
    fun: &Value,
    arg: &Value,
    s: &FiniteSemantics,
    trace: &mut Option<Vec<EvalStep>>,
) -> Result<Value, MachineError> {
    match fun {
        Value::Closure(body, captured) => {
            let v = Value::pair((**captured).clone(), arg.clone());
            eval(body, &v, s, trace)
        }
        Value::Prim(name) => {
            let def = s.prim_def(name)?;
            lookup_table(&def.table, arg, s)?.ok_or_else(|| {
                MachineError::RuntimeTypeFault(format!(
                    "table for `{name}` has no entry for `{arg}`"
                ))
            })
        }
        Value::Table(t) => lookup_table(&t.entries, arg, s)?.ok_or_else(|| {
            MachineError::RuntimeTypeFault(format!("table has no entry for `{arg}`"))
        }),
        other => Err(MachineError::RuntimeTypeFault(format!(
            "`{other}` is not a function value"
        ))),
    }
}

/// The argument domain of a function value.
pub fn fn_arg_dom(fun: &Value, s: &FiniteSemantics) -> Result<DomExpr, MachineError> {
    match fun {
        Value::Closure(body, _) => {
            let t = infer_type(body)
                .map_err(|e| MachineError::RuntimeTypeFault(format!("closure body: {e}")))?;
            match t.dom {
                DomExpr::Prod(_, arg) => Ok(*arg),
                other => Err(MachineError::RuntimeTypeFault(format!(
                    "closure body domain `{other}` is not a product"
                ))),
            }
        }
        Value::Prim(name) => Ok(s.prim_def(name)?.dom.clone()),
        Value::Table(t) => Ok(t.arg.clone()),
        other => Err(MachineError::RuntimeTypeFault(format!(
            "`{other}` is not a function value"
        ))),
    }
}

/// Equality of values: structural, except that function values compare
/// extensionally (pointwise over the enumerated argument domain) when a
/// semantics is supplied.
pub fn value_eq(
    a: &Value,
    b: &Value,
    s: Option<&FiniteSemantics>,
) -> Result<bool, MachineError> {
    match (a, b) {
        (Value::Unit, Value::Unit) => Ok(true),
        (Value::Atom(n1, d1), Value::Atom(n2, d2)) => Ok(n1 == n2 && d1 == d2),
        (Value::Pair(l1, r1), Value::Pair(l2, r2)) => {
            Ok(value_eq(l1, l2, s)? && value_eq(r1, r2, s)?)
        }
        (fa, fb) if fa.is_function() && fb.is_function() => match s {
            Some(sem) => {
                let da = fn_arg_dom(fa, sem)?;
                let db = fn_arg_dom(fb, sem)?;
                if da != db {
                    return Ok(false);
                }
                for x in enumerate(&da, sem)? {
                    let ya = apply_fn_value(fa, &x, sem)?;
                    let yb = apply_fn_value(fb, &x, sem)?;
                    if !value_eq(&ya, &yb, s)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            None => Ok(a == b),
        },
        _ => Ok(false),
    }
}

/// Whether `v` inhabits `d` under the typing judgment for values.
pub fn inhabits(v: &Value, d: &DomExpr, s: &FiniteSemantics) -> Result<bool, MachineError> {
    match (v, d) {
        (Value::Unit, DomExpr::Terminal) => Ok(true),
        (Value::Atom(n, dn), DomExpr::Base(b)) => {
            Ok(dn == b && s.carrier(b)?.iter().any(|a| a == n))
        }
        (Value::Pair(l, r), DomExpr::Prod(a, b)) => {
            Ok(inhabits(l, a, s)? && inhabits(r, b, s)?)
        }
        (Value::Closure(body, captured), DomExpr::Exp(a, b)) => {
            let t = match infer_type(body) {
                Ok(t) => t,
                Err(_) => return Ok(false),
            };
            match t.dom {
                DomExpr::Prod(cap_dom, arg) => Ok(*arg == **a
                    && t.cod == **b
                    && inhabits(captured, &cap_dom, s)?),
                _ => Ok(false),
            }
        }
        (Value::Prim(name), DomExpr::Exp(a, b)) => {
            let def = s.prim_def(name)?;
            Ok(def.dom == **a && def.cod == **b)
        }
        (Value::Table(t), DomExpr::Exp(a, b)) => {
            if t.arg != **a {
                return Ok(false);
            }
            let keys = enumerate(a, s)?;
            if keys.len() != t.entries.len() {
                return Ok(false);
            }
            for (key, (k, out)) in keys.iter().zip(&t.entries) {
                if k != key || !inhabits(out, b, s)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Ok(false),
    }
}

/// Give a raw literal its domain.
pub fn elaborate(
    raw: &RawValue,
    expected: &DomExpr,
    s: &FiniteSemantics,
) -> Result<Value, MachineError> {
    let bad = |detail: String| MachineError::BadLiteral {
        literal: raw.to_string(),
        expected: expected.clone(),
        detail,
    };
    match (raw, expected) {
        (RawValue::Unit, DomExpr::Terminal) => Ok(Value::Unit),
        (RawValue::Atom(a), DomExpr::Base(b)) => {
            if s.carrier(b)?.iter().any(|x| x == a) {
                Ok(Value::Atom(a.clone(), b.clone()))
            } else {
                Err(bad(format!("atom `{a}` is not in the carrier of `{b}`")))
            }
        }
        (RawValue::Pair(l, r), DomExpr::Prod(a, b)) => Ok(Value::pair(
            elaborate(l, a, s)?,
            elaborate(r, b, s)?,
        )),
        (RawValue::Prim(name), DomExpr::Exp(a, b)) => {
            let def = s.prim_def(name)?;
            if def.dom == **a && def.cod == **b {
                Ok(Value::Prim(name.clone()))
            } else {
                Err(bad(format!(
                    "primitive `{name}` is typed `{} -> {}`",
                    def.dom, def.cod
                )))
            }
        }
        _ => Err(bad("shape mismatch".to_string())),
    }
}

/// The substitution pointer `<Fst . Fst, Snd>` for an input shape
/// `(E1 x D_old) x D_new`, typed `Env_old x D_new -> E1 x D_new`.
pub fn subst_morphism(env_shape: &DomExpr) -> Result<MorExpr, MachineError> {
    match env_shape {
        DomExpr::Prod(old, d_new) => match &**old {
            DomExpr::Prod(e1, d_old) => {
                let inner_fst = MorExpr::Fst((**old).clone(), (**d_new).clone());
                let outer_fst = MorExpr::Fst((**e1).clone(), (**d_old).clone());
                let snd = MorExpr::Snd((**old).clone(), (**d_new).clone());
                Ok(MorExpr::pair(MorExpr::compose(outer_fst, inner_fst), snd))
            }
            _ => Err(MachineError::ShapeError {
                expected: "a product of a product, `(E x D_old) x D_new`",
                found: env_shape.clone(),
            }),
        },
        _ => Err(MachineError::ShapeError {
            expected: "a product of a product, `(E x D_old) x D_new`",
            found: env_shape.clone(),
        }),
    }
}

/// The environment renewal of the encapsulation square: for shape
/// `(E x D_a) x {a}` the morphism `<Fst . Fst, Snd> : (E x D_a) x {a} -> E x {a}`.
pub fn encapsulate(atom: &str, env_shape: &DomExpr) -> Result<MorExpr, MachineError> {
    let single = DomExpr::singleton(atom);
    match env_shape {
        DomExpr::Prod(old, last) if **last == single => match &**old {
            DomExpr::Prod(_, da) if matches!(**da, DomExpr::Base(_)) => {
                subst_morphism(env_shape)
            }
            _ => Err(MachineError::ShapeError {
                expected: "a shape `(E x D_a) x {a}` with base `D_a`",
                found: env_shape.clone(),
            }),
        },
        _ => Err(MachineError::ShapeError {
            expected: "a shape `(E x D_a) x {a}` ending in the singleton of the atom",
            found: env_shape.clone(),
        }),
    }
}

/// The citation map of a constant: `curry(id[{c}] . snd[Env, {c}])`, typed
/// `Env -> ({c} -> {c})`. Its closure at any environment sends `c` to `c`.
pub fn citation_const(
    atom: &str,
    env_shape: &DomExpr,
    s: &FiniteSemantics,
) -> Result<MorExpr, MachineError> {
    s.point_domain(atom)?;
    let single = DomExpr::singleton(atom);
    Ok(MorExpr::curry(MorExpr::compose(
        MorExpr::Id(single.clone()),
        MorExpr::Snd(env_shape.clone(), single),
    )))
}

/// The citation map of a function constant: `curry(prim(f) . snd[Env, dom f])`,
/// typed `Env -> (dom f -> cod f)`. Its closure at any environment applies
/// the registered table.
pub fn citation_fun(
    name: &str,
    env_shape: &DomExpr,
    s: &FiniteSemantics,
) -> Result<MorExpr, MachineError> {
    let def = s.prim_def(name)?;
    Ok(MorExpr::curry(MorExpr::compose(
        MorExpr::Prim(name.to_string(), def.dom.clone(), def.cod.clone()),
        MorExpr::Snd(env_shape.clone(), def.dom.clone()),
    )))
}

/// Update an environment instance at its explicit slot: `[e, old], d`
/// becomes `[e, d]`. This is the substitution instance of updating; it
/// agrees with `apply_mor(subst_morphism(..), [old, d])` on every input.
pub fn update_env(old: &Value, d: &Value, shape: &DomExpr) -> Result<Value, MachineError> {
    if !shape.is_prod() {
        return Err(MachineError::RuntimeTypeFault(format!(
            "environment shape `{shape}` is not a product"
        )));
    }
    match old {
        Value::Pair(e, _) => Ok(Value::pair((**e).clone(), d.clone())),
        other => Err(MachineError::RuntimeTypeFault(format!(
            "environment instance `{other}` is not a pair"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemanticsFileError {
    Parse(ParseError),
    Invalid(String),
}

impl fmt::Display for SemanticsFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticsFileError::Parse(e) => e.fmt(f),
            SemanticsFileError::Invalid(msg) => write!(f, "invalid semantics: {msg}"),
        }
    }
}

impl std::error::Error for SemanticsFileError {}

impl From<ParseError> for SemanticsFileError {
    fn from(e: ParseError) -> Self {
        SemanticsFileError::Parse(e)
    }
}

/// Parse the semantics file format:
///
/// ```text
/// domain Dx = {p, q, r}
/// prim rot : Dx -> Dx = {p |-> q, q |-> r, r |-> p}
/// point p : Dx
/// ```
pub fn parse_semantics(source: &str) -> Result<FiniteSemantics, SemanticsFileError> {
    let mut p = Parser::new(source)?;
    let mut sem = FiniteSemantics::new();
    struct RawPrim {
        name: String,
        dom: DomExpr,
        cod: DomExpr,
        entries: Vec<(RawValue, RawValue)>,
    }
    let mut raw_prims: Vec<RawPrim> = Vec::new();
    while !p.at_end() {
        let keyword = p.expect_ident()?;
        match keyword.as_str() {
            "domain" => {
                let name = p.expect_ident()?;
                p.expect(&Tok::Eq)?;
                p.expect(&Tok::LBrace)?;
                let mut atoms = Vec::new();
                if !p.eat(&Tok::RBrace) {
                    loop {
                        atoms.push(p.expect_ident()?);
                        if p.eat(&Tok::RBrace) {
                            break;
                        }
                        p.expect(&Tok::Comma)?;
                    }
                }
                sem.add_domain(name, atoms);
            }
            "prim" => {
                let name = p.expect_ident()?;
                p.expect(&Tok::Colon)?;
                let ty = p.dom()?;
                let (dom, cod) = match ty {
                    DomExpr::Exp(a, b) => (*a, *b),
                    other => {
                        return Err(SemanticsFileError::Invalid(format!(
                            "primitive `{name}` needs an arrow type, found `{other}`"
                        )));
                    }
                };
                p.expect(&Tok::Eq)?;
                p.expect(&Tok::LBrace)?;
                let mut entries = Vec::new();
                if !p.eat(&Tok::RBrace) {
                    loop {
                        let k = p.raw_value()?;
                        p.expect(&Tok::MapsTo)?;
                        let v = p.raw_value()?;
                        entries.push((k, v));
                        if p.eat(&Tok::RBrace) {
                            break;
                        }
                        p.expect(&Tok::Comma)?;
                    }
                }
                raw_prims.push(RawPrim {
                    name,
                    dom,
                    cod,
                    entries,
                });
            }
            "point" => {
                let atom = p.expect_ident()?;
                p.expect(&Tok::Colon)?;
                let d = p.dom()?;
                match d {
                    DomExpr::Base(b) => sem.add_point(atom, b),
                    other => {
                        return Err(SemanticsFileError::Invalid(format!(
                            "point `{atom}` needs a base domain, found `{other}`"
                        )));
                    }
                }
            }
            other => {
                return Err(SemanticsFileError::Invalid(format!(
                    "unknown directive `{other}` (expected domain, prim, or point)"
                )));
            }
        }
    }
    for raw in raw_prims {
        let mut table = Vec::with_capacity(raw.entries.len());
        for (k, v) in &raw.entries {
            let key = elaborate(k, &raw.dom, &sem)
                .map_err(|e| SemanticsFileError::Invalid(format!("table for `{}`: {e}", raw.name)))?;
            let out = elaborate(v, &raw.cod, &sem)
                .map_err(|e| SemanticsFileError::Invalid(format!("table for `{}`: {e}", raw.name)))?;
            table.push((key, out));
        }
        sem.add_prim(raw.name, raw.dom, raw.cod, table);
    }
    sem.validate()
        .map_err(|e| SemanticsFileError::Invalid(e.to_string()))?;
    Ok(sem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::DomExpr;

    fn b2_sem() -> FiniteSemantics {
        let mut s = FiniteSemantics::new();
        s.add_domain("b2", vec!["p".into(), "q".into()]);
        s
    }

    fn env_sem() -> FiniteSemantics {
        let mut s = FiniteSemantics::new();
        s.add_domain("E", vec!["e1".into(), "e2".into()]);
        s.add_domain("Dx", vec!["p".into(), "q".into(), "r".into()]);
        s.add_domain("Dy", vec!["u".into(), "v".into(), "w".into()]);
        s.add_point("p", "Dx");
        s.add_point("q", "Dx");
        let dx = DomExpr::base("Dx");
        s.add_prim_fn("rot", dx.clone(), dx.clone(), |v| match v {
            Value::Atom(a, d) => {
                let next = match a.as_str() {
                    "p" => "q",
                    "q" => "r",
                    _ => "p",
                };
                Value::Atom(next.into(), d.clone())
            }
            _ => unreachable!(),
        })
        .unwrap();
        s.validate().unwrap();
        s
    }

    fn env_shape() -> DomExpr {
        DomExpr::left_nested(
            DomExpr::base("E"),
            [DomExpr::base("Dy"), DomExpr::base("Dx")],
        )
    }

    #[test]
    fn terminal_has_one_element() {
        let s = b2_sem();
        assert_eq!(enumerate(&DomExpr::Terminal, &s).unwrap(), vec![Value::Unit]);
    }

    #[test]
    fn product_enumeration_order() {
        let s = b2_sem();
        let d = DomExpr::prod(DomExpr::base("b2"), DomExpr::base("b2"));
        let vals = enumerate(&d, &s).unwrap();
        let a = |n: &str| Value::atom(n, "b2");
        assert_eq!(
            vals,
            vec![
                Value::pair(a("p"), a("p")),
                Value::pair(a("p"), a("q")),
                Value::pair(a("q"), a("p")),
                Value::pair(a("q"), a("q")),
            ]
        );
    }

    #[test]
    fn exponential_enumerates_all_four_tables() {
        let s = b2_sem();
        let b2 = DomExpr::base("b2");
        let d = DomExpr::exp(b2.clone(), b2.clone());
        let vals = enumerate(&d, &s).unwrap();
        let a = |n: &str| Value::atom(n, "b2");
        let table = |pq: (&str, &str)| {
            Value::Table(FnTable {
                arg: b2.clone(),
                entries: vec![(a("p"), a(pq.0)), (a("q"), a(pq.1))],
            })
        };
        assert_eq!(
            vals,
            vec![
                table(("p", "p")),
                table(("p", "q")),
                table(("q", "p")),
                table(("q", "q")),
            ]
        );
    }

    #[test]
    fn enumeration_respects_the_cap() {
        let mut s = b2_sem();
        s.set_cap(3);
        let d = DomExpr::prod(DomExpr::base("b2"), DomExpr::base("b2"));
        assert!(matches!(
            enumerate(&d, &s),
            Err(MachineError::SizeLimit { .. })
        ));
    }

    #[test]
    fn unknown_domain_is_reported() {
        let s = b2_sem();
        assert_eq!(
            enumerate(&DomExpr::base("nope"), &s),
            Err(MachineError::UnknownDomain("nope".into()))
        );
    }

    #[test]
    fn singleton_carrier_is_structural() {
        let s = b2_sem();
        let vals = enumerate(&DomExpr::singleton("a"), &s).unwrap();
        assert_eq!(vals, vec![Value::atom("a", "{a}")]);
        // A singleton exponential has exactly one table.
        let d = DomExpr::exp(DomExpr::singleton("a"), DomExpr::singleton("a"));
        assert_eq!(enumerate(&d, &s).unwrap().len(), 1);
    }

    #[test]
    fn projections_pick_components() {
        let s = env_sem();
        let i = Value::pair(Value::atom("e1", "E"), Value::atom("u", "Dy"));
        let d = Value::atom("p", "Dx");
        let v = Value::pair(i.clone(), d.clone());
        let shape = DomExpr::prod(
            DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dy")),
            DomExpr::base("Dx"),
        );
        let snd = MorExpr::Snd(
            DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dy")),
            DomExpr::base("Dx"),
        );
        assert_eq!(apply_mor(&snd, &v, &s).unwrap(), d);
        let fst = MorExpr::Fst(
            DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dy")),
            DomExpr::base("Dx"),
        );
        assert_eq!(apply_mor(&fst, &v, &s).unwrap(), i);
        let _ = shape;
    }

    #[test]
    fn identity_and_bang() {
        let s = env_sem();
        let v = Value::atom("p", "Dx");
        assert_eq!(
            apply_mor(&MorExpr::Id(DomExpr::base("Dx")), &v, &s).unwrap(),
            v
        );
        assert_eq!(
            apply_mor(&MorExpr::Bang(DomExpr::base("Dx")), &v, &s).unwrap(),
            Value::Unit
        );
    }

    #[test]
    fn eval_map_unfolds_closures() {
        let s = env_sem();
        // curry(snd) applied to i gives a closure; eval at d returns d.
        let shape = env_shape();
        let snd = MorExpr::Snd(shape.clone(), DomExpr::base("Dx"));
        let curried = MorExpr::curry(snd.clone());
        let i = enumerate(&shape, &s).unwrap()[0].clone();
        let d = Value::atom("q", "Dx");
        let clo = apply_mor(&curried, &i, &s).unwrap();
        assert_eq!(clo, Value::Closure(Box::new(snd), Box::new(i.clone())));
        let eps = MorExpr::EvalMap(DomExpr::base("Dx"), DomExpr::base("Dx"));
        let out = apply_mor(&eps, &Value::pair(clo, d.clone()), &s).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn eval_map_applies_prim_tables() {
        let s = env_sem();
        let eps = MorExpr::EvalMap(DomExpr::base("Dx"), DomExpr::base("Dx"));
        let out = apply_mor(
            &eps,
            &Value::pair(Value::Prim("rot".into()), Value::atom("p", "Dx")),
            &s,
        )
        .unwrap();
        assert_eq!(out, Value::atom("q", "Dx"));
    }

    #[test]
    fn point_checks_membership() {
        let s = env_sem();
        let m = MorExpr::point("p", DomExpr::base("Dx"));
        assert_eq!(
            apply_mor(&m, &Value::Unit, &s).unwrap(),
            Value::atom("p", "Dx")
        );
        let bad = MorExpr::point("z", DomExpr::base("Dx"));
        assert!(matches!(
            apply_mor(&bad, &Value::Unit, &s),
            Err(MachineError::UnknownAtom { .. })
        ));
    }

    #[test]
    fn runtime_fault_on_non_pair() {
        let s = env_sem();
        let m = MorExpr::Fst(DomExpr::base("Dx"), DomExpr::base("Dx"));
        assert!(matches!(
            apply_mor(&m, &Value::atom("p", "Dx"), &s),
            Err(MachineError::RuntimeTypeFault(_))
        ));
    }

    #[test]
    fn subst_behaves_like_the_pointer() {
        let s = env_sem();
        // Shape ((E x Dy) x Dx) x Dx, the old environment paired with the
        // incoming range.
        let env = env_shape();
        let full = DomExpr::prod(env.clone(), DomExpr::base("Dx"));
        let subst = subst_morphism(&full).unwrap();
        let t = infer_type(&subst).unwrap();
        assert_eq!(t.dom, full);
        assert_eq!(t.cod, env);
        // [[e, x], d] goes to [e, d].
        let e = Value::pair(Value::atom("e1", "E"), Value::atom("u", "Dy"));
        let old = Value::pair(e.clone(), Value::atom("p", "Dx"));
        let d = Value::atom("r", "Dx");
        let got = apply_mor(&subst, &Value::pair(old, d.clone()), &s).unwrap();
        assert_eq!(got, Value::pair(e, d));
    }

    #[test]
    fn subst_is_pointwise_idempotent_on_repeats() {
        let s = env_sem();
        let env = env_shape();
        let full = DomExpr::prod(env, DomExpr::base("Dx"));
        let subst = subst_morphism(&full).unwrap();
        let e = Value::pair(Value::atom("e2", "E"), Value::atom("v", "Dy"));
        let x = Value::atom("q", "Dx");
        let old = Value::pair(e, x.clone());
        // Substituting the value already present leaves the instance as is.
        let got = apply_mor(&subst, &Value::pair(old.clone(), x), &s).unwrap();
        assert_eq!(got, old);
    }

    #[test]
    fn subst_needs_a_nested_product() {
        let shape = DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dx"));
        assert!(matches!(
            subst_morphism(&shape),
            Err(MachineError::ShapeError { .. })
        ));
    }

    #[test]
    fn update_env_agrees_with_subst_everywhere() {
        let s = env_sem();
        let env = env_shape();
        let full = DomExpr::prod(env.clone(), DomExpr::base("Dx"));
        let subst = subst_morphism(&full).unwrap();
        for old in enumerate(&env, &s).unwrap() {
            for d in enumerate(&DomExpr::base("Dx"), &s).unwrap() {
                let via_mor = apply_mor(&subst, &Value::pair(old.clone(), d.clone()), &s).unwrap();
                let via_update = update_env(&old, &d, &env).unwrap();
                assert_eq!(via_mor, via_update);
            }
        }
    }

    #[test]
    fn citation_const_chain() {
        let s = env_sem();
        let env = env_shape();
        let cite = citation_const("p", &env, &s).unwrap();
        let t = infer_type(&cite).unwrap();
        assert_eq!(t.dom, env);
        assert_eq!(
            t.cod,
            DomExpr::exp(DomExpr::singleton("p"), DomExpr::singleton("p"))
        );
        let c = Value::atom("p", "{p}");
        for i in enumerate(&env, &s).unwrap() {
            let clo = apply_mor(&cite, &i, &s).unwrap();
            assert_eq!(apply_fn_value(&clo, &c, &s).unwrap(), c);
        }
    }

    #[test]
    fn citation_const_is_environment_independent() {
        let s = env_sem();
        let env = env_shape();
        let cite = citation_const("q", &env, &s).unwrap();
        let instances = enumerate(&env, &s).unwrap();
        let first = apply_mor(&cite, &instances[0], &s).unwrap();
        for i in &instances[1..] {
            let other = apply_mor(&cite, i, &s).unwrap();
            assert!(value_eq(&first, &other, Some(&s)).unwrap());
        }
    }

    #[test]
    fn citation_const_requires_declared_atom() {
        let s = env_sem();
        assert!(matches!(
            citation_const("nope", &env_shape(), &s),
            Err(MachineError::UnknownAtom { .. })
        ));
    }

    #[test]
    fn citation_fun_applies_the_table() {
        let s = env_sem();
        let env = env_shape();
        let cite = citation_fun("rot", &env, &s).unwrap();
        let rot = MorExpr::prim("rot", DomExpr::base("Dx"), DomExpr::base("Dx"));
        for i in enumerate(&env, &s).unwrap() {
            let clo = apply_mor(&cite, &i, &s).unwrap();
            for d in enumerate(&DomExpr::base("Dx"), &s).unwrap() {
                let via_clo = apply_fn_value(&clo, &d, &s).unwrap();
                let direct = apply_mor(&rot, &d, &s).unwrap();
                assert_eq!(via_clo, direct);
            }
        }
    }

    #[test]
    fn identity_table_citation_matches_the_identity_citation() {
        // A function constant whose table is the identity behaves exactly
        // like the curried `id . snd` pointer.
        let mut s = env_sem();
        let dx = DomExpr::base("Dx");
        s.add_prim_fn("idx", dx.clone(), dx.clone(), |v| v.clone())
            .unwrap();
        let env = env_shape();
        let via_table = citation_fun("idx", &env, &s).unwrap();
        let via_identity = MorExpr::curry(MorExpr::compose(
            MorExpr::Id(dx.clone()),
            MorExpr::Snd(env.clone(), dx),
        ));
        for i in enumerate(&env, &s).unwrap() {
            let a = apply_mor(&via_table, &i, &s).unwrap();
            let b = apply_mor(&via_identity, &i, &s).unwrap();
            assert!(value_eq(&a, &b, Some(&s)).unwrap());
        }
    }

    #[test]
    fn citation_fun_requires_registered_prim() {
        let s = env_sem();
        assert!(matches!(
            citation_fun("missing", &env_shape(), &s),
            Err(MachineError::UnknownPrimitive(_))
        ));
    }

    #[test]
    fn encapsulate_rebuilds_the_environment() {
        let mut s = env_sem();
        s.add_domain("Da", vec!["a".into()]);
        s.add_point("a", "{a}");
        // (E x Da) x {a} with Da a base range for the constant.
        let shape = DomExpr::prod(
            DomExpr::prod(DomExpr::base("E"), DomExpr::base("Da")),
            DomExpr::singleton("a"),
        );
        let enc = encapsulate("a", &shape).unwrap();
        let t = infer_type(&enc).unwrap();
        assert_eq!(
            t.cod,
            DomExpr::prod(DomExpr::base("E"), DomExpr::singleton("a"))
        );
        let e = Value::atom("e1", "E");
        let old = Value::pair(e.clone(), Value::atom("a", "Da"));
        let a = Value::atom("a", "{a}");
        let got = apply_mor(&enc, &Value::pair(old, a.clone()), &s).unwrap();
        assert_eq!(got, Value::pair(e.clone(), a.clone()));
        // Re-encapsulating leaves the singleton slot untouched.
        let again_shape = DomExpr::prod(
            DomExpr::prod(DomExpr::base("E"), DomExpr::singleton("a")),
            DomExpr::singleton("a"),
        );
        let enc2 = encapsulate("a", &again_shape).unwrap();
        let got2 = apply_mor(&enc2, &Value::pair(got.clone(), a), &s).unwrap();
        assert_eq!(got2, got);
    }

    #[test]
    fn encapsulate_rejects_wrong_shapes() {
        let shape = DomExpr::prod(
            DomExpr::prod(DomExpr::base("E"), DomExpr::base("Da")),
            DomExpr::base("Dx"),
        );
        assert!(matches!(
            encapsulate("a", &shape),
            Err(MachineError::ShapeError { .. })
        ));
    }

    #[test]
    fn update_env_single_point() {
        let env = DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dx"));
        let old = Value::pair(Value::atom("e1", "E"), Value::atom("p", "Dx"));
        let d = Value::atom("q", "Dx");
        let got = update_env(&old, &d, &env).unwrap();
        assert_eq!(got, Value::pair(Value::atom("e1", "E"), d));
        // A no-op update returns the same instance.
        let same = update_env(&old, &Value::atom("p", "Dx"), &env).unwrap();
        assert_eq!(same, old);
    }

    #[test]
    fn type_soundness_on_enumerated_inputs() {
        let s = env_sem();
        let env = env_shape();
        let morphisms = vec![
            MorExpr::Id(env.clone()),
            MorExpr::Bang(env.clone()),
            crate::mor::access_path(&env, 0).unwrap(),
            crate::mor::access_path(&env, 1).unwrap(),
            MorExpr::curry(MorExpr::Snd(env.clone(), DomExpr::base("Dx"))),
            MorExpr::pair(
                MorExpr::Fst(
                    DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dy")),
                    DomExpr::base("Dx"),
                ),
                MorExpr::Snd(
                    DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dy")),
                    DomExpr::base("Dx"),
                ),
            ),
        ];
        for m in morphisms {
            let t = infer_type(&m).unwrap();
            if t.dom != env {
                continue;
            }
            for v in enumerate(&env, &s).unwrap() {
                let out = apply_mor(&m, &v, &s).unwrap();
                assert!(
                    inhabits(&out, &t.cod, &s).unwrap(),
                    "{m} on {v} gave {out} outside {}",
                    t.cod
                );
            }
        }
    }

    #[test]
    fn elaborate_env_literal() {
        let s = env_sem();
        let shape = env_shape();
        let raw = crate::syntax::parse_raw_value("[[e1, u], q]").unwrap();
        let v = elaborate(&raw, &shape, &s).unwrap();
        assert_eq!(
            v,
            Value::pair(
                Value::pair(Value::atom("e1", "E"), Value::atom("u", "Dy")),
                Value::atom("q", "Dx")
            )
        );
        assert!(inhabits(&v, &shape, &s).unwrap());
        let bad = crate::syntax::parse_raw_value("[[e1, z], q]").unwrap();
        assert!(matches!(
            elaborate(&bad, &shape, &s),
            Err(MachineError::BadLiteral { .. })
        ));
    }

    #[test]
    fn semantics_file_round_trip() {
        let s = env_sem();
        let text = s.to_file_string();
        let parsed = parse_semantics(&text).unwrap();
        assert_eq!(parsed, s);
    }

    #[test]
    fn semantics_file_rejects_partial_tables() {
        let text = "domain Dx = {p, q}\nprim f : Dx -> Dx = {p |-> q}\n";
        assert!(matches!(
            parse_semantics(text),
            Err(SemanticsFileError::Invalid(_))
        ));
    }

    #[test]
    fn semantics_file_rejects_stray_points() {
        let text = "domain Dx = {p, q}\npoint z : Dx\n";
        assert!(matches!(
            parse_semantics(text),
            Err(SemanticsFileError::Invalid(_))
        ));
    }

    #[test]
    fn traced_evaluation_chains() {
        let s = env_sem();
        let env = env_shape();
        let m = crate::mor::access_path(&env, 1).unwrap();
        let v = enumerate(&env, &s).unwrap()[0].clone();
        let (out, steps) = apply_mor_traced(&m, &v, &s).unwrap();
        assert!(!steps.is_empty());
        assert_eq!(steps.last().unwrap().output, out);
        assert_eq!(steps.first().unwrap().input, v);
    }
}
