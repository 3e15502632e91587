//! Surface terms compiled to combinators through access pointers and
//! citation maps, plus an independent substitution-style evaluator used to
//! cross-check the compiler.
//!
//! Variables erase into projection composites at compile time: the context
//! resolves each name to an index from the right, and the index becomes
//! `snd . fst^k` over the left-nested environment shape. Constants become
//! `point(c) . bang`; function constants cite their table through
//! `curry(prim(f) . snd)`; abstraction curries the body compiled in the
//! extended context.
//!
//! Term files carry a context header naming the implicit rest and the
//! entries left to right, plus an optional `bind:` line annotating binders
//! that are not entries:
//!
//! ```text
//! ctx: E, y:Dy, x:Dx
//! bind: z:Dx
//! \z. $rot z
//! ```

use std::collections::BTreeMap;
use std::fmt;

use crate::dom::DomExpr;
use crate::machine::{apply_fn_value, enumerate, FiniteSemantics, FnTable, MachineError, Value};
use crate::mor::{access_path, infer_type, MorExpr, TypeError};
use crate::syntax::{ParseError, Parser, Tok};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LambdaTerm {
    Var(String),
    /// `#c`: a declared constant atom.
    ConstAtom(String),
    /// `$f`: a registered function constant.
    ConstFun(String),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
    Lam(String, Box<LambdaTerm>),
}

impl LambdaTerm {
    pub fn var(name: impl Into<String>) -> LambdaTerm {
        LambdaTerm::Var(name.into())
    }

    pub fn app(fun: LambdaTerm, arg: LambdaTerm) -> LambdaTerm {
        LambdaTerm::App(Box::new(fun), Box::new(arg))
    }

    pub fn lam(binder: impl Into<String>, body: LambdaTerm) -> LambdaTerm {
        LambdaTerm::Lam(binder.into(), Box::new(body))
    }
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaTerm::Var(x) => write!(f, "{x}"),
            LambdaTerm::ConstAtom(c) => write!(f, "#{c}"),
            LambdaTerm::ConstFun(n) => write!(f, "${n}"),
            LambdaTerm::Lam(x, body) => write!(f, "\\{x}. {body}"),
            LambdaTerm::App(fun, arg) => {
                match **fun {
                    LambdaTerm::Lam(_, _) => write!(f, "({fun})")?,
                    _ => write!(f, "{fun}")?,
                }
                write!(f, " ")?;
                match **arg {
                    LambdaTerm::App(_, _) | LambdaTerm::Lam(_, _) => write!(f, "({arg})"),
                    _ => write!(f, "{arg}"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LambdaError {
    Scope(String),
    UnannotatedBinder(String),
    NotAFunction { term: String, ty: String },
    ApplyNonFunction { value: String },
    Machine(MachineError),
    Type(TypeError),
}

impl fmt::Display for LambdaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaError::Scope(x) => write!(f, "unbound variable `{x}`"),
            LambdaError::UnannotatedBinder(x) => write!(
                f,
                "binder `{x}` has no domain annotation in the context declaration"
            ),
            LambdaError::NotAFunction { term, ty } => {
                write!(f, "`{term}` of type `{ty}` is applied but is not a function")
            }
            LambdaError::ApplyNonFunction { value } => {
                write!(f, "`{value}` is applied but is not a function")
            }
            LambdaError::Machine(e) => e.fmt(f),
            LambdaError::Type(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for LambdaError {}

impl From<MachineError> for LambdaError {
    fn from(e: MachineError) -> Self {
        LambdaError::Machine(e)
    }
}

impl From<TypeError> for LambdaError {
    fn from(e: TypeError) -> Self {
        LambdaError::Type(e)
    }
}

/// A typing context: the implicit rest `E`, the in-scope entries with the
/// rightmost innermost, and domain annotations for binders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    implicit_rest: DomExpr,
    entries: Vec<(String, DomExpr)>,
    annotations: BTreeMap<String, DomExpr>,
}

impl Context {
    pub fn new(implicit_rest: DomExpr) -> Context {
        Context {
            implicit_rest,
            entries: Vec::new(),
            annotations: BTreeMap::new(),
        }
    }

    /// Add an entry (and its annotation) at the innermost position.
    pub fn push(&mut self, name: impl Into<String>, dom: DomExpr) {
        let name = name.into();
        self.annotations.insert(name.clone(), dom.clone());
        self.entries.push((name, dom));
    }

    /// Annotate a binder without adding an environment slot.
    pub fn annotate(&mut self, name: impl Into<String>, dom: DomExpr) {
        self.annotations.insert(name.into(), dom);
    }

    pub fn implicit_rest(&self) -> &DomExpr {
        &self.implicit_rest
    }

    pub fn entries(&self) -> &[(String, DomExpr)] {
        &self.entries
    }

    /// The left-nested environment shape `(..(E x d0) x d1) ..`.
    pub fn shape(&self) -> DomExpr {
        DomExpr::left_nested(
            self.implicit_rest.clone(),
            self.entries.iter().map(|(_, d)| d.clone()),
        )
    }

    /// Index of a name counting from the right; the innermost occurrence
    /// wins, so extension shadows.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries
            .iter()
            .rev()
            .position(|(n, _)| n == name)
    }

    pub fn annotation(&self, name: &str) -> Option<&DomExpr> {
        self.annotations.get(name)
    }

    /// The context under a binder: the annotated domain becomes the
    /// innermost entry.
    pub fn extended(&self, name: &str) -> Result<Context, LambdaError> {
        let dom = self
            .annotation(name)
            .cloned()
            .ok_or_else(|| LambdaError::UnannotatedBinder(name.to_string()))?;
        let mut ctx = self.clone();
        ctx.entries.push((name.to_string(), dom));
        Ok(ctx)
    }
}

/// Compile a term to a combinator morphism with domain `ctx.shape()`.
pub fn compile(
    t: &LambdaTerm,
    ctx: &Context,
    s: &FiniteSemantics,
) -> Result<MorExpr, LambdaError> {
    match t {
        LambdaTerm::Var(x) => {
            let k = ctx
                .index_of(x)
                .ok_or_else(|| LambdaError::Scope(x.clone()))?;
            access_path(&ctx.shape(), k)
                .map_err(|e| LambdaError::Machine(MachineError::RuntimeTypeFault(e.to_string())))
        }
        LambdaTerm::ConstAtom(c) => {
            let base = s.point_domain(c)?.to_string();
            Ok(MorExpr::compose(
                MorExpr::Point(c.clone(), DomExpr::Base(base)),
                MorExpr::Bang(ctx.shape()),
            ))
        }
        LambdaTerm::ConstFun(f) => Ok(crate::machine::citation_fun(f, &ctx.shape(), s)?),
        LambdaTerm::App(fun, arg) => {
            // A function constant applied to an argument compiles to the
            // citation composite, so the theorem's right-hand side appears
            // literally in compiled output.
            if let LambdaTerm::ConstFun(f) = &**fun {
                let def = s.prim_def(f)?;
                let (fd, fc) = (def.dom.clone(), def.cod.clone());
                let cite = crate::machine::citation_fun(f, &ctx.shape(), s)?;
                let ca = compile(arg, ctx, s)?;
                return Ok(MorExpr::compose(
                    MorExpr::EvalMap(fd, fc),
                    MorExpr::pair(cite, ca),
                ));
            }
            let cm = compile(fun, ctx, s)?;
            let ca = compile(arg, ctx, s)?;
            let tm = infer_type(&cm)?;
            match tm.cod {
                DomExpr::Exp(a, r) => Ok(MorExpr::compose(
                    MorExpr::EvalMap(*a, *r),
                    MorExpr::pair(cm, ca),
                )),
                other => Err(LambdaError::NotAFunction {
                    term: fun.to_string(),
                    ty: other.to_string(),
                }),
            }
        }
        LambdaTerm::Lam(x, body) => {
            let inner = ctx.extended(x)?;
            Ok(MorExpr::curry(compile(body, &inner, s)?))
        }
    }
}

/// A value of the substitution-based oracle. Lambdas stay closures over the
/// name binding; everything first-order mirrors the machine's values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermValue {
    Unit,
    Atom(String, String),
    Pair(Box<TermValue>, Box<TermValue>),
    Lambda {
        binder: String,
        body: LambdaTerm,
        env: Bindings,
    },
    Prim(String),
    Table(FnTable),
}

pub type Bindings = BTreeMap<String, TermValue>;

impl fmt::Display for TermValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermValue::Unit => write!(f, "()"),
            TermValue::Atom(n, _) => write!(f, "{n}"),
            TermValue::Pair(l, r) => write!(f, "[{l}, {r}]"),
            TermValue::Lambda { binder, body, .. } => write!(f, "\\{binder}. {body}"),
            TermValue::Prim(n) => write!(f, "${n}"),
            TermValue::Table(_) => write!(f, "<table>"),
        }
    }
}

/// Direct environment-passing interpretation: the independent oracle the
/// compiler is checked against.
pub fn oracle_eval(
    t: &LambdaTerm,
    env: &Bindings,
    s: &FiniteSemantics,
) -> Result<TermValue, LambdaError> {
    match t {
        LambdaTerm::Var(x) => env
            .get(x)
            .cloned()
            .ok_or_else(|| LambdaError::Scope(x.clone())),
        LambdaTerm::ConstAtom(c) => {
            let base = s.point_domain(c)?.to_string();
            Ok(TermValue::Atom(c.clone(), base))
        }
        LambdaTerm::ConstFun(f) => {
            s.prim_def(f)?;
            Ok(TermValue::Prim(f.clone()))
        }
        LambdaTerm::Lam(x, body) => Ok(TermValue::Lambda {
            binder: x.clone(),
            body: (**body).clone(),
            env: env.clone(),
        }),
        LambdaTerm::App(fun, arg) => {
            let fv = oracle_eval(fun, env, s)?;
            let av = oracle_eval(arg, env, s)?;
            oracle_apply(&fv, av, s)
        }
    }
}

/// Apply an oracle function value to an argument.
pub fn oracle_apply(
    f: &TermValue,
    arg: TermValue,
    s: &FiniteSemantics,
) -> Result<TermValue, LambdaError> {
    match f {
        TermValue::Lambda { binder, body, env } => {
            let mut inner = env.clone();
            inner.insert(binder.clone(), arg);
            oracle_eval(body, &inner, s)
        }
        TermValue::Prim(name) => {
            let def = s.prim_def(name)?.clone();
            let key = term_to_value(&arg, &def.dom, s)?;
            for (k, out) in &def.table {
                if *k == key {
                    return from_value(out);
                }
            }
            Err(LambdaError::Machine(MachineError::RuntimeTypeFault(
                format!("table for `{name}` has no entry for `{key}`"),
            )))
        }
        TermValue::Table(t) => {
            let key = term_to_value(&arg, &t.arg, s)?;
            for (k, out) in &t.entries {
                if *k == key {
                    return from_value(out);
                }
            }
            Err(LambdaError::Machine(MachineError::RuntimeTypeFault(
                format!("table has no entry for `{key}`"),
            )))
        }
        other => Err(LambdaError::ApplyNonFunction {
            value: other.to_string(),
        }),
    }
}

/// Convert an oracle value to a machine value at an expected domain,
/// tabulating lambdas over their argument carrier.
pub fn term_to_value(
    tv: &TermValue,
    expected: &DomExpr,
    s: &FiniteSemantics,
) -> Result<Value, LambdaError> {
    match (tv, expected) {
        (TermValue::Unit, DomExpr::Terminal) => Ok(Value::Unit),
        (TermValue::Atom(n, d), DomExpr::Base(_)) => Ok(Value::Atom(n.clone(), d.clone())),
        (TermValue::Pair(l, r), DomExpr::Prod(a, b)) => Ok(Value::pair(
            term_to_value(l, a, s)?,
            term_to_value(r, b, s)?,
        )),
        (TermValue::Prim(n), DomExpr::Exp(_, _)) => Ok(Value::Prim(n.clone())),
        (TermValue::Table(t), DomExpr::Exp(_, _)) => Ok(Value::Table(t.clone())),
        (TermValue::Lambda { .. }, DomExpr::Exp(a, b)) => {
            let mut entries = Vec::new();
            for x in enumerate(a, s)? {
                let out = oracle_apply(tv, from_value(&x)?, s)?;
                entries.push((x, term_to_value(&out, b, s)?));
            }
            Ok(Value::Table(FnTable {
                arg: (**a).clone(),
                entries,
            }))
        }
        _ => Err(LambdaError::Machine(MachineError::RuntimeTypeFault(
            format!("oracle value `{tv}` does not fit `{expected}`"),
        ))),
    }
}

/// Lift a machine value into the oracle's value space. Machine closures
/// never flow into the oracle: enumeration produces tables, not closures.
pub fn from_value(v: &Value) -> Result<TermValue, LambdaError> {
    match v {
        Value::Unit => Ok(TermValue::Unit),
        Value::Atom(n, d) => Ok(TermValue::Atom(n.clone(), d.clone())),
        Value::Pair(l, r) => Ok(TermValue::Pair(
            Box::new(from_value(l)?),
            Box::new(from_value(r)?),
        )),
        Value::Prim(n) => Ok(TermValue::Prim(n.clone())),
        Value::Table(t) => Ok(TermValue::Table(t.clone())),
        Value::Closure(_, _) => Err(LambdaError::Machine(MachineError::RuntimeTypeFault(
            "machine closures do not flow into the oracle".to_string(),
        ))),
    }
}

/// Extensional agreement of a machine value and an oracle value at a type:
/// function values are compared pointwise over the enumerated argument
/// domain.
pub fn agree(
    machine: &Value,
    oracle: &TermValue,
    ty: &DomExpr,
    s: &FiniteSemantics,
) -> Result<bool, LambdaError> {
    match ty {
        DomExpr::Terminal => Ok(matches!(machine, Value::Unit) && matches!(oracle, TermValue::Unit)),
        DomExpr::Base(_) => match (machine, oracle) {
            (Value::Atom(n1, d1), TermValue::Atom(n2, d2)) => Ok(n1 == n2 && d1 == d2),
            _ => Ok(false),
        },
        DomExpr::Prod(a, b) => match (machine, oracle) {
            (Value::Pair(ml, mr), TermValue::Pair(ol, or)) => {
                Ok(agree(ml, ol, a, s)? && agree(mr, or, b, s)?)
            }
            _ => Ok(false),
        },
        DomExpr::Exp(a, r) => {
            for x in enumerate(a, s)? {
                let mv = apply_fn_value(machine, &x, s)?;
                let ov = oracle_apply(oracle, from_value(&x)?, s)?;
                if !agree(&mv, &ov, r, s)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Bind the entries of a context to the components of an environment
/// instance, for feeding the oracle.
pub fn bindings_of(ctx: &Context, instance: &Value) -> Result<Bindings, LambdaError> {
    let mut names: Vec<&str> = ctx.entries().iter().map(|(n, _)| n.as_str()).collect();
    let mut bindings = Bindings::new();
    let mut cursor = instance;
    while let Some(name) = names.pop() {
        match cursor {
            Value::Pair(rest, slot) => {
                bindings.insert(name.to_string(), from_value(slot)?);
                cursor = rest;
            }
            other => {
                return Err(LambdaError::Machine(MachineError::RuntimeTypeFault(
                    format!("instance `{other}` is shallower than the context"),
                )));
            }
        }
    }
    Ok(bindings)
}

// term := lam | app
// lam := "\" ident "." term
// app := atom+                  left associative
// atom := ident | "#" ident | "$" ident | "(" term ")"
fn term(p: &mut Parser) -> Result<LambdaTerm, ParseError> {
    if p.eat(&Tok::Backslash) {
        let binder = p.expect_ident()?;
        p.expect(&Tok::Dot)?;
        let body = term(p)?;
        return Ok(LambdaTerm::lam(binder, body));
    }
    let mut acc = term_atom(p)?
        .ok_or_else(|| p.error("expected a term"))?;
    while let Some(next) = term_atom(p)? {
        acc = LambdaTerm::app(acc, next);
    }
    Ok(acc)
}

fn term_atom(p: &mut Parser) -> Result<Option<LambdaTerm>, ParseError> {
    match p.peek() {
        Some(Tok::Ident(_)) => Ok(Some(LambdaTerm::Var(p.expect_ident()?))),
        Some(Tok::Hash) => {
            p.next();
            Ok(Some(LambdaTerm::ConstAtom(p.expect_ident()?)))
        }
        Some(Tok::Dollar) => {
            p.next();
            Ok(Some(LambdaTerm::ConstFun(p.expect_ident()?)))
        }
        Some(Tok::LParen) => {
            p.next();
            let t = term(p)?;
            p.expect(&Tok::RParen)?;
            Ok(Some(t))
        }
        _ => Ok(None),
    }
}

pub fn parse_term(source: &str) -> Result<LambdaTerm, ParseError> {
    let mut p = Parser::new(source)?;
    let t = term(&mut p)?;
    p.expect_end()?;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermFileError {
    Parse(ParseError),
    Header(String),
}

impl fmt::Display for TermFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermFileError::Parse(e) => e.fmt(f),
            TermFileError::Header(msg) => write!(f, "invalid term file: {msg}"),
        }
    }
}

impl std::error::Error for TermFileError {}

impl From<ParseError> for TermFileError {
    fn from(e: ParseError) -> Self {
        TermFileError::Parse(e)
    }
}

/// Parse a term file: a `ctx:` header, an optional `bind:` header, then
/// the term itself.
pub fn parse_term_file(source: &str) -> Result<(Context, LambdaTerm), TermFileError> {
    let mut ctx: Option<Context> = None;
    let mut term_lines: Vec<&str> = Vec::new();
    for raw_line in source.lines() {
        let stripped = match raw_line.find('#') {
            // `#c` is a constant atom, not a comment; only treat `#` as a
            // comment when followed by whitespace or end of line.
            Some(i) if raw_line[i + 1..]
                .chars()
                .next()
                .is_none_or(|c| c.is_whitespace()) => &raw_line[..i],
            _ => raw_line,
        };
        let line = stripped.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("ctx:") {
            if ctx.is_some() {
                return Err(TermFileError::Header("two ctx: headers".to_string()));
            }
            let mut p = Parser::new(rest)?;
            let implicit = p.dom()?;
            let mut c = Context::new(implicit);
            while p.eat(&Tok::Comma) {
                let name = p.expect_ident()?;
                p.expect(&Tok::Colon)?;
                let d = p.dom()?;
                if c.entries().iter().any(|(n, _)| *n == name) {
                    return Err(TermFileError::Header(format!(
                        "entry `{name}` is declared twice"
                    )));
                }
                c.push(name, d);
            }
            p.expect_end()?;
            ctx = Some(c);
            continue;
        }
        if let Some(rest) = line.strip_prefix("bind:") {
            let c = ctx
                .as_mut()
                .ok_or_else(|| TermFileError::Header("bind: before ctx:".to_string()))?;
            let mut p = Parser::new(rest)?;
            loop {
                let name = p.expect_ident()?;
                p.expect(&Tok::Colon)?;
                let d = p.dom()?;
                c.annotate(name, d);
                if !p.eat(&Tok::Comma) {
                    break;
                }
            }
            p.expect_end()?;
            continue;
        }
        term_lines.push(line);
    }
    let ctx = ctx.ok_or_else(|| TermFileError::Header("missing ctx: header".to_string()))?;
    if term_lines.is_empty() {
        return Err(TermFileError::Header("missing term".to_string()));
    }
    let t = parse_term(&term_lines.join(" "))?;
    Ok((ctx, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::apply_mor;

    fn sem() -> FiniteSemantics {
        let mut s = FiniteSemantics::new();
        s.add_domain("E", vec!["e1".into(), "e2".into()]);
        s.add_domain("Dx", vec!["p".into(), "q".into(), "r".into()]);
        s.add_domain("Dy", vec!["u".into(), "v".into(), "w".into()]);
        s.add_point("p", "Dx");
        s.add_point("q", "Dx");
        let dx = DomExpr::base("Dx");
        s.add_prim_fn("rot", dx.clone(), dx, |v| match v {
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

    fn ctx_yx() -> Context {
        let mut c = Context::new(DomExpr::base("E"));
        c.push("y", DomExpr::base("Dy"));
        c.push("x", DomExpr::base("Dx"));
        c
    }

    #[test]
    fn parse_basic_terms() {
        assert_eq!(
            parse_term("$f x").unwrap(),
            LambdaTerm::app(LambdaTerm::ConstFun("f".into()), LambdaTerm::var("x"))
        );
        assert_eq!(
            parse_term("\\x. x").unwrap(),
            LambdaTerm::lam("x", LambdaTerm::var("x"))
        );
        assert_eq!(
            parse_term("\\x. $f x").unwrap(),
            LambdaTerm::lam(
                "x",
                LambdaTerm::app(LambdaTerm::ConstFun("f".into()), LambdaTerm::var("x"))
            )
        );
        // Application is left associative.
        assert_eq!(
            parse_term("f a b").unwrap(),
            LambdaTerm::app(
                LambdaTerm::app(LambdaTerm::var("f"), LambdaTerm::var("a")),
                LambdaTerm::var("b")
            )
        );
        assert_eq!(
            parse_term("#p").unwrap(),
            LambdaTerm::ConstAtom("p".into())
        );
    }

    #[test]
    fn term_display_round_trips() {
        for src in ["\\x. $f x", "f a b", "f (a b)", "(\\x. x) y", "#p", "$rot"] {
            let t = parse_term(src).unwrap();
            assert_eq!(parse_term(&t.to_string()).unwrap(), t, "via `{t}`");
        }
    }

    #[test]
    fn innermost_variable_compiles_to_snd() {
        let s = sem();
        let ctx = ctx_yx();
        let m = compile(&LambdaTerm::var("x"), &ctx, &s).unwrap();
        assert_eq!(
            m,
            MorExpr::Snd(
                DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dy")),
                DomExpr::base("Dx")
            )
        );
    }

    #[test]
    fn outer_variable_compiles_to_snd_fst() {
        let s = sem();
        let ctx = ctx_yx();
        let m = compile(&LambdaTerm::var("y"), &ctx, &s).unwrap();
        assert_eq!(
            m,
            MorExpr::compose(
                MorExpr::Snd(DomExpr::base("E"), DomExpr::base("Dy")),
                MorExpr::Fst(
                    DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dy")),
                    DomExpr::base("Dx")
                )
            )
        );
    }

    #[test]
    fn unbound_variable_is_a_scope_error() {
        let s = sem();
        assert!(matches!(
            compile(&LambdaTerm::var("z"), &ctx_yx(), &s),
            Err(LambdaError::Scope(_))
        ));
    }

    #[test]
    fn applied_function_constant_evaluates_through_its_citation() {
        let s = sem();
        let ctx = ctx_yx();
        let t = parse_term("$rot x").unwrap();
        let m = compile(&t, &ctx, &s).unwrap();
        // The citation composite appears literally.
        let shape = ctx.shape();
        let dx = DomExpr::base("Dx");
        assert_eq!(
            m,
            MorExpr::compose(
                MorExpr::EvalMap(dx.clone(), dx.clone()),
                MorExpr::pair(
                    MorExpr::curry(MorExpr::compose(
                        MorExpr::prim("rot", dx.clone(), dx.clone()),
                        MorExpr::Snd(shape.clone(), dx.clone())
                    )),
                    MorExpr::Snd(
                        DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dy")),
                        dx.clone()
                    )
                )
            )
        );
        // Evaluating at an environment whose x slot is p yields rot(p) = q.
        let i = Value::pair(
            Value::pair(Value::atom("e1", "E"), Value::atom("u", "Dy")),
            Value::atom("p", "Dx"),
        );
        assert_eq!(apply_mor(&m, &i, &s).unwrap(), Value::atom("q", "Dx"));
    }

    #[test]
    fn identity_abstraction_compiles_to_curried_snd() {
        let s = sem();
        let mut ctx = Context::new(DomExpr::base("E"));
        ctx.annotate("x", DomExpr::base("Dx"));
        let t = parse_term("\\x. x").unwrap();
        let m = compile(&t, &ctx, &s).unwrap();
        assert_eq!(
            m,
            MorExpr::curry(MorExpr::Snd(DomExpr::base("E"), DomExpr::base("Dx")))
        );
        // Its closure at any instance maps d to d.
        let e = Value::atom("e1", "E");
        let clo = apply_mor(&m, &e, &s).unwrap();
        for d in enumerate(&DomExpr::base("Dx"), &s).unwrap() {
            assert_eq!(apply_fn_value(&clo, &d, &s).unwrap(), d);
        }
    }

    #[test]
    fn constant_atom_compiles_via_point_and_bang() {
        let s = sem();
        let ctx = ctx_yx();
        let m = compile(&LambdaTerm::ConstAtom("p".into()), &ctx, &s).unwrap();
        assert_eq!(
            m,
            MorExpr::compose(
                MorExpr::point("p", DomExpr::base("Dx")),
                MorExpr::Bang(ctx.shape())
            )
        );
        let i = Value::pair(
            Value::pair(Value::atom("e2", "E"), Value::atom("v", "Dy")),
            Value::atom("r", "Dx"),
        );
        assert_eq!(apply_mor(&m, &i, &s).unwrap(), Value::atom("p", "Dx"));
    }

    #[test]
    fn unknown_constants_are_rejected() {
        let s = sem();
        let ctx = ctx_yx();
        assert!(matches!(
            compile(&LambdaTerm::ConstAtom("zz".into()), &ctx, &s),
            Err(LambdaError::Machine(MachineError::UnknownAtom { .. }))
        ));
        assert!(matches!(
            compile(&LambdaTerm::ConstFun("zz".into()), &ctx, &s),
            Err(LambdaError::Machine(MachineError::UnknownPrimitive(_)))
        ));
    }

    #[test]
    fn unannotated_binder_is_rejected() {
        let s = sem();
        let ctx = Context::new(DomExpr::base("E"));
        assert!(matches!(
            compile(&parse_term("\\z. z").unwrap(), &ctx, &s),
            Err(LambdaError::UnannotatedBinder(_))
        ));
    }

    #[test]
    fn compiled_terms_have_the_context_shape_as_domain() {
        let s = sem();
        let ctx = ctx_yx();
        for src in ["x", "y", "$rot x", "\\x. $rot x", "#q", "(\\x. x) x"] {
            let t = parse_term(src).unwrap();
            let m = compile(&t, &ctx, &s).unwrap();
            let ty = infer_type(&m).unwrap();
            assert_eq!(ty.dom, ctx.shape(), "term `{src}`");
        }
    }

    #[test]
    fn oracle_matches_table_lookup() {
        let s = sem();
        let t = parse_term("$rot x").unwrap();
        let mut env = Bindings::new();
        env.insert("x".into(), TermValue::Atom("p".into(), "Dx".into()));
        assert_eq!(
            oracle_eval(&t, &env, &s).unwrap(),
            TermValue::Atom("q".into(), "Dx".into())
        );
    }

    #[test]
    fn oracle_variable_and_identity() {
        let s = sem();
        let mut env = Bindings::new();
        env.insert("x".into(), TermValue::Atom("r".into(), "Dx".into()));
        assert_eq!(
            oracle_eval(&parse_term("x").unwrap(), &env, &s).unwrap(),
            TermValue::Atom("r".into(), "Dx".into())
        );
        assert_eq!(
            oracle_eval(&parse_term("(\\z. z) x").unwrap(), &env, &s).unwrap(),
            TermValue::Atom("r".into(), "Dx".into())
        );
    }

    #[test]
    fn oracle_rejects_applying_non_functions() {
        let s = sem();
        let mut env = Bindings::new();
        env.insert("x".into(), TermValue::Atom("p".into(), "Dx".into()));
        assert!(matches!(
            oracle_eval(&parse_term("x x").unwrap(), &env, &s),
            Err(LambdaError::ApplyNonFunction { .. })
        ));
    }

    #[test]
    fn compiled_and_oracle_agree_on_every_instance() {
        let s = sem();
        let ctx = ctx_yx();
        for src in ["x", "y", "$rot x", "$rot ($rot x)", "\\z. x", "(\\z. $rot z) x", "#q"] {
            let t = parse_term(src).unwrap();
            let mut ctx = ctx.clone();
            ctx.annotate("z", DomExpr::base("Dx"));
            let m = compile(&t, &ctx, &s).unwrap();
            let ty = infer_type(&m).unwrap();
            for i in enumerate(&ctx.shape(), &s).unwrap() {
                let mv = apply_mor(&m, &i, &s).unwrap();
                let ov = oracle_eval(&t, &bindings_of(&ctx, &i).unwrap(), &s).unwrap();
                assert!(
                    agree(&mv, &ov, &ty.cod, &s).unwrap(),
                    "term `{src}` differs at `{i}`: machine `{mv}`, oracle `{ov}`"
                );
            }
        }
    }

    #[test]
    fn term_file_with_headers() {
        let text = "\
# identity over the x slot
ctx: E, y:Dy, x:Dx
bind: z:Dx
\\z. $rot z
";
        let (ctx, t) = parse_term_file(text).unwrap();
        assert_eq!(ctx.entries().len(), 2);
        assert_eq!(ctx.annotation("z"), Some(&DomExpr::base("Dx")));
        assert_eq!(t, parse_term("\\z. $rot z").unwrap());
        assert_eq!(
            ctx.shape(),
            DomExpr::left_nested(
                DomExpr::base("E"),
                [DomExpr::base("Dy"), DomExpr::base("Dx")]
            )
        );
    }

    #[test]
    fn term_file_requires_the_header() {
        assert!(matches!(
            parse_term_file("\\x. x\n"),
            Err(TermFileError::Header(_))
        ));
        assert!(matches!(
            parse_term_file("ctx: E, x:Dx, x:Dx\nx\n"),
            Err(TermFileError::Header(_))
        ));
    }

    #[test]
    fn shadowing_resolves_to_the_innermost_binder() {
        let s = sem();
        let ctx = ctx_yx();
        // \x. x rebinds x; the body must point at the new slot, and the
        // result ignores the environment's x slot.
        let t = parse_term("(\\x. x) y").unwrap();
        let m = compile(&t, &ctx, &s).unwrap();
        for i in enumerate(&ctx.shape(), &s).unwrap() {
            let mv = apply_mor(&m, &i, &s).unwrap();
            let ov = oracle_eval(&t, &bindings_of(&ctx, &i).unwrap(), &s).unwrap();
            assert!(agree(&mv, &ov, &DomExpr::base("Dy"), &s).unwrap());
        }
    }
}
