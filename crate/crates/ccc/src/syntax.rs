//! Textual syntax shared by the file formats and the command line.
//!
//! Morphisms: `id[D]`, `fst[A, B]`, `snd[A, B]`, `eps[A, R]`, `bang[D]`,
//! `point(c, D)`, `prim(name, A, R)`, `f . g` (composition, right operand
//! applied first), `<f, g>` (pairing), `curry(f)`, and `f * g` (functor
//! product, desugared while parsing).
//!
//! Domains: `O`, bare identifiers, `{a}` (singleton), `A x B` (left
//! associative), `A -> B` (right associative), parentheses. The identifier
//! `x` is reserved as the product operator inside domain expressions.
//!
//! Value literals: `[v, w]`, `()`, `$name` (function constant), bare atom.

use std::fmt;

use crate::dom::DomExpr;
use crate::mor::{desugar_functor_product, MorExpr, TypeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    Parse(ParseError),
    /// Desugaring a functor product needs both operands typed.
    Type(TypeError),
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntaxError::Parse(e) => e.fmt(f),
            SyntaxError::Type(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for SyntaxError {}

impl From<ParseError> for SyntaxError {
    fn from(e: ParseError) -> Self {
        SyntaxError::Parse(e)
    }
}

impl From<TypeError> for SyntaxError {
    fn from(e: TypeError) -> Self {
        SyntaxError::Type(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Comma,
    Dot,
    Star,
    Colon,
    Semi,
    Eq,
    Arrow,    // ->
    DArrow,   // =>
    MapsTo,   // |->
    Backslash,
    Hash,
    Dollar,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::DArrow => write!(f, "`=>`"),
            Tok::MapsTo => write!(f, "`|->`"),
            Tok::Backslash => write!(f, "`\\`"),
            Tok::Hash => write!(f, "`#`"),
            Tok::Dollar => write!(f, "`$`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub col: usize,
}

/// Tokenize `source`; `#` starts a comment running to end of line, except
/// when it immediately precedes an identifier (the constant-atom marker of
/// the term syntax, e.g. `#c`).
pub(crate) fn lex(source: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    fn advance(chars: &[char], i: &mut usize, line: &mut usize, col: &mut usize) -> char {
        let c = chars[*i];
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        c
    }

    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1usize;
    let mut col = 1usize;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                advance(&chars, &mut i, &mut line, &mut col);
            }
            '#' => {
                advance(&chars, &mut i, &mut line, &mut col);
                match chars.get(i) {
                    Some(&n) if n.is_ascii_alphabetic() || n == '_' => {
                        out.push((Tok::Hash, pos));
                    }
                    _ => {
                        while i < chars.len() && chars[i] != '\n' {
                            advance(&chars, &mut i, &mut line, &mut col);
                        }
                    }
                }
            }
            '=' => {
                advance(&chars, &mut i, &mut line, &mut col);
                if chars.get(i) == Some(&'>') {
                    advance(&chars, &mut i, &mut line, &mut col);
                    out.push((Tok::DArrow, pos));
                } else {
                    out.push((Tok::Eq, pos));
                }
            }
            '-' => {
                advance(&chars, &mut i, &mut line, &mut col);
                if chars.get(i) == Some(&'>') {
                    advance(&chars, &mut i, &mut line, &mut col);
                    out.push((Tok::Arrow, pos));
                } else {
                    return Err(ParseError {
                        line: pos.line,
                        col: pos.col,
                        message: "stray `-` (expected `->`)".into(),
                    });
                }
            }
            '|' => {
                advance(&chars, &mut i, &mut line, &mut col);
                if chars.get(i) == Some(&'-') {
                    advance(&chars, &mut i, &mut line, &mut col);
                    if chars.get(i) == Some(&'>') {
                        advance(&chars, &mut i, &mut line, &mut col);
                        out.push((Tok::MapsTo, pos));
                        continue;
                    }
                }
                return Err(ParseError {
                    line: pos.line,
                    col: pos.col,
                    message: "stray `|` (expected `|->`)".into(),
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    ident.push(advance(&chars, &mut i, &mut line, &mut col));
                }
                out.push((Tok::Ident(ident), pos));
            }
            _ => {
                advance(&chars, &mut i, &mut line, &mut col);
                let tok = match c {
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '*' => Tok::Star,
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    '\\' => Tok::Backslash,
                    '$' => Tok::Dollar,
                    other => {
                        return Err(ParseError {
                            line: pos.line,
                            col: pos.col,
                            message: format!("unexpected character `{other}`"),
                        });
                    }
                };
                out.push((tok, pos));
            }
        }
    }
    Ok(out)
}

/// A cursor over a token stream with the error plumbing the parsers share.
pub(crate) struct Parser {
    toks: Vec<(Tok, Pos)>,
    pub(crate) idx: usize,
}

impl Parser {
    pub(crate) fn new(source: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(source)?,
            idx: 0,
        })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks
            .get(self.idx)
            .or_else(|| self.toks.last())
            .map(|(_, p)| *p)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        let pos = self.pos();
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    pub(crate) fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        if self.eat(want) {
            Ok(())
        } else {
            Err(match self.peek() {
                Some(got) => self.error(format!("expected {want}, found {got}")),
                None => self.error(format!("expected {want}, found end of input")),
            })
        }
    }

    pub(crate) fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.next() {
                Some(Tok::Ident(s)) => Ok(s),
                _ => unreachable!(),
            },
            Some(got) => Err(self.error(format!("expected identifier, found {got}"))),
            None => Err(self.error("expected identifier, found end of input")),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub(crate) fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(format!(
                "unexpected {} after a complete expression",
                self.peek().unwrap()
            )))
        }
    }

    // dom := prodseq ("->" dom)?    right associative
    // prodseq := atom ("x" atom)*   left associative
    pub(crate) fn dom(&mut self) -> Result<DomExpr, ParseError> {
        let left = self.dom_prodseq()?;
        if self.eat(&Tok::Arrow) {
            let right = self.dom()?;
            Ok(DomExpr::exp(left, right))
        } else {
            Ok(left)
        }
    }

    fn dom_prodseq(&mut self) -> Result<DomExpr, ParseError> {
        let mut acc = self.dom_atom()?;
        while matches!(self.peek(), Some(Tok::Ident(s)) if s == "x") {
            self.next();
            let rhs = self.dom_atom()?;
            acc = DomExpr::prod(acc, rhs);
        }
        Ok(acc)
    }

    fn dom_atom(&mut self) -> Result<DomExpr, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "O" => {
                self.next();
                Ok(DomExpr::Terminal)
            }
            Some(Tok::Ident(_)) => Ok(DomExpr::Base(self.expect_ident()?)),
            Some(Tok::LBrace) => {
                self.next();
                let atom = self.expect_ident()?;
                self.expect(&Tok::RBrace)?;
                Ok(DomExpr::singleton(&atom))
            }
            Some(Tok::LParen) => {
                self.next();
                let d = self.dom()?;
                self.expect(&Tok::RParen)?;
                Ok(d)
            }
            Some(got) => Err(self.error(format!("expected a domain, found {got}"))),
            None => Err(self.error("expected a domain, found end of input")),
        }
    }

    // mor := prodmor ("." mor)?      right associative composition
    // prodmor := atom ("*" atom)*    functor product, desugared on parse
    pub(crate) fn mor(&mut self) -> Result<MorExpr, SyntaxError> {
        let left = self.mor_prod()?;
        if self.eat(&Tok::Dot) {
            let right = self.mor()?;
            Ok(MorExpr::compose(left, right))
        } else {
            Ok(left)
        }
    }

    fn mor_prod(&mut self) -> Result<MorExpr, SyntaxError> {
        let mut acc = self.mor_atom()?;
        while self.eat(&Tok::Star) {
            let rhs = self.mor_atom()?;
            acc = desugar_functor_product(&acc, &rhs)?;
        }
        Ok(acc)
    }

    fn dom_pair_brackets(&mut self) -> Result<(DomExpr, DomExpr), ParseError> {
        self.expect(&Tok::LBracket)?;
        let a = self.dom()?;
        self.expect(&Tok::Comma)?;
        let b = self.dom()?;
        self.expect(&Tok::RBracket)?;
        Ok((a, b))
    }

    fn mor_atom(&mut self) -> Result<MorExpr, SyntaxError> {
        let head = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            Some(Tok::Lt) => {
                self.next();
                let f = self.mor()?;
                self.expect(&Tok::Comma)?;
                let g = self.mor()?;
                self.expect(&Tok::Gt)?;
                return Ok(MorExpr::pair(f, g));
            }
            Some(Tok::LParen) => {
                self.next();
                let m = self.mor()?;
                self.expect(&Tok::RParen)?;
                return Ok(m);
            }
            Some(got) => return Err(self.error(format!("expected a morphism, found {got}")).into()),
            None => return Err(self.error("expected a morphism, found end of input").into()),
        };
        match head.as_str() {
            "id" => {
                self.next();
                self.expect(&Tok::LBracket)?;
                let d = self.dom()?;
                self.expect(&Tok::RBracket)?;
                Ok(MorExpr::Id(d))
            }
            "fst" => {
                self.next();
                let (a, b) = self.dom_pair_brackets()?;
                Ok(MorExpr::Fst(a, b))
            }
            "snd" => {
                self.next();
                let (a, b) = self.dom_pair_brackets()?;
                Ok(MorExpr::Snd(a, b))
            }
            "eps" => {
                self.next();
                let (a, b) = self.dom_pair_brackets()?;
                Ok(MorExpr::EvalMap(a, b))
            }
            "bang" => {
                self.next();
                self.expect(&Tok::LBracket)?;
                let d = self.dom()?;
                self.expect(&Tok::RBracket)?;
                Ok(MorExpr::Bang(d))
            }
            "point" => {
                self.next();
                self.expect(&Tok::LParen)?;
                let atom = self.expect_ident()?;
                self.expect(&Tok::Comma)?;
                let d = self.dom()?;
                self.expect(&Tok::RParen)?;
                Ok(MorExpr::Point(atom, d))
            }
            "prim" => {
                self.next();
                self.expect(&Tok::LParen)?;
                let name = self.expect_ident()?;
                self.expect(&Tok::Comma)?;
                let d = self.dom()?;
                self.expect(&Tok::Comma)?;
                let c = self.dom()?;
                self.expect(&Tok::RParen)?;
                Ok(MorExpr::Prim(name, d, c))
            }
            "curry" => {
                self.next();
                self.expect(&Tok::LParen)?;
                let g = self.mor()?;
                self.expect(&Tok::RParen)?;
                Ok(MorExpr::curry(g))
            }
            other => Err(self
                .error(format!("`{other}` is not a morphism constructor"))
                .into()),
        }
    }

    // raw := "[" raw "," raw "]" | "(" ")" | "$" ident | ident
    pub(crate) fn raw_value(&mut self) -> Result<RawValue, ParseError> {
        match self.peek() {
            Some(Tok::LBracket) => {
                self.next();
                let a = self.raw_value()?;
                self.expect(&Tok::Comma)?;
                let b = self.raw_value()?;
                self.expect(&Tok::RBracket)?;
                Ok(RawValue::Pair(Box::new(a), Box::new(b)))
            }
            Some(Tok::LParen) => {
                self.next();
                self.expect(&Tok::RParen)?;
                Ok(RawValue::Unit)
            }
            Some(Tok::Dollar) => {
                self.next();
                Ok(RawValue::Prim(self.expect_ident()?))
            }
            Some(Tok::Ident(_)) => Ok(RawValue::Atom(self.expect_ident()?)),
            Some(got) => Err(self.error(format!("expected a value, found {got}"))),
            None => Err(self.error("expected a value, found end of input")),
        }
    }
}

/// An untyped value literal; it gains a domain through
/// [`crate::machine::elaborate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawValue {
    Unit,
    Atom(String),
    Pair(Box<RawValue>, Box<RawValue>),
    Prim(String),
}

impl fmt::Display for RawValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawValue::Unit => write!(f, "()"),
            RawValue::Atom(a) => write!(f, "{a}"),
            RawValue::Pair(l, r) => write!(f, "[{l}, {r}]"),
            RawValue::Prim(n) => write!(f, "${n}"),
        }
    }
}

pub fn parse_dom(source: &str) -> Result<DomExpr, ParseError> {
    let mut p = Parser::new(source)?;
    let d = p.dom()?;
    p.expect_end()?;
    Ok(d)
}

pub fn parse_mor(source: &str) -> Result<MorExpr, SyntaxError> {
    let mut p = Parser::new(source)?;
    let m = p.mor()?;
    p.expect_end()?;
    Ok(m)
}

pub fn parse_raw_value(source: &str) -> Result<RawValue, ParseError> {
    let mut p = Parser::new(source)?;
    let v = p.raw_value()?;
    p.expect_end()?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mor::infer_type;

    #[test]
    fn dom_precedence_and_round_trip() {
        for src in [
            "O",
            "Dx",
            "{a}",
            "(E x Dy) x Dx",
            "E x (Dy x Dx)",
            "E x Dy x Dx",
            "Dx -> Dy -> Dx",
            "(Dx -> Dy) -> Dx",
            "E x (Dx -> Dx)",
        ] {
            let d = parse_dom(src).unwrap();
            let printed = d.to_string();
            assert_eq!(parse_dom(&printed).unwrap(), d, "round trip of `{src}`");
        }
        // `x` associates left, `->` right.
        assert_eq!(
            parse_dom("E x Dy x Dx").unwrap(),
            parse_dom("(E x Dy) x Dx").unwrap()
        );
        assert_eq!(
            parse_dom("Dx -> Dy -> Dx").unwrap(),
            parse_dom("Dx -> (Dy -> Dx)").unwrap()
        );
    }

    #[test]
    fn mor_syntax_round_trip() {
        for src in [
            "id[Dx]",
            "fst[Dy, Dx]",
            "snd[E x Dy, Dx]",
            "eps[Dx, Dy]",
            "bang[(E x Dy) x Dx]",
            "point(p, Dx)",
            "prim(f, Dx, Dx)",
            "curry(snd[E, Dx])",
            "<fst[Dy, Dx], snd[Dy, Dx]>",
            "fst[Dy, Dx] . id[Dy x Dx]",
            "fst[Dy, Dx] . id[Dy x Dx] . id[Dy x Dx]",
            "(id[Dy] . id[Dy]) . id[Dy]",
        ] {
            let m = parse_mor(src).unwrap();
            let printed = m.to_string();
            assert_eq!(
                parse_mor(&printed).unwrap(),
                m,
                "round trip of `{src}` via `{printed}`"
            );
        }
    }

    #[test]
    fn composition_is_right_associative() {
        let m = parse_mor("id[A] . id[A] . id[A]").unwrap();
        let id = MorExpr::Id(DomExpr::base("A"));
        assert_eq!(
            m,
            MorExpr::compose(id.clone(), MorExpr::compose(id.clone(), id))
        );
    }

    #[test]
    fn functor_product_desugars_while_parsing() {
        let m = parse_mor("fst[E, Dy] * id[Dx]").unwrap();
        let expect = parse_mor("<fst[E, Dy] . fst[E x Dy, Dx], snd[E x Dy, Dx]>").unwrap();
        assert_eq!(m, expect);
        let t = infer_type(&m).unwrap();
        assert_eq!(t.dom, parse_dom("(E x Dy) x Dx").unwrap());
        assert_eq!(t.cod, parse_dom("E x Dx").unwrap());
    }

    #[test]
    fn functor_product_of_identities() {
        let m = parse_mor("id[A] * id[B]").unwrap();
        assert_eq!(m, parse_mor("<fst[A, B], snd[A, B]>").unwrap());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_mor("fst[Dy Dx]").unwrap_err();
        match err {
            SyntaxError::Parse(p) => {
                assert_eq!(p.line, 1);
                assert!(p.col > 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_dom("A -> ").is_err());
        assert!(parse_raw_value("[a, ").is_err());
    }

    #[test]
    fn raw_value_literals() {
        assert_eq!(
            parse_raw_value("[[e1, p], q]").unwrap(),
            RawValue::Pair(
                Box::new(RawValue::Pair(
                    Box::new(RawValue::Atom("e1".into())),
                    Box::new(RawValue::Atom("p".into()))
                )),
                Box::new(RawValue::Atom("q".into()))
            )
        );
        assert_eq!(parse_raw_value("()").unwrap(), RawValue::Unit);
        assert_eq!(parse_raw_value("$f").unwrap(), RawValue::Prim("f".into()));
    }

    #[test]
    fn comments_are_skipped_but_hash_atoms_survive() {
        let toks = lex("fst # trailing comment\n").unwrap();
        assert_eq!(toks.len(), 1);
        let toks = lex("#c").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].0, Tok::Hash);
    }
}
