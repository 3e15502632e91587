//! Commutative diagrams: finite labeled graphs of typed morphism edges with
//! designated parallel paths to compare.
//!
//! The file format is line oriented, with `#` comments:
//!
//! ```text
//! nodes:
//!   (E x Dy) x Dx
//!   Dx
//! edges:
//!   g : ((E x Dy) x Dx) x Dx => Dx = snd[(E x Dy) x Dx, Dx]
//! claims:
//!   g ; eps subst
//! ```
//!
//! A claim is two paths separated by `;`. Edge names in a path are written
//! in composition order: the rightmost edge applies first.

use std::fmt;

use crate::dom::DomExpr;
use crate::laws::{equal, Equality, LawsError, RewriteTrace, Verdict};
use crate::machine::FiniteSemantics;
use crate::mor::{infer_type, MorExpr};
use crate::syntax::{ParseError, Parser, SyntaxError, Tok};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub morphism: MorExpr,
    pub src: DomExpr,
    pub dst: DomExpr,
}

/// Two edge-name sequences claimed to compose to the same morphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub path_a: Vec<String>,
    pub path_b: Vec<String>,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ; {}", self.path_a.join(" "), self.path_b.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Diagram {
    pub nodes: Vec<DomExpr>,
    pub edges: Vec<Edge>,
    pub claims: Vec<Claim>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagramError {
    UnknownEdge {
        claim: usize,
        name: String,
    },
    EmptyPath {
        claim: usize,
    },
    /// Adjacent edges in a path do not compose.
    NonComposing {
        claim: usize,
        at: String,
        needs: DomExpr,
        found: DomExpr,
    },
    /// The two composites of a claim are not parallel.
    NonParallel {
        claim: usize,
        left: String,
        right: String,
    },
    /// An edge's morphism does not type as its declared src => dst.
    EdgeType {
        name: String,
        detail: String,
    },
    Laws(LawsError),
}

impl fmt::Display for DiagramError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramError::UnknownEdge { claim, name } => {
                write!(f, "claim {claim}: unknown edge `{name}`")
            }
            DiagramError::EmptyPath { claim } => write!(f, "claim {claim}: empty path"),
            DiagramError::NonComposing {
                claim,
                at,
                needs,
                found,
            } => write!(
                f,
                "claim {claim}: path does not compose at `{at}` (needs `{needs}`, found `{found}`)"
            ),
            DiagramError::NonParallel { claim, left, right } => {
                write!(f, "claim {claim}: paths are not parallel ({left} vs {right})")
            }
            DiagramError::EdgeType { name, detail } => {
                write!(f, "edge `{name}`: {detail}")
            }
            DiagramError::Laws(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for DiagramError {}

impl From<LawsError> for DiagramError {
    fn from(e: LawsError) -> Self {
        DiagramError::Laws(e)
    }
}

impl Diagram {
    pub fn edge(&self, name: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.name == name)
    }

    /// Check the structural invariants: every edge types as declared, and
    /// every claim's paths compose and are parallel.
    pub fn validate(&self) -> Result<(), DiagramError> {
        for e in &self.edges {
            match infer_type(&e.morphism) {
                Ok(t) => {
                    if t.dom != e.src || t.cod != e.dst {
                        return Err(DiagramError::EdgeType {
                            name: e.name.clone(),
                            detail: format!(
                                "declared `{} => {}` but the morphism types as `{t}`",
                                e.src, e.dst
                            ),
                        });
                    }
                }
                Err(err) => {
                    return Err(DiagramError::EdgeType {
                        name: e.name.clone(),
                        detail: err.to_string(),
                    });
                }
            }
        }
        for (i, claim) in self.claims.iter().enumerate() {
            let (a, b) = self.compose_claim(i, claim)?;
            let ta = infer_type(&a).expect("validated edges compose to typed paths");
            let tb = infer_type(&b).expect("validated edges compose to typed paths");
            if ta != tb {
                return Err(DiagramError::NonParallel {
                    claim: i,
                    left: ta.to_string(),
                    right: tb.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Compose a path written in composition order: the rightmost edge
    /// applies first.
    pub fn compose_path(&self, claim: usize, path: &[String]) -> Result<MorExpr, DiagramError> {
        if path.is_empty() {
            return Err(DiagramError::EmptyPath { claim });
        }
        let mut edges = Vec::with_capacity(path.len());
        for name in path {
            let e = self
                .edge(name)
                .ok_or_else(|| DiagramError::UnknownEdge {
                    claim,
                    name: name.clone(),
                })?;
            edges.push(e);
        }
        // Adjacent check: the edge to the left consumes what its right
        // neighbour produces.
        for w in edges.windows(2) {
            let (left, right) = (w[0], w[1]);
            if left.src != right.dst {
                return Err(DiagramError::NonComposing {
                    claim,
                    at: left.name.clone(),
                    needs: left.src.clone(),
                    found: right.dst.clone(),
                });
            }
        }
        let mut it = edges.iter().rev();
        let mut acc = it.next().unwrap().morphism.clone();
        for e in it {
            acc = MorExpr::compose(e.morphism.clone(), acc);
        }
        Ok(acc)
    }

    fn compose_claim(
        &self,
        idx: usize,
        claim: &Claim,
    ) -> Result<(MorExpr, MorExpr), DiagramError> {
        Ok((
            self.compose_path(idx, &claim.path_a)?,
            self.compose_path(idx, &claim.path_b)?,
        ))
    }
}

/// Per-claim verdict with the rewrite evidence.
#[derive(Debug, Clone)]
pub struct ClaimReport {
    pub claim: Claim,
    pub verdict: Verdict,
    pub trace_left: RewriteTrace,
    pub trace_right: RewriteTrace,
}

#[derive(Debug, Clone)]
pub struct DiagramReport {
    pub claims: Vec<ClaimReport>,
}

impl DiagramReport {
    /// The worst claim verdict: any counterexample dominates, then any
    /// undecided claim, and a diagram with every claim equal is equal.
    pub fn overall(&self) -> Verdict {
        let mut overall = Verdict::Equal;
        for c in &self.claims {
            match (&c.verdict, &overall) {
                (Verdict::NotEqual(_), _) => return c.verdict.clone(),
                (Verdict::Undecided, Verdict::Equal) => overall = Verdict::Undecided,
                _ => {}
            }
        }
        overall
    }
}

/// Check every claim of a diagram, composing both paths and deciding their
/// equality symbolically and, when a semantics is supplied, by enumeration.
pub fn check_diagram(
    d: &Diagram,
    s: Option<&FiniteSemantics>,
) -> Result<DiagramReport, DiagramError> {
    d.validate()?;
    let mut claims = Vec::with_capacity(d.claims.len());
    for (i, claim) in d.claims.iter().enumerate() {
        let (a, b) = d.compose_claim(i, claim)?;
        let Equality {
            verdict,
            trace_left,
            trace_right,
            ..
        } = equal(&a, &b, s)?;
        claims.push(ClaimReport {
            claim: claim.clone(),
            verdict,
            trace_left,
            trace_right,
        });
    }
    Ok(DiagramReport { claims })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagramFileError {
    Parse(ParseError),
    Structure(String),
}

impl fmt::Display for DiagramFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramFileError::Parse(e) => e.fmt(f),
            DiagramFileError::Structure(msg) => write!(f, "invalid diagram: {msg}"),
        }
    }
}

impl std::error::Error for DiagramFileError {}

impl From<ParseError> for DiagramFileError {
    fn from(e: ParseError) -> Self {
        DiagramFileError::Parse(e)
    }
}

impl From<SyntaxError> for DiagramFileError {
    fn from(e: SyntaxError) -> Self {
        match e {
            SyntaxError::Parse(p) => DiagramFileError::Parse(p),
            SyntaxError::Type(t) => DiagramFileError::Structure(t.to_string()),
        }
    }
}

/// Parse the diagram file format.
pub fn parse_diagram(source: &str) -> Result<Diagram, DiagramFileError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Nodes,
        Edges,
        Claims,
    }
    let mut section = Section::None;
    let mut diagram = Diagram::default();
    for (lineno, raw_line) in source.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "nodes:" => {
                section = Section::Nodes;
                continue;
            }
            "edges:" => {
                section = Section::Edges;
                continue;
            }
            "claims:" => {
                section = Section::Claims;
                continue;
            }
            _ => {}
        }
        let at = |msg: String| {
            DiagramFileError::Structure(format!("line {}: {msg}", lineno + 1))
        };
        match section {
            Section::None => {
                return Err(at(format!(
                    "`{line}` appears before any section header (nodes:, edges:, claims:)"
                )));
            }
            Section::Nodes => {
                let mut p = Parser::new(line)?;
                let d = p.dom()?;
                p.expect_end()?;
                diagram.nodes.push(d);
            }
            Section::Edges => {
                // name : SRC => DST = MORPHISM
                let mut p = Parser::new(line)?;
                let name = p.expect_ident()?;
                p.expect(&Tok::Colon)?;
                let src = p.dom()?;
                p.expect(&Tok::DArrow)?;
                let dst = p.dom()?;
                p.expect(&Tok::Eq)?;
                let morphism = p.mor()?;
                p.expect_end()?;
                if diagram.edge(&name).is_some() {
                    return Err(at(format!("edge `{name}` is declared twice")));
                }
                diagram.edges.push(Edge {
                    name,
                    morphism,
                    src,
                    dst,
                });
            }
            Section::Claims => {
                let mut p = Parser::new(line)?;
                let mut path_a = Vec::new();
                while matches!(p.peek(), Some(Tok::Ident(_))) {
                    path_a.push(p.expect_ident()?);
                }
                p.expect(&Tok::Semi)?;
                let mut path_b = Vec::new();
                while matches!(p.peek(), Some(Tok::Ident(_))) {
                    path_b.push(p.expect_ident()?);
                }
                p.expect_end()?;
                if path_a.is_empty() || path_b.is_empty() {
                    return Err(at("claims need a path on each side of `;`".to_string()));
                }
                diagram.claims.push(Claim { path_a, path_b });
            }
        }
    }
    Ok(diagram)
}
