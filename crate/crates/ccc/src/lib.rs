//! Cartesian-closed combinators with a finite-model evaluation machine.
//!
//! The crate models environments as left-nested products, variable access
//! as projection composites, and constants as curried citation closures.
//! On top of the combinator core sit a rewrite engine for the categorical
//! laws, a commutative-diagram checker, a small lambda frontend compiled
//! through access pointers, and a verification suite that replays the
//! figures, the citation lemma, and the function-constant theorem over
//! finite carriers.

pub mod diagram;
pub mod dom;
pub mod gen;
pub mod lambda;
pub mod laws;
pub mod machine;
pub mod mor;
pub mod suite;
pub mod syntax;

pub use diagram::{check_diagram, parse_diagram, Diagram};
pub use dom::DomExpr;
pub use lambda::{compile, oracle_eval, Context, LambdaTerm};
pub use laws::{equal, normalize, Verdict};
pub use machine::{apply_mor, enumerate, FiniteSemantics, Value};
pub use mor::{access_path, desugar_functor_product, infer_type, MorExpr, MorType, TypeError};
pub use suite::{default_semantics, run_suite};
