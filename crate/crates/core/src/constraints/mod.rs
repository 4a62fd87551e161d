//! Declarative data requirements: ranges, rules, invariants and derived features.

mod ast;
mod eval;
mod parser;
mod scorecard;

pub use ast::*;
pub use eval::{derive_features, evaluate, Status, StatementResult, ViolationReport};
pub use parser::{is_reserved, parse, ParseError};
pub use scorecard::{
    quality_scorecard, Criterion, CriterionGroup, DeclaredGrid, Divergence, Grade, Provenance, QualityScorecard,
    ScoreCell, ScorecardRow,
};

/// Reads and parses a `.cmc` file.
pub fn load(path: impl AsRef<std::path::Path>) -> crate::Result<ConstraintDoc> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
    Ok(parse(&text)?)
}
