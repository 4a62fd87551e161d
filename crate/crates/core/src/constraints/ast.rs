use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A parsed `.cmc` document. Equality compares statements only.
#[derive(Debug, Clone)]
pub struct ConstraintDoc {
    pub statements: Vec<Statement>,
    pub source_text: String,
}

impl PartialEq for ConstraintDoc {
    fn eq(&self, other: &Self) -> bool {
        self.statements == other.statements
    }
}

impl ConstraintDoc {
    pub fn get(&self, name: &str) -> Option<&Statement> {
        self.statements.iter().find(|s| s.name == name)
    }

    pub fn derives(&self) -> impl Iterator<Item = &Statement> {
        self.statements
            .iter()
            .filter(|s| matches!(s.body, StatementBody::Derive(_)))
    }

    /// Keeps only derive statements, re-rendering the source text.
    pub fn derive_only(&self) -> ConstraintDoc {
        let statements: Vec<Statement> = self.derives().cloned().collect();
        let mut doc = ConstraintDoc {
            statements,
            source_text: String::new(),
        };
        doc.source_text = doc.to_string();
        doc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub name: String,
    pub body: StatementBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementKind {
    Range,
    Rule,
    Invariant,
    Derive,
}

impl StatementKind {
    pub fn keyword(self) -> &'static str {
        match self {
            StatementKind::Range => "range",
            StatementKind::Rule => "rule",
            StatementKind::Invariant => "invariant",
            StatementKind::Derive => "derive",
        }
    }

    /// Range and rule statements are checked row by row.
    pub fn is_row_check(self) -> bool {
        matches!(self, StatementKind::Range | StatementKind::Rule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementBody {
    /// The statement name doubles as the constrained feature.
    Range(Vec<Bound>),
    Rule(Expr),
    Invariant(AggregateCheck),
    Derive(Expr),
}

impl Statement {
    pub fn kind(&self) -> StatementKind {
        match self.body {
            StatementBody::Range(_) => StatementKind::Range,
            StatementBody::Rule(_) => StatementKind::Rule,
            StatementBody::Invariant(_) => StatementKind::Invariant,
            StatementBody::Derive(_) => StatementKind::Derive,
        }
    }

    /// Feature names the statement reads, sorted.
    pub fn referenced_features(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        match &self.body {
            StatementBody::Range(_) => {
                out.insert(self.name.clone());
            }
            StatementBody::Rule(e) | StatementBody::Derive(e) => e.collect_features(&mut out),
            StatementBody::Invariant(check) => match &check.aggregate {
                Aggregate::Frac(e) => e.collect_features(&mut out),
                Aggregate::Column(_, f) => {
                    out.insert(f.clone());
                }
            },
        }
        out.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn apply(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }

    pub const ALL: [CmpOp; 6] = [CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub op: CmpOp,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Feature(String),
    Number(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Implies(Box<Expr>, Box<Expr>),
    Or(Vec<Expr>),
    And(Vec<Expr>),
    Not(Box<Expr>),
    Cmp(Operand, CmpOp, Operand),
    Missing(String),
}

impl Expr {
    /// Binding strength used by the printer: implies < or < and < unary.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Implies(..) => 0,
            Expr::Or(_) => 1,
            Expr::And(_) => 2,
            _ => 3,
        }
    }

    pub fn collect_features(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Implies(a, b) => {
                a.collect_features(out);
                b.collect_features(out);
            }
            Expr::Or(xs) | Expr::And(xs) => xs.iter().for_each(|x| x.collect_features(out)),
            Expr::Not(x) => x.collect_features(out),
            Expr::Cmp(l, _, r) => {
                for op in [l, r] {
                    if let Operand::Feature(f) = op {
                        out.insert(f.clone());
                    }
                }
            }
            Expr::Missing(f) => {
                out.insert(f.clone());
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnAggregate {
    Mean,
    Std,
    Min,
    Max,
    Count,
    FracMissing,
}

impl ColumnAggregate {
    pub fn keyword(self) -> &'static str {
        match self {
            ColumnAggregate::Mean => "mean",
            ColumnAggregate::Std => "std",
            ColumnAggregate::Min => "min",
            ColumnAggregate::Max => "max",
            ColumnAggregate::Count => "count",
            ColumnAggregate::FracMissing => "frac_missing",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "mean" => ColumnAggregate::Mean,
            "std" => ColumnAggregate::Std,
            "min" => ColumnAggregate::Min,
            "max" => ColumnAggregate::Max,
            "count" => ColumnAggregate::Count,
            "frac_missing" => ColumnAggregate::FracMissing,
            _ => return None,
        })
    }

    pub const ALL: [ColumnAggregate; 6] = [
        ColumnAggregate::Mean,
        ColumnAggregate::Std,
        ColumnAggregate::Min,
        ColumnAggregate::Max,
        ColumnAggregate::Count,
        ColumnAggregate::FracMissing,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub enum Aggregate {
    Column(ColumnAggregate, String),
    /// Fraction of evaluable rows on which the expression holds.
    Frac(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCheck {
    pub aggregate: Aggregate,
    pub op: CmpOp,
    pub value: f64,
}

impl fmt::Display for ConstraintDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: ", self.kind().keyword(), self.name)?;
        match &self.body {
            StatementBody::Range(bounds) => {
                for (i, b) in bounds.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{} {}", b.op.symbol(), b.value)?;
                }
                Ok(())
            }
            StatementBody::Rule(e) | StatementBody::Derive(e) => write!(f, "{e}"),
            StatementBody::Invariant(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for AggregateCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.aggregate {
            Aggregate::Column(agg, feature) => write!(f, "{}({feature})", agg.keyword())?,
            Aggregate::Frac(e) => write!(f, "frac({e})")?,
        }
        write!(f, " {} {}", self.op.symbol(), self.value)
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Feature(name) => f.write_str(name),
            Operand::Number(v) => write!(f, "{v}"),
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, min_precedence: u8) -> fmt::Result {
    if child.precedence() < min_precedence {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Implies(a, b) => {
                write_child(f, a, 1)?;
                f.write_str(" implies ")?;
                write_child(f, b, 1)
            }
            Expr::Or(xs) | Expr::And(xs) => {
                let (sep, min) = if matches!(self, Expr::Or(_)) {
                    (" or ", 2)
                } else {
                    (" and ", 3)
                };
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write_child(f, x, min)?;
                }
                Ok(())
            }
            Expr::Not(x) => {
                f.write_str("not ")?;
                write_child(f, x, 3)
            }
            Expr::Cmp(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
            Expr::Missing(name) => write!(f, "missing({name})"),
        }
    }
}
