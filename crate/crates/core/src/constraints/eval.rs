use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ast::*;
use crate::error::{Error, Result};
use crate::tabular::{Cell, Dataset, FeatureKind, FeatureMeta, FeatureRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// An implication whose antecedent matched no evaluable row.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementResult {
    pub name: String,
    pub kind: StatementKind,
    pub status: Status,
    pub features: Vec<String>,
    pub violating_rows: Vec<usize>,
    /// Rows not evaluated because a compared feature was missing.
    pub skipped_rows: usize,
    pub evaluated_rows: usize,
    /// Antecedent matches for implication rules, true rows for derive statements.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched_rows: Option<usize>,
    /// Aggregate value for invariants (`None` when undefined).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub statements: Vec<StatementResult>,
}

impl ViolationReport {
    pub fn get(&self, name: &str) -> Option<&StatementResult> {
        self.statements.iter().find(|s| s.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &StatementResult> {
        self.statements.iter().filter(|s| s.status == Status::Fail)
    }
}

/// Expression with feature names resolved to column indices.
enum Compiled {
    Implies(Box<Compiled>, Box<Compiled>),
    Or(Vec<Compiled>),
    And(Vec<Compiled>),
    Not(Box<Compiled>),
    Cmp(Slot, CmpOp, Slot),
    Missing(usize),
}

#[derive(Clone, Copy)]
enum Slot {
    Column(usize),
    Const(f64),
}

struct Resolver<'a> {
    data: &'a Dataset,
    statement: &'a str,
}

impl Resolver<'_> {
    fn column(&self, feature: &str) -> Result<usize> {
        let idx = self
            .data
            .index_of(feature)
            .map_err(|_| Error::ConstraintReference {
                statement: self.statement.to_string(),
                feature: feature.to_string(),
            })?;
        if self.data.features()[idx].kind == FeatureKind::Categorical {
            return Err(Error::feature(
                feature,
                format!("statement `{}` compares a categorical feature numerically", self.statement),
            ));
        }
        Ok(idx)
    }

    fn compile(&self, e: &Expr) -> Result<Compiled> {
        Ok(match e {
            Expr::Implies(a, b) => Compiled::Implies(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Expr::Or(xs) => Compiled::Or(xs.iter().map(|x| self.compile(x)).collect::<Result<_>>()?),
            Expr::And(xs) => Compiled::And(xs.iter().map(|x| self.compile(x)).collect::<Result<_>>()?),
            Expr::Not(x) => Compiled::Not(Box::new(self.compile(x)?)),
            Expr::Cmp(l, op, r) => Compiled::Cmp(self.slot(l)?, *op, self.slot(r)?),
            Expr::Missing(f) => Compiled::Missing(self.data.index_of(f).map_err(|_| {
                Error::ConstraintReference {
                    statement: self.statement.to_string(),
                    feature: f.clone(),
                }
            })?),
        })
    }

    fn slot(&self, op: &Operand) -> Result<Slot> {
        Ok(match op {
            Operand::Feature(f) => Slot::Column(self.column(f)?),
            Operand::Number(v) => Slot::Const(*v),
        })
    }
}

impl Compiled {
    /// Columns whose absence makes the row unevaluable (`missing(f)` does not count).
    fn compared_columns(&self, out: &mut Vec<usize>) {
        match self {
            Compiled::Implies(a, b) => {
                a.compared_columns(out);
                b.compared_columns(out);
            }
            Compiled::Or(xs) | Compiled::And(xs) => xs.iter().for_each(|x| x.compared_columns(out)),
            Compiled::Not(x) => x.compared_columns(out),
            Compiled::Cmp(l, _, r) => {
                for s in [l, r] {
                    if let Slot::Column(c) = s {
                        out.push(*c);
                    }
                }
            }
            Compiled::Missing(_) => {}
        }
    }

    fn eval(&self, d: &Dataset, row: usize) -> bool {
        match self {
            Compiled::Implies(a, b) => !a.eval(d, row) || b.eval(d, row),
            Compiled::Or(xs) => xs.iter().any(|x| x.eval(d, row)),
            Compiled::And(xs) => xs.iter().all(|x| x.eval(d, row)),
            Compiled::Not(x) => !x.eval(d, row),
            Compiled::Cmp(l, op, r) => op.apply(slot_value(d, *l, row), slot_value(d, *r, row)),
            Compiled::Missing(c) => d.cell(row, *c).is_missing(),
        }
    }
}

fn slot_value(d: &Dataset, slot: Slot, row: usize) -> f64 {
    match slot {
        Slot::Const(v) => v,
        // Callers skip rows with missing compared columns before evaluating.
        Slot::Column(c) => d.cell(row, c).as_num().unwrap_or(f64::NAN),
    }
}

/// Row-level evaluation of an expression: `None` where it cannot be evaluated.
struct RowEvaluator {
    expr: Compiled,
    compared: Vec<usize>,
}

impl RowEvaluator {
    fn new(resolver: &Resolver<'_>, e: &Expr) -> Result<Self> {
        let expr = resolver.compile(e)?;
        let mut compared = Vec::new();
        expr.compared_columns(&mut compared);
        compared.sort_unstable();
        compared.dedup();
        Ok(Self { expr, compared })
    }

    fn eval(&self, d: &Dataset, row: usize) -> Option<bool> {
        if self.compared.iter().any(|&c| d.cell(row, c).is_missing()) {
            return None;
        }
        Some(self.expr.eval(d, row))
    }
}

/// Evaluates every statement of `doc` against `data`, in statement order.
pub fn evaluate(doc: &ConstraintDoc, data: &Dataset) -> Result<ViolationReport> {
    let statements = doc
        .statements
        .par_iter()
        .map(|s| evaluate_statement(s, data))
        .collect::<Result<Vec<_>>>()?;
    Ok(ViolationReport { statements })
}

fn evaluate_statement(stmt: &Statement, data: &Dataset) -> Result<StatementResult> {
    let resolver = Resolver {
        data,
        statement: &stmt.name,
    };
    let mut result = StatementResult {
        name: stmt.name.clone(),
        kind: stmt.kind(),
        status: Status::Pass,
        features: stmt.referenced_features(),
        violating_rows: Vec::new(),
        skipped_rows: 0,
        evaluated_rows: 0,
        matched_rows: None,
        observed: None,
    };
    match &stmt.body {
        StatementBody::Range(bounds) => {
            let col = resolver.column(&stmt.name)?;
            for row in 0..data.n_rows() {
                match data.cell(row, col).as_num() {
                    None => result.skipped_rows += 1,
                    Some(v) => {
                        result.evaluated_rows += 1;
                        if !bounds.iter().all(|b| b.op.apply(v, b.value)) {
                            result.violating_rows.push(row);
                        }
                    }
                }
            }
        }
        StatementBody::Rule(expr) => {
            let (antecedent, whole) = match expr {
                Expr::Implies(a, _) => (Some(RowEvaluator::new(&resolver, a)?), RowEvaluator::new(&resolver, expr)?),
                _ => (None, RowEvaluator::new(&resolver, expr)?),
            };
            let mut matched = 0;
            for row in 0..data.n_rows() {
                match whole.eval(data, row) {
                    None => result.skipped_rows += 1,
                    Some(holds) => {
                        result.evaluated_rows += 1;
                        if let Some(a) = &antecedent {
                            if a.eval(data, row) == Some(true) {
                                matched += 1;
                            }
                        }
                        if !holds {
                            result.violating_rows.push(row);
                        }
                    }
                }
            }
            if antecedent.is_some() {
                result.matched_rows = Some(matched);
                if matched == 0 {
                    result.status = Status::Vacuous;
                }
            }
        }
        StatementBody::Derive(expr) => {
            let ev = RowEvaluator::new(&resolver, expr)?;
            let mut matched = 0;
            for row in 0..data.n_rows() {
                match ev.eval(data, row) {
                    None => result.skipped_rows += 1,
                    Some(v) => {
                        result.evaluated_rows += 1;
                        matched += usize::from(v);
                    }
                }
            }
            result.matched_rows = Some(matched);
        }
        StatementBody::Invariant(check) => {
            let (observed, evaluated, skipped) = aggregate(&resolver, &check.aggregate, data)?;
            result.observed = observed;
            result.evaluated_rows = evaluated;
            result.skipped_rows = skipped;
            if !observed.is_some_and(|v| check.op.apply(v, check.value)) {
                result.status = Status::Fail;
            }
        }
    }
    if !result.violating_rows.is_empty() {
        result.status = Status::Fail;
    }
    Ok(result)
}

fn aggregate(resolver: &Resolver<'_>, agg: &Aggregate, data: &Dataset) -> Result<(Option<f64>, usize, usize)> {
    match agg {
        Aggregate::Frac(e) => {
            let ev = RowEvaluator::new(resolver, e)?;
            let (mut yes, mut n) = (0usize, 0usize);
            for row in 0..data.n_rows() {
                if let Some(v) = ev.eval(data, row) {
                    n += 1;
                    yes += usize::from(v);
                }
            }
            let frac = (n > 0).then(|| yes as f64 / n as f64);
            Ok((frac, n, data.n_rows() - n))
        }
        Aggregate::Column(kind, feature) => {
            let col = resolver.column(feature)?;
            let values: Vec<f64> = (0..data.n_rows())
                .filter_map(|r| data.cell(r, col).as_num())
                .collect();
            let n = values.len();
            let skipped = data.n_rows() - n;
            let mean = || (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
            let v = match kind {
                ColumnAggregate::Count => Some(n as f64),
                ColumnAggregate::FracMissing => {
                    (data.n_rows() > 0).then(|| skipped as f64 / data.n_rows() as f64)
                }
                ColumnAggregate::Mean => mean(),
                ColumnAggregate::Std => (n >= 2).then(|| {
                    let m = mean().unwrap();
                    (values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
                }),
                ColumnAggregate::Min => values.iter().copied().reduce(f64::min),
                ColumnAggregate::Max => values.iter().copied().reduce(f64::max),
            };
            Ok((v, n, skipped))
        }
    }
}

/// Appends one binary `derived` column per derive statement, in document order.
///
/// Later statements may reference columns derived earlier in the same document.
pub fn derive_features(doc: &ConstraintDoc, data: &Dataset) -> Result<Dataset> {
    let mut out = data.clone();
    for stmt in doc.derives() {
        let StatementBody::Derive(expr) = &stmt.body else {
            unreachable!()
        };
        if out.has_feature(&stmt.name) {
            return Err(Error::DuplicateFeature(stmt.name.clone()));
        }
        let resolver = Resolver {
            data: &out,
            statement: &stmt.name,
        };
        let ev = RowEvaluator::new(&resolver, expr)?;
        let column: Vec<Cell> = (0..out.n_rows())
            .map(|row| match ev.eval(&out, row) {
                Some(true) => Cell::Num(1.0),
                Some(false) => Cell::Num(0.0),
                None => Cell::Missing,
            })
            .collect();
        let meta = FeatureMeta::new(stmt.name.clone(), FeatureKind::Binary).with_role(FeatureRole::Derived);
        out = out.with_appended(meta, column)?;
    }
    Ok(out)
}
