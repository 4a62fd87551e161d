//! CART decision trees for classification (Gini or entropy) and regression (squared error).

use serde::{Deserialize, Serialize};

use super::linear::check_xy;
use super::loss::{entropy_impurity, gini, weighted_impurity};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Score differences below this are treated as ties.
pub const SPLIT_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impurity {
    Gini,
    Entropy,
    Squared,
}

impl Impurity {
    pub fn is_classification(self) -> bool {
        self != Impurity::Squared
    }

    fn of_counts(self, counts: &[usize]) -> f64 {
        match self {
            Impurity::Entropy => entropy_impurity(counts).unwrap_or(0.0),
            _ => gini(counts).unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub impurity: Impurity,
}

impl Default for CartParams {
    fn default() -> Self {
        Self {
            max_depth: 5,
            min_samples_leaf: 1,
            impurity: Impurity::Gini,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        n_samples: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        class_counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    /// 0 for regression trees.
    pub n_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub impurity: f64,
    pub n_left: usize,
}

/// Class labels as indices; labels must be non-negative integers.
pub(crate) fn class_labels(y: &[f64]) -> Result<(Vec<usize>, usize)> {
    let mut max = 0;
    let mut labels = Vec::with_capacity(y.len());
    for &v in y {
        if v < 0.0 || v.fract() != 0.0 || v > 1e6 {
            return Err(Error::InvalidArgument(format!("class label {v} is not a non-negative integer")));
        }
        let c = v as usize;
        max = max.max(c);
        labels.push(c);
    }
    Ok((labels, (max + 1).max(2)))
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = (a + b) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Mean squared deviation from the mean.
fn variance(sum: f64, sum_sq: f64, n: usize) -> f64 {
    let n = n as f64;
    (sum_sq / n - (sum / n).powi(2)).max(0.0)
}

/// Best split of `rows`: minimal weighted child impurity over every feature and
/// every midpoint between consecutive distinct values. Ties go to the lower
/// feature index, then the lower threshold.
pub fn best_split(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    impurity: Impurity,
    n_classes: usize,
    min_samples_leaf: usize,
) -> Option<SplitChoice> {
    let n = rows.len();
    let msl = min_samples_leaf.max(1);
    if n < 2 * msl {
        return None;
    }
    let mut best: Option<SplitChoice> = None;
    let mut order = rows.to_vec();
    for f in 0..x.n_cols() {
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
        let mut left_counts = vec![0usize; n_classes];
        let mut right_counts = vec![0usize; n_classes];
        let (mut ls, mut lss, mut rs, mut rss) = (0.0, 0.0, 0.0, 0.0);
        if impurity.is_classification() {
            for &r in &order {
                right_counts[y[r] as usize] += 1;
            }
        } else {
            for &r in &order {
                rs += y[r];
                rss += y[r] * y[r];
            }
        }
        for i in 1..n {
            let moved = order[i - 1];
            if impurity.is_classification() {
                left_counts[y[moved] as usize] += 1;
                right_counts[y[moved] as usize] -= 1;
            } else {
                ls += y[moved];
                lss += y[moved] * y[moved];
                rs -= y[moved];
                rss -= y[moved] * y[moved];
            }
            let (a, b) = (x.get(moved, f), x.get(order[i], f));
            if a == b || i < msl || n - i < msl {
                continue;
            }
            let (gl, gr) = if impurity.is_classification() {
                (impurity.of_counts(&left_counts), impurity.of_counts(&right_counts))
            } else {
                (variance(ls, lss, i), variance(rs, rss, n - i))
            };
            let score = weighted_impurity(&[(i, gl), (n - i, gr)]);
            if best.is_none_or(|b| score < b.impurity - SPLIT_TIE_EPS) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: midpoint(a, b),
                    impurity: score,
                    n_left: i,
                });
            }
        }
    }
    best
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    params: &'a CartParams,
    n_classes: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf(&self, rows: &[usize]) -> Node {
        if self.params.impurity.is_classification() {
            let mut counts = vec![0usize; self.n_classes];
            for &r in rows {
                counts[self.y[r] as usize] += 1;
            }
            let majority = counts
                .iter()
                .enumerate()
                .fold(0, |best, (c, &k)| if k > counts[best] { c } else { best });
            Node::Leaf {
                value: majority as f64,
                n_samples: rows.len(),
                class_counts: counts,
            }
        } else {
            let mean = rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len().max(1) as f64;
            Node::Leaf {
                value: mean,
                n_samples: rows.len(),
                class_counts: Vec::new(),
            }
        }
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        rows.iter().all(|&r| self.y[r] == self.y[rows[0]])
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(self.leaf(&rows));
        if depth >= self.params.max_depth || self.is_pure(&rows) {
            return id;
        }
        let Some(split) = best_split(
            self.x,
            self.y,
            &rows,
            self.params.impurity,
            self.n_classes,
            self.params.min_samples_leaf,
        ) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.x.get(r, split.feature) <= split.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        id
    }
}

pub fn fit_cart(x: &Matrix, y: &[f64], params: &CartParams) -> Result<Tree> {
    check_xy(x, y)?;
    let n_classes = if params.impurity.is_classification() {
        class_labels(y)?.1
    } else {
        0
    };
    let mut b = Builder {
        x,
        y,
        params,
        n_classes,
        nodes: Vec::new(),
    };
    b.grow((0..x.n_rows()).collect(), 0);
    Ok(Tree {
        nodes: b.nodes,
        n_features: x.n_cols(),
        n_classes,
    })
}

impl Tree {
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { .. } => return i,
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { value, .. } => *value,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| self.predict_row(r)).collect()
    }

    /// Fraction of class 1 in the reached leaf; `None` for regression trees.
    pub fn proba_row(&self, row: &[f64]) -> Option<f64> {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf {
                class_counts, n_samples, ..
            } if !class_counts.is_empty() && *n_samples > 0 => Some(class_counts[1] as f64 / *n_samples as f64),
            _ => None,
        }
    }

    pub fn set_leaf_value(&mut self, index: usize, new_value: f64) {
        if let Node::Leaf { value, .. } = &mut self.nodes[index] {
            *value = new_value;
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(self, 0)
    }
}
