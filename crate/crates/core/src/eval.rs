//! Precision, recall and F-measure of suggested opportunities against
//! developer-marked ones, with a per-boundary match tolerance.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::EvalError;

/// A statement interval inside a method.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Opportunity {
    pub method: String,
    pub start: usize,
    pub end: usize,
}

impl Opportunity {
    pub fn new(method: &str, start: usize, end: usize) -> Self {
        Opportunity { method: method.to_owned(), start, end }
    }

    fn deviation(&self, other: &Opportunity) -> (usize, usize) {
        (self.start.abs_diff(other.start), self.end.abs_diff(other.end))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    pub marks: Vec<Opportunity>,
}

/// One `method start end` mark per line; `#` starts a comment.
pub fn load_ground_truth(text: &str) -> Result<GroundTruth, EvalError> {
    let mut marks = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| EvalError::Syntax { line: n + 1, message: message.to_owned() };
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [method, start, end] = parts[..] else { return Err(err("expected `method start end`")) };
        let start: usize = start.parse().map_err(|_| err("start is not a statement index"))?;
        let end: usize = end.parse().map_err(|_| err("end is not a statement index"))?;
        if start > end {
            return Err(err("start exceeds end"));
        }
        marks.push(Opportunity::new(method, start, end));
    }
    Ok(GroundTruth { marks })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
    /// Matched (suggestion index, mark index) pairs.
    pub pairs: Vec<(usize, usize)>,
}

impl MatchReport {
    fn from_counts(tp: usize, fp: usize, fn_: usize, pairs: Vec<(usize, usize)>) -> Self {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f_measure = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        MatchReport { tp, fp, fn_, precision, recall, f_measure, pairs }
    }
}

fn ratio4(r: Option<f64>) -> String {
    r.map_or("-".into(), |v| format!("{v:.4}"))
}

impl fmt::Display for MatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = writeln!(out, "tp {}", self.tp);
        let _ = writeln!(out, "fp {}", self.fp);
        let _ = writeln!(out, "fn {}", self.fn_);
        let _ = writeln!(out, "precision {}", ratio4(self.precision));
        let _ = writeln!(out, "recall {}", ratio4(self.recall));
        let _ = writeln!(out, "f-measure {}", ratio4(self.f_measure));
        f.write_str(&out)
    }
}

/// One-to-one matching within each method: the largest number of pairs with
/// both boundaries within `tolerance`, and among those the smallest total
/// deviation.
pub fn match_opportunities(suggested: &[Opportunity], marked: &[Opportunity], tolerance: usize) -> MatchReport {
    let methods: BTreeSet<&str> = suggested.iter().chain(marked).map(|o| o.method.as_str()).collect();
    let mut pairs = Vec::new();
    for m in methods {
        let s: Vec<usize> = (0..suggested.len()).filter(|&i| suggested[i].method == m).collect();
        let k: Vec<usize> = (0..marked.len()).filter(|&j| marked[j].method == m).collect();
        for (a, b) in assign(&s, &k, |i, j| {
            let (ds, de) = suggested[i].deviation(&marked[j]);
            (ds <= tolerance && de <= tolerance).then_some(ds + de)
        }) {
            pairs.push((a, b));
        }
    }
    pairs.sort_unstable();
    let tp = pairs.len();
    MatchReport::from_counts(tp, suggested.len() - tp, marked.len() - tp, pairs)
}

/// Max-cardinality, min-cost bipartite matching; `cost` is `None` for pairs
/// that may not match.
fn assign(rows: &[usize], cols: &[usize], cost: impl Fn(usize, usize) -> Option<usize>) -> Vec<(usize, usize)> {
    if rows.is_empty() || cols.is_empty() {
        return Vec::new();
    }
    let transpose = rows.len() > cols.len();
    let (r, c) = if transpose { (cols, rows) } else { (rows, cols) };
    let pair_cost = |a: usize, b: usize| if transpose { cost(b, a) } else { cost(a, b) };
    let max_dev = r.iter().flat_map(|&a| c.iter().filter_map(move |&b| pair_cost(a, b))).max();
    let Some(max_dev) = max_dev else { return Vec::new() };
    // any extra pair outweighs every possible saving in deviation
    let big = (r.len() as i64 + 1) * (max_dev as i64 + 1);
    let weights: Vec<Vec<i64>> =
        r.iter().map(|&a| c.iter().map(|&b| pair_cost(a, b).map_or(0, |d| big - d as i64)).collect()).collect();
    let matrix = Matrix::from_rows(weights).expect("rectangular");
    let (_, assignment) = kuhn_munkres(&matrix);
    assignment
        .into_iter()
        .enumerate()
        .filter_map(|(ri, ci)| {
            let (a, b) = (r[ri], c[ci]);
            pair_cost(a, b)?;
            Some(if transpose { (b, a) } else { (a, b) })
        })
        .collect()
}
