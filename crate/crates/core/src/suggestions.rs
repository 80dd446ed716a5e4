//! Plain-text suggestions file written by `segment` and read by `eval`.
//!
//! ```text
//! method FiboPrime
//! emo 1
//! span 1 13
//! members 1-13
//! lines 4 16
//! params -
//! returns b
//! score 1/3 0.3333
//! variant nested 6-12
//! end
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::engine::{Emo, VariantKind};
use crate::error::EvalError;
use crate::eval::Opportunity;
use crate::frontend::SourceMap;
use crate::metrics::{to_f64, Rational};
use crate::sdg::format_members;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suggestion {
    pub method: String,
    pub rank: usize,
    pub span: (usize, usize),
    pub members: BTreeSet<usize>,
    pub lines: Option<(usize, usize)>,
    pub params: BTreeSet<String>,
    pub returns: BTreeSet<String>,
    pub score: Option<Rational>,
    pub variants: Vec<(VariantKind, BTreeSet<usize>)>,
}

impl Suggestion {
    pub fn from_emo(method: &str, rank: usize, emo: &Emo, map: Option<&SourceMap>) -> Self {
        Suggestion {
            method: method.to_owned(),
            rank,
            span: emo.span,
            members: emo.members.clone(),
            lines: map.and_then(|m| m.map_range(emo.span.0, emo.span.1).ok()),
            params: emo.params.clone(),
            returns: emo.returns.clone(),
            score: Some(emo.score),
            variants: emo.variants.iter().map(|v| (v.kind, v.members.clone())).collect(),
        }
    }

    pub fn opportunity(&self) -> Opportunity {
        Opportunity::new(&self.method, self.span.0, self.span.1)
    }
}

fn words(set: &BTreeSet<String>) -> String {
    if set.is_empty() {
        "-".into()
    } else {
        set.iter().cloned().collect::<Vec<_>>().join(" ")
    }
}

pub fn render(suggestions: &[Suggestion]) -> String {
    let mut out = String::new();
    let mut current: Option<&str> = None;
    for s in suggestions {
        if current != Some(s.method.as_str()) {
            let _ = writeln!(out, "method {}", s.method);
            current = Some(&s.method);
        }
        let _ = writeln!(out, "emo {}", s.rank);
        let _ = writeln!(out, "span {} {}", s.span.0, s.span.1);
        let _ = writeln!(out, "members {}", format_members(&s.members));
        if let Some((a, b)) = s.lines {
            let _ = writeln!(out, "lines {a} {b}");
        }
        let _ = writeln!(out, "params {}", words(&s.params));
        let _ = writeln!(out, "returns {}", words(&s.returns));
        if let Some(score) = s.score {
            let _ = writeln!(out, "score {} {:.4}", score, to_f64(score));
        }
        for (kind, members) in &s.variants {
            let _ = writeln!(out, "variant {} {}", kind.name(), format_members(members));
        }
        out.push_str("end\n");
    }
    out
}

fn parse_members(text: &str) -> Option<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                if a > b {
                    return None;
                }
                out.extend(a..=b);
            }
            None => {
                out.insert(part.parse().ok()?);
            }
        }
    }
    Some(out)
}

/// Parses a file produced by [`render`].
pub fn parse(text: &str) -> Result<Vec<Suggestion>, EvalError> {
    let mut out = Vec::new();
    let mut method: Option<String> = None;
    let mut cur: Option<Suggestion> = None;
    for (n, raw) in text.lines().enumerate() {
        let err = |message: &str| EvalError::Syntax { line: n + 1, message: message.to_owned() };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let rest = rest.trim();
        let nums = || -> Result<(usize, usize), EvalError> {
            let v: Vec<usize> = rest.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| err("expected numbers"))?;
            match v[..] {
                [a, b] if a <= b => Ok((a, b)),
                _ => Err(err("expected `start end`")),
            }
        };
        let names = || -> BTreeSet<String> {
            if rest == "-" {
                BTreeSet::new()
            } else {
                rest.split_whitespace().map(str::to_owned).collect()
            }
        };
        match key {
            "method" if cur.is_none() => {
                if rest.is_empty() {
                    return Err(err("missing method name"));
                }
                method = Some(rest.to_owned());
            }
            "emo" if cur.is_none() => {
                let rank = rest.parse().map_err(|_| err("expected a rank"))?;
                let m = method.clone().ok_or_else(|| err("`emo` before any `method`"))?;
                cur = Some(Suggestion {
                    method: m,
                    rank,
                    span: (0, 0),
                    members: BTreeSet::new(),
                    lines: None,
                    params: BTreeSet::new(),
                    returns: BTreeSet::new(),
                    score: None,
                    variants: Vec::new(),
                });
            }
            "end" => out.push(cur.take().ok_or_else(|| err("`end` outside a record"))?),
            _ => {
                let s = cur.as_mut().ok_or_else(|| err("field outside a record"))?;
                match key {
                    "span" => s.span = nums()?,
                    "lines" => s.lines = Some(nums()?),
                    "members" => s.members = parse_members(rest).ok_or_else(|| err("bad member list"))?,
                    "params" => s.params = names(),
                    "returns" => s.returns = names(),
                    "score" => {
                        let frac = rest.split_whitespace().next().unwrap_or("");
                        s.score = Some(frac.parse().map_err(|_| err("bad score"))?);
                    }
                    "variant" => {
                        let (kind, members) = rest.split_once(' ').unwrap_or((rest, ""));
                        let kind = VariantKind::from_name(kind).ok_or_else(|| err("unknown variant kind"))?;
                        let members = parse_members(members).ok_or_else(|| err("bad member list"))?;
                        s.variants.push((kind, members));
                    }
                    _ => return Err(err(&format!("unknown field `{key}`"))),
                }
            }
        }
    }
    if cur.is_some() {
        return Err(EvalError::Syntax { line: text.lines().count(), message: "unterminated record".into() });
    }
    Ok(out)
}
