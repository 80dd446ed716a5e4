//! Seeded program samplers and brute-force oracles for property tests.

use std::collections::{BTreeMap, BTreeSet};

use emo_core::eval::Opportunity;
use emo_core::ir::{IrProgram, IrStatement, StatementKind};
use emo_core::sdg::{Sdg, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const VARS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

enum Tree {
    Leaf(IrStatement),
    Block(StatementKind, Vec<String>, Vec<Tree>),
}

fn pick_vars(r: &mut impl Rng, lo: usize, hi: usize) -> Vec<String> {
    let n = r.gen_range(lo..=hi);
    let mut v: Vec<String> = Vec::new();
    for _ in 0..n {
        let x = VARS.choose(r).unwrap().to_string();
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v
}

struct IrSampler<'r, R: Rng> {
    r: &'r mut R,
    budget: usize,
}

impl<R: Rng> IrSampler<'_, R> {
    fn take(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    fn body(&mut self, depth: usize, in_loop: bool) -> Vec<Tree> {
        let n = self.r.gen_range(0..=4usize);
        let mut out = Vec::new();
        for _ in 0..n {
            match self.statement(depth, in_loop) {
                Some(t) => out.push(t),
                None => break,
            }
        }
        out
    }

    fn statement(&mut self, depth: usize, in_loop: bool) -> Option<Tree> {
        if !self.take() {
            return None;
        }
        let roll = self.r.gen_range(0..100);
        let nested = depth < 4 && self.budget > 2;
        Some(match roll {
            0..=34 => {
                let t = VARS.choose(self.r).unwrap();
                let used = pick_vars(self.r, 0, 3);
                Tree::Leaf(IrStatement::assign(t, &used.iter().map(String::as_str).collect::<Vec<_>>()))
            }
            35..=44 => Tree::Leaf(IrStatement::input(&[VARS.choose(self.r).unwrap()])),
            45..=54 => {
                let used = pick_vars(self.r, 1, 2);
                Tree::Leaf(IrStatement::output(&used.iter().map(String::as_str).collect::<Vec<_>>()))
            }
            55..=59 => Tree::Leaf(IrStatement::invar()),
            60..=62 if in_loop => {
                Tree::Leaf(if self.r.gen_bool(0.7) { IrStatement::brk() } else { IrStatement::cont() })
            }
            63..=79 if nested => self.if_chain(StatementKind::If, depth, in_loop),
            80..=93 if nested => {
                let vars = pick_vars(self.r, 0, 2);
                let body = self.body(depth + 1, true);
                Tree::Block(StatementKind::Loop, vars, body)
            }
            94..=99 if nested => {
                let vars = pick_vars(self.r, 1, 1);
                let case = self.case_chain(depth + 1, in_loop);
                Tree::Block(StatementKind::DoCase, vars, case.into_iter().collect())
            }
            _ => Tree::Leaf(IrStatement::assign(VARS.choose(self.r).unwrap(), &[])),
        })
    }

    /// The header statement has already been counted.
    fn if_chain(&mut self, kind: StatementKind, depth: usize, in_loop: bool) -> Tree {
        let vars = pick_vars(self.r, 0, 2);
        let mut body = self.body(depth + 1, in_loop);
        if self.r.gen_bool(0.4) && self.take() {
            if self.r.gen_bool(0.3) {
                body.push(self.if_chain(StatementKind::ElseIf, depth + 1, in_loop));
            } else {
                let else_body = self.body(depth + 1, in_loop);
                body.push(Tree::Block(StatementKind::Else, Vec::new(), else_body));
            }
        }
        Tree::Block(kind, vars, body)
    }

    fn case_chain(&mut self, depth: usize, in_loop: bool) -> Option<Tree> {
        if !self.take() {
            return None;
        }
        let mut body = self.body(depth + 1, in_loop);
        if self.r.gen_bool(0.5) {
            if let Some(next) = self.case_chain(depth + 1, in_loop) {
                body.push(next);
            }
        }
        Some(Tree::Block(StatementKind::Case, Vec::new(), body))
    }
}

fn flatten(trees: Vec<Tree>, out: &mut Vec<IrStatement>) {
    for t in trees {
        match t {
            Tree::Leaf(s) => out.push(s),
            Tree::Block(kind, vars, children) => {
                let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
                out.push(IrStatement::block(kind, &refs, children.len()));
                flatten(children, out);
            }
        }
    }
}

/// A structurally valid random program of at most `max_len` statements.
pub fn random_ir(r: &mut impl Rng, max_len: usize) -> IrProgram {
    let target = r.gen_range(1..=max_len.max(1));
    let mut s = IrSampler { r, budget: target };
    let mut trees = Vec::new();
    while let Some(t) = s.statement(0, false) {
        trees.push(t);
    }
    let mut stmts = Vec::new();
    flatten(trees, &mut stmts);
    IrProgram::new(stmts).expect("sampler emits valid programs")
}

/// A random toy-language program and the statement counts needed to
/// predict its IR length.
pub struct SampledSource {
    pub text: String,
    /// Statements that lower to exactly one IR statement, counting `else`,
    /// `case` and loop headers.
    pub simple: usize,
    /// Sum over I/O calls of (variables - 1).
    pub io_extra: usize,
    pub for_loops: usize,
    /// Condition variables of every loop header, in order of appearance.
    pub loop_conditions: Vec<Vec<String>>,
}

impl SampledSource {
    pub fn expected_len(&self, split_io: bool, reduced_loop: bool) -> usize {
        self.simple + if split_io { self.io_extra } else { 0 } + self.for_loops * if reduced_loop { 1 } else { 2 }
    }
}

struct SrcSampler<'r, R: Rng> {
    r: &'r mut R,
    budget: usize,
    out: SampledSource,
}

impl<R: Rng> SrcSampler<'_, R> {
    fn var(&mut self) -> String {
        VARS.choose(self.r).unwrap().to_string()
    }

    /// Expression over distinct variables; returns (text, vars).
    fn expr(&mut self, min_vars: usize) -> (String, Vec<String>) {
        let mut vars: Vec<String> = Vec::new();
        let n = self.r.gen_range(min_vars..=min_vars + 2);
        for _ in 0..n {
            let v = self.var();
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        if vars.is_empty() {
            return (self.r.gen_range(0..10).to_string(), vars);
        }
        let ops = ["+", "-", "*", "<", "<=", "==", "&&", "%"];
        let mut text = String::new();
        for (i, v) in vars.iter().enumerate() {
            if i > 0 {
                text.push_str(&format!(" {} ", ops.choose(self.r).unwrap()));
            }
            if self.r.gen_bool(0.2) {
                text.push_str(&format!("({v} + 1)"));
            } else {
                text.push_str(v);
            }
        }
        (text, vars)
    }

    fn block(&mut self, indent: usize, in_loop: bool, text: &mut String) {
        let n = self.r.gen_range(0..=3);
        for _ in 0..n {
            if self.budget == 0 {
                break;
            }
            self.statement(indent, in_loop, text);
        }
    }

    fn line(&self, indent: usize, s: &str, text: &mut String) {
        text.push_str(&"  ".repeat(indent));
        text.push_str(s);
        text.push('\n');
    }

    fn statement(&mut self, indent: usize, in_loop: bool, text: &mut String) {
        self.budget -= 1;
        let nested = indent < 4 && self.budget > 3;
        let roll = self.r.gen_range(0..100);
        match roll {
            0..=29 => {
                let t = self.var();
                let (e, _) = self.expr(0);
                let forms = [format!("{t} = {e};"), format!("{t} += {e};"), format!("{t}++;"), format!("int {t} = {e};")];
                let s = forms.choose(self.r).unwrap().clone();
                self.out.simple += 1;
                self.line(indent, &s, text);
            }
            30..=39 => {
                let k = self.r.gen_range(1..=3);
                let mut vars: Vec<String> = Vec::new();
                for _ in 0..k {
                    let v = self.var();
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
                let fmt = vec!["%d"; vars.len()].join(" ");
                let args: Vec<String> = vars.iter().map(|v| format!("&{v}")).collect();
                self.out.simple += 1;
                self.out.io_extra += vars.len() - 1;
                self.line(indent, &format!("scanf(\"{fmt}\", {});", args.join(", ")), text);
            }
            40..=49 => {
                let (e, vars) = self.expr(0);
                self.out.simple += 1;
                if vars.is_empty() {
                    self.line(indent, "printf(\"done\\n\");", text);
                } else {
                    self.out.io_extra += vars.len() - 1;
                    self.line(indent, &format!("printf(\"%d\\n\", {e});"), text);
                }
            }
            50..=52 => self.line(indent, "int unused;", text),
            53..=56 if in_loop => {
                self.out.simple += 1;
                let s = if self.r.gen_bool(0.5) { "break;" } else { "continue;" };
                self.line(indent, s, text);
            }
            57..=74 if nested => {
                let (c, _) = self.expr(1);
                self.out.simple += 1;
                self.line(indent, &format!("if ({c}) {{"), text);
                self.block(indent + 1, in_loop, text);
                if self.r.gen_bool(0.4) && self.budget > 0 {
                    self.budget -= 1;
                    self.out.simple += 1;
                    self.line(indent, "} else {", text);
                    self.block(indent + 1, in_loop, text);
                }
                self.line(indent, "}", text);
            }
            75..=86 if nested => {
                let i = self.var();
                let (c, vars) = self.expr(1);
                let mut cond_vars = vec![i.clone()];
                for v in vars {
                    if !cond_vars.contains(&v) {
                        cond_vars.push(v);
                    }
                }
                self.out.simple += 1;
                self.out.for_loops += 1;
                self.out.loop_conditions.push(cond_vars);
                self.line(indent, &format!("for ({i} = 0; {i} < {c}; {i}++) {{"), text);
                self.block(indent + 1, true, text);
                self.line(indent, "}", text);
            }
            87..=93 if nested => {
                let (c, vars) = self.expr(1);
                self.out.simple += 1;
                self.out.loop_conditions.push(vars);
                self.line(indent, &format!("while ({c}) {{"), text);
                self.block(indent + 1, true, text);
                self.line(indent, "}", text);
            }
            94..=99 if nested => {
                let v = self.var();
                self.out.simple += 1;
                self.line(indent, &format!("switch ({v}) {{"), text);
                let cases = self.r.gen_range(1..=3);
                for k in 0..cases {
                    if k > 0 && self.budget == 0 {
                        break;
                    }
                    self.budget = self.budget.saturating_sub(1);
                    self.out.simple += 1;
                    let label = if k + 1 == cases && self.r.gen_bool(0.5) { "default:".to_string() } else { format!("case {k}:") };
                    self.line(indent + 1, &label, text);
                    self.block(indent + 2, in_loop, text);
                }
                self.line(indent, "}", text);
            }
            _ => {
                let t = self.var();
                self.out.simple += 1;
                self.line(indent, &format!("{t} = 1;"), text);
            }
        }
    }
}

/// A random toy program of roughly `max_stmts` statements, optionally
/// wrapped in a function.
pub fn random_source(r: &mut impl Rng, max_stmts: usize) -> SampledSource {
    let budget = r.gen_range(1..=max_stmts.max(1));
    let wrap = r.gen_bool(0.5);
    let mut s = SrcSampler {
        r,
        budget,
        out: SampledSource { text: String::new(), simple: 0, io_extra: 0, for_loops: 0, loop_conditions: Vec::new() },
    };
    let mut text = String::new();
    let indent = usize::from(wrap);
    while s.budget > 0 {
        s.statement(indent, false, &mut text);
    }
    let mut out = s.out;
    out.text = if wrap { format!("void sampled() {{\n{text}}}\n") } else { text };
    out
}

/// Data edges by plain rescan: for every use, walk backwards to the nearest
/// statement listing the variable among its definitions.
pub fn brute_data_edges(p: &IrProgram) -> BTreeSet<(usize, usize)> {
    let stmts = p.statements();
    let mut edges = BTreeSet::new();
    for (v, s) in stmts.iter().enumerate() {
        for var in &s.used {
            let mut j = v;
            while j > 0 {
                j -= 1;
                if stmts[j].defined.contains(var) {
                    edges.insert((j, v));
                    break;
                }
            }
        }
    }
    edges
}

/// Block membership by interval arithmetic over the flat statement list.
pub fn brute_control_parents(p: &IrProgram) -> Vec<Option<usize>> {
    // extent[i]: last index covered by statement i
    let stmts = p.statements();
    let n = stmts.len();
    let mut extent = vec![0usize; n];
    for i in (0..n).rev() {
        let mut end = i;
        if let Some(len) = stmts[i].block_length.filter(|_| stmts[i].kind.is_block()) {
            for _ in 0..len {
                end = extent[end + 1];
            }
        }
        extent[i] = end;
    }
    let mut parents = vec![None; n];
    for i in 0..n {
        let mut child = i + 1;
        while child <= extent[i] {
            parents[child] = Some(i);
            child = extent[child] + 1;
        }
    }
    parents
}

/// Relay shares recomputed with a transitive closure over the data edges
/// restricted to `allowed`.
pub fn brute_relay_share(
    g: &Sdg,
    allowed: &BTreeSet<VertexId>,
    producers: &BTreeSet<VertexId>,
    relays: &BTreeSet<VertexId>,
) -> BTreeMap<VertexId, BTreeSet<VertexId>> {
    let ids: Vec<VertexId> = allowed.iter().copied().collect();
    let idx: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = ids.len();
    let mut reach = vec![vec![false; n]; n];
    for (u, v) in g.data_edges() {
        if let (Some(&a), Some(&b)) = (idx.get(&u), idx.get(&v)) {
            reach[a][b] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    relays
        .iter()
        .map(|&r| {
            let share = producers
                .iter()
                .copied()
                .filter(|&p| p != r)
                .filter(|p| match (idx.get(p), idx.get(&r)) {
                    (Some(&a), Some(&b)) => reach[a][b],
                    _ => false,
                })
                .collect();
            (r, share)
        })
        .collect()
}

/// Exhaustive one-to-one matching: maximum number of pairs, then minimum
/// total deviation. Returns (pairs, total deviation).
pub fn brute_matching(sugg: &[Opportunity], marks: &[Opportunity], tolerance: usize) -> (usize, usize) {
    fn go(
        i: usize,
        sugg: &[Opportunity],
        marks: &[Opportunity],
        tol: usize,
        used: &mut Vec<bool>,
    ) -> (usize, usize) {
        if i == sugg.len() {
            return (0, 0);
        }
        // leave suggestion i unmatched
        let mut best = go(i + 1, sugg, marks, tol, used);
        for j in 0..marks.len() {
            let s = &sugg[i];
            let m = &marks[j];
            if used[j] || s.method != m.method {
                continue;
            }
            let (ds, de) = (s.start.abs_diff(m.start), s.end.abs_diff(m.end));
            if ds > tol || de > tol {
                continue;
            }
            used[j] = true;
            let (k, d) = go(i + 1, sugg, marks, tol, used);
            used[j] = false;
            let cand = (k + 1, d + ds + de);
            if cand.0 > best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                best = cand;
            }
        }
        best
    }
    go(0, sugg, marks, tolerance, &mut vec![false; marks.len()])
}

/// Members partition `0..n` exactly.
pub fn is_partition(g: &Sdg, n: usize) -> bool {
    let mut seen = BTreeSet::new();
    for v in g.vertices() {
        if v.members.is_empty() {
            return false;
        }
        for &m in &v.members {
            if m >= n || !seen.insert(m) {
                return false;
            }
        }
    }
    seen.len() == n
}

/// Random opportunities over a small index range for matching checks.
pub fn random_opportunities(r: &mut impl Rng, count: usize, methods: &[&str]) -> Vec<Opportunity> {
    (0..count)
        .map(|_| {
            let start = r.gen_range(0..20);
            let len = r.gen_range(0..8);
            Opportunity::new(methods.choose(r).unwrap(), start, start + len)
        })
        .collect()
}
