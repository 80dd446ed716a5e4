//! Segment IR: a minimal statement-level representation. Each statement keeps
//! its primitive and the variables it defines and uses; control statements
//! also record how many statements they directly control.
//!
//! The text format is one statement per line:
//!
//! ```text
//! 0. invar
//! 1. input n
//! 3. if n 2
//! 4.   output a
//! 5.   else 3
//! ```
//!
//! The leading `N.` index and indentation are optional and ignored on input;
//! a statement's index is its position. Lines starting with `#` are comments.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::IrError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatementKind {
    Input,
    Output,
    Assign,
    If,
    ElseIf,
    Else,
    DoCase,
    Case,
    Loop,
    Break,
    Continue,
    Invar,
}

/// Role of a control statement in the dependence graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlClass {
    /// `if`, `loop`, `docase`.
    Primary,
    /// `else`, `elseif`, `case`, `break`, `continue`.
    Secondary,
    None,
}

impl StatementKind {
    pub const ALL: [StatementKind; 12] = [
        StatementKind::Input,
        StatementKind::Output,
        StatementKind::Assign,
        StatementKind::If,
        StatementKind::ElseIf,
        StatementKind::Else,
        StatementKind::DoCase,
        StatementKind::Case,
        StatementKind::Loop,
        StatementKind::Break,
        StatementKind::Continue,
        StatementKind::Invar,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            StatementKind::Input => "input",
            StatementKind::Output => "output",
            StatementKind::Assign => "assign",
            StatementKind::If => "if",
            StatementKind::ElseIf => "elseif",
            StatementKind::Else => "else",
            StatementKind::DoCase => "docase",
            StatementKind::Case => "case",
            StatementKind::Loop => "loop",
            StatementKind::Break => "break",
            StatementKind::Continue => "continue",
            StatementKind::Invar => "invar",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    /// Kinds that carry a block length.
    pub fn is_block(self) -> bool {
        matches!(
            self,
            StatementKind::If
                | StatementKind::ElseIf
                | StatementKind::Else
                | StatementKind::DoCase
                | StatementKind::Case
                | StatementKind::Loop
        )
    }

    pub fn control_class(self) -> ControlClass {
        match self {
            StatementKind::If | StatementKind::Loop | StatementKind::DoCase => ControlClass::Primary,
            StatementKind::ElseIf
            | StatementKind::Else
            | StatementKind::Case
            | StatementKind::Break
            | StatementKind::Continue => ControlClass::Secondary,
            _ => ControlClass::None,
        }
    }

    /// Block kinds whose line lists decision variables before the length.
    fn takes_decision_vars(self) -> bool {
        matches!(
            self,
            StatementKind::If | StatementKind::ElseIf | StatementKind::DoCase | StatementKind::Loop
        )
    }
}

impl fmt::Display for StatementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IrStatement {
    pub index: usize,
    pub kind: StatementKind,
    /// l-values; one entry for `assign`, one or more for `input`.
    pub defined: Vec<String>,
    pub used: Vec<String>,
    /// Number of statements directly dependent on this one.
    pub block_length: Option<usize>,
}

impl IrStatement {
    fn bare(kind: StatementKind) -> Self {
        IrStatement { index: 0, kind, defined: Vec::new(), used: Vec::new(), block_length: None }
    }

    pub fn invar() -> Self {
        Self::bare(StatementKind::Invar)
    }

    pub fn brk() -> Self {
        Self::bare(StatementKind::Break)
    }

    pub fn cont() -> Self {
        Self::bare(StatementKind::Continue)
    }

    pub fn assign(target: &str, sources: &[&str]) -> Self {
        IrStatement {
            defined: vec![target.to_owned()],
            used: sources.iter().map(|s| s.to_string()).collect(),
            ..Self::bare(StatementKind::Assign)
        }
    }

    pub fn input(vars: &[&str]) -> Self {
        IrStatement { defined: vars.iter().map(|s| s.to_string()).collect(), ..Self::bare(StatementKind::Input) }
    }

    pub fn output(vars: &[&str]) -> Self {
        IrStatement { used: vars.iter().map(|s| s.to_string()).collect(), ..Self::bare(StatementKind::Output) }
    }

    /// A block statement (`if`, `loop`, `else`, ...). Variables are ignored for
    /// `else` and `case`.
    pub fn block(kind: StatementKind, vars: &[&str], length: usize) -> Self {
        debug_assert!(kind.is_block());
        let used = if kind.takes_decision_vars() { vars.iter().map(|s| s.to_string()).collect() } else { Vec::new() };
        IrStatement { used, block_length: Some(length), ..Self::bare(kind) }
    }

    pub fn is_control_block(&self) -> bool {
        self.kind.is_block()
    }

    fn shape_problem(&self) -> Option<String> {
        use StatementKind::*;
        let has_len = self.block_length.is_some();
        match self.kind {
            Assign if self.defined.len() != 1 => Some("assign must define exactly one variable".into()),
            Input if self.defined.is_empty() => Some("input must define at least one variable".into()),
            Input if !self.used.is_empty() => Some("input must not use variables".into()),
            Output if self.used.is_empty() => Some("output must use at least one variable".into()),
            Output if !self.defined.is_empty() => Some("output must not define variables".into()),
            k if k.is_block() && !has_len => Some(format!("{k} requires a block length")),
            k if !k.is_block() && has_len => Some(format!("{k} must not carry a block length")),
            k if k.is_block() && !self.defined.is_empty() => Some(format!("{k} must not define variables")),
            Else | Case if !self.used.is_empty() => Some(format!("{} must not use variables", self.kind)),
            Break | Continue | Invar if !self.defined.is_empty() || !self.used.is_empty() => {
                Some(format!("{} must not reference variables", self.kind))
            }
            _ => None,
        }
    }
}

impl fmt::Display for IrStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.keyword())?;
        for v in self.defined.iter().chain(&self.used) {
            write!(f, " {v}")?;
        }
        if let Some(len) = self.block_length {
            write!(f, " {len}")?;
        }
        Ok(())
    }
}

/// Structural rule broken by a program, reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticRule {
    /// A statement's `index` field disagrees with its position.
    IndexMismatch,
    /// Malformed statement, e.g. `assign` without an l-value.
    Shape(String),
    /// A block needs more statements than the program has.
    Overrun { missing: usize },
    /// A block would fit on its own, but a nested block consumes the
    /// statements it needs.
    PartialOverlap { nested: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub index: usize,
    pub rule: DiagnosticRule,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            DiagnosticRule::IndexMismatch => write!(f, "statement {}: index does not match position", self.index),
            DiagnosticRule::Shape(msg) => write!(f, "statement {}: {msg}", self.index),
            DiagnosticRule::Overrun { missing } => {
                write!(f, "statement {}: block length overruns the program by {missing} statement(s)", self.index)
            }
            DiagnosticRule::PartialOverlap { nested } => write!(
                f,
                "statement {}: block partially overlaps the nested block at {nested}",
                self.index
            ),
        }
    }
}

/// Direct control parent of every statement plus the structural diagnostics
/// found while recovering it.
fn recover_structure(statements: &[IrStatement]) -> (Vec<Option<usize>>, Vec<Diagnostic>) {
    struct Open {
        root: usize,
        remaining: usize,
        last_child_block: Option<usize>,
    }
    let mut parents = vec![None; statements.len()];
    let mut stack: Vec<Open> = Vec::new();
    for (i, stmt) in statements.iter().enumerate() {
        while stack.last().is_some_and(|o| o.remaining == 0) {
            stack.pop();
        }
        if let Some(open) = stack.last_mut() {
            parents[i] = Some(open.root);
            open.remaining -= 1;
            if stmt.is_control_block() {
                open.last_child_block = Some(i);
            }
        }
        if let Some(len) = stmt.block_length.filter(|_| stmt.is_control_block()) {
            if len > 0 {
                stack.push(Open { root: i, remaining: len, last_child_block: None });
            }
        }
    }
    let n = statements.len();
    let mut diagnostics = Vec::new();
    for open in stack.iter().filter(|o| o.remaining > 0) {
        let len = statements[open.root].block_length.unwrap_or(0);
        let flat_end = open.root + len;
        let rule = match open.last_child_block {
            Some(nested) if flat_end < n => DiagnosticRule::PartialOverlap { nested },
            _ => DiagnosticRule::Overrun { missing: open.remaining },
        };
        diagnostics.push(Diagnostic { index: open.root, rule });
    }
    (parents, diagnostics)
}

/// An indexed sequence of segment IR statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrProgram {
    statements: Vec<IrStatement>,
    parents: Vec<Option<usize>>,
}

impl IrProgram {
    /// Builds a program without checking structure; indices are reassigned
    /// from positions. Use [`validate`] to inspect well-formedness.
    pub fn from_statements(statements: Vec<IrStatement>) -> Self {
        let statements: Vec<IrStatement> =
            statements.into_iter().enumerate().map(|(i, s)| IrStatement { index: i, ..s }).collect();
        let (parents, _) = recover_structure(&statements);
        IrProgram { statements, parents }
    }

    /// Builds a program and rejects it if [`validate`] reports anything.
    pub fn new(statements: Vec<IrStatement>) -> Result<Self, IrError> {
        let program = Self::from_statements(statements);
        let diagnostics = validate(&program);
        if diagnostics.is_empty() {
            Ok(program)
        } else {
            Err(IrError::Invalid(diagnostics))
        }
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn statements(&self) -> &[IrStatement] {
        &self.statements
    }

    pub fn get(&self, id: usize) -> Option<&IrStatement> {
        self.statements.get(id)
    }

    fn stmt(&self, id: usize) -> Result<&IrStatement, IrError> {
        self.statements.get(id).ok_or(IrError::OutOfRange { index: id, len: self.len() })
    }

    pub fn defined_at(&self, id: usize) -> Result<BTreeSet<&str>, IrError> {
        Ok(self.stmt(id)?.defined.iter().map(String::as_str).collect())
    }

    pub fn used_at(&self, id: usize) -> Result<BTreeSet<&str>, IrError> {
        Ok(self.stmt(id)?.used.iter().map(String::as_str).collect())
    }

    /// Greatest `j < id` whose statement defines `var`.
    pub fn last_defined(&self, var: &str, id: usize) -> Option<usize> {
        let end = id.min(self.len());
        (0..end).rev().find(|&j| self.statements[j].defined.iter().any(|d| d == var))
    }

    pub fn is_control_block(&self, id: usize) -> bool {
        self.statements.get(id).is_some_and(IrStatement::is_control_block)
    }

    /// Control statements strictly between `start` and `end`.
    pub fn get_ctrl_blocks(&self, start: usize, end: usize) -> BTreeSet<usize> {
        let end = end.min(self.len());
        (start.saturating_add(1)..end).filter(|&i| self.is_control_block(i)).collect()
    }

    pub fn get_length(&self, id: usize) -> Result<usize, IrError> {
        let stmt = self.stmt(id)?;
        stmt.block_length.filter(|_| stmt.is_control_block()).ok_or(IrError::NotControl { index: id })
    }

    pub fn get_length_sum(&self, id1: usize, id2: usize) -> usize {
        self.get_ctrl_blocks(id1, id2).into_iter().filter_map(|b| self.get_length(b).ok()).sum()
    }

    /// Whether `cid` sits directly inside the block opened at `pid`.
    ///
    /// Answered from the recovered block tree rather than from the offset
    /// arithmetic `(cid - pid) - get_length_sum(pid, cid)`, which also accepts
    /// statements nested one level deeper (e.g. `(3, 7)` in the Fibonacci
    /// program).
    pub fn is_control_parent(&self, pid: usize, cid: usize) -> Result<bool, IrError> {
        self.stmt(pid)?;
        self.stmt(cid)?;
        Ok(pid < cid && self.parents[cid] == Some(pid))
    }

    /// Direct control parent of `id`, if any.
    pub fn control_parent(&self, id: usize) -> Option<usize> {
        self.parents.get(id).copied().flatten()
    }

    /// Nesting depth of each statement (top level is 0).
    pub fn depths(&self) -> Vec<usize> {
        let mut depths = vec![0; self.len()];
        for i in 0..self.len() {
            depths[i] = self.parents[i].map_or(0, |p| depths[p] + 1);
        }
        depths
    }

    /// Normalized text: `N. <indent><statement>` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (stmt, depth) in self.statements.iter().zip(self.depths()) {
            out.push_str(&format!("{}. {}{}\n", stmt.index, "  ".repeat(depth), stmt));
        }
        out
    }
}

impl fmt::Display for IrProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Every broken program invariant, in index order.
pub fn validate(p: &IrProgram) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, stmt) in p.statements.iter().enumerate() {
        if stmt.index != i {
            out.push(Diagnostic { index: i, rule: DiagnosticRule::IndexMismatch });
        }
        if let Some(msg) = stmt.shape_problem() {
            out.push(Diagnostic { index: i, rule: DiagnosticRule::Shape(msg) });
        }
    }
    out.extend(recover_structure(&p.statements).1);
    out.sort_by_key(|d| d.index);
    out
}

fn is_identifier(tok: &str) -> bool {
    let mut chars = tok.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn strip_index(line: &str) -> &str {
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return line;
    }
    let rest = &line[digits..];
    if let Some(r) = rest.strip_prefix('.') {
        r
    } else if rest.starts_with(char::is_whitespace) {
        rest
    } else {
        line
    }
}

fn parse_line(line_no: usize, body: &str) -> Result<IrStatement, IrError> {
    let err = |message: String| IrError::Syntax { line: line_no, message };
    let mut tokens = body.split_whitespace();
    let word = tokens.next().ok_or_else(|| err("empty statement".into()))?;
    let kind = StatementKind::from_keyword(word).ok_or_else(|| err(format!("unknown keyword `{word}`")))?;
    let mut rest: Vec<&str> = tokens.collect();

    let block_length = if kind.is_block() {
        let last = rest.pop().ok_or_else(|| err(format!("`{kind}` requires a block length")))?;
        let len = last
            .parse::<usize>()
            .map_err(|_| err(format!("`{kind}` must end with an unsigned block length, found `{last}`")))?;
        Some(len)
    } else {
        None
    };
    if let Some(bad) = rest.iter().find(|t| !is_identifier(t)) {
        return Err(err(format!("`{bad}` is not a variable identifier")));
    }
    let vars: Vec<String> = rest.iter().map(|s| s.to_string()).collect();

    use StatementKind::*;
    let stmt = match kind {
        Assign => {
            let (first, others) = vars.split_first().ok_or_else(|| err("`assign` requires an l-value".into()))?;
            IrStatement { defined: vec![first.clone()], used: others.to_vec(), ..IrStatement::bare(Assign) }
        }
        Input => {
            if vars.is_empty() {
                return Err(err("`input` requires at least one variable".into()));
            }
            IrStatement { defined: vars, ..IrStatement::bare(Input) }
        }
        Output => {
            if vars.is_empty() {
                return Err(err("`output` requires at least one variable (use `invar`)".into()));
            }
            IrStatement { used: vars, ..IrStatement::bare(Output) }
        }
        Else | Case | Break | Continue | Invar if !vars.is_empty() => {
            return Err(err(format!("`{kind}` takes no variables")));
        }
        _ => IrStatement { used: vars, block_length, ..IrStatement::bare(kind) },
    };
    Ok(stmt)
}

/// Parses IR text without structural checks.
pub fn parse_ir_unchecked(text: &str) -> Result<IrProgram, IrError> {
    let mut statements = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        statements.push(parse_line(n + 1, strip_index(line).trim())?);
    }
    Ok(IrProgram::from_statements(statements))
}

/// Parses IR text and rejects structurally invalid programs.
pub fn parse_ir(text: &str) -> Result<IrProgram, IrError> {
    let program = parse_ir_unchecked(text)?;
    let diagnostics = validate(&program);
    if diagnostics.is_empty() {
        Ok(program)
    } else {
        Err(IrError::Invalid(diagnostics))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIB: &str = include_str!("../fixtures/fibo_prime.ir");

    fn fib() -> IrProgram {
        parse_ir(FIB).unwrap()
    }

    fn set(items: &[&'static str]) -> BTreeSet<&'static str> {
        items.iter().copied().collect()
    }

    #[test]
    fn parses_fixture_lines() {
        let p = fib();
        assert_eq!(p.len(), 23);
        let s1 = p.get(1).unwrap();
        assert_eq!(s1.kind, StatementKind::Input);
        assert_eq!(s1.defined, vec!["n"]);
        assert_eq!(p.get(0).unwrap().kind, StatementKind::Invar);
        let s16 = p.get(16).unwrap();
        assert_eq!((s16.kind, s16.used.clone(), s16.block_length), (StatementKind::If, vec!["b".into(), "i".into()], Some(1)));
    }

    #[test]
    fn defined_and_used() {
        let p = fib();
        assert_eq!(p.defined_at(1).unwrap(), set(&["n"]));
        assert_eq!(p.defined_at(9).unwrap(), set(&["t"]));
        assert!(p.defined_at(0).unwrap().is_empty());
        assert_eq!(p.used_at(9).unwrap(), set(&["a", "b"]));
        assert!(p.used_at(1).unwrap().is_empty());
        assert_eq!(p.used_at(16).unwrap(), set(&["b", "i"]));
        assert!(matches!(p.defined_at(23), Err(IrError::OutOfRange { .. })));
    }

    #[test]
    fn last_definition() {
        let p = fib();
        assert_eq!(p.last_defined("b", 13), Some(11));
        assert_eq!(p.last_defined("b", 11), Some(6));
        assert_eq!(p.last_defined("n", 1), None);
    }

    #[test]
    fn control_queries() {
        let p = fib();
        assert!(p.is_control_block(5));
        assert!(!p.is_control_block(6));
        assert!(!p.is_control_block(17));
        assert_eq!(p.get_ctrl_blocks(3, 17), [5, 8, 15, 16].into());
        assert!(p.get_ctrl_blocks(9, 12).is_empty());
        assert_eq!(p.get_ctrl_blocks(2, 14), [3, 5, 8].into());
        assert_eq!(p.get_length(8).unwrap(), 4);
        assert_eq!(p.get_length(5).unwrap(), 3);
        assert_eq!(p.get_length(16).unwrap(), 1);
        assert!(matches!(p.get_length(6), Err(IrError::NotControl { index: 6 })));
        assert_eq!(p.get_length_sum(2, 14), 9);
        assert_eq!(p.get_length_sum(3, 14), 7);
        assert_eq!(p.get_length_sum(9, 12), 0);
    }

    #[test]
    fn direct_parents() {
        let p = fib();
        assert!(p.is_control_parent(8, 12).unwrap());
        assert!(p.is_control_parent(5, 8).unwrap());
        assert!(!p.is_control_parent(5, 9).unwrap());
        // offset arithmetic alone would accept this pair
        assert!(!p.is_control_parent(3, 7).unwrap());
        assert!(p.is_control_parent(5, 7).unwrap());
        assert!(p.is_control_parent(21, 22).unwrap());
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in ["frobnicate x", "if x", "loop a b", "assign 1x", "else 1 x", "break x", "output", "assign"] {
            assert!(matches!(parse_ir_unchecked(bad), Err(IrError::Syntax { .. })), "{bad}");
        }
        assert!(matches!(parse_ir("if x 5"), Err(IrError::Invalid(_))));
    }

    #[test]
    fn ignores_indices_comments_and_indentation() {
        let p = parse_ir("# header\n7. assign a\n\n   output a\n3 invar\n").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.get(1).unwrap().index, 1);
        assert_eq!(p.get(2).unwrap().kind, StatementKind::Invar);
    }

    #[test]
    fn grouped_io() {
        let p = parse_ir("input fp x y\noutput fp x\n").unwrap();
        assert_eq!(p.defined_at(0).unwrap(), set(&["fp", "x", "y"]));
        assert_eq!(p.used_at(1).unwrap(), set(&["fp", "x"]));
    }

    #[test]
    fn validate_reports_structure() {
        assert!(validate(&fib()).is_empty());

        let overrun = parse_ir_unchecked("if x 5").unwrap();
        assert_eq!(validate(&overrun), vec![Diagnostic { index: 0, rule: DiagnosticRule::Overrun { missing: 5 } }]);

        let overlap = parse_ir_unchecked("if a 2\nif b 2\nassign c\nassign d\n").unwrap();
        assert_eq!(
            validate(&overlap),
            vec![Diagnostic { index: 0, rule: DiagnosticRule::PartialOverlap { nested: 1 } }]
        );

        let mut stmts = fib().statements().to_vec();
        stmts[4].used.clear();
        let broken = IrProgram::from_statements(stmts);
        assert!(matches!(validate(&broken)[0].rule, DiagnosticRule::Shape(_)));
    }

    #[test]
    fn text_round_trip() {
        let p = fib();
        let text = p.to_text();
        assert!(text.starts_with("0. invar\n1. input n\n"));
        assert!(text.contains("9.       assign t a b\n"));
        assert_eq!(parse_ir(&text).unwrap(), p);
    }

    #[test]
    fn zero_length_blocks() {
        let p = parse_ir("if x 0\nassign y\n").unwrap();
        assert_eq!(p.control_parent(1), None);
    }
}
