//! Lowering of a small C-like language to segment IR.
//!
//! Supported: an optional single function wrapper, scalar declarations,
//! assignments (`=`, `op=`, `++`, `--`), `scanf`/`printf`, `if`/`else if`/
//! `else`, `for`, `while`, `switch`, `break` and `continue`. Expressions may
//! only read variables; calls, arrays, pointers and `return` are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::FrontendError;
use crate::ir::{IrProgram, IrStatement, StatementKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrontendOptions {
    /// Drop the step statement of `for` loops.
    pub reduced_loop: bool,
    /// One IR statement per variable of an I/O call.
    pub split_io: bool,
}

impl Default for FrontendOptions {
    fn default() -> Self {
        FrontendOptions { reduced_loop: false, split_io: true }
    }
}

/// Source line range (1-based, inclusive) of every IR statement.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceMap {
    pub entries: BTreeMap<usize, (usize, usize)>,
}

impl SourceMap {
    pub fn get(&self, index: usize) -> Option<(usize, usize)> {
        self.entries.get(&index).copied()
    }

    /// Covering line interval of IR statements `lo..=hi`.
    pub fn map_range(&self, lo: usize, hi: usize) -> Result<(usize, usize), FrontendError> {
        if lo > hi {
            return Err(FrontendError::Unmapped { index: lo });
        }
        let mut out: Option<(usize, usize)> = None;
        for i in lo..=hi {
            let (s, e) = self.get(i).ok_or(FrontendError::Unmapped { index: i })?;
            out = Some(out.map_or((s, e), |(a, b)| (a.min(s), b.max(e))));
        }
        Ok(out.expect("non-empty range"))
    }

    /// `irIndex startLine endLine` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (s, e)) in &self.entries {
            let _ = writeln!(out, "{i} {s} {e}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FrontendError> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Vec<usize> = line.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| {
                FrontendError::Syntax { line: n + 1, message: "expected `irIndex startLine endLine`".into() }
            })?;
            let [i, s, e] = nums[..] else {
                return Err(FrontendError::Syntax { line: n + 1, message: "expected three numbers".into() });
            };
            entries.insert(i, (s, e));
        }
        Ok(SourceMap { entries })
    }
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub program: IrProgram,
    pub source_map: SourceMap,
    /// Name of the function wrapper, if the source had one.
    pub method: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number,
    Str,
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
}

const PUNCT: [&str; 45] = [
    "<<=", ">>=", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "==", "!=", "<=", ">=", "&&", "||",
    "<<", ">>", "->", "+", "-", "*", "/", "%", "=", "<", ">", "!", "&", "|", "^", "~", "?", ":", ";", ",", "(", ")",
    "{", "}", "[", "]", ".",
];

fn lex(src: &str) -> Result<Vec<Token>, FrontendError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut at_line_start = true;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            at_line_start = true;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if at_line_start && c == b'#' {
            // preprocessor lines are ignored
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        at_line_start = false;
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            let start = line;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(FrontendError::Syntax { line: start, message: "unterminated comment".into() });
                }
                if bytes[i] == b'\n' {
                    line += 1;
                }
                if &bytes[i..i + 2] == b"*/" {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_owned()), line });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.') {
                i += 1;
            }
            out.push(Token { tok: Tok::Number, line });
            continue;
        }
        if c == b'"' || c == b'\'' {
            let quote = c;
            let start = line;
            i += 1;
            while i < bytes.len() && bytes[i] != quote {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'\n' {
                    return Err(FrontendError::Syntax { line: start, message: "unterminated literal".into() });
                }
                i += 1;
            }
            if i >= bytes.len() {
                return Err(FrontendError::Syntax { line: start, message: "unterminated literal".into() });
            }
            i += 1;
            out.push(Token { tok: if quote == b'"' { Tok::Str } else { Tok::Number }, line });
            continue;
        }
        match PUNCT.iter().find(|p| src[i..].starts_with(**p)) {
            Some(p) => {
                out.push(Token { tok: Tok::Punct(p), line });
                i += p.len();
            }
            None => {
                let ch = src[i..].chars().next().unwrap();
                return Err(FrontendError::Syntax { line, message: format!("unexpected character `{ch}`") });
            }
        }
    }
    Ok(out)
}

const TYPES: [&str; 12] =
    ["int", "char", "float", "double", "long", "short", "unsigned", "signed", "void", "bool", "const", "static"];
const UNSUPPORTED: [&str; 8] = ["return", "do", "goto", "struct", "union", "enum", "sizeof", "typedef"];
const RESERVED: [&str; 11] =
    ["if", "else", "for", "while", "switch", "case", "default", "break", "continue", "scanf", "printf"];

#[derive(Debug)]
enum Node {
    Leaf { stmt: IrStatement, lines: (usize, usize) },
    Block { stmt: IrStatement, lines: (usize, usize), children: Vec<Node> },
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    opts: FrontendOptions,
    last_line: usize,
}

type PResult<T> = Result<T, FrontendError>;

fn push_unique(vars: &mut Vec<String>, v: &str) {
    if !vars.iter().any(|x| x == v) {
        vars.push(v.to_owned());
    }
}

fn refs(vars: &[String]) -> Vec<&str> {
    vars.iter().map(String::as_str).collect()
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |t| t.line)
    }

    fn prev_line(&self) -> usize {
        self.pos.checked_sub(1).map_or(1, |p| self.toks[p].line)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(FrontendError::Syntax { line: self.line(), message: message.into() })
    }

    fn unsupported<T>(&self, what: impl Into<String>) -> PResult<T> {
        Err(FrontendError::Unsupported { line: self.line(), what: what.into() })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == name)
    }

    fn expect(&mut self, p: &str) -> PResult<()> {
        if self.is_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            self.syntax(format!("expected `{p}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !RESERVED.contains(&s.as_str()) && !TYPES.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.syntax("expected an identifier"),
        }
    }

    /// Reads an expression up to one of `stops` at nesting depth zero and
    /// returns the variables it reads.
    fn expr(&mut self, stops: &[&str]) -> PResult<Vec<String>> {
        let mut vars = Vec::new();
        let mut depth = 0usize;
        let start = self.pos;
        loop {
            let Some(tok) = self.peek().cloned() else { return self.syntax("unexpected end of input") };
            match tok {
                Tok::Punct(p) if depth == 0 && stops.contains(&p) => break,
                Tok::Punct("(") => depth += 1,
                Tok::Punct(")") => {
                    if depth == 0 {
                        return self.syntax("unbalanced `)`");
                    }
                    depth -= 1;
                }
                Tok::Punct("[") => return self.unsupported("array access"),
                Tok::Punct("->") | Tok::Punct(".") => return self.unsupported("member access"),
                Tok::Punct(p @ ("=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>="))
                | Tok::Punct(p @ ("++" | "--")) => {
                    return self.unsupported(format!("`{p}` inside an expression"));
                }
                Tok::Punct(";") | Tok::Punct("{") | Tok::Punct("}") => return self.syntax("malformed expression"),
                Tok::Str => return self.syntax("string literal in expression"),
                Tok::Ident(name) => {
                    if matches!(self.peek_at(1), Some(Tok::Punct("("))) {
                        return self.unsupported(format!("call to `{name}`"));
                    }
                    if UNSUPPORTED.contains(&name.as_str()) {
                        return self.unsupported(format!("`{name}`"));
                    }
                    if RESERVED.contains(&name.as_str()) || TYPES.contains(&name.as_str()) {
                        return self.syntax(format!("unexpected `{name}` in expression"));
                    }
                    push_unique(&mut vars, &name);
                }
                _ => {}
            }
            self.pos += 1;
        }
        if self.pos == start {
            return self.syntax("expected an expression");
        }
        Ok(vars)
    }

    fn paren_cond(&mut self) -> PResult<Vec<String>> {
        self.expect("(")?;
        let vars = self.expr(&[")"])?;
        self.expect(")")?;
        Ok(vars)
    }

    fn leaf(stmt: IrStatement, lines: (usize, usize)) -> Node {
        Node::Leaf { stmt, lines }
    }

    /// One simple assignment form: `x = e`, `x op= e`, `x++`, `++x`.
    fn assignment(&mut self, stops: &[&str]) -> PResult<Node> {
        let line = self.line();
        let (target, mut used) = if self.is_punct("++") || self.is_punct("--") {
            self.pos += 1;
            let t = self.ident()?;
            (t.clone(), vec![t])
        } else {
            let t = self.ident()?;
            if self.is_punct("[") {
                return self.unsupported("array access");
            }
            match self.bump() {
                Some(Tok::Punct("=")) => {
                    let rhs = self.expr(stops)?;
                    (t, rhs)
                }
                Some(Tok::Punct("++" | "--")) => (t.clone(), vec![t]),
                Some(Tok::Punct(p)) if p.len() >= 2 && p.ends_with('=') && !matches!(p, "==" | "!=" | "<=" | ">=") => {
                    let rhs = self.expr(stops)?;
                    let mut used = vec![t.clone()];
                    for v in rhs {
                        push_unique(&mut used, &v);
                    }
                    (t, used)
                }
                _ => {
                    self.pos -= 1;
                    return self.syntax(format!("expected an assignment to `{t}`"));
                }
            }
        };
        used.dedup();
        let stmt = IrStatement::assign(&target, &refs(&used));
        Ok(Self::leaf(stmt, (line, self.prev_line())))
    }

    fn assignment_list(&mut self, stop: &str) -> PResult<Vec<Node>> {
        let mut out = Vec::new();
        if self.is_punct(stop) {
            return Ok(out);
        }
        loop {
            out.push(self.assignment(&[",", stop])?);
            if self.is_punct(",") {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn declaration(&mut self) -> PResult<Vec<Node>> {
        while matches!(self.peek(), Some(Tok::Ident(s)) if TYPES.contains(&s.as_str())) {
            self.pos += 1;
        }
        let mut out = Vec::new();
        loop {
            if self.is_punct("*") {
                return self.unsupported("pointer declaration");
            }
            let line = self.line();
            let name = self.ident()?;
            if self.is_punct("[") {
                return self.unsupported("array declaration");
            }
            if self.is_punct("=") {
                self.pos += 1;
                let used = self.expr(&[",", ";"])?;
                out.push(Self::leaf(IrStatement::assign(&name, &refs(&used)), (line, self.prev_line())));
            }
            match self.bump() {
                Some(Tok::Punct(",")) => continue,
                Some(Tok::Punct(";")) => break,
                _ => {
                    self.pos -= 1;
                    return self.syntax("expected `,` or `;` in declaration");
                }
            }
        }
        Ok(out)
    }

    fn io(&mut self, input: bool) -> PResult<Vec<Node>> {
        let line = self.line();
        self.pos += 1;
        self.expect("(")?;
        if !matches!(self.bump(), Some(Tok::Str)) {
            self.pos -= 1;
            return self.syntax("expected a format string");
        }
        let mut vars = Vec::new();
        while self.is_punct(",") {
            self.pos += 1;
            if input {
                if self.is_punct("&") {
                    self.pos += 1;
                }
                let v = self.ident()?;
                push_unique(&mut vars, &v);
            } else {
                for v in self.expr(&[",", ")"])? {
                    push_unique(&mut vars, &v);
                }
            }
        }
        self.expect(")")?;
        self.expect(";")?;
        let lines = (line, self.prev_line());
        let make = |vs: &[&str]| if input { IrStatement::input(vs) } else { IrStatement::output(vs) };
        Ok(if vars.is_empty() {
            if input {
                return Err(FrontendError::Syntax { line, message: "scanf without variables".into() });
            }
            vec![Self::leaf(IrStatement::invar(), lines)]
        } else if self.opts.split_io {
            vars.iter().map(|v| Self::leaf(make(&[v.as_str()]), lines)).collect()
        } else {
            vec![Self::leaf(make(&refs(&vars)), lines)]
        })
    }

    fn block(kind: StatementKind, vars: &[String], lines: (usize, usize), children: Vec<Node>) -> Node {
        let stmt = IrStatement::block(kind, &refs(vars), children.len());
        Node::Block { stmt, lines, children }
    }

    fn if_stmt(&mut self, kind: StatementKind) -> PResult<Node> {
        let line = self.line();
        self.pos += 1;
        let vars = self.paren_cond()?;
        let header = (line, self.prev_line());
        let mut children = self.statement()?;
        if self.is_ident("else") {
            let else_line = self.line();
            self.pos += 1;
            if self.is_ident("if") {
                children.push(self.if_stmt(StatementKind::ElseIf)?);
            } else {
                let body = self.statement()?;
                children.push(Self::block(StatementKind::Else, &[], (else_line, else_line), body));
            }
        }
        Ok(Self::block(kind, &vars, header, children))
    }

    fn for_stmt(&mut self) -> PResult<Vec<Node>> {
        let line = self.line();
        self.pos += 1;
        self.expect("(")?;
        let mut out = self.assignment_list(";")?;
        self.expect(";")?;
        let cond = if self.is_punct(";") { Vec::new() } else { self.expr(&[";"])? };
        self.expect(";")?;
        let step = self.assignment_list(")")?;
        self.expect(")")?;
        let header = (line, self.prev_line());
        let mut children = self.statement()?;
        if !self.opts.reduced_loop {
            for mut node in step {
                if let Node::Leaf { lines, .. } = &mut node {
                    *lines = header;
                }
                children.push(node);
            }
        }
        for node in &mut out {
            if let Node::Leaf { lines, .. } = node {
                *lines = header;
            }
        }
        out.push(Self::block(StatementKind::Loop, &cond, header, children));
        Ok(out)
    }

    fn switch_stmt(&mut self) -> PResult<Node> {
        let line = self.line();
        self.pos += 1;
        let vars = self.paren_cond()?;
        let header = (line, self.prev_line());
        self.expect("{")?;
        // (label line, statements) per case
        let mut cases: Vec<((usize, usize), Vec<Node>)> = Vec::new();
        loop {
            if self.is_punct("}") {
                self.pos += 1;
                break;
            }
            if self.peek().is_none() {
                return self.syntax("unterminated switch");
            }
            if self.is_ident("case") || self.is_ident("default") {
                let l = self.line();
                let is_case = self.is_ident("case");
                self.pos += 1;
                if is_case {
                    while !self.is_punct(":") {
                        match self.bump() {
                            Some(Tok::Number) | Some(Tok::Ident(_)) | Some(Tok::Punct("-")) => {}
                            _ => {
                                self.pos -= 1;
                                return self.syntax("expected a constant case label");
                            }
                        }
                    }
                }
                self.expect(":")?;
                cases.push(((l, self.prev_line()), Vec::new()));
                continue;
            }
            let stmts = self.statement()?;
            match cases.last_mut() {
                Some((_, body)) => body.extend(stmts),
                None => return self.syntax("statement before the first case label"),
            }
        }
        let mut next: Option<Node> = None;
        for (lines, mut body) in cases.into_iter().rev() {
            if let Some(n) = next.take() {
                body.push(n);
            }
            next = Some(Self::block(StatementKind::Case, &[], lines, body));
        }
        Ok(Self::block(StatementKind::DoCase, &vars, header, next.into_iter().collect()))
    }

    fn statement(&mut self) -> PResult<Vec<Node>> {
        let line = self.line();
        let Some(tok) = self.peek().cloned() else { return self.syntax("unexpected end of input") };
        match tok {
            Tok::Punct(";") => {
                self.pos += 1;
                Ok(Vec::new())
            }
            Tok::Punct("{") => {
                self.pos += 1;
                let mut out = Vec::new();
                while !self.is_punct("}") {
                    if self.peek().is_none() {
                        return self.syntax("unterminated block");
                    }
                    out.extend(self.statement()?);
                }
                self.pos += 1;
                Ok(out)
            }
            Tok::Punct("++" | "--") => {
                let n = self.assignment(&[";"])?;
                self.expect(";")?;
                Ok(vec![n])
            }
            Tok::Ident(word) => match word.as_str() {
                w if TYPES.contains(&w) => self.declaration(),
                w if UNSUPPORTED.contains(&w) => self.unsupported(format!("`{w}` statement")),
                "if" => Ok(vec![self.if_stmt(StatementKind::If)?]),
                "for" => self.for_stmt(),
                "while" => {
                    self.pos += 1;
                    let vars = self.paren_cond()?;
                    let header = (line, self.prev_line());
                    let body = self.statement()?;
                    Ok(vec![Self::block(StatementKind::Loop, &vars, header, body)])
                }
                "switch" => Ok(vec![self.switch_stmt()?]),
                "break" | "continue" => {
                    self.pos += 1;
                    self.expect(";")?;
                    let stmt = if word == "break" { IrStatement::brk() } else { IrStatement::cont() };
                    Ok(vec![Self::leaf(stmt, (line, self.prev_line()))])
                }
                "scanf" => self.io(true),
                "printf" => self.io(false),
                "else" => self.syntax("`else` without `if`"),
                "case" | "default" => self.syntax(format!("`{word}` outside a switch")),
                name => {
                    if matches!(self.peek_at(1), Some(Tok::Punct("("))) {
                        return self.unsupported(format!("call to `{name}`"));
                    }
                    let n = self.assignment(&[";"])?;
                    self.expect(";")?;
                    Ok(vec![n])
                }
            },
            _ => self.syntax("expected a statement"),
        }
    }

    /// `type name(params) { body }` at the very start of the input.
    fn function_header(&mut self) -> PResult<Option<String>> {
        let mut k = 0;
        while matches!(self.peek_at(k), Some(Tok::Ident(s)) if TYPES.contains(&s.as_str())) {
            k += 1;
        }
        let is_fn = k > 0
            && matches!(self.peek_at(k), Some(Tok::Ident(_)))
            && matches!(self.peek_at(k + 1), Some(Tok::Punct("(")));
        if !is_fn {
            return Ok(None);
        }
        self.pos += k;
        let name = self.ident()?;
        self.expect("(")?;
        let mut depth = 1;
        while depth > 0 {
            match self.bump() {
                Some(Tok::Punct("(")) => depth += 1,
                Some(Tok::Punct(")")) => depth -= 1,
                Some(_) => {}
                None => return self.syntax("unterminated parameter list"),
            }
        }
        if !self.is_punct("{") {
            return self.syntax("expected a function body");
        }
        Ok(Some(name))
    }
}

fn flatten(nodes: Vec<Node>, stmts: &mut Vec<IrStatement>, map: &mut SourceMap) {
    for node in nodes {
        let index = stmts.len();
        match node {
            Node::Leaf { stmt, lines } => {
                stmts.push(stmt);
                map.entries.insert(index, lines);
            }
            Node::Block { stmt, lines, children } => {
                stmts.push(stmt);
                map.entries.insert(index, lines);
                flatten(children, stmts, map);
            }
        }
    }
}

/// Translates toy-language source into segment IR and a source map.
pub fn translate(source: &str, opts: &FrontendOptions) -> Result<Translation, FrontendError> {
    let toks = lex(source)?;
    let last_line = source.lines().count().max(1);
    let mut p = Parser { toks, pos: 0, opts: *opts, last_line };
    let method = p.function_header()?;
    let mut nodes = Vec::new();
    if method.is_some() {
        nodes = p.statement()?;
        if p.peek().is_some() {
            return p.unsupported("more than one function");
        }
    } else {
        while p.peek().is_some() {
            nodes.extend(p.statement()?);
        }
    }
    let mut stmts = Vec::new();
    let mut map = SourceMap::default();
    flatten(nodes, &mut stmts, &mut map);
    let program = IrProgram::from_statements(stmts);
    Ok(Translation { program, source_map: map, method })
}
