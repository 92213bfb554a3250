//! Reader and writer for the s-expression domain/problem language.
//!
//! Domain files:
//!
//! ```text
//! (define (domain NAME)
//!   (:facts f1 f2 (pred type ...) ...)
//!   (:constants obj ... - type ...)
//!   (:action NAME :parameters (?x - type) :pre (f ...) :add (f ...)
//!                 :del (f ...) :cost INT :intrinsic good|neutral|bad) ...)
//! ```
//!
//! Problem files:
//!
//! ```text
//! (define (problem NAME) (:domain NAME) (:objects ...)
//!   (:init (f ...)) (:goal (f ...)) (:utility (f INT) ...)
//!   (:display (name "phrase") ...))
//! ```
//!
//! Parameterized facts `(pred a b)` and actions are grounded at parse time by
//! enumerating the declared objects; grounded names join the parts with `_`.
//! Comments start with `;`. A `;; provenance: ID` comment line in the domain
//! records a compiled suggestion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{Action, Fact, IntrinsicValue, PlanningModel, UtilityFunction};

const PROVENANCE_TAG: &str = "provenance:";
const DEFAULT_TYPE: &str = "object";

/// Source text plus where it came from, for diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDocument {
    pub text: String,
    pub origin: String,
}

impl SourceDocument {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SourceDocument {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn inline(text: impl Into<String>) -> Self {
        Self::new(text, "<inline>")
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        Ok(Self::new(
            std::fs::read_to_string(path)?,
            path.display().to_string(),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{origin}:{line}:{col}: syntax error: expected {expected}, found {found}")]
    Syntax {
        origin: String,
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    #[error("{origin}:{line}:{col}: {message}")]
    Semantic {
        origin: String,
        line: usize,
        col: usize,
        message: String,
    },
}

impl ParseError {
    pub fn position(&self) -> Position {
        match self {
            ParseError::Syntax { line, col, .. } | ParseError::Semantic { line, col, .. } => {
                Position {
                    line: *line,
                    col: *col,
                }
            }
        }
    }

    pub fn is_syntax(&self) -> bool {
        matches!(self, ParseError::Syntax { .. })
    }
}

// ---------------------------------------------------------------------------
// Lexing and s-expressions

#[derive(Clone, Debug, PartialEq)]
enum Atom {
    Symbol(String),
    Keyword(String),
    Int(i64),
    Str(String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Symbol(s) => write!(f, "`{s}`"),
            Atom::Keyword(k) => write!(f, "`:{k}`"),
            Atom::Int(i) => write!(f, "`{i}`"),
            Atom::Str(s) => write!(f, "string {s:?}"),
        }
    }
}

#[derive(Clone, Debug)]
enum Sexp {
    Atom(Atom, Position),
    List(Vec<Sexp>, Position),
}

impl Sexp {
    fn pos(&self) -> Position {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn describe(&self) -> String {
        match self {
            Sexp::Atom(a, _) => a.to_string(),
            Sexp::List(items, _) if items.is_empty() => "`()`".into(),
            Sexp::List(..) => "a list".into(),
        }
    }
}

struct Reader<'a> {
    origin: &'a str,
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Position,
    provenance: Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(doc: &'a SourceDocument) -> Self {
        Reader {
            origin: &doc.origin,
            chars: doc.text.chars().peekable(),
            pos: Position { line: 1, col: 1 },
            provenance: Vec::new(),
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn syntax(&self, at: Position, expected: &str, found: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            origin: self.origin.to_string(),
            line: at.line,
            col: at.col,
            expected: expected.to_string(),
            found: found.into(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                let mut comment = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    comment.push(c);
                    self.bump();
                }
                let body = comment.trim_start_matches(';').trim();
                if let Some(id) = body.strip_prefix(PROVENANCE_TAG) {
                    self.provenance.push(id.trim().to_string());
                }
            } else {
                break;
            }
        }
    }

    /// Reads exactly one top-level expression followed by end of input.
    fn read_document(mut self) -> Result<(Sexp, Vec<String>), ParseError> {
        self.skip_trivia();
        let sexp = self.read()?;
        self.skip_trivia();
        if self.chars.peek().is_some() {
            let at = self.pos;
            let found = self.read().map(|s| s.describe()).unwrap_or_else(|_| "text".into());
            return Err(self.syntax(at, "end of input", found));
        }
        Ok((sexp, self.provenance))
    }

    fn read(&mut self) -> Result<Sexp, ParseError> {
        self.skip_trivia();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Err(self.syntax(start, "an expression", "end of input")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(self.syntax(self.pos, "`)`", "end of input"));
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(')') => Err(self.syntax(start, "an expression", "`)`")),
            Some('"') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.syntax(self.pos, "closing `\"`", "end of input")),
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some(c @ ('"' | '\\')) => s.push(c),
                            Some('n') => s.push('\n'),
                            other => {
                                let found = other.map(|c| format!("`\\{c}`")).unwrap_or_else(|| "end of input".into());
                                return Err(self.syntax(self.pos, "escape `\\\"`, `\\\\` or `\\n`", found));
                            }
                        },
                        Some(c) => s.push(c),
                    }
                }
                Ok(Sexp::Atom(Atom::Str(s), start))
            }
            Some(_) => {
                let mut word = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '"') {
                        break;
                    }
                    word.push(c);
                    self.bump();
                }
                self.classify(word, start)
            }
        }
    }

    fn classify(&self, word: String, at: Position) -> Result<Sexp, ParseError> {
        if let Some(kw) = word.strip_prefix(':') {
            if is_identifier(kw) {
                return Ok(Sexp::Atom(Atom::Keyword(kw.to_string()), at));
            }
        } else if word == "-" || is_identifier(word.strip_prefix('?').unwrap_or(&word)) {
            return Ok(Sexp::Atom(Atom::Symbol(word), at));
        } else if let Ok(i) = word.parse::<i64>() {
            return Ok(Sexp::Atom(Atom::Int(i), at));
        }
        Err(self.syntax(at, "a symbol, keyword, integer or string", format!("`{word}`")))
    }
}

/// Identifier syntax: a letter or `_`, then letters, digits, `_` or `-`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

// ---------------------------------------------------------------------------
// Interpretation

struct Ctx<'a> {
    origin: &'a str,
}

impl Ctx<'_> {
    fn syntax(&self, at: &Sexp, expected: &str) -> ParseError {
        ParseError::Syntax {
            origin: self.origin.to_string(),
            line: at.pos().line,
            col: at.pos().col,
            expected: expected.to_string(),
            found: at.describe(),
        }
    }

    fn syntax_at(&self, at: Position, expected: &str, found: &str) -> ParseError {
        ParseError::Syntax {
            origin: self.origin.to_string(),
            line: at.line,
            col: at.col,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    fn semantic(&self, at: Position, message: impl Into<String>) -> ParseError {
        ParseError::Semantic {
            origin: self.origin.to_string(),
            line: at.line,
            col: at.col,
            message: message.into(),
        }
    }

    fn list<'s>(&self, s: &'s Sexp, expected: &str) -> Result<&'s [Sexp], ParseError> {
        match s {
            Sexp::List(items, _) => Ok(items),
            _ => Err(self.syntax(s, expected)),
        }
    }

    fn symbol<'s>(&self, s: &'s Sexp, expected: &str) -> Result<&'s str, ParseError> {
        match s {
            Sexp::Atom(Atom::Symbol(name), _) if !name.starts_with('?') => Ok(name),
            _ => Err(self.syntax(s, expected)),
        }
    }

    fn keyword<'s>(&self, s: &'s Sexp, expected: &str) -> Result<&'s str, ParseError> {
        match s {
            Sexp::Atom(Atom::Keyword(k), _) => Ok(k),
            _ => Err(self.syntax(s, expected)),
        }
    }

    /// `(define (KIND NAME) section...)`; returns the name and the sections.
    fn define<'s>(&self, doc: &'s Sexp, kind: &str) -> Result<(String, &'s [Sexp]), ParseError> {
        let items = self.list(doc, "`(define ...)`")?;
        let head = items
            .first()
            .ok_or_else(|| self.syntax(doc, "`(define ...)`"))?;
        if self.symbol(head, "`define`")? != "define" {
            return Err(self.syntax(head, "`define`"));
        }
        let header = items
            .get(1)
            .ok_or_else(|| self.syntax_at(doc.pos(), &format!("`({kind} NAME)`"), "`)`"))?;
        let hdr = self.list(header, &format!("`({kind} NAME)`"))?;
        match hdr {
            [Sexp::Atom(Atom::Symbol(k), _), name] if k == kind => {
                Ok((self.symbol(name, "a name")?.to_string(), &items[2..]))
            }
            _ => Err(self.syntax(header, &format!("`({kind} NAME)`"))),
        }
    }

    /// Splits a section `(:kw body...)` into its keyword and body.
    fn section<'s>(&self, s: &'s Sexp, allowed: &str) -> Result<(&'s str, &'s [Sexp]), ParseError> {
        let items = self.list(s, allowed)?;
        let kw = items.first().ok_or_else(|| self.syntax(s, allowed))?;
        Ok((self.keyword(kw, allowed)?, &items[1..]))
    }

    /// Typed list `a b - t c` → [(a, t), (b, t), (c, object)].
    fn typed_list<'s>(
        &self,
        items: &'s [Sexp],
        what: &str,
    ) -> Result<Vec<(&'s str, &'s Sexp, String)>, ParseError> {
        let mut out = Vec::new();
        let mut pending: Vec<(&str, &Sexp)> = Vec::new();
        let mut it = items.iter();
        while let Some(s) = it.next() {
            match s {
                Sexp::Atom(Atom::Symbol(sym), _) if sym == "-" => {
                    let ty = it
                        .next()
                        .ok_or_else(|| self.syntax_at(s.pos(), "a type name", "end of list"))?;
                    let ty = self.symbol(ty, "a type name")?;
                    if pending.is_empty() {
                        return Err(self.syntax(s, what));
                    }
                    out.extend(pending.drain(..).map(|(n, at)| (n, at, ty.to_string())));
                }
                Sexp::Atom(Atom::Symbol(sym), _) => pending.push((sym.as_str(), s)),
                _ => return Err(self.syntax(s, what)),
            }
        }
        out.extend(pending.into_iter().map(|(n, at)| (n, at, DEFAULT_TYPE.to_string())));
        Ok(out)
    }
}

/// Objects by type, in declaration order.
#[derive(Default)]
struct Objects {
    by_name: BTreeMap<String, String>,
    order: Vec<String>,
}

impl Objects {
    fn of_type<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.order
            .iter()
            .filter(move |o| ty == DEFAULT_TYPE || self.by_name[*o] == ty)
            .map(String::as_str)
    }

    fn declare(&mut self, ctx: &Ctx, name: &str, ty: String, at: Position) -> Result<(), ParseError> {
        if self.by_name.insert(name.to_string(), ty).is_some() {
            return Err(ctx.semantic(at, format!("duplicate object `{name}`")));
        }
        self.order.push(name.to_string());
        Ok(())
    }
}

enum FactDecl {
    Plain(String),
    Schema(String, Vec<String>),
}

struct ActionSchema<'s> {
    name: String,
    at: Position,
    params: Vec<(String, String)>,
    pre: Option<&'s Sexp>,
    add: Option<&'s Sexp>,
    del: Option<&'s Sexp>,
    cost: u32,
    intrinsic: IntrinsicValue,
}

fn ground_name(head: &str, args: &[&str]) -> String {
    let mut s = head.to_string();
    for a in args {
        s.push('_');
        s.push_str(a);
    }
    s
}

/// Cartesian product of objects for a parameter list.
fn bindings(objects: &Objects, params: &[(String, String)]) -> Vec<BTreeMap<String, String>> {
    let mut out = vec![BTreeMap::new()];
    for (var, ty) in params {
        let mut next = Vec::new();
        for b in &out {
            for o in objects.of_type(ty) {
                let mut b = b.clone();
                b.insert(var.clone(), o.to_string());
                next.push(b);
            }
        }
        out = next;
    }
    out
}

/// Resolves a fact reference: `name` or `(pred arg...)` with `?var` args
/// substituted from `binding`.
fn fact_ref(
    ctx: &Ctx,
    s: &Sexp,
    binding: &BTreeMap<String, String>,
    objects: &Objects,
) -> Result<String, ParseError> {
    match s {
        Sexp::Atom(Atom::Symbol(name), _) if !name.starts_with('?') => Ok(name.clone()),
        Sexp::List(items, _) if !items.is_empty() => {
            let head = ctx.symbol(&items[0], "a predicate name")?;
            let mut args = Vec::new();
            for a in &items[1..] {
                match a {
                    Sexp::Atom(Atom::Symbol(v), at) if v.starts_with('?') => {
                        let bound = binding
                            .get(v)
                            .ok_or_else(|| ctx.semantic(*at, format!("unbound parameter `{v}`")))?;
                        args.push(bound.as_str());
                    }
                    Sexp::Atom(Atom::Symbol(o), at) => {
                        if !objects.by_name.contains_key(o) {
                            return Err(ctx.semantic(*at, format!("unknown object `{o}`")));
                        }
                        args.push(o.as_str());
                    }
                    _ => return Err(ctx.syntax(a, "an object or parameter")),
                }
            }
            Ok(ground_name(head, &args))
        }
        _ => Err(ctx.syntax(s, "a fact")),
    }
}

fn fact_list(
    ctx: &Ctx,
    s: &Sexp,
    binding: &BTreeMap<String, String>,
    objects: &Objects,
    facts: &BTreeSet<Fact>,
) -> Result<BTreeSet<Fact>, ParseError> {
    let items = ctx.list(s, "a fact list `(f ...)`")?;
    let mut out = BTreeSet::new();
    for item in items {
        let name = fact_ref(ctx, item, binding, objects)?;
        let fact = Fact::new(name);
        if !facts.contains(&fact) {
            return Err(ctx.semantic(item.pos(), format!("undeclared fact `{fact}`")));
        }
        out.insert(fact);
    }
    Ok(out)
}

fn parse_action<'s>(ctx: &Ctx, body: &'s [Sexp], at: Position) -> Result<ActionSchema<'s>, ParseError> {
    let name_sexp = body
        .first()
        .ok_or_else(|| ctx.syntax_at(at, "an action name", "end of list"))?;
    let mut schema = ActionSchema {
        name: ctx.symbol(name_sexp, "an action name")?.to_string(),
        at: name_sexp.pos(),
        params: Vec::new(),
        pre: None,
        add: None,
        del: None,
        cost: 1,
        intrinsic: IntrinsicValue::Neutral,
    };
    let mut seen = BTreeSet::new();
    let mut rest = body[1..].iter();
    const KEYS: &str = "`:parameters`, `:pre`, `:add`, `:del`, `:cost` or `:intrinsic`";
    while let Some(key) = rest.next() {
        let kw = ctx.keyword(key, KEYS)?;
        if !matches!(kw, "parameters" | "pre" | "add" | "del" | "cost" | "intrinsic") {
            return Err(ctx.syntax(key, KEYS));
        }
        if !seen.insert(kw) {
            return Err(ctx.semantic(key.pos(), format!("duplicate `:{kw}` in action `{}`", schema.name)));
        }
        let value = rest
            .next()
            .ok_or_else(|| ctx.syntax_at(key.pos(), &format!("a value for `:{kw}`"), "end of list"))?;
        match kw {
            "parameters" => {
                let items = ctx.list(value, "a parameter list")?;
                for (var, at, ty) in ctx.typed_list(items, "a parameter `?x`")? {
                    if !var.starts_with('?') {
                        return Err(ctx.syntax(at, "a parameter `?x`"));
                    }
                    schema.params.push((var.to_string(), ty));
                }
            }
            "pre" => schema.pre = Some(value),
            "add" => schema.add = Some(value),
            "del" => schema.del = Some(value),
            "cost" => match value {
                Sexp::Atom(Atom::Int(c), _) if *c >= 0 && *c <= i64::from(u32::MAX) => {
                    schema.cost = *c as u32
                }
                _ => return Err(ctx.syntax(value, "a non-negative integer cost")),
            },
            "intrinsic" => {
                let v = match value {
                    Sexp::Atom(Atom::Symbol(s), _) => IntrinsicValue::from_keyword(s),
                    _ => None,
                };
                schema.intrinsic = v.ok_or_else(|| ctx.syntax(value, "`good`, `neutral` or `bad`"))?;
            }
            _ => unreachable!(),
        }
    }
    Ok(schema)
}

struct DomainParts<'s> {
    name: String,
    fact_decls: Vec<(FactDecl, Position)>,
    actions: Vec<ActionSchema<'s>>,
}

fn read_domain<'s>(
    ctx: &Ctx,
    doc: &'s Sexp,
    objects: &mut Objects,
) -> Result<DomainParts<'s>, ParseError> {
    let (name, sections) = ctx.define(doc, "domain")?;
    let mut parts = DomainParts {
        name,
        fact_decls: Vec::new(),
        actions: Vec::new(),
    };
    const SECTIONS: &str = "`(:facts ...)`, `(:constants ...)` or `(:action ...)`";
    for section in sections {
        let (kw, body) = ctx.section(section, SECTIONS)?;
        match kw {
            "facts" => {
                for item in body {
                    match item {
                        Sexp::Atom(Atom::Symbol(s), at) if !s.starts_with('?') => {
                            parts.fact_decls.push((FactDecl::Plain(s.clone()), *at))
                        }
                        Sexp::List(items, at) if !items.is_empty() => {
                            let head = ctx.symbol(&items[0], "a predicate name")?;
                            let types = items[1..]
                                .iter()
                                .map(|t| ctx.symbol(t, "a type name").map(str::to_string))
                                .collect::<Result<Vec<_>, _>>()?;
                            parts.fact_decls.push((FactDecl::Schema(head.to_string(), types), *at));
                        }
                        _ => return Err(ctx.syntax(item, "a fact name or `(pred type ...)`")),
                    }
                }
            }
            "constants" => {
                for (obj, at, ty) in ctx.typed_list(body, "an object name")? {
                    objects.declare(ctx, obj, ty, at.pos())?;
                }
            }
            "action" => parts.actions.push(parse_action(ctx, body, section.pos())?),
            _ => return Err(ctx.syntax(&section_head(section), SECTIONS)),
        }
    }
    Ok(parts)
}

fn section_head(s: &Sexp) -> Sexp {
    match s {
        Sexp::List(items, _) if !items.is_empty() => items[0].clone(),
        other => other.clone(),
    }
}

/// Parses a domain and a problem document into a validated, grounded model.
pub fn parse_model(domain: &SourceDocument, problem: &SourceDocument) -> Result<PlanningModel, ParseError> {
    let (dom_sexp, provenance) = Reader::new(domain).read_document()?;
    let (prob_sexp, _) = Reader::new(problem).read_document()?;
    let dctx = Ctx { origin: &domain.origin };
    let pctx = Ctx { origin: &problem.origin };

    let mut objects = Objects::default();
    let parts = read_domain(&dctx, &dom_sexp, &mut objects)?;

    // The problem may declare further objects, which must be known before
    // grounding the domain, so scan its sections first.
    let (problem_name, psections) = pctx.define(&prob_sexp, "problem")?;
    const PSECTIONS: &str =
        "`(:domain ...)`, `(:objects ...)`, `(:init ...)`, `(:goal ...)`, `(:utility ...)` or `(:display ...)`";
    let mut by_kw: BTreeMap<&str, (&[Sexp], &Sexp)> = BTreeMap::new();
    for section in psections {
        let (kw, body) = pctx.section(section, PSECTIONS)?;
        if !matches!(kw, "domain" | "objects" | "init" | "goal" | "utility" | "display") {
            return Err(pctx.syntax(&section_head(section), PSECTIONS));
        }
        if by_kw.insert(kw, (body, section)).is_some() {
            return Err(pctx.semantic(section.pos(), format!("duplicate `(:{kw} ...)` section")));
        }
    }
    if let Some((body, _)) = by_kw.get("objects") {
        for (obj, at, ty) in pctx.typed_list(body, "an object name")? {
            objects.declare(&pctx, obj, ty, at.pos())?;
        }
    }
    match by_kw.get("domain") {
        Some((body, section)) => match body {
            [name] => {
                let name = pctx.symbol(name, "the domain name")?;
                if name != parts.name {
                    return Err(pctx.semantic(
                        body[0].pos(),
                        format!("problem refers to domain `{name}` but the domain is `{}`", parts.name),
                    ));
                }
            }
            _ => return Err(pctx.syntax(section, "`(:domain NAME)`")),
        },
        None => {
            return Err(pctx.semantic(prob_sexp.pos(), "problem lacks a `(:domain NAME)` section"))
        }
    }

    let mut model = PlanningModel {
        domain_name: parts.name.clone(),
        problem_name,
        provenance,
        ..Default::default()
    };

    // Facts.
    for (decl, at) in &parts.fact_decls {
        let grounded: Vec<String> = match decl {
            FactDecl::Plain(name) => vec![name.clone()],
            FactDecl::Schema(head, types) => {
                let params: Vec<(String, String)> = types
                    .iter()
                    .enumerate()
                    .map(|(i, t)| (format!("?{i}"), t.clone()))
                    .collect();
                for (_, ty) in &params {
                    if ty != DEFAULT_TYPE && !objects.by_name.values().any(|t| t == ty) {
                        return Err(dctx.semantic(*at, format!("no objects of type `{ty}`")));
                    }
                }
                bindings(&objects, &params)
                    .into_iter()
                    .map(|b| {
                        let args: Vec<&str> = params.iter().map(|(v, _)| b[v].as_str()).collect();
                        ground_name(head, &args)
                    })
                    .collect()
            }
        };
        for name in grounded {
            if !model.facts.insert(Fact::new(name.clone())) {
                return Err(dctx.semantic(*at, format!("duplicate fact `{name}`")));
            }
        }
    }

    // Actions.
    let empty = BTreeMap::new();
    for schema in &parts.actions {
        for (_, ty) in &schema.params {
            if ty != DEFAULT_TYPE && !objects.by_name.values().any(|t| t == ty) {
                return Err(dctx.semantic(schema.at, format!("no objects of type `{ty}`")));
            }
        }
        for b in bindings(&objects, &schema.params) {
            let args: Vec<&str> = schema.params.iter().map(|(v, _)| b[v].as_str()).collect();
            let mut action = Action::new(ground_name(&schema.name, &args))
                .with_cost(schema.cost)
                .with_intrinsic(schema.intrinsic);
            let b = if schema.params.is_empty() { &empty } else { &b };
            if let Some(s) = schema.pre {
                action.preconditions = fact_list(&dctx, s, b, &objects, &model.facts)?;
            }
            if let Some(s) = schema.add {
                action.add_effects = fact_list(&dctx, s, b, &objects, &model.facts)?;
            }
            if let Some(s) = schema.del {
                action.del_effects = fact_list(&dctx, s, b, &objects, &model.facts)?;
            }
            let name = action.name.clone();
            if model.insert_action(action).is_some() {
                return Err(dctx.semantic(schema.at, format!("duplicate action `{name}`")));
            }
        }
    }

    // Init and goal.
    for (kw, target) in [("init", &mut model.init), ("goal", &mut model.goal)] {
        match by_kw.get(kw) {
            Some((body, section)) => match body {
                [list] => *target = fact_list(&pctx, list, &empty, &objects, &model.facts)?,
                _ => return Err(pctx.syntax(section, &format!("`(:{kw} (f ...))`"))),
            },
            None => {
                return Err(pctx.semantic(prob_sexp.pos(), format!("problem lacks a `(:{kw} ...)` section")))
            }
        }
    }

    if let Some((body, _)) = by_kw.get("utility") {
        let mut utility = UtilityFunction::new();
        let mut seen = BTreeSet::new();
        for item in *body {
            let items = pctx.list(item, "`(fact INT)`")?;
            match items {
                [fact, Sexp::Atom(Atom::Int(u), _)] => {
                    let fact = Fact::new(fact_ref(&pctx, fact, &empty, &objects)?);
                    if !model.facts.contains(&fact) {
                        return Err(pctx.semantic(item.pos(), format!("undeclared fact `{fact}`")));
                    }
                    if !seen.insert(fact.clone()) {
                        return Err(pctx.semantic(item.pos(), format!("duplicate utility for `{fact}`")));
                    }
                    utility.set(fact, *u);
                }
                _ => return Err(pctx.syntax(item, "`(fact INT)`")),
            }
        }
        model.utility = utility;
    }

    if let Some((body, _)) = by_kw.get("display") {
        for item in *body {
            let items = pctx.list(item, "`(name \"phrase\")`")?;
            match items {
                [key, Sexp::Atom(Atom::Str(phrase), _)] => {
                    let key = fact_ref(&pctx, key, &empty, &objects)?;
                    if model.display.insert(key.clone(), phrase.clone()).is_some() {
                        return Err(pctx.semantic(item.pos(), format!("duplicate display phrase for `{key}`")));
                    }
                }
                _ => return Err(pctx.syntax(item, "`(name \"phrase\")`")),
            }
        }
    }

    model
        .validate()
        .map_err(|e| dctx.semantic(dom_sexp.pos(), e.to_string()))?;
    Ok(model)
}

// ---------------------------------------------------------------------------
// Serialization

fn write_fact_list(out: &mut String, facts: &BTreeSet<Fact>) {
    out.push('(');
    for (i, f) in facts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(f.name());
    }
    out.push(')');
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Writes a model as a (domain, problem) document pair. The output is
/// grounded: parameterized schemas come back as their instances.
pub fn serialize_model(model: &PlanningModel) -> (SourceDocument, SourceDocument) {
    let mut dom = String::new();
    for id in &model.provenance {
        let _ = writeln!(dom, ";; {PROVENANCE_TAG} {id}");
    }
    let _ = writeln!(dom, "(define (domain {})", model.domain_name);
    dom.push_str("  (:facts");
    for f in &model.facts {
        dom.push(' ');
        dom.push_str(f.name());
    }
    dom.push(')');
    for a in model.actions.values() {
        let _ = write!(dom, "\n  (:action {} :pre ", a.name);
        write_fact_list(&mut dom, &a.preconditions);
        dom.push_str(" :add ");
        write_fact_list(&mut dom, &a.add_effects);
        dom.push_str(" :del ");
        write_fact_list(&mut dom, &a.del_effects);
        let _ = write!(dom, " :cost {} :intrinsic {})", a.cost, a.intrinsic);
    }
    dom.push_str(")\n");

    let mut prob = String::new();
    let _ = writeln!(prob, "(define (problem {})", model.problem_name);
    let _ = write!(prob, "  (:domain {})\n  (:init ", model.domain_name);
    write_fact_list(&mut prob, &model.init);
    prob.push_str(")\n  (:goal ");
    write_fact_list(&mut prob, &model.goal);
    prob.push(')');
    if !model.utility.is_empty() {
        prob.push_str("\n  (:utility");
        for (f, u) in model.utility.iter() {
            let _ = write!(prob, " ({f} {u})");
        }
        prob.push(')');
    }
    if !model.display.is_empty() {
        prob.push_str("\n  (:display");
        for (k, v) in &model.display {
            let _ = write!(prob, "\n    ({k} ");
            write_string(&mut prob, v);
            prob.push(')');
        }
        prob.push(')');
    }
    prob.push_str(")\n");

    let origin = |kind: &str| format!("<serialized {kind} {}>", model.problem_name);
    (
        SourceDocument::new(dom, origin("domain")),
        SourceDocument::new(prob, origin("problem")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn parse(dom: &str, prob: &str) -> Result<PlanningModel, ParseError> {
        parse_model(&SourceDocument::new(dom, "dom"), &SourceDocument::new(prob, "prob"))
    }

    #[test]
    fn fixtures_match_code_constructors() {
        let parsed = parse(fixtures::ROBOT_AND_FRANK_DOMAIN, fixtures::ROBOT_AND_FRANK_PROBLEM).unwrap();
        assert_eq!(parsed, fixtures::robot_and_frank());
        assert_eq!(parsed.actions.len(), 3);
        assert_eq!(parsed.actions["lie_frank"].intrinsic, IntrinsicValue::Bad);
        assert_eq!(
            parse(fixtures::MEDICINE_DOMAIN, fixtures::MEDICINE_PROBLEM).unwrap(),
            fixtures::medicine()
        );
        assert_eq!(
            parse(fixtures::SHIELD_DOMAIN, fixtures::SHIELD_PROBLEM).unwrap(),
            fixtures::shield()
        );
    }

    #[test]
    fn degenerate_model_without_actions() {
        let m = parse(
            "(define (domain d) (:facts a))",
            "(define (problem p) (:domain d) (:init (a)) (:goal (a)))",
        )
        .unwrap();
        assert!(m.actions.is_empty());
        assert!(m.goal.is_subset(&m.init));
    }

    #[test]
    fn undeclared_goal_fact_is_semantic_error() {
        let err = parse(
            fixtures::ROBOT_AND_FRANK_DOMAIN,
            "(define (problem p) (:domain robot_and_frank)\n  (:init ())\n  (:goal (flying)))",
        )
        .unwrap_err();
        match err {
            ParseError::Semantic { line, col, message, .. } => {
                assert_eq!((line, col), (3, 11));
                assert!(message.contains("flying"), "{message}");
            }
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("(define (domain d)\n  (:facts a)", "(define (problem p))").unwrap_err();
        assert!(err.is_syntax());
        assert_eq!(err.position(), Position { line: 2, col: 13 });

        let err = parse("(define (domain d) (:facts a) (:bogus x))", "()").unwrap_err();
        assert!(err.is_syntax());
        assert_eq!(err.position(), Position { line: 1, col: 32 });
    }

    #[test]
    fn unknown_action_keyword_is_syntax_error() {
        let err = parse(
            "(define (domain d) (:facts a) (:action x :effect (a)))",
            "(define (problem p) (:domain d) (:init ()) (:goal ()))",
        )
        .unwrap_err();
        assert!(err.is_syntax(), "{err}");
    }

    #[test]
    fn duplicate_action_is_semantic_error() {
        let err = parse(
            "(define (domain d) (:facts a) (:action x) (:action x))",
            "(define (problem p) (:domain d) (:init ()) (:goal ()))",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Semantic { .. }), "{err}");
    }

    #[test]
    fn domain_name_mismatch() {
        let err = parse(
            "(define (domain d) (:facts a))",
            "(define (problem p) (:domain other) (:init ()) (:goal ()))",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Semantic { .. }));
    }

    #[test]
    fn grounds_parameterized_actions() {
        let m = parse(
            "(define (domain care)
               (:constants frank anna - person)
               (:facts (motivated person) (healthy person))
               (:action encourage :parameters (?p - person)
                  :add ((motivated ?p)) :intrinsic good)
               (:action exercise :parameters (?p - person)
                  :pre ((motivated ?p)) :add ((healthy ?p)) :cost 2))",
            "(define (problem p) (:domain care)
               (:init ()) (:goal ((healthy frank)))
               (:utility ((healthy frank) 5))
               (:display ((encourage frank) \"encouraging Frank\")))",
        )
        .unwrap();
        let names: Vec<&str> = m.actions.keys().map(String::as_str).collect();
        assert_eq!(
            names,
            ["encourage_anna", "encourage_frank", "exercise_anna", "exercise_frank"]
        );
        let ex = &m.actions["exercise_frank"];
        assert_eq!(ex.cost, 2);
        assert!(ex.preconditions.contains(&Fact::from("motivated_frank")));
        assert_eq!(m.utility.get(&Fact::from("healthy_frank")), 5);
        assert_eq!(m.display_phrase("encourage_frank"), Some("encouraging Frank"));
        assert_eq!(m.actions["encourage_anna"].intrinsic, IntrinsicValue::Good);
    }

    #[test]
    fn golden_fixture_serialization() {
        let (dom, prob) = serialize_model(&fixtures::robot_and_frank());
        assert_eq!(
            dom.text,
            "(define (domain robot_and_frank)\n  (:facts healthy motivated unhealthy)\n  \
             (:action beg_frank :pre () :add (motivated) :del () :cost 2 :intrinsic neutral)\n  \
             (:action exercise :pre (motivated) :add (healthy) :del (unhealthy) :cost 1 :intrinsic neutral)\n  \
             (:action lie_frank :pre () :add (motivated) :del () :cost 1 :intrinsic bad))\n"
        );
        assert!(prob.text.contains("(:utility (healthy 10) (unhealthy -10))"));
        assert!(prob.text.contains("(lie_frank \"lying to Frank\")"));
    }

    #[test]
    fn provenance_header_round_trips() {
        let mut m = fixtures::robot_and_frank();
        m.actions.remove("lie_frank");
        m.provenance.push("forbid lie_frank".into());
        let (dom, prob) = serialize_model(&m);
        assert!(dom.text.starts_with(";; provenance: forbid lie_frank\n"));
        assert_eq!(parse_model(&dom, &prob).unwrap(), m);
    }

    #[test]
    fn strings_with_quotes_round_trip() {
        let mut m = fixtures::robot_and_frank();
        m.display.insert("exercise".into(), "a \"quoted\" \\ phrase".into());
        let (dom, prob) = serialize_model(&m);
        assert_eq!(parse_model(&dom, &prob).unwrap(), m);
    }
}
