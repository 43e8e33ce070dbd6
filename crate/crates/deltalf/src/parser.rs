//! Lexer, parser, and elaborator for the concrete syntax.
//!
//! Commands end with `.`; comments are `(* ... *)` and nest. Term
//! precedence, loosest to tightest: `fun`/`sfun` bodies, `->` and `>->`
//! (right-associative), `|`, `&`, application and `$` (left-associative),
//! prefix `proj_l`/`proj_r`/`inj_l [T]`/`inj_r [T]`, atoms. `(x : T) -> U`
//! is a dependent product; `T -> U` is its non-dependent sugar. The
//! elaborator resolves names against the session signature and converts
//! binders to de Bruijn indices; whether an application is at the family
//! or the object level is decided by the syntactic category of the head.

use crate::syntax::{classify, shift, Category, Signature, Term};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl SourceSpan {
    fn point(pos: usize, line: usize, col: usize) -> Self {
        SourceSpan {
            start: pos,
            end: pos,
            line,
            col,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}",
            self.span.line, self.span.col, self.message
        )?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    StrLit(String),
    Num(usize),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
    Comma,
    Colon,
    ColonEq,
    Dot,
    Arrow,
    RelArrow,
    FatArrow,
    Amp,
    Pipe,
    Dollar,
    Leq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::StrLit(_) => "string literal",
            Tok::Num(_) => "number",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LAngle => "`<`",
            Tok::RAngle => "`>`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::ColonEq => "`:=`",
            Tok::Dot => "`.`",
            Tok::Arrow => "`->`",
            Tok::RelArrow => "`>->`",
            Tok::FatArrow => "`=>`",
            Tok::Amp => "`&`",
            Tok::Pipe => "`|`",
            Tok::Dollar => "`$`",
            Tok::Leq => "`<=`",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    span: SourceSpan,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1usize;
    let mut col = 1usize;
    let err = |msg: &str, pos, line, col| ParseError {
        span: SourceSpan::point(pos, line, col),
        message: msg.to_string(),
        expected: vec![],
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        let (tline, tcol, start) = (line, col, i);
        macro_rules! push {
            ($tok:expr, $len:expr) => {{
                toks.push(Spanned {
                    tok: $tok,
                    span: SourceSpan {
                        start,
                        end: start + $len,
                        line: tline,
                        col: tcol,
                    },
                });
                i += $len;
                col += $len;
            }};
        }
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '(' if bytes.get(i + 1) == Some(&b'*') => {
                // nested comments
                let mut depth = 1usize;
                i += 2;
                col += 2;
                while depth > 0 {
                    if i >= bytes.len() {
                        return Err(err("unterminated comment", start, tline, tcol));
                    }
                    if bytes[i] == b'(' && bytes.get(i + 1) == Some(&b'*') {
                        depth += 1;
                        i += 2;
                        col += 2;
                    } else if bytes[i] == b'*' && bytes.get(i + 1) == Some(&b')') {
                        depth -= 1;
                        i += 2;
                        col += 2;
                    } else if bytes[i] == b'\n' {
                        i += 1;
                        line += 1;
                        col = 1;
                    } else {
                        i += 1;
                        col += 1;
                    }
                }
            }
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '[' => push!(Tok::LBracket, 1),
            ']' => push!(Tok::RBracket, 1),
            ',' => push!(Tok::Comma, 1),
            '.' => push!(Tok::Dot, 1),
            '&' => push!(Tok::Amp, 1),
            '|' => push!(Tok::Pipe, 1),
            '$' => push!(Tok::Dollar, 1),
            '<' if bytes.get(i + 1) == Some(&b'=') => push!(Tok::Leq, 2),
            '<' => push!(Tok::LAngle, 1),
            '>' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                push!(Tok::RelArrow, 3)
            }
            '>' => push!(Tok::RAngle, 1),
            '-' if bytes.get(i + 1) == Some(&b'>') => push!(Tok::Arrow, 2),
            '=' if bytes.get(i + 1) == Some(&b'>') => push!(Tok::FatArrow, 2),
            ':' if bytes.get(i + 1) == Some(&b'=') => push!(Tok::ColonEq, 2),
            ':' => push!(Tok::Colon, 1),
            '"' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j] != b'"' {
                    if bytes[j] == b'\n' {
                        return Err(err("unterminated string literal", start, tline, tcol));
                    }
                    j += 1;
                }
                if j >= bytes.len() {
                    return Err(err("unterminated string literal", start, tline, tcol));
                }
                let s = src[i + 1..j].to_string();
                push!(Tok::StrLit(s), j + 1 - i);
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    j += 1;
                }
                let n: usize = src[i..j].parse().map_err(|_| {
                    err("number out of range", start, tline, tcol)
                })?;
                push!(Tok::Num(n), j - i);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() {
                    let ch = bytes[j] as char;
                    if ch.is_ascii_alphanumeric() || ch == '_' || ch == '\'' {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s = src[i..j].to_string();
                push!(Tok::Ident(s), j - i);
            }
            _ => {
                return Err(err(
                    &format!("unexpected character `{c}`"),
                    start,
                    tline,
                    tcol,
                ))
            }
        }
    }
    Ok(toks)
}

/// Surface syntax before name resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum STerm {
    Type(SourceSpan),
    Name(String, SourceSpan),
    Pi {
        name: String,
        domain: Box<STerm>,
        body: Box<STerm>,
    },
    Arrow {
        domain: Box<STerm>,
        body: Box<STerm>,
    },
    RelArrow {
        domain: Box<STerm>,
        codomain: Box<STerm>,
    },
    Inter {
        left: Box<STerm>,
        right: Box<STerm>,
    },
    Union {
        left: Box<STerm>,
        right: Box<STerm>,
    },
    App {
        func: Box<STerm>,
        arg: Box<STerm>,
    },
    RelApp {
        func: Box<STerm>,
        arg: Box<STerm>,
    },
    Lam {
        name: String,
        domain: Box<STerm>,
        body: Box<STerm>,
        span: SourceSpan,
    },
    RelLam {
        name: String,
        domain: Box<STerm>,
        body: Box<STerm>,
        span: SourceSpan,
    },
    SPair {
        left: Box<STerm>,
        right: Box<STerm>,
    },
    SCoPair {
        left: Box<STerm>,
        right: Box<STerm>,
    },
    ProjL(Box<STerm>),
    ProjR(Box<STerm>),
    InjL {
        ann: Box<STerm>,
        body: Box<STerm>,
    },
    InjR {
        ann: Box<STerm>,
        body: Box<STerm>,
    },
}

impl STerm {
    pub fn span(&self) -> SourceSpan {
        match self {
            STerm::Type(s) | STerm::Name(_, s) => *s,
            STerm::Lam { span, .. } | STerm::RelLam { span, .. } => *span,
            STerm::Pi { domain, .. }
            | STerm::Arrow { domain, .. }
            | STerm::RelArrow { domain, .. } => domain.span(),
            STerm::Inter { left, .. } | STerm::Union { left, .. } => left.span(),
            STerm::App { func, .. } | STerm::RelApp { func, .. } => func.span(),
            STerm::SPair { left, .. } | STerm::SCoPair { left, .. } => left.span(),
            STerm::ProjL(t) | STerm::ProjR(t) => t.span(),
            STerm::InjL { body, .. } | STerm::InjR { body, .. } => body.span(),
        }
    }
}

/// Which budget a `Set` command adjusts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuelKind {
    Reduction,
    Essence,
}

/// One REPL or batch-file command.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Axiom {
        name: String,
        classifier: STerm,
    },
    Definition {
        name: String,
        classifier: Option<STerm>,
        body: STerm,
    },
    Check(STerm),
    Eval(STerm),
    Essence(STerm),
    Subtype {
        left: STerm,
        right: STerm,
    },
    Load(String),
    SetFuel(FuelKind, usize),
    Quit,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: SourceSpan,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn span(&self) -> SourceSpan {
        self.toks.get(self.pos).map(|s| s.span).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>, expected: Vec<&str>) -> Result<T, ParseError> {
        Err(ParseError {
            span: self.span(),
            message: message.into(),
            expected: expected.into_iter().map(String::from).collect(),
        })
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let t = t.clone();
                self.fail(format!("unexpected {t}"), vec![what])
            }
            None => self.fail("unexpected end of input", vec![what]),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail("expected an identifier", vec![what]),
        }
    }

    fn at_ident(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_ident(&mut self, kw: &str) -> bool {
        if self.at_ident(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn term(&mut self) -> Result<STerm, ParseError> {
        if self.at_ident("fun") || self.at_ident("sfun") {
            let span = self.span();
            let relevant = self.at_ident("sfun");
            self.pos += 1;
            let name = self.expect_ident("binder name")?;
            self.expect(&Tok::Colon, "`:`")?;
            let domain = Box::new(self.term()?);
            self.expect(&Tok::FatArrow, "`=>`")?;
            let body = Box::new(self.term()?);
            return Ok(if relevant {
                STerm::RelLam {
                    name,
                    domain,
                    body,
                    span,
                }
            } else {
                STerm::Lam {
                    name,
                    domain,
                    body,
                    span,
                }
            });
        }
        self.arrow()
    }

    fn arrow(&mut self) -> Result<STerm, ParseError> {
        // dependent product needs two-token lookahead: `(` ident `:`
        if self.peek() == Some(&Tok::LParen) {
            let is_binder = matches!(
                (self.toks.get(self.pos + 1).map(|s| &s.tok), self.toks.get(self.pos + 2).map(|s| &s.tok)),
                (Some(Tok::Ident(s)), Some(Tok::Colon)) if !is_keyword(s)
            );
            if is_binder {
                self.pos += 1;
                let name = self.expect_ident("binder name")?;
                self.expect(&Tok::Colon, "`:`")?;
                let domain = Box::new(self.term()?);
                self.expect(&Tok::RParen, "`)`")?;
                self.expect(&Tok::Arrow, "`->`")?;
                let body = Box::new(self.term()?);
                return Ok(STerm::Pi { name, domain, body });
            }
        }
        let lhs = self.union()?;
        match self.peek() {
            Some(Tok::Arrow) => {
                self.pos += 1;
                let rhs = self.term()?;
                Ok(STerm::Arrow {
                    domain: Box::new(lhs),
                    body: Box::new(rhs),
                })
            }
            Some(Tok::RelArrow) => {
                self.pos += 1;
                let rhs = self.term()?;
                Ok(STerm::RelArrow {
                    domain: Box::new(lhs),
                    codomain: Box::new(rhs),
                })
            }
            _ => Ok(lhs),
        }
    }

    fn union(&mut self) -> Result<STerm, ParseError> {
        let mut lhs = self.inter()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.inter()?;
            lhs = STerm::Union {
                left: Box::new(lhs),
                right: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn inter(&mut self) -> Result<STerm, ParseError> {
        let mut lhs = self.appterm()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.appterm()?;
            lhs = STerm::Inter {
                left: Box::new(lhs),
                right: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn starts_prefix(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                matches!(s.as_str(), "proj_l" | "proj_r" | "inj_l" | "inj_r")
                    || !is_keyword(s)
            }
            Some(Tok::LParen | Tok::LAngle | Tok::LBracket) => true,
            _ => false,
        }
    }

    fn appterm(&mut self) -> Result<STerm, ParseError> {
        let mut head = self.prefix()?;
        loop {
            if self.peek() == Some(&Tok::Dollar) {
                self.pos += 1;
                let arg = self.prefix()?;
                head = STerm::RelApp {
                    func: Box::new(head),
                    arg: Box::new(arg),
                };
            } else if self.starts_prefix() {
                let arg = self.prefix()?;
                head = STerm::App {
                    func: Box::new(head),
                    arg: Box::new(arg),
                };
            } else {
                break;
            }
        }
        Ok(head)
    }

    fn prefix(&mut self) -> Result<STerm, ParseError> {
        if self.eat_ident("proj_l") {
            return Ok(STerm::ProjL(Box::new(self.prefix()?)));
        }
        if self.eat_ident("proj_r") {
            return Ok(STerm::ProjR(Box::new(self.prefix()?)));
        }
        if self.at_ident("inj_l") || self.at_ident("inj_r") {
            let left = self.at_ident("inj_l");
            self.pos += 1;
            self.expect(&Tok::LBracket, "`[`")?;
            let ann = Box::new(self.term()?);
            self.expect(&Tok::RBracket, "`]`")?;
            let body = Box::new(self.prefix()?);
            return Ok(if left {
                STerm::InjL { ann, body }
            } else {
                STerm::InjR { ann, body }
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<STerm, ParseError> {
        let span = self.span();
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "Type" => {
                self.pos += 1;
                Ok(STerm::Type(span))
            }
            Some(Tok::Ident(s)) if !is_keyword(&s) => {
                self.pos += 1;
                Ok(STerm::Name(s, span))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some(Tok::LAngle) => {
                self.pos += 1;
                let left = Box::new(self.term()?);
                self.expect(&Tok::Comma, "`,`")?;
                let right = Box::new(self.term()?);
                self.expect(&Tok::RAngle, "`>`")?;
                Ok(STerm::SPair { left, right })
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let left = Box::new(self.term()?);
                self.expect(&Tok::Comma, "`,`")?;
                let right = Box::new(self.term()?);
                self.expect(&Tok::RBracket, "`]`")?;
                Ok(STerm::SCoPair { left, right })
            }
            _ => self.fail(
                "expected a term",
                vec!["identifier", "`Type`", "`(`", "`<`", "`[`", "`fun`", "`sfun`"],
            ),
        }
    }

    fn command(&mut self) -> Result<Command, ParseError> {
        let cmd = if self.eat_ident("Axiom") {
            let name = self.expect_ident("axiom name")?;
            self.expect(&Tok::Colon, "`:`")?;
            let classifier = self.term()?;
            Command::Axiom { name, classifier }
        } else if self.eat_ident("Definition") {
            let name = self.expect_ident("definition name")?;
            let classifier = if self.peek() == Some(&Tok::Colon) {
                self.pos += 1;
                Some(self.term()?)
            } else {
                None
            };
            self.expect(&Tok::ColonEq, "`:=`")?;
            let body = self.term()?;
            Command::Definition {
                name,
                classifier,
                body,
            }
        } else if self.eat_ident("Check") {
            Command::Check(self.term()?)
        } else if self.eat_ident("Eval") {
            Command::Eval(self.term()?)
        } else if self.eat_ident("Essence") {
            Command::Essence(self.term()?)
        } else if self.eat_ident("Subtype") {
            let left = self.term()?;
            self.expect(&Tok::Leq, "`<=`")?;
            let right = self.term()?;
            Command::Subtype { left, right }
        } else if self.eat_ident("Load") {
            match self.bump() {
                Some(Tok::StrLit(path)) => Command::Load(path),
                _ => return self.fail("expected a file path", vec!["string literal"]),
            }
        } else if self.eat_ident("Set") {
            let kind = if self.eat_ident("fuel") {
                FuelKind::Reduction
            } else if self.eat_ident("essence_fuel") {
                FuelKind::Essence
            } else {
                return self.fail("unknown setting", vec!["`fuel`", "`essence_fuel`"]);
            };
            match self.bump() {
                Some(Tok::Num(n)) => Command::SetFuel(kind, n),
                _ => return self.fail("expected a number", vec!["number"]),
            }
        } else if self.eat_ident("Quit") {
            Command::Quit
        } else {
            return self.fail(
                "expected a command",
                vec![
                    "`Axiom`",
                    "`Definition`",
                    "`Check`",
                    "`Eval`",
                    "`Essence`",
                    "`Subtype`",
                    "`Load`",
                    "`Set`",
                    "`Quit`",
                ],
            );
        };
        self.expect(&Tok::Dot, "`.`")?;
        Ok(cmd)
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "Type"
            | "fun"
            | "sfun"
            | "proj_l"
            | "proj_r"
            | "inj_l"
            | "inj_r"
            | "Axiom"
            | "Definition"
            | "Check"
            | "Eval"
            | "Essence"
            | "Subtype"
            | "Load"
            | "Set"
            | "Quit"
    )
}

fn end_span(src: &str) -> SourceSpan {
    let line = src.lines().count().max(1);
    let col = src.lines().last().map(|l| l.len() + 1).unwrap_or(1);
    SourceSpan::point(src.len(), line, col)
}

/// Parse a whole source file into commands.
pub fn parse(src: &str) -> Result<Vec<Command>, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: end_span(src),
    };
    let mut cmds = Vec::new();
    while p.peek().is_some() {
        cmds.push(p.command()?);
    }
    Ok(cmds)
}

/// Parse a single term (no trailing `.`).
pub fn parse_term(src: &str) -> Result<STerm, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: end_span(src),
    };
    let t = p.term()?;
    if p.peek().is_some() {
        return p.fail("trailing input after term", vec!["end of input"]);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElabError {
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for ElabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.message)
    }
}

impl std::error::Error for ElabError {}

fn is_family_cat(t: &Term) -> bool {
    matches!(classify(t), Ok(Category::Family))
}

fn is_kind_cat(t: &Term) -> bool {
    matches!(classify(t), Ok(Category::Kind))
}

/// Resolve names and binders, producing a kernel term. Definitions are
/// transparent: defined constants are replaced by their bodies here, so
/// the kernel never sees them.
pub fn elaborate(sig: &Signature, st: &STerm) -> Result<Term, ElabError> {
    elab(sig, &mut Vec::new(), st, false, false)
}

/// Like `elaborate`, but unbound names become constants instead of errors:
/// family constants in type positions, object constants elsewhere. Used by
/// standalone evaluation, where no signature is in scope.
pub fn elaborate_permissive(sig: &Signature, st: &STerm) -> Result<Term, ElabError> {
    elab(sig, &mut Vec::new(), st, true, false)
}

fn elab(
    sig: &Signature,
    binders: &mut Vec<String>,
    st: &STerm,
    permissive: bool,
    fam_pos: bool,
) -> Result<Term, ElabError> {
    match st {
        STerm::Type(_) => Ok(Term::Type),
        STerm::Name(name, span) => {
            if let Some(i) = binders.iter().rev().position(|b| b == name) {
                return Ok(Term::Var(i));
            }
            match sig.lookup(name) {
                Some(e) => {
                    if let Some(body) = &e.body {
                        Ok(body.clone())
                    } else if e.is_family {
                        Ok(Term::cfam(name.clone()))
                    } else {
                        Ok(Term::cobj(name.clone()))
                    }
                }
                None if permissive => Ok(if fam_pos {
                    Term::cfam(name.clone())
                } else {
                    Term::cobj(name.clone())
                }),
                None => Err(ElabError {
                    span: *span,
                    message: format!("unbound name `{name}`"),
                }),
            }
        }
        STerm::Pi { name, domain, body } => {
            check_binder(sig, name, st.span())?;
            let d = elab(sig, binders, domain, permissive, true)?;
            binders.push(name.clone());
            let b = elab(sig, binders, body, permissive, true);
            binders.pop();
            let b = b?;
            Ok(if is_kind_cat(&b) {
                Term::pi_kind(name.clone(), d, b)
            } else {
                Term::pi_fam(name.clone(), d, b)
            })
        }
        STerm::Arrow { domain, body } => {
            let d = elab(sig, binders, domain, permissive, true)?;
            let b = elab(sig, binders, body, permissive, true)?;
            let b = shift(&b, 0, 1);
            Ok(if is_kind_cat(&b) {
                Term::pi_kind("_", d, b)
            } else {
                Term::pi_fam("_", d, b)
            })
        }
        STerm::RelArrow { domain, codomain } => Ok(Term::rel_arrow(
            elab(sig, binders, domain, permissive, true)?,
            elab(sig, binders, codomain, permissive, true)?,
        )),
        STerm::Inter { left, right } => Ok(Term::inter(
            elab(sig, binders, left, permissive, true)?,
            elab(sig, binders, right, permissive, true)?,
        )),
        STerm::Union { left, right } => Ok(Term::union(
            elab(sig, binders, left, permissive, true)?,
            elab(sig, binders, right, permissive, true)?,
        )),
        STerm::App { func, arg } => {
            let f = elab(sig, binders, func, permissive, fam_pos)?;
            let a = elab(sig, binders, arg, permissive, false)?;
            Ok(if is_family_cat(&f) {
                Term::fam_app(f, a)
            } else {
                Term::app(f, a)
            })
        }
        STerm::RelApp { func, arg } => Ok(Term::rel_app(
            elab(sig, binders, func, permissive, false)?,
            elab(sig, binders, arg, permissive, false)?,
        )),
        STerm::Lam {
            name,
            domain,
            body,
            span,
        } => {
            check_binder(sig, name, *span)?;
            let d = elab(sig, binders, domain, permissive, true)?;
            binders.push(name.clone());
            let b = elab(sig, binders, body, permissive, false);
            binders.pop();
            Ok(Term::lam(name.clone(), d, b?))
        }
        STerm::RelLam {
            name,
            domain,
            body,
            span,
        } => {
            check_binder(sig, name, *span)?;
            let d = elab(sig, binders, domain, permissive, true)?;
            binders.push(name.clone());
            let b = elab(sig, binders, body, permissive, false);
            binders.pop();
            Ok(Term::rel_lam(name.clone(), d, b?))
        }
        STerm::SPair { left, right } => Ok(Term::spair(
            elab(sig, binders, left, permissive, false)?,
            elab(sig, binders, right, permissive, false)?,
        )),
        STerm::SCoPair { left, right } => Ok(Term::scopair(
            elab(sig, binders, left, permissive, false)?,
            elab(sig, binders, right, permissive, false)?,
        )),
        STerm::ProjL(t) => Ok(Term::proj_l(elab(sig, binders, t, permissive, false)?)),
        STerm::ProjR(t) => Ok(Term::proj_r(elab(sig, binders, t, permissive, false)?)),
        STerm::InjL { ann, body } => Ok(Term::inj_l(
            elab(sig, binders, ann, permissive, true)?,
            elab(sig, binders, body, permissive, false)?,
        )),
        STerm::InjR { ann, body } => Ok(Term::inj_r(
            elab(sig, binders, ann, permissive, true)?,
            elab(sig, binders, body, permissive, false)?,
        )),
    }
}

/// Shadowing a signature constant with a binder would silently change the
/// meaning of printed terms, so reject it.
fn check_binder(sig: &Signature, name: &str, span: SourceSpan) -> Result<(), ElabError> {
    if sig.contains(name) {
        Err(ElabError {
            span,
            message: format!("binder `{name}` shadows a signature constant"),
        })
    } else {
        Ok(())
    }
}
