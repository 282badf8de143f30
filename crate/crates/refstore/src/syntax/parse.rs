//! Concrete grammar and parser.
//!
//! Terms:
//! ```text
//! t ::= \x. t | \x : ty. t | rec f x. t | rec f x : ty. t
//!     | x <- t; t | t; t | t + t | t - t
//!     | ret a | alloc a | get a | neg a | fst a | snd a | set a a
//!     | map a a | map neg a | step | t a | t.label
//! a ::= x | n | -n | () | (t) | (t, t) | (t : ty) | { l -> t, ... }
//! ```
//! Definitions: `def name = term`, comments `-- ...`.

use super::{Term, Type};
use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Meta(String),
    Int(BigInt),
    Kw(&'static str),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    Arrow,     // ->
    BackArrow, // <-
    Eq,
    Colon,
    Plus,
    Minus,
    Star,
    Lambda,
    Underscore,
}

const KEYWORDS: &[&str] = &[
    "ret", "alloc", "get", "set", "step", "rec", "def", "map", "neg", "fst", "snd", "Int",
    "Unit", "T", "Ref", "Cell",
];

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    line: usize,
    col: usize,
    /// true when this token starts immediately after the previous one,
    /// with no whitespace in between (used for negative literals).
    adjacent: bool,
}

fn lex(src: &str) -> Result<Vec<SpannedTok>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    let mut prev_end = (0usize, 0usize);
    macro_rules! push {
        ($t:expr, $l:expr, $c:expr) => {
            toks.push(SpannedTok {
                tok: $t,
                line: $l,
                col: $c,
                adjacent: prev_end == ($l, $c),
            })
        };
    }
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        match c {
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'-') {
                    // comment to end of line
                    for ch in chars.by_ref() {
                        if ch == '\n' {
                            line += 1;
                            col = 1;
                            break;
                        }
                    }
                } else if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    push!(Tok::Arrow, l0, c0);
                    prev_end = (line, col);
                } else {
                    push!(Tok::Minus, l0, c0);
                    prev_end = (line, col);
                }
            }
            '<' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'-') {
                    chars.next();
                    col += 1;
                    push!(Tok::BackArrow, l0, c0);
                    prev_end = (line, col);
                } else {
                    return Err(ParseError {
                        line: l0,
                        col: c0,
                        msg: "expected '<-'".into(),
                    });
                }
            }
            '(' | ')' | '{' | '}' | ',' | ';' | '.' | '=' | ':' | '+' | '*' | '\\' => {
                chars.next();
                col += 1;
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '.' => Tok::Dot,
                    '=' => Tok::Eq,
                    ':' => Tok::Colon,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    '\\' => Tok::Lambda,
                    _ => unreachable!(),
                };
                push!(t, l0, c0);
                prev_end = (line, col);
            }
            '?' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' || ch == '\'' {
                        s.push(ch);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if s.is_empty() {
                    return Err(ParseError {
                        line: l0,
                        col: c0,
                        msg: "expected metavariable name after '?'".into(),
                    });
                }
                push!(Tok::Meta(format!("?{s}")), l0, c0);
                prev_end = (line, col);
            }
            _ if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_digit() {
                        s.push(ch);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push!(Tok::Int(s.parse().unwrap()), l0, c0);
                prev_end = (line, col);
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' || ch == '\'' {
                        s.push(ch);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let t = if s == "_" {
                    Tok::Underscore
                } else if let Some(kw) = KEYWORDS.iter().find(|k| **k == s) {
                    Tok::Kw(kw)
                } else {
                    Tok::Ident(s)
                };
                push!(t, l0, c0);
                prev_end = (line, col);
            }
            _ => {
                return Err(ParseError {
                    line: l0,
                    col: c0,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(toks)
}

pub struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
    fresh: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Def {
    pub name: String,
    pub term: Term,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            fresh: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }
    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }
    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .or_else(|| self.toks.last().map(|s| (s.line, s.col + 1)))
            .unwrap_or((1, 1))
    }
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            msg: msg.into(),
        })
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }
    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }
    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn binder(&mut self) -> Result<String, ParseError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(Tok::Underscore) => Ok("_".to_string()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a binder name")
            }
        }
    }

    fn fresh_seq_name(&mut self) -> String {
        // `e; e'` binds an unused name; "_" is reserved for that purpose
        // and is rejected as a variable reference.
        let _ = &mut self.fresh;
        "_".to_string()
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Lambda) => {
                self.next();
                let param = self.binder()?;
                let ann = if self.eat(&Tok::Colon) {
                    Some(self.ty()?)
                } else {
                    None
                };
                self.expect(Tok::Dot, "'.' after lambda binder")?;
                let body = self.term()?;
                Ok(Term::Lam {
                    param,
                    ann,
                    body: Box::new(body),
                })
            }
            Some(Tok::Kw("rec")) => {
                self.next();
                let fname = self.binder()?;
                let param = self.binder()?;
                let ann = if self.eat(&Tok::Colon) {
                    Some(self.ty()?)
                } else {
                    None
                };
                self.expect(Tok::Dot, "'.' after rec binders")?;
                let body = self.term()?;
                Ok(Term::Rec {
                    fname,
                    param,
                    ann,
                    body: Box::new(body),
                })
            }
            Some(Tok::Ident(_)) | Some(Tok::Underscore)
                if self.peek2() == Some(&Tok::BackArrow) =>
            {
                let var = self.binder()?;
                self.next(); // <-
                let rhs = self.op_term()?;
                self.expect(Tok::Semi, "';' after bind right-hand side")?;
                let body = self.term()?;
                Ok(Term::Bind {
                    var,
                    rhs: Box::new(rhs),
                    body: Box::new(body),
                })
            }
            _ => {
                let e = self.op_term()?;
                if self.eat(&Tok::Semi) {
                    let var = self.fresh_seq_name();
                    let body = self.term()?;
                    Ok(Term::Bind {
                        var,
                        rhs: Box::new(e),
                        body: Box::new(body),
                    })
                } else {
                    Ok(e)
                }
            }
        }
    }

    fn op_term(&mut self) -> Result<Term, ParseError> {
        let mut e = self.unary()?;
        loop {
            if self.eat(&Tok::Plus) {
                let r = self.unary()?;
                e = Term::Add(Box::new(e), Box::new(r));
            } else if self.peek() == Some(&Tok::Minus) {
                self.next();
                let r = self.unary()?;
                e = Term::Sub(Box::new(e), Box::new(r));
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Kw("ret")) => {
                self.next();
                Ok(Term::Ret(Box::new(self.unary()?)))
            }
            Some(Tok::Kw("alloc")) => {
                self.next();
                Ok(Term::Alloc {
                    tag: None,
                    init: Box::new(self.unary()?),
                })
            }
            Some(Tok::Kw("get")) => {
                self.next();
                Ok(Term::Get(Box::new(self.unary()?)))
            }
            Some(Tok::Kw("neg")) => {
                self.next();
                Ok(Term::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Kw("fst")) => {
                self.next();
                Ok(Term::Fst(Box::new(self.unary()?)))
            }
            Some(Tok::Kw("snd")) => {
                self.next();
                Ok(Term::Snd(Box::new(self.unary()?)))
            }
            Some(Tok::Kw("set")) => {
                self.next();
                let a = self.atom()?;
                let b = self.atom()?;
                Ok(Term::Set(Box::new(a), Box::new(b)))
            }
            Some(Tok::Kw("map")) => {
                self.next();
                // `map f e` is sugar for `x <- e; ret (f x)`; the builtin
                // `neg` is accepted in function position.
                enum F {
                    Neg,
                    Term(Term),
                }
                let f = if self.peek() == Some(&Tok::Kw("neg")) {
                    self.next();
                    F::Neg
                } else {
                    F::Term(self.atom()?)
                };
                let e = self.atom()?;
                let mut avoid = super::all_names(&e);
                if let F::Term(t) = &f {
                    avoid.extend(super::all_names(t));
                }
                let x = super::fresh_name("x", &avoid);
                let body = match f {
                    F::Neg => Term::Neg(Box::new(Term::Var(x.clone()))),
                    F::Term(t) => Term::app_contract(&t, Term::Var(x.clone())),
                };
                Ok(Term::Bind {
                    var: x,
                    rhs: Box::new(e),
                    body: Box::new(Term::Ret(Box::new(body))),
                })
            }
            Some(Tok::Kw("step")) => {
                self.next();
                Ok(Term::Step)
            }
            _ => self.app(),
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(_)) | Some(Tok::Meta(_)) | Some(Tok::Int(_)) | Some(Tok::LParen)
            | Some(Tok::LBrace) => true,
            Some(Tok::Minus) => {
                // adjacent minus-digit is a negative literal
                matches!(self.peek2(), Some(Tok::Int(_)))
                    && self.toks.get(self.pos + 1).map(|s| s.adjacent) == Some(true)
            }
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut e = self.atom()?;
        loop {
            if self.eat(&Tok::Dot) {
                match self.next() {
                    Some(Tok::Ident(l)) => e = Term::Proj(Box::new(e), l),
                    _ => return self.err("expected a record label after '.'"),
                }
            } else if self.starts_atom() {
                let a = self.atom()?;
                e = Term::App(Box::new(e), Box::new(a));
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.next();
                let mut e = Term::Var(s);
                while self.eat(&Tok::Dot) {
                    match self.next() {
                        Some(Tok::Ident(l)) => e = Term::Proj(Box::new(e), l),
                        _ => return self.err("expected a record label after '.'"),
                    }
                }
                Ok(e)
            }
            Some(Tok::Meta(s)) => {
                self.next();
                Ok(Term::Var(s))
            }
            Some(Tok::Underscore) => self.err("'_' cannot be used as a variable"),
            Some(Tok::Int(n)) => {
                self.next();
                Ok(Term::Int(n))
            }
            Some(Tok::Minus) => {
                // negative literal: '-' immediately followed by digits
                let adjacent = self.toks.get(self.pos + 1).map(|s| s.adjacent) == Some(true);
                match (adjacent, self.peek2().cloned()) {
                    (true, Some(Tok::Int(n))) => {
                        self.next();
                        self.next();
                        Ok(Term::Int(-n))
                    }
                    _ => self.err("expected a term"),
                }
            }
            Some(Tok::LParen) => {
                self.next();
                if self.eat(&Tok::RParen) {
                    return Ok(Term::Unit);
                }
                let e = self.term()?;
                if self.eat(&Tok::Comma) {
                    let e2 = self.term()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Term::Pair(Box::new(e), Box::new(e2)))
                } else if self.eat(&Tok::Colon) {
                    let ty = self.ty()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Term::Ann(Box::new(e), ty))
                } else {
                    self.expect(Tok::RParen, "')'")?;
                    Ok(e)
                }
            }
            Some(Tok::LBrace) => {
                self.next();
                let mut fields: Vec<(String, Term)> = Vec::new();
                loop {
                    let label = match self.next() {
                        Some(Tok::Ident(l)) => l,
                        _ => return self.err("expected a record label"),
                    };
                    if fields.iter().any(|(l, _)| *l == label) {
                        return self.err(format!("duplicate record label '{label}'"));
                    }
                    self.expect(Tok::Arrow, "'->' after record label")?;
                    let e = self.term()?;
                    fields.push((label, e));
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    self.expect(Tok::RBrace, "'}'")?;
                    break;
                }
                Ok(Term::Record(fields))
            }
            _ => self.err("expected a term"),
        }
    }

    pub fn ty(&mut self) -> Result<Type, ParseError> {
        let t = self.ty_prod()?;
        if self.eat(&Tok::Arrow) {
            let cod = self.ty()?;
            Ok(Type::fun(t, cod))
        } else {
            Ok(t)
        }
    }

    fn ty_prod(&mut self) -> Result<Type, ParseError> {
        let mut t = self.ty_app()?;
        while self.eat(&Tok::Star) {
            let r = self.ty_app()?;
            t = Type::prod(t, r);
        }
        Ok(t)
    }

    fn ty_app(&mut self) -> Result<Type, ParseError> {
        match self.peek() {
            Some(Tok::Kw("T")) => {
                self.next();
                Ok(Type::T(Box::new(self.ty_app()?)))
            }
            Some(Tok::Kw("Ref")) => {
                self.next();
                Ok(Type::Ref(Box::new(self.ty_app()?)))
            }
            Some(Tok::Kw("Cell")) => {
                self.next();
                Ok(Type::cell(self.ty_app()?))
            }
            _ => self.ty_atom(),
        }
    }

    fn ty_atom(&mut self) -> Result<Type, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Kw("Int")) => {
                self.next();
                Ok(Type::Int)
            }
            Some(Tok::Kw("Unit")) => {
                self.next();
                Ok(Type::Unit)
            }
            Some(Tok::LParen) => {
                self.next();
                if self.eat(&Tok::RParen) {
                    return Ok(Type::Unit);
                }
                let t = self.ty()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            Some(Tok::LBrace) => {
                self.next();
                let mut fields: Vec<(String, Type)> = Vec::new();
                loop {
                    let label = match self.next() {
                        Some(Tok::Ident(l)) => l,
                        _ => return self.err("expected a record label"),
                    };
                    if fields.iter().any(|(l, _)| *l == label) {
                        return self.err(format!("duplicate record label '{label}'"));
                    }
                    self.expect(Tok::Colon, "':' after record label")?;
                    let t = self.ty()?;
                    fields.push((label, t));
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    self.expect(Tok::RBrace, "'}'")?;
                    break;
                }
                Ok(Type::Record(fields))
            }
            _ => self.err("expected a type"),
        }
    }

    fn defs(&mut self) -> Result<Vec<Def>, ParseError> {
        let mut defs = Vec::new();
        while self.peek().is_some() {
            self.expect(Tok::Kw("def"), "'def'")?;
            let name = match self.next() {
                Some(Tok::Ident(s)) => s,
                _ => return self.err("expected a definition name"),
            };
            self.expect(Tok::Eq, "'=' after definition name")?;
            let term = self.term()?;
            defs.push(Def { name, term });
        }
        Ok(defs)
    }
}

/// Parse a single term; trailing input is an error.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(t)
}

/// Parse a single type; trailing input is an error.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(t)
}

/// Parse a source file: either a sequence of `def name = term` items or a
/// single bare term (returned as a definition named `main`). References to
/// earlier definitions are resolved by substitution.
pub fn parse_defs(src: &str) -> Result<Vec<Def>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut defs = if p.peek() == Some(&Tok::Kw("def")) {
        p.defs()?
    } else {
        let t = p.term()?;
        if p.peek().is_some() {
            return p.err("unexpected trailing input");
        }
        vec![Def {
            name: "main".to_string(),
            term: t,
        }]
    };
    // link: substitute earlier definitions into later ones
    for i in 0..defs.len() {
        for j in (i + 1)..defs.len() {
            let (head, tail) = defs.split_at_mut(j);
            let d = &head[i];
            if super::free_vars(&tail[0].term).contains(&d.name) {
                tail[0].term = super::subst(&tail[0].term, &d.name, &d.term);
            }
        }
    }
    Ok(defs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::alpha_eq;

    #[test]
    fn parse_ret_literal() {
        assert_eq!(parse_term("ret 5").unwrap(), Term::ret(Term::int(5)));
    }

    #[test]
    fn parse_alloc_get() {
        let t = parse_term("l <- alloc 0; get l").unwrap();
        assert_eq!(
            t,
            Term::bind("l", Term::alloc(Term::int(0)), Term::get(Term::var("l")))
        );
    }

    #[test]
    fn parse_record_labels() {
        let t = parse_term("{incr -> ret (), read -> ret 0}").unwrap();
        match t {
            Term::Record(fields) => {
                assert_eq!(fields[0].0, "incr");
                assert_eq!(fields[1].0, "read");
            }
            _ => panic!(),
        }
    }

    #[test]
    fn duplicate_record_label_rejected() {
        assert!(parse_term("{a -> ret 1, a -> ret 2}").is_err());
    }

    #[test]
    fn unbalanced_delimiters_report_position() {
        let e = parse_term("(ret 5").unwrap_err();
        assert!(e.line >= 1 && e.col >= 1);
    }

    #[test]
    fn negative_literal_vs_subtraction() {
        assert_eq!(
            parse_term("x - 1").unwrap(),
            Term::Sub(Box::new(Term::var("x")), Box::new(Term::int(1)))
        );
        assert_eq!(parse_term("ret -1").unwrap(), Term::ret(Term::int(-1)));
    }

    #[test]
    fn map_neg_desugars() {
        let t = parse_term("map neg (get l)").unwrap();
        let expect = parse_term("x <- get l; ret (neg x)").unwrap();
        assert!(alpha_eq(&t, &expect));
    }

    #[test]
    fn seq_sugar() {
        let t = parse_term("step; ret 1").unwrap();
        assert_eq!(t, Term::seq(Term::Step, Term::ret(Term::int(1))));
    }

    #[test]
    fn defs_link_in_order() {
        let defs = parse_defs("def one = ret 1\ndef two = x <- one; ret (x + 1)").unwrap();
        assert_eq!(defs.len(), 2);
        let expect = parse_term("x <- ret 1; ret (x + 1)").unwrap();
        assert!(alpha_eq(&defs[1].term, &expect));
    }

    #[test]
    fn cell_type_expands() {
        assert_eq!(parse_type("Cell Int").unwrap(), Type::cell(Type::Int));
    }
}
