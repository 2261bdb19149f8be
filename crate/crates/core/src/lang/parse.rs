//! Recursive-descent parser for `.fmr` source.
//!
//! ```text
//! term   ::= 'fun' x ':' ty '.' term
//!          | 'tfun' a '.' term
//!          | 'bind' x '<-' expr ';' term
//!          | 'let' x ':' ty '=' term 'in' term
//!          | 'unpack' expr 'as' '[' a ',' x ']' 'in' term
//!          | 'ifz' term 'then' term 'else' term
//!          | 'pack' '[' ty ',' term ']' 'as' ty
//!          | expr (';' term)?
//! expr   ::= mul (('+' | '-') mul)*
//! mul    ::= unary ('*' unary)*
//! unary  ::= '-' INT | '-' unary | app
//! app    ::= head (atom | '[' ty ']')*
//! head   ::= 'ret' atom | 'fst' atom | 'snd' atom | 'unfold' atom
//!          | 'fold' '[' ty ']' atom | 'get' '[' ty ']' atom
//!          | 'new' '[' ty ']' atom | 'set' '[' ty ']' atom atom | atom
//! atom   ::= x | INT | 'step' | '(' ')' | '(' term (',' term)* ')'
//!
//! ty     ::= ('forall' | 'exists' | 'mu') a '.' ty | prod ('->' ty)?
//! prod   ::= tapp ('*' prod)?
//! tapp   ::= 'Ref' tapp | 'T' tapp | 'Unit' | 'Int' | a | '(' ty ')'
//! ```
//!
//! `e1; e2` abbreviates `bind _ <- e1; e2`, `(a, b, c)` abbreviates
//! `(a, (b, c))` and `let x : τ = e1 in e2` abbreviates `(fun x : τ. e2) e1`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::ast::{name, BinOp, Name, Span, Tm, TmKind, Ty, WILDCARD};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::Kw(k) | Tok::Sym(k) => write!(f, "`{k}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "fun", "tfun", "forall", "exists", "mu", "Ref", "T", "Unit", "Int", "ret", "bind", "get",
    "set", "new", "step", "pack", "as", "unpack", "in", "fold", "unfold", "fst", "snd", "ifz",
    "then", "else", "let",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

// Longest first.
const SYMBOLS: &[&str] = &[
    "<-", "->", "(", ")", "[", "]", ",", ".", ":", ";", "+", "-", "*", "=",
];

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    // End of the last real token; end of input is reported there.
    let mut last = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for &b in &bytes[*i..*i + n] {
            if b == b'\n' {
                *line += 1;
                *col = 1;
            } else if b & 0xC0 != 0x80 {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if src[i..].starts_with("--") {
            let n = src[i..].find('\n').unwrap_or(src.len() - i);
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        let (start, sl, sc) = (i, line, col);
        let tok = if c.is_ascii_digit() {
            let n = src[i..]
                .find(|ch: char| !ch.is_ascii_digit())
                .unwrap_or(src.len() - i);
            let text = &src[i..i + n];
            let v = text.parse::<u64>().map_err(|_| ParseError {
                line,
                col,
                expected: vec!["integer literal within 64 bits".into()],
                found: format!("`{text}`"),
            })?;
            advance(&mut i, &mut line, &mut col, n);
            Tok::Int(v)
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let n = src[i..]
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_' || ch == '\''))
                .unwrap_or(src.len() - i);
            let text = &src[i..i + n];
            advance(&mut i, &mut line, &mut col, n);
            match KEYWORDS.iter().find(|k| **k == text) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(text.to_string()),
            }
        } else if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            advance(&mut i, &mut line, &mut col, sym.len());
            Tok::Sym(sym)
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                line,
                col,
                expected: vec!["a token".into()],
                found: format!("character `{ch}`"),
            });
        };
        out.push(Token {
            tok,
            span: Span {
                start,
                end: i,
                line: sl,
                col: sc,
            },
        });
        last = (i, line, col);
    }
    let (end, line, col) = last;
    out.push(Token {
        tok: Tok::Eof,
        span: Span {
            start: end,
            end,
            line,
            col,
        },
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

/// Parse one complete term.
pub fn parse(src: &str) -> Result<Tm, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parse one complete type.
pub fn parse_ty(src: &str) -> Result<Ty, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let sp = self.span();
        Err(ParseError {
            line: sp.line,
            col: sp.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == s)
    }

    fn sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(&[&format!("`{s}`")])
        }
    }

    fn kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.error(&[&format!("`{s}`")])
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek() {
            Tok::Ident(s) if s != WILDCARD => {
                let n = name(s);
                self.bump();
                Ok(n)
            }
            _ => self.error(&["identifier"]),
        }
    }

    /// Identifier or `_`.
    fn binder(&mut self) -> PResult<Name> {
        match self.peek() {
            Tok::Ident(s) => {
                let n = name(s);
                self.bump();
                Ok(n)
            }
            _ => self.error(&["identifier", "`_`"]),
        }
    }

    fn finish(&self, start: Span, kind: TmKind) -> Tm {
        Tm::spanned(
            kind,
            Span {
                end: self.prev_end(),
                ..start
            },
        )
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<Ty> {
        for (kw, ctor) in [
            ("forall", Ty::Forall as fn(Name, Box<Ty>) -> Ty),
            ("exists", Ty::Exists),
            ("mu", Ty::Mu),
        ] {
            if self.is_kw(kw) {
                self.bump();
                let a = self.ident()?;
                self.sym(".")?;
                let body = self.ty()?;
                return Ok(ctor(a, Box::new(body)));
            }
        }
        let lhs = self.ty_prod()?;
        if self.is_sym("->") {
            self.bump();
            let rhs = self.ty()?;
            return Ok(Ty::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ty_prod(&mut self) -> PResult<Ty> {
        let lhs = self.ty_app()?;
        if self.is_sym("*") {
            self.bump();
            let rhs = self.ty_prod()?;
            return Ok(Ty::prod(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ty_app(&mut self) -> PResult<Ty> {
        match self.peek().clone() {
            Tok::Kw("Ref") => {
                self.bump();
                Ok(Ty::reference(self.ty_app()?))
            }
            Tok::Kw("T") => {
                self.bump();
                Ok(Ty::comp(self.ty_app()?))
            }
            Tok::Kw("Unit") => {
                self.bump();
                Ok(Ty::Unit)
            }
            Tok::Kw("Int") => {
                self.bump();
                Ok(Ty::Int)
            }
            Tok::Ident(_) => Ok(Ty::Var(self.ident()?)),
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.sym(")")?;
                Ok(t)
            }
            _ => self.error(&["type"]),
        }
    }

    fn bracket_ty(&mut self) -> PResult<Ty> {
        self.sym("[")?;
        let t = self.ty()?;
        self.sym("]")?;
        Ok(t)
    }

    // ---- terms ----

    fn term(&mut self) -> PResult<Tm> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Kw("fun") => {
                self.bump();
                let x = self.binder()?;
                self.sym(":")?;
                let ty = self.ty()?;
                self.sym(".")?;
                let body = self.term()?;
                Ok(self.finish(start, TmKind::Lam(x, ty, Arc::new(body))))
            }
            Tok::Kw("tfun") => {
                self.bump();
                let a = self.ident()?;
                self.sym(".")?;
                let body = self.term()?;
                Ok(self.finish(start, TmKind::TLam(a, Arc::new(body))))
            }
            Tok::Kw("bind") => {
                self.bump();
                let x = self.binder()?;
                self.sym("<-")?;
                let e1 = self.expr()?;
                self.sym(";")?;
                let e2 = self.term()?;
                Ok(self.finish(start, TmKind::Bind(x, Arc::new(e1), Arc::new(e2))))
            }
            Tok::Kw("let") => {
                self.bump();
                let x = self.binder()?;
                self.sym(":")?;
                let ty = self.ty()?;
                self.sym("=")?;
                let e1 = self.term()?;
                self.kw("in")?;
                let e2 = self.term()?;
                let lam = self.finish(start, TmKind::Lam(x, ty, Arc::new(e2)));
                Ok(self.finish(start, TmKind::App(Arc::new(lam), Arc::new(e1))))
            }
            Tok::Kw("unpack") => {
                self.bump();
                let package = self.expr()?;
                self.kw("as")?;
                self.sym("[")?;
                let ty_var = self.ident()?;
                self.sym(",")?;
                let var = self.binder()?;
                self.sym("]")?;
                self.kw("in")?;
                let body = self.term()?;
                Ok(self.finish(
                    start,
                    TmKind::Unpack {
                        package: Arc::new(package),
                        ty_var,
                        var,
                        body: Arc::new(body),
                    },
                ))
            }
            Tok::Kw("ifz") => {
                self.bump();
                let c = self.term()?;
                self.kw("then")?;
                let a = self.term()?;
                self.kw("else")?;
                let b = self.term()?;
                Ok(self.finish(start, TmKind::Ifz(Arc::new(c), Arc::new(a), Arc::new(b))))
            }
            Tok::Kw("pack") => {
                self.bump();
                self.sym("[")?;
                let witness = self.ty()?;
                self.sym(",")?;
                let body = self.term()?;
                self.sym("]")?;
                self.kw("as")?;
                let as_ty = self.ty()?;
                Ok(self.finish(
                    start,
                    TmKind::Pack {
                        witness,
                        body: Arc::new(body),
                        as_ty,
                    },
                ))
            }
            _ => {
                let e1 = self.expr()?;
                if self.is_sym(";") {
                    self.bump();
                    let e2 = self.term()?;
                    return Ok(self.finish(
                        start,
                        TmKind::Bind(name(WILDCARD), Arc::new(e1), Arc::new(e2)),
                    ));
                }
                Ok(e1)
            }
        }
    }

    fn expr(&mut self) -> PResult<Tm> {
        let start = self.span();
        let mut lhs = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul()?;
            lhs = self.finish(start, TmKind::Bin(op, Arc::new(lhs), Arc::new(rhs)));
        }
    }

    fn mul(&mut self) -> PResult<Tm> {
        let start = self.span();
        let mut lhs = self.unary()?;
        while self.is_sym("*") {
            self.bump();
            let rhs = self.unary()?;
            lhs = self.finish(start, TmKind::Bin(BinOp::Mul, Arc::new(lhs), Arc::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Tm> {
        let start = self.span();
        if self.is_sym("-") {
            self.bump();
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                let v = -(n as i128);
                let v = i64::try_from(v).map_err(|_| ParseError {
                    line: start.line,
                    col: start.col,
                    expected: vec!["integer literal within 64 bits".into()],
                    found: format!("`-{n}`"),
                })?;
                return Ok(self.finish(start, TmKind::Int(v)));
            }
            let e = self.unary()?;
            return Ok(self.finish(start, TmKind::Neg(Arc::new(e))));
        }
        self.app()
    }

    fn app(&mut self) -> PResult<Tm> {
        let start = self.span();
        let mut f = self.head()?;
        loop {
            if self.is_sym("[") {
                let ty = self.bracket_ty()?;
                f = self.finish(start, TmKind::TApp(Arc::new(f), ty));
            } else if self.starts_atom() {
                let a = self.atom()?;
                f = self.finish(start, TmKind::App(Arc::new(f), Arc::new(a)));
            } else {
                return Ok(f);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Int(_) | Tok::Kw("step") | Tok::Sym("(")
        )
    }

    fn head(&mut self) -> PResult<Tm> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Kw("ret") => {
                self.bump();
                TmKind::Ret(Arc::new(self.atom()?))
            }
            Tok::Kw("fst") => {
                self.bump();
                TmKind::Fst(Arc::new(self.atom()?))
            }
            Tok::Kw("snd") => {
                self.bump();
                TmKind::Snd(Arc::new(self.atom()?))
            }
            Tok::Kw("unfold") => {
                self.bump();
                TmKind::Unfold(Arc::new(self.atom()?))
            }
            Tok::Kw("fold") => {
                self.bump();
                let ty = self.bracket_ty()?;
                TmKind::Fold(ty, Arc::new(self.atom()?))
            }
            Tok::Kw("get") => {
                self.bump();
                let ty = self.bracket_ty()?;
                TmKind::Get(ty, Arc::new(self.atom()?))
            }
            Tok::Kw("new") => {
                self.bump();
                let ty = self.bracket_ty()?;
                TmKind::New(ty, Arc::new(self.atom()?))
            }
            Tok::Kw("set") => {
                self.bump();
                let ty = self.bracket_ty()?;
                let l = self.atom()?;
                let u = self.atom()?;
                TmKind::Set(ty, Arc::new(l), Arc::new(u))
            }
            _ => return self.atom(),
        };
        Ok(self.finish(start, kind))
    }

    fn atom(&mut self) -> PResult<Tm> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(s) if s == WILDCARD => self.error(&["a referable variable"]),
            Tok::Ident(_) => {
                let x = self.ident()?;
                Ok(self.finish(start, TmKind::Var(x)))
            }
            Tok::Int(n) => {
                self.bump();
                let v = i64::try_from(n).map_err(|_| ParseError {
                    line: start.line,
                    col: start.col,
                    expected: vec!["integer literal within 64 bits".into()],
                    found: format!("`{n}`"),
                })?;
                Ok(self.finish(start, TmKind::Int(v)))
            }
            Tok::Kw("step") => {
                self.bump();
                Ok(self.finish(start, TmKind::Step))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.is_sym(")") {
                    self.bump();
                    return Ok(self.finish(start, TmKind::Unit));
                }
                let first = self.term()?;
                let mut rest = Vec::new();
                while self.is_sym(",") {
                    self.bump();
                    rest.push((self.span(), self.term()?));
                }
                self.sym(")")?;
                if rest.is_empty() {
                    return Ok(first);
                }
                // right-nested: (a, b, c) = (a, (b, c))
                let (_, mut acc) = rest.pop().expect("non-empty");
                while let Some((sp, t)) = rest.pop() {
                    acc = self.finish(sp, TmKind::Pair(Arc::new(t), Arc::new(acc)));
                }
                Ok(self.finish(start, TmKind::Pair(Arc::new(first), Arc::new(acc))))
            }
            _ => self.error(&["term"]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::ast::tm_alpha_eq;

    #[test]
    fn ret_unit() {
        assert!(tm_alpha_eq(&parse("ret ()").unwrap(), &Tm::ret(Tm::unit())));
    }

    #[test]
    fn bind_new() {
        let t = parse("bind r <- new[Int] 0; ret r").unwrap();
        let want = Tm::bind("r", Tm::new_ref(Ty::Int, Tm::int(0)), Tm::ret(Tm::var("r")));
        assert!(tm_alpha_eq(&t, &want));
    }

    #[test]
    fn dangling_operator() {
        let err = parse("fun x : Int . x +").unwrap_err();
        assert_eq!((err.line, err.col), (1, 18));
        assert_eq!(err.found, "end of input");
        assert_eq!(err.expected, vec!["term".to_string()]);
    }

    #[test]
    fn precedence_and_associativity() {
        let t = parse("1 + 2 * 3 - 4").unwrap();
        let want = Tm::bin(
            BinOp::Sub,
            Tm::bin(
                BinOp::Add,
                Tm::int(1),
                Tm::bin(BinOp::Mul, Tm::int(2), Tm::int(3)),
            ),
            Tm::int(4),
        );
        assert!(tm_alpha_eq(&t, &want));
        let app = parse("f x y").unwrap();
        let want = Tm::app(Tm::app(Tm::var("f"), Tm::var("x")), Tm::var("y"));
        assert!(tm_alpha_eq(&app, &want));
    }

    #[test]
    fn type_precedence() {
        let t = parse_ty("Int * Unit -> T Int -> Ref Int").unwrap();
        let want = Ty::arrow(
            Ty::prod(Ty::Int, Ty::Unit),
            Ty::arrow(Ty::comp(Ty::Int), Ty::reference(Ty::Int)),
        );
        assert_eq!(t, want);
        assert_eq!(
            parse_ty("forall a. a -> T a").unwrap(),
            Ty::forall("a", Ty::arrow(Ty::var("a"), Ty::comp(Ty::var("a"))))
        );
    }

    #[test]
    fn negative_literals_fold() {
        assert_eq!(parse("-3").unwrap().kind, TmKind::Int(-3));
        assert!(matches!(parse("-(3)").unwrap().kind, TmKind::Neg(_)));
        assert_eq!(
            parse("-9223372036854775808").unwrap().kind,
            TmKind::Int(i64::MIN)
        );
        assert!(parse("9223372036854775808").is_err());
    }

    #[test]
    fn sequencing_sugar() {
        let t = parse("step; ret 3").unwrap();
        let want = Tm::seq(Tm::step(), Tm::ret(Tm::int(3)));
        assert!(tm_alpha_eq(&t, &want));
    }

    #[test]
    fn comments_and_tuples() {
        let t = parse("-- a comment\n(1, 2, 3) -- trailing").unwrap();
        let TmKind::Pair(_, rest) = &t.kind else {
            panic!("pair expected")
        };
        assert!(matches!(rest.kind, TmKind::Pair(..)));
    }

    #[test]
    fn wildcard_is_not_a_variable() {
        assert!(parse("fun _ : Int . _").is_err());
        assert!(parse("fun _ : Int . ()").is_ok());
    }

    #[test]
    fn spans_point_at_source() {
        let t = parse("  ret\n  x").unwrap();
        assert_eq!((t.span.line, t.span.col), (1, 3));
        let TmKind::Ret(inner) = &t.kind else {
            panic!()
        };
        assert_eq!((inner.span.line, inner.span.col), (2, 3));
    }
}
