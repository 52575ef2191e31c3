//! Concrete syntax: tokenizer, recursive-descent parser and the concrete tree
//! handed to the scope checker.

mod lexer;
pub mod pretty;

use std::fmt;

pub use lexer::{tokenize, Token, TokenKind, KEYWORDS};

use crate::syntax::{Annot, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub line: u32,
    pub column: u32,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
pub enum CExpr {
    Ident(String, Pos),
    Set,
    SizeU,
    Infty,
    Meta,
    Succ(Box<CExpr>),
    Max(Box<CExpr>, Box<CExpr>),
    Pi(Annot, Option<String>, Box<CExpr>, Box<CExpr>),
    Lam(Vec<String>, Box<CExpr>),
    App(Box<CExpr>, Box<CExpr>),
    Case(Box<CExpr>, Vec<(CPattern, CExpr)>, Pos),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CPattern {
    /// A variable or a nullary constructor; the scope checker decides.
    Ident(String, Pos),
    Con(String, Vec<CPattern>, Pos),
    Dot(CExpr),
    SizeRel(String, String, Pos),
    Succ(String, Pos),
    Wild,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CParam {
    pub strictly_positive: bool,
    pub name: String,
    pub ty: CExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CClause {
    pub head: String,
    pub patterns: Vec<CPattern>,
    pub rhs: CExpr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CDecl {
    Data {
        sized: bool,
        coinductive: bool,
        name: String,
        params: Vec<CParam>,
        ty: CExpr,
        constructors: Vec<(String, CExpr, Pos)>,
        pos: Pos,
    },
    Fun {
        coinductive: bool,
        name: String,
        ty: CExpr,
        clauses: Vec<CClause>,
        pos: Pos,
    },
    Let {
        eval: bool,
        name: String,
        ty: CExpr,
        body: CExpr,
        pos: Pos,
    },
}

/// Parse a whole source file.
pub fn parse_source(source: &str) -> Result<Vec<CDecl>, ParseError> {
    let tokens = tokenize(source)?;
    parse_program(&tokens)
}

pub fn parse_program(tokens: &[Token]) -> Result<Vec<CDecl>, ParseError> {
    let mut p = Parser { toks: tokens, at: 0 };
    let mut decls = Vec::new();
    while p.peek().kind != TokenKind::Eof {
        decls.push(p.decl()?);
    }
    Ok(decls)
}

/// Parse a single expression (used by tests and the pretty-printer round trip).
pub fn parse_expr(source: &str) -> Result<CExpr, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { toks: &tokens, at: 0 };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser<'t> {
    toks: &'t [Token],
    at: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.toks[self.at.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, k: usize) -> &'t Token {
        &self.toks[(self.at + k).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> &'t Token {
        let t = self.peek();
        if t.kind != TokenKind::Eof {
            self.at += 1;
        }
        t
    }

    fn pos(&self) -> Pos {
        let t = self.peek();
        Pos {
            line: t.line,
            col: t.column,
        }
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError {
            message: format!("unexpected {}", t.describe()),
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn error_msg<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError {
            message: message.into(),
            line: t.line,
            column: t.column,
            expected: Vec::new(),
        })
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.peek().is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&[&format!("`{}`", s)])
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.peek().is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.error(&[&format!("`{}`", s)])
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        if self.peek().kind == TokenKind::Ident {
            Ok(self.bump().text.clone())
        } else {
            self.error(&["identifier"])
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek().kind == TokenKind::Eof {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    fn decl(&mut self) -> Result<CDecl, ParseError> {
        let pos = self.pos();
        let t = self.peek();
        if t.is_kw("sized") || t.is_kw("data") || t.is_kw("codata") {
            let sized = self.eat_kw("sized");
            let coinductive = if self.eat_kw("data") {
                false
            } else if self.eat_kw("codata") {
                true
            } else {
                return self.error(&["`data`", "`codata`"]);
            };
            let name = self.ident()?;
            let mut params = Vec::new();
            loop {
                let strictly_positive = self.eat_sym("++");
                if !self.peek().is_sym("(") {
                    if strictly_positive {
                        return self.error(&["`(`"]);
                    }
                    break;
                }
                self.bump();
                let pname = self.ident()?;
                self.expect_sym(":")?;
                let ty = self.expr()?;
                self.expect_sym(")")?;
                params.push(CParam {
                    strictly_positive,
                    name: pname,
                    ty,
                });
            }
            self.expect_sym(":")?;
            let ty = self.expr()?;
            self.expect_sym("{")?;
            let mut constructors = Vec::new();
            if !self.peek().is_sym("}") {
                loop {
                    let cpos = self.pos();
                    let cname = self.ident()?;
                    self.expect_sym(":")?;
                    let cty = self.expr()?;
                    constructors.push((cname, cty, cpos));
                    if !self.eat_sym(";") {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
            return Ok(CDecl::Data {
                sized,
                coinductive,
                name,
                params,
                ty,
                constructors,
                pos,
            });
        }
        if t.is_kw("fun") || t.is_kw("cofun") {
            let coinductive = self.bump().text == "cofun";
            let name = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.expr()?;
            self.expect_sym("{")?;
            let mut clauses = Vec::new();
            if !self.peek().is_sym("}") {
                loop {
                    clauses.push(self.clause()?);
                    if !self.eat_sym(";") {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
            return Ok(CDecl::Fun {
                coinductive,
                name,
                ty,
                clauses,
                pos,
            });
        }
        if t.is_kw("eval") || t.is_kw("let") {
            let eval = self.eat_kw("eval");
            self.expect_kw("let")?;
            let name = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.expr()?;
            self.expect_sym("=")?;
            let body = self.expr()?;
            return Ok(CDecl::Let {
                eval,
                name,
                ty,
                body,
                pos,
            });
        }
        self.error(&["declaration"])
    }

    fn clause(&mut self) -> Result<CClause, ParseError> {
        let pos = self.pos();
        let head = self.ident()?;
        let mut patterns = Vec::new();
        while !self.peek().is_sym("=") {
            patterns.push(self.pattern_atom()?);
        }
        self.expect_sym("=")?;
        let rhs = self.expr()?;
        Ok(CClause {
            head,
            patterns,
            rhs,
            pos,
        })
    }

    fn pattern_atom(&mut self) -> Result<CPattern, ParseError> {
        let pos = self.pos();
        if self.eat_sym("_") {
            return Ok(CPattern::Wild);
        }
        if self.eat_sym(".") {
            return Ok(CPattern::Dot(self.atom()?));
        }
        if self.peek().kind == TokenKind::Ident {
            return Ok(CPattern::Ident(self.bump().text.clone(), pos));
        }
        if self.eat_sym("(") {
            let inner = self.pattern_inner(pos)?;
            self.expect_sym(")")?;
            return Ok(inner);
        }
        self.error(&["pattern"])
    }

    fn pattern_inner(&mut self, pos: Pos) -> Result<CPattern, ParseError> {
        if self.eat_sym("$") {
            if self.peek().is_sym("$") {
                return self.error_msg("successor pattern admits exactly one `$`");
            }
            let child = self.ident()?;
            return Ok(CPattern::Succ(child, pos));
        }
        if self.peek().kind == TokenKind::Ident && self.peek_at(1).is_sym(">") {
            let parent = self.ident()?;
            self.bump();
            let child = self.ident()?;
            return Ok(CPattern::SizeRel(parent, child, pos));
        }
        if self.peek().kind == TokenKind::Ident {
            let head = self.ident()?;
            let mut args = Vec::new();
            while !self.peek().is_sym(")") {
                args.push(self.pattern_atom()?);
            }
            return Ok(if args.is_empty() {
                CPattern::Ident(head, pos)
            } else {
                CPattern::Con(head, args, pos)
            });
        }
        let p = self.pattern_atom()?;
        Ok(p)
    }

    /// `expr := \ x.. -> expr | (x : A) -> expr | [x : A] -> expr | case .. | app [-> expr]`
    fn expr(&mut self) -> Result<CExpr, ParseError> {
        if self.eat_sym("\\") {
            let mut names = vec![self.ident()?];
            while self.peek().kind == TokenKind::Ident {
                names.push(self.ident()?);
            }
            self.expect_sym("->")?;
            let body = self.expr()?;
            return Ok(CExpr::Lam(names, Box::new(body)));
        }
        if self.peek().is_sym("(")
            && self.peek_at(1).kind == TokenKind::Ident
            && self.peek_at(2).is_sym(":")
        {
            return self.binder_pi(")", Annot::Relevant);
        }
        if self.peek().is_sym("[") {
            return self.binder_pi("]", Annot::Parametric);
        }
        if self.peek().is_kw("case") {
            return self.case_expr();
        }
        let lhs = self.app()?;
        if self.eat_sym("->") {
            let rhs = self.expr()?;
            return Ok(CExpr::Pi(Annot::Relevant, None, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn binder_pi(&mut self, close: &str, annot: Annot) -> Result<CExpr, ParseError> {
        self.bump();
        let name = self.ident()?;
        self.expect_sym(":")?;
        let dom = self.expr()?;
        self.expect_sym(close)?;
        self.expect_sym("->")?;
        let cod = self.expr()?;
        Ok(CExpr::Pi(annot, Some(name), Box::new(dom), Box::new(cod)))
    }

    fn case_expr(&mut self) -> Result<CExpr, ParseError> {
        let pos = self.pos();
        self.expect_kw("case")?;
        let scrut = self.app()?;
        self.expect_sym("{")?;
        let mut branches = Vec::new();
        if !self.peek().is_sym("}") {
            loop {
                let p = self.pattern_atom()?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                branches.push((p, body));
                if !self.eat_sym(";") {
                    break;
                }
            }
        }
        self.expect_sym("}")?;
        Ok(CExpr::Case(Box::new(scrut), branches, pos))
    }

    fn starts_atom(&self) -> bool {
        let t = self.peek();
        match t.kind {
            TokenKind::Ident => true,
            TokenKind::Keyword => t.text == "Set" || t.text == "Size",
            TokenKind::Symbol => matches!(t.text.as_str(), "(" | "#" | "_"),
            TokenKind::Eof => false,
        }
    }

    fn app(&mut self) -> Result<CExpr, ParseError> {
        let mut head = if self.eat_sym("$") {
            CExpr::Succ(Box::new(self.succ_operand()?))
        } else if self.eat_kw("max") {
            let a = self.atom()?;
            let b = self.atom()?;
            CExpr::Max(Box::new(a), Box::new(b))
        } else {
            self.atom()?
        };
        while self.starts_atom() {
            let arg = self.atom()?;
            head = CExpr::App(Box::new(head), Box::new(arg));
        }
        Ok(head)
    }

    fn succ_operand(&mut self) -> Result<CExpr, ParseError> {
        if self.eat_sym("$") {
            Ok(CExpr::Succ(Box::new(self.succ_operand()?)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<CExpr, ParseError> {
        let pos = self.pos();
        let t = self.peek();
        match t.kind {
            TokenKind::Ident => {
                self.bump();
                Ok(CExpr::Ident(t.text.clone(), pos))
            }
            TokenKind::Keyword if t.text == "Set" => {
                self.bump();
                Ok(CExpr::Set)
            }
            TokenKind::Keyword if t.text == "Size" => {
                self.bump();
                Ok(CExpr::SizeU)
            }
            TokenKind::Symbol if t.text == "#" => {
                self.bump();
                Ok(CExpr::Infty)
            }
            TokenKind::Symbol if t.text == "_" => {
                self.bump();
                Ok(CExpr::Meta)
            }
            TokenKind::Symbol if t.text == "(" => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.error(&["expression"]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINUS: &str = "
fun minus : [i : Size] -> SNat i -> SNat # -> SNat i
{ minus i (zero (i > j))    y          = zero j
; minus i  x               (zero .#)   = x
; minus i (succ (i > j) x) (succ .# y) = minus j x y
}";

    #[test]
    fn parses_minus_clauses() {
        let decls = parse_source(MINUS).unwrap();
        assert_eq!(decls.len(), 1);
        let CDecl::Fun { clauses, .. } = &decls[0] else {
            panic!()
        };
        assert_eq!(clauses.len(), 3);
        let mid = &clauses[1].patterns;
        assert_eq!(mid.len(), 3);
        assert!(matches!(&mid[0], CPattern::Ident(x, _) if x == "i"));
        assert!(matches!(&mid[1], CPattern::Ident(x, _) if x == "x"));
        match &mid[2] {
            CPattern::Con(c, args, _) => {
                assert_eq!(c, "zero");
                assert_eq!(args, &vec![CPattern::Dot(CExpr::Infty)]);
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn plain_let() {
        let decls = parse_source("let x : Set = Set").unwrap();
        assert!(matches!(&decls[0], CDecl::Let { eval: false, body: CExpr::Set, .. }));
    }

    #[test]
    fn pre_with_case() {
        let src = "let pre : [i : Size] -> (Nat -> O ($$ i)) -> Nat -> O ($ i)
  = \\ i -> \\ f -> \\ n -> case (f (succ n))
    { (Z .($ i))   -> Z i
    ; (S .($ i) x) -> x
    ; (L .($ i) g) -> g n
    ; (M .($ i) a b) -> a
    }";
        let decls = parse_source(src).unwrap();
        let CDecl::Let { body, .. } = &decls[0] else {
            panic!()
        };
        let mut e = body;
        let mut lams = 0;
        while let CExpr::Lam(_, b) = e {
            lams += 1;
            e = b;
        }
        assert_eq!(lams, 3);
        assert!(matches!(e, CExpr::Case(_, bs, _) if bs.len() == 4));
    }

    #[test]
    fn double_dollar_is_nested_successor() {
        let e = parse_expr("SNat ($$ i)").unwrap();
        let CExpr::App(_, arg) = e else { panic!() };
        assert!(matches!(*arg, CExpr::Succ(ref inner) if matches!(**inner, CExpr::Succ(_))));
    }

    #[test]
    fn multi_successor_pattern_is_rejected() {
        let src = "cofun bad : [i : Size] -> Stream Nat i { bad ($$ i) = bad i }";
        let err = parse_source(src).unwrap_err();
        assert!(err.message.contains("exactly one"));
        assert_eq!(err.line, 1);
    }

    #[test]
    fn arrows_associate_to_the_right() {
        let e = parse_expr("A -> B -> C").unwrap();
        let CExpr::Pi(_, None, _, cod) = e else { panic!() };
        assert!(matches!(*cod, CExpr::Pi(..)));
    }

    #[test]
    fn error_positions_are_in_bounds() {
        let src = "fun f : Set\n{ f = }";
        let err = parse_source(src).unwrap_err();
        assert_eq!((err.line, err.column), (2, 7));
        assert!(!err.expected.is_empty());
    }
}
