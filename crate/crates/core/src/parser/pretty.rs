//! Printing of terms, patterns and declarations in concrete syntax with
//! minimal parenthesization.

use std::fmt::Write;

use crate::syntax::{Annot, DeclKind, Declaration, Expr, Pattern, Polarity, SizeExpr};

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Top,
    App,
    Atom,
}

pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e, Prec::Top);
    out
}

pub fn pretty_size(s: &SizeExpr) -> String {
    let mut out = String::new();
    size(&mut out, s, Prec::Top);
    out
}

pub fn pretty_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    pattern(&mut out, p);
    out
}

fn paren(out: &mut String, needed: bool, k: impl FnOnce(&mut String)) {
    if needed {
        out.push('(');
    }
    k(out);
    if needed {
        out.push(')');
    }
}

fn size(out: &mut String, s: &SizeExpr, prec: Prec) {
    match s {
        SizeExpr::Var(x) => out.push_str(&x.text),
        SizeExpr::Infty => out.push('#'),
        SizeExpr::Meta(_) => out.push('_'),
        SizeExpr::Succ(inner) => paren(out, prec > Prec::App, |out| {
            out.push_str("$ ");
            size(out, inner, Prec::Atom);
        }),
        SizeExpr::Max(a, b) => paren(out, prec > Prec::App, |out| {
            out.push_str("max ");
            size(out, a, Prec::Atom);
            out.push(' ');
            size(out, b, Prec::Atom);
        }),
    }
}

fn expr(out: &mut String, e: &Expr, prec: Prec) {
    match e {
        Expr::Var(x) | Expr::Def(x) | Expr::Con(x) => out.push_str(&x.text),
        Expr::Set => out.push_str("Set"),
        Expr::SizeU => out.push_str("Size"),
        Expr::Erased => out.push('_'),
        Expr::Elided => out.push('…'),
        Expr::Size(s) => size(out, s, prec),
        Expr::Pi(annot, x, dom, cod) => paren(out, prec > Prec::Top, |out| {
            match annot {
                Annot::Parametric => {
                    let _ = write!(out, "[{} : ", x.text);
                    expr(out, dom, Prec::Top);
                    out.push(']');
                }
                Annot::Relevant if x.is_anonymous() || !cod.mentions(x) => {
                    expr(out, dom, Prec::App);
                }
                Annot::Relevant => {
                    let _ = write!(out, "({} : ", x.text);
                    expr(out, dom, Prec::Top);
                    out.push(')');
                }
            }
            out.push_str(" -> ");
            expr(out, cod, Prec::Top);
        }),
        Expr::Lam(x, body) => paren(out, prec > Prec::Top, |out| {
            let _ = write!(out, "\\ {} -> ", x.text);
            expr(out, body, Prec::Top);
        }),
        Expr::App(..) => paren(out, prec > Prec::App, |out| {
            let (head, args) = e.spine();
            expr(out, head, Prec::Atom);
            for (a, _) in args {
                out.push(' ');
                expr(out, a, Prec::Atom);
            }
        }),
        Expr::CaseSize(s, j, body) => paren(out, prec > Prec::Top, |out| {
            out.push_str("case ");
            size(out, s, Prec::App);
            let _ = write!(out, " {{ ($ {}) -> ", j.text);
            expr(out, body, Prec::Top);
            out.push_str(" }");
        }),
        Expr::CaseData(scrut, branches) => paren(out, prec > Prec::Top, |out| {
            out.push_str("case ");
            expr(out, scrut, Prec::App);
            out.push_str(" {");
            for (k, (p, body)) in branches.iter().enumerate() {
                out.push_str(if k == 0 { " " } else { " ; " });
                pattern(out, p);
                out.push_str(" -> ");
                expr(out, body, Prec::Top);
            }
            out.push_str(" }");
        }),
    }
}

fn pattern(out: &mut String, p: &Pattern) {
    match p {
        Pattern::Var(x) => out.push_str(&x.text),
        Pattern::Wild => out.push('_'),
        Pattern::Dot(e) => {
            out.push('.');
            expr(out, e, Prec::Atom);
        }
        Pattern::SizeRel(parent, child) => {
            let _ = write!(out, "({} > {})", parent.text, child.text);
        }
        Pattern::Succ(child) => {
            let _ = write!(out, "($ {})", child.text);
        }
        Pattern::Con(c, ps) if ps.is_empty() => out.push_str(&c.text),
        Pattern::Con(c, ps) => {
            out.push('(');
            out.push_str(&c.text);
            for p in ps {
                out.push(' ');
                pattern(out, p);
            }
            out.push(')');
        }
    }
}

pub fn pretty_decl(d: &Declaration) -> String {
    let mut out = String::new();
    match &d.kind {
        DeclKind::Data(data) => {
            if data.sized {
                out.push_str("sized ");
            }
            out.push_str(if data.coinductive { "codata " } else { "data " });
            out.push_str(&data.name.text);
            for p in &data.params {
                out.push(' ');
                if p.polarity == Polarity::StrictPos {
                    out.push_str("++");
                }
                let _ = write!(out, "({} : {})", p.name.text, pretty(&p.ty));
            }
            let _ = write!(out, " : {}\n{{", pretty(&data.index_ty));
            for (k, (c, ty, _)) in data.constructors.iter().enumerate() {
                out.push_str(if k == 0 { " " } else { "; " });
                let _ = writeln!(out, "{} : {}", c.text, pretty(ty));
            }
            if data.constructors.is_empty() {
                out.push('\n');
            }
            out.push('}');
        }
        DeclKind::Fun(f) => {
            out.push_str(if f.coinductive { "cofun " } else { "fun " });
            let _ = write!(out, "{} : {}\n{{", f.name.text, pretty(&f.ty));
            for (k, cl) in f.clauses.iter().enumerate() {
                out.push_str(if k == 0 { " " } else { "; " });
                out.push_str(&f.name.text);
                for p in &cl.lhs {
                    out.push(' ');
                    pattern(&mut out, p);
                }
                let _ = writeln!(out, " = {}", pretty(&cl.rhs));
            }
            if f.clauses.is_empty() {
                out.push('\n');
            }
            out.push('}');
        }
        DeclKind::Let(l) => {
            if l.eval {
                out.push_str("eval ");
            }
            let _ = write!(
                out,
                "let {} : {} = {}",
                l.name.text,
                pretty(&l.ty),
                pretty(&l.body)
            );
        }
    }
    out
}

pub fn pretty_program(decls: &[Declaration]) -> String {
    let mut out = String::new();
    for d in decls {
        out.push_str(&pretty_decl(d));
        out.push_str("\n\n");
    }
    out
}
