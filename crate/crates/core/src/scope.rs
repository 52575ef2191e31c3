//! Name resolution from the concrete tree to uid-bearing abstract syntax.

use std::collections::HashMap;
use std::sync::Arc;

use crate::diagnostic::{Code, Diagnostic};
use crate::parser::{CDecl, CExpr, CPattern};
use crate::syntax::{
    Clause, DataDecl, DeclKind, Declaration, Expr, FunDecl, Ident, LetDecl, MetaId, Param,
    Pattern, Polarity, Pos, SizeExpr,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GlobalKind {
    Def,
    Con,
}

struct Scope {
    globals: HashMap<String, (Ident, GlobalKind)>,
    locals: Vec<(String, Ident)>,
    next_meta: MetaId,
}

/// Resolve all names of a parsed program. Declarations may only refer to
/// earlier declarations, except that a function's clauses may refer to the
/// function itself and a data type's constructors to the data type.
pub fn scope_check(program: &[CDecl]) -> Result<Vec<Declaration>, Diagnostic> {
    let mut sc = Scope {
        globals: HashMap::new(),
        locals: Vec::new(),
        next_meta: 0,
    };
    program.iter().map(|d| sc.decl(d)).collect()
}

impl Scope {
    fn declare(&mut self, name: &str, kind: GlobalKind, pos: Pos) -> Result<Ident, Diagnostic> {
        if self.globals.contains_key(name) {
            return Err(Diagnostic::new(
                Code::Duplicate,
                pos,
                format!("`{}` is already defined", name),
            ));
        }
        let id = Ident::fresh(name);
        self.globals.insert(name.to_string(), (id.clone(), kind));
        Ok(id)
    }

    fn check_fresh(&self, name: &str, pos: Pos) -> Result<(), Diagnostic> {
        if self.globals.contains_key(name) {
            Err(Diagnostic::new(
                Code::Duplicate,
                pos,
                format!("`{}` is already defined", name),
            ))
        } else {
            Ok(())
        }
    }

    fn bind_local(&mut self, name: &str) -> Ident {
        let id = Ident::fresh(name);
        self.locals.push((name.to_string(), id.clone()));
        id
    }

    fn lookup_local(&self, name: &str) -> Option<&Ident> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, id)| id)
    }

    fn decl(&mut self, d: &CDecl) -> Result<Declaration, Diagnostic> {
        self.locals.clear();
        match d {
            CDecl::Data {
                sized,
                coinductive,
                name,
                params,
                ty,
                constructors,
                pos,
            } => {
                self.check_fresh(name, *pos)?;
                let mut ps = Vec::new();
                for p in params {
                    let pty = self.expr(&p.ty)?;
                    let id = self.bind_local(&p.name);
                    ps.push(Param {
                        name: id,
                        polarity: if p.strictly_positive {
                            Polarity::StrictPos
                        } else {
                            Polarity::Invariant
                        },
                        ty: pty,
                    });
                }
                let index_ty = self.expr(ty)?;
                let data_id = self.declare(name, GlobalKind::Def, *pos)?;
                let mut cons = Vec::new();
                for (cname, cty, cpos) in constructors {
                    let cty = self.expr(cty)?;
                    cons.push((cname.clone(), cty, *cpos));
                }
                let mut out = Vec::new();
                for (cname, cty, cpos) in cons {
                    let cid = self.declare(&cname, GlobalKind::Con, cpos)?;
                    out.push((cid, cty, cpos));
                }
                Ok(Declaration {
                    kind: DeclKind::Data(DataDecl {
                        sized: *sized,
                        coinductive: *coinductive,
                        name: data_id,
                        params: ps,
                        index_ty,
                        constructors: out,
                    }),
                    pos: *pos,
                })
            }
            CDecl::Fun {
                coinductive,
                name,
                ty,
                clauses,
                pos,
            } => {
                let ty = self.expr(ty)?;
                let fid = self.declare(name, GlobalKind::Def, *pos)?;
                let mut cls = Vec::new();
                for cl in clauses {
                    if cl.head != *name {
                        return Err(Diagnostic::new(
                            Code::Parse,
                            cl.pos,
                            format!("clause head `{}` should be `{}`", cl.head, name),
                        ));
                    }
                    self.locals.clear();
                    let lhs = self.patterns(&cl.patterns)?;
                    let rhs = self.expr(&cl.rhs)?;
                    cls.push(Clause {
                        lhs,
                        rhs,
                        pos: cl.pos,
                    });
                }
                Ok(Declaration {
                    kind: DeclKind::Fun(FunDecl {
                        coinductive: *coinductive,
                        name: fid,
                        ty,
                        clauses: cls,
                    }),
                    pos: *pos,
                })
            }
            CDecl::Let {
                eval,
                name,
                ty,
                body,
                pos,
            } => {
                let ty = self.expr(ty)?;
                let body = self.expr(body)?;
                let id = self.declare(name, GlobalKind::Def, *pos)?;
                Ok(Declaration {
                    kind: DeclKind::Let(LetDecl {
                        name: id,
                        ty,
                        body,
                        eval: *eval,
                    }),
                    pos: *pos,
                })
            }
        }
    }

    /// Scope a left-hand side: binders first (left to right), then the
    /// expressions inside dot patterns, which may mention any lhs variable.
    fn patterns(&mut self, ps: &[CPattern]) -> Result<Vec<Pattern>, Diagnostic> {
        let mut bound: Vec<String> = Vec::new();
        let mut dots = Vec::new();
        let mut out = Vec::new();
        for p in ps {
            out.push(self.pattern(p, &mut bound, &mut dots)?);
        }
        let mut resolved = Vec::new();
        for e in dots {
            resolved.push(self.expr(e)?);
        }
        let mut it = resolved.into_iter();
        for p in out.iter_mut() {
            fill_dots(p, &mut it);
        }
        Ok(out)
    }

    fn pattern<'a>(
        &mut self,
        p: &'a CPattern,
        bound: &mut Vec<String>,
        dots: &mut Vec<&'a CExpr>,
    ) -> Result<Pattern, Diagnostic> {
        match p {
            CPattern::Wild => Ok(Pattern::Wild),
            CPattern::Dot(e) => {
                dots.push(e);
                Ok(Pattern::Dot(Expr::Erased))
            }
            CPattern::Ident(name, pos) => match self.globals.get(name) {
                Some((c, GlobalKind::Con)) => Ok(Pattern::Con(c.clone(), Vec::new())),
                _ => Ok(Pattern::Var(self.bind_pattern_var(name, *pos, bound)?)),
            },
            CPattern::Con(name, args, pos) => {
                let c = match self.globals.get(name) {
                    Some((c, GlobalKind::Con)) => c.clone(),
                    _ => {
                        return Err(Diagnostic::new(
                            Code::Unbound,
                            *pos,
                            format!("`{}` is not a constructor", name),
                        ))
                    }
                };
                let mut sub = Vec::new();
                for a in args {
                    sub.push(self.pattern(a, bound, dots)?);
                }
                Ok(Pattern::Con(c, sub))
            }
            CPattern::SizeRel(parent, child, pos) => {
                let parent = self.lookup_local(parent).cloned().ok_or_else(|| {
                    Diagnostic::new(
                        Code::Unbound,
                        *pos,
                        format!("size variable `{}` is not in scope", parent),
                    )
                })?;
                let child = self.bind_pattern_var(child, *pos, bound)?;
                Ok(Pattern::SizeRel(parent, child))
            }
            CPattern::Succ(child, pos) => Ok(Pattern::Succ(self.bind_pattern_var(child, *pos, bound)?)),
        }
    }

    fn bind_pattern_var(
        &mut self,
        name: &str,
        pos: Pos,
        bound: &mut Vec<String>,
    ) -> Result<Ident, Diagnostic> {
        if bound.iter().any(|b| b == name) {
            return Err(Diagnostic::new(
                Code::Duplicate,
                pos,
                format!("variable `{}` bound twice in left-hand side", name),
            ));
        }
        bound.push(name.to_string());
        Ok(self.bind_local(name))
    }

    fn size(&mut self, e: &CExpr, pos: Pos) -> Result<SizeExpr, Diagnostic> {
        let scoped = self.expr(e)?;
        scoped.as_size().ok_or_else(|| {
            Diagnostic::new(
                Code::Parse,
                pos,
                "size operators apply only to variables and size expressions",
            )
        })
    }

    fn expr(&mut self, e: &CExpr) -> Result<Expr, Diagnostic> {
        Ok(match e {
            CExpr::Ident(name, pos) => {
                if let Some(id) = self.lookup_local(name) {
                    Expr::Var(id.clone())
                } else if let Some((id, kind)) = self.globals.get(name) {
                    match kind {
                        GlobalKind::Def => Expr::Def(id.clone()),
                        GlobalKind::Con => Expr::Con(id.clone()),
                    }
                } else {
                    return Err(Diagnostic::new(
                        Code::Unbound,
                        *pos,
                        format!("unbound name `{}`", name),
                    ));
                }
            }
            CExpr::Set => Expr::Set,
            CExpr::SizeU => Expr::SizeU,
            CExpr::Infty => Expr::Size(SizeExpr::Infty),
            CExpr::Meta => {
                let m = self.next_meta;
                self.next_meta += 1;
                Expr::Size(SizeExpr::Meta(m))
            }
            CExpr::Succ(inner) => Expr::Size(self.size(inner, first_pos(inner))?.succ()),
            CExpr::Max(a, b) => {
                let a = self.size(a, first_pos(a))?;
                let b = self.size(b, first_pos(b))?;
                Expr::Size(SizeExpr::Max(Box::new(a), Box::new(b)))
            }
            CExpr::Pi(annot, name, dom, cod) => {
                let dom = self.expr(dom)?;
                let mark = self.locals.len();
                let x = match name {
                    Some(n) => self.bind_local(n),
                    None => Ident::fresh("_"),
                };
                let cod = self.expr(cod)?;
                self.locals.truncate(mark);
                Expr::Pi(*annot, x, Arc::new(dom), Arc::new(cod))
            }
            CExpr::Lam(names, body) => {
                let mark = self.locals.len();
                let ids: Vec<Ident> = names.iter().map(|n| self.bind_local(n)).collect();
                let mut body = self.expr(body)?;
                self.locals.truncate(mark);
                for x in ids.into_iter().rev() {
                    body = Expr::Lam(x, Arc::new(body));
                }
                body
            }
            CExpr::App(f, a) => Expr::app(self.expr(f)?, self.expr(a)?),
            CExpr::Case(scrut, branches, pos) => {
                if let [(CPattern::Succ(j, _), body)] = branches.as_slice() {
                    let s = self.size(scrut, *pos)?;
                    let mark = self.locals.len();
                    let j = self.bind_local(j);
                    let body = self.expr(body)?;
                    self.locals.truncate(mark);
                    return Ok(Expr::CaseSize(s, j, Arc::new(body)));
                }
                let scrut = self.expr(scrut)?;
                let mut out = Vec::new();
                for (p, body) in branches {
                    let mark = self.locals.len();
                    let mut ps = self.patterns(std::slice::from_ref(p))?;
                    let body = self.expr(body)?;
                    self.locals.truncate(mark);
                    out.push((ps.remove(0), body));
                }
                Expr::CaseData(Arc::new(scrut), out)
            }
        })
    }
}

fn first_pos(e: &CExpr) -> Pos {
    match e {
        CExpr::Ident(_, p) | CExpr::Case(_, _, p) => *p,
        CExpr::App(f, _) => first_pos(f),
        CExpr::Succ(e) => first_pos(e),
        _ => Pos::default(),
    }
}

fn fill_dots(p: &mut Pattern, it: &mut impl Iterator<Item = Expr>) {
    match p {
        Pattern::Dot(e) => {
            if let Some(r) = it.next() {
                *e = r;
            }
        }
        Pattern::Con(_, ps) => ps.iter_mut().for_each(|q| fill_dots(q, it)),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn scoped(src: &str) -> Result<Vec<Declaration>, Diagnostic> {
        scope_check(&parse_source(src).unwrap())
    }

    #[test]
    fn recursive_function_refers_to_itself() {
        let decls = scoped(
            "data Nat : Set { zero : Nat ; succ : Nat -> Nat }
             fun leq : Nat -> Nat -> [C : Set] -> C -> C -> C
             { leq zero y C t f = t
             ; leq (succ x) zero C t f = f
             ; leq (succ x) (succ y) C t f = leq x y C t f }",
        )
        .unwrap();
        assert_eq!(decls.len(), 2);
        let DeclKind::Fun(f) = &decls[1].kind else {
            panic!()
        };
        let (head, _) = f.clauses[2].rhs.spine();
        assert!(matches!(head, Expr::Def(x) if *x == f.name));
        assert!(matches!(&f.clauses[0].lhs[0], Pattern::Con(c, ps) if &*c.text == "zero" && ps.is_empty()));
    }

    #[test]
    fn empty_program() {
        assert!(scoped("").unwrap().is_empty());
    }

    #[test]
    fn forward_reference_is_unbound() {
        let err = scoped(
            "let x : SNat # = x
             sized data SNat : Size -> Set { zero : [i : Size] -> SNat ($ i) }",
        )
        .unwrap_err();
        assert_eq!(err.code, Code::Unbound);
        assert_eq!(err.pos.line, 1);
    }

    #[test]
    fn duplicate_definitions_are_rejected() {
        let err = scoped("let x : Set = Set\nlet x : Set = Set").unwrap_err();
        assert_eq!(err.code, Code::Duplicate);
    }

    #[test]
    fn non_linear_lhs_is_rejected() {
        let err = scoped("fun f : Set -> Set -> Set { f x x = x }").unwrap_err();
        assert_eq!(err.code, Code::Duplicate);
    }

    #[test]
    fn dot_patterns_see_all_binders() {
        let decls = scoped(
            "sized data SNat : Size -> Set { zero : [i : Size] -> SNat ($ i) ; succ : [i : Size] -> SNat i -> SNat ($ i) }
             fun pred : [i : Size] -> SNat ($$ i) -> SNat ($ i)
             { pred i (succ .($ i) n) = n ; pred i (zero .($ i)) = zero i }",
        )
        .unwrap();
        let DeclKind::Fun(f) = &decls[1].kind else {
            panic!()
        };
        let Pattern::Var(i) = &f.clauses[0].lhs[0] else {
            panic!()
        };
        let Pattern::Con(_, ps) = &f.clauses[0].lhs[1] else {
            panic!()
        };
        match &ps[0] {
            Pattern::Dot(Expr::Size(SizeExpr::Succ(inner))) => {
                assert!(matches!(&**inner, SizeExpr::Var(x) if x == i))
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn size_case_is_recognized() {
        let decls = scoped("let f : [i : Size] -> Size = \\ i -> case i { ($ j) -> j }").unwrap();
        let DeclKind::Let(l) = &decls[0].kind else {
            panic!()
        };
        let Expr::Lam(_, body) = &l.body else { panic!() };
        assert!(matches!(&**body, Expr::CaseSize(..)));
    }
}
