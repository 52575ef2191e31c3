//! Bidirectional type checking with subtyping, parametric arguments and
//! clause-local size metavariables.

mod decl;
mod pattern;

use std::cell::{Cell, RefCell};
use std::collections::BTreeSet;
use std::sync::Arc;

pub use decl::{check_program, CheckOptions, Checked, ClauseConstraints};

use crate::conv::Conv;
use crate::diagnostic::{Code, Diagnostic};
use crate::eval::{Env, Eval, EvalError, Value};
use crate::parser::pretty::pretty;
use crate::signature::{Entry, Signature};
use crate::size::{solve_metas_for, MetaSolution, NormalSize, Rel, SizeConstraint, SizeCtx};
use crate::syntax::{Annot, Expr, Ident, MetaId, Pos, SizeExpr};
use crate::totality::{admissibility_check, Call, DefKind};

/// Whether parametric variables may be used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Relevant,
    Irrelevant,
}

/// Typing context: variables with their types and annotations, their
/// values, and the size hypotheses in force.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    vars: Vec<(Ident, Value, Annot)>,
    pub env: Env,
    pub sizes: SizeCtx,
}

impl Ctx {
    pub fn new() -> Ctx {
        Ctx::default()
    }

    /// Extend with a fresh variable; returns its value.
    pub fn bind(&self, x: &Ident, ty: Value, annot: Annot) -> (Ctx, Value) {
        let v = Value::fresh_of(x, &ty);
        let mut out = self.define(x, ty, annot, v.clone());
        if matches!(v, Value::Size(_)) {
            out.sizes = out.sizes.declare(x);
        }
        (out, v)
    }

    /// Extend with a variable standing for a known value.
    pub fn define(&self, x: &Ident, ty: Value, annot: Annot, v: Value) -> Ctx {
        let mut out = self.clone();
        out.vars.push((x.clone(), ty, annot));
        out.env = out.env.extend(x, crate::eval::Thunk::ready(v));
        out
    }

    pub fn lookup(&self, x: &Ident) -> Option<(&Value, Annot)> {
        self.vars
            .iter()
            .rev()
            .find(|(y, _, _)| y == x)
            .map(|(_, t, a)| (t, *a))
    }
}

/// The function whose clauses are being checked.
pub(crate) struct Current {
    pub name: Ident,
    pub size_param: Option<usize>,
    pub clause: Cell<usize>,
    pub clause_size: RefCell<Option<NormalSize>>,
}

pub(crate) struct Tc<'s> {
    pub sig: &'s Signature,
    pub ev: Eval<'s>,
    pub fuel: u64,
    pub pos: Cell<Pos>,
    pub sink: RefCell<Vec<(SizeConstraint, SizeCtx)>>,
    pub metas: RefCell<BTreeSet<MetaId>>,
    pub current: Option<Current>,
    pub calls: RefCell<Vec<Call>>,
}

fn size_atoms(s: &SizeExpr, vars: &mut Vec<Ident>, metas: &mut Vec<MetaId>) {
    match s {
        SizeExpr::Var(x) => vars.push(x.clone()),
        SizeExpr::Meta(m) => metas.push(*m),
        SizeExpr::Infty => {}
        SizeExpr::Succ(a) => size_atoms(a, vars, metas),
        SizeExpr::Max(a, b) => {
            size_atoms(a, vars, metas);
            size_atoms(b, vars, metas);
        }
    }
}

impl<'s> Tc<'s> {
    pub fn new(sig: &'s Signature, fuel: u64, pos: Pos) -> Tc<'s> {
        Tc {
            sig,
            ev: Eval::new(sig, fuel),
            fuel,
            pos: Cell::new(pos),
            sink: RefCell::new(Vec::new()),
            metas: RefCell::new(BTreeSet::new()),
            current: None,
            calls: RefCell::new(Vec::new()),
        }
    }

    pub fn err(&self, code: Code, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(code, self.pos.get(), msg)
    }

    pub fn ev_err(&self, e: EvalError) -> Diagnostic {
        self.err(Code::Eval, e.to_string())
    }

    pub fn eval(&self, ctx: &Ctx, e: &Expr) -> Result<Value, Diagnostic> {
        self.ev
            .eval(&ctx.env, &Arc::new(e.clone()))
            .map_err(|e| self.ev_err(e))
    }

    pub fn whnf(&self, v: Value) -> Result<Value, Diagnostic> {
        self.ev.whnf(v).map_err(|e| self.ev_err(e))
    }

    pub fn inst(&self, cl: &crate::eval::Closure, v: Value) -> Result<Value, Diagnostic> {
        self.ev.inst(cl, v).map_err(|e| self.ev_err(e))
    }

    pub fn quote(&self, v: &Value) -> Result<Expr, Diagnostic> {
        self.ev.quote(v).map_err(|e| self.ev_err(e))
    }

    pub fn show(&self, v: &Value) -> String {
        match self.ev.quote(v) {
            Ok(e) => pretty(&e),
            Err(_) => "<value>".to_string(),
        }
    }

    pub fn sub(&self, ctx: &Ctx, a: &Value, b: &Value) -> Result<bool, Diagnostic> {
        self.ev.set_fuel(self.fuel);
        Conv::with_sink(&self.ev, &self.sink)
            .sub(&ctx.sizes, a, b)
            .map_err(|e| self.ev_err(e))
    }

    pub fn conv(&self, ctx: &Ctx, a: &Value, b: &Value) -> Result<bool, Diagnostic> {
        self.ev.set_fuel(self.fuel);
        Conv::with_sink(&self.ev, &self.sink)
            .conv(&ctx.sizes, a, b)
            .map_err(|e| self.ev_err(e))
    }

    pub fn global_type(&self, d: &Ident) -> Result<Value, Diagnostic> {
        let ty = match self.sig.get(d) {
            Some(Entry::Data(x)) => x.ty.clone(),
            Some(Entry::Con(x)) => x.ty.clone(),
            Some(Entry::Fun(x)) => x.ty.clone(),
            Some(Entry::Let(x)) => x.ty.clone(),
            None => return Err(self.err(Code::Unbound, format!("`{}` is not defined", d))),
        };
        self.ev.eval(&Env::new(), &ty).map_err(|e| self.ev_err(e))
    }

    fn check_size(&self, ctx: &Ctx, s: &SizeExpr, mode: Mode) -> Result<(), Diagnostic> {
        let (mut vars, mut metas) = (Vec::new(), Vec::new());
        size_atoms(s, &mut vars, &mut metas);
        for x in vars {
            let Some((ty, annot)) = ctx.lookup(&x) else {
                return Err(self.err(Code::Unbound, format!("size variable `{}` is not in scope", x)));
            };
            if !matches!(ty, Value::SizeU) {
                return Err(self.err(
                    Code::TypeMismatch,
                    format!("`{}` has type `{}`, not `Size`", x, self.show(ty)),
                ));
            }
            self.use_var(&x, annot, mode)?;
        }
        self.metas.borrow_mut().extend(metas);
        Ok(())
    }

    fn use_var(&self, x: &Ident, annot: Annot, mode: Mode) -> Result<(), Diagnostic> {
        if annot == Annot::Parametric && mode == Mode::Relevant {
            return Err(self.err(
                Code::ParametricViolation,
                format!("parametric variable `{}` used in a relevant position", x),
            ));
        }
        Ok(())
    }

    pub fn infer(&self, ctx: &Ctx, e: &Expr, mode: Mode) -> Result<(Expr, Value), Diagnostic> {
        match e {
            Expr::Var(x) => {
                let Some((ty, annot)) = ctx.lookup(x) else {
                    return Err(self.err(Code::Unbound, format!("unbound variable `{}`", x)));
                };
                self.use_var(x, annot, mode)?;
                Ok((e.clone(), ty.clone()))
            }
            Expr::Def(d) | Expr::Con(d) => {
                let ty = self.global_type(d)?;
                self.record_call(ctx, d, Vec::new(), &[]);
                Ok((e.clone(), ty))
            }
            Expr::Set => Ok((Expr::Set, Value::Set)),
            Expr::SizeU => Ok((Expr::SizeU, Value::Set)),
            Expr::Size(s) => {
                self.check_size(ctx, s, mode)?;
                Ok((e.clone(), Value::SizeU))
            }
            Expr::App(..) => self.infer_app(ctx, e, mode),
            Expr::Pi(annot, x, dom, cod) => {
                let dom2 = self.check(ctx, dom, &Value::Set, Mode::Irrelevant)?;
                let dv = self.eval(ctx, &dom2)?;
                let (ctx2, _) = ctx.bind(x, dv, Annot::Relevant);
                let cod2 = self.check(&ctx2, cod, &Value::Set, Mode::Irrelevant)?;
                Ok((
                    Expr::Pi(*annot, x.clone(), Arc::new(dom2), Arc::new(cod2)),
                    Value::Set,
                ))
            }
            Expr::Lam(..) | Expr::CaseSize(..) | Expr::CaseData(..) => Err(self.err(
                Code::TypeMismatch,
                format!("cannot infer a type for `{}`", pretty(e)),
            )),
            Expr::Erased | Expr::Elided => Err(self.err(Code::TypeMismatch, "erased term in checked position")),
        }
    }

    fn infer_app(&self, ctx: &Ctx, e: &Expr, mode: Mode) -> Result<(Expr, Value), Diagnostic> {
        let (head, args) = e.spine();
        let (mut acc, mut ty) = match head {
            Expr::Def(d) | Expr::Con(d) => (head.clone(), self.global_type(d)?),
            _ => self.infer(ctx, head, mode)?,
        };
        let mut arg_es = Vec::new();
        let mut arg_vs = Vec::new();
        for (a, _) in args {
            let tw = self.whnf(ty)?;
            let Value::Pi(annot, dom, cl) = tw else {
                return Err(self.err(
                    Code::NotAFunction,
                    format!(
                        "`{}` of type `{}` cannot be applied to `{}`",
                        pretty(&acc),
                        self.show(&tw),
                        pretty(a)
                    ),
                ));
            };
            let amode = if annot == Annot::Parametric {
                Mode::Irrelevant
            } else {
                mode
            };
            let a2 = self.check(ctx, a, &dom, amode)?;
            let av = self.eval(ctx, &a2)?;
            ty = self.inst(&cl, av.clone())?;
            acc = Expr::app_annot(acc, a2.clone(), annot);
            arg_es.push(a2);
            arg_vs.push(av);
        }
        if let Expr::Def(d) = head {
            self.record_call(ctx, d, arg_es, &arg_vs);
        }
        Ok((acc, ty))
    }

    fn record_call(&self, ctx: &Ctx, d: &Ident, args: Vec<Expr>, vals: &[Value]) {
        let Some(cur) = &self.current else { return };
        if cur.name != *d {
            return;
        }
        let size = cur
            .size_param
            .and_then(|p| vals.get(p))
            .and_then(|v| v.as_size());
        if let (Some(s), Some(v)) = (&size, &*cur.clause_size.borrow()) {
            if s.has_meta() {
                self.sink.borrow_mut().push((
                    SizeConstraint::new(s.clone(), Rel::Lt, v.clone()),
                    ctx.sizes.clone(),
                ));
            }
        }
        self.calls.borrow_mut().push(Call {
            clause: cur.clause.get(),
            args,
            size,
            sizes: ctx.sizes.clone(),
        });
    }

    pub fn check(&self, ctx: &Ctx, e: &Expr, ty: &Value, mode: Mode) -> Result<Expr, Diagnostic> {
        let ty = self.whnf(ty.clone())?;
        let mode = if matches!(ty, Value::Set) {
            Mode::Irrelevant
        } else {
            mode
        };
        match (e, &ty) {
            (Expr::Lam(x, body), Value::Pi(annot, dom, cl)) => {
                let (ctx2, xv) = ctx.bind(x, (**dom).clone(), *annot);
                let cod = self.inst(cl, xv)?;
                let body2 = self.check(&ctx2, body, &cod, mode)?;
                Ok(Expr::Lam(x.clone(), Arc::new(body2)))
            }
            (Expr::Lam(..), _) => Err(self.err(
                Code::TypeMismatch,
                format!(
                    "`{}` is a function but `{}` is expected",
                    pretty(e),
                    self.show(&ty)
                ),
            )),
            (Expr::CaseSize(s, j, body), _) => self.check_case_size(ctx, s, j, body, &ty, mode),
            (Expr::CaseData(scrut, branches), _) => {
                let (scrut2, sty) = self.infer(ctx, scrut, mode)?;
                let mut out = Vec::new();
                for (p, rhs) in branches {
                    let ctx2 = self.case_branch(ctx, p, &sty)?;
                    out.push((p.clone(), self.check(&ctx2, rhs, &ty, mode)?));
                }
                Ok(Expr::CaseData(Arc::new(scrut2), out))
            }
            (Expr::Set, Value::Set) => Ok(Expr::Set),
            _ => {
                let (e2, inferred) = self.infer(ctx, e, mode)?;
                if self.sub(ctx, &inferred, &ty)? {
                    Ok(e2)
                } else {
                    Err(self.err(
                        Code::TypeMismatch,
                        format!(
                            "`{}` has type `{}` but `{}` is expected",
                            pretty(e),
                            self.show(&inferred),
                            self.show(&ty)
                        ),
                    ))
                }
            }
        }
    }

    fn check_case_size(
        &self,
        ctx: &Ctx,
        s: &SizeExpr,
        j: &Ident,
        body: &Expr,
        ty: &Value,
        mode: Mode,
    ) -> Result<Expr, Diagnostic> {
        self.check_size(ctx, s, Mode::Irrelevant)?;
        let sv = self
            .ev
            .eval_size(&ctx.env, s)
            .map_err(|e| self.ev_err(e))?;
        let Some(i) = sv.as_var().cloned() else {
            return Err(self.err(
                Code::TypeMismatch,
                format!("size case needs a size variable, found `{}`", sv),
            ));
        };
        let c = self.quote(ty)?;
        admissibility_check(&c, &i, DefKind::Cofun, self.sig)
            .map_err(|msg| self.err(Code::Admissibility, format!("size case on `{}`: {}", i, msg)))?;
        let (mut ctx2, _) = ctx.bind(j, Value::SizeU, Annot::Parametric);
        ctx2.sizes = ctx2
            .sizes
            .add_hypothesis(j, NormalSize::var(i.clone()), true)
            .map_err(|e| self.ev_err(e.into()))?;
        let c2 = c.substitute(&i, &Expr::Size(SizeExpr::Var(j.clone()).succ()));
        let tyj = self.eval(&ctx2, &c2)?;
        let body2 = self.check(&ctx2, body, &tyj, mode)?;
        Ok(Expr::CaseSize(s.clone(), j.clone(), Arc::new(body2)))
    }

    /// Solve the metavariables of the current clause and substitute them
    /// into `e`. Returns the constraints that were solved.
    pub fn solve_metas(
        &self,
        base: &SizeCtx,
        e: Expr,
    ) -> Result<(Expr, MetaSolution, Vec<SizeConstraint>), Diagnostic> {
        let recorded = std::mem::take(&mut *self.sink.borrow_mut());
        let metas: BTreeSet<MetaId> = std::mem::take(&mut *self.metas.borrow_mut());
        let cs: Vec<SizeConstraint> = recorded.iter().map(|(c, _)| c.clone()).collect();
        if metas.is_empty() && cs.is_empty() {
            return Ok((e, MetaSolution::new(), cs));
        }
        let sctx = recorded
            .iter()
            .fold(base.clone(), |acc, (_, s)| acc.merge(s));
        let sol = solve_metas_for(&metas, &cs, &sctx).map_err(|err| {
            let listing: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
            self.err(
                Code::UnsolvedMeta,
                format!("{} (constraints: {})", err, listing.join(", ")),
            )
        })?;
        let e = e.map_metas(&|m| sol.get(&m).map(|s| s.to_expr()));
        Ok((e, sol, cs))
    }
}
