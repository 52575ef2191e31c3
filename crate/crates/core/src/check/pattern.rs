//! Elaboration of left-hand-side patterns into a context and values.

use std::collections::HashMap;

use super::{Ctx, Mode, Tc};
use crate::diagnostic::{Code, Diagnostic};
use crate::eval::{Arg, Env, Head, Thunk, Value};
use crate::parser::pretty::pretty_pattern;
use crate::size::NormalSize;
use crate::syntax::{Annot, Expr, Ident, Pattern};

/// A dot pattern to be verified once all binders are known.
pub(crate) struct DotObligation {
    pub expr: Expr,
    pub ty: Value,
    pub forced: Option<Value>,
}

pub(crate) struct PatState {
    pub ctx: Ctx,
    pub dots: Vec<DotObligation>,
    pub inside: HashMap<Ident, usize>,
    pub top: usize,
}

impl PatState {
    pub fn new(ctx: Ctx) -> PatState {
        PatState {
            ctx,
            dots: Vec::new(),
            inside: HashMap::new(),
            top: 0,
        }
    }
}

impl<'s> Tc<'s> {
    /// Elaborate `p` against `ty`. `depth` is zero at the top of a clause.
    pub(crate) fn elab_pattern(
        &self,
        st: &mut PatState,
        p: &Pattern,
        ty: &Value,
        annot: Annot,
        depth: usize,
    ) -> Result<Value, Diagnostic> {
        match p {
            Pattern::Var(x) => Ok(self.bind_pat(st, x, ty, annot, depth)),
            Pattern::Wild => Ok(self.bind_pat(st, &Ident::fresh("_"), ty, annot, depth)),
            Pattern::Dot(e) => {
                let v = self.eval(&st.ctx, e)?;
                st.dots.push(DotObligation {
                    expr: e.clone(),
                    ty: ty.clone(),
                    forced: None,
                });
                Ok(v)
            }
            Pattern::Succ(_) => Err(self.err(
                Code::IllegalSizeRefinement,
                format!(
                    "successor pattern `{}` is only allowed for a size parameter of a cofun",
                    pretty_pattern(p)
                ),
            )),
            Pattern::SizeRel(..) => Err(self.err(
                Code::SizePatternRequired,
                format!(
                    "size pattern `{}` may only stand for the size argument of a constructor",
                    pretty_pattern(p)
                ),
            )),
            Pattern::Con(c, ps) => self.elab_con(st, c, ps, ty, depth),
        }
    }

    fn bind_pat(&self, st: &mut PatState, x: &Ident, ty: &Value, annot: Annot, depth: usize) -> Value {
        let (ctx, v) = st.ctx.bind(x, ty.clone(), annot);
        st.ctx = ctx;
        if depth > 0 {
            st.inside.insert(x.clone(), st.top);
        }
        v
    }

    fn elab_con(
        &self,
        st: &mut PatState,
        c: &Ident,
        ps: &[Pattern],
        ty: &Value,
        depth: usize,
    ) -> Result<Value, Diagnostic> {
        let Some(con) = self.sig.con(c) else {
            return Err(self.err(Code::Unbound, format!("`{}` is not a constructor", c)));
        };
        let tw = self.whnf(ty.clone())?;
        let dargs = match &tw {
            Value::App(Head::Data(d), args) if *d == con.data => args.clone(),
            _ => {
                return Err(self.err(
                    Code::TypeMismatch,
                    format!(
                        "constructor `{}` does not build values of type `{}`",
                        c,
                        self.show(&tw)
                    ),
                ))
            }
        };
        if ps.len() != con.arity {
            return Err(self.err(
                Code::TypeMismatch,
                format!(
                    "constructor `{}` takes {} arguments in patterns, got {}",
                    c,
                    con.arity,
                    ps.len()
                ),
            ));
        }
        let data = self
            .sig
            .data(&con.data)
            .expect("constructor of a declared data type");
        let (sized, coinductive) = (data.sized, data.coinductive);
        let n = con.n_params;
        let mut cty = self
            .ev
            .eval(&Env::new(), &con.ty)
            .map_err(|e| self.ev_err(e))?;
        let mut args = Vec::new();
        for (k, p) in ps.iter().enumerate() {
            let Value::Pi(annot, dom, cl) = self.whnf(cty)? else {
                return Err(self.err(Code::TypeMismatch, format!("constructor `{}` is over-applied", c)));
            };
            let v = if k < n {
                let forced = self
                    .ev
                    .force(&dargs[k].thunk)
                    .map_err(|e| self.ev_err(e))?;
                match p {
                    Pattern::Dot(e) => st.dots.push(DotObligation {
                        expr: e.clone(),
                        ty: (*dom).clone(),
                        forced: Some(forced.clone()),
                    }),
                    Pattern::Wild => {}
                    Pattern::Var(x) => {
                        st.ctx = st.ctx.define(x, (*dom).clone(), Annot::Parametric, forced.clone())
                    }
                    _ => {
                        return Err(self.err(
                            Code::TypeMismatch,
                            format!(
                                "parameter position of `{}` must be a dot pattern, found `{}`",
                                c,
                                pretty_pattern(p)
                            ),
                        ))
                    }
                }
                forced
            } else if k == n && sized {
                let idx = dargs
                    .get(n)
                    .map(|a| self.ev.force(&a.thunk))
                    .transpose()
                    .map_err(|e| self.ev_err(e))?
                    .and_then(|v| v.as_size());
                let Some(idx) = idx else {
                    return Err(self.err(
                        Code::TypeMismatch,
                        format!("scrutinee type `{}` has no size index", self.show(&tw)),
                    ));
                };
                self.size_position(st, c, p, &idx, coinductive, annot)?
            } else {
                self.elab_pattern(st, p, &dom, annot, depth + 1)?
            };
            args.push(Arg {
                thunk: Thunk::ready(v.clone()),
                annot,
            });
            cty = self.inst(&cl, v)?;
        }
        Ok(Value::App(Head::Con(c.clone()), args))
    }

    fn size_position(
        &self,
        st: &mut PatState,
        c: &Ident,
        p: &Pattern,
        idx: &NormalSize,
        coinductive: bool,
        annot: Annot,
    ) -> Result<Value, Diagnostic> {
        let pred_dot = |st: &mut PatState, pred: NormalSize| -> Result<Value, Diagnostic> {
            match p {
                Pattern::Dot(e) => st.dots.push(DotObligation {
                    expr: e.clone(),
                    ty: Value::SizeU,
                    forced: Some(Value::Size(pred.clone())),
                }),
                Pattern::Wild => {}
                _ => {
                    return Err(self.err(
                        Code::SizePatternRequired,
                        format!(
                            "size argument of `{}` at size `{}` must be the dot pattern `.{}`",
                            c, idx, pred
                        ),
                    ))
                }
            }
            Ok(Value::Size(pred))
        };
        if coinductive {
            let Some(pred) = idx.pred() else {
                return Err(self.err(
                    Code::CofunMatchOnVariableSize,
                    format!(
                        "cannot match `{}` against a coinductive value of size `{}`",
                        c, idx
                    ),
                ));
            };
            return pred_dot(st, pred);
        }
        if let Some(i) = idx.as_var() {
            let Pattern::SizeRel(parent, child) = p else {
                return Err(self.err(
                    Code::SizePatternRequired,
                    format!(
                        "matching `{}` at size `{}` requires a size pattern `({} > j)`",
                        c, i, i
                    ),
                ));
            };
            let pv = self
                .ev
                .eval(&st.ctx.env, &std::sync::Arc::new(Expr::Var(parent.clone())))
                .map_err(|e| self.ev_err(e))?
                .as_size();
            if pv.as_ref().and_then(|s| s.as_var()) != Some(i) {
                return Err(self.err(
                    Code::SizePatternRequired,
                    format!("size pattern `({} > {})` must refer to the index `{}`", parent, child, i),
                ));
            }
            let (mut ctx, v) = st.ctx.bind(child, Value::SizeU, annot);
            ctx.sizes = ctx
                .sizes
                .add_hypothesis(child, NormalSize::var(i.clone()), true)
                .map_err(|e| self.ev_err(e.into()))?;
            st.ctx = ctx;
            st.inside.insert(child.clone(), st.top);
            return Ok(v);
        }
        match idx.pred() {
            Some(pred) => pred_dot(st, pred),
            None => Err(self.err(
                Code::SizePatternRequired,
                format!("cannot match `{}` against a value of size `{}`", c, idx),
            )),
        }
    }

    /// Type-check the dot patterns collected in `st` and compare them with
    /// their forced values.
    pub(crate) fn discharge_dots(&self, st: &mut PatState) -> Result<(), Diagnostic> {
        for ob in std::mem::take(&mut st.dots) {
            let e2 = self.check(&st.ctx, &ob.expr, &ob.ty, Mode::Irrelevant)?;
            let v = self.eval(&st.ctx, &e2)?;
            if let Some(forced) = &ob.forced {
                if !self.conv(&st.ctx, &v, forced)? {
                    return Err(self.err(
                        Code::DotMismatch,
                        format!(
                            "dot pattern `{}` does not match the forced value `{}`",
                            pretty_pattern(&Pattern::Dot(ob.expr.clone())),
                            self.show(forced)
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Context for the right-hand side of a `case` branch.
    pub(crate) fn case_branch(&self, ctx: &Ctx, p: &Pattern, ty: &Value) -> Result<Ctx, Diagnostic> {
        let mut st = PatState::new(ctx.clone());
        self.elab_pattern(&mut st, p, ty, Annot::Relevant, 0)?;
        self.discharge_dots(&mut st)?;
        Ok(st.ctx)
    }
}
