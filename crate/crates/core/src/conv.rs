//! Erasure-aware conversion and subtyping of values.
//!
//! Size comparisons are decided by entailment. When a size still contains
//! metavariables the comparison is recorded as a constraint instead.

use std::cell::RefCell;

use crate::eval::{Arg, Eval, EvalResult, Head, Value};
use crate::signature::Entry;
use crate::size::{NormalSize, Rel, SizeConstraint, SizeCtx};
use crate::syntax::{Annot, Polarity};

pub struct Conv<'e, 's> {
    pub ev: &'e Eval<'s>,
    /// Where constraints on metavariables go. Without a sink such
    /// comparisons fail.
    pub sink: Option<&'e RefCell<Vec<(SizeConstraint, SizeCtx)>>>,
}

impl<'e, 's> Conv<'e, 's> {
    pub fn new(ev: &'e Eval<'s>) -> Self {
        Conv { ev, sink: None }
    }

    pub fn with_sink(ev: &'e Eval<'s>, sink: &'e RefCell<Vec<(SizeConstraint, SizeCtx)>>) -> Self {
        Conv { ev, sink: Some(sink) }
    }

    fn size_rel(&self, sctx: &SizeCtx, a: &NormalSize, rel: Rel, b: &NormalSize) -> EvalResult<bool> {
        if a.has_meta() || b.has_meta() {
            return Ok(match self.sink {
                Some(sink) => {
                    sink.borrow_mut()
                        .push((SizeConstraint::new(a.clone(), rel, b.clone()), sctx.clone()));
                    true
                }
                None => false,
            });
        }
        // variables unknown to the context are rigid: compare syntactically
        let mut scoped = sctx.clone();
        for x in a.vars().chain(b.vars()) {
            if !scoped.is_declared(x) {
                scoped = scoped.declare(x);
            }
        }
        Ok(scoped.entails(a, rel, b)?)
    }

    fn fresh(&self, sctx: &SizeCtx, binder: &crate::syntax::Ident, dom: &Value) -> (Value, SizeCtx) {
        let x = binder.refresh();
        let v = Value::fresh_of(&x, dom);
        let sctx = if matches!(dom, Value::SizeU) {
            sctx.declare(&x)
        } else {
            sctx.clone()
        };
        (v, sctx)
    }

    pub fn conv(&self, sctx: &SizeCtx, a: &Value, b: &Value) -> EvalResult<bool> {
        if let (Some(x), Some(y)) = (a.as_size(), b.as_size()) {
            return self.size_rel(sctx, &x, Rel::Eq, &y);
        }
        match (a, b) {
            (Value::Set, Value::Set) | (Value::SizeU, Value::SizeU) => Ok(true),
            (Value::Pi(an1, d1, c1), Value::Pi(an2, d2, c2)) => {
                if an1 != an2 || !self.conv(sctx, d1, d2)? {
                    return Ok(false);
                }
                let (x, sctx2) = self.fresh(sctx, &c1.binder, d1);
                let b1 = self.ev.inst(c1, x.clone())?;
                let b2 = self.ev.inst(c2, x)?;
                self.conv(&sctx2, &b1, &b2)
            }
            (Value::Lam(c1), Value::Lam(c2)) => {
                let x = Value::var(&c1.binder.refresh());
                let b1 = self.ev.inst(c1, x.clone())?;
                let b2 = self.ev.inst(c2, x)?;
                self.conv(sctx, &b1, &b2)
            }
            (Value::Lam(c1), other) | (other, Value::Lam(c1)) => {
                let x = Value::var(&c1.binder.refresh());
                let b1 = self.ev.inst(c1, x.clone())?;
                let b2 = self.ev.apply_value(other.clone(), x, Annot::Relevant)?;
                self.conv(sctx, &b1, &b2)
            }
            (Value::App(h1, s1), Value::App(h2, s2)) => {
                if h1 == h2 && s1.len() == s2.len() && self.spines(sctx, s1, s2)? {
                    return Ok(true);
                }
                let a2 = self.ev.whnf(a.clone())?;
                let b2 = self.ev.whnf(b.clone())?;
                if unfolded(a, &a2) || unfolded(b, &b2) {
                    self.conv(sctx, &a2, &b2)
                } else {
                    Ok(false)
                }
            }
            (Value::App(Head::Def(_), _), _) | (_, Value::App(Head::Def(_), _)) => {
                let a2 = self.ev.whnf(a.clone())?;
                let b2 = self.ev.whnf(b.clone())?;
                if unfolded(a, &a2) || unfolded(b, &b2) {
                    self.conv(sctx, &a2, &b2)
                } else {
                    Ok(false)
                }
            }
            (Value::Case(c1), Value::Case(c2)) => Ok(std::sync::Arc::ptr_eq(&c1.expr, &c2.expr)
                && self.conv(sctx, &c1.scrut, &c2.scrut)?),
            _ => Ok(false),
        }
    }

    /// Pairwise conversion, skipping parametric entries.
    fn spines(&self, sctx: &SizeCtx, s1: &[Arg], s2: &[Arg]) -> EvalResult<bool> {
        for (x, y) in s1.iter().zip(s2) {
            if x.annot == Annot::Parametric || y.annot == Annot::Parametric {
                continue;
            }
            if x.thunk.same(&y.thunk) {
                continue;
            }
            let xv = self.ev.force(&x.thunk)?;
            let yv = self.ev.force(&y.thunk)?;
            if !self.conv(sctx, &xv, &yv)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `a ≤ b` on types.
    pub fn sub(&self, sctx: &SizeCtx, a: &Value, b: &Value) -> EvalResult<bool> {
        match (a, b) {
            (Value::App(Head::Data(d1), s1), Value::App(Head::Data(d2), s2))
                if d1 == d2 && s1.len() == s2.len() =>
            {
                let Some(Entry::Data(data)) = self.ev.sig.get(d1) else {
                    return self.conv(sctx, a, b);
                };
                let n = data.params.len();
                for (k, (x, y)) in s1.iter().zip(s2).enumerate() {
                    let xv = self.ev.force(&x.thunk)?;
                    let yv = self.ev.force(&y.thunk)?;
                    let ok = if k < n {
                        match data.params[k] {
                            Polarity::StrictPos | Polarity::Pos => self.sub(sctx, &xv, &yv)?,
                            Polarity::Neg => self.sub(sctx, &yv, &xv)?,
                            Polarity::Invariant => self.conv(sctx, &xv, &yv)?,
                            Polarity::Unused => true,
                        }
                    } else if k == n && data.sized {
                        match (xv.as_size(), yv.as_size()) {
                            (Some(i), Some(j)) if data.coinductive => self.size_rel(sctx, &j, Rel::Le, &i)?,
                            (Some(i), Some(j)) => self.size_rel(sctx, &i, Rel::Le, &j)?,
                            _ => false,
                        }
                    } else {
                        self.conv(sctx, &xv, &yv)?
                    };
                    if !ok {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (Value::Pi(an1, d1, c1), Value::Pi(an2, d2, c2)) => {
                if an1 != an2 || !self.sub(sctx, d2, d1)? {
                    return Ok(false);
                }
                let (x, sctx2) = self.fresh(sctx, &c2.binder, d2);
                let b1 = self.ev.inst(c1, x.clone())?;
                let b2 = self.ev.inst(c2, x)?;
                self.sub(&sctx2, &b1, &b2)
            }
            (Value::App(Head::Def(_), _), _) | (_, Value::App(Head::Def(_), _)) => {
                if self.conv(sctx, a, b)? {
                    return Ok(true);
                }
                let a2 = self.ev.whnf(a.clone())?;
                let b2 = self.ev.whnf(b.clone())?;
                if unfolded(a, &a2) || unfolded(b, &b2) {
                    self.sub(sctx, &a2, &b2)
                } else {
                    Ok(false)
                }
            }
            _ => self.conv(sctx, a, b),
        }
    }
}

fn unfolded(before: &Value, after: &Value) -> bool {
    !matches!((before, after), (Value::App(Head::Def(d1), s1), Value::App(Head::Def(d2), s2)) if d1 == d2 && s1.len() == s2.len())
}
