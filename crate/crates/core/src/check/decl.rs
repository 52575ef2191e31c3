//! Checking of data, fun and let declarations.

use std::cell::{Cell, RefCell};
use std::sync::Arc;

use super::pattern::PatState;
use super::{Ctx, Current, Mode, Tc};
use crate::diagnostic::{Code, Diagnostic};
use crate::eval::{Head, Value};
use crate::parser::pretty::{pretty, pretty_pattern};
use crate::signature::{
    ConEntry, DataEntry, ElabClause, Entry, FunEntry, LetEntry, Signature, Totality, TotalityReport,
};
use crate::size::SizeConstraint;
use crate::syntax::{Annot, Clause, DataDecl, DeclKind, Declaration, Expr, FunDecl, Ident, LetDecl, Pattern, Polarity, Pos, SizeExpr};
use crate::totality::{admissibility_check, polarity_of, termination_check, ClauseShape, DefKind, TotalityError};

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Bound on definition unfoldings per type comparison.
    pub unfold_fuel: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { unfold_fuel: 10_000 }
    }
}

/// Size constraints gathered while checking one clause.
#[derive(Clone, Debug)]
pub struct ClauseConstraints {
    pub fun: Ident,
    pub clause: usize,
    pub constraints: Vec<SizeConstraint>,
}

#[derive(Clone, Debug)]
pub struct Checked {
    pub sig: Signature,
    pub constraints: Vec<ClauseConstraints>,
    pub reports: Vec<(Ident, TotalityReport)>,
}

pub fn check_program(decls: &[Declaration], opts: &CheckOptions) -> Result<Checked, Diagnostic> {
    let mut out = Checked {
        sig: Signature::new(),
        constraints: Vec::new(),
        reports: Vec::new(),
    };
    for d in decls {
        if out.sig.get(d.name()).is_some() {
            return Err(Diagnostic::new(
                Code::Duplicate,
                d.pos,
                format!("`{}` is already defined", d.name()),
            ));
        }
        match &d.kind {
            DeclKind::Data(x) => check_data(&mut out.sig, x, d.pos, opts)?,
            DeclKind::Fun(x) => check_fun(&mut out, x, d.pos, opts)?,
            DeclKind::Let(x) => check_let(&mut out, x, d.pos, opts)?,
        }
    }
    Ok(out)
}

fn telescope(e: &Expr) -> (Vec<(Annot, Ident, Arc<Expr>)>, &Expr) {
    let mut doms = Vec::new();
    let mut cur = e;
    while let Expr::Pi(a, x, d, c) = cur {
        doms.push((*a, x.clone(), d.clone()));
        cur = c;
    }
    (doms, cur)
}

/// Every application of `d` inside `e` carries exactly `i` at `index`.
fn occurrences_at(e: &Expr, d: &Ident, index: usize, i: &Ident) -> bool {
    match e {
        Expr::App(..) => {
            let (head, args) = e.spine();
            let own = match head {
                Expr::Def(h) if h == d => args
                    .get(index)
                    .is_some_and(|(a, _)| crate::totality::is_size_var(a, i)),
                _ => occurrences_at(head, d, index, i),
            };
            own && args.iter().all(|(a, _)| occurrences_at(a, d, index, i))
        }
        Expr::Def(h) => h != d,
        Expr::Pi(_, _, a, b) => occurrences_at(a, d, index, i) && occurrences_at(b, d, index, i),
        Expr::Lam(_, b) => occurrences_at(b, d, index, i),
        _ => true,
    }
}

fn check_data(sig: &mut Signature, d: &DataDecl, pos: Pos, opts: &CheckOptions) -> Result<(), Diagnostic> {
    let (ctx, params, index_ty) = {
        let tc = Tc::new(sig, opts.unfold_fuel, pos);
        let mut ctx = Ctx::new();
        let mut params = Vec::new();
        for p in &d.params {
            let ty2 = tc.check(&ctx, &p.ty, &Value::Set, Mode::Irrelevant)?;
            let tv = tc.eval(&ctx, &ty2)?;
            ctx = ctx.bind(&p.name, tv, Annot::Relevant).0;
            params.push(ty2);
        }
        let index_ty = tc.check(&ctx, &d.index_ty, &Value::Set, Mode::Irrelevant)?;
        (ctx, params, index_ty)
    };
    let (indices, _) = telescope(&index_ty);
    if d.sized && !matches!(indices.first(), Some((_, _, t)) if matches!(**t, Expr::SizeU)) {
        return Err(Diagnostic::new(
            Code::SizeIndexShape,
            pos,
            format!("the first index of sized type `{}` must be `Size`", d.name),
        ));
    }
    let wrap = |body: Expr, annot: Annot| {
        d.params.iter().zip(&params).rev().fold(body, |acc, (p, t)| {
            Expr::Pi(annot, p.name.clone(), Arc::new(t.clone()), Arc::new(acc))
        })
    };
    let n = d.params.len();
    let mut entry = DataEntry {
        name: d.name.clone(),
        sized: d.sized,
        coinductive: d.coinductive,
        params: d.params.iter().map(|p| p.polarity).collect(),
        n_indices: indices.len(),
        ty: Arc::new(wrap(index_ty.clone(), Annot::Relevant)),
        constructors: Vec::new(),
    };
    sig.insert(d.name.clone(), Entry::Data(entry.clone()));

    let mut cons = Vec::new();
    for (c, cty, cpos) in &d.constructors {
        if sig.get(c).is_some() || cons.iter().any(|x: &ConEntry| x.name == *c) {
            return Err(Diagnostic::new(Code::Duplicate, *cpos, format!("`{}` is already defined", c)));
        }
        let tc = Tc::new(sig, opts.unfold_fuel, *cpos);
        let cty2 = tc.check(&ctx, cty, &Value::Set, Mode::Irrelevant)?;
        let fail = |code: Code, msg: String| Err(Diagnostic::new(code, *cpos, msg));
        let (doms, target) = telescope(&cty2);
        let (head, args) = target.spine();
        if !matches!(head, Expr::Def(h) if *h == d.name) || args.len() != n + indices.len() {
            return fail(
                Code::TypeMismatch,
                format!("constructor `{}` must build `{}`, not `{}`", c, d.name, pretty(target)),
            );
        }
        for (k, p) in d.params.iter().enumerate() {
            if !matches!(args[k].0, Expr::Var(x) if *x == p.name) {
                return fail(
                    Code::TypeMismatch,
                    format!("constructor `{}` must use the parameters of `{}` unchanged", c, d.name),
                );
            }
        }
        let mut rest = &doms[..];
        if d.sized {
            let Some((_, i, first)) = doms.first() else {
                return fail(
                    Code::SizeIndexShape,
                    format!("constructor `{}` must first quantify over a size", c),
                );
            };
            if !matches!(**first, Expr::SizeU) {
                return fail(
                    Code::SizeIndexShape,
                    format!("constructor `{}` must first quantify over a size", c),
                );
            }
            if args[n].0.as_size() != Some(SizeExpr::Var(i.clone()).succ()) {
                return fail(
                    Code::SizeIndexShape,
                    format!("constructor `{}` must target size `$ {}`, found `{}`", c, i, pretty(args[n].0)),
                );
            }
            rest = &doms[1..];
            for (_, _, t) in rest {
                if !occurrences_at(t, &d.name, n, i) {
                    return fail(
                        Code::SizeIndexShape,
                        format!("recursive occurrence of `{}` in `{}` must have size `{}`", d.name, pretty(t), i),
                    );
                }
                let bound = if d.coinductive { Polarity::Neg } else { Polarity::Pos };
                if !polarity_of(i, t, sig).leq(bound) {
                    return fail(
                        Code::SizeMonotonicity,
                        format!(
                            "argument `{}` of `{}` is not {} in `{}`",
                            pretty(t),
                            c,
                            if d.coinductive { "antitone" } else { "monotone" },
                            i
                        ),
                    );
                }
            }
        }
        for (_, _, t) in rest {
            if !polarity_of(&d.name, t, sig).leq(Polarity::StrictPos) {
                return fail(
                    Code::Positivity,
                    format!("`{}` occurs not strictly positively in `{}`", d.name, pretty(t)),
                );
            }
            for p in &d.params {
                if !polarity_of(&p.name, t, sig).leq(p.polarity) {
                    return fail(
                        Code::Positivity,
                        format!(
                            "parameter `{}` declared `{}` occurs with polarity `{}` in `{}`",
                            p.name,
                            p.polarity,
                            polarity_of(&p.name, t, sig),
                            pretty(t)
                        ),
                    );
                }
            }
        }
        cons.push(ConEntry {
            name: c.clone(),
            data: d.name.clone(),
            ty: Arc::new(wrap(cty2, Annot::Parametric)),
            n_params: n,
            arity: n + doms.len(),
        });
    }
    entry.constructors = cons.iter().map(|c| c.name.clone()).collect();
    sig.insert(d.name.clone(), Entry::Data(entry));
    for c in cons {
        sig.insert(c.name.clone(), Entry::Con(c));
    }
    Ok(())
}

/// The ultimate codomain of a function type is a coinductive data type.
fn coinductive_result(tc: &Tc, ty: &Value) -> Result<bool, Diagnostic> {
    let mut cur = tc.whnf(ty.clone())?;
    while let Value::Pi(_, dom, cl) = &cur {
        let x = Value::fresh_of(&cl.binder.refresh(), dom);
        cur = tc.whnf(tc.inst(cl, x)?)?;
    }
    Ok(matches!(&cur, Value::App(Head::Data(d), _) if tc.sig.data(d).is_some_and(|e| e.coinductive)))
}

fn check_fun(out: &mut Checked, f: &FunDecl, pos: Pos, opts: &CheckOptions) -> Result<(), Diagnostic> {
    let (ty2, tyv_ok) = {
        let tc = Tc::new(&out.sig, opts.unfold_fuel, pos);
        let ty2 = tc.check(&Ctx::new(), &f.ty, &Value::Set, Mode::Irrelevant)?;
        let tyv = tc.eval(&Ctx::new(), &ty2)?;
        let ok = !f.coinductive || coinductive_result(&tc, &tyv)?;
        (ty2, ok)
    };
    if !tyv_ok {
        return Err(Diagnostic::new(
            Code::Productivity,
            pos,
            format!("cofun `{}` must return a coinductive type", f.name),
        ));
    }
    let (doms, _) = telescope(&ty2);
    let size_param = doms.iter().position(|(_, _, t)| matches!(**t, Expr::SizeU));
    let arity = f.clauses.first().map_or(0, |c| c.lhs.len());
    let mut entry = FunEntry {
        name: f.name.clone(),
        coinductive: f.coinductive,
        ty: Arc::new(ty2.clone()),
        clauses: Vec::new(),
        arity,
        size_param,
        totality: Totality::UnderCheck,
    };
    out.sig.insert(f.name.clone(), Entry::Fun(entry.clone()));

    let mut tc = Tc::new(&out.sig, opts.unfold_fuel, pos);
    tc.current = Some(Current {
        name: f.name.clone(),
        size_param,
        clause: Cell::new(0),
        clause_size: RefCell::new(None),
    });
    let tyv = tc.eval(&Ctx::new(), &ty2)?;
    let mut shapes = Vec::new();
    let mut clauses = Vec::new();
    let mut constraints = Vec::new();
    for (k, cl) in f.clauses.iter().enumerate() {
        tc.pos.set(cl.pos);
        if cl.lhs.len() != arity {
            return Err(tc.err(
                Code::TypeMismatch,
                format!("clauses of `{}` have different numbers of patterns", f.name),
            ));
        }
        let (ec, shape, cs) = check_clause(&tc, f, k, cl, &tyv)?;
        clauses.push(ec);
        shapes.push(shape);
        constraints.push(ClauseConstraints {
            fun: f.name.clone(),
            clause: k,
            constraints: cs,
        });
    }
    let calls = tc.calls.take();
    tc.pos.set(pos);
    let admissible = || -> Result<(), String> {
        let Some(p) = size_param else { return Ok(()) };
        let (doms, _) = telescope(&ty2);
        let i = &doms[p].1;
        let mut rest = &ty2;
        for _ in 0..=p {
            if let Expr::Pi(_, _, _, c) = rest {
                rest = c;
            }
        }
        admissibility_check(rest, i, DefKind::Fun, tc.sig)
    };
    let admissible: &dyn Fn() -> Result<(), String> = if f.coinductive { &|| Ok(()) } else { &admissible };
    let report = termination_check(&f.name, size_param, &shapes, &calls, admissible).map_err(|e| match e {
        TotalityError::Unjustified(bad) => tc.err(
            if f.coinductive { Code::Productivity } else { Code::Termination },
            format!(
                "cannot establish {} of `{}`: {}",
                if f.coinductive { "productivity" } else { "termination" },
                f.name,
                bad.join("; ")
            ),
        ),
        TotalityError::Inadmissible(msg) => tc.err(
            Code::Admissibility,
            format!("type of `{}` is not admissible: {}", f.name, msg),
        ),
    })?;
    drop(tc);
    entry.clauses = clauses;
    entry.totality = Totality::Checked(report.clone());
    out.sig.insert(f.name.clone(), Entry::Fun(entry));
    out.reports.push((f.name.clone(), report));
    out.constraints.extend(constraints);
    Ok(())
}

fn check_clause(
    tc: &Tc,
    f: &FunDecl,
    k: usize,
    cl: &Clause,
    fun_ty: &Value,
) -> Result<(ElabClause, ClauseShape, Vec<SizeConstraint>), Diagnostic> {
    let cur = tc.current.as_ref().expect("checking a function");
    cur.clause.set(k);
    *cur.clause_size.borrow_mut() = None;
    tc.sink.borrow_mut().clear();
    tc.metas.borrow_mut().clear();
    tc.ev.set_fuel(tc.fuel);
    let mut st = PatState::new(Ctx::new());
    let mut shape = ClauseShape::default();
    let mut ty = fun_ty.clone();
    for (p_idx, p) in cl.lhs.iter().enumerate() {
        st.top = p_idx;
        let Value::Pi(annot, dom, clo) = tc.whnf(ty)? else {
            return Err(tc.err(Code::TypeMismatch, format!("too many patterns for `{}`", f.name)));
        };
        let is_size = matches!(*dom, Value::SizeU);
        let v = match p {
            Pattern::Succ(j) => {
                if !f.coinductive {
                    return Err(tc.err(
                        Code::IllegalSizeRefinement,
                        format!("`{}` is not a cofun and cannot match on `$ {}`", f.name, j),
                    ));
                }
                if !is_size {
                    return Err(tc.err(Code::TypeMismatch, format!("`$ {}` matches a non-size argument", j)));
                }
                let i = clo.binder.refresh();
                let rest = tc.inst(&clo, Value::Size(crate::size::NormalSize::var(i.clone())))?;
                let t = tc.quote(&rest)?;
                admissibility_check(&t, &i, DefKind::Cofun, tc.sig).map_err(|msg| {
                    tc.err(Code::Admissibility, format!("cannot match `$ {}` in `{}`: {}", j, f.name, msg))
                })?;
                let (ctx, _) = st.ctx.bind(j, Value::SizeU, annot);
                st.ctx = ctx;
                Value::Size(crate::size::NormalSize::var(j.clone()).succ().map_err(|e| tc.ev_err(e.into()))?)
            }
            Pattern::Dot(_) if is_size => {
                return Err(tc.err(
                    Code::IllegalSizeRefinement,
                    format!(
                        "size parameter refined by dot pattern `{}`; use size patterns instead",
                        pretty_pattern(p)
                    ),
                ))
            }
            _ => tc.elab_pattern(&mut st, p, &dom, annot, 0)?,
        };
        if Some(p_idx) == cur.size_param {
            shape.size = v.as_size();
        }
        ty = tc.inst(&clo, v)?;
    }
    tc.discharge_dots(&mut st)?;
    shape.inside = st.inside.clone();
    *cur.clause_size.borrow_mut() = shape.size.clone();
    let first_call = tc.calls.borrow().len();
    let rhs = tc.check(&st.ctx, &cl.rhs, &ty, Mode::Relevant)?;
    let (rhs, sol, cs) = tc.solve_metas(&st.ctx.sizes, rhs)?;
    if !sol.is_empty() {
        for c in tc.calls.borrow_mut()[first_call..].iter_mut() {
            if let Some(s) = &c.size {
                c.size = Some(s.subst_metas(&sol).map_err(|e| tc.ev_err(e.into()))?);
            }
            c.args = c
                .args
                .iter()
                .map(|a| a.map_metas(&|m| sol.get(&m).map(|s| s.to_expr())))
                .collect();
        }
    }
    Ok((
        ElabClause {
            lhs: cl.lhs.clone(),
            rhs: Arc::new(rhs),
        },
        shape,
        cs,
    ))
}

fn check_let(out: &mut Checked, l: &LetDecl, pos: Pos, opts: &CheckOptions) -> Result<(), Diagnostic> {
    let (ty2, body) = {
        let tc = Tc::new(&out.sig, opts.unfold_fuel, pos);
        let ty2 = tc.check(&Ctx::new(), &l.ty, &Value::Set, Mode::Irrelevant)?;
        tc.metas.borrow_mut().clear();
        let tyv = tc.eval(&Ctx::new(), &ty2)?;
        let body = tc.check(&Ctx::new(), &l.body, &tyv, Mode::Relevant)?;
        let (body, _, _) = tc.solve_metas(&Default::default(), body)?;
        (ty2, body)
    };
    out.sig.insert(
        l.name.clone(),
        Entry::Let(LetEntry {
            name: l.name.clone(),
            ty: Arc::new(ty2),
            body: Arc::new(body),
            eval: l.eval,
        }),
    );
    Ok(())
}
