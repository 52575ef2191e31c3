//! Lazy weak-head evaluation with memoized thunks, clause matching with
//! erased sizes, quoting back to syntax and printing of runtime values.

use std::cell::{Cell, RefCell};
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

use crate::parser::pretty::pretty_size;
use crate::signature::{ElabClause, Entry, Signature};
use crate::size::{NormalSize, SizeError};
use crate::syntax::{Annot, Expr, Ident, Pattern, SizeExpr};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no clause of `{0}` matches")]
    StuckMatch(String),
    #[error("evaluation ran out of fuel")]
    FuelExhausted,
    #[error("ill-typed evaluation: {0}")]
    Type(String),
    #[error(transparent)]
    Size(#[from] SizeError),
}

pub type EvalResult<T> = Result<T, EvalError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Head {
    Var(Ident),
    /// A function, cofunction or let that has not unfolded.
    Def(Ident),
    Data(Ident),
    Con(Ident),
}

#[derive(Clone, Debug)]
pub struct Arg {
    pub thunk: Thunk,
    pub annot: Annot,
}

#[derive(Clone, Debug)]
pub struct Closure {
    pub env: Env,
    pub binder: Ident,
    pub body: Arc<Expr>,
}

#[derive(Clone, Debug)]
pub struct StuckCase {
    pub scrut: Value,
    pub env: Env,
    pub expr: Arc<Expr>,
}

#[derive(Clone, Debug)]
pub enum Value {
    Set,
    SizeU,
    Size(NormalSize),
    Pi(Annot, Rc<Value>, Closure),
    Lam(Closure),
    App(Head, Vec<Arg>),
    Case(Rc<StuckCase>),
}

impl Value {
    pub fn var(x: &Ident) -> Value {
        Value::App(Head::Var(x.clone()), Vec::new())
    }

    /// A fresh neutral of the given type.
    pub fn fresh_of(x: &Ident, ty: &Value) -> Value {
        match ty {
            Value::SizeU => Value::Size(NormalSize::var(x.clone())),
            _ => Value::var(x),
        }
    }

    pub fn as_size(&self) -> Option<NormalSize> {
        match self {
            Value::Size(s) => Some(s.clone()),
            Value::App(Head::Var(x), spine) if spine.is_empty() => Some(NormalSize::var(x.clone())),
            _ => None,
        }
    }
}

#[derive(Debug)]
enum ThunkState {
    Delayed(Env, Arc<Expr>),
    Forced(Value),
    Busy,
}

/// A suspended computation, evaluated at most once.
#[derive(Clone, Debug)]
pub struct Thunk(Rc<RefCell<ThunkState>>);

impl Thunk {
    pub fn ready(v: Value) -> Thunk {
        Thunk(Rc::new(RefCell::new(ThunkState::Forced(v))))
    }

    pub fn delay(env: Env, e: Arc<Expr>) -> Thunk {
        Thunk(Rc::new(RefCell::new(ThunkState::Delayed(env, e))))
    }

    pub fn is_forced(&self) -> bool {
        matches!(&*self.0.borrow(), ThunkState::Forced(_))
    }

    pub fn same(&self, other: &Thunk) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }
}

#[derive(Debug)]
struct EnvNode {
    name: Ident,
    val: Thunk,
    next: Env,
}

/// Persistent variable environment.
#[derive(Clone, Debug, Default)]
pub struct Env(Option<Rc<EnvNode>>);

impl Env {
    pub fn new() -> Env {
        Env(None)
    }

    pub fn extend(&self, name: &Ident, val: Thunk) -> Env {
        Env(Some(Rc::new(EnvNode {
            name: name.clone(),
            val,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &Ident) -> Option<&Thunk> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if node.name == *name {
                return Some(&node.val);
            }
            cur = &node.next.0;
        }
        None
    }
}

enum Match {
    Yes(Env),
    No,
    Stuck,
}

/// Evaluator over a fixed signature. Every unfolding of a definition costs
/// one unit of fuel.
pub struct Eval<'s> {
    pub sig: &'s Signature,
    fuel: Cell<u64>,
    unfolds: Cell<u64>,
    forces: Cell<u64>,
}

impl<'s> Eval<'s> {
    pub fn new(sig: &'s Signature, fuel: u64) -> Eval<'s> {
        Eval {
            sig,
            fuel: Cell::new(fuel),
            unfolds: Cell::new(0),
            forces: Cell::new(0),
        }
    }

    pub fn set_fuel(&self, fuel: u64) {
        self.fuel.set(fuel);
    }

    pub fn unfolds(&self) -> u64 {
        self.unfolds.get()
    }

    /// Number of thunks evaluated so far (memoized forcing is not counted).
    pub fn forces(&self) -> u64 {
        self.forces.get()
    }

    fn tick(&self) -> EvalResult<()> {
        let f = self.fuel.get();
        if f == 0 {
            return Err(EvalError::FuelExhausted);
        }
        self.fuel.set(f - 1);
        self.unfolds.set(self.unfolds.get() + 1);
        Ok(())
    }

    pub fn force(&self, t: &Thunk) -> EvalResult<Value> {
        let state = std::mem::replace(&mut *t.0.borrow_mut(), ThunkState::Busy);
        match state {
            ThunkState::Forced(v) => {
                *t.0.borrow_mut() = ThunkState::Forced(v.clone());
                Ok(v)
            }
            ThunkState::Busy => Err(EvalError::Type("value depends on itself".into())),
            ThunkState::Delayed(env, e) => {
                self.forces.set(self.forces.get() + 1);
                match self.eval(&env, &e) {
                    Ok(v) => {
                        *t.0.borrow_mut() = ThunkState::Forced(v.clone());
                        Ok(v)
                    }
                    Err(err) => {
                        *t.0.borrow_mut() = ThunkState::Delayed(env, e);
                        Err(err)
                    }
                }
            }
        }
    }

    pub fn delay(&self, env: &Env, e: &Arc<Expr>) -> EvalResult<Thunk> {
        match &**e {
            Expr::Var(x) => {
                if let Some(t) = env.lookup(x) {
                    return Ok(t.clone());
                }
                Ok(Thunk::ready(Value::var(x)))
            }
            Expr::Size(s) => Ok(Thunk::ready(Value::Size(self.eval_size(env, s)?))),
            _ => Ok(Thunk::delay(env.clone(), e.clone())),
        }
    }

    pub fn eval_size(&self, env: &Env, s: &SizeExpr) -> EvalResult<NormalSize> {
        Ok(match s {
            SizeExpr::Var(x) => match env.lookup(x) {
                Some(t) => {
                    let v = self.force(t)?;
                    v.as_size()
                        .ok_or_else(|| EvalError::Type(format!("`{}` is not a size", x)))?
                }
                None => NormalSize::var(x.clone()),
            },
            SizeExpr::Infty => NormalSize::infty(),
            SizeExpr::Meta(m) => NormalSize::meta(*m),
            SizeExpr::Succ(inner) => self.eval_size(env, inner)?.succ()?,
            SizeExpr::Max(a, b) => self.eval_size(env, a)?.max(&self.eval_size(env, b)?),
        })
    }

    pub fn eval(&self, env: &Env, e: &Arc<Expr>) -> EvalResult<Value> {
        match &**e {
            Expr::Var(x) => match env.lookup(x) {
                Some(t) => self.force(t),
                None => Ok(Value::var(x)),
            },
            Expr::Set => Ok(Value::Set),
            Expr::SizeU => Ok(Value::SizeU),
            Expr::Pi(annot, x, dom, cod) => Ok(Value::Pi(
                *annot,
                Rc::new(self.eval(env, dom)?),
                Closure {
                    env: env.clone(),
                    binder: x.clone(),
                    body: cod.clone(),
                },
            )),
            Expr::Lam(x, body) => Ok(Value::Lam(Closure {
                env: env.clone(),
                binder: x.clone(),
                body: body.clone(),
            })),
            Expr::App(f, a, annot) => {
                let fv = self.eval(env, f)?;
                let thunk = self.delay(env, a)?;
                self.apply(
                    fv,
                    Arg {
                        thunk,
                        annot: *annot,
                    },
                )
            }
            Expr::Def(d) => self.eval_global(d),
            Expr::Con(c) => Ok(Value::App(Head::Con(c.clone()), Vec::new())),
            Expr::Size(s) => Ok(Value::Size(self.eval_size(env, s)?)),
            Expr::CaseSize(s, j, body) => {
                let v = self.eval_size(env, s)?;
                let p = v.pred().unwrap_or(v);
                self.eval(&env.extend(j, Thunk::ready(Value::Size(p))), body)
            }
            Expr::CaseData(scrut, branches) => {
                let sv = self.eval(env, scrut)?;
                let st = Thunk::ready(sv.clone());
                for (p, rhs) in branches {
                    match self.match_pattern(p, &st, env.clone())? {
                        Match::Yes(env2) => return self.eval(&env2, &Arc::new(rhs.clone())),
                        Match::No => continue,
                        Match::Stuck => {
                            return Ok(Value::Case(Rc::new(StuckCase {
                                scrut: sv,
                                env: env.clone(),
                                expr: e.clone(),
                            })))
                        }
                    }
                }
                Err(EvalError::StuckMatch("case".into()))
            }
            Expr::Erased | Expr::Elided => Err(EvalError::Type("erased term evaluated".into())),
        }
    }

    fn eval_global(&self, d: &Ident) -> EvalResult<Value> {
        match self.sig.get(d) {
            Some(Entry::Data(_)) => Ok(Value::App(Head::Data(d.clone()), Vec::new())),
            Some(Entry::Con(_)) => Ok(Value::App(Head::Con(d.clone()), Vec::new())),
            Some(Entry::Let(l)) => {
                self.tick()?;
                self.eval(&Env::new(), &l.body.clone())
            }
            Some(Entry::Fun(_)) => self.unfold_fun(d, Vec::new()),
            None => Ok(Value::App(Head::Def(d.clone()), Vec::new())),
        }
    }

    /// Instantiate a closure with a value.
    pub fn inst(&self, cl: &Closure, v: Value) -> EvalResult<Value> {
        self.eval(&cl.env.extend(&cl.binder, Thunk::ready(v)), &cl.body)
    }

    pub fn apply(&self, f: Value, arg: Arg) -> EvalResult<Value> {
        match f {
            Value::Lam(cl) => self.eval(&cl.env.extend(&cl.binder, arg.thunk), &cl.body),
            Value::App(head, mut spine) => {
                spine.push(arg);
                match head {
                    Head::Def(d) => self.unfold_fun(&d, spine),
                    h => Ok(Value::App(h, spine)),
                }
            }
            Value::Case(_) => Err(EvalError::Type("stuck case applied".into())),
            _ => Err(EvalError::Type("value is not a function".into())),
        }
    }

    pub fn apply_value(&self, f: Value, v: Value, annot: Annot) -> EvalResult<Value> {
        self.apply(
            f,
            Arg {
                thunk: Thunk::ready(v),
                annot,
            },
        )
    }

    fn run_clauses(
        &self,
        d: &Ident,
        clauses: &[ElabClause],
        arity: usize,
        spine: Vec<Arg>,
    ) -> EvalResult<Value> {
        let (now, rest) = spine.split_at(arity);
        for cl in clauses {
            match self.match_patterns(&cl.lhs, now, Env::new())? {
                Match::Yes(env) => {
                    self.tick()?;
                    let mut v = self.eval(&env, &cl.rhs)?;
                    for a in rest {
                        v = self.apply(v, a.clone())?;
                    }
                    return Ok(v);
                }
                Match::No => continue,
                Match::Stuck => return Ok(Value::App(Head::Def(d.clone()), spine)),
            }
        }
        Err(EvalError::StuckMatch(d.text.to_string()))
    }

    /// Unfold an inductive function applied to enough arguments.
    fn unfold_fun(&self, d: &Ident, spine: Vec<Arg>) -> EvalResult<Value> {
        match self.sig.fun(d) {
            Some(f) if !f.coinductive && !f.clauses.is_empty() && spine.len() >= f.arity => {
                self.run_clauses(d, &f.clauses, f.arity, spine)
            }
            _ => Ok(Value::App(Head::Def(d.clone()), spine)),
        }
    }

    /// Weak-head normal form including unfolding of cofunctions.
    pub fn whnf(&self, v: Value) -> EvalResult<Value> {
        let mut v = v;
        loop {
            let next = match &v {
                Value::App(Head::Def(d), spine) => match self.sig.fun(d) {
                    Some(f) if f.coinductive && !f.clauses.is_empty() && spine.len() >= f.arity => {
                        self.run_clauses(d, &f.clauses, f.arity, spine.clone())?
                    }
                    _ => return Ok(v),
                },
                _ => return Ok(v),
            };
            v = next;
        }
    }

    fn match_patterns(&self, ps: &[Pattern], args: &[Arg], env: Env) -> EvalResult<Match> {
        let mut env = env;
        for (p, a) in ps.iter().zip(args) {
            match self.match_pattern(p, &a.thunk, env)? {
                Match::Yes(e) => env = e,
                other => return Ok(other),
            }
        }
        Ok(Match::Yes(env))
    }

    fn match_pattern(&self, p: &Pattern, t: &Thunk, env: Env) -> EvalResult<Match> {
        Ok(match p {
            Pattern::Var(x) => Match::Yes(env.extend(x, t.clone())),
            Pattern::Wild | Pattern::Dot(_) => Match::Yes(env),
            Pattern::SizeRel(_, child) => Match::Yes(env.extend(child, t.clone())),
            Pattern::Succ(child) => {
                let v = self.force(t)?;
                let bound = match v.as_size() {
                    Some(s) => Value::Size(s.pred().unwrap_or(s)),
                    None => v,
                };
                Match::Yes(env.extend(child, Thunk::ready(bound)))
            }
            Pattern::Con(c, ps) => {
                let v = self.force(t)?;
                let v = self.whnf(v)?;
                match v {
                    Value::App(Head::Con(c2), args) => {
                        if c2 != *c {
                            Match::No
                        } else if args.len() != ps.len() {
                            return Err(EvalError::Type(format!(
                                "constructor `{}` matched with {} arguments",
                                c,
                                args.len()
                            )));
                        } else {
                            self.match_patterns(ps, &args, env)?
                        }
                    }
                    Value::App(..) | Value::Case(_) => Match::Stuck,
                    _ => return Err(EvalError::Type(format!("`{}` matched against a non-constructor", c))),
                }
            }
        })
    }

    /// Read a value back into syntax. Binders are freshened.
    pub fn quote(&self, v: &Value) -> EvalResult<Expr> {
        Ok(match v {
            Value::Set => Expr::Set,
            Value::SizeU => Expr::SizeU,
            Value::Size(s) => Expr::Size(s.to_expr()),
            Value::Pi(annot, dom, cl) => {
                let x = cl.binder.refresh();
                let body = self.inst(cl, Value::fresh_of(&x, dom))?;
                Expr::Pi(
                    *annot,
                    x,
                    Arc::new(self.quote(dom)?),
                    Arc::new(self.quote(&body)?),
                )
            }
            Value::Lam(cl) => {
                let x = cl.binder.refresh();
                let body = self.inst(cl, Value::var(&x))?;
                Expr::Lam(x, Arc::new(self.quote(&body)?))
            }
            Value::App(head, spine) => {
                let mut e = match head {
                    Head::Var(x) => Expr::Var(x.clone()),
                    Head::Def(d) | Head::Data(d) => Expr::Def(d.clone()),
                    Head::Con(c) => Expr::Con(c.clone()),
                };
                for a in spine {
                    let av = self.force(&a.thunk)?;
                    e = Expr::app_annot(e, self.quote(&av)?, a.annot);
                }
                e
            }
            Value::Case(_) => Expr::Elided,
        })
    }

    fn is_coinductive(&self, v: &Value) -> bool {
        match v {
            Value::App(Head::Def(d), _) => self.sig.fun(d).is_some_and(|f| f.coinductive),
            Value::App(Head::Con(c), _) => self
                .sig
                .con(c)
                .and_then(|c| self.sig.data(&c.data))
                .is_some_and(|d| d.coinductive),
            _ => false,
        }
    }

    /// Print a runtime value. Constructor parameters are omitted and size
    /// or parametric arguments print as `_`. Coinductive layers below
    /// `depth` print as `…`.
    pub fn readback(&self, v: Value, opts: &ReadbackOptions) -> EvalResult<String> {
        let budget = Cell::new(opts.node_budget);
        self.show(v, opts.depth, opts, &budget)
    }

    fn show(&self, v: Value, depth: u32, opts: &ReadbackOptions, budget: &Cell<usize>) -> EvalResult<String> {
        if budget.get() == 0 {
            return Err(EvalError::FuelExhausted);
        }
        budget.set(budget.get() - 1);
        if depth == 0 && self.is_coinductive(&v) {
            return Ok("…".to_string());
        }
        let v = self.whnf(v)?;
        match v {
            Value::App(Head::Con(c), args) => {
                let entry = self
                    .sig
                    .con(&c)
                    .ok_or_else(|| EvalError::Type(format!("unknown constructor `{}`", c)))?;
                let co = self.sig.data(&entry.data).is_some_and(|d| d.coinductive);
                let inner = if co { depth.saturating_sub(1) } else { depth };
                let mut out = c.text.to_string();
                for a in args.iter().skip(entry.n_params) {
                    let av = self.force(&a.thunk)?;
                    let s = match (&av, a.annot) {
                        (Value::Size(s), _) if opts.print_sizes => pretty_size(&s.to_expr()),
                        (Value::Size(_), _) | (_, Annot::Parametric) => "_".to_string(),
                        _ => self.show(av, inner, opts, budget)?,
                    };
                    out.push(' ');
                    if s.contains(' ') {
                        out.push('(');
                        out.push_str(&s);
                        out.push(')');
                    } else {
                        out.push_str(&s);
                    }
                }
                Ok(out)
            }
            Value::App(Head::Def(d), _) => Err(EvalError::StuckMatch(d.text.to_string())),
            Value::Size(s) => Ok(if opts.print_sizes {
                pretty_size(&s.to_expr())
            } else {
                "_".to_string()
            }),
            Value::Set => Ok("Set".to_string()),
            Value::SizeU => Ok("Size".to_string()),
            Value::Lam(_) | Value::Pi(..) => Ok("<function>".to_string()),
            Value::App(Head::Var(x), _) => Err(EvalError::Type(format!("free variable `{}` at runtime", x))),
            Value::App(Head::Data(d), _) => Ok(d.text.to_string()),
            Value::Case(_) => Err(EvalError::StuckMatch("case".into())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReadbackOptions {
    pub depth: u32,
    pub print_sizes: bool,
    pub node_budget: usize,
}

impl Default for ReadbackOptions {
    fn default() -> Self {
        ReadbackOptions {
            depth: 3,
            print_sizes: false,
            node_budget: 100_000,
        }
    }
}
