//! Size expressions in canonical `base + offset` form, entailment of size
//! inequalities under hypotheses, and solving of size metavariables.
//!
//! Sizes are interpreted as ordinals up to a closure ordinal `#` with
//! `$ # = #`. A strict hypothesis `j < i` is read as `$ j <= i`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::syntax::{Ident, MetaId, SizeExpr};

/// Largest successor offset accepted anywhere.
pub const MAX_OFFSET: u32 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SizeError {
    #[error("size variable `{0}` is not in scope")]
    UnknownVariable(Ident),
    #[error("size variable `{0}` is already constrained")]
    ShadowedVariable(Ident),
    #[error("size expression exceeds the successor limit")]
    OffsetOverflow,
    #[error("size constraints are unsolvable: {0}")]
    Unsolvable(String),
    #[error("size metavariable ?{0} is unconstrained")]
    Ambiguous(MetaId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Infty,
    Var(Ident),
    Meta(MetaId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub base: Base,
    pub offset: u32,
}

/// Canonical size: the maximum of a non-empty set of atoms, at most one per
/// base. An infinite atom absorbs everything else.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalSize {
    atoms: Vec<Atom>,
}

impl NormalSize {
    pub fn infty() -> NormalSize {
        NormalSize {
            atoms: vec![Atom {
                base: Base::Infty,
                offset: 0,
            }],
        }
    }

    pub fn var(x: Ident) -> NormalSize {
        NormalSize::atom(Base::Var(x), 0)
    }

    pub fn meta(m: MetaId) -> NormalSize {
        NormalSize::atom(Base::Meta(m), 0)
    }

    pub fn atom(base: Base, offset: u32) -> NormalSize {
        if base == Base::Infty {
            return NormalSize::infty();
        }
        NormalSize {
            atoms: vec![Atom { base, offset }],
        }
    }

    fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> NormalSize {
        let mut best: BTreeMap<Base, u32> = BTreeMap::new();
        for a in atoms {
            if a.base == Base::Infty {
                return NormalSize::infty();
            }
            let e = best.entry(a.base).or_insert(0);
            *e = (*e).max(a.offset);
        }
        assert!(!best.is_empty(), "a size has at least one atom");
        NormalSize {
            atoms: best
                .into_iter()
                .map(|(base, offset)| Atom { base, offset })
                .collect(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_infty(&self) -> bool {
        self.atoms[0].base == Base::Infty
    }

    /// The single `(base, offset)` pair, unless this is a proper maximum.
    pub fn single(&self) -> Option<&Atom> {
        match self.atoms.as_slice() {
            [a] => Some(a),
            _ => None,
        }
    }

    /// `Some(x)` when this is exactly the variable `x` with offset zero.
    pub fn as_var(&self) -> Option<&Ident> {
        match self.single() {
            Some(Atom {
                base: Base::Var(x),
                offset: 0,
            }) => Some(x),
            _ => None,
        }
    }

    pub fn succ(&self) -> Result<NormalSize, SizeError> {
        self.add(1)
    }

    pub fn add(&self, n: u32) -> Result<NormalSize, SizeError> {
        if self.is_infty() {
            return Ok(self.clone());
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let offset = a.offset + n;
                if offset > MAX_OFFSET {
                    Err(SizeError::OffsetOverflow)
                } else {
                    Ok(Atom {
                        base: a.base.clone(),
                        offset,
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NormalSize { atoms })
    }

    /// Predecessor for successor-shaped sizes: `$ e` gives `e`, `#` gives `#`.
    pub fn pred(&self) -> Option<NormalSize> {
        if self.is_infty() {
            return Some(self.clone());
        }
        if self.atoms.iter().all(|a| a.offset >= 1) {
            Some(NormalSize {
                atoms: self
                    .atoms
                    .iter()
                    .map(|a| Atom {
                        base: a.base.clone(),
                        offset: a.offset - 1,
                    })
                    .collect(),
            })
        } else {
            None
        }
    }

    /// Least `s` with `self <= s + n`, i.e. every offset lowered by `n`
    /// without going below zero.
    fn lower_by(&self, n: u32) -> NormalSize {
        NormalSize::from_atoms(self.atoms.iter().map(|a| Atom {
            base: a.base.clone(),
            offset: a.offset.saturating_sub(n),
        }))
    }

    pub fn max(&self, other: &NormalSize) -> NormalSize {
        NormalSize::from_atoms(self.atoms.iter().chain(&other.atoms).cloned())
    }

    pub fn has_meta(&self) -> bool {
        self.atoms.iter().any(|a| matches!(a.base, Base::Meta(_)))
    }

    pub fn metas(&self) -> impl Iterator<Item = MetaId> + '_ {
        self.atoms.iter().filter_map(|a| match a.base {
            Base::Meta(m) => Some(m),
            _ => None,
        })
    }

    pub fn vars(&self) -> impl Iterator<Item = &Ident> + '_ {
        self.atoms.iter().filter_map(|a| match &a.base {
            Base::Var(x) => Some(x),
            _ => None,
        })
    }

    pub fn mentions(&self, x: &Ident) -> bool {
        self.vars().any(|y| y == x)
    }

    /// Replace solved metavariables.
    pub fn subst_metas(&self, sol: &BTreeMap<MetaId, NormalSize>) -> Result<NormalSize, SizeError> {
        let mut parts = Vec::new();
        for a in &self.atoms {
            match &a.base {
                Base::Meta(m) if sol.contains_key(m) => parts.push(sol[m].add(a.offset)?),
                _ => parts.push(NormalSize {
                    atoms: vec![a.clone()],
                }),
            }
        }
        Ok(parts
            .into_iter()
            .reduce(|x, y| x.max(&y))
            .expect("non-empty"))
    }

    /// Replace a variable by a size.
    pub fn subst_var(&self, x: &Ident, s: &NormalSize) -> Result<NormalSize, SizeError> {
        let mut parts = Vec::new();
        for a in &self.atoms {
            match &a.base {
                Base::Var(y) if y == x => parts.push(s.add(a.offset)?),
                _ => parts.push(NormalSize {
                    atoms: vec![a.clone()],
                }),
            }
        }
        Ok(parts
            .into_iter()
            .reduce(|x, y| x.max(&y))
            .expect("non-empty"))
    }

    /// Back to surface syntax.
    pub fn to_expr(&self) -> SizeExpr {
        let atom = |a: &Atom| {
            let mut e = match &a.base {
                Base::Infty => SizeExpr::Infty,
                Base::Var(x) => SizeExpr::Var(x.clone()),
                Base::Meta(m) => SizeExpr::Meta(*m),
            };
            for _ in 0..a.offset {
                e = e.succ();
            }
            e
        };
        let mut it = self.atoms.iter().map(atom);
        let first = it.next().expect("non-empty");
        it.fold(first, |acc, e| SizeExpr::Max(Box::new(acc), Box::new(e)))
    }
}

impl fmt::Display for NormalSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atom = |a: &Atom| {
            let base = match &a.base {
                Base::Infty => return "#".to_string(),
                Base::Var(x) => x.text.to_string(),
                Base::Meta(m) => format!("m{}", m),
            };
            if a.offset == 0 {
                base
            } else {
                format!("{}+{}", base, a.offset)
            }
        };
        match self.atoms.as_slice() {
            [a] => f.write_str(&atom(a)),
            atoms => {
                let parts: Vec<String> = atoms.iter().map(atom).collect();
                write!(f, "max({})", parts.join(", "))
            }
        }
    }
}

/// Canonicalize a size expression.
pub fn normalize(s: &SizeExpr) -> Result<NormalSize, SizeError> {
    match s {
        SizeExpr::Var(x) => Ok(NormalSize::var(x.clone())),
        SizeExpr::Infty => Ok(NormalSize::infty()),
        SizeExpr::Meta(m) => Ok(NormalSize::meta(*m)),
        SizeExpr::Succ(inner) => normalize(inner)?.succ(),
        SizeExpr::Max(a, b) => Ok(normalize(a)?.max(&normalize(b)?)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypothesis {
    pub child: Ident,
    pub parent: NormalSize,
    pub strict: bool,
}

/// Size variables in scope together with hypotheses `child < parent`
/// (or `child <= parent`). Extension returns a new context.
#[derive(Clone, Debug, Default)]
pub struct SizeCtx {
    vars: BTreeSet<Ident>,
    hyps: Vec<Hypothesis>,
}

impl SizeCtx {
    pub fn new() -> SizeCtx {
        SizeCtx::default()
    }

    /// Bring an unconstrained size variable into scope.
    pub fn declare(&self, x: &Ident) -> SizeCtx {
        let mut out = self.clone();
        out.vars.insert(x.clone());
        out
    }

    pub fn add_hypothesis(
        &self,
        child: &Ident,
        parent: NormalSize,
        strict: bool,
    ) -> Result<SizeCtx, SizeError> {
        if self.hyps.iter().any(|h| h.child == *child) {
            return Err(SizeError::ShadowedVariable(child.clone()));
        }
        if let Some(x) = parent.vars().find(|x| !self.vars.contains(*x)) {
            return Err(SizeError::UnknownVariable(x.clone()));
        }
        let mut out = self.declare(child);
        out.hyps.push(Hypothesis {
            child: child.clone(),
            parent,
            strict,
        });
        Ok(out)
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hyps
    }

    pub fn declared(&self) -> impl Iterator<Item = &Ident> + '_ {
        self.vars.iter()
    }

    pub fn is_declared(&self, x: &Ident) -> bool {
        self.vars.contains(x)
    }

    /// Union of two contexts that extend a common ancestor.
    pub fn merge(&self, other: &SizeCtx) -> SizeCtx {
        let mut out = self.clone();
        out.vars.extend(other.vars.iter().cloned());
        for h in &other.hyps {
            if !out.hyps.iter().any(|g| g.child == h.child) {
                out.hyps.push(h.clone());
            }
        }
        out
    }

    fn check_scope(&self, s: &NormalSize) -> Result<(), SizeError> {
        match s.vars().find(|x| !self.vars.contains(*x)) {
            Some(x) => Err(SizeError::UnknownVariable(x.clone())),
            None => Ok(()),
        }
    }

    /// Largest `d` with `x + d <= w` derivable from the hypotheses, for every
    /// reachable `w` (`d` may be negative: `x <= w + |d|`).
    fn upper_bounds(&self, x: &Ident) -> HashMap<Ident, i64> {
        let mut best: HashMap<Ident, i64> = HashMap::new();
        best.insert(x.clone(), 0);
        let mut work = vec![x.clone()];
        // hypotheses point from newer to older variables, so this terminates;
        // the step bound guards against malformed contexts
        let mut steps = 0usize;
        let limit = (self.hyps.len() + 1) * (self.hyps.len() + 1) * 4;
        while let Some(c) = work.pop() {
            steps += 1;
            if steps > limit {
                break;
            }
            let dc = best[&c];
            for h in self.hyps.iter().filter(|h| h.child == c) {
                let Some(Atom {
                    base: Base::Var(w),
                    offset: k,
                }) = h.parent.single()
                else {
                    continue;
                };
                let d = dc + i64::from(h.strict) - i64::from(*k);
                let entry = best.entry(w.clone()).or_insert(i64::MIN);
                if d > *entry {
                    *entry = d;
                    work.push(w.clone());
                }
            }
        }
        best
    }

    fn atom_leq(&self, a: &Atom, b: &NormalSize) -> bool {
        if b.is_infty() {
            return true;
        }
        match &a.base {
            Base::Infty => false,
            Base::Meta(m) => b.atoms.iter().any(|t| {
                t.base == Base::Meta(*m) && a.offset <= t.offset
            }),
            Base::Var(x) => {
                let ub = self.upper_bounds(x);
                b.atoms.iter().any(|t| match &t.base {
                    Base::Var(y) => ub
                        .get(y)
                        .is_some_and(|d| *d >= i64::from(a.offset) - i64::from(t.offset)),
                    _ => false,
                })
            }
        }
    }

    /// Decide `a rel b` for all valuations satisfying the hypotheses.
    pub fn entails(&self, a: &NormalSize, rel: Rel, b: &NormalSize) -> Result<bool, SizeError> {
        self.check_scope(a)?;
        self.check_scope(b)?;
        Ok(match rel {
            Rel::Le => a.atoms.iter().all(|t| self.atom_leq(t, b)),
            Rel::Lt => {
                let a1 = a.succ()?;
                a1.atoms.iter().all(|t| self.atom_leq(t, b))
            }
            Rel::Eq => {
                a.atoms.iter().all(|t| self.atom_leq(t, b))
                    && b.atoms.iter().all(|t| self.atom_leq(t, a))
            }
        })
    }
}

/// Free-standing form of [`SizeCtx::entails`].
pub fn entails(ctx: &SizeCtx, a: &NormalSize, rel: Rel, b: &NormalSize) -> Result<bool, SizeError> {
    ctx.entails(a, rel, b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeConstraint {
    pub lhs: NormalSize,
    pub rel: Rel,
    pub rhs: NormalSize,
}

impl SizeConstraint {
    pub fn new(lhs: NormalSize, rel: Rel, rhs: NormalSize) -> SizeConstraint {
        SizeConstraint { lhs, rel, rhs }
    }
}

impl fmt::Display for SizeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel, self.rhs)
    }
}

pub type MetaSolution = BTreeMap<MetaId, NormalSize>;

/// Solve the metavariables occurring in `cs`.
pub fn solve_metas(cs: &[SizeConstraint], ctx: &SizeCtx) -> Result<MetaSolution, SizeError> {
    let metas: BTreeSet<MetaId> = cs
        .iter()
        .flat_map(|c| c.lhs.metas().chain(c.rhs.metas()).collect::<Vec<_>>())
        .collect();
    solve_metas_for(&metas, cs, ctx)
}

/// The join of the maximal context variables `v` with `v + n <= bound`.
fn largest_var_below(ctx: &SizeCtx, bound: &NormalSize, n: u32) -> Result<Option<NormalSize>, SizeError> {
    let mut fits = Vec::new();
    for v in ctx.declared() {
        let v = NormalSize::var(v.clone());
        if ctx.entails(&v.add(n)?, Rel::Le, bound)? {
            fits.push(v);
        }
    }
    let mut best: Option<NormalSize> = None;
    for v in &fits {
        let mut dominated = false;
        for w in &fits {
            if ctx.entails(v, Rel::Lt, w)? {
                dominated = true;
                break;
            }
        }
        if !dominated {
            best = Some(match best {
                Some(b) => b.max(v),
                None => v.clone(),
            });
        }
    }
    Ok(best)
}

/// Solve `metas` against `cs`: equations first, then least solutions for
/// lower bounds, then upper bounds for whatever is left, and finally
/// re-verify every constraint by entailment.
pub fn solve_metas_for(
    metas: &BTreeSet<MetaId>,
    cs: &[SizeConstraint],
    ctx: &SizeCtx,
) -> Result<MetaSolution, SizeError> {
    let mut sol: MetaSolution = BTreeMap::new();
    let mentioned: BTreeSet<MetaId> = cs
        .iter()
        .flat_map(|c| c.lhs.metas().chain(c.rhs.metas()).collect::<Vec<_>>())
        .collect();
    if let Some(m) = metas.iter().find(|m| !mentioned.contains(m)) {
        return Err(SizeError::Ambiguous(*m));
    }

    // equations `m + n = s` with `s` meta-free
    loop {
        let mut progress = false;
        for c in cs.iter().filter(|c| c.rel == Rel::Eq) {
            let lhs = c.lhs.subst_metas(&sol)?;
            let rhs = c.rhs.subst_metas(&sol)?;
            for (l, r) in [(&lhs, &rhs), (&rhs, &lhs)] {
                if let Some(Atom {
                    base: Base::Meta(m),
                    offset: n,
                }) = l.single()
                {
                    if r.has_meta() || sol.contains_key(m) {
                        continue;
                    }
                    if !r.is_infty() && r.atoms.iter().any(|a| a.offset < *n) {
                        return Err(SizeError::Unsolvable(format!(
                            "m{} + {} = {} has no solution in size expressions",
                            m, n, r
                        )));
                    }
                    sol.insert(*m, r.lower_by(*n));
                    progress = true;
                }
            }
        }
        if !progress {
            break;
        }
    }

    // least solutions from lower bounds `l <= m + n`
    let lower: Vec<(NormalSize, MetaId, u32)> = cs
        .iter()
        .flat_map(|c| {
            let mut out = Vec::new();
            let lt = c.rel == Rel::Lt;
            let mut push = |l: &NormalSize, r: &NormalSize, strict: bool| {
                if let Some(Atom {
                    base: Base::Meta(m),
                    offset: n,
                }) = r.single()
                {
                    let l = if strict { l.succ() } else { Ok(l.clone()) };
                    if let Ok(l) = l {
                        out.push((l, *m, *n));
                    }
                }
            };
            push(&c.lhs, &c.rhs, lt);
            if c.rel == Rel::Eq {
                push(&c.rhs, &c.lhs, false);
            }
            out
        })
        .collect();
    let mut lows: BTreeMap<MetaId, NormalSize> = BTreeMap::new();
    let rounds = (metas.len() + mentioned.len() + 1) * (cs.len() + 1) + 1;
    let mut stable = false;
    for _ in 0..rounds {
        let mut changed = false;
        for (l, m, n) in &lower {
            if sol.contains_key(m) {
                continue;
            }
            // unassigned metas on the left contribute nothing yet
            let known: Vec<Atom> = l
                .atoms
                .iter()
                .filter(|a| match &a.base {
                    Base::Meta(k) => sol.contains_key(k) || lows.contains_key(k),
                    _ => true,
                })
                .cloned()
                .collect();
            if known.is_empty() {
                continue;
            }
            let mut current = sol.clone();
            current.extend(lows.iter().map(|(k, v)| (*k, v.clone())));
            let l = NormalSize::from_atoms(known).subst_metas(&current)?;
            if l.has_meta() {
                continue;
            }
            let candidate = l.lower_by(*n);
            let next = match lows.get(m) {
                Some(old) => old.max(&candidate),
                None => candidate,
            };
            if next.atoms.iter().any(|a| a.offset > MAX_OFFSET) {
                return Err(SizeError::OffsetOverflow);
            }
            if lows.get(m) != Some(&next) {
                lows.insert(*m, next);
                changed = true;
            }
        }
        if !changed {
            stable = true;
            break;
        }
    }
    if !stable {
        return Err(SizeError::Unsolvable(
            "lower bounds grow without limit".to_string(),
        ));
    }
    sol.extend(lows);

    // remaining metas: take an upper bound `m + n <= u`
    loop {
        let mut progress = false;
        for c in cs {
            let Some(Atom {
                base: Base::Meta(m),
                offset: n,
            }) = c.lhs.single()
            else {
                continue;
            };
            if sol.contains_key(m) {
                continue;
            }
            let r = c.rhs.subst_metas(&sol)?;
            if r.has_meta() {
                continue;
            }
            let n = if c.rel == Rel::Lt { n + 1 } else { *n };
            if r.is_infty() || r.atoms.iter().all(|a| a.offset >= n) {
                sol.insert(*m, r.lower_by(n));
                progress = true;
            } else if let Some(v) = largest_var_below(ctx, &r, n)? {
                sol.insert(*m, v);
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }

    for m in mentioned.iter().chain(metas) {
        if !sol.contains_key(m) {
            return Err(SizeError::Ambiguous(*m));
        }
    }

    for c in cs {
        let l = c.lhs.subst_metas(&sol)?;
        let r = c.rhs.subst_metas(&sol)?;
        if l.has_meta() || r.has_meta() || !ctx.entails(&l, c.rel, &r)? {
            return Err(SizeError::Unsolvable(format!(
                "{} fails as {} {} {}",
                c, l, c.rel, r
            )));
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &Ident) -> NormalSize {
        NormalSize::var(x.clone())
    }

    #[test]
    fn normalize_folds_successors() {
        let i = Ident::fresh("i");
        let s = SizeExpr::Var(i.clone()).succ().succ();
        assert_eq!(normalize(&s).unwrap(), NormalSize::atom(Base::Var(i), 2));
    }

    #[test]
    fn successor_of_infinity_is_infinity() {
        assert_eq!(
            normalize(&SizeExpr::Infty.succ()).unwrap(),
            NormalSize::infty()
        );
    }

    #[test]
    fn max_drops_dominated_atoms() {
        let i = Ident::fresh("i");
        let s = SizeExpr::Max(
            Box::new(SizeExpr::Var(i.clone()).succ()),
            Box::new(SizeExpr::Var(i.clone())),
        );
        assert_eq!(normalize(&s).unwrap(), NormalSize::atom(Base::Var(i), 1));
    }

    #[test]
    fn offset_cap_is_enforced() {
        let i = Ident::fresh("i");
        let s = NormalSize::atom(Base::Var(i), MAX_OFFSET);
        assert_eq!(s.succ(), Err(SizeError::OffsetOverflow));
    }

    #[test]
    fn strict_hypothesis_gives_successor_bound() {
        let (i, j) = (Ident::fresh("i"), Ident::fresh("j"));
        let ctx = SizeCtx::new()
            .declare(&i)
            .add_hypothesis(&j, v(&i), true)
            .unwrap();
        assert!(ctx.entails(&v(&j).succ().unwrap(), Rel::Le, &v(&i)).unwrap());
        assert!(ctx.entails(&v(&j), Rel::Lt, &v(&i)).unwrap());
        assert!(!ctx.entails(&v(&i), Rel::Le, &v(&j)).unwrap());
    }

    #[test]
    fn reflexivity_in_empty_context() {
        let i = Ident::fresh("i");
        let ctx = SizeCtx::new().declare(&i);
        assert!(ctx.entails(&v(&i), Rel::Le, &v(&i)).unwrap());
    }

    #[test]
    fn max_on_the_right_is_disjunctive() {
        let (i, j, k) = (Ident::fresh("i"), Ident::fresh("j"), Ident::fresh("k"));
        let ctx = SizeCtx::new()
            .declare(&i)
            .add_hypothesis(&j, v(&i), true)
            .unwrap()
            .add_hypothesis(&k, v(&i), true)
            .unwrap();
        assert!(!ctx.entails(&v(&i), Rel::Le, &v(&j).max(&v(&k))).unwrap());
        assert!(ctx.entails(&v(&j), Rel::Le, &v(&j).max(&v(&k))).unwrap());
        assert!(ctx
            .entails(&v(&j).max(&v(&k)), Rel::Lt, &v(&i))
            .unwrap());
    }

    #[test]
    fn infinity_is_the_top() {
        let (i, j) = (Ident::fresh("i"), Ident::fresh("j"));
        let ctx = SizeCtx::new()
            .declare(&i)
            .add_hypothesis(&j, NormalSize::infty(), true)
            .unwrap();
        assert!(ctx.entails(&v(&j), Rel::Le, &NormalSize::infty()).unwrap());
        assert!(!ctx.entails(&NormalSize::infty(), Rel::Le, &v(&j)).unwrap());
        assert!(ctx
            .entails(&NormalSize::infty(), Rel::Lt, &NormalSize::infty())
            .unwrap());
    }

    #[test]
    fn offsets_accumulate_along_chains() {
        let (i, j, k) = (Ident::fresh("i"), Ident::fresh("j"), Ident::fresh("k"));
        let ctx = SizeCtx::new()
            .declare(&i)
            .add_hypothesis(&j, v(&i), true)
            .unwrap()
            .add_hypothesis(&k, v(&j), true)
            .unwrap();
        let kk = v(&k).add(2).unwrap();
        assert!(ctx.entails(&kk, Rel::Le, &v(&i)).unwrap());
        assert!(!ctx.entails(&v(&k).add(3).unwrap(), Rel::Le, &v(&i)).unwrap());
    }

    #[test]
    fn unknown_and_shadowed_variables() {
        let (i, j) = (Ident::fresh("i"), Ident::fresh("j"));
        let ctx = SizeCtx::new().declare(&i);
        assert_eq!(
            ctx.entails(&v(&j), Rel::Le, &v(&i)),
            Err(SizeError::UnknownVariable(j.clone()))
        );
        let ctx = ctx.add_hypothesis(&j, v(&i), true).unwrap();
        assert_eq!(
            ctx.add_hypothesis(&j, v(&i), true).unwrap_err(),
            SizeError::ShadowedVariable(j)
        );
    }

    #[test]
    fn direct_meta_assignment() {
        let i = Ident::fresh("i");
        let ctx = SizeCtx::new().declare(&i);
        let cs = [SizeConstraint::new(NormalSize::meta(0), Rel::Eq, v(&i))];
        let sol = solve_metas(&cs, &ctx).unwrap();
        assert_eq!(sol[&0], v(&i));
    }

    #[test]
    fn least_solution_between_bounds() {
        let (i, j) = (Ident::fresh("i"), Ident::fresh("j"));
        let ctx = SizeCtx::new()
            .declare(&i)
            .add_hypothesis(&j, v(&i), true)
            .unwrap();
        let cs = [
            SizeConstraint::new(NormalSize::meta(0), Rel::Le, v(&i)),
            SizeConstraint::new(v(&j).succ().unwrap(), Rel::Le, NormalSize::meta(0)),
        ];
        let sol = solve_metas(&cs, &ctx).unwrap();
        assert_eq!(sol[&0], NormalSize::atom(Base::Var(j), 1));
    }

    #[test]
    fn upper_bound_alone_picks_largest_smaller_variable() {
        let (i, j, k) = (Ident::fresh("i"), Ident::fresh("j"), Ident::fresh("k"));
        let ctx = SizeCtx::new()
            .declare(&i)
            .add_hypothesis(&j, v(&i), true)
            .unwrap()
            .add_hypothesis(&k, v(&j), true)
            .unwrap();
        let cs = [SizeConstraint::new(NormalSize::meta(0).succ().unwrap(), Rel::Le, v(&i))];
        assert_eq!(solve_metas(&cs, &ctx).unwrap()[&0], v(&j));
        let cs = [SizeConstraint::new(NormalSize::meta(0), Rel::Lt, v(&k))];
        assert!(solve_metas(&cs, &ctx).is_err());
    }

    #[test]
    fn double_successor_of_plain_variable_is_unsolvable() {
        let j2 = Ident::fresh("j2");
        let ctx = SizeCtx::new().declare(&j2);
        let cs = [SizeConstraint::new(
            NormalSize::meta(0).add(2).unwrap(),
            Rel::Eq,
            v(&j2),
        )];
        assert!(matches!(
            solve_metas(&cs, &ctx),
            Err(SizeError::Unsolvable(_))
        ));
    }

    #[test]
    fn unconstrained_meta_is_ambiguous() {
        let ctx = SizeCtx::new();
        let metas: BTreeSet<MetaId> = [3].into_iter().collect();
        assert_eq!(
            solve_metas_for(&metas, &[], &ctx),
            Err(SizeError::Ambiguous(3))
        );
    }

    #[test]
    fn chained_lower_bounds_propagate() {
        let (i, j) = (Ident::fresh("i"), Ident::fresh("j"));
        let ctx = SizeCtx::new()
            .declare(&i)
            .add_hypothesis(&j, v(&i), true)
            .unwrap();
        // $ m1 <= m0,  j <= m1,  m0 <= i
        let cs = [
            SizeConstraint::new(NormalSize::meta(1).succ().unwrap(), Rel::Le, NormalSize::meta(0)),
            SizeConstraint::new(v(&j), Rel::Le, NormalSize::meta(1)),
            SizeConstraint::new(NormalSize::meta(0), Rel::Le, v(&i)),
        ];
        let sol = solve_metas(&cs, &ctx).unwrap();
        assert_eq!(sol[&1], v(&j));
        assert_eq!(sol[&0], NormalSize::atom(Base::Var(j), 1));
    }

    #[test]
    fn constraints_print_stably() {
        let i = Ident::fresh("i");
        let c = SizeConstraint::new(NormalSize::meta(1), Rel::Le, v(&i).succ().unwrap());
        assert_eq!(c.to_string(), "m1 <= i+1");
    }
}
