//! Abstract syntax: identifiers, size expressions, terms, patterns and
//! declarations, plus substitution and free-variable computation.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

static NEXT_UID: AtomicU32 = AtomicU32::new(1);

/// A resolved name. Equality and hashing use only the `uid`; `text` is for
/// display.
#[derive(Clone)]
pub struct Ident {
    pub text: Arc<str>,
    pub uid: u32,
}

impl Ident {
    /// Create an identifier with a fresh, globally unique uid.
    pub fn fresh(text: &str) -> Ident {
        Ident {
            text: Arc::from(text),
            uid: NEXT_UID.fetch_add(1, Ordering::Relaxed),
        }
    }

    /// A fresh identifier carrying the same display text.
    pub fn refresh(&self) -> Ident {
        Ident {
            text: self.text.clone(),
            uid: NEXT_UID.fetch_add(1, Ordering::Relaxed),
        }
    }

    pub fn is_anonymous(&self) -> bool {
        &*self.text == "_"
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.uid == other.uid
    }
}
impl Eq for Ident {}

impl Hash for Ident {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.uid.hash(state)
    }
}

impl PartialOrd for Ident {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ident {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.uid.cmp(&other.uid)
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.text, self.uid)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Variance of a type in one of its variables.
///
/// Ordered as a lattice: `Unused ⊑ StrictPos ⊑ Pos ⊑ Invariant` and
/// `Unused ⊑ Neg ⊑ Invariant`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    StrictPos,
    Pos,
    Neg,
    Invariant,
    Unused,
}

impl Polarity {
    pub const ALL: [Polarity; 5] = [
        Polarity::StrictPos,
        Polarity::Pos,
        Polarity::Neg,
        Polarity::Invariant,
        Polarity::Unused,
    ];

    /// Polarity of a variable in `F(G(x))` where `F` has polarity `self` in
    /// its argument and `G(x)` has polarity `inner` in `x`.
    pub fn compose(self, inner: Polarity) -> Polarity {
        use Polarity::*;
        match (self, inner) {
            (Unused, _) | (_, Unused) => Unused,
            (Invariant, _) | (_, Invariant) => Invariant,
            (StrictPos, p) | (p, StrictPos) => p,
            (Pos, Pos) | (Neg, Neg) => Pos,
            (Pos, Neg) | (Neg, Pos) => Neg,
        }
    }

    /// Least upper bound.
    pub fn join(self, other: Polarity) -> Polarity {
        use Polarity::*;
        match (self, other) {
            (Unused, p) | (p, Unused) => p,
            (a, b) if a == b => a,
            (StrictPos, Pos) | (Pos, StrictPos) => Pos,
            _ => Invariant,
        }
    }

    /// Lattice order `self ⊑ other`.
    pub fn leq(self, other: Polarity) -> bool {
        self.join(other) == other
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::StrictPos => "++",
            Polarity::Pos => "+",
            Polarity::Neg => "-",
            Polarity::Invariant => "^",
            Polarity::Unused => ".",
        })
    }
}

/// Whether a binder's argument may influence computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Annot {
    Relevant,
    Parametric,
}

pub type MetaId = u32;

#[derive(Clone, Debug, PartialEq)]
pub enum SizeExpr {
    Var(Ident),
    Succ(Box<SizeExpr>),
    Infty,
    Max(Box<SizeExpr>, Box<SizeExpr>),
    Meta(MetaId),
}

impl SizeExpr {
    pub fn succ(self) -> SizeExpr {
        SizeExpr::Succ(Box::new(self))
    }

    fn collect_vars(&self, out: &mut BTreeSet<Ident>) {
        match self {
            SizeExpr::Var(x) => {
                out.insert(x.clone());
            }
            SizeExpr::Succ(s) => s.collect_vars(out),
            SizeExpr::Max(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            SizeExpr::Infty | SizeExpr::Meta(_) => {}
        }
    }

    pub fn mentions(&self, x: &Ident) -> bool {
        match self {
            SizeExpr::Var(y) => x == y,
            SizeExpr::Succ(s) => s.mentions(x),
            SizeExpr::Max(a, b) => a.mentions(x) || b.mentions(x),
            SizeExpr::Infty | SizeExpr::Meta(_) => false,
        }
    }

    pub fn has_meta(&self) -> bool {
        match self {
            SizeExpr::Meta(_) => true,
            SizeExpr::Succ(s) => s.has_meta(),
            SizeExpr::Max(a, b) => a.has_meta() || b.has_meta(),
            _ => false,
        }
    }
}

/// Terms and types.
#[derive(Clone, Debug)]
pub enum Expr {
    Var(Ident),
    Set,
    SizeU,
    Pi(Annot, Ident, Arc<Expr>, Arc<Expr>),
    Lam(Ident, Arc<Expr>),
    App(Arc<Expr>, Arc<Expr>, Annot),
    /// Data type, function or let-bound definition.
    Def(Ident),
    Con(Ident),
    Size(SizeExpr),
    CaseSize(SizeExpr, Ident, Arc<Expr>),
    CaseData(Arc<Expr>, Vec<(Pattern, Expr)>),
    /// An erased argument in printed output (`_`).
    Erased,
    /// An unobserved coinductive tail in printed output (`…`).
    Elided,
}

impl Expr {
    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Arc::new(f), Arc::new(a), Annot::Relevant)
    }

    pub fn app_annot(f: Expr, a: Expr, annot: Annot) -> Expr {
        Expr::App(Arc::new(f), Arc::new(a), annot)
    }

    pub fn arrow(dom: Expr, cod: Expr) -> Expr {
        Expr::Pi(Annot::Relevant, Ident::fresh("_"), Arc::new(dom), Arc::new(cod))
    }

    /// Size expression view of a term, if it is one.
    pub fn as_size(&self) -> Option<SizeExpr> {
        match self {
            Expr::Var(x) => Some(SizeExpr::Var(x.clone())),
            Expr::Size(s) => Some(s.clone()),
            _ => None,
        }
    }

    /// Split an application spine into head and arguments.
    pub fn spine(&self) -> (&Expr, Vec<(&Expr, Annot)>) {
        let mut args = Vec::new();
        let mut head = self;
        while let Expr::App(f, a, annot) = head {
            args.push((&**a, *annot));
            head = f;
        }
        args.reverse();
        (head, args)
    }

    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Def(x) | Expr::Con(x) => {
                out.insert(x.clone());
            }
            Expr::Set | Expr::SizeU | Expr::Erased | Expr::Elided => {}
            Expr::Pi(_, x, a, b) => {
                a.collect_free(out);
                let mut inner = b.free_vars();
                inner.remove(x);
                out.extend(inner);
            }
            Expr::Lam(x, b) => {
                let mut inner = b.free_vars();
                inner.remove(x);
                out.extend(inner);
            }
            Expr::App(f, a, _) => {
                f.collect_free(out);
                a.collect_free(out);
            }
            Expr::Size(s) => s.collect_vars(out),
            Expr::CaseSize(s, j, b) => {
                s.collect_vars(out);
                let mut inner = b.free_vars();
                inner.remove(j);
                out.extend(inner);
            }
            Expr::CaseData(scrut, branches) => {
                scrut.collect_free(out);
                for (p, body) in branches {
                    let mut inner = body.free_vars();
                    for x in p.binders() {
                        inner.remove(&x);
                    }
                    p.collect_dot_free(out);
                    out.extend(inner);
                }
            }
        }
    }

    /// Does `x` occur free?
    pub fn mentions(&self, x: &Ident) -> bool {
        self.free_vars().contains(x)
    }

    /// Capture-avoiding substitution of `replacement` for free occurrences
    /// of `var`.
    pub fn substitute(&self, var: &Ident, replacement: &Expr) -> Expr {
        let fv = replacement.free_vars();
        self.subst_inner(var, replacement, &fv)
    }

    fn subst_inner(&self, var: &Ident, r: &Expr, fv: &BTreeSet<Ident>) -> Expr {
        match self {
            Expr::Var(x) if x == var => r.clone(),
            Expr::Var(_)
            | Expr::Def(_)
            | Expr::Con(_)
            | Expr::Set
            | Expr::SizeU
            | Expr::Erased
            | Expr::Elided => self.clone(),
            Expr::Pi(annot, x, a, b) => {
                let a = a.subst_inner(var, r, fv);
                if x == var {
                    return Expr::Pi(*annot, x.clone(), Arc::new(a), b.clone());
                }
                let (x, b) = freshen_binder(x, b, fv);
                Expr::Pi(*annot, x, Arc::new(a), Arc::new(b.subst_inner(var, r, fv)))
            }
            Expr::Lam(x, b) => {
                if x == var {
                    return self.clone();
                }
                let (x, b) = freshen_binder(x, b, fv);
                Expr::Lam(x, Arc::new(b.subst_inner(var, r, fv)))
            }
            Expr::App(f, a, annot) => Expr::App(
                Arc::new(f.subst_inner(var, r, fv)),
                Arc::new(a.subst_inner(var, r, fv)),
                *annot,
            ),
            Expr::Size(s) => size_subst(s, var, r),
            Expr::CaseSize(s, j, b) => {
                let s = match size_subst(s, var, r) {
                    Expr::Size(s) => s,
                    Expr::Var(x) => SizeExpr::Var(x),
                    // a non-size replacement cannot sit in a size scrutinee
                    _ => s.clone(),
                };
                if j == var {
                    return Expr::CaseSize(s, j.clone(), b.clone());
                }
                let (j, b) = freshen_binder(j, b, fv);
                Expr::CaseSize(s, j, Arc::new(b.subst_inner(var, r, fv)))
            }
            Expr::CaseData(scrut, branches) => Expr::CaseData(
                Arc::new(scrut.subst_inner(var, r, fv)),
                branches
                    .iter()
                    .map(|(p, body)| {
                        if p.binders().contains(var) {
                            (p.clone(), body.clone())
                        } else {
                            (p.subst_dots(var, r), body.subst_inner(var, r, fv))
                        }
                    })
                    .collect(),
            ),
        }
    }

    /// Replace metavariables by expressions.
    pub fn map_metas(&self, f: &dyn Fn(MetaId) -> Option<SizeExpr>) -> Expr {
        match self {
            Expr::Size(s) => Expr::Size(map_size_metas(s, f)),
            Expr::Pi(annot, x, a, b) => Expr::Pi(
                *annot,
                x.clone(),
                Arc::new(a.map_metas(f)),
                Arc::new(b.map_metas(f)),
            ),
            Expr::Lam(x, b) => Expr::Lam(x.clone(), Arc::new(b.map_metas(f))),
            Expr::App(g, a, annot) => {
                Expr::App(Arc::new(g.map_metas(f)), Arc::new(a.map_metas(f)), *annot)
            }
            Expr::CaseSize(s, j, b) => {
                Expr::CaseSize(map_size_metas(s, f), j.clone(), Arc::new(b.map_metas(f)))
            }
            Expr::CaseData(scrut, branches) => Expr::CaseData(
                Arc::new(scrut.map_metas(f)),
                branches
                    .iter()
                    .map(|(p, b)| (p.clone(), b.map_metas(f)))
                    .collect(),
            ),
            _ => self.clone(),
        }
    }

    pub fn metas(&self) -> BTreeSet<MetaId> {
        let mut out = BTreeSet::new();
        self.collect_metas(&mut out);
        out
    }

    fn collect_metas(&self, out: &mut BTreeSet<MetaId>) {
        fn size(s: &SizeExpr, out: &mut BTreeSet<MetaId>) {
            match s {
                SizeExpr::Meta(m) => {
                    out.insert(*m);
                }
                SizeExpr::Succ(s) => size(s, out),
                SizeExpr::Max(a, b) => {
                    size(a, out);
                    size(b, out);
                }
                _ => {}
            }
        }
        match self {
            Expr::Size(s) => size(s, out),
            Expr::Pi(_, _, a, b) => {
                a.collect_metas(out);
                b.collect_metas(out);
            }
            Expr::Lam(_, b) => b.collect_metas(out),
            Expr::App(g, a, _) => {
                g.collect_metas(out);
                a.collect_metas(out);
            }
            Expr::CaseSize(s, _, b) => {
                size(s, out);
                b.collect_metas(out);
            }
            Expr::CaseData(scrut, branches) => {
                scrut.collect_metas(out);
                for (_, b) in branches {
                    b.collect_metas(out);
                }
            }
            _ => {}
        }
    }

    /// Structural equality up to renaming of bound variables. Global names
    /// are compared by display text so that independently scope-checked
    /// programs can be compared; metavariables compare equal to each other.
    pub fn alpha_eq(&self, other: &Expr) -> bool {
        alpha_eq(self, other, &mut Vec::new())
    }
}

fn map_size_metas(s: &SizeExpr, f: &dyn Fn(MetaId) -> Option<SizeExpr>) -> SizeExpr {
    match s {
        SizeExpr::Meta(m) => f(*m).unwrap_or(SizeExpr::Meta(*m)),
        SizeExpr::Succ(s) => SizeExpr::Succ(Box::new(map_size_metas(s, f))),
        SizeExpr::Max(a, b) => SizeExpr::Max(
            Box::new(map_size_metas(a, f)),
            Box::new(map_size_metas(b, f)),
        ),
        _ => s.clone(),
    }
}

fn freshen_binder(x: &Ident, body: &Arc<Expr>, fv: &BTreeSet<Ident>) -> (Ident, Arc<Expr>) {
    if fv.contains(x) {
        let y = x.refresh();
        let body = body.substitute(x, &Expr::Var(y.clone()));
        (y, Arc::new(body))
    } else {
        (x.clone(), body.clone())
    }
}

fn size_subst(s: &SizeExpr, var: &Ident, r: &Expr) -> Expr {
    if !s.mentions(var) {
        return Expr::Size(s.clone());
    }
    if let SizeExpr::Var(_) = s {
        return r.clone();
    }
    let rs = match r.as_size() {
        Some(rs) => rs,
        // ill-sorted replacement; leave the size untouched
        None => return Expr::Size(s.clone()),
    };
    fn go(s: &SizeExpr, var: &Ident, rs: &SizeExpr) -> SizeExpr {
        match s {
            SizeExpr::Var(x) if x == var => rs.clone(),
            SizeExpr::Succ(t) => SizeExpr::Succ(Box::new(go(t, var, rs))),
            SizeExpr::Max(a, b) => {
                SizeExpr::Max(Box::new(go(a, var, rs)), Box::new(go(b, var, rs)))
            }
            _ => s.clone(),
        }
    }
    Expr::Size(go(s, var, &rs))
}

fn alpha_eq(a: &Expr, b: &Expr, bound: &mut Vec<(Ident, Ident)>) -> bool {
    fn var_eq(x: &Ident, y: &Ident, bound: &[(Ident, Ident)]) -> bool {
        for (l, r) in bound.iter().rev() {
            if l == x || r == y {
                return l == x && r == y;
            }
        }
        x.text == y.text
    }
    fn size_eq(a: &SizeExpr, b: &SizeExpr, bound: &[(Ident, Ident)]) -> bool {
        match (a, b) {
            (SizeExpr::Var(x), SizeExpr::Var(y)) => var_eq(x, y, bound),
            (SizeExpr::Succ(x), SizeExpr::Succ(y)) => size_eq(x, y, bound),
            (SizeExpr::Infty, SizeExpr::Infty) => true,
            (SizeExpr::Meta(_), SizeExpr::Meta(_)) => true,
            (SizeExpr::Max(a1, a2), SizeExpr::Max(b1, b2)) => {
                size_eq(a1, b1, bound) && size_eq(a2, b2, bound)
            }
            _ => false,
        }
    }
    fn under<T>(
        bound: &mut Vec<(Ident, Ident)>,
        x: &Ident,
        y: &Ident,
        k: impl FnOnce(&mut Vec<(Ident, Ident)>) -> T,
    ) -> T {
        bound.push((x.clone(), y.clone()));
        let r = k(bound);
        bound.pop();
        r
    }
    match (a, b) {
        (Expr::Var(x), Expr::Var(y)) => var_eq(x, y, bound),
        (Expr::Var(x), Expr::Size(SizeExpr::Var(y)))
        | (Expr::Size(SizeExpr::Var(x)), Expr::Var(y)) => var_eq(x, y, bound),
        (Expr::Def(x), Expr::Def(y)) | (Expr::Con(x), Expr::Con(y)) => x.text == y.text,
        (Expr::Set, Expr::Set)
        | (Expr::SizeU, Expr::SizeU)
        | (Expr::Erased, Expr::Erased)
        | (Expr::Elided, Expr::Elided) => true,
        (Expr::Pi(an1, x, a1, b1), Expr::Pi(an2, y, a2, b2)) => {
            an1 == an2
                && alpha_eq(a1, a2, bound)
                && under(bound, x, y, |bd| alpha_eq(b1, b2, bd))
        }
        (Expr::Lam(x, b1), Expr::Lam(y, b2)) => under(bound, x, y, |bd| alpha_eq(b1, b2, bd)),
        (Expr::App(f1, a1, _), Expr::App(f2, a2, _)) => {
            alpha_eq(f1, f2, bound) && alpha_eq(a1, a2, bound)
        }
        (Expr::Size(s1), Expr::Size(s2)) => size_eq(s1, s2, bound),
        (Expr::CaseSize(s1, x, b1), Expr::CaseSize(s2, y, b2)) => {
            size_eq(s1, s2, bound) && under(bound, x, y, |bd| alpha_eq(b1, b2, bd))
        }
        (Expr::CaseData(s1, br1), Expr::CaseData(s2, br2)) => {
            alpha_eq(s1, s2, bound)
                && br1.len() == br2.len()
                && br1.iter().zip(br2).all(|((p1, e1), (p2, e2))| {
                    let n = bound.len();
                    let ok = pattern_alpha_eq(p1, p2, bound) && alpha_eq(e1, e2, bound);
                    bound.truncate(n);
                    ok
                })
        }
        _ => false,
    }
}

/// Compare patterns, pushing binder correspondences onto `bound`.
pub(crate) fn pattern_alpha_eq(a: &Pattern, b: &Pattern, bound: &mut Vec<(Ident, Ident)>) -> bool {
    match (a, b) {
        (Pattern::Var(x), Pattern::Var(y)) | (Pattern::Succ(x), Pattern::Succ(y)) => {
            bound.push((x.clone(), y.clone()));
            true
        }
        (Pattern::Wild, Pattern::Wild) => true,
        (Pattern::Dot(e1), Pattern::Dot(e2)) => alpha_eq(e1, e2, bound),
        (Pattern::SizeRel(p1, c1), Pattern::SizeRel(p2, c2)) => {
            let parent_ok = alpha_eq(&Expr::Var(p1.clone()), &Expr::Var(p2.clone()), bound);
            bound.push((c1.clone(), c2.clone()));
            parent_ok
        }
        (Pattern::Con(c1, ps1), Pattern::Con(c2, ps2)) => {
            c1.text == c2.text
                && ps1.len() == ps2.len()
                && ps1
                    .iter()
                    .zip(ps2)
                    .all(|(p1, p2)| pattern_alpha_eq(p1, p2, bound))
        }
        _ => false,
    }
}

#[derive(Clone, Debug)]
pub enum Pattern {
    Var(Ident),
    Con(Ident, Vec<Pattern>),
    Dot(Expr),
    /// `(parent > child)`
    SizeRel(Ident, Ident),
    /// `($ child)`
    Succ(Ident),
    Wild,
}

impl Pattern {
    /// Variables bound by this pattern, left to right.
    pub fn binders(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut Vec<Ident>) {
        match self {
            Pattern::Var(x) | Pattern::Succ(x) | Pattern::SizeRel(_, x) => out.push(x.clone()),
            Pattern::Con(_, ps) => ps.iter().for_each(|p| p.collect_binders(out)),
            Pattern::Dot(_) | Pattern::Wild => {}
        }
    }

    fn collect_dot_free(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Pattern::Dot(e) => out.extend(e.free_vars()),
            Pattern::Con(_, ps) => ps.iter().for_each(|p| p.collect_dot_free(out)),
            Pattern::SizeRel(parent, _) => {
                out.insert(parent.clone());
            }
            _ => {}
        }
    }

    fn subst_dots(&self, var: &Ident, r: &Expr) -> Pattern {
        match self {
            Pattern::Dot(e) => Pattern::Dot(e.substitute(var, r)),
            Pattern::Con(c, ps) => {
                Pattern::Con(c.clone(), ps.iter().map(|p| p.subst_dots(var, r)).collect())
            }
            _ => self.clone(),
        }
    }
}

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug)]
pub struct Clause {
    pub lhs: Vec<Pattern>,
    pub rhs: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct Param {
    pub name: Ident,
    pub polarity: Polarity,
    pub ty: Expr,
}

#[derive(Clone, Debug)]
pub struct DataDecl {
    pub sized: bool,
    pub coinductive: bool,
    pub name: Ident,
    pub params: Vec<Param>,
    /// The type after the parameters, e.g. `Size -> Set`.
    pub index_ty: Expr,
    pub constructors: Vec<(Ident, Expr, Pos)>,
}

#[derive(Clone, Debug)]
pub struct FunDecl {
    pub coinductive: bool,
    pub name: Ident,
    pub ty: Expr,
    pub clauses: Vec<Clause>,
}

#[derive(Clone, Debug)]
pub struct LetDecl {
    pub name: Ident,
    pub ty: Expr,
    pub body: Expr,
    pub eval: bool,
}

#[derive(Clone, Debug)]
pub enum DeclKind {
    Data(DataDecl),
    Fun(FunDecl),
    Let(LetDecl),
}

#[derive(Clone, Debug)]
pub struct Declaration {
    pub kind: DeclKind,
    pub pos: Pos,
}

impl Declaration {
    pub fn name(&self) -> &Ident {
        match &self.kind {
            DeclKind::Data(d) => &d.name,
            DeclKind::Fun(f) => &f.name,
            DeclKind::Let(l) => &l.name,
        }
    }
}
