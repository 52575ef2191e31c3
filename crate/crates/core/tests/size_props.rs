mod common;

use common::{brute_force, Problem};
use proptest::prelude::*;
use sizedcheck::size::{normalize, NormalSize, Rel, SizeCtx};
use sizedcheck::syntax::{Ident, SizeExpr};

/// A generated context: variable `k` may get one hypothesis whose parent
/// mentions only variables below `k`.
#[derive(Clone, Debug)]
struct Hyp {
    child: usize,
    parent: SizeTree,
    strict: bool,
}

#[derive(Clone, Debug)]
enum SizeTree {
    Var(usize, u32),
    Infty,
    Max(Box<SizeTree>, Box<SizeTree>),
}

impl SizeTree {
    fn to_expr(&self, vars: &[Ident]) -> SizeExpr {
        match self {
            SizeTree::Var(k, n) => {
                let mut e = SizeExpr::Var(vars[*k].clone());
                for _ in 0..*n {
                    e = e.succ();
                }
                e
            }
            SizeTree::Infty => SizeExpr::Infty,
            SizeTree::Max(a, b) => {
                SizeExpr::Max(Box::new(a.to_expr(vars)), Box::new(b.to_expr(vars)))
            }
        }
    }
}

fn tree(nvars: usize, allow_max: bool) -> BoxedStrategy<SizeTree> {
    let leaf = prop_oneof![
        8 => (0..nvars, 0u32..3).prop_map(|(k, n)| SizeTree::Var(k, n)),
        1 => Just(SizeTree::Infty),
    ];
    if allow_max {
        leaf.prop_recursive(2, 4, 2, |inner| {
            (inner.clone(), inner).prop_map(|(a, b)| SizeTree::Max(Box::new(a), Box::new(b)))
        })
        .boxed()
    } else {
        leaf.boxed()
    }
}

fn hyps(nvars: usize, allow_max: bool) -> BoxedStrategy<Vec<Hyp>> {
    let per_var: Vec<BoxedStrategy<Option<Hyp>>> = (1..nvars)
        .map(|child| {
            let parent = if allow_max {
                tree(child, true)
            } else {
                prop_oneof![
                    6 => (0..child, 0u32..2).prop_map(|(k, n)| SizeTree::Var(k, n)),
                    1 => Just(SizeTree::Infty),
                ]
                .boxed()
            };
            proptest::option::of(
                (parent, any::<bool>()).prop_map(move |(parent, strict)| Hyp {
                    child,
                    parent,
                    strict,
                }),
            )
            .boxed()
        })
        .collect();
    per_var
        .prop_map(|hs| hs.into_iter().flatten().collect())
        .boxed()
}

fn rel() -> impl Strategy<Value = Rel> {
    prop_oneof![Just(Rel::Le), Just(Rel::Lt), Just(Rel::Eq)]
}

fn build(nvars: usize, hs: &[Hyp]) -> Problem {
    let vars: Vec<Ident> = (0..nvars).map(|k| Ident::fresh(&format!("v{}", k))).collect();
    let mut ctx = SizeCtx::new().declare(&vars[0]);
    let mut out = Vec::new();
    for k in 1..nvars {
        match hs.iter().find(|h| h.child == k) {
            Some(h) => {
                let p = normalize(&h.parent.to_expr(&vars)).unwrap();
                ctx = ctx.add_hypothesis(&vars[k], p.clone(), h.strict).unwrap();
                out.push((k, p, h.strict));
            }
            None => ctx = ctx.declare(&vars[k]),
        }
    }
    Problem {
        vars,
        ctx,
        hyps: out,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn entailment_is_sound(
        (n, hs, a, b) in (1usize..=4).prop_flat_map(|n| (Just(n), hyps(n, true), tree(n, true), tree(n, true))),
        r in rel(),
    ) {
        let p = build(n, &hs);
        let a = normalize(&a.to_expr(&p.vars)).unwrap();
        let b = normalize(&b.to_expr(&p.vars)).unwrap();
        if p.ctx.entails(&a, r, &b).unwrap() {
            prop_assert!(brute_force(&p, &a, r, &b), "{} {} {} claimed but refuted", a, r, b);
        }
    }

    #[test]
    fn entailment_is_complete_without_max(
        (n, hs, a, b) in (1usize..=4).prop_flat_map(|n| (Just(n), hyps(n, false), tree(n, false), tree(n, false))),
        r in rel(),
    ) {
        let p = build(n, &hs);
        let a = normalize(&a.to_expr(&p.vars)).unwrap();
        let b = normalize(&b.to_expr(&p.vars)).unwrap();
        prop_assert_eq!(p.ctx.entails(&a, r, &b).unwrap(), brute_force(&p, &a, r, &b));
    }

    #[test]
    fn normalize_is_idempotent(
        (n, t) in (1usize..=4).prop_flat_map(|n| (Just(n), tree(n, true))),
    ) {
        let vars: Vec<Ident> = (0..n).map(|k| Ident::fresh(&format!("v{}", k))).collect();
        let once = normalize(&t.to_expr(&vars)).unwrap();
        let twice = normalize(&once.to_expr()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn normalize_commutes_with_renaming(
        (n, t) in (1usize..=4).prop_flat_map(|n| (Just(n), tree(n, true))),
    ) {
        let xs: Vec<Ident> = (0..n).map(|k| Ident::fresh(&format!("x{}", k))).collect();
        let ys: Vec<Ident> = (0..n).map(|k| Ident::fresh(&format!("y{}", k))).collect();
        let mut renamed = normalize(&t.to_expr(&xs)).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            renamed = renamed.subst_var(x, &NormalSize::var(y.clone())).unwrap();
        }
        prop_assert_eq!(renamed, normalize(&t.to_expr(&ys)).unwrap());
    }

    #[test]
    fn mutual_entailment_means_equal_normal_forms(
        (n, a, b) in (1usize..=3).prop_flat_map(|n| (Just(n), tree(n, true), tree(n, true))),
    ) {
        let p = build(n, &[]);
        let a = normalize(&a.to_expr(&p.vars)).unwrap();
        let b = normalize(&b.to_expr(&p.vars)).unwrap();
        let both = p.ctx.entails(&a, Rel::Le, &b).unwrap() && p.ctx.entails(&b, Rel::Le, &a).unwrap();
        prop_assert_eq!(both, a == b);
    }
}
