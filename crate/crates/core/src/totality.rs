//! Polarity analysis, strict positivity, admissibility of types for size
//! matching, and the termination/productivity check for recursive calls.

use std::collections::HashMap;

use crate::parser::pretty::pretty;
use crate::signature::{CallReport, Rule, Signature, TotalityReport};
use crate::size::{NormalSize, Rel, SizeCtx};
use crate::syntax::{Annot, Expr, Ident, Polarity, SizeExpr};

/// Polarity of `v` in `e`.
pub fn polarity_of(v: &Ident, e: &Expr, sig: &Signature) -> Polarity {
    if !e.mentions(v) {
        return Polarity::Unused;
    }
    match e {
        Expr::Var(x) | Expr::Def(x) | Expr::Con(x) if x == v => Polarity::StrictPos,
        Expr::Size(_) => Polarity::StrictPos,
        Expr::Pi(_, _, dom, cod) => {
            Polarity::Neg.compose(polarity_of(v, dom, sig)).join(polarity_of(v, cod, sig))
        }
        Expr::App(..) => {
            let (head, args) = e.spine();
            let mut p = match head {
                Expr::Var(x) | Expr::Def(x) | Expr::Con(x) if x == v => Polarity::StrictPos,
                _ => Polarity::Unused,
            };
            let data = match head {
                Expr::Def(d) => sig.data(d),
                _ => None,
            };
            for (k, (a, annot)) in args.iter().enumerate() {
                if *annot == Annot::Parametric {
                    continue;
                }
                let outer = match data {
                    Some(d) if k < d.params.len() => d.params[k],
                    Some(d) if k == d.params.len() && d.sized => {
                        if d.coinductive {
                            Polarity::Neg
                        } else {
                            Polarity::Pos
                        }
                    }
                    _ => Polarity::Invariant,
                };
                p = p.join(outer.compose(polarity_of(v, a, sig)));
            }
            p
        }
        _ => Polarity::Invariant,
    }
}

/// Is `e` exactly the size variable `i`?
pub fn is_size_var(e: &Expr, i: &Ident) -> bool {
    matches!(e.as_size(), Some(SizeExpr::Var(x)) if x == *i)
}

/// `D ps i` for a sized data type of the given kind, with `i` unused
/// everywhere except the size index.
fn sized_at(e: &Expr, i: &Ident, coinductive: bool, sig: &Signature) -> bool {
    let (head, args) = e.spine();
    let Expr::Def(d) = head else { return false };
    let Some(data) = sig.data(d) else { return false };
    if !data.sized || data.coinductive != coinductive {
        return false;
    }
    let n = data.params.len();
    if args.len() <= n || !is_size_var(args[n].0, i) {
        return false;
    }
    args.iter().enumerate().all(|(k, (a, annot))| {
        k == n || *annot == Annot::Parametric || polarity_of(i, a, sig) == Polarity::Unused
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefKind {
    Fun,
    Cofun,
}

/// Check that `t` is admissible for matching `i` against a successor.
/// Returns the offending part on failure.
pub fn admissibility_check(t: &Expr, i: &Ident, kind: DefKind, sig: &Signature) -> Result<(), String> {
    let mut cur = t;
    while let Expr::Pi(_, _, dom, cod) = cur {
        let p = polarity_of(i, dom, sig);
        if !p.leq(Polarity::Neg) && !sized_at(dom, i, false, sig) {
            return Err(format!(
                "domain `{}` is neither antitone nor inductive in `{}`",
                pretty(dom),
                i
            ));
        }
        cur = cod;
    }
    let ok = match kind {
        DefKind::Cofun => sized_at(cur, i, true, sig),
        DefKind::Fun => polarity_of(i, cur, sig).leq(Polarity::Pos),
    };
    if ok {
        Ok(())
    } else {
        Err(match kind {
            DefKind::Cofun => format!(
                "result `{}` is not a coinductive type at size `{}`",
                pretty(cur),
                i
            ),
            DefKind::Fun => format!("result `{}` is not monotone in `{}`", pretty(cur), i),
        })
    }
}

/// A recursive call found while checking a clause.
#[derive(Clone, Debug)]
pub struct Call {
    pub clause: usize,
    pub args: Vec<Expr>,
    /// Value of the argument at the designated size position, if supplied.
    pub size: Option<NormalSize>,
    pub sizes: SizeCtx,
}

/// What the left-hand side of a clause provides for the analysis.
#[derive(Clone, Debug, Default)]
pub struct ClauseShape {
    /// Value of the designated size parameter.
    pub size: Option<NormalSize>,
    /// Variables bound strictly inside a constructor pattern, with the
    /// top-level position of that pattern.
    pub inside: HashMap<Ident, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TotalityError {
    /// Some calls are justified by neither rule.
    Unjustified(Vec<String>),
    /// Size descent holds but the type is not admissible.
    Inadmissible(String),
}

fn describe(f: &Ident, c: &Call) -> String {
    let mut e = Expr::Def(f.clone());
    for a in &c.args {
        e = Expr::app(e, a.clone());
    }
    pretty(&e)
}

/// Decide totality of `f` from its recursive calls. `admissible` is the
/// result of the admissibility check for the designated size parameter,
/// consulted only when size descent is the justification of a `fun`.
pub fn termination_check(
    f: &Ident,
    size_param: Option<usize>,
    shapes: &[ClauseShape],
    calls: &[Call],
    admissible: &dyn Fn() -> Result<(), String>,
) -> Result<TotalityReport, TotalityError> {
    let size_rel = |c: &Call| -> &'static str {
        let (Some(e), Some(v)) = (&c.size, &shapes[c.clause].size) else {
            return "UNKNOWN";
        };
        if c.sizes.entails(e, Rel::Lt, v).unwrap_or(false) {
            "LT"
        } else if c.sizes.entails(e, Rel::Le, v).unwrap_or(false) {
            "LE"
        } else {
            "UNKNOWN"
        }
    };
    let structural = |c: &Call| -> Vec<&'static str> {
        c.args
            .iter()
            .enumerate()
            .map(|(p, a)| match a {
                Expr::Var(x) if shapes[c.clause].inside.get(x) == Some(&p) => "Sub",
                _ => "Unknown",
            })
            .collect()
    };
    let reports: Vec<CallReport> = calls
        .iter()
        .map(|c| CallReport {
            clause: c.clause,
            call: describe(f, c),
            size_relation: size_rel(c),
            structural: structural(c),
        })
        .collect();
    if calls.is_empty() {
        return Ok(TotalityReport {
            rule: Rule::NoRecursion,
            calls: reports,
        });
    }

    let by_size = size_param.is_some() && reports.iter().all(|r| r.size_relation == "LT");
    let mut inadmissible = None;
    if by_size {
        match admissible() {
            Ok(()) => {
                return Ok(TotalityReport {
                    rule: Rule::SizeDescent,
                    calls: reports,
                })
            }
            Err(msg) => inadmissible = Some(msg),
        }
    }

    let width = calls.iter().map(|c| c.args.len()).max().unwrap_or(0);
    for p in 0..width {
        if reports.iter().all(|r| r.structural.get(p) == Some(&"Sub")) {
            return Ok(TotalityReport {
                rule: Rule::Structural(p),
                calls: reports,
            });
        }
    }
    match inadmissible {
        Some(msg) => Err(TotalityError::Inadmissible(msg)),
        None => Err(TotalityError::Unjustified(
            reports
                .iter()
                .filter(|r| r.size_relation != "LT")
                .map(|r| r.call.clone())
                .collect(),
        )),
    }
}

/// Human-readable account of a totality verdict.
pub fn explain(f: &Ident, report: &TotalityReport) -> String {
    let rule = match report.rule {
        Rule::NoRecursion => "no recursive calls".to_string(),
        Rule::SizeDescent => "(a) size descent".to_string(),
        Rule::Structural(p) => format!("(b) structural descent at argument {}", p + 1),
    };
    let mut out = format!("totality {}: {}\n", f, rule);
    for c in &report.calls {
        out.push_str(&format!(
            "  clause {}: {}  size {}  args [{}]\n",
            c.clause + 1,
            c.call,
            c.size_relation,
            c.structural.join(", ")
        ));
    }
    out
}
