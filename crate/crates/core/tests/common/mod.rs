#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::Rng;
use sizedcheck::check::{check_program, CheckOptions, Checked};
use sizedcheck::conv::Conv;
use sizedcheck::eval::{Arg, Env, Eval, Head, ReadbackOptions, Thunk, Value};
use sizedcheck::parser::parse_source;
use sizedcheck::scope::scope_check;
use sizedcheck::size::{normalize, Atom, Base, NormalSize, Rel, SizeCtx};
use sizedcheck::syntax::{Annot, Expr, Ident, SizeExpr};

pub fn corpus() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus"))
}

pub fn read_corpus(rel: &str) -> String {
    std::fs::read_to_string(corpus().join(rel)).unwrap()
}

pub fn check_source(src: &str) -> Checked {
    let decls = scope_check(&parse_source(src).unwrap()).unwrap();
    check_program(&decls, &CheckOptions::default()).unwrap()
}

/// Source of a corpus file without its `eval let`s.
pub fn declarations_of(rel: &str) -> String {
    read_corpus(rel)
        .lines()
        .filter(|l| !l.starts_with("eval let"))
        .collect::<Vec<_>>()
        .join("\n")
}

// ---------------------------------------------------------------- sizes

/// `None` is the closure ordinal.
pub type Val = Option<u32>;

pub fn eval_size(s: &NormalSize, vars: &[Ident], rho: &[Val]) -> Val {
    let mut best: Val = Some(0);
    for Atom { base, offset } in s.atoms() {
        let v = match base {
            Base::Infty => None,
            Base::Var(x) => {
                let k = vars.iter().position(|y| y == x).unwrap();
                rho[k].map(|n| n + offset)
            }
            Base::Meta(_) => unreachable!(),
        };
        best = match (best, v) {
            (None, _) | (_, None) => None,
            (Some(a), Some(b)) => Some(a.max(b)),
        };
    }
    best
}

pub fn leq(a: Val, b: Val) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    }
}

pub fn succ(a: Val) -> Val {
    a.map(|n| n + 1)
}

pub fn holds(a: Val, rel: Rel, b: Val) -> bool {
    match rel {
        Rel::Le => leq(a, b),
        Rel::Lt => leq(succ(a), b),
        Rel::Eq => leq(a, b) && leq(b, a),
    }
}

pub struct Problem {
    pub vars: Vec<Ident>,
    pub ctx: SizeCtx,
    pub hyps: Vec<(usize, NormalSize, bool)>,
}

pub fn valuations(n: usize) -> Vec<Vec<Val>> {
    let domain: Vec<Val> = (0..=6).map(Some).chain([None]).collect();
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|rho| {
                domain.iter().map(move |d| {
                    let mut r = rho.clone();
                    r.push(*d);
                    r
                })
            })
            .collect();
    }
    out
}

/// Every valuation over {0..6, ω} satisfying the context satisfies the
/// query.
pub fn brute_force(p: &Problem, a: &NormalSize, r: Rel, b: &NormalSize) -> bool {
    valuations(p.vars.len()).into_iter().all(|rho| {
        let sat = p.hyps.iter().all(|(k, parent, strict)| {
            let c = rho[*k];
            let pv = eval_size(parent, &p.vars, &rho);
            if *strict {
                leq(succ(c), pv)
            } else {
                leq(c, pv)
            }
        });
        !sat || holds(eval_size(a, &p.vars, &rho), r, eval_size(b, &p.vars, &rho))
    })
}

/// A random size over the first `nvars` variables.
pub fn random_size(rng: &mut StdRng, vars: &[Ident], allow_max: bool, depth: u32) -> SizeExpr {
    if allow_max && depth > 0 && rng.gen_bool(0.25) {
        return SizeExpr::Max(
            Box::new(random_size(rng, vars, allow_max, depth - 1)),
            Box::new(random_size(rng, vars, allow_max, depth - 1)),
        );
    }
    if vars.is_empty() || rng.gen_bool(0.1) {
        return SizeExpr::Infty;
    }
    let mut e = SizeExpr::Var(vars[rng.gen_range(0..vars.len())].clone());
    for _ in 0..rng.gen_range(0..3) {
        e = e.succ();
    }
    e
}

/// Variable `k` gets at most one hypothesis, whose parent mentions only
/// variables below `k`.
pub fn random_problem(rng: &mut StdRng, allow_max: bool) -> Problem {
    let n = rng.gen_range(1..=4);
    let vars: Vec<Ident> = (0..n).map(|k| Ident::fresh(&format!("v{}", k))).collect();
    let mut ctx = SizeCtx::new().declare(&vars[0]);
    let mut hyps = Vec::new();
    for k in 1..n {
        if rng.gen_bool(0.6) {
            let parent = normalize(&random_size(rng, &vars[..k], allow_max, 1)).unwrap();
            let strict = rng.gen_bool(0.5);
            ctx = ctx.add_hypothesis(&vars[k], parent.clone(), strict).unwrap();
            hyps.push((k, parent, strict));
        } else {
            ctx = ctx.declare(&vars[k]);
        }
    }
    Problem { vars, ctx, hyps }
}

// ----------------------------------------------------------- evaluation

/// Value of a readback of the form `succ _ (succ _ (zero _))` or
/// `succ (succ zero)`.
pub fn numeral(text: &str) -> Option<u64> {
    let words: Vec<&str> = text
        .split(|c: char| c.is_whitespace() || c == '(' || c == ')')
        .filter(|w| !w.is_empty() && *w != "_")
        .collect();
    let (last, init) = words.split_last()?;
    (*last == "zero" && init.iter().all(|w| *w == "succ")).then_some(init.len() as u64)
}

/// Hamming numbers as produced by merging with duplicates kept.
pub fn hamming(n: usize) -> Vec<u64> {
    let mut h = vec![1u64];
    let (mut p2, mut p3) = (0, 0);
    while h.len() < n {
        let (a, b) = (2 * h[p2], 3 * h[p3]);
        if a <= b {
            h.push(a);
            p2 += 1;
        } else {
            h.push(b);
            p3 += 1;
        }
    }
    h.truncate(n);
    h
}

pub fn fibonacci(n: usize) -> Vec<u64> {
    let mut out = vec![0u64, 1];
    while out.len() < n {
        let k = out.len();
        out.push(out[k - 1] + out[k - 2]);
    }
    out.truncate(n);
    out
}

/// `⌈x / (y + 1)⌉`
pub fn div_ceil(x: u64, y: u64) -> u64 {
    x.div_ceil(y + 1)
}

/// Source text of a sized numeral.
pub fn snat(n: u64) -> String {
    (0..n).fold("zero #".to_string(), |acc, _| format!("succ # ({})", acc))
}

// -------------------------------------------------------------- erasure

/// A call site in a corpus file. `i` stands for a size variable.
pub struct Site {
    pub file: &'static str,
    pub call: &'static str,
}

pub const SITES: &[Site] = &[
    Site { file: "accept/div.ma", call: "minus i five two" },
    Site { file: "accept/div.ma", call: "minus i six one" },
    Site { file: "accept/div.ma", call: "minus i two five" },
    Site { file: "accept/div.ma", call: "div i six one" },
    Site { file: "accept/div.ma", call: "div i five two" },
    Site { file: "accept/div.ma", call: "div i (minus i six one) one" },
    Site { file: "accept/snat_parametric.ma", call: "pred i two" },
    Site { file: "accept/maxs.ma", call: "max2 i n3 n5" },
    Site { file: "accept/maxs.ma", call: "max2 i n4 n1" },
    Site { file: "accept/maxs.ma", call: "maxs n2 i n1 n4 n2" },
    Site { file: "accept/maxs.ma", call: "maxs n1 i n3 n0" },
    Site { file: "accept/rose.ma", call: "mapRose Bool Bool not i tree" },
    Site { file: "accept/rose.ma", call: "mapRose Bool Bool not i leaf" },
    Site { file: "accept/streams.ma", call: "repeat Nat one i" },
    Site { file: "accept/streams.ma", call: "ham i" },
    Site { file: "accept/streams.ma", call: "map Nat Nat i double (repeat Nat two i)" },
    Site { file: "accept/streams.ma", call: "map Nat Nat i triple (ham i)" },
    Site { file: "accept/streams.ma", call: "merge i (ham i) (repeat Nat three i)" },
    Site { file: "accept/streams.ma", call: "head Nat i (ham ($ i))" },
    Site { file: "accept/streams.ma", call: "tail Nat i (ham ($ i))" },
    Site { file: "accept/streams.ma", call: "nth four (ham i)" },
    Site { file: "accept/fib.ma", call: "fib i" },
    Site { file: "accept/fib.ma", call: "adds i (fib i) (fib i)" },
    Site { file: "accept/fib.ma", call: "head Nat i (fib ($ i))" },
    Site { file: "accept/fib.ma", call: "tail Nat i (fib ($ i))" },
    Site { file: "accept/fib.ma", call: "nth five (fib i)" },
    Site { file: "accept/stream_eq.ma", call: "map_repeat Set Set i (\\ x -> x) Set" },
    Site { file: "accept/ordinals.ma", call: "emb three" },
    Site { file: "accept/ordinals.ma", call: "pre i emb three" },
];

#[derive(Debug)]
enum Tree {
    Leaf(String),
    Node(Vec<Tree>),
}

fn tokens(s: &str) -> Vec<String> {
    s.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn parse_tree(toks: &[String], pos: &mut usize) -> Vec<Tree> {
    let mut out = Vec::new();
    while *pos < toks.len() {
        let t = &toks[*pos];
        *pos += 1;
        match t.as_str() {
            "(" => out.push(Tree::Node(parse_tree(toks, pos))),
            ")" => break,
            _ => out.push(Tree::Leaf(t.clone())),
        }
    }
    out
}

/// Build the value of a site. `size` replaces the variable `i`.
fn site_value(ev: &Eval, checked: &Checked, items: &[Tree], size: &NormalSize) -> Value {
    let sig = &checked.sig;
    let atom = |t: &Tree| -> Value {
        match t {
            Tree::Node(inner) => site_value(ev, checked, inner, size),
            Tree::Leaf(w) if w == "i" => Value::Size(size.clone()),
            Tree::Leaf(w) if w == "#" => Value::Size(NormalSize::infty()),
            Tree::Leaf(w) if w == "Set" => Value::Set,
            Tree::Leaf(w) => {
                let name = sig.lookup_text(w).unwrap_or_else(|| panic!("unknown name {}", w)).clone();
                let e = if sig.con(&name).is_some() { Expr::Con(name) } else { Expr::Def(name) };
                ev.eval(&Env::new(), &Arc::new(e)).unwrap()
            }
        }
    };
    match items {
        [Tree::Leaf(d), rest @ ..] if d == "$" => {
            let Value::Size(s) = atom(&rest[0]) else { panic!("$ of a non-size") };
            Value::Size(s.succ().unwrap())
        }
        [Tree::Leaf(l), Tree::Leaf(x), Tree::Leaf(arrow), Tree::Leaf(body)]
            if l == "\\" && arrow == "->" && x == body =>
        {
            let id = Ident::fresh(x);
            let lam = Expr::Lam(id.clone(), Arc::new(Expr::Var(id)));
            ev.eval(&Env::new(), &Arc::new(lam)).unwrap()
        }
        [head, args @ ..] => {
            let annots = match head {
                Tree::Leaf(w) => annotations(checked, w),
                _ => Vec::new(),
            };
            let mut f = atom(head);
            for (k, a) in args.iter().enumerate() {
                let annot = annots.get(k).copied().unwrap_or(Annot::Relevant);
                f = ev
                    .apply(
                        f,
                        Arg {
                            thunk: Thunk::ready(atom(a)),
                            annot,
                        },
                    )
                    .unwrap();
            }
            f
        }
        [] => panic!("empty site"),
    }
}

fn annotations(checked: &Checked, name: &str) -> Vec<Annot> {
    let Some(id) = checked.sig.lookup_text(name) else { return Vec::new() };
    let ty = match checked.sig.get(id) {
        Some(sizedcheck::signature::Entry::Fun(f)) => f.ty.clone(),
        Some(sizedcheck::signature::Entry::Let(l)) => l.ty.clone(),
        Some(sizedcheck::signature::Entry::Con(c)) => c.ty.clone(),
        _ => return Vec::new(),
    };
    let mut out = Vec::new();
    let mut cur = &*ty;
    while let Expr::Pi(a, _, _, c) = cur {
        out.push(*a);
        cur = c;
    }
    out
}

/// Readbacks of a site with `i` a size variable and with `i` replaced by
/// `#`.
pub fn erasure_pair(site: &Site) -> (String, String) {
    let checked = check_source(&read_corpus(site.file));
    let ev = Eval::new(&checked.sig, 10_000_000);
    let toks = tokens(site.call);
    let tree = parse_tree(&toks, &mut 0);
    let opts = ReadbackOptions::default();
    let var = NormalSize::var(Ident::fresh("i"));
    let with_var = site_value(&ev, &checked, &tree, &var);
    let a = ev.readback(with_var, &opts).unwrap();
    let erased = site_value(&ev, &checked, &tree, &NormalSize::infty());
    let b = ev.readback(erased, &opts).unwrap();
    (a, b)
}

/// Is the head of the site a `fun` or `cofun`?
pub fn site_is_function(site: &Site) -> bool {
    let checked = check_source(&read_corpus(site.file));
    let head = site.call.split_whitespace().next().unwrap();
    checked
        .sig
        .lookup_text(head)
        .is_some_and(|id| checked.sig.fun(id).is_some())
}

// ------------------------------------------------------------ subtyping

pub const SUBTYPING_SRC: &str = "
data Nat : Set
{ zero : Nat
; succ : Nat -> Nat
}

sized data SNat : Size -> Set
{ szero : [i : Size] -> SNat ($ i)
; ssucc : [i : Size] -> SNat i -> SNat ($ i)
}

sized codata Stream ++(A : Set) : Size -> Set
{ cons : [i : Size] -> A -> Stream A i -> Stream A ($ i)
}
";

pub struct SubtypingFixture {
    pub checked: Checked,
}

impl SubtypingFixture {
    pub fn new() -> Self {
        SubtypingFixture {
            checked: check_source(SUBTYPING_SRC),
        }
    }

    fn name(&self, n: &str) -> Ident {
        self.checked.sig.lookup_text(n).unwrap().clone()
    }

    pub fn snat(&self, s: &NormalSize) -> Value {
        Value::App(
            Head::Data(self.name("SNat")),
            vec![Arg {
                thunk: Thunk::ready(Value::Size(s.clone())),
                annot: Annot::Relevant,
            }],
        )
    }

    pub fn stream(&self, s: &NormalSize) -> Value {
        let nat = Value::App(Head::Data(self.name("Nat")), Vec::new());
        Value::App(
            Head::Data(self.name("Stream")),
            vec![
                Arg {
                    thunk: Thunk::ready(nat),
                    annot: Annot::Relevant,
                },
                Arg {
                    thunk: Thunk::ready(Value::Size(s.clone())),
                    annot: Annot::Relevant,
                },
            ],
        )
    }

    pub fn sub(&self, ctx: &SizeCtx, a: &Value, b: &Value) -> bool {
        let ev = Eval::new(&self.checked.sig, 10_000);
        Conv::new(&ev).sub(ctx, a, b).unwrap()
    }
}
