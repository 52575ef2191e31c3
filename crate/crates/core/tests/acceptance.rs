//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion.

mod common;

use common::{
    brute_force, declarations_of, div_ceil, erasure_pair, fibonacci, hamming, numeral, random_problem,
    random_size, site_is_function, snat, SubtypingFixture, SITES,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sizedcheck::driver::{collect_cases, process_source, run_cases, Expectation, RunConfig};
use sizedcheck::size::{normalize, NormalSize, Rel, SizeCtx};
use sizedcheck::syntax::Ident;

type Outcome = Result<String, String>;

fn golden_dir(sub: &str) -> Outcome {
    let root = common::corpus();
    let dir = root.join(sub);
    let cases = collect_cases(&dir).map_err(|e| e.to_string())?;
    if cases.is_empty() {
        return Err(format!("no cases under {}", dir.display()));
    }
    let results = run_cases(&root, &cases, &RunConfig::default()).map_err(|e| e.to_string())?;
    let failed: Vec<_> = results.iter().filter(|r| !r.pass).collect();
    if failed.is_empty() {
        Ok(format!("{} cases", results.len()))
    } else {
        Err(failed
            .iter()
            .map(|r| format!("{}: {}", r.name, r.detail.lines().next().unwrap_or("")))
            .collect::<Vec<_>>()
            .join("; "))
    }
}

fn accept_corpus() -> Outcome {
    golden_dir("accept")
}

fn reject_corpus() -> Outcome {
    let root = common::corpus();
    for p in collect_cases(&root.join("reject")).map_err(|e| e.to_string())? {
        let text = std::fs::read_to_string(p.with_extension("expect")).map_err(|e| e.to_string())?;
        match sizedcheck::driver::parse_expectation(&text) {
            Ok(Expectation::Reject(_)) => {}
            _ => return Err(format!("{} is not a REJECT case", p.display())),
        }
    }
    golden_dir("reject")
}

fn numerals_of(src: &str) -> Result<Vec<u64>, String> {
    let out = process_source(src, &RunConfig::default()).map_err(|d| d.to_string())?;
    out.lines()
        .map(|l| {
            let v = l.split_once(" = ").map(|(_, v)| v).unwrap_or(l);
            numeral(v).ok_or_else(|| format!("`{}` is not a numeral", l))
        })
        .collect()
}

fn expect_eq(what: &str, got: Vec<u64>, want: Vec<u64>) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: got {:?}, want {:?}", what, got, want))
    }
}

fn evaluation() -> Outcome {
    let src = format!(
        "{}\neval let m : SNat # = minus # ({}) ({})\neval let d : SNat # = div # ({}) ({})",
        declarations_of("accept/div.ma"),
        snat(5),
        snat(2),
        snat(6),
        snat(1)
    );
    expect_eq("minus/div", numerals_of(&src)?, vec![5 - 2, div_ceil(6, 1)])?;

    let triples = [(2u64, 1u64, 4u64), (3, 0, 0), (2, 2, 5)];
    let mut src = declarations_of("accept/maxs.ma");
    for (k, (a, b, c)) in triples.iter().enumerate() {
        src.push_str(&format!(
            "\neval let t{k} : SNat # = maxs n2 # ({}) ({}) ({})",
            snat(*a),
            snat(*b),
            snat(*c)
        ));
    }
    let want = triples.iter().map(|(a, b, c)| *a.max(b).max(c)).collect();
    expect_eq("maxs", numerals_of(&src)?, want)?;

    let names = ["zero", "one", "two", "three", "four", "five"];
    let mut src = declarations_of("accept/streams.ma");
    for (k, n) in names.iter().enumerate() {
        src.push_str(&format!("\neval let h{k} : Nat = nth {n} (ham #)"));
    }
    expect_eq("ham", numerals_of(&src)?, hamming(6))?;

    let mut src = declarations_of("accept/fib.ma");
    for (k, n) in names.iter().enumerate() {
        src.push_str(&format!("\neval let f{k} : Nat = nth {n} (fib #)"));
    }
    expect_eq("fib", numerals_of(&src)?, fibonacci(6))?;
    Ok("minus, div, maxs, ham, fib".into())
}

const PROBLEMS: usize = 1000;

fn size_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let rels = [Rel::Le, Rel::Lt, Rel::Eq];
    for k in 0..PROBLEMS {
        let with_max = k % 2 == 0;
        let p = random_problem(&mut rng, with_max);
        let a = normalize(&random_size(&mut rng, &p.vars, with_max, 2)).map_err(|e| e.to_string())?;
        let b = normalize(&random_size(&mut rng, &p.vars, with_max, 2)).map_err(|e| e.to_string())?;
        let r = rels[rng.gen_range(0..rels.len())];
        let got = p.ctx.entails(&a, r, &b).map_err(|e| e.to_string())?;
        let truth = brute_force(&p, &a, r, &b);
        if got && !truth {
            return Err(format!("unsound: {} {:?} {} under {:?}", a, r, b, p.ctx));
        }
        if !with_max && got != truth {
            return Err(format!("incomplete: {} {:?} {} under {:?}", a, r, b, p.ctx));
        }
        let again = normalize(&a.to_expr()).map_err(|e| e.to_string())?;
        if again != a {
            return Err(format!("normal form {} renormalizes to {}", a, again));
        }
    }
    Ok(format!("{} random problems", PROBLEMS))
}

fn erasure() -> Outcome {
    let functions = SITES.iter().filter(|s| site_is_function(s)).count();
    if functions < 20 {
        return Err(format!("only {} function call sites", functions));
    }
    for site in SITES {
        let (with_var, erased) = erasure_pair(site);
        if with_var != erased {
            return Err(format!("{}: `{}` gives {} vs {}", site.file, site.call, with_var, erased));
        }
    }
    Ok(format!("{} call sites", SITES.len()))
}

fn subtyping() -> Outcome {
    let fx = SubtypingFixture::new();
    let i = Ident::fresh("i");
    let ctx = SizeCtx::new().declare(&i);
    let vi = NormalSize::var(i);
    let chain = [vi.clone(), vi.succ().unwrap(), NormalSize::infty()];
    for (x, a) in chain.iter().enumerate() {
        for (y, b) in chain.iter().enumerate() {
            let up = fx.sub(&ctx, &fx.snat(a), &fx.snat(b));
            let down = fx.sub(&ctx, &fx.stream(a), &fx.stream(b));
            if up != (x <= y) || down != (y <= x) {
                return Err(format!("sizes {} and {}: SNat {}, Stream {}", a, b, up, down));
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..200 {
        let p = random_problem(&mut rng, true);
        let a = normalize(&random_size(&mut rng, &p.vars, true, 1)).map_err(|e| e.to_string())?;
        let b = normalize(&random_size(&mut rng, &p.vars, true, 1)).map_err(|e| e.to_string())?;
        let le = p.ctx.entails(&a, Rel::Le, &b).map_err(|e| e.to_string())?;
        let ge = p.ctx.entails(&b, Rel::Le, &a).map_err(|e| e.to_string())?;
        if fx.sub(&p.ctx, &fx.snat(&a), &fx.snat(&b)) != le {
            return Err(format!("SNat {} <= SNat {} disagrees with entailment", a, b));
        }
        if fx.sub(&p.ctx, &fx.stream(&a), &fx.stream(&b)) != ge {
            return Err(format!("Stream {} <= Stream {} disagrees with entailment", a, b));
        }
    }
    Ok("size chain and 200 random pairs".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("accept corpus", accept_corpus),
        ("reject corpus", reject_corpus),
        ("evaluation", evaluation),
        ("size algebra", size_suite),
        ("erasure", erasure),
        ("subtyping", subtyping),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(info) => println!("PASS {}: {} ({})", n + 1, name, info),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {} ({})", n + 1, name, why);
            }
        }
    }
    assert_eq!(failed, 0, "{} acceptance criteria failed", failed);
}
