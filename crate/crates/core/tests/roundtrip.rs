mod common;

use sizedcheck::driver::collect_cases;
use sizedcheck::parser::parse_source;
use sizedcheck::parser::pretty::pretty_program;
use sizedcheck::scope::scope_check;

/// Printing a program and reading it back reaches a fixed point.
#[test]
fn corpus_round_trips_through_the_printer() {
    let mut seen = 0;
    for path in collect_cases(&common::corpus()).unwrap() {
        let src = std::fs::read_to_string(&path).unwrap();
        let Ok(cst) = parse_source(&src) else { continue };
        let Ok(decls) = scope_check(&cst) else { continue };
        let once = pretty_program(&decls);
        let decls2 = scope_check(&parse_source(&once).unwrap_or_else(|e| panic!("{}: {}\n{}", path.display(), e, once)))
            .unwrap();
        let twice = pretty_program(&decls2);
        assert_eq!(once, twice, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 20);
}
