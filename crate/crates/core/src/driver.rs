//! Batch driver: check files, evaluate `eval let`s, run a golden corpus.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use similar::TextDiff;

use crate::check::{check_program, CheckOptions};
use crate::diagnostic::{Code, Diagnostic};
use crate::eval::{Env, Eval, ReadbackOptions};
use crate::parser::parse_source;
use crate::scope::scope_check;
use crate::syntax::{DeclKind, Expr, Pos};
use crate::totality::explain;

/// Unfolding budget for each `eval let`.
pub const EVAL_FUEL: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub print_constraints: bool,
    pub print_sizes: bool,
    pub explain_totality: Option<String>,
    pub unfold_fuel: u64,
    pub print_depth: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            print_constraints: false,
            print_sizes: false,
            explain_totality: None,
            unfold_fuel: 10_000,
            print_depth: 3,
        }
    }
}

/// Check one program and evaluate its `eval let`s. Returns what goes to
/// stdout.
pub fn process_source(source: &str, cfg: &RunConfig) -> Result<String, Diagnostic> {
    let concrete = parse_source(source).map_err(|e| {
        Diagnostic::new(
            Code::Parse,
            Pos {
                line: e.line,
                col: e.column,
            },
            e.to_string(),
        )
    })?;
    let decls = scope_check(&concrete)?;
    let checked = check_program(
        &decls,
        &CheckOptions {
            unfold_fuel: cfg.unfold_fuel.max(1),
        },
    )?;
    let mut out = String::new();
    if cfg.print_constraints {
        for cc in &checked.constraints {
            let _ = writeln!(out, "-- {} clause {}", cc.fun, cc.clause + 1);
            for c in &cc.constraints {
                let _ = writeln!(out, "{}", c);
            }
        }
    }
    if let Some(name) = &cfg.explain_totality {
        match checked.reports.iter().find(|(f, _)| &*f.text == name.as_str()) {
            Some((f, report)) => out.push_str(&explain(f, report)),
            None => {
                let _ = writeln!(out, "totality {}: not a fun or cofun", name);
            }
        }
    }
    let positions: HashMap<_, _> = decls
        .iter()
        .filter(|d| matches!(d.kind, DeclKind::Let(_)))
        .map(|d| (d.name().clone(), d.pos))
        .collect();
    let opts = ReadbackOptions {
        depth: cfg.print_depth,
        print_sizes: cfg.print_sizes,
        ..ReadbackOptions::default()
    };
    for l in checked.sig.lets().filter(|l| l.eval) {
        let pos = positions.get(&l.name).copied().unwrap_or_default();
        let ev = Eval::new(&checked.sig, EVAL_FUEL);
        let shown = ev
            .eval(&Env::new(), &Arc::new(Expr::Def(l.name.clone())))
            .and_then(|v| ev.readback(v, &opts))
            .map_err(|e| Diagnostic::new(Code::Eval, pos, format!("evaluating `{}`: {}", l.name, e)))?;
        let _ = writeln!(out, "{} = {}", l.name, shown);
    }
    Ok(out)
}

/// `sizedcheck check FILE...`; returns the exit code.
pub fn run_check(paths: &[PathBuf], cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut code = 0;
    for p in paths {
        let source = match std::fs::read_to_string(p) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(err, "error: cannot read {}: {}", p.display(), e);
                return 2;
            }
        };
        match process_source(&source, cfg) {
            Ok(text) => {
                let _ = out.write_all(text.as_bytes());
            }
            Err(d) => {
                let _ = writeln!(err, "{}", d.render(&p.display().to_string()));
                code = 1;
            }
        }
    }
    code
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    /// Exact expected stdout.
    Accept(String),
    Reject(Code),
}

pub fn parse_expectation(text: &str) -> Result<Expectation, String> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let mut words = first.split_whitespace();
    match (words.next(), words.next(), words.next()) {
        (Some("ACCEPT"), None, _) => Ok(Expectation::Accept(rest.to_string())),
        (Some("REJECT"), Some(c), None) => Code::parse(c)
            .map(Expectation::Reject)
            .ok_or_else(|| format!("unknown error code `{}`", c)),
        _ => Err(format!("first line must be `ACCEPT` or `REJECT <CODE>`, found `{}`", first)),
    }
}

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub name: String,
    pub pass: bool,
    /// Why a failing case failed.
    pub detail: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GoldenError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, io::Error),
    #[error("malformed expectation {0}: {1}")]
    Expectation(PathBuf, String),
}

impl GoldenError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Every `.ma` file below `dir`, sorted.
pub fn collect_cases(dir: &Path) -> Result<Vec<PathBuf>, GoldenError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d).map_err(|e| GoldenError::Io(d.clone(), e))?;
        for entry in entries {
            let path = entry.map_err(|e| GoldenError::Io(d.clone(), e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|x| x == "ma") {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn case_name(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path).with_extension("");
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

pub fn run_case(root: &Path, path: &Path, cfg: &RunConfig) -> Result<CaseResult, GoldenError> {
    let expect_path = path.with_extension("expect");
    let expect_text =
        std::fs::read_to_string(&expect_path).map_err(|e| GoldenError::Io(expect_path.clone(), e))?;
    let expectation =
        parse_expectation(&expect_text).map_err(|m| GoldenError::Expectation(expect_path.clone(), m))?;
    let source = std::fs::read_to_string(path).map_err(|e| GoldenError::Io(path.to_path_buf(), e))?;
    let name = case_name(root, path);
    let outcome = process_source(&source, cfg);
    let (pass, detail) = match (expectation, outcome) {
        (Expectation::Accept(want), Ok(got)) => {
            if want.trim_end() == got.trim_end() {
                (true, String::new())
            } else {
                let diff = TextDiff::from_lines(want.trim_end(), got.trim_end())
                    .unified_diff()
                    .header("expected", "actual")
                    .to_string();
                (false, diff)
            }
        }
        (Expectation::Accept(_), Err(d)) => (false, format!("expected success, got {}", d.render(&name))),
        (Expectation::Reject(c), Ok(_)) => (false, format!("expected {}, got success", c)),
        (Expectation::Reject(c), Err(d)) if d.code == c => (true, String::new()),
        (Expectation::Reject(c), Err(d)) => (false, format!("expected {}, got {}", c, d.render(&name))),
    };
    Ok(CaseResult { name, pass, detail })
}

pub fn run_cases_sequential(
    root: &Path,
    cases: &[PathBuf],
    cfg: &RunConfig,
) -> Result<Vec<CaseResult>, GoldenError> {
    cases.iter().map(|p| run_case(root, p, cfg)).collect()
}

#[cfg(feature = "parallel")]
pub fn run_cases_parallel(
    root: &Path,
    cases: &[PathBuf],
    cfg: &RunConfig,
) -> Result<Vec<CaseResult>, GoldenError> {
    use rayon::prelude::*;
    cases.par_iter().map(|p| run_case(root, p, cfg)).collect()
}

/// Parallel when the `parallel` feature is on. Results keep the order of
/// `cases` either way.
pub fn run_cases(root: &Path, cases: &[PathBuf], cfg: &RunConfig) -> Result<Vec<CaseResult>, GoldenError> {
    #[cfg(feature = "parallel")]
    {
        run_cases_parallel(root, cases, cfg)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_cases_sequential(root, cases, cfg)
    }
}

/// `sizedcheck golden DIR`; returns the exit code.
pub fn run_golden(dir: &Path, cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let results = collect_cases(dir).and_then(|cases| run_cases(dir, &cases, cfg));
    let results = match results {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e);
            return e.exit_code();
        }
    };
    let failed = results.iter().filter(|r| !r.pass).count();
    for r in &results {
        let _ = writeln!(out, "{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
        if !r.pass {
            for line in r.detail.lines() {
                let _ = writeln!(out, "    {}", line);
            }
        }
    }
    let _ = writeln!(out, "{} passed, {} failed", results.len() - failed, failed);
    i32::from(failed > 0)
}
