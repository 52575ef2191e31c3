use std::fmt;

use crate::syntax::Pos;

/// Stable error codes reported on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Code {
    Unbound,
    Duplicate,
    Parse,
    TypeMismatch,
    NotAFunction,
    ParametricViolation,
    SizeIndexShape,
    SizeMonotonicity,
    Positivity,
    SizePatternRequired,
    IllegalSizeRefinement,
    CofunMatchOnVariableSize,
    DotMismatch,
    Admissibility,
    Termination,
    Productivity,
    UnsolvedMeta,
    /// Evaluation of an `eval let` failed (stuck match or fuel).
    Eval,
}

impl Code {
    pub const ALL: [Code; 18] = [
        Code::Unbound,
        Code::Duplicate,
        Code::Parse,
        Code::TypeMismatch,
        Code::NotAFunction,
        Code::ParametricViolation,
        Code::SizeIndexShape,
        Code::SizeMonotonicity,
        Code::Positivity,
        Code::SizePatternRequired,
        Code::IllegalSizeRefinement,
        Code::CofunMatchOnVariableSize,
        Code::DotMismatch,
        Code::Admissibility,
        Code::Termination,
        Code::Productivity,
        Code::UnsolvedMeta,
        Code::Eval,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::Unbound => "UNBOUND",
            Code::Duplicate => "DUPLICATE",
            Code::Parse => "PARSE",
            Code::TypeMismatch => "TYPE-MISMATCH",
            Code::NotAFunction => "NOT-A-FUNCTION",
            Code::ParametricViolation => "PARAMETRIC-VIOLATION",
            Code::SizeIndexShape => "SIZE-INDEX-SHAPE",
            Code::SizeMonotonicity => "SIZE-MONOTONICITY",
            Code::Positivity => "POSITIVITY",
            Code::SizePatternRequired => "SIZE-PATTERN-REQUIRED",
            Code::IllegalSizeRefinement => "ILLEGAL-SIZE-REFINEMENT",
            Code::CofunMatchOnVariableSize => "COFUN-MATCH-ON-VARIABLE-SIZE",
            Code::DotMismatch => "DOT-MISMATCH",
            Code::Admissibility => "ADMISSIBILITY",
            Code::Termination => "TERMINATION",
            Code::Productivity => "PRODUCTIVITY",
            Code::UnsolvedMeta => "UNSOLVED-META",
            Code::Eval => "EVAL",
        }
    }

    pub fn parse(s: &str) -> Option<Code> {
        Code::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub pos: Pos,
}

impl Diagnostic {
    pub fn new(code: Code, pos: Pos, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            message: message.into(),
            pos,
        }
    }

    /// `CODE file:line:col message`
    pub fn render(&self, file: &str) -> String {
        format!("{} {}:{} {}", self.code, file, self.pos, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.code, self.pos, self.message)
    }
}

impl std::error::Error for Diagnostic {}
