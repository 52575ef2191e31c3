//! Global definitions visible to the evaluator and the checker.

use std::collections::HashMap;
use std::sync::Arc;

use crate::syntax::{Expr, Ident, Pattern, Polarity};

#[derive(Clone, Debug)]
pub struct DataEntry {
    pub name: Ident,
    pub sized: bool,
    pub coinductive: bool,
    /// Declared polarity of each parameter.
    pub params: Vec<Polarity>,
    pub n_indices: usize,
    /// Parameters followed by the indices.
    pub ty: Arc<Expr>,
    pub constructors: Vec<Ident>,
}

#[derive(Clone, Debug)]
pub struct ConEntry {
    pub name: Ident,
    pub data: Ident,
    /// Data parameters appear as leading parametric arguments.
    pub ty: Arc<Expr>,
    pub n_params: usize,
    pub arity: usize,
}

#[derive(Clone, Debug)]
pub struct ElabClause {
    pub lhs: Vec<Pattern>,
    pub rhs: Arc<Expr>,
}

/// How the totality of a definition was established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    NoRecursion,
    SizeDescent,
    Structural(usize),
}

#[derive(Clone, Debug)]
pub struct CallReport {
    pub clause: usize,
    pub call: String,
    /// `LT`, `LE` or `UNKNOWN` for the designated size argument.
    pub size_relation: &'static str,
    pub structural: Vec<&'static str>,
}

#[derive(Clone, Debug)]
pub struct TotalityReport {
    pub rule: Rule,
    pub calls: Vec<CallReport>,
}

#[derive(Clone, Debug)]
pub enum Totality {
    UnderCheck,
    Checked(TotalityReport),
}

#[derive(Clone, Debug)]
pub struct FunEntry {
    pub name: Ident,
    pub coinductive: bool,
    pub ty: Arc<Expr>,
    pub clauses: Vec<ElabClause>,
    pub arity: usize,
    pub size_param: Option<usize>,
    pub totality: Totality,
}

#[derive(Clone, Debug)]
pub struct LetEntry {
    pub name: Ident,
    pub ty: Arc<Expr>,
    pub body: Arc<Expr>,
    pub eval: bool,
}

#[derive(Clone, Debug)]
pub enum Entry {
    Data(DataEntry),
    Con(ConEntry),
    Fun(FunEntry),
    Let(LetEntry),
}

#[derive(Clone, Debug, Default)]
pub struct Signature {
    entries: HashMap<Ident, Entry>,
    order: Vec<Ident>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn insert(&mut self, name: Ident, entry: Entry) {
        if self.entries.insert(name.clone(), entry).is_none() {
            self.order.push(name);
        }
    }

    pub fn get(&self, name: &Ident) -> Option<&Entry> {
        self.entries.get(name)
    }

    pub fn data(&self, name: &Ident) -> Option<&DataEntry> {
        match self.entries.get(name) {
            Some(Entry::Data(d)) => Some(d),
            _ => None,
        }
    }

    pub fn con(&self, name: &Ident) -> Option<&ConEntry> {
        match self.entries.get(name) {
            Some(Entry::Con(c)) => Some(c),
            _ => None,
        }
    }

    pub fn fun(&self, name: &Ident) -> Option<&FunEntry> {
        match self.entries.get(name) {
            Some(Entry::Fun(f)) => Some(f),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Names in the order they were first declared.
    pub fn names(&self) -> &[Ident] {
        &self.order
    }

    pub fn lets(&self) -> impl Iterator<Item = &LetEntry> {
        self.order.iter().filter_map(|n| match &self.entries[n] {
            Entry::Let(l) => Some(l),
            _ => None,
        })
    }

    pub fn lookup_text(&self, text: &str) -> Option<&Ident> {
        self.order.iter().rev().find(|n| &*n.text == text)
    }
}
