//! SPARQL subset: `PREFIX`, `SELECT` (variables or `*`), a basic graph
//! pattern and `FILTER` expressions built from comparisons, `&&` and `||`.

mod exec;
mod parser;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{Graph, Iri, Literal, Term};

pub use exec::{execute, time_queries, QueryTiming};
pub use parser::{parse_query, parse_query_with_prefixes};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternTerm {
    Var(String),
    Iri(Iri),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }

    fn test(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Var(String),
    Const(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Cmp(CmpOp, Operand, Operand),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Three-valued evaluation: `None` is a type error. `&&` and `||` follow
    /// the SPARQL error tables (`error && false = false`,
    /// `error || true = true`).
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<Term>) -> Option<bool> {
        match self {
            Expr::Cmp(op, a, b) => {
                let resolve = |o: &Operand| match o {
                    Operand::Var(v) => lookup(v),
                    Operand::Const(t) => Some(t.clone()),
                };
                compare(*op, &resolve(a)?, &resolve(b)?)
            }
            Expr::And(a, b) => match (a.eval(lookup), b.eval(lookup)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Expr::Or(a, b) => match (a.eval(lookup), b.eval(lookup)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
        }
    }

    pub fn variables(&self, out: &mut Vec<String>) {
        match self {
            Expr::Cmp(_, a, b) => {
                for o in [a, b] {
                    if let Operand::Var(v) = o {
                        out.push(v.clone());
                    }
                }
            }
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.variables(out);
                b.variables(out);
            }
        }
    }
}

/// Numbers compare numerically (integer and decimal coerced), strings
/// lexicographically, booleans with `false < true`, IRIs by equality only.
/// Anything else is a type error.
fn compare(op: CmpOp, a: &Term, b: &Term) -> Option<bool> {
    match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => {
            if let (Some(p), Some(q)) = (x.as_number(), y.as_number()) {
                return p.partial_cmp(&q).map(|o| op.test(o));
            }
            if let (Some(p), Some(q)) = (x.as_bool(), y.as_bool()) {
                return Some(op.test(p.cmp(&q)));
            }
            use super::Datatype::String as S;
            if x.datatype() == S && y.datatype() == S {
                return Some(op.test(x.lexical().cmp(y.lexical())));
            }
            None
        }
        (Term::Iri(x), Term::Iri(y)) => match op {
            CmpOp::Eq => Some(x == y),
            CmpOp::Ne => Some(x != y),
            _ => None,
        },
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub prefixes: BTreeMap<String, Iri>,
    pub projection: Projection,
    pub patterns: Vec<TriplePattern>,
    pub filter: Option<Expr>,
}

impl Query {
    /// Pattern variables in order of first appearance.
    pub fn pattern_variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.patterns {
            for t in p.positions() {
                if let PatternTerm::Var(v) = t {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    /// Output columns: the projection list, or all pattern variables for `*`.
    pub fn columns(&self) -> Vec<String> {
        match &self.projection {
            Projection::All => self.pattern_variables(),
            Projection::Vars(v) => v.clone(),
        }
    }
}

/// Query answer with canonically ordered, duplicate-free rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Term>>,
    /// Solutions dropped because the filter raised a type error.
    pub rejected_bindings: usize,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Tab-separated text with a header row. Strings are double-quoted,
    /// numbers and booleans bare, IRIs in angle brackets. With `labels`,
    /// IRIs that carry an `rdfs:label` in that graph print as the label.
    pub fn to_tsv(&self, labels: Option<&Graph>) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|t| render_cell(t, labels)).collect();
            let _ = writeln!(out, "{}", cells.join("\t"));
        }
        out
    }

    /// Cells as display strings (see [`ResultTable::to_tsv`]).
    pub fn display_rows(&self, labels: Option<&Graph>) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|t| render_cell(t, labels)).collect())
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let cells: serde_json::Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, t)| {
                        let v = match t {
                            Term::Iri(i) => json!({"type": "iri", "value": i.as_str()}),
                            Term::Literal(l) => {
                                json!({"type": "literal", "value": l.lexical(), "datatype": l.datatype().iri()})
                            }
                        };
                        (c.clone(), v)
                    })
                    .collect();
                Value::Object(cells)
            })
            .collect();
        json!({"columns": self.columns, "rows": rows, "rejected_bindings": self.rejected_bindings})
    }

    pub(crate) fn from_rows(
        columns: Vec<String>,
        rows: impl IntoIterator<Item = Vec<Term>>,
        rejected: usize,
    ) -> Self {
        let mut keyed: BTreeMap<Vec<String>, Vec<Term>> = BTreeMap::new();
        for r in rows {
            keyed
                .entry(r.iter().map(Term::to_string).collect())
                .or_insert(r);
        }
        ResultTable {
            columns,
            rows: keyed.into_values().collect(),
            rejected_bindings: rejected,
        }
    }
}

fn render_cell(t: &Term, labels: Option<&Graph>) -> String {
    match t {
        Term::Iri(i) => match labels.and_then(|g| g.label_of(i)) {
            Some(l) => format!("{l:?}"),
            None => i.to_string(),
        },
        Term::Literal(l) => match l.datatype() {
            super::Datatype::String => format!("{:?}", l.lexical()),
            _ => l.lexical().to_string(),
        },
    }
}

/// Bindings from variable name to term, for callers that want to check a
/// result row against the patterns.
pub fn row_bindings(table: &ResultTable, row: usize) -> HashMap<String, Term> {
    table
        .columns
        .iter()
        .cloned()
        .zip(table.rows[row].iter().cloned())
        .collect()
}
