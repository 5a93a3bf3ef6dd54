//! RDF graphs: CSV conversion, N-Triples / RDF-XML output, and a SPARQL
//! subset (SELECT, basic graph patterns, FILTER with comparisons).
//!
//! Blank nodes are not modelled; every subject and predicate is an IRI.

mod convert;
mod ntriples;
mod query;
mod rdfxml;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

pub use convert::csv_to_graph;
pub use ntriples::{parse_ntriples, to_ntriples};
pub use query::{
    execute, parse_query, parse_query_with_prefixes, row_bindings, time_queries, CmpOp, Expr,
    Operand, PatternTerm, Projection, Query, QueryTiming, ResultTable, TriplePattern,
};
pub use rdfxml::to_rdfxml;

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemwebError {
    #[error("invalid IRI `{0}`")]
    BadIri(String),
    #[error("`{lexical}` is not a valid {datatype} literal")]
    BadLiteral {
        lexical: String,
        datatype: &'static str,
    },
    #[error("prefix `{0}` already bound to a different namespace")]
    PrefixConflict(String),
    #[error("line {line}: {reason}")]
    SyntaxError { line: usize, reason: String },
    #[error("query syntax error at byte {pos}: expected {expected}")]
    QuerySyntax { pos: usize, expected: String },
    #[error("variable ?{0} does not occur in any triple pattern")]
    UnboundVariable(String),
    #[error("unknown prefix `{0}:`")]
    UnknownPrefix(String),
    #[error("predicate <{0}> has no XML-qualifiable local name")]
    UnserializablePredicate(String),
    #[error("result of repetition {repetition} differs from the reference execution")]
    ResultDrift { repetition: usize },
}

pub type Result<T, E = SemwebError> = std::result::Result<T, E>;

/// Absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    /// Accepts `scheme:rest` with no whitespace and none of the characters
    /// N-Triples forbids inside IRI references.
    pub fn new(s: impl Into<String>) -> Result<Self> {
        let s = s.into();
        let Some((scheme, _)) = s.split_once(':') else {
            return Err(SemwebError::BadIri(s));
        };
        let scheme_ok = scheme
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic())
            && scheme
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c));
        let body_ok = !s
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || "<>\"{}|^`\\".contains(c));
        if scheme_ok && body_ok {
            Ok(Iri(s))
        } else {
            Err(SemwebError::BadIri(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datatype {
    Integer,
    Decimal,
    String,
    Boolean,
}

impl Datatype {
    pub fn iri(self) -> String {
        format!("{XSD}{}", self.local())
    }

    fn local(self) -> &'static str {
        match self {
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::String => "string",
            Datatype::Boolean => "boolean",
        }
    }

    pub fn from_iri(iri: &str) -> Option<Datatype> {
        let local = iri.strip_prefix(XSD)?;
        [
            Datatype::Integer,
            Datatype::Decimal,
            Datatype::String,
            Datatype::Boolean,
        ]
        .into_iter()
        .find(|d| d.local() == local)
    }

    fn accepts(self, lexical: &str) -> bool {
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        let unsigned = |s: &str| s.strip_prefix(['+', '-']).unwrap_or(s).to_string();
        match self {
            Datatype::Integer => digits(&unsigned(lexical)),
            Datatype::Decimal => {
                let u = unsigned(lexical);
                match u.split_once('.') {
                    Some((a, b)) => {
                        (a.is_empty() || digits(a))
                            && (b.is_empty() || digits(b))
                            && !(a.is_empty() && b.is_empty())
                    }
                    None => digits(&u),
                }
            }
            Datatype::String => true,
            Datatype::Boolean => matches!(lexical, "true" | "false" | "1" | "0"),
        }
    }
}

/// Typed literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
}

impl Literal {
    pub fn new(lexical: impl Into<String>, datatype: Datatype) -> Result<Self> {
        let lexical = lexical.into();
        if datatype.accepts(&lexical) {
            Ok(Literal { lexical, datatype })
        } else {
            Err(SemwebError::BadLiteral {
                lexical,
                datatype: datatype.local(),
            })
        }
    }

    pub fn integer(v: i64) -> Self {
        Literal {
            lexical: v.to_string(),
            datatype: Datatype::Integer,
        }
    }

    /// Decimal literal from a finite float (Rust's shortest round-trip form).
    pub fn decimal(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(SemwebError::BadLiteral {
                lexical: v.to_string(),
                datatype: "decimal",
            });
        }
        Literal::new(format!("{v}"), Datatype::Decimal)
    }

    pub fn string(s: impl Into<String>) -> Self {
        Literal {
            lexical: s.into(),
            datatype: Datatype::String,
        }
    }

    pub fn boolean(b: bool) -> Self {
        Literal {
            lexical: b.to_string(),
            datatype: Datatype::Boolean,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    /// Numeric value for integer and decimal literals.
    pub fn as_number(&self) -> Option<f64> {
        match self.datatype {
            Datatype::Integer | Datatype::Decimal => self.lexical.parse().ok(),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match (self.datatype, self.lexical.as_str()) {
            (Datatype::Boolean, "true" | "1") => Some(true),
            (Datatype::Boolean, "false" | "0") => Some(false),
            _ => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        for c in self.lexical.chars() {
            match c {
                '"' => f.write_str("\\\"")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                '\r' => f.write_str("\\r")?,
                '\t' => f.write_str("\\t")?,
                c => write!(f, "{c}")?,
            }
        }
        write!(f, "\"^^<{}>", self.datatype.iri())
    }
}

/// Object position: IRI or literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => i.fmt(f),
            Term::Literal(l) => l.fmt(f),
        }
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// Positional lookup tables, built on first query and dropped on mutation.
#[derive(Debug, Default)]
pub(crate) struct GraphIndex {
    pub triples: Vec<Triple>,
    pub by_subject: HashMap<Iri, Vec<usize>>,
    pub by_predicate: HashMap<Iri, Vec<usize>>,
    pub by_object: HashMap<Term, Vec<usize>>,
}

/// Set of triples plus a namespace prefix map.
#[derive(Debug, Default)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, Iri>,
    index: OnceLock<GraphIndex>,
}

impl Clone for Graph {
    fn clone(&self) -> Self {
        Graph {
            triples: self.triples.clone(),
            prefixes: self.prefixes.clone(),
            index: OnceLock::new(),
        }
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples && self.prefixes == other.prefixes
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    /// Returns whether the triple was new.
    pub fn insert(&mut self, t: Triple) -> bool {
        self.index = OnceLock::new();
        self.triples.insert(t)
    }

    pub fn bind_prefix(&mut self, prefix: &str, namespace: Iri) -> Result<()> {
        match self.prefixes.get(prefix) {
            Some(existing) if *existing != namespace => {
                Err(SemwebError::PrefixConflict(prefix.to_string()))
            }
            _ => {
                self.prefixes.insert(prefix.to_string(), namespace);
                Ok(())
            }
        }
    }

    pub fn prefixes(&self) -> &BTreeMap<String, Iri> {
        &self.prefixes
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Triples in canonical order: by serialized subject, then predicate,
    /// then object.
    pub fn canonical_triples(&self) -> Vec<&Triple> {
        let mut keyed: Vec<((String, String, String), &Triple)> = self
            .triples
            .iter()
            .map(|t| {
                (
                    (
                        t.subject.to_string(),
                        t.predicate.to_string(),
                        t.object.to_string(),
                    ),
                    t,
                )
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.into_iter().map(|(_, t)| t).collect()
    }

    /// First `rdfs:label` string of `subject`, if any.
    pub fn label_of(&self, subject: &Iri) -> Option<&str> {
        let label = format!("{RDFS}label");
        self.triples
            .iter()
            .filter(|t| t.subject == *subject && t.predicate.as_str() == label)
            .find_map(|t| match &t.object {
                Term::Literal(l) => Some(l.lexical()),
                Term::Iri(_) => None,
            })
    }

    pub(crate) fn index(&self) -> &GraphIndex {
        self.index.get_or_init(|| {
            let triples: Vec<Triple> = self.triples.iter().cloned().collect();
            let mut idx = GraphIndex::default();
            for (i, t) in triples.iter().enumerate() {
                idx.by_subject.entry(t.subject.clone()).or_default().push(i);
                idx.by_predicate
                    .entry(t.predicate.clone())
                    .or_default()
                    .push(i);
                idx.by_object.entry(t.object.clone()).or_default().push(i);
            }
            idx.triples = triples;
            idx
        })
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        for t in iter {
            g.insert(t);
        }
        g
    }
}
