//! Horn-clause rules over unary and binary atoms, evaluated to a least
//! fixpoint by semi-naive forward chaining.
//!
//! ```text
//! # comment
//! rule r1: when PreventiveAction(?a), hasScenario(?a, ?s), hasIgnitionRisk(?s, ?r),
//!               lessThanOrEqual(?r, 0.5)
//!          then assert reduceIgnitionRisk(?a)
//! PreventiveAction(?a) ^ populationSensitization(?a) -> sensitizePopulation(?a)
//! ```
//!
//! The second (`^` / `->`) form may carry `swrlb:`-prefixed builtins and is
//! named `swrl_<line>` unless written after `rule <name>:`.

mod eval;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ordered_float::OrderedFloat;
use thiserror::Error;

pub use eval::evaluate;
pub use parse::{parse_facts, parse_rules};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RulesError {
    #[error("line {line}, column {col}: expected {}", expected.join(" or "))]
    SyntaxError {
        line: usize,
        col: usize,
        expected: Vec<String>,
    },
    #[error("rule `{rule}`: variable ?{variable} does not occur in a body atom")]
    UnsafeVariable { rule: String, variable: String },
    #[error("line {line}: unknown builtin `{name}`")]
    UnknownBuiltin { line: usize, name: String },
    #[error("rule name `{0}` used twice")]
    DuplicateRuleName(String),
    #[error("{context}: cannot apply {op} to {left} and {right}")]
    TypeClash {
        context: String,
        op: &'static str,
        left: String,
        right: String,
    },
    #[error("fact {0} contains a variable")]
    NotGround(String),
    #[error("fact {0} is not in the fact base")]
    UnknownFact(String),
}

pub type Result<T, E = RulesError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Ind(String),
    Str(String),
    Num(OrderedFloat<f64>),
    Bool(bool),
}

impl Term {
    pub fn num(v: f64) -> Term {
        Term::Num(OrderedFloat(v))
    }

    pub fn ind(s: impl Into<String>) -> Term {
        Term::Ind(s.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Ind(s) => f.write_str(s),
            Term::Str(s) => write!(f, "{s:?}"),
            Term::Num(n) => write!(f, "{}", n.0),
            Term::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn unary(predicate: impl Into<String>, a: Term) -> Atom {
        Atom {
            predicate: predicate.into(),
            args: vec![a],
        }
    }

    pub fn binary(predicate: impl Into<String>, a: Term, b: Term) -> Atom {
        Atom {
            predicate: predicate.into(),
            args: vec![a, b],
        }
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }

    fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinOp {
    LessThan,
    LessThanOrEqual,
    GreaterThan,
    GreaterThanOrEqual,
    Equal,
    NotEqual,
}

impl BuiltinOp {
    pub const ALL: [BuiltinOp; 6] = [
        BuiltinOp::LessThan,
        BuiltinOp::LessThanOrEqual,
        BuiltinOp::GreaterThan,
        BuiltinOp::GreaterThanOrEqual,
        BuiltinOp::Equal,
        BuiltinOp::NotEqual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinOp::LessThan => "lessThan",
            BuiltinOp::LessThanOrEqual => "lessThanOrEqual",
            BuiltinOp::GreaterThan => "greaterThan",
            BuiltinOp::GreaterThanOrEqual => "greaterThanOrEqual",
            BuiltinOp::Equal => "equal",
            BuiltinOp::NotEqual => "notEqual",
        }
    }

    pub fn from_name(name: &str) -> Option<BuiltinOp> {
        BuiltinOp::ALL.into_iter().find(|op| op.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Builtin {
    pub op: BuiltinOp,
    pub args: [Term; 2],
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.op.name(), self.args[0], self.args[1])
    }
}

/// Numbers are totally ordered; strings, booleans and individuals support
/// only `equal` / `notEqual`, and only against the same kind.
pub fn builtin_compare(op: BuiltinOp, a: &Term, b: &Term) -> Result<bool> {
    use std::cmp::Ordering::*;
    let clash = || RulesError::TypeClash {
        context: "builtin".into(),
        op: op.name(),
        left: a.to_string(),
        right: b.to_string(),
    };
    let ord = match (a, b) {
        (Term::Num(x), Term::Num(y)) => x.cmp(y),
        (Term::Str(x), Term::Str(y)) => x.cmp(y),
        (Term::Bool(x), Term::Bool(y)) => x.cmp(y),
        (Term::Ind(x), Term::Ind(y)) => x.cmp(y),
        _ => return Err(clash()),
    };
    let numeric = matches!(a, Term::Num(_));
    Ok(match op {
        BuiltinOp::Equal => ord == Equal,
        BuiltinOp::NotEqual => ord != Equal,
        _ if !numeric => return Err(clash()),
        BuiltinOp::LessThan => ord == Less,
        BuiltinOp::LessThanOrEqual => ord != Greater,
        BuiltinOp::GreaterThan => ord == Greater,
        BuiltinOp::GreaterThanOrEqual => ord != Less,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyItem {
    Atom(Atom),
    Builtin(Builtin),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleDef {
    pub name: String,
    pub body: Vec<BodyItem>,
    pub head: Vec<Atom>,
    /// Source line of the rule's first token.
    pub line: usize,
}

impl RuleDef {
    pub fn body_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Atom(a) => Some(a),
            BodyItem::Builtin(_) => None,
        })
    }

    pub fn builtins(&self) -> impl Iterator<Item = &Builtin> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Builtin(x) => Some(x),
            BodyItem::Atom(_) => None,
        })
    }

    /// Every head variable and builtin variable must occur in a body atom.
    pub fn check_safety(&self) -> Result<()> {
        let bound: BTreeSet<&str> = self.body_atoms().flat_map(Atom::vars).collect();
        let builtin_vars = self
            .builtins()
            .flat_map(|b| b.args.iter())
            .filter_map(|t| match t {
                Term::Var(v) => Some(v.as_str()),
                _ => None,
            });
        for v in self.head.iter().flat_map(Atom::vars).chain(builtin_vars) {
            if !bound.contains(v) {
                return Err(RulesError::UnsafeVariable {
                    rule: self.name.clone(),
                    variable: v.to_string(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for RuleDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}: when ", self.name)?;
        for (i, b) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match b {
                BodyItem::Atom(a) => write!(f, "{a}")?,
                BodyItem::Builtin(x) => write!(f, "{x}")?,
            }
        }
        f.write_str(" then assert ")?;
        for (i, a) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<RuleDef>,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&RuleDef> {
        self.rules.iter().find(|r| r.name == name)
    }

    /// Builds a rule set, checking safety and name uniqueness.
    pub fn new(rules: Vec<RuleDef>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for r in &rules {
            if !names.insert(r.name.as_str()) {
                return Err(RulesError::DuplicateRuleName(r.name.clone()));
            }
            r.check_safety()?;
        }
        Ok(RuleSet { rules })
    }
}

/// How a derived fact was first obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: String,
    pub bindings: BTreeMap<String, Term>,
    pub premises: Vec<Atom>,
}

/// Ground atoms plus derivation records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactBase {
    facts: BTreeSet<Atom>,
    asserted: BTreeSet<Atom>,
    derivations: BTreeMap<Atom, Derivation>,
}

impl FactBase {
    pub fn new() -> Self {
        FactBase::default()
    }

    /// Adds an asserted fact; returns whether it was new.
    pub fn assert(&mut self, fact: Atom) -> Result<bool> {
        if !fact.is_ground() {
            return Err(RulesError::NotGround(fact.to_string()));
        }
        self.asserted.insert(fact.clone());
        Ok(self.facts.insert(fact))
    }

    pub fn from_facts(facts: impl IntoIterator<Item = Atom>) -> Result<Self> {
        let mut fb = FactBase::new();
        for f in facts {
            fb.assert(f)?;
        }
        Ok(fb)
    }

    pub(crate) fn add_derived(&mut self, fact: Atom, d: Derivation) -> bool {
        if self.facts.insert(fact.clone()) {
            self.derivations.insert(fact, d);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, fact: &Atom) -> bool {
        self.facts.contains(fact)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.facts.iter()
    }

    pub fn facts(&self) -> &BTreeSet<Atom> {
        &self.facts
    }

    pub fn is_asserted(&self, fact: &Atom) -> bool {
        self.asserted.contains(fact)
    }

    /// Facts obtained only by derivation, in canonical order.
    pub fn derived(&self) -> impl Iterator<Item = (&Atom, &Derivation)> {
        self.derivations
            .iter()
            .filter(|(a, _)| !self.asserted.contains(*a))
    }

    pub fn derivation(&self, fact: &Atom) -> Option<&Derivation> {
        self.derivations.get(fact)
    }
}

/// Derivation tree node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Explanation {
    Asserted(Atom),
    Derived {
        fact: Atom,
        rule: String,
        bindings: BTreeMap<String, Term>,
        premises: Vec<Explanation>,
    },
}

impl Explanation {
    pub fn fact(&self) -> &Atom {
        match self {
            Explanation::Asserted(a) | Explanation::Derived { fact: a, .. } => a,
        }
    }

    /// Indented text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match self {
            Explanation::Asserted(a) => out.push_str(&format!("{pad}{a}  [asserted]\n")),
            Explanation::Derived {
                fact,
                rule,
                bindings,
                premises,
            } => {
                let b: Vec<String> = bindings.iter().map(|(k, v)| format!("?{k}={v}")).collect();
                out.push_str(&format!("{pad}{fact}  [rule {rule}; {}]\n", b.join(", ")));
                for p in premises {
                    p.render_into(depth + 1, out);
                }
            }
        }
    }
}

/// Explains a fact down to asserted leaves. An asserted fact is a single
/// leaf even if some rule would also derive it.
pub fn explain(facts: &FactBase, fact: &Atom) -> Result<Explanation> {
    if !facts.contains(fact) {
        return Err(RulesError::UnknownFact(fact.to_string()));
    }
    if facts.is_asserted(fact) {
        return Ok(Explanation::Asserted(fact.clone()));
    }
    let d = facts
        .derivation(fact)
        .expect("every non-asserted fact has a derivation");
    let premises = d
        .premises
        .iter()
        .map(|p| explain(facts, p))
        .collect::<Result<_>>()?;
    Ok(Explanation::Derived {
        fact: fact.clone(),
        rule: d.rule.clone(),
        bindings: d.bindings.clone(),
        premises,
    })
}
