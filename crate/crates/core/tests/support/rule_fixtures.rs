// Minimal fact bases that trigger (or just miss) a rule.

use std::collections::BTreeMap;

use firedss::rules::{Atom, BuiltinOp, FactBase, RuleDef, Term};

/// Value that satisfies (or violates) a single numeric builtin guard.
pub fn guard_value(op: BuiltinOp, limit: f64, satisfy: bool) -> f64 {
    match (op, satisfy) {
        (BuiltinOp::LessThanOrEqual, true) | (BuiltinOp::GreaterThanOrEqual, true) => limit,
        (BuiltinOp::LessThan, true) => limit - 1.0,
        (BuiltinOp::GreaterThan, true) => limit + 1.0,
        (BuiltinOp::LessThanOrEqual | BuiltinOp::LessThan, false) => limit + 1.0,
        (BuiltinOp::GreaterThanOrEqual | BuiltinOp::GreaterThan, false) => limit - 1.0,
        (op, _) => panic!("no numeric guard for {op:?}"),
    }
}

/// Grounds a rule body into the smallest fact base that triggers it.
pub fn minimal_facts(rule: &RuleDef, satisfy: bool) -> (FactBase, Vec<Atom>) {
    let mut env: BTreeMap<String, Term> = BTreeMap::new();
    for b in rule.builtins() {
        if let (Term::Var(v), Term::Num(limit)) = (&b.args[0], &b.args[1]) {
            env.insert(v.clone(), Term::num(guard_value(b.op, limit.0, satisfy)));
        }
    }
    let ground = |a: &Atom, env: &BTreeMap<String, Term>| Atom {
        predicate: a.predicate.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => env
                    .get(v)
                    .cloned()
                    .unwrap_or_else(|| Term::ind(format!("x_{v}"))),
                c => c.clone(),
            })
            .collect(),
    };
    let mut body: Vec<Atom> = rule.body_atoms().map(|a| ground(a, &env)).collect();
    let has_numeric_guard = rule.builtins().next().is_some();
    if !satisfy && !has_numeric_guard {
        // break the guard: change a constant if there is one, else drop the last atom
        let last = body.last_mut().unwrap();
        match last
            .args
            .iter_mut()
            .find(|t| matches!(t, Term::Str(_) | Term::Bool(_)))
        {
            Some(t @ Term::Str(_)) => *t = Term::Str("Other".into()),
            Some(t @ Term::Bool(_)) => *t = Term::Bool(false),
            _ => {
                body.pop();
            }
        }
    }
    let heads = rule.head.iter().map(|h| ground(h, &env)).collect();
    (FactBase::from_facts(body).unwrap(), heads)
}
