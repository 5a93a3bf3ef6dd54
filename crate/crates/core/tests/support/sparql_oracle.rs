#![allow(dead_code)]
// Random graphs/queries and a brute-force evaluator for the SPARQL subset.

use std::collections::{BTreeMap, BTreeSet};

use firedss::semweb::{
    CmpOp, Datatype, Expr, Graph, Iri, Literal, Operand, PatternTerm, Projection, Query, Term,
    Triple, TriplePattern,
};
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "y", "z"];

pub fn iri(s: &str) -> Iri {
    Iri::new(format!("http://t.example/{s}")).unwrap()
}

pub fn subject(i: usize) -> Iri {
    iri(&format!("s{i}"))
}

pub fn predicate(i: usize) -> Iri {
    iri(&format!("p{i}"))
}

#[derive(Debug, Clone)]
pub enum Obj {
    Node(usize),
    Int(i64),
    Dec(i64),
    Str(u8),
    Bool(bool),
}

pub fn obj_term(o: &Obj) -> Term {
    match o {
        Obj::Node(i) => Term::Iri(subject(*i)),
        Obj::Int(v) => Term::Literal(Literal::integer(*v)),
        // tenths, so 1.0 and 1 collide numerically but not as terms
        Obj::Dec(v) => Term::Literal(Literal::decimal(*v as f64 / 10.0).unwrap()),
        Obj::Str(c) => Term::Literal(Literal::string(((b'a' + c) as char).to_string())),
        Obj::Bool(b) => Term::Literal(Literal::boolean(*b)),
    }
}

pub fn obj() -> impl Strategy<Value = Obj> {
    prop_oneof![
        3 => (0usize..8).prop_map(Obj::Node),
        2 => (-3i64..6).prop_map(Obj::Int),
        1 => (-30i64..60).prop_map(Obj::Dec),
        1 => (0u8..4).prop_map(Obj::Str),
        1 => any::<bool>().prop_map(Obj::Bool),
    ]
}

pub fn graph() -> impl Strategy<Value = Graph> {
    prop::collection::vec((0usize..8, 0usize..4, obj()), 0..=200).prop_map(|ts| {
        let mut g = Graph::new();
        for (s, p, o) in ts {
            g.insert(Triple::new(subject(s), predicate(p), obj_term(&o)));
        }
        g
    })
}

#[derive(Debug, Clone)]
pub enum Slot {
    Var(usize),
    Subject(usize),
    Pred(usize),
    Obj(Obj),
}

pub fn slot_term(s: &Slot) -> PatternTerm {
    match s {
        Slot::Var(v) => PatternTerm::Var(VARS[*v].into()),
        Slot::Subject(i) => PatternTerm::Iri(subject(*i)),
        Slot::Pred(i) => PatternTerm::Iri(predicate(*i)),
        Slot::Obj(o) => match obj_term(o) {
            Term::Iri(i) => PatternTerm::Iri(i),
            Term::Literal(l) => PatternTerm::Literal(l),
        },
    }
}

pub fn pattern() -> impl Strategy<Value = TriplePattern> {
    let var = (0usize..VARS.len()).prop_map(Slot::Var);
    (
        prop_oneof![2 => var.clone(), 1 => (0usize..8).prop_map(Slot::Subject)],
        prop_oneof![1 => var.clone(), 3 => (0usize..4).prop_map(Slot::Pred)],
        prop_oneof![3 => var, 1 => obj().prop_map(Slot::Obj)],
    )
        .prop_map(|(s, p, o)| TriplePattern {
            subject: slot_term(&s),
            predicate: slot_term(&p),
            object: slot_term(&o),
        })
}

pub fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(vec![
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Gt,
        CmpOp::Ge,
        CmpOp::Eq,
        CmpOp::Ne,
    ])
}

pub fn pattern_vars(ps: &[TriplePattern]) -> Vec<String> {
    let mut out = Vec::new();
    for p in ps {
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

/// A random query whose filter and projection only mention pattern variables.
pub fn query() -> impl Strategy<Value = Query> {
    (
        prop::collection::vec(pattern(), 1..=3),
        prop::collection::vec(
            (
                cmp_op(),
                any::<prop::sample::Index>(),
                prop_oneof![obj().prop_map(Some), Just(None)],
                any::<prop::sample::Index>(),
            ),
            0..=2,
        ),
        any::<bool>(),
        prop::collection::vec(any::<bool>(), 3),
    )
        .prop_map(|(patterns, cmps, use_or, keep)| {
            let vars = pattern_vars(&patterns);
            let mut filter: Option<Expr> = None;
            if !vars.is_empty() {
                for (op, a, c, b) in cmps {
                    let left = Operand::Var(a.get(&vars).clone());
                    let right = match c {
                        Some(o) => Operand::Const(obj_term(&o)),
                        None => Operand::Var(b.get(&vars).clone()),
                    };
                    let e = Expr::Cmp(op, left, right);
                    filter = Some(match filter {
                        None => e,
                        Some(f) if use_or => Expr::Or(Box::new(f), Box::new(e)),
                        Some(f) => Expr::And(Box::new(f), Box::new(e)),
                    });
                }
            }
            let chosen: Vec<String> = vars
                .iter()
                .zip(keep.iter().cycle())
                .filter(|(_, k)| **k)
                .map(|(v, _)| v.clone())
                .collect();
            let projection = if chosen.is_empty() {
                Projection::All
            } else {
                Projection::Vars(chosen)
            };
            Query {
                prefixes: BTreeMap::new(),
                projection,
                patterns,
                filter,
            }
        })
}

// ---------------------------------------------------------------- oracle

pub fn number(t: &Term) -> Option<f64> {
    match t {
        Term::Literal(l) if matches!(l.datatype(), Datatype::Integer | Datatype::Decimal) => {
            l.lexical().parse().ok()
        }
        _ => None,
    }
}

pub fn boolean(t: &Term) -> Option<bool> {
    match t {
        Term::Literal(l) if l.datatype() == Datatype::Boolean => {
            Some(matches!(l.lexical(), "true" | "1"))
        }
        _ => None,
    }
}

pub fn ord_ok(op: CmpOp, o: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        CmpOp::Lt => o == Less,
        CmpOp::Le => o != Greater,
        CmpOp::Gt => o == Greater,
        CmpOp::Ge => o != Less,
        CmpOp::Eq => o == Equal,
        CmpOp::Ne => o != Equal,
    }
}

pub fn oracle_cmp(op: CmpOp, a: &Term, b: &Term) -> Option<bool> {
    if let (Some(x), Some(y)) = (number(a), number(b)) {
        return Some(ord_ok(op, x.partial_cmp(&y)?));
    }
    if let (Some(x), Some(y)) = (boolean(a), boolean(b)) {
        return Some(ord_ok(op, x.cmp(&y)));
    }
    match (a, b) {
        (Term::Literal(x), Term::Literal(y))
            if x.datatype() == Datatype::String && y.datatype() == Datatype::String =>
        {
            Some(ord_ok(op, x.lexical().cmp(y.lexical())))
        }
        (Term::Iri(x), Term::Iri(y)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
            Some((x == y) == (op == CmpOp::Eq))
        }
        _ => None,
    }
}

pub fn oracle_filter(e: &Expr, env: &BTreeMap<String, Term>) -> Option<bool> {
    match e {
        Expr::Cmp(op, a, b) => {
            let get = |o: &Operand| match o {
                Operand::Var(v) => env.get(v).cloned(),
                Operand::Const(t) => Some(t.clone()),
            };
            oracle_cmp(*op, &get(a)?, &get(b)?)
        }
        Expr::And(a, b) => match (oracle_filter(a, env), oracle_filter(b, env)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Expr::Or(a, b) => match (oracle_filter(a, env), oracle_filter(b, env)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
    }
}

pub fn ground(p: &PatternTerm, env: &BTreeMap<String, Term>) -> Term {
    match p {
        PatternTerm::Var(v) => env[v].clone(),
        PatternTerm::Iri(i) => Term::Iri(i.clone()),
        PatternTerm::Literal(l) => Term::Literal(l.clone()),
    }
}

pub fn holds(g: &Graph, p: &TriplePattern, env: &BTreeMap<String, Term>) -> bool {
    let (Term::Iri(s), Term::Iri(pr)) = (ground(&p.subject, env), ground(&p.predicate, env)) else {
        return false;
    };
    g.contains(&Triple::new(s, pr, ground(&p.object, env)))
}

pub fn satisfies(g: &Graph, q: &Query, env: &BTreeMap<String, Term>) -> bool {
    q.patterns.iter().all(|p| holds(g, p, env))
        && q.filter
            .as_ref()
            .is_none_or(|f| oracle_filter(f, env) == Some(true))
}

pub fn brute_force(q: &Query, g: &Graph) -> BTreeSet<Vec<Term>> {
    let mut domain: BTreeSet<Term> = BTreeSet::new();
    for t in g.iter() {
        domain.insert(Term::Iri(t.subject.clone()));
        domain.insert(Term::Iri(t.predicate.clone()));
        domain.insert(t.object.clone());
    }
    let domain: Vec<Term> = domain.into_iter().collect();
    let vars = pattern_vars(&q.patterns);
    let cols = q.columns();
    let mut out = BTreeSet::new();
    let mut counter = vec![0usize; vars.len()];
    if !vars.is_empty() && domain.is_empty() {
        return out;
    }
    loop {
        let env: BTreeMap<String, Term> = vars
            .iter()
            .cloned()
            .zip(counter.iter().map(|&i| domain[i].clone()))
            .collect();
        if satisfies(g, q, &env) {
            out.insert(cols.iter().map(|c| env[c].clone()).collect());
        }
        // odometer over domain^|vars|
        let mut k = 0;
        loop {
            if k == counter.len() {
                return out;
            }
            counter[k] += 1;
            if counter[k] < domain.len() {
                break;
            }
            counter[k] = 0;
            k += 1;
        }
    }
}
