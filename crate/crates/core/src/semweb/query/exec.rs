use std::time::{Duration, Instant};

use super::super::{Graph, GraphIndex, Result, SemwebError, Term};
use super::{PatternTerm, Query, ResultTable};

#[derive(Debug, Clone)]
enum Slot {
    Var(usize),
    Const(Term),
}

struct Plan {
    patterns: Vec<[Slot; 3]>,
}

/// Evaluates the basic graph pattern by nested-loop join in a greedy order
/// (most-constrained pattern first), applies the filter, projects, removes
/// duplicate rows and sorts them canonically.
pub fn execute(q: &Query, g: &Graph) -> ResultTable {
    let vars = q.pattern_variables();
    let columns = q.columns();
    let slot_of = |t: &PatternTerm| match t {
        PatternTerm::Var(v) => {
            Slot::Var(vars.iter().position(|x| x == v).expect("pattern variable"))
        }
        PatternTerm::Iri(i) => Slot::Const(Term::Iri(i.clone())),
        PatternTerm::Literal(l) => Slot::Const(Term::Literal(l.clone())),
    };
    let raw: Vec<[Slot; 3]> = q
        .patterns
        .iter()
        .map(|p| {
            [
                slot_of(&p.subject),
                slot_of(&p.predicate),
                slot_of(&p.object),
            ]
        })
        .collect();
    let idx = g.index();
    let plan = order(raw, idx, vars.len());
    let projection: Vec<usize> = columns
        .iter()
        .map(|c| {
            vars.iter()
                .position(|v| v == c)
                .expect("projected variable")
        })
        .collect();

    let mut binding: Vec<Option<Term>> = vec![None; vars.len()];
    let mut rows = Vec::new();
    let mut rejected = 0;
    search(&plan, 0, idx, &mut binding, &mut |b| {
        let keep = match &q.filter {
            None => true,
            Some(f) => {
                let lookup = |name: &str| {
                    vars.iter()
                        .position(|v| v == name)
                        .and_then(|i| b[i].clone())
                };
                match f.eval(&lookup) {
                    Some(v) => v,
                    None => {
                        rejected += 1;
                        false
                    }
                }
            }
        };
        if keep {
            rows.push(
                projection
                    .iter()
                    .map(|&i| b[i].clone().expect("bound"))
                    .collect(),
            );
        }
    });
    ResultTable::from_rows(columns, rows, rejected)
}

fn order(mut remaining: Vec<[Slot; 3]>, idx: &GraphIndex, nvars: usize) -> Plan {
    let mut bound = vec![false; nvars];
    let mut patterns = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let score = |p: &[Slot; 3]| {
            let fixed = p
                .iter()
                .filter(|s| match s {
                    Slot::Const(_) => true,
                    Slot::Var(v) => bound[*v],
                })
                .count();
            let estimate = const_candidates(p, idx)
                .map(<[usize]>::len)
                .unwrap_or(idx.triples.len());
            (std::cmp::Reverse(fixed), estimate)
        };
        let best = (0..remaining.len())
            .min_by_key(|&i| score(&remaining[i]))
            .expect("nonempty");
        let p = remaining.remove(best);
        for s in &p {
            if let Slot::Var(v) = s {
                bound[*v] = true;
            }
        }
        patterns.push(p);
    }
    Plan { patterns }
}

const EMPTY: &[usize] = &[];

/// Shortest index list among the constant positions.
fn const_candidates<'a>(p: &[Slot; 3], idx: &'a GraphIndex) -> Option<&'a [usize]> {
    let consts: [Option<&Term>; 3] = std::array::from_fn(|i| match &p[i] {
        Slot::Const(t) => Some(t),
        Slot::Var(_) => None,
    });
    candidates(consts, idx)
}

fn candidates<'a>(terms: [Option<&Term>; 3], idx: &'a GraphIndex) -> Option<&'a [usize]> {
    let mut best: Option<&[usize]> = None;
    let mut consider = |list: &'a [usize]| {
        if best.is_none_or(|b| list.len() < b.len()) {
            best = Some(list);
        }
    };
    if let Some(t) = terms[0] {
        consider(match t {
            Term::Iri(i) => idx.by_subject.get(i).map_or(EMPTY, Vec::as_slice),
            Term::Literal(_) => EMPTY,
        });
    }
    if let Some(t) = terms[1] {
        consider(match t {
            Term::Iri(i) => idx.by_predicate.get(i).map_or(EMPTY, Vec::as_slice),
            Term::Literal(_) => EMPTY,
        });
    }
    if let Some(t) = terms[2] {
        consider(idx.by_object.get(t).map_or(EMPTY, Vec::as_slice));
    }
    best
}

fn search(
    plan: &Plan,
    depth: usize,
    idx: &GraphIndex,
    binding: &mut Vec<Option<Term>>,
    emit: &mut dyn FnMut(&[Option<Term>]),
) {
    let Some(p) = plan.patterns.get(depth) else {
        emit(binding);
        return;
    };
    let current: [Option<Term>; 3] = std::array::from_fn(|i| match &p[i] {
        Slot::Const(t) => Some(t.clone()),
        Slot::Var(v) => binding[*v].clone(),
    });
    let list = candidates(
        [
            current[0].as_ref(),
            current[1].as_ref(),
            current[2].as_ref(),
        ],
        idx,
    );
    let all: Vec<usize>;
    let list = match list {
        Some(l) => l,
        None => {
            all = (0..idx.triples.len()).collect();
            &all
        }
    };
    for &ti in list {
        let t = &idx.triples[ti];
        let values = [
            Term::Iri(t.subject.clone()),
            Term::Iri(t.predicate.clone()),
            t.object.clone(),
        ];
        let mut newly = Vec::new();
        let mut ok = true;
        for (slot, value) in p.iter().zip(values) {
            match slot {
                Slot::Const(c) => ok = *c == value,
                Slot::Var(v) => match &binding[*v] {
                    Some(b) => ok = *b == value,
                    None => {
                        binding[*v] = Some(value);
                        newly.push(*v);
                    }
                },
            }
            if !ok {
                break;
            }
        }
        if ok {
            search(plan, depth + 1, idx, binding, emit);
        }
        for v in newly {
            binding[v] = None;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryTiming {
    /// Position of the query in the input list.
    pub index: usize,
    pub rows: usize,
    pub min: Duration,
    pub median: Duration,
    pub samples: Vec<Duration>,
}

/// Runs every query once as a reference, then `repetitions` timed runs, each
/// checked against the reference result.
pub fn time_queries(queries: &[Query], g: &Graph, repetitions: usize) -> Result<Vec<QueryTiming>> {
    if repetitions == 0 {
        return Err(SemwebError::QuerySyntax {
            pos: 0,
            expected: "repetitions ≥ 1".into(),
        });
    }
    let mut out = Vec::with_capacity(queries.len());
    for (index, q) in queries.iter().enumerate() {
        let reference = execute(q, g);
        let mut samples = Vec::with_capacity(repetitions);
        for repetition in 0..repetitions {
            let start = Instant::now();
            let r = execute(q, g);
            samples.push(start.elapsed());
            if r != reference {
                return Err(SemwebError::ResultDrift { repetition });
            }
        }
        let mut sorted = samples.clone();
        sorted.sort();
        // Lower median for even counts.
        let median = sorted[(sorted.len() - 1) / 2];
        out.push(QueryTiming {
            index,
            rows: reference.len(),
            min: sorted[0],
            median,
            samples,
        });
    }
    Ok(out)
}
