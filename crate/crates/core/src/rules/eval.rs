use std::collections::{BTreeMap, BTreeSet};

use super::{
    builtin_compare, Atom, Derivation, FactBase, Result, RuleDef, RuleSet, RulesError, Term,
};

type Bindings = BTreeMap<String, Term>;

/// Facts grouped by predicate and by (predicate, first argument).
#[derive(Default)]
struct Index<'a> {
    by_pred: BTreeMap<&'a str, Vec<&'a Atom>>,
    by_first: BTreeMap<&'a str, BTreeMap<&'a Term, Vec<&'a Atom>>>,
}

impl<'a> Index<'a> {
    fn build(facts: impl IntoIterator<Item = &'a Atom>) -> Self {
        let mut ix = Index::default();
        for f in facts {
            ix.by_pred.entry(f.predicate.as_str()).or_default().push(f);
            if let Some(a0) = f.args.first() {
                ix.by_first
                    .entry(f.predicate.as_str())
                    .or_default()
                    .entry(a0)
                    .or_default()
                    .push(f);
            }
        }
        ix
    }

    fn candidates(&self, pattern: &Atom, b: &Bindings) -> &[&'a Atom] {
        let first = match pattern.args.first() {
            Some(Term::Var(v)) => b.get(v),
            t => t,
        };
        let found = match first {
            Some(t) => self
                .by_first
                .get(pattern.predicate.as_str())
                .and_then(|m| m.get(t)),
            None => self.by_pred.get(pattern.predicate.as_str()),
        };
        found.map(Vec::as_slice).unwrap_or(&[])
    }
}

fn unify(pattern: &Atom, fact: &Atom, b: &mut Bindings) -> bool {
    if pattern.predicate != fact.predicate || pattern.args.len() != fact.args.len() {
        return false;
    }
    for (p, f) in pattern.args.iter().zip(&fact.args) {
        match p {
            Term::Var(v) => match b.get(v) {
                Some(bound) if bound != f => return false,
                Some(_) => {}
                None => {
                    b.insert(v.clone(), f.clone());
                }
            },
            c if c != f => return false,
            _ => {}
        }
    }
    true
}

fn substitute(t: &Term, b: &Bindings) -> Term {
    match t {
        Term::Var(v) => b.get(v).cloned().expect("safe rule binds every variable"),
        other => other.clone(),
    }
}

fn instantiate(a: &Atom, b: &Bindings) -> Atom {
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| substitute(t, b)).collect(),
    }
}

struct Matcher<'r, 'a> {
    rule: &'r RuleDef,
    atoms: Vec<&'r Atom>,
    full: &'r Index<'a>,
    delta: &'r Index<'a>,
    out: &'r mut BTreeMap<Atom, Derivation>,
    known: &'r FactBase,
}

impl Matcher<'_, '_> {
    /// Joins atoms in `order`; the atom at position `delta_pos` draws from the delta.
    fn join(
        &mut self,
        order: &[usize],
        delta_pos: Option<usize>,
        depth: usize,
        b: &mut Bindings,
    ) -> Result<()> {
        if depth == order.len() {
            return self.fire(b);
        }
        let ai = order[depth];
        let pattern = self.atoms[ai];
        let source = if Some(ai) == delta_pos {
            self.delta
        } else {
            self.full
        };
        for fact in source.candidates(pattern, b) {
            let mut next = b.clone();
            if unify(pattern, fact, &mut next) {
                self.join(order, delta_pos, depth + 1, &mut next)?;
            }
        }
        Ok(())
    }

    fn fire(&mut self, b: &Bindings) -> Result<()> {
        for bi in self.rule.builtins() {
            let l = substitute(&bi.args[0], b);
            let r = substitute(&bi.args[1], b);
            let ok = builtin_compare(bi.op, &l, &r).map_err(|e| match e {
                RulesError::TypeClash {
                    op, left, right, ..
                } => {
                    let shown: Vec<String> = b.iter().map(|(k, v)| format!("?{k}={v}")).collect();
                    RulesError::TypeClash {
                        context: format!("rule `{}` with {{{}}}", self.rule.name, shown.join(", ")),
                        op,
                        left,
                        right,
                    }
                }
                other => other,
            })?;
            if !ok {
                return Ok(());
            }
        }
        let premises: Vec<Atom> = self.atoms.iter().map(|a| instantiate(a, b)).collect();
        for h in &self.rule.head {
            let fact = instantiate(h, b);
            if self.known.contains(&fact) || self.out.contains_key(&fact) {
                continue;
            }
            self.out.insert(
                fact,
                Derivation {
                    rule: self.rule.name.clone(),
                    bindings: b.clone(),
                    premises: premises.clone(),
                },
            );
        }
        Ok(())
    }
}

/// Saturates `facts` under `rules`. Facts derived in one round only become
/// premises in later rounds, so explanation trees are acyclic.
pub fn evaluate(rules: &RuleSet, facts: &FactBase) -> Result<FactBase> {
    let mut fb = facts.clone();
    let mut delta: BTreeSet<Atom> = fb.facts().clone();
    let mut first_round = true;
    loop {
        let mut fresh = BTreeMap::new();
        {
            let full = Index::build(fb.iter());
            let dix = Index::build(delta.iter());
            for rule in &rules.rules {
                let atoms: Vec<&Atom> = rule.body_atoms().collect();
                let mut m = Matcher {
                    rule,
                    atoms,
                    full: &full,
                    delta: &dix,
                    out: &mut fresh,
                    known: &fb,
                };
                if m.atoms.is_empty() {
                    if first_round {
                        m.fire(&Bindings::new())?;
                    }
                    continue;
                }
                for d in 0..m.atoms.len() {
                    // Start from the delta atom so the join is driven by new facts.
                    let mut order = vec![d];
                    order.extend((0..m.atoms.len()).filter(|&j| j != d));
                    m.join(&order, Some(d), 0, &mut Bindings::new())?;
                }
            }
        }
        first_round = false;
        if fresh.is_empty() {
            return Ok(fb);
        }
        delta = fresh.keys().cloned().collect();
        for (fact, d) in fresh {
            fb.add_derived(fact, d);
        }
    }
}
