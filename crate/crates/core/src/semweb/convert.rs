use super::{Graph, Iri, Literal, Result, Term, Triple};
use crate::ingest::{Cell, ColumnKind, Dataset};
use crate::Scalar;

/// One triple per (row, column): subject `<base><row_prefix><i>`, predicate
/// `<base><column>`. Integer columns become `xsd:integer`, other numeric
/// columns `xsd:decimal`, categorical columns `xsd:string`.
///
/// Characters that cannot appear in an IRI (e.g. spaces) are replaced by `_`
/// in predicate names. The base namespace is bound to the `ex` prefix.
pub fn csv_to_graph<T: Scalar>(d: &Dataset<T>, base: &Iri, row_prefix: &str) -> Result<Graph> {
    let mut g = Graph::new();
    g.bind_prefix("ex", base.clone())?;
    let predicates: Vec<Iri> = d
        .schema()
        .iter()
        .map(|c| Iri::new(format!("{}{}", base.as_str(), sanitize(&c.name))))
        .collect::<Result<_>>()?;
    for (i, row) in d.rows().iter().enumerate() {
        let subject = Iri::new(format!("{}{}{i}", base.as_str(), sanitize(row_prefix)))?;
        for ((col, pred), cell) in d.schema().iter().zip(&predicates).zip(row) {
            let object = match (col.kind, cell) {
                (ColumnKind::Integer, Cell::Num(v)) => match v.to_i64() {
                    Some(n) if T::from_i64(n) == Some(*v) => Literal::integer(n),
                    _ => Literal::decimal(v.as_f64())?,
                },
                (_, Cell::Num(v)) => Literal::decimal(v.as_f64())?,
                (_, Cell::Cat(s)) => Literal::string(s.clone()),
            };
            g.insert(Triple::new(
                subject.clone(),
                pred.clone(),
                Term::Literal(object),
            ));
        }
    }
    Ok(g)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_whitespace() || c.is_control() || "<>\"{}|^`\\".contains(c) {
                '_'
            } else {
                c
            }
        })
        .collect()
}
