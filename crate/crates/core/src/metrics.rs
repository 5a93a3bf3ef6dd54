//! Ontology schema metrics and quality scores.
//!
//! Symbols: `Prop` = object + data properties, `Rel` = object properties,
//! `Attribute` = data properties.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::semweb::{Graph, Term, OWL, RDF, RDFS};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("{metric}: denominator is zero")]
    DivisionByZero { metric: &'static str },
    #[error("classes_with_instances_count ({with}) exceeds class_count ({classes})")]
    Inconsistent { with: u64, classes: u64 },
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

/// Counts describing an ontology's schema and population.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologySummary {
    pub class_count: u64,
    pub object_property_count: u64,
    pub data_property_count: u64,
    pub subclass_axiom_count: u64,
    pub individual_count: u64,
    pub classes_with_instances_count: u64,
    pub axiom_count: u64,
}

impl OntologySummary {
    pub fn validate(&self) -> Result<()> {
        if self.classes_with_instances_count > self.class_count {
            return Err(MetricsError::Inconsistent {
                with: self.classes_with_instances_count,
                classes: self.class_count,
            });
        }
        Ok(())
    }

    pub fn property_count(&self) -> u64 {
        self.object_property_count + self.data_property_count
    }
}

/// Counts schema vocabulary in a graph: `owl:Class`, `owl:ObjectProperty`
/// and `owl:DatatypeProperty` declarations, `rdfs:subClassOf` triples, and
/// individuals (subjects typed with a declared class or
/// `owl:NamedIndividual`). `axiom_count` is the number of triples.
pub fn summarize(g: &Graph) -> OntologySummary {
    let rdf_type = format!("{RDF}type");
    let sub_class = format!("{RDFS}subClassOf");
    let owl = |local: &str| format!("{OWL}{local}");
    let (class, object_prop, data_prop, named_individual) = (
        owl("Class"),
        owl("ObjectProperty"),
        owl("DatatypeProperty"),
        owl("NamedIndividual"),
    );

    let typed = |ty: &str| -> BTreeSet<String> {
        g.iter()
            .filter(|t| {
                t.predicate.as_str() == rdf_type
                    && matches!(&t.object, Term::Iri(o) if o.as_str() == ty)
            })
            .map(|t| t.subject.as_str().to_string())
            .collect()
    };
    let classes = typed(&class);
    let schema_types = [
        class.as_str(),
        object_prop.as_str(),
        data_prop.as_str(),
        named_individual.as_str(),
    ];

    let mut individuals = typed(&named_individual);
    let mut populated = BTreeSet::new();
    for t in g.iter().filter(|t| t.predicate.as_str() == rdf_type) {
        if let Term::Iri(o) = &t.object {
            if classes.contains(o.as_str()) && !schema_types.contains(&o.as_str()) {
                individuals.insert(t.subject.as_str().to_string());
                populated.insert(o.as_str().to_string());
            }
        }
    }

    OntologySummary {
        class_count: classes.len() as u64,
        object_property_count: typed(&object_prop).len() as u64,
        data_property_count: typed(&data_prop).len() as u64,
        subclass_axiom_count: g
            .iter()
            .filter(|t| t.predicate.as_str() == sub_class)
            .count() as u64,
        individual_count: individuals.len() as u64,
        classes_with_instances_count: populated.len() as u64,
        axiom_count: g.len() as u64,
    }
}

fn ratio<T: Scalar>(metric: &'static str, num: u64, den: u64) -> Result<T> {
    if den == 0 {
        return Err(MetricsError::DivisionByZero { metric });
    }
    Ok(T::lit(num as f64) / T::lit(den as f64))
}

/// |Prop| / (|Subclass| + |Prop|)
pub fn relationship_richness<T: Scalar>(s: &OntologySummary) -> Result<T> {
    let p = s.property_count();
    ratio("relationship_richness", p, s.subclass_axiom_count + p)
}

/// |Attribute| / |Class|
pub fn attribute_richness<T: Scalar>(s: &OntologySummary) -> Result<T> {
    ratio("attribute_richness", s.data_property_count, s.class_count)
}

/// |Class with instances| / |Class|
pub fn class_richness<T: Scalar>(s: &OntologySummary) -> Result<T> {
    s.validate()?;
    ratio(
        "class_richness",
        s.classes_with_instances_count,
        s.class_count,
    )
}

/// |Individual| / |Class|
pub fn average_population<T: Scalar>(s: &OntologySummary) -> Result<T> {
    ratio("average_population", s.individual_count, s.class_count)
}

/// ((|Rel|·|Class|·100) + (|Subclass| + |Rel|)·|Prop|) / ((|Subclass| + |Rel|)·|Class|)
pub fn score_om<T: Scalar>(s: &OntologySummary) -> Result<T> {
    let sub_rel = s.subclass_axiom_count + s.object_property_count;
    if sub_rel == 0 || s.class_count == 0 {
        return Err(MetricsError::DivisionByZero { metric: "score_om" });
    }
    let f = |v: u64| T::lit(v as f64);
    let numerator = f(s.object_property_count) * f(s.class_count) * T::lit(100.0)
        + f(sub_rel) * f(s.property_count());
    Ok(numerator / (f(sub_rel) * f(s.class_count)))
}

/// (|Class|·100 + |Individual|) / |Class|
pub fn score_kb<T: Scalar>(s: &OntologySummary) -> Result<T> {
    if s.class_count == 0 {
        return Err(MetricsError::DivisionByZero { metric: "score_kb" });
    }
    let f = |v: u64| T::lit(v as f64);
    Ok((f(s.class_count) * T::lit(100.0) + f(s.individual_count)) / f(s.class_count))
}

/// |Class| / (|Subclass| + |Rel|)
pub fn class_relation_ratio<T: Scalar>(s: &OntologySummary) -> Result<T> {
    ratio(
        "class_relation_ratio",
        s.class_count,
        s.subclass_axiom_count + s.object_property_count,
    )
}

/// |Axiom| / |Class|
pub fn axiom_class_ratio<T: Scalar>(s: &OntologySummary) -> Result<T> {
    ratio("axiom_class_ratio", s.axiom_count, s.class_count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemaMetrics<T> {
    pub relationship_richness: T,
    pub attribute_richness: T,
    pub class_richness: T,
    pub average_population: T,
    pub class_relation_ratio: T,
    pub axiom_class_ratio: T,
    pub score_om: T,
    pub score_kb: T,
}

impl<T: Scalar> SchemaMetrics<T> {
    pub fn compute(s: &OntologySummary) -> Result<Self> {
        Ok(SchemaMetrics {
            relationship_richness: relationship_richness(s)?,
            attribute_richness: attribute_richness(s)?,
            class_richness: class_richness(s)?,
            average_population: average_population(s)?,
            class_relation_ratio: class_relation_ratio(s)?,
            axiom_class_ratio: axiom_class_ratio(s)?,
            score_om: score_om(s)?,
            score_kb: score_kb(s)?,
        })
    }
}

pub const REPORT_NOTE: &str = "Metrics are computed with the formulas exactly as defined. \
They are not expected to reproduce externally published metric tables for other ontologies; \
in particular, attribute richness from 198 data properties over 1007 classes is about 0.197, \
and score_kb can never fall below 100 for a non-empty class set.";

/// JSON report: the input counts, every metric that is defined for them
/// (undefined ones are `null` with the reason), and a fixed note.
pub fn report(s: &OntologySummary) -> Value {
    let one = |r: Result<f64>| match r {
        Ok(v) => json!(v),
        Err(_) => Value::Null,
    };
    let mut undefined = Vec::new();
    for r in [
        relationship_richness::<f64>(s),
        attribute_richness::<f64>(s),
        class_richness::<f64>(s),
        score_om::<f64>(s),
        class_relation_ratio::<f64>(s),
    ] {
        if let Err(e) = r {
            undefined.push(e.to_string());
        }
    }
    undefined.dedup();
    json!({
        "summary": s,
        "metrics": {
            "relationship_richness": one(relationship_richness(s)),
            "attribute_richness": one(attribute_richness(s)),
            "class_richness": one(class_richness(s)),
            "average_population": one(average_population(s)),
            "class_relation_ratio": one(class_relation_ratio(s)),
            "axiom_class_ratio": one(axiom_class_ratio(s)),
            "score_om": one(score_om(s)),
            "score_kb": one(score_kb(s)),
        },
        "undefined": undefined,
        "note": REPORT_NOTE,
    })
}
