use firedss::metrics::{
    attribute_richness, average_population, axiom_class_ratio, class_relation_ratio,
    class_richness, relationship_richness, report, score_kb, score_om, summarize, OntologySummary,
    SchemaMetrics,
};
use firedss::semweb::{Graph, Iri, Triple, OWL, RDF, RDFS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL_TOL: f64 = 1e-12;

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * b.abs().max(1.0)
}

#[path = "support/metrics_arith.rs"]
mod metrics_arith;

use metrics_arith::oracle;

fn check(
    name: &str,
    got: Result<f64, firedss::metrics::MetricsError>,
    want: Option<f64>,
    s: &OntologySummary,
) {
    match (got, want) {
        (Ok(g), Some(w)) => assert!(same(g, w), "{name}: {g} vs {w} for {s:?}"),
        (Err(_), None) => {}
        (g, w) => panic!("{name}: {g:?} vs {w:?} for {s:?}"),
    }
}

fn random_summary(rng: &mut ChaCha8Rng) -> OntologySummary {
    let scale = [5u64, 100, 5_000, 2_000_000][rng.gen_range(0..4)];
    let class_count = if rng.gen_bool(0.05) {
        0
    } else {
        rng.gen_range(0..=scale)
    };
    let small = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.1) {
            0
        } else {
            rng.gen_range(0..=scale)
        }
    };
    OntologySummary {
        class_count,
        object_property_count: small(rng),
        data_property_count: small(rng),
        subclass_axiom_count: small(rng),
        individual_count: small(rng),
        classes_with_instances_count: rng.gen_range(0..=class_count),
        axiom_count: small(rng),
    }
}

#[test]
fn metrics_match_arithmetic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..10_000 {
        let s = random_summary(&mut rng);
        let o = oracle(&s);
        check("relationship_richness", relationship_richness(&s), o.rr, &s);
        check("attribute_richness", attribute_richness(&s), o.ar, &s);
        check("class_richness", class_richness(&s), o.cr, &s);
        check("average_population", average_population(&s), o.ap, &s);
        check("class_relation_ratio", class_relation_ratio(&s), o.crr, &s);
        check("axiom_class_ratio", axiom_class_ratio(&s), o.acr, &s);
        check("score_om", score_om(&s), o.om, &s);
        check("score_kb", score_kb(&s), o.kb, &s);

        if let Ok(r) = relationship_richness::<f64>(&s) {
            assert!((0.0..=1.0).contains(&r));
        }
        if let Ok(r) = class_richness::<f64>(&s) {
            assert!((0.0..=1.0).contains(&r));
        }
        if s.class_count > 0 {
            assert!(score_kb::<f64>(&s).unwrap() >= 100.0);
        }
        if let Ok(m) = SchemaMetrics::<f64>::compute(&s) {
            assert!(
                m.attribute_richness >= 0.0 && m.average_population >= 0.0 && m.score_om >= 0.0
            );
        }
        // f32 agrees with f64 to single precision
        if let (Ok(a), Ok(b)) = (score_kb::<f32>(&s), score_kb::<f64>(&s)) {
            assert!((a as f64 - b).abs() <= 1e-5 * b);
        }
    }
}

#[test]
fn printed_counts() {
    let s = OntologySummary {
        class_count: 1007,
        object_property_count: 0,
        data_property_count: 198,
        subclass_axiom_count: 0,
        individual_count: 587,
        classes_with_instances_count: 0,
        axiom_count: 0,
    };
    assert!((attribute_richness::<f64>(&s).unwrap() - 198.0 / 1007.0).abs() < 1e-15);
    assert!((average_population::<f64>(&s).unwrap() - 0.582_919_563).abs() < 1e-9);
    assert!((score_kb::<f64>(&s).unwrap() - 100.582_919_563).abs() < 1e-9);
    let om = OntologySummary {
        class_count: 10,
        object_property_count: 2,
        data_property_count: 2,
        subclass_axiom_count: 3,
        ..s
    };
    assert_eq!(score_om::<f64>(&om).unwrap(), 40.4);
    let r = report(&s);
    assert!(r["metrics"]["score_om"].is_null());
    assert!(r["note"].as_str().unwrap().contains("never fall below 100"));
}

#[test]
fn micro_ontology_summary() {
    let e = |l: &str| Iri::new(format!("http://m.example/#{l}")).unwrap();
    let rdf_type = Iri::new(format!("{RDF}type")).unwrap();
    let owl = |l: &str| Iri::new(format!("{OWL}{l}")).unwrap();
    let mut g = Graph::new();
    g.insert(Triple::new(e("Forest"), rdf_type.clone(), owl("Class")));
    g.insert(Triple::new(e("Region"), rdf_type.clone(), owl("Class")));
    g.insert(Triple::new(
        e("Forest"),
        Iri::new(format!("{RDFS}subClassOf")).unwrap(),
        e("Region"),
    ));
    g.insert(Triple::new(
        e("hasArea"),
        rdf_type.clone(),
        owl("DatatypeProperty"),
    ));
    g.insert(Triple::new(
        e("borders"),
        rdf_type.clone(),
        owl("ObjectProperty"),
    ));
    for i in ["f1", "f2", "f3"] {
        g.insert(Triple::new(e(i), rdf_type.clone(), e("Forest")));
    }
    let s = summarize(&g);
    assert_eq!(
        s,
        OntologySummary {
            class_count: 2,
            object_property_count: 1,
            data_property_count: 1,
            subclass_axiom_count: 1,
            individual_count: 3,
            classes_with_instances_count: 1,
            axiom_count: 8,
        }
    );
    let m = SchemaMetrics::<f64>::compute(&s).unwrap();
    assert_eq!(m.relationship_richness, 2.0 / 3.0);
    assert_eq!(m.attribute_richness, 0.5);
    assert_eq!(m.class_richness, 0.5);
    assert_eq!(m.average_population, 1.5);
    assert_eq!(m.class_relation_ratio, 1.0);
    assert_eq!(m.axiom_class_ratio, 4.0);
    // ((1·2·100) + 2·2) / (2·2) = 51
    assert_eq!(m.score_om, 51.0);
    assert_eq!(m.score_kb, 101.5);
    assert_eq!(summarize(&Graph::new()), OntologySummary::default());
}
