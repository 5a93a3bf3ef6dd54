// Schema metrics recomputed from the raw counts in wide integers.

use firedss::metrics::OntologySummary;

/// Each metric as a reduced fraction, or None when undefined.
pub fn frac(num: u128, den: u128) -> Option<f64> {
    (den != 0).then(|| num as f64 / den as f64)
}

pub struct Oracle {
    pub rr: Option<f64>,
    pub ar: Option<f64>,
    pub cr: Option<f64>,
    pub ap: Option<f64>,
    pub crr: Option<f64>,
    pub acr: Option<f64>,
    pub om: Option<f64>,
    pub kb: Option<f64>,
}

pub fn oracle(s: &OntologySummary) -> Oracle {
    let c = s.class_count as u128;
    let rel = s.object_property_count as u128;
    let attr = s.data_property_count as u128;
    let prop = rel + attr;
    let sub = s.subclass_axiom_count as u128;
    let ind = s.individual_count as u128;
    Oracle {
        rr: frac(prop, sub + prop),
        ar: frac(attr, c),
        cr: frac(s.classes_with_instances_count as u128, c),
        ap: frac(ind, c),
        crr: frac(c, sub + rel),
        acr: frac(s.axiom_count as u128, c),
        // split into its two addends: 100·rel/(sub+rel) + prop/class
        om: (c != 0 && sub + rel != 0)
            .then(|| 100.0 * rel as f64 / (sub + rel) as f64 + prop as f64 / c as f64),
        kb: (c != 0).then(|| 100.0 + ind as f64 / c as f64),
    }
}
