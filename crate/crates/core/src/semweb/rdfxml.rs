use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Graph, Iri, Result, SemwebError, Term, RDF};

/// RDF/XML with one `rdf:Description` per subject. Predicates are split into
/// namespace and local name at the last `#` or `/`; namespaces missing from
/// the prefix map get generated `ns<N>` prefixes.
pub fn to_rdfxml(g: &Graph) -> Result<String> {
    let mut ns_to_prefix: BTreeMap<String, String> = BTreeMap::new();
    for (prefix, ns) in g.prefixes() {
        if prefix != "rdf" && is_ncname(prefix) {
            ns_to_prefix
                .entry(ns.as_str().to_string())
                .or_insert_with(|| prefix.clone());
        }
    }
    ns_to_prefix.insert(RDF.to_string(), "rdf".to_string());

    let triples = g.canonical_triples();
    let mut qnames = Vec::with_capacity(triples.len());
    let mut generated = 0;
    for t in &triples {
        let (ns, local) = split_predicate(&t.predicate)?;
        let prefix = ns_to_prefix.entry(ns.to_string()).or_insert_with(|| {
            let p = format!("ns{generated}");
            generated += 1;
            p
        });
        qnames.push(format!("{prefix}:{local}"));
    }

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<rdf:RDF");
    let mut decls: Vec<(&String, &String)> = ns_to_prefix.iter().map(|(ns, p)| (p, ns)).collect();
    decls.sort();
    for (prefix, ns) in decls {
        let _ = write!(out, "\n    xmlns:{prefix}=\"{}\"", escape(ns));
    }
    out.push_str(">\n");

    let mut current: Option<&Iri> = None;
    for (t, qname) in triples.iter().zip(&qnames) {
        if current != Some(&t.subject) {
            if current.is_some() {
                out.push_str("  </rdf:Description>\n");
            }
            let _ = writeln!(
                out,
                "  <rdf:Description rdf:about=\"{}\">",
                escape(t.subject.as_str())
            );
            current = Some(&t.subject);
        }
        match &t.object {
            Term::Iri(o) => {
                let _ = writeln!(
                    out,
                    "    <{qname} rdf:resource=\"{}\"/>",
                    escape(o.as_str())
                );
            }
            Term::Literal(l) => {
                let _ = writeln!(
                    out,
                    "    <{qname} rdf:datatype=\"{}\">{}</{qname}>",
                    l.datatype().iri(),
                    escape(l.lexical())
                );
            }
        }
    }
    if current.is_some() {
        out.push_str("  </rdf:Description>\n");
    }
    out.push_str("</rdf:RDF>\n");
    Ok(out)
}

fn split_predicate(p: &Iri) -> Result<(&str, &str)> {
    let s = p.as_str();
    let cut = s.rfind(['#', '/']).map(|i| i + 1).unwrap_or(0);
    let (ns, local) = s.split_at(cut);
    if ns.is_empty() || !is_ncname(local) {
        return Err(SemwebError::UnserializablePredicate(s.to_string()));
    }
    Ok((ns, local))
}

fn is_ncname(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}
