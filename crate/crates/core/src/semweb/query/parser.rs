use std::collections::BTreeMap;

use super::super::{Datatype, Iri, Literal, Result, SemwebError, Term, OWL, RDF, RDFS, XSD};
use super::{CmpOp, Expr, Operand, PatternTerm, Projection, Query, TriplePattern};

/// Parses a query with the `rdf`, `rdfs`, `xsd` and `owl` prefixes
/// predeclared.
pub fn parse_query(text: &str) -> Result<Query> {
    parse_query_with_prefixes(text, &BTreeMap::new())
}

/// Like [`parse_query`], with extra prefixes (e.g. a graph's prefix map).
/// `PREFIX` declarations in the text take precedence.
pub fn parse_query_with_prefixes(text: &str, extra: &BTreeMap<String, Iri>) -> Result<Query> {
    let tokens = lex(text)?;
    let mut prefixes: BTreeMap<String, Iri> = BTreeMap::new();
    for (p, ns) in [("rdf", RDF), ("rdfs", RDFS), ("xsd", XSD), ("owl", OWL)] {
        prefixes.insert(p.to_string(), Iri::new(ns).expect("builtin namespace"));
    }
    prefixes.extend(extra.iter().map(|(k, v)| (k.clone(), v.clone())));
    let mut p = Parser {
        tokens,
        i: 0,
        end: text.len(),
        prefixes,
        declared: BTreeMap::new(),
    };
    let q = p.query()?;

    let vars = q.pattern_variables();
    if let Projection::Vars(vs) = &q.projection {
        if let Some(v) = vs.iter().find(|v| !vars.contains(v)) {
            return Err(SemwebError::UnboundVariable(v.clone()));
        }
    }
    if let Some(f) = &q.filter {
        let mut fv = Vec::new();
        f.variables(&mut fv);
        if let Some(v) = fv.into_iter().find(|v| !vars.contains(v)) {
            return Err(SemwebError::UnboundVariable(v));
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    PName(String, String),
    Var(String),
    IriRef(String),
    Str(String),
    Num(String, bool),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Star,
    AndAnd,
    OrOr,
    Op(CmpOp),
    Carets,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, expected: &str| SemwebError::QuerySyntax {
        pos,
        expected: expected.to_string(),
    };
    let name_char =
        |c: u8| c.is_ascii_alphanumeric() || c == b'_' || c == b'-' || c == b'.' || c >= 0x80;
    while i < b.len() {
        let c = b[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let tok = match c {
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'.' => Tok::Dot,
            b'*' => Tok::Star,
            b'&' if b.get(i + 1) == Some(&b'&') => {
                i += 1;
                Tok::AndAnd
            }
            b'|' if b.get(i + 1) == Some(&b'|') => {
                i += 1;
                Tok::OrOr
            }
            b'^' if b.get(i + 1) == Some(&b'^') => {
                i += 1;
                Tok::Carets
            }
            b'=' => Tok::Op(CmpOp::Eq),
            b'!' if b.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Op(CmpOp::Ne)
            }
            b'>' if b.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Op(CmpOp::Ge)
            }
            b'>' => Tok::Op(CmpOp::Gt),
            b'<' => {
                // An IRI reference if a `>` closes it before any forbidden
                // character; otherwise a comparison operator.
                let mut j = i + 1;
                while j < b.len() && !b" <\"{}|^`\\\t\r\n>".contains(&b[j]) {
                    j += 1;
                }
                if j < b.len() && b[j] == b'>' {
                    let body = text[i + 1..j].to_string();
                    i = j;
                    Tok::IriRef(body)
                } else if b.get(i + 1) == Some(&b'=') {
                    i += 1;
                    Tok::Op(CmpOp::Le)
                } else {
                    Tok::Op(CmpOp::Lt)
                }
            }
            b'?' | b'$' => {
                let mut j = i + 1;
                while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(err(i, "variable name"));
                }
                let name = text[i + 1..j].to_string();
                i = j - 1;
                Tok::Var(name)
            }
            b'"' | b'\'' => {
                let quote = c;
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    let Some(ch) = text[j..].chars().next() else {
                        return Err(err(start, "closing quote"));
                    };
                    j += ch.len_utf8();
                    if ch as u32 == quote as u32 {
                        break;
                    }
                    if ch == '\\' {
                        let e = text[j..].chars().next().ok_or_else(|| err(j, "escape"))?;
                        j += e.len_utf8();
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            'r' => '\r',
                            '"' => '"',
                            '\'' => '\'',
                            '\\' => '\\',
                            _ => return Err(err(j, "known escape")),
                        });
                    } else {
                        s.push(ch);
                    }
                }
                i = j - 1;
                Tok::Str(s)
            }
            b'0'..=b'9' | b'+' | b'-' => {
                let mut j = i;
                if c == b'+' || c == b'-' {
                    j += 1;
                    if !b.get(j).is_some_and(u8::is_ascii_digit) {
                        return Err(err(i, "number"));
                    }
                }
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                let mut decimal = false;
                if j + 1 < b.len() && b[j] == b'.' && b[j + 1].is_ascii_digit() {
                    decimal = true;
                    j += 1;
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let s = text[i..j].to_string();
                i = j - 1;
                Tok::Num(s, decimal)
            }
            c if c.is_ascii_alphabetic() || c == b'_' || c == b':' || c >= 0x80 => {
                let mut j = i;
                while j < b.len() && name_char(b[j]) {
                    j += 1;
                }
                while j > i && b[j - 1] == b'.' {
                    j -= 1;
                }
                let head = &text[i..j];
                if b.get(j) == Some(&b':') || c == b':' {
                    let (prefix, mut k) = if c == b':' {
                        ("", i + 1)
                    } else {
                        (head, j + 1)
                    };
                    let local_start = k;
                    while k < b.len() && name_char(b[k]) {
                        k += 1;
                    }
                    while k > local_start && b[k - 1] == b'.' {
                        k -= 1;
                    }
                    let local = text[local_start..k].to_string();
                    i = k - 1;
                    Tok::PName(prefix.to_string(), local)
                } else {
                    i = j - 1;
                    Tok::Word(head.to_string())
                }
            }
            _ => return Err(err(i, "a token")),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
    prefixes: BTreeMap<String, Iri>,
    declared: BTreeMap<String, Iri>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.i).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.i).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err(&self, expected: &str) -> SemwebError {
        SemwebError::QuerySyntax {
            pos: self.pos(),
            expected: expected.to_string(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.i).map(|(_, t)| t.clone());
        self.i += 1;
        t
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn query(&mut self) -> Result<Query> {
        while self.is_word("PREFIX") {
            self.i += 1;
            let prefix = match self.next() {
                Some(Tok::PName(p, l)) if l.is_empty() => p,
                _ => {
                    self.i -= 1;
                    return Err(self.err("prefix name ending in `:`"));
                }
            };
            let ns = match self.next() {
                Some(Tok::IriRef(s)) => Iri::new(s).map_err(|_| {
                    self.i -= 1;
                    self.err("absolute IRI")
                })?,
                _ => {
                    self.i -= 1;
                    return Err(self.err("IRI reference"));
                }
            };
            self.declared.insert(prefix, ns);
        }
        let declared = std::mem::take(&mut self.declared);
        self.prefixes.extend(declared);

        if !self.is_word("SELECT") {
            return Err(self.err("SELECT"));
        }
        self.i += 1;
        if self.is_word("DISTINCT") {
            self.i += 1;
        }
        let projection = if self.peek() == Some(&Tok::Star) {
            self.i += 1;
            Projection::All
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
                self.i += 1;
            }
            if vars.is_empty() {
                return Err(self.err("variable or `*`"));
            }
            Projection::Vars(vars)
        };
        if self.is_word("WHERE") {
            self.i += 1;
        }
        self.expect(Tok::LBrace, "`{`")?;

        let mut patterns = Vec::new();
        let mut filter: Option<Expr> = None;
        loop {
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.i += 1;
                    break;
                }
                Some(Tok::Dot) => {
                    self.i += 1;
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {
                    self.i += 1;
                    self.expect(Tok::LParen, "`(` after FILTER")?;
                    let e = self.or_expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    filter = Some(match filter {
                        Some(prev) => Expr::And(Box::new(prev), Box::new(e)),
                        None => e,
                    });
                }
                None => return Err(self.err("`}`")),
                _ => {
                    let subject = self.term(false)?;
                    if matches!(subject, PatternTerm::Literal(_)) {
                        self.i -= 1;
                        return Err(self.err("variable or IRI in subject position"));
                    }
                    let predicate = self.term(true)?;
                    if matches!(predicate, PatternTerm::Literal(_)) {
                        self.i -= 1;
                        return Err(self.err("variable or IRI in predicate position"));
                    }
                    let object = self.term(false)?;
                    patterns.push(TriplePattern {
                        subject,
                        predicate,
                        object,
                    });
                    match self.peek() {
                        Some(Tok::Dot) | Some(Tok::RBrace) => {}
                        Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {}
                        _ => return Err(self.err("`.` or `}`")),
                    }
                }
            }
        }
        if self.peek().is_some() {
            return Err(self.err("end of query"));
        }
        Ok(Query {
            prefixes: self.prefixes.clone(),
            projection,
            patterns,
            filter,
        })
    }

    fn resolve(&self, prefix: &str, local: &str) -> Result<Iri> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| SemwebError::UnknownPrefix(prefix.to_string()))?;
        Iri::new(format!("{}{}", ns.as_str(), local)).map_err(|_| self.err("valid IRI"))
    }

    fn constant(&mut self) -> Result<Option<Term>> {
        let t = match self.peek().cloned() {
            Some(Tok::IriRef(s)) => Term::Iri(Iri::new(s).map_err(|_| self.err("absolute IRI"))?),
            Some(Tok::PName(p, l)) => Term::Iri(self.resolve(&p, &l)?),
            Some(Tok::Num(s, decimal)) => {
                let dt = if decimal {
                    Datatype::Decimal
                } else {
                    Datatype::Integer
                };
                Term::Literal(Literal::new(s, dt).map_err(|_| self.err("number"))?)
            }
            Some(Tok::Word(w)) if w == "true" || w == "false" => {
                Term::Literal(Literal::boolean(w == "true"))
            }
            Some(Tok::Str(s)) => {
                self.i += 1;
                if self.peek() == Some(&Tok::Carets) {
                    self.i += 1;
                    let dt_iri = match self.next() {
                        Some(Tok::IriRef(s)) => s,
                        Some(Tok::PName(p, l)) => self.resolve(&p, &l)?.as_str().to_string(),
                        _ => {
                            self.i -= 1;
                            return Err(self.err("datatype IRI"));
                        }
                    };
                    let dt = Datatype::from_iri(&dt_iri).ok_or_else(|| {
                        self.i -= 1;
                        self.err("xsd:integer, xsd:decimal, xsd:string or xsd:boolean")
                    })?;
                    let lit = Literal::new(s, dt).map_err(|_| {
                        self.i -= 1;
                        self.err("literal valid for its datatype")
                    })?;
                    return Ok(Some(Term::Literal(lit)));
                }
                return Ok(Some(Term::Literal(Literal::string(s))));
            }
            _ => return Ok(None),
        };
        self.i += 1;
        Ok(Some(t))
    }

    fn term(&mut self, predicate: bool) -> Result<PatternTerm> {
        if let Some(Tok::Var(v)) = self.peek() {
            let v = v.clone();
            self.i += 1;
            return Ok(PatternTerm::Var(v));
        }
        if predicate && matches!(self.peek(), Some(Tok::Word(w)) if w == "a") {
            self.i += 1;
            return Ok(PatternTerm::Iri(
                Iri::new(format!("{RDF}type")).expect("rdf:type"),
            ));
        }
        match self.constant()? {
            Some(Term::Iri(i)) => Ok(PatternTerm::Iri(i)),
            Some(Term::Literal(l)) => Ok(PatternTerm::Literal(l)),
            None => Err(self.err("variable, IRI or literal")),
        }
    }

    fn or_expr(&mut self) -> Result<Expr> {
        let mut e = self.and_expr()?;
        while self.peek() == Some(&Tok::OrOr) {
            self.i += 1;
            e = Expr::Or(Box::new(e), Box::new(self.and_expr()?));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let mut e = self.relational()?;
        while self.peek() == Some(&Tok::AndAnd) {
            self.i += 1;
            e = Expr::And(Box::new(e), Box::new(self.relational()?));
        }
        Ok(e)
    }

    fn relational(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::LParen) {
            self.i += 1;
            let e = self.or_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        let a = self.operand()?;
        let op = match self.next() {
            Some(Tok::Op(op)) => op,
            _ => {
                self.i -= 1;
                return Err(self.err("comparison operator"));
            }
        };
        let b = self.operand()?;
        Ok(Expr::Cmp(op, a, b))
    }

    fn operand(&mut self) -> Result<Operand> {
        if let Some(Tok::Var(v)) = self.peek() {
            let v = v.clone();
            self.i += 1;
            return Ok(Operand::Var(v));
        }
        self.constant()?
            .map(Operand::Const)
            .ok_or_else(|| self.err("variable or constant"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRINTED: &str =
        "SELECT ?region ?temperature ?humidity WHERE { ?region rdf:type ex:ForestArea . \
        ?region ex:hasTemperature?temperature . ?region ex:hasHumidity ?humidity . \
        FILTER (?temperature > 30 && ?humidity < 30) }";

    fn ex() -> BTreeMap<String, Iri> {
        [(
            "ex".to_string(),
            Iri::new("http://example.org/forest#").unwrap(),
        )]
        .into_iter()
        .collect()
    }

    #[test]
    fn printed_query_shape() {
        let q = parse_query_with_prefixes(PRINTED, &ex()).unwrap();
        assert_eq!(q.columns(), vec!["region", "temperature", "humidity"]);
        assert_eq!(q.patterns.len(), 3);
        let lit = |n: i64| Operand::Const(Term::Literal(Literal::integer(n)));
        assert_eq!(
            q.filter,
            Some(Expr::And(
                Box::new(Expr::Cmp(
                    CmpOp::Gt,
                    Operand::Var("temperature".into()),
                    lit(30)
                )),
                Box::new(Expr::Cmp(
                    CmpOp::Lt,
                    Operand::Var("humidity".into()),
                    lit(30)
                )),
            ))
        );
    }

    #[test]
    fn type_abbreviation() {
        let q =
            parse_query("PREFIX ex: <http://e/> SELECT ?x WHERE { ?x a ex:ForestArea . }").unwrap();
        assert_eq!(q.patterns.len(), 1);
        assert_eq!(
            q.patterns[0].predicate,
            PatternTerm::Iri(Iri::new(format!("{RDF}type")).unwrap())
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_query(PRINTED), Err(SemwebError::UnknownPrefix(p)) if p == "ex"));
        assert!(matches!(
            parse_query("SELECT ?x WHERE { ?x ?p ?o FILTER(?y > 1) }"),
            Err(SemwebError::UnboundVariable(v)) if v == "y"
        ));
        assert!(matches!(
            parse_query("SELECT ?z WHERE { ?x ?p ?o }"),
            Err(SemwebError::UnboundVariable(_))
        ));
        assert!(matches!(
            parse_query("SELECT ?x { ?x ?p }"),
            Err(SemwebError::QuerySyntax { .. })
        ));
        assert!(matches!(
            parse_query("SELECT ?x WHERE { ?x ?p ?o"),
            Err(SemwebError::QuerySyntax { .. })
        ));
        assert!(matches!(
            parse_query("SELECT WHERE { ?x ?p ?o }"),
            Err(SemwebError::QuerySyntax { .. })
        ));
        assert!(matches!(
            parse_query("SELECT ?x WHERE { \"s\" ?p ?x }"),
            Err(SemwebError::QuerySyntax { .. })
        ));
    }

    #[test]
    fn literals_and_nesting() {
        let q = parse_query(
            "PREFIX e: <http://e/> SELECT * WHERE { ?x e:p \"a b\"^^xsd:string . ?x e:q ?v . \
             FILTER ((?v >= -2.5 || ?v != 7) && ?x = <http://e/x>) }",
        )
        .unwrap();
        assert_eq!(q.columns(), vec!["x", "v"]);
        assert!(matches!(q.filter, Some(Expr::And(..))));
    }
}
