use std::fmt::Write as _;

use super::{Datatype, Graph, Iri, Literal, Result, SemwebError, Term, Triple};

/// Canonical N-Triples: one line per triple, sorted, every literal typed.
pub fn to_ntriples(g: &Graph) -> String {
    let mut out = String::new();
    for t in g.canonical_triples() {
        let _ = writeln!(out, "{t}");
    }
    out
}

/// Parses N-Triples without blank nodes. Untyped literals are strings;
/// language tags are rejected.
pub fn parse_ntriples(text: &str) -> Result<Graph> {
    let mut g = Graph::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cur = Cursor {
            s: trimmed,
            pos: 0,
            line: line_no,
        };
        let subject = cur.iri()?;
        cur.ws();
        let predicate = cur.iri()?;
        cur.ws();
        let object = if cur.peek() == Some('"') {
            Term::Literal(cur.literal()?)
        } else {
            Term::Iri(cur.iri()?)
        };
        cur.ws();
        if !cur.eat('.') {
            return Err(cur.err("expected terminating `.`"));
        }
        cur.ws();
        if cur.pos < cur.s.len() && !cur.rest().starts_with('#') {
            return Err(cur.err("unexpected text after `.`"));
        }
        g.insert(Triple {
            subject,
            predicate,
            object,
        });
    }
    Ok(g)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    line: usize,
}

impl Cursor<'_> {
    fn rest(&self) -> &str {
        &self.s[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start_matches([' ', '\t']).len();
    }

    fn err(&self, reason: &str) -> SemwebError {
        SemwebError::SyntaxError {
            line: self.line,
            reason: format!("{reason} (column {})", self.pos + 1),
        }
    }

    fn iri(&mut self) -> Result<Iri> {
        if !self.eat('<') {
            return Err(self.err("expected `<`"));
        }
        let end = self
            .rest()
            .find('>')
            .ok_or_else(|| self.err("unterminated IRI"))?;
        let body = &self.rest()[..end];
        let iri = Iri::new(body).map_err(|_| self.err("invalid IRI"))?;
        self.pos += end + 1;
        Ok(iri)
    }

    fn literal(&mut self) -> Result<Literal> {
        self.eat('"');
        let mut lexical = String::new();
        loop {
            let c = self.peek().ok_or_else(|| self.err("unterminated string"))?;
            self.pos += c.len_utf8();
            match c {
                '"' => break,
                '\\' => {
                    let e = self.peek().ok_or_else(|| self.err("dangling escape"))?;
                    self.pos += e.len_utf8();
                    lexical.push(match e {
                        'n' => '\n',
                        'r' => '\r',
                        't' => '\t',
                        '"' => '"',
                        '\\' => '\\',
                        '\'' => '\'',
                        'u' | 'U' => self.unicode(if e == 'u' { 4 } else { 8 })?,
                        _ => return Err(self.err("unknown escape")),
                    });
                }
                c => lexical.push(c),
            }
        }
        let datatype = if self.rest().starts_with("^^") {
            self.pos += 2;
            let dt = self.iri()?;
            Datatype::from_iri(dt.as_str()).ok_or_else(|| self.err("unsupported datatype"))?
        } else if self.peek() == Some('@') {
            return Err(self.err("language-tagged literals are not supported"));
        } else {
            Datatype::String
        };
        Literal::new(lexical, datatype).map_err(|e| self.err(&e.to_string()))
    }

    fn unicode(&mut self, n: usize) -> Result<char> {
        let hex = self
            .rest()
            .get(..n)
            .ok_or_else(|| self.err("short unicode escape"))?;
        let c = u32::from_str_radix(hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.err("bad unicode escape"))?;
        self.pos += n;
        Ok(c)
    }
}
