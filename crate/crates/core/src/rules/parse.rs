use ordered_float::OrderedFloat;

use super::{
    Atom, BodyItem, Builtin, BuiltinOp, FactBase, Result, RuleDef, RuleSet, RulesError, Term,
};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    /// `prefix:name`
    Qualified(String, String),
    Var(String),
    Str(String),
    Num(f64),
    LParen,
    RParen,
    Comma,
    Colon,
    Caret,
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Qualified(p, s) => format!("`{p}:{s}`"),
            Tok::Var(v) => format!("?{v}"),
            Tok::Str(s) => format!("{s:?}"),
            Tok::Num(n) => n.to_string(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Arrow => "`->`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        let syntax = |col: usize, what: &str| RulesError::SyntaxError {
            line: li + 1,
            col: col + 1,
            expected: vec![what.to_string()],
        };
        while i < chars.len() {
            let c = chars[i];
            let start = i;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            let ident_at = |j: usize| -> usize {
                let mut k = j;
                while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                    k += 1;
                }
                k
            };
            let tok = match c {
                '(' => {
                    i += 1;
                    Tok::LParen
                }
                ')' => {
                    i += 1;
                    Tok::RParen
                }
                ',' => {
                    i += 1;
                    Tok::Comma
                }
                ':' => {
                    i += 1;
                    Tok::Colon
                }
                '^' => {
                    i += 1;
                    Tok::Caret
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    i += 2;
                    Tok::Arrow
                }
                '?' => {
                    let end = ident_at(i + 1);
                    if end == i + 1 || !chars[i + 1].is_ascii_alphabetic() {
                        return Err(syntax(i + 1, "variable name [A-Za-z][A-Za-z0-9_]*"));
                    }
                    let name: String = chars[i + 1..end].iter().collect();
                    i = end;
                    Tok::Var(name)
                }
                '"' => {
                    let mut s = String::new();
                    i += 1;
                    loop {
                        match chars.get(i) {
                            None => return Err(syntax(i, "closing `\"`")),
                            Some('"') => {
                                i += 1;
                                break;
                            }
                            Some('\\') => {
                                let e = chars
                                    .get(i + 1)
                                    .ok_or_else(|| syntax(i + 1, "escape character"))?;
                                s.push(match e {
                                    'n' => '\n',
                                    't' => '\t',
                                    '"' => '"',
                                    '\\' => '\\',
                                    _ => return Err(syntax(i + 1, "one of n, t, \", \\")),
                                });
                                i += 2;
                            }
                            Some(&ch) => {
                                s.push(ch);
                                i += 1;
                            }
                        }
                    }
                    Tok::Str(s)
                }
                c if c.is_ascii_digit()
                    || ((c == '-' || c == '+')
                        && chars.get(i + 1).is_some_and(char::is_ascii_digit)) =>
                {
                    let mut j = i + 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                        j += 1;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                    if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                        let mut k = j + 1;
                        if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                            k += 1;
                        }
                        if k < chars.len() && chars[k].is_ascii_digit() {
                            while k < chars.len() && chars[k].is_ascii_digit() {
                                k += 1;
                            }
                            j = k;
                        }
                    }
                    let s: String = chars[i..j].iter().collect();
                    let v: f64 = s.parse().map_err(|_| syntax(i, "number"))?;
                    i = j;
                    Tok::Num(v)
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let end = ident_at(i);
                    let name: String = chars[i..end].iter().collect();
                    i = end;
                    // `prefix:name` with no whitespace around the colon.
                    if chars.get(i) == Some(&':')
                        && chars.get(i + 1).is_some_and(|c| c.is_ascii_alphabetic())
                    {
                        let end2 = ident_at(i + 1);
                        let local: String = chars[i + 1..end2].iter().collect();
                        i = end2;
                        Tok::Qualified(name, local)
                    } else {
                        Tok::Ident(name)
                    }
                }
                _ => return Err(syntax(i, "a rule token")),
            };
            out.push(Spanned {
                tok,
                line: li + 1,
                col: start + 1,
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    i: usize,
    last_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|s| &s.tok)
    }

    fn err(&self, expected: &[&str]) -> RulesError {
        let (line, col) = match self.toks.get(self.i) {
            Some(s) => (s.line, s.col),
            None => (self.last_line.max(1), 1),
        };
        RulesError::SyntaxError {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn err_found(&self, expected: &[&str]) -> RulesError {
        let mut e = self.err(expected);
        if let (RulesError::SyntaxError { expected, .. }, Some(t)) = (&mut e, self.peek()) {
            if let Some(last) = expected.last_mut() {
                last.push_str(&format!(" (found {})", t.describe()));
            }
        }
        e
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn is_ident(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == w)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.i)
            .map(|s| s.line)
            .unwrap_or(self.last_line)
    }

    fn term(&mut self) -> Result<Term> {
        let t = match self.peek() {
            Some(Tok::Var(v)) => Term::Var(v.clone()),
            Some(Tok::Ident(s)) if s == "true" => Term::Bool(true),
            Some(Tok::Ident(s)) if s == "false" => Term::Bool(false),
            Some(Tok::Ident(s)) => Term::Ind(s.clone()),
            Some(Tok::Str(s)) => Term::Str(s.clone()),
            Some(Tok::Num(n)) => Term::Num(OrderedFloat(*n)),
            _ => {
                return Err(self.err_found(&[
                    "variable",
                    "individual",
                    "string",
                    "number",
                    "boolean",
                ]))
            }
        };
        self.i += 1;
        Ok(t)
    }

    /// Atom or builtin call.
    fn item(&mut self) -> Result<BodyItem> {
        let line = self.line();
        let (name, builtin) = match self.peek().cloned() {
            Some(Tok::Qualified(p, local)) if p == "swrlb" => match BuiltinOp::from_name(&local) {
                Some(op) => (local, Some(op)),
                None => {
                    return Err(RulesError::UnknownBuiltin {
                        line,
                        name: format!("swrlb:{local}"),
                    })
                }
            },
            Some(Tok::Qualified(p, local)) => {
                return Err(RulesError::UnknownBuiltin {
                    line,
                    name: format!("{p}:{local}"),
                })
            }
            Some(Tok::Ident(name)) => {
                let op = BuiltinOp::from_name(&name);
                (name, op)
            }
            _ => return Err(self.err_found(&["atom"])),
        };
        self.i += 1;
        if !self.eat(&Tok::LParen) {
            return Err(self.err_found(&["`(`"]));
        }
        let mut args = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            args.push(self.term()?);
        }
        if !self.eat(&Tok::RParen) {
            return Err(self.err_found(&["`,`", "`)`"]));
        }
        match builtin {
            Some(op) => {
                let [a, b]: [Term; 2] = args
                    .try_into()
                    .map_err(|_| self.err(&["builtin with exactly 2 arguments"]))?;
                Ok(BodyItem::Builtin(Builtin { op, args: [a, b] }))
            }
            None => {
                if args.len() > 2 {
                    return Err(self.err(&["atom with 1 or 2 arguments"]));
                }
                Ok(BodyItem::Atom(Atom {
                    predicate: name,
                    args,
                }))
            }
        }
    }

    fn head_atom(&mut self) -> Result<Atom> {
        match self.item()? {
            BodyItem::Atom(a) => Ok(a),
            BodyItem::Builtin(_) => Err(self.err(&["head atom (builtins cannot be asserted)"])),
        }
    }

    fn rule(&mut self) -> Result<RuleDef> {
        let line = self.line();
        let mut name = None;
        if self.is_ident("rule") {
            self.i += 1;
            match self.peek() {
                Some(Tok::Ident(n)) => name = Some(n.clone()),
                _ => return Err(self.err_found(&["rule name"])),
            }
            self.i += 1;
            if !self.eat(&Tok::Colon) {
                return Err(self.err_found(&["`:`"]));
            }
        }
        let dsl = self.is_ident("when");
        let (body_sep, head_sep) = if dsl {
            self.i += 1;
            (Tok::Comma, Tok::Comma)
        } else {
            (Tok::Caret, Tok::Caret)
        };
        let mut body = vec![self.item()?];
        while self.eat(&body_sep) {
            body.push(self.item()?);
        }
        if dsl {
            if !(self.is_ident("then")
                && matches!(self.toks.get(self.i + 1).map(|s| &s.tok), Some(Tok::Ident(a)) if a == "assert"))
            {
                return Err(self.err_found(&["`,`", "`then assert`"]));
            }
            self.i += 2;
        } else if !self.eat(&Tok::Arrow) {
            return Err(self.err_found(&["`^`", "`->`"]));
        }
        let mut head = vec![self.head_atom()?];
        while self.eat(&head_sep) {
            head.push(self.head_atom()?);
        }
        let name = name.unwrap_or_else(|| format!("swrl_{line}"));
        Ok(RuleDef {
            name,
            body,
            head,
            line,
        })
    }
}

pub fn parse_rules(text: &str) -> Result<RuleSet> {
    let toks = lex(text)?;
    let last_line = toks.last().map(|t| t.line).unwrap_or(1);
    let mut p = Parser {
        toks,
        i: 0,
        last_line,
    };
    let mut rules = Vec::new();
    while p.peek().is_some() {
        rules.push(p.rule()?);
    }
    RuleSet::new(rules)
}

/// Ground atoms separated by whitespace, commas or newlines.
pub fn parse_facts(text: &str) -> Result<FactBase> {
    let toks = lex(text)?;
    let last_line = toks.last().map(|t| t.line).unwrap_or(1);
    let mut p = Parser {
        toks,
        i: 0,
        last_line,
    };
    let mut fb = FactBase::new();
    while p.peek().is_some() {
        if p.eat(&Tok::Comma) {
            continue;
        }
        match p.item()? {
            BodyItem::Atom(a) => {
                fb.assert(a)?;
            }
            BodyItem::Builtin(_) => return Err(p.err(&["fact (builtins are not facts)"])),
        }
    }
    Ok(fb)
}
