//! Plain-text instance format.
//!
//! ```text
//! # comment
//! var x >= 0 <= 4
//! var y >= 0 <= 3 integer
//! var b binary
//! min x^2*y - 3*x + 2
//! st c1: x*y >= 1.5
//! st c2: x + y <= 5
//! ```
//!
//! Accepted extensions: bare constant terms, a leading sign, implicit
//! multiplication after a number (`2x`), unnamed constraints, `binary`
//! without bounds, and variable declarations anywhere in the file.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::poly::{Bounds, Constraint, Monomial, Polynomial, Problem, Sense};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Colon,
    Ge,
    Le,
    Eq,
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of line".into(),
        Some(Tok::Num(v)) => format!("number {v}"),
        Some(Tok::Ident(s)) => format!("'{s}'"),
        Some(Tok::Plus) => "'+'".into(),
        Some(Tok::Minus) => "'-'".into(),
        Some(Tok::Star) => "'*'".into(),
        Some(Tok::Caret) => "'^'".into(),
        Some(Tok::Colon) => "':'".into(),
        Some(Tok::Ge) => "'>='".into(),
        Some(Tok::Le) => "'<='".into(),
        Some(Tok::Eq) => "'='".into(),
    }
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| Error::parse(lineno, format!("malformed number '{text}'")))?;
            out.push(Tok::Num(v));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('>', Some('=')) => (Tok::Ge, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('=', Some('=')) => (Tok::Eq, 2),
            ('=', _) => (Tok::Eq, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('^', _) => (Tok::Caret, 1),
            (':', _) => (Tok::Colon, 1),
            _ => return Err(Error::parse(lineno, format!("unexpected character '{c}'"))),
        };
        out.push(tok);
        i += len;
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, msg)
    }

    fn expect_end(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            t => Err(self.err(format!("unexpected {} at end of line", describe(t)))),
        }
    }

    /// Optionally signed number.
    fn number(&mut self, what: &str) -> Result<f64> {
        let mut sign = 1.0;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = self.peek() {
            if *t == Tok::Minus {
                sign = -sign;
            }
            self.pos += 1;
        }
        match self.next() {
            Some(Tok::Num(v)) => Ok(sign * v),
            Some(Tok::Ident(s)) if ["inf", "infinity", "nan"].contains(&s.to_ascii_lowercase().as_str()) => {
                Err(self.err(format!("non-finite {what}")))
            }
            t => Err(self.err(format!("expected {what}, found {}", describe(t)))),
        }
    }
}

fn parse_poly(cur: &mut Cursor, vars: &HashMap<String, usize>) -> Result<Polynomial> {
    let mut poly = Polynomial::zero();
    let mut sign = 1.0;
    loop {
        // Unary signs, e.g. a leading '-' or `a + -b`.
        while let Some(t @ (Tok::Plus | Tok::Minus)) = cur.peek() {
            if *t == Tok::Minus {
                sign = -sign;
            }
            cur.pos += 1;
        }
        let mut coef = sign;
        let mut factors: Vec<usize> = Vec::new();
        let mut expect_factor = true;
        if let Some(Tok::Num(v)) = cur.peek() {
            coef *= v;
            cur.pos += 1;
            match cur.peek() {
                Some(Tok::Star) => cur.pos += 1,
                Some(Tok::Ident(_)) => {}
                _ => expect_factor = false,
            }
        }
        while expect_factor {
            match cur.next() {
                Some(Tok::Ident(name)) => {
                    let &j = vars
                        .get(name)
                        .ok_or_else(|| cur.err(format!("unknown variable '{name}'")))?;
                    let mut e = 1u32;
                    if let Some(Tok::Caret) = cur.peek() {
                        cur.pos += 1;
                        match cur.next() {
                            Some(Tok::Num(v)) if *v >= 1.0 && v.fract() == 0.0 && *v <= 64.0 => e = *v as u32,
                            t => return Err(cur.err(format!("expected a positive integer exponent, found {}", describe(t)))),
                        }
                    }
                    factors.extend(std::iter::repeat_n(j, e as usize));
                }
                Some(Tok::Num(v)) => coef *= v,
                t => return Err(cur.err(format!("expected a variable, found {}", describe(t)))),
            }
            expect_factor = matches!(cur.peek(), Some(Tok::Star));
            if expect_factor {
                cur.pos += 1;
            }
        }
        if !coef.is_finite() {
            return Err(cur.err("non-finite coefficient"));
        }
        if factors.is_empty() {
            poly.add_constant(coef);
        } else {
            poly.add_term(Monomial::new(factors)?, coef);
        }
        match cur.peek() {
            Some(Tok::Plus) => sign = 1.0,
            Some(Tok::Minus) => sign = -1.0,
            _ => break,
        }
        cur.pos += 1;
    }
    Ok(poly)
}

struct VarDecl {
    name: String,
    lower: f64,
    upper: f64,
    integer: bool,
}

fn parse_var(cur: &mut Cursor) -> Result<VarDecl> {
    let name = match cur.next() {
        Some(Tok::Ident(s)) => s.clone(),
        t => return Err(cur.err(format!("expected a variable name, found {}", describe(t)))),
    };
    let (mut lower, mut upper) = (None, None);
    let mut integer = false;
    let mut binary = false;
    while let Some(t) = cur.next() {
        match t {
            Tok::Ge if lower.is_none() => lower = Some(cur.number("lower bound")?),
            Tok::Le if upper.is_none() => upper = Some(cur.number("upper bound")?),
            Tok::Ident(s) if s == "integer" || s == "int" => integer = true,
            Tok::Ident(s) if s == "binary" || s == "bin" => binary = true,
            t => return Err(cur.err(format!("unexpected {} in declaration of '{name}'", describe(Some(t))))),
        }
    }
    if binary {
        integer = true;
        lower = Some(lower.unwrap_or(0.0).max(0.0));
        upper = Some(upper.unwrap_or(1.0).min(1.0));
    }
    let (Some(lower), Some(upper)) = (lower, upper) else {
        return Err(cur.err(format!("variable '{name}' needs both bounds ('>= L <= U')")));
    };
    if lower > upper {
        return Err(cur.err(format!("empty domain for '{name}': [{lower}, {upper}]")));
    }
    Ok(VarDecl {
        name,
        lower,
        upper,
        integer,
    })
}

/// Parses an instance; `name` becomes the problem name.
pub fn parse_instance(text: &str, name: &str) -> Result<Problem> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokenize(content, lineno)?;
        if !toks.is_empty() {
            lines.push((lineno, toks));
        }
    }

    // Pass 1: declarations.
    let mut decls: Vec<VarDecl> = Vec::new();
    let mut index = HashMap::new();
    for (lineno, toks) in &lines {
        if toks[0] != Tok::Ident("var".into()) {
            continue;
        }
        let mut cur = Cursor {
            toks,
            pos: 1,
            line: *lineno,
        };
        let d = parse_var(&mut cur)?;
        if index.insert(d.name.clone(), decls.len()).is_some() {
            return Err(Error::parse(*lineno, format!("duplicate declaration of '{}'", d.name)));
        }
        decls.push(d);
    }
    if decls.is_empty() {
        return Err(Error::parse(0, "no variables declared"));
    }

    // Pass 2: objective and constraints.
    let mut objective: Option<(Polynomial, Sense)> = None;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    let mut names = HashMap::new();
    for (lineno, toks) in &lines {
        let mut cur = Cursor {
            toks,
            pos: 1,
            line: *lineno,
        };
        let Tok::Ident(kw) = &toks[0] else {
            return Err(cur.err(format!("expected 'var', 'min', 'max' or 'st', found {}", describe(Some(&toks[0])))));
        };
        match kw.as_str() {
            "var" => {}
            "min" | "max" | "minimize" | "maximize" => {
                if objective.is_some() {
                    return Err(cur.err("more than one objective"));
                }
                let poly = parse_poly(&mut cur, &index)?;
                cur.expect_end()?;
                objective = Some(if kw.starts_with("min") {
                    (poly, Sense::Minimize)
                } else {
                    (poly.scaled(-1.0), Sense::Maximize)
                });
            }
            "st" | "s.t." | "subject_to" => {
                let cname = match (toks.get(1), toks.get(2)) {
                    (Some(Tok::Ident(n)), Some(Tok::Colon)) => {
                        cur.pos = 3;
                        n.clone()
                    }
                    (first, _) => {
                        if first == Some(&Tok::Colon) {
                            cur.pos = 2;
                        }
                        format!("c{}", ineqs.len() + eqs.len() + 1)
                    }
                };
                if names.insert(cname.clone(), *lineno).is_some() {
                    return Err(cur.err(format!("duplicate constraint name '{cname}'")));
                }
                let poly = parse_poly(&mut cur, &index)?;
                let rel = cur.next().cloned();
                let rhs = cur.number("right-hand side")?;
                cur.expect_end()?;
                let c = |poly, rhs| Constraint {
                    name: cname.clone(),
                    poly,
                    rhs,
                };
                match rel {
                    Some(Tok::Ge) => ineqs.push(c(poly, rhs)),
                    Some(Tok::Le) => ineqs.push(c(poly.scaled(-1.0), -rhs)),
                    Some(Tok::Eq) => eqs.push(c(poly, rhs)),
                    t => return Err(cur.err(format!("expected '>=', '<=' or '=', found {}", describe(t.as_ref())))),
                }
            }
            other => return Err(cur.err(format!("unknown keyword '{other}'"))),
        }
    }
    let Some((obj, sense)) = objective else {
        return Err(Error::parse(0, "missing objective ('min ...' or 'max ...')"));
    };
    let bounds = Bounds::new(
        decls.iter().map(|d| d.lower).collect(),
        decls.iter().map(|d| d.upper).collect(),
    )?;
    let mut p = Problem::new(name, bounds, decls.iter().map(|d| d.integer).collect(), obj, ineqs, eqs)?;
    p.var_names = decls.into_iter().map(|d| d.name).collect();
    p.sense = sense;
    Ok(p)
}

/// Reads and parses a file; the problem is named after the file stem.
pub fn read_instance(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    parse_instance(&text, name)
}

fn write_poly(out: &mut String, poly: &Polynomial, names: &[String]) {
    let mut first = true;
    let mut push = |out: &mut String, coef: f64, body: Option<String>| {
        let neg = coef < 0.0 || (coef == 0.0 && coef.is_sign_negative());
        let mag = coef.abs();
        if first {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        first = false;
        match body {
            Some(b) if mag == 1.0 => out.push_str(&b),
            Some(b) => {
                let _ = write!(out, "{mag}*{b}");
            }
            None => {
                let _ = write!(out, "{mag}");
            }
        }
    };
    for (m, c) in poly.terms() {
        let body = m
            .powers()
            .into_iter()
            .map(|(j, e)| {
                if e == 1 {
                    names[j].clone()
                } else {
                    format!("{}^{e}", names[j])
                }
            })
            .collect::<Vec<_>>()
            .join("*");
        push(out, c, Some(body));
    }
    if poly.constant() != 0.0 || poly.num_terms() == 0 {
        push(out, poly.constant(), None);
    }
}

/// Writes the problem in the instance format; `parse_instance` reads it back
/// to an identical problem.
pub fn serialize_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", p.name);
    for j in 0..p.num_vars() {
        let _ = write!(out, "var {} >= {} <= {}", p.var_names[j], p.bounds.lower[j], p.bounds.upper[j]);
        out.push_str(if p.integer[j] { " integer\n" } else { "\n" });
    }
    match p.sense {
        Sense::Minimize => {
            out.push_str("min ");
            write_poly(&mut out, &p.objective, &p.var_names);
        }
        Sense::Maximize => {
            out.push_str("max ");
            write_poly(&mut out, &p.objective.scaled(-1.0), &p.var_names);
        }
    }
    out.push('\n');
    for (list, rel) in [(&p.ineqs, ">="), (&p.eqs, "=")] {
        for c in list {
            let _ = write!(out, "st {}: ", c.name);
            write_poly(&mut out, &c.poly, &p.var_names);
            let _ = writeln!(out, " {rel} {}", c.rhs);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_instance() {
        let p = parse_instance("var x >= 0 <= 1\nmin x^2 - x", "t").unwrap();
        assert_eq!(p.num_vars(), 1);
        assert_eq!(crate::poly::problem_degree(&p), 2);
        assert_eq!(p.objective.coefficient(&Monomial::new(vec![0, 0]).unwrap()), 1.0);
        assert_eq!(p.objective.coefficient(&Monomial::var(0)), -1.0);
    }

    #[test]
    fn integer_flag_and_constraint() {
        let p = parse_instance("var y >= 0 <= 3 integer\nmin y\nst c1: y >= 1.5", "t").unwrap();
        assert!(p.integer[0]);
        assert_eq!(p.ineqs.len(), 1);
        assert_eq!(p.ineqs[0].name, "c1");
        assert_eq!(p.ineqs[0].rhs, 1.5);
    }

    #[test]
    fn maximization_is_negated() {
        let p = parse_instance("var x >= 0 <= 1\nmax x", "t").unwrap();
        assert_eq!(p.sense, Sense::Maximize);
        assert_eq!(p.objective.coefficient(&Monomial::var(0)), -1.0);
        assert_eq!(p.sense_value(-1.0), 1.0);
    }

    #[test]
    fn le_rows_flip_and_extensions() {
        let text = "# header\nmin 2x*y - 3 + -x\nst: x + y <= 4\nvar x >= -1 <= 2\nvar y binary\n";
        let p = parse_instance(text, "t").unwrap();
        assert_eq!(p.bounds.upper[1], 1.0);
        assert!(p.integer[1]);
        assert_eq!(p.objective.constant(), -3.0);
        assert_eq!(p.objective.coefficient(&Monomial::new(vec![0, 1]).unwrap()), 2.0);
        assert_eq!(p.ineqs[0].rhs, -4.0);
        assert_eq!(p.ineqs[0].poly.coefficient(&Monomial::var(0)), -1.0);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let cases = [
            ("var x >= 0 <= 1\nmin z", 2, "unknown variable"),
            ("var x >= 0 <= 1\nvar x >= 0 <= 2\nmin x", 2, "duplicate"),
            ("var x >= 0 <= inf\nmin x", 1, "non-finite"),
            ("var x >= 0 <= 1\nmin x\nst c: x >> 1", 3, ""),
            ("var x >= 0 <= 1\nmin x\nst c: x + >= 1", 3, "expected"),
            ("var x >= 2 <= 1\nmin x", 1, "empty domain"),
        ];
        for (text, line, needle) in cases {
            match parse_instance(text, "t") {
                Err(Error::Parse { line: l, message }) => {
                    assert_eq!(l, line, "{text}: {message}");
                    assert!(message.contains(needle), "{message}");
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn serialize_round_trip() {
        let text = "var x >= -1.5 <= 2\nvar y >= 0 <= 3 integer\nmax -x^3*y + 0.1*x - 7\nst a: x*y <= 2.5\nst b: x^2 + y^2 = 1\n";
        let p = parse_instance(text, "rt").unwrap();
        let s = serialize_problem(&p);
        let q = parse_instance(&s, "rt").unwrap();
        assert_eq!(p, q, "{s}");
    }
}
