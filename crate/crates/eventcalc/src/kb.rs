//! Canonical text format for attribute-value structures and the
//! knowledge-base file format.
//!
//! The canonical form is a single-line nested-bracket rendering with a
//! fixed feature order, e.g.
//!
//! ```text
//! [index: e1, sort: event, composed-of: [index: e, sort: process,
//!  pred: pour, ...], duration: [number: 30, unit: seconds]]
//! ```
//!
//! Measure records print inline without their `sort: measure` field and
//! are recognized on input by the presence of `number` and `unit`.
//! A KB file is a header line `eventcalc-kb 1` followed by `fact` lines
//! (one canonical structure each) and `rate` lines.

use crate::avm::{fresh_var, Avm, Feature, Index, Value};
use crate::calculus::{Kb, KbError, RateFact};
use crate::sorts::Sort;
use crate::units::{Rational, Unit};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub const KB_HEADER: &str = "eventcalc-kb 1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TextError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("duplicate feature `{feature}` at line {line}, column {col}")]
    DuplicateFeature {
        feature: String,
        line: usize,
        col: usize,
    },
    #[error("pattern variable `{0}` has no canonical text form")]
    PatternVariable(String),
    #[error("missing or underdetermined sort at line {line}, column {col}")]
    MissingSort { line: usize, col: usize },
    #[error("bad KB header: expected `{KB_HEADER}`")]
    BadHeader,
    #[error("line {line}: {source}")]
    Kb { line: usize, source: KbError },
}

/// Deterministic single-line rendering. Errors if the structure
/// contains pattern variables.
pub fn canonical_text(a: &Avm) -> Result<String, TextError> {
    let mut out = String::new();
    write_avm(a, &mut out)?;
    Ok(out)
}

fn write_avm(a: &Avm, out: &mut String) -> Result<(), TextError> {
    out.push('[');
    let mut first = true;
    let mut sep = |out: &mut String| {
        if first {
            first = false;
        } else {
            out.push_str(", ");
        }
    };
    match &a.index {
        Index::Anon => {}
        Index::Var(v) => {
            sep(out);
            let _ = write!(out, "index: {v}");
        }
        Index::Pattern(v) => return Err(TextError::PatternVariable(v.clone())),
    }
    if a.sort != Sort::Measure {
        sep(out);
        let _ = write!(out, "sort: {}", a.sort);
    }
    for (feat, value) in a.features() {
        sep(out);
        let _ = write!(out, "{feat}: ");
        match value {
            Value::Atom(s) => out.push_str(s),
            Value::Number(n) => {
                let _ = write!(out, "{n}");
            }
            Value::Avm(inner) => write_avm(inner, out)?,
            Value::Pattern(v) => return Err(TextError::PatternVariable(v.clone())),
        }
    }
    out.push(']');
    Ok(())
}

/// Parses the canonical bracket form. Feature order and whitespace are
/// immaterial; duplicate features are errors. Capitalized barewords are
/// plain atoms here: pattern variables never appear in persisted
/// structures.
pub fn parse_text(s: &str) -> Result<Avm, TextError> {
    let mut p = Parser::new(s);
    p.skip_ws();
    let avm = p.parse_avm()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("trailing input after structure"));
    }
    Ok(avm)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Parser<'a> {
        Parser {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn line_col(&self) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &b in &self.src[..self.pos] {
            if b == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn error(&self, message: &str) -> TextError {
        let (line, col) = self.line_col();
        TextError::Syntax {
            line,
            col,
            message: message.to_string(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), TextError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", b as char)))
        }
    }

    fn bareword(&mut self) -> Result<String, TextError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {
                self.pos += 1;
            }
            _ => return Err(self.error("expected a name")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'-' || c == b'_' || c == b'\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii")
            .to_string())
    }

    fn number(&mut self) -> Result<Rational, TextError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            return Err(self.error("expected digits"));
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let numer: i64 = std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii")
            .parse()
            .map_err(|_| self.error("number out of range"))?;
        let mut denom: i64 = 1;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let dstart = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if dstart == self.pos {
                return Err(self.error("expected denominator digits"));
            }
            denom = std::str::from_utf8(&self.src[dstart..self.pos])
                .expect("ascii")
                .parse()
                .map_err(|_| self.error("number out of range"))?;
            if denom == 0 {
                return Err(self.error("zero denominator"));
            }
        }
        Ok(Rational::new(numer, denom))
    }

    fn parse_avm(&mut self) -> Result<Avm, TextError> {
        let (open_line, open_col) = self.line_col();
        self.expect(b'[')?;
        let mut index: Option<String> = None;
        let mut sort: Option<Sort> = None;
        let mut features: BTreeMap<Feature, Value> = BTreeMap::new();
        let mut seen: Vec<String> = Vec::new();
        loop {
            self.skip_ws();
            if self.peek() == Some(b']') {
                self.pos += 1;
                break;
            }
            if !seen.is_empty() {
                self.expect(b',')?;
                self.skip_ws();
            }
            let (fline, fcol) = self.line_col();
            let name = self.bareword()?;
            if seen.contains(&name) {
                return Err(TextError::DuplicateFeature {
                    feature: name,
                    line: fline,
                    col: fcol,
                });
            }
            seen.push(name.clone());
            self.skip_ws();
            self.expect(b':')?;
            self.skip_ws();
            match name.as_str() {
                "index" => {
                    let v = self.bareword()?;
                    if v.starts_with(|c: char| c.is_ascii_uppercase()) {
                        return Err(self
                            .error(&format!("pattern variable `{v}` in persisted structure")));
                    }
                    index = Some(v);
                }
                "sort" => {
                    let v = self.bareword()?;
                    sort = Some(v.parse::<Sort>().map_err(|e| self.error(&e.to_string()))?);
                }
                _ => {
                    let feat: Feature = name.parse().expect("feature parse is total");
                    let value = match self.peek() {
                        Some(b'[') => Value::Avm(self.parse_avm()?),
                        Some(c) if c.is_ascii_digit() || c == b'-' => {
                            Value::Number(self.number()?)
                        }
                        _ => Value::Atom(self.bareword()?),
                    };
                    features.insert(feat, value);
                }
            }
        }
        let sort = match sort {
            Some(s) => s,
            None => {
                // Inline measure records omit their sort.
                let measure_like = features.contains_key(&Feature::Number)
                    && features.contains_key(&Feature::Unit)
                    && features.keys().all(|f| {
                        matches!(f, Feature::Number | Feature::Unit | Feature::RefObj)
                    });
                if measure_like {
                    Sort::Measure
                } else {
                    return Err(TextError::MissingSort {
                        line: open_line,
                        col: open_col,
                    });
                }
            }
        };
        let mut avm = Avm::new(sort);
        if let Some(v) = index {
            avm.index = Index::Var(v);
        }
        for (f, v) in features {
            avm.set(f, v);
        }
        Ok(avm)
    }
}

/// Alpha-normalized canonical text: index variables are renamed to
/// `v1, v2, ...` in traversal order before rendering, so two structures
/// get the same key exactly when they are equal up to index renaming.
pub fn canonical_key(a: &Avm) -> Result<String, TextError> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let normalized = normalize(a, &mut map);
    canonical_text(&normalized)
}

fn normalize(a: &Avm, map: &mut BTreeMap<String, String>) -> Avm {
    let index = match &a.index {
        Index::Var(v) => {
            let next = format!("v{}", map.len() + 1);
            Index::Var(map.entry(v.clone()).or_insert(next).clone())
        }
        other => other.clone(),
    };
    let mut out = Avm::new(a.sort);
    out.index = index;
    for (f, v) in a.features() {
        let v = match v {
            Value::Avm(inner) => Value::Avm(normalize(inner, map)),
            other => other.clone(),
        };
        out.set(f.clone(), v);
    }
    out
}

/// Serializes a knowledge base: header, `fact` lines, `rate` lines.
pub fn kb_to_text(kb: &Kb) -> Result<String, TextError> {
    let mut out = String::new();
    out.push_str(KB_HEADER);
    out.push('\n');
    for fact in kb.facts() {
        out.push_str("fact ");
        out.push_str(&canonical_text(fact)?);
        out.push('\n');
    }
    for rate in kb.rates() {
        let _ = writeln!(
            out,
            "rate {} {} {} per {}",
            rate.process, rate.rate, rate.quantity_unit, rate.time_unit
        );
    }
    Ok(out)
}

/// Parses a knowledge-base file.
pub fn parse_kb(s: &str) -> Result<Kb, TextError> {
    let mut lines = s.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == KB_HEADER => {}
        _ => return Err(TextError::BadHeader),
    }
    let mut kb = Kb::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("fact ") {
            let fact = parse_text(rest).map_err(|e| at_line(e, lineno))?;
            kb.add_fact(fact)
                .map_err(|source| TextError::Kb { line: lineno, source })?;
        } else if let Some(rest) = line.strip_prefix("rate ") {
            let rate = parse_rate_line(rest, lineno)?;
            kb.add_rate(rate)
                .map_err(|source| TextError::Kb { line: lineno, source })?;
        } else {
            return Err(TextError::Syntax {
                line: lineno,
                col: 1,
                message: "expected `fact` or `rate` entry".to_string(),
            });
        }
    }
    Ok(kb)
}

fn at_line(e: TextError, lineno: usize) -> TextError {
    match e {
        TextError::Syntax { col, message, .. } => TextError::Syntax {
            line: lineno,
            col,
            message,
        },
        TextError::DuplicateFeature { feature, col, .. } => TextError::DuplicateFeature {
            feature,
            line: lineno,
            col,
        },
        TextError::MissingSort { col, .. } => TextError::MissingSort { line: lineno, col },
        other => other,
    }
}

fn parse_rate_line(rest: &str, lineno: usize) -> Result<RateFact, TextError> {
    let syntax = |message: &str| TextError::Syntax {
        line: lineno,
        col: 1,
        message: message.to_string(),
    };
    let parts: Vec<&str> = rest.split_whitespace().collect();
    let [process, number, qty_unit, per, time_unit] = parts.as_slice() else {
        return Err(syntax(
            "rate line must be `rate <index> <number> <qty-unit> per <time-unit>`",
        ));
    };
    if *per != "per" {
        return Err(syntax("expected `per` between units"));
    }
    let rate: Rational = number
        .parse()
        .map_err(|_| syntax("bad rate number"))?;
    let quantity_unit: Unit = qty_unit
        .parse()
        .map_err(|e| syntax(&format!("{e}")))?;
    let time_unit: Unit = time_unit
        .parse()
        .map_err(|e| syntax(&format!("{e}")))?;
    RateFact::new(process, rate, quantity_unit, time_unit)
        .map_err(|source| TextError::Kb { line: lineno, source })
}

/// Picks the next unused variable in a series (`e1`, `e2`, ... for a
/// stem of `e`) given the set of names already in use.
pub fn next_in_series(stem: &str, used: &std::collections::BTreeSet<String>) -> String {
    let mut n: u64 = 1;
    loop {
        let candidate = format!("{stem}{n}");
        if !used.contains(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

/// Renames every variable of a freshly parsed structure into the KB's
/// numbered series: eventualities to `e<n>`, paths to `p<n>`, everything
/// else to `x<n>`, skipping names already used in the KB. Returns the
/// renamed structure and its root variable.
pub fn assign_kb_indices(a: &Avm, used: &std::collections::BTreeSet<String>) -> (Avm, String) {
    let mut used = used.clone();
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let renamed = assign_at(a, &mut map, &mut used);
    let root = match &renamed.index {
        Index::Var(v) => v.clone(),
        _ => {
            let v = next_in_series("e", &used);
            let mut renamed = renamed.clone();
            renamed.index = Index::Var(v.clone());
            return (renamed, v);
        }
    };
    (renamed, root)
}

fn assign_at(
    a: &Avm,
    map: &mut BTreeMap<String, String>,
    used: &mut std::collections::BTreeSet<String>,
) -> Avm {
    let stem = if a.sort.leq(Sort::Eventuality) {
        "e"
    } else if a.sort.leq(Sort::Path) {
        "p"
    } else {
        "x"
    };
    let mut out = Avm::new(a.sort);
    out.index = match &a.index {
        Index::Anon if a.sort == Sort::Measure => Index::Anon,
        Index::Anon => {
            let v = next_in_series(stem, used);
            used.insert(v.clone());
            Index::Var(v)
        }
        Index::Var(v) => {
            let new = map.entry(v.clone()).or_insert_with(|| {
                let fresh = next_in_series(stem, used);
                used.insert(fresh.clone());
                fresh
            });
            Index::Var(new.clone())
        }
        Index::Pattern(v) => Index::Var(map.entry(v.clone()).or_insert_with(|| fresh_var(v)).clone()),
    };
    for (f, v) in a.features() {
        let v = match v {
            Value::Avm(inner) => Value::Avm(assign_at(inner, map, used)),
            other => other.clone(),
        };
        out.set(f.clone(), v);
    }
    out
}
