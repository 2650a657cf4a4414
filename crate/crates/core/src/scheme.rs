//! Interaction schemes and their line-oriented text format.
//!
//! A scheme file is a sequence of lines, each one of
//!
//! ```text
//! species X, Y                 # optional explicit species order
//! param k = 0.5                # named rate constant
//! X + Y -> 2Y @ k              # irreversible reaction
//! X -> 2X @ 2.0 ~ 0.1          # forward rate ~ backward rate
//! X -> 0 @ 1.0                 # `0` is the empty side
//! ```
//!
//! Rates are kept as exact rationals (decimal literals are converted without
//! rounding) so the operator algebra can be checked without tolerance.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

/// Largest stoichiometric coefficient accepted on either side of a reaction.
pub const MAX_STOICHIOMETRY: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: species `{name}` declared twice")]
    DuplicateSpecies {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: parameter `{name}` declared twice")]
    DuplicateParameter {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: unknown species `{name}` (not in the species header)")]
    UnknownSpecies {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: unknown parameter `{name}`")]
    UnknownParameter {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: negative rate {value}")]
    NegativeRate {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("{line}:{column}: stoichiometric coefficient {value} exceeds {MAX_STOICHIOMETRY}")]
    CoefficientTooLarge {
        line: usize,
        column: usize,
        value: u64,
    },
    #[error("line {line}: reaction is a no-op (both sides are identical)")]
    NoOpReaction { line: usize },
    #[error("no interactions")]
    NoInteractions,
    #[error("invalid scheme: {0}")]
    Invalid(String),
}

/// A non-negative rate constant, exact, optionally bound to a parameter name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rate {
    value: BigRational,
    name: Option<String>,
}

impl Rate {
    pub fn new(value: BigRational) -> Result<Self, SchemeError> {
        if value.is_negative() {
            return Err(SchemeError::Invalid(format!("negative rate {value}")));
        }
        Ok(Self { value, name: None })
    }

    pub fn named(name: impl Into<String>, value: BigRational) -> Result<Self, SchemeError> {
        let mut rate = Self::new(value)?;
        rate.name = Some(name.into());
        Ok(rate)
    }

    pub fn zero() -> Self {
        Self {
            value: BigRational::zero(),
            name: None,
        }
    }

    /// Rate `num/den`; panics on a zero denominator or a negative value.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(BigRational::new(num.into(), den.into())).expect("non-negative rate")
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// Parameter name if bound, else the decimal value.
    pub fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => format_decimal(&self.value),
        }
    }
}

/// Ordered, duplicate-free species identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeciesTable {
    names: Vec<String>,
}

impl SpeciesTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, SchemeError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(SchemeError::Invalid("species table is empty".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if !is_identifier(n) {
                return Err(SchemeError::Invalid(format!("`{n}` is not an identifier")));
            }
            if names[..i].contains(n) {
                return Err(SchemeError::Invalid(format!(
                    "species `{n}` declared twice"
                )));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// One reversible interaction `I·φ ⇌ F·φ` with forward and backward rates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub reactants: Vec<u32>,
    pub products: Vec<u32>,
    pub k_plus: Rate,
    pub k_minus: Rate,
}

impl Interaction {
    pub fn new(
        reactants: Vec<u32>,
        products: Vec<u32>,
        k_plus: Rate,
        k_minus: Rate,
    ) -> Result<Self, SchemeError> {
        if reactants.len() != products.len() {
            return Err(SchemeError::Invalid(
                "reactant and product vectors differ in length".into(),
            ));
        }
        if reactants == products {
            return Err(SchemeError::Invalid(
                "interaction is a no-op (I = F)".into(),
            ));
        }
        if reactants
            .iter()
            .chain(&products)
            .any(|&c| c > MAX_STOICHIOMETRY)
        {
            return Err(SchemeError::Invalid(format!(
                "stoichiometric coefficient exceeds {MAX_STOICHIOMETRY}"
            )));
        }
        Ok(Self {
            reactants,
            products,
            k_plus,
            k_minus,
        })
    }

    /// `F − I`.
    pub fn step(&self) -> Vec<i64> {
        self.products
            .iter()
            .zip(&self.reactants)
            .map(|(&f, &i)| i64::from(f) - i64::from(i))
            .collect()
    }

    pub fn is_reversible(&self) -> bool {
        !self.k_minus.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionScheme {
    species: SpeciesTable,
    interactions: Vec<Interaction>,
    params: Vec<(String, BigRational)>,
}

impl InteractionScheme {
    pub fn new(species: SpeciesTable, interactions: Vec<Interaction>) -> Result<Self, SchemeError> {
        if interactions.is_empty() {
            return Err(SchemeError::NoInteractions);
        }
        let n = species.len();
        if interactions.iter().any(|i| i.reactants.len() != n) {
            return Err(SchemeError::Invalid(format!(
                "interaction vectors must have length {n}"
            )));
        }
        let mut params: Vec<(String, BigRational)> = Vec::new();
        for inter in &interactions {
            for rate in [&inter.k_plus, &inter.k_minus] {
                if let Some(name) = rate.name() {
                    match params.iter().find(|(p, _)| p == name) {
                        Some((_, v)) if v != rate.value() => {
                            return Err(SchemeError::Invalid(format!(
                                "parameter `{name}` bound to two values"
                            )))
                        }
                        Some(_) => {}
                        None => params.push((name.to_string(), rate.value().clone())),
                    }
                }
            }
        }
        Ok(Self {
            species,
            interactions,
            params,
        })
    }

    pub fn species(&self) -> &SpeciesTable {
        &self.species
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    /// Named parameters in declaration order.
    pub fn params(&self) -> &[(String, BigRational)] {
        &self.params
    }

    /// System order `n`.
    pub fn order(&self) -> usize {
        self.species.len()
    }

    /// Returns a copy with every rate bound to `name` replaced by `value`.
    pub fn with_param(&self, name: &str, value: BigRational) -> Result<Self, SchemeError> {
        let mut out = self.clone();
        let mut found = false;
        for inter in &mut out.interactions {
            for rate in [&mut inter.k_plus, &mut inter.k_minus] {
                if rate.name() == Some(name) {
                    *rate = Rate::named(name, value.clone())?;
                    found = true;
                }
            }
        }
        for (p, v) in &mut out.params {
            if p == name {
                *v = value.clone();
                found = true;
            }
        }
        if !found {
            return Err(SchemeError::Invalid(format!("unknown parameter `{name}`")));
        }
        Ok(out)
    }

    /// Reorders species; `order[k]` is the old index of the new k-th species.
    pub fn permute_species(&self, order: &[usize]) -> Result<Self, SchemeError> {
        let n = self.order();
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&k| k >= n || std::mem::replace(&mut seen[k], true))
        {
            return Err(SchemeError::Invalid(
                "not a permutation of the species".into(),
            ));
        }
        let species = SpeciesTable::new(order.iter().map(|&k| self.species.names[k].clone()))?;
        let interactions = self
            .interactions
            .iter()
            .map(|i| Interaction {
                reactants: order.iter().map(|&k| i.reactants[k]).collect(),
                products: order.iter().map(|&k| i.products[k]).collect(),
                k_plus: i.k_plus.clone(),
                k_minus: i.k_minus.clone(),
            })
            .collect();
        Ok(Self {
            species,
            interactions,
            params: self.params.clone(),
        })
    }

    /// Renders the scheme back into the text format. The output always carries
    /// an explicit species header, so parsing it reproduces this scheme.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        writeln!(out, "species {}", self.species.names.join(", ")).unwrap();
        for (name, value) in &self.params {
            writeln!(out, "param {name} = {}", format_decimal(value)).unwrap();
        }
        for inter in &self.interactions {
            write!(
                out,
                "{} -> {} @ {}",
                self.render_side(&inter.reactants),
                self.render_side(&inter.products),
                inter.k_plus.label()
            )
            .unwrap();
            if inter.is_reversible() || inter.k_minus.name().is_some() {
                write!(out, " ~ {}", inter.k_minus.label()).unwrap();
            }
            out.push('\n');
        }
        out
    }

    fn render_side(&self, coeffs: &[u32]) -> String {
        let terms: Vec<String> = coeffs
            .iter()
            .zip(&self.species.names)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, name)| {
                if c == 1 {
                    name.clone()
                } else {
                    format!("{c}{name}")
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

impl fmt::Display for InteractionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source())
    }
}

impl FromStr for InteractionScheme {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_scheme(s)
    }
}

/// Step operator `r = F − I`, one row per interaction.
pub fn step_operator(scheme: &InteractionScheme) -> Vec<Vec<i64>> {
    scheme
        .interactions()
        .iter()
        .map(Interaction::step)
        .collect()
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Exact decimal for terminating fractions, otherwise the nearest `f64`.
pub fn format_decimal(value: &BigRational) -> String {
    if value.is_integer() {
        return value.to_integer().to_string();
    }
    let mut den = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{:e}", value.to_f64().unwrap_or(f64::NAN));
    }
    let digits = twos.max(fives);
    let scaled = (value * BigRational::from_integer(BigInt::from(10).pow(digits))).to_integer();
    let negative = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    let digits = digits as usize;
    if s.len() <= digits {
        s = format!("{}{s}", "0".repeat(digits - s.len() + 1));
    }
    let (int, frac) = s.split_at(s.len() - digits);
    format!("{}{int}.{frac}", if negative { "-" } else { "" })
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    /// Raw numeric literal text, possibly with a leading minus.
    Number(String),
    Arrow,
    At,
    Tilde,
    Plus,
    Comma,
    Equals,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    column: usize,
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<Spanned>, SchemeError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, message: String| SchemeError::Syntax {
        line: line_no,
        column: col,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 2;
                Tok::Arrow
            }
            '-' | '.' | '0'..='9' => {
                let start = i;
                if c == '-' {
                    i += 1;
                }
                let digits_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let mantissa: String = chars[digits_start..i].iter().collect();
                if !mantissa.chars().any(|c| c.is_ascii_digit()) {
                    return Err(err(column, format!("unexpected `{c}`")));
                }
                // An exponent only counts when digits follow; `2E` is `2` then species `E`.
                if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && matches!(chars[j], '+' | '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                Tok::Number(chars[start..i].iter().collect())
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            '@' => {
                i += 1;
                Tok::At
            }
            '~' => {
                i += 1;
                Tok::Tilde
            }
            '+' => {
                i += 1;
                Tok::Plus
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '=' => {
                i += 1;
                Tok::Equals
            }
            other => return Err(err(column, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned { tok, column });
    }
    Ok(out)
}

/// Parses a decimal literal (optional sign, fraction and exponent) exactly.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    if exponent.unsigned_abs() > 4096 {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().ok()? / 10;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow(scale.unsigned_abs()))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

// ---------------------------------------------------------------------------
// Parser

struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    eol_column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map_or(self.eol_column, |s| s.column)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        self.pos += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> SchemeError {
        SchemeError::Syntax {
            line: self.line,
            column: self.column(),
            message: message.into(),
        }
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), SchemeError> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected {what}, found {}", describe(t)))),
            None => Err(self.error(format!("expected {what}, found end of line"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), SchemeError> {
        let column = self.column();
        match self.next() {
            Some(Tok::Ident(s)) => Ok((s.clone(), column)),
            Some(t) => {
                self.pos -= 1;
                Err(self.error(format!("expected {what}, found {}", describe(t))))
            }
            None => Err(self.error(format!("expected {what}, found end of line"))),
        }
    }

    fn finish(&self) -> Result<(), SchemeError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.error(format!("unexpected {}", describe(t)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Number(s) => format!("number `{s}`"),
        Tok::Arrow => "`->`".into(),
        Tok::At => "`@`".into(),
        Tok::Tilde => "`~`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Equals => "`=`".into(),
    }
}

#[derive(Debug)]
enum RateRef {
    Literal(String),
    Param(String),
}

#[derive(Debug)]
struct RawTerm {
    coeff: u64,
    species: String,
    column: usize,
}

#[derive(Debug)]
struct RawReaction {
    line: usize,
    lhs: Vec<RawTerm>,
    rhs: Vec<RawTerm>,
    forward: (RateRef, usize),
    backward: Option<(RateRef, usize)>,
}

enum Line {
    Species(Vec<(String, usize)>),
    Param(String, usize, String, usize),
    Reaction(RawReaction),
}

fn parse_line(
    toks: &[Spanned],
    line: usize,
    eol_column: usize,
) -> Result<Option<Line>, SchemeError> {
    let mut cur = Cursor {
        toks,
        pos: 0,
        line,
        eol_column,
    };
    match cur.peek() {
        None => Ok(None),
        Some(Tok::Ident(kw))
            if kw == "species"
                && !matches!(toks.get(1).map(|t| &t.tok), Some(Tok::Arrow | Tok::Plus)) =>
        {
            cur.next();
            let mut names = vec![cur.ident("species name")?];
            while cur.peek() == Some(&Tok::Comma) {
                cur.next();
                names.push(cur.ident("species name")?);
            }
            cur.finish()?;
            Ok(Some(Line::Species(names)))
        }
        Some(Tok::Ident(kw))
            if kw == "param" && matches!(toks.get(2).map(|t| &t.tok), Some(Tok::Equals)) =>
        {
            cur.next();
            let (name, name_col) = cur.ident("parameter name")?;
            cur.expect(&Tok::Equals, "`=`")?;
            let col = cur.column();
            let value = match cur.next() {
                Some(Tok::Number(s)) => s.clone(),
                _ => {
                    cur.pos -= 1;
                    return Err(cur.error("expected a number"));
                }
            };
            cur.finish()?;
            Ok(Some(Line::Param(name, name_col, value, col)))
        }
        Some(_) => {
            let lhs = parse_side(&mut cur)?;
            cur.expect(&Tok::Arrow, "`->`")?;
            let rhs = parse_side(&mut cur)?;
            cur.expect(&Tok::At, "`@`")?;
            let forward = parse_rate(&mut cur)?;
            let backward = if cur.peek() == Some(&Tok::Tilde) {
                cur.next();
                Some(parse_rate(&mut cur)?)
            } else {
                None
            };
            cur.finish()?;
            Ok(Some(Line::Reaction(RawReaction {
                line,
                lhs,
                rhs,
                forward,
                backward,
            })))
        }
    }
}

fn parse_side(cur: &mut Cursor<'_>) -> Result<Vec<RawTerm>, SchemeError> {
    if let Some(Tok::Number(s)) = cur.peek() {
        let follows_ident = matches!(
            cur.toks.get(cur.pos + 1).map(|t| &t.tok),
            Some(Tok::Ident(_))
        );
        if s == "0" && !follows_ident {
            cur.next();
            return Ok(Vec::new());
        }
    }
    let mut terms = vec![parse_term(cur)?];
    while cur.peek() == Some(&Tok::Plus) {
        cur.next();
        terms.push(parse_term(cur)?);
    }
    Ok(terms)
}

fn parse_term(cur: &mut Cursor<'_>) -> Result<RawTerm, SchemeError> {
    let column = cur.column();
    let coeff = match cur.peek() {
        Some(Tok::Number(s)) => {
            let c: u64 = s.parse().map_err(|_| {
                cur.error(format!(
                    "stoichiometric coefficient `{s}` is not a positive integer"
                ))
            })?;
            if c == 0 {
                return Err(cur.error(
                    "stoichiometric coefficient must be positive (write `0` for the empty side)",
                ));
            }
            cur.next();
            c
        }
        _ => 1,
    };
    let (species, _) = cur.ident("species name")?;
    Ok(RawTerm {
        coeff,
        species,
        column,
    })
}

fn parse_rate(cur: &mut Cursor<'_>) -> Result<(RateRef, usize), SchemeError> {
    let column = cur.column();
    match cur.next() {
        Some(Tok::Number(s)) => Ok((RateRef::Literal(s.clone()), column)),
        Some(Tok::Ident(s)) => Ok((RateRef::Param(s.clone()), column)),
        Some(t) => {
            cur.pos -= 1;
            Err(cur.error(format!("expected a rate, found {}", describe(t))))
        }
        None => Err(cur.error("expected a rate, found end of line")),
    }
}

/// Parses scheme source text.
///
/// Species are registered in order of first appearance unless the file has a
/// `species` header, in which case only declared species may be used.
pub fn parse_scheme(text: &str) -> Result<InteractionScheme, SchemeError> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = lex_line(raw, line_no)?;
        if let Some(l) = parse_line(&toks, line_no, raw.chars().count() + 1)? {
            lines.push((line_no, l));
        }
    }

    let mut declared: Vec<String> = Vec::new();
    let mut params: Vec<(String, BigRational)> = Vec::new();
    let mut param_index: HashMap<String, usize> = HashMap::new();
    for (line, l) in &lines {
        match l {
            Line::Species(names) => {
                for (name, column) in names {
                    if declared.contains(name) {
                        return Err(SchemeError::DuplicateSpecies {
                            line: *line,
                            column: *column,
                            name: name.clone(),
                        });
                    }
                    declared.push(name.clone());
                }
            }
            Line::Param(name, name_col, value, col) => {
                if param_index.contains_key(name) {
                    return Err(SchemeError::DuplicateParameter {
                        line: *line,
                        column: *name_col,
                        name: name.clone(),
                    });
                }
                let v = parse_decimal(value).ok_or_else(|| SchemeError::Syntax {
                    line: *line,
                    column: *col,
                    message: format!("malformed number `{value}`"),
                })?;
                param_index.insert(name.clone(), params.len());
                params.push((name.clone(), v));
            }
            Line::Reaction(_) => {}
        }
    }

    let explicit = !declared.is_empty();
    let mut species = declared;
    let reactions: Vec<&RawReaction> = lines
        .iter()
        .filter_map(|(_, l)| match l {
            Line::Reaction(r) => Some(r),
            _ => None,
        })
        .collect();
    for r in &reactions {
        for t in r.lhs.iter().chain(&r.rhs) {
            if !species.contains(&t.species) {
                if explicit {
                    return Err(SchemeError::UnknownSpecies {
                        line: r.line,
                        column: t.column,
                        name: t.species.clone(),
                    });
                }
                species.push(t.species.clone());
            }
        }
    }
    if reactions.is_empty() {
        return Err(SchemeError::NoInteractions);
    }
    let table = SpeciesTable::new(species.clone())?;

    let resolve = |r: &RawReaction, rate: &(RateRef, usize)| -> Result<Rate, SchemeError> {
        let (rate, column) = rate;
        let (value, name) = match rate {
            RateRef::Literal(text) => (
                parse_decimal(text).ok_or_else(|| SchemeError::Syntax {
                    line: r.line,
                    column: *column,
                    message: format!("malformed number `{text}`"),
                })?,
                None,
            ),
            RateRef::Param(name) => {
                let idx = param_index
                    .get(name)
                    .ok_or_else(|| SchemeError::UnknownParameter {
                        line: r.line,
                        column: *column,
                        name: name.clone(),
                    })?;
                (params[*idx].1.clone(), Some(name.clone()))
            }
        };
        if value.is_negative() {
            return Err(SchemeError::NegativeRate {
                line: r.line,
                column: *column,
                value: format_decimal(&value),
            });
        }
        Ok(Rate { value, name })
    };

    let mut interactions = Vec::with_capacity(reactions.len());
    for r in reactions {
        let side = |terms: &[RawTerm]| -> Result<Vec<u32>, SchemeError> {
            let mut v = vec![0u64; species.len()];
            for t in terms {
                let idx = species
                    .iter()
                    .position(|s| s == &t.species)
                    .expect("registered");
                v[idx] += t.coeff;
                if v[idx] > u64::from(MAX_STOICHIOMETRY) {
                    return Err(SchemeError::CoefficientTooLarge {
                        line: r.line,
                        column: t.column,
                        value: v[idx],
                    });
                }
            }
            Ok(v.into_iter().map(|c| c as u32).collect())
        };
        let reactants = side(&r.lhs)?;
        let products = side(&r.rhs)?;
        if reactants == products {
            return Err(SchemeError::NoOpReaction { line: r.line });
        }
        let k_plus = resolve(r, &r.forward)?;
        let k_minus = match &r.backward {
            Some(b) => resolve(r, b)?,
            None => Rate::zero(),
        };
        interactions.push(Interaction {
            reactants,
            products,
            k_plus,
            k_minus,
        });
    }

    Ok(InteractionScheme {
        species: table,
        interactions,
        params,
    })
}

/// Machine-readable summary: species, `I`, `F`, `r` and resolved rates.
#[derive(Debug, Clone, Serialize)]
pub struct SchemeSummary {
    pub species: Vec<String>,
    pub params: BTreeMap<String, f64>,
    pub reactants: Vec<Vec<u32>>,
    pub products: Vec<Vec<u32>>,
    pub steps: Vec<Vec<i64>>,
    pub k_plus: Vec<RateSummary>,
    pub k_minus: Vec<RateSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateSummary {
    pub value: f64,
    pub exact: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
}

impl From<&Rate> for RateSummary {
    fn from(r: &Rate) -> Self {
        Self {
            value: r.to_f64(),
            exact: r.value().to_string(),
            param: r.name().map(str::to_string),
        }
    }
}

impl InteractionScheme {
    pub fn summary(&self) -> SchemeSummary {
        SchemeSummary {
            species: self.species.names.clone(),
            params: self
                .params
                .iter()
                .map(|(n, v)| (n.clone(), v.to_f64().unwrap_or(f64::NAN)))
                .collect(),
            reactants: self
                .interactions
                .iter()
                .map(|i| i.reactants.clone())
                .collect(),
            products: self
                .interactions
                .iter()
                .map(|i| i.products.clone())
                .collect(),
            steps: step_operator(self),
            k_plus: self
                .interactions
                .iter()
                .map(|i| (&i.k_plus).into())
                .collect(),
            k_minus: self
                .interactions
                .iter()
                .map(|i| (&i.k_minus).into())
                .collect(),
        }
    }
}
