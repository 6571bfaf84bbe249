//! Sparse multivariate polynomials over an exact field, with graded
//! reverse-lexicographic term order (x > y), jet truncation, composition and
//! power-series helpers. Germs are stored as exact polynomials; every
//! series-producing step truncates at an explicit order.

use crate::error::{Error, Result};
use crate::field::{embed, Elt, Field};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent vector. Total order is grevlex ascending with variable 0 largest.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn deg(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn one(n: usize) -> Self {
        Mono(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Mono(v)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn weighted_deg(&self, a: &[i64]) -> i64 {
        self.0.iter().zip(a).map(|(&e, &w)| e as i64 * w).sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        let (da, db) = (self.deg(), other.deg());
        if da != db {
            return da.cmp(&db);
        }
        // grevlex: larger = smaller exponent on the last variable where they differ
        for i in (0..self.0.len()).rev() {
            if self.0[i] != other.0[i] {
                return other.0[i].cmp(&self.0[i]);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `n` variables over `field`. No zero coefficients stored.
#[derive(Clone, Debug)]
pub struct Poly {
    pub field: Field,
    pub n: usize,
    pub terms: BTreeMap<Mono, Elt>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}
impl Eq for Poly {}

impl Poly {
    pub fn zero(field: &Field, n: usize) -> Self {
        Poly { field: field.clone(), n, terms: BTreeMap::new() }
    }

    pub fn constant(field: &Field, n: usize, c: Elt) -> Self {
        let mut p = Self::zero(field, n);
        if !field.is_zero(&c) {
            p.terms.insert(Mono::one(n), c);
        }
        p
    }

    pub fn one(field: &Field, n: usize) -> Self {
        Self::constant(field, n, field.one())
    }

    pub fn var(field: &Field, n: usize, i: usize) -> Self {
        let mut p = Self::zero(field, n);
        p.terms.insert(Mono::var(n, i), field.one());
        p
    }

    pub fn monomial(field: &Field, n: usize, m: Mono, c: Elt) -> Self {
        let mut p = Self::zero(field, n);
        if !field.is_zero(&c) {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> Elt {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn constant_term(&self) -> Elt {
        self.coeff(&Mono::one(self.n))
    }

    fn insert_add(&mut self, m: Mono, c: Elt) {
        if self.field.is_zero(&c) {
            return;
        }
        match self.terms.remove(&m) {
            None => {
                self.terms.insert(m, c);
            }
            Some(old) => {
                let s = self.field.add(&old, &c);
                if !self.field.is_zero(&s) {
                    self.terms.insert(m, s);
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.insert_add(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.insert_add(m.clone(), self.field.neg(c));
        }
        r
    }

    pub fn neg(&self) -> Poly {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = self.field.neg(c);
        }
        r
    }

    pub fn scale(&self, c: &Elt) -> Poly {
        let mut r = Poly::zero(&self.field, self.n);
        if self.field.is_zero(c) {
            return r;
        }
        for (m, v) in &self.terms {
            r.terms.insert(m.clone(), self.field.mul(v, c));
        }
        r
    }

    /// Multiply with optional total-degree cap (terms above the cap dropped).
    pub fn mul_trunc(&self, other: &Poly, cap: Option<u32>) -> Poly {
        let mut r = Poly::zero(&self.field, self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                if let Some(k) = cap {
                    if m.deg() > k {
                        continue;
                    }
                }
                r.insert_add(m, self.field.mul(ca, cb));
            }
        }
        r
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.mul_trunc(other, None)
    }

    pub fn pow_trunc(&self, e: u32, cap: Option<u32>) -> Poly {
        let mut r = Poly::one(&self.field, self.n);
        for _ in 0..e {
            r = r.mul_trunc(self, cap);
        }
        r
    }

    pub fn truncate_deg(&self, cap: u32) -> Poly {
        let mut r = Poly::zero(&self.field, self.n);
        for (m, c) in &self.terms {
            if m.deg() <= cap {
                r.terms.insert(m.clone(), c.clone());
            }
        }
        r
    }

    /// Keep terms with weighted degree in [lo, hi] (inclusive).
    pub fn weighted_slice(&self, a: &[i64], lo: i64, hi: i64) -> Poly {
        let mut r = Poly::zero(&self.field, self.n);
        for (m, c) in &self.terms {
            let w = m.weighted_deg(a);
            if w >= lo && w <= hi {
                r.terms.insert(m.clone(), c.clone());
            }
        }
        r
    }

    /// Minimum total degree; None for the zero polynomial.
    pub fn ord(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.deg()).min()
    }

    pub fn max_deg(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.deg()).max()
    }

    /// Minimum weighted degree; None for zero.
    pub fn weighted_ord(&self, a: &[i64]) -> Option<i64> {
        self.terms.keys().map(|m| m.weighted_deg(a)).min()
    }

    /// Terms of minimal total degree.
    pub fn initial(&self) -> Poly {
        match self.ord() {
            None => self.clone(),
            Some(o) => {
                let mut r = Poly::zero(&self.field, self.n);
                for (m, c) in &self.terms {
                    if m.deg() == o {
                        r.terms.insert(m.clone(), c.clone());
                    }
                }
                r
            }
        }
    }

    /// Terms of minimal weighted degree.
    pub fn weighted_initial(&self, a: &[i64]) -> Poly {
        match self.weighted_ord(a) {
            None => self.clone(),
            Some(o) => self.weighted_slice(a, o, o),
        }
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let mut r = Poly::zero(&self.field, self.n);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var] = e - 1;
            let c2 = self.field.mul(c, &self.field.from_int(e as i64));
            r.insert_add(m2, c2);
        }
        r
    }

    /// Compose: substitute `map[i]` for variable i, truncating intermediates.
    /// Sound for jets when the map is origin-preserving.
    pub fn substitute(&self, map: &[Poly], cap: Option<u32>) -> Poly {
        assert_eq!(map.len(), self.n);
        let f = &self.field;
        // power cache per variable
        let mut pows: Vec<Vec<Poly>> = map.iter().map(|p| vec![Poly::one(f, p.n)]).collect();
        let out_n = map.first().map(|p| p.n).unwrap_or(self.n);
        let mut r = Poly::zero(f, out_n);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(f, out_n, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while pows[i].len() <= e as usize {
                    let next = pows[i].last().unwrap().mul_trunc(&map[i], cap);
                    pows[i].push(next);
                }
                t = t.mul_trunc(&pows[i][e as usize], cap);
            }
            r = r.add(&t);
        }
        if let Some(k) = cap {
            r.truncate_deg(k)
        } else {
            r
        }
    }

    pub fn eval(&self, point: &[Elt]) -> Elt {
        let f = &self.field;
        let mut acc = f.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                t = f.mul(&t, &f.pow(&point[i], e as u64));
            }
            acc = f.add(&acc, &t);
        }
        acc
    }

    /// Multiplicative inverse of a unit (nonzero constant term) as a power
    /// series, truncated at total degree `cap`. Newton iteration.
    pub fn series_inverse(&self, cap: u32) -> Result<Poly> {
        let c0 = self.constant_term();
        if self.field.is_zero(&c0) {
            return Err(Error::DivisionByZero);
        }
        let f = &self.field;
        let mut v = Poly::constant(f, self.n, f.inv(&c0)?);
        let two = Poly::constant(f, self.n, f.from_int(2));
        // doubling precision per step
        let mut prec = 1u32;
        while prec <= cap {
            prec *= 2;
            let p = prec.min(cap);
            let uv = self.truncate_deg(p).mul_trunc(&v, Some(p));
            v = v.mul_trunc(&two.sub(&uv), Some(p));
        }
        Ok(v.truncate_deg(cap))
    }

    /// Map coefficients into an overfield.
    pub fn map_field(&self, to: &Field) -> Poly {
        let mut r = Poly::zero(to, self.n);
        for (m, c) in &self.terms {
            r.terms.insert(m.clone(), embed(&self.field, to, c));
        }
        r
    }

    /// True if every exponent vector is supported on the single variable `var`.
    pub fn is_univariate_in(&self, var: usize) -> bool {
        self.terms.keys().all(|m| {
            m.0.iter().enumerate().all(|(i, &e)| i == var || e == 0)
        })
    }

    pub fn display_with(&self, vars: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let f = &self.field;
        let mut parts = vec![];
        for (m, c) in self.terms.iter().rev() {
            let mut factors = vec![];
            let cs = f.format_elt(c);
            let is_one = cs == "1";
            let is_const = m.deg() == 0;
            if !is_one || is_const {
                if cs.contains('+') || cs.contains('/') && cs.len() > 1 && !is_const {
                    factors.push(format!("({cs})"));
                } else {
                    factors.push(cs);
                }
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(vars[i].to_string()),
                    _ => factors.push(format!("{}^{}", vars[i], e)),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.n)
            .map(|i| match i {
                0 => "x".to_string(),
                1 => "y".to_string(),
                2 => "z".to_string(),
                _ => format!("x{}", i),
            })
            .collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        write!(w, "{}", self.display_with(&refs))
    }
}

// ---------------------------------------------------------------------------
// expression parser: integer literals, named variables, + - * ^, parentheses
// ---------------------------------------------------------------------------

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.to_string() }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied();
        if let Some(c) = c {
            self.pos += 1;
            if c == b'\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next_tok(&mut self) -> Result<Tok> {
        while matches!(self.peek(), Some(b' ') | Some(b'\t') | Some(b'\n') | Some(b'\r')) {
            self.bump();
        }
        let c = match self.peek() {
            None => return Ok(Tok::End),
            Some(c) => c,
        };
        match c {
            b'+' => {
                self.bump();
                Ok(Tok::Plus)
            }
            b'-' => {
                self.bump();
                Ok(Tok::Minus)
            }
            b'*' => {
                self.bump();
                Ok(Tok::Star)
            }
            b'^' => {
                self.bump();
                Ok(Tok::Caret)
            }
            b'(' => {
                self.bump();
                Ok(Tok::LParen)
            }
            b')' => {
                self.bump();
                Ok(Tok::RParen)
            }
            b'0'..=b'9' => {
                let mut s = String::new();
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    s.push(self.bump().unwrap() as char);
                }
                Ok(Tok::Int(s))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut s = String::new();
                while self
                    .peek()
                    .map(|c| c.is_ascii_alphanumeric() || c == b'_')
                    .unwrap_or(false)
                {
                    s.push(self.bump().unwrap() as char);
                }
                Ok(Tok::Ident(s))
            }
            c => Err(self.err(&format!("unexpected character '{}'", c as char))),
        }
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    cur: Tok,
    field: Field,
    vars: Vec<String>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, field: &Field, vars: &[String]) -> Result<Self> {
        let mut lex = Lexer::new(src);
        let cur = lex.next_tok()?;
        Ok(Parser { lex, cur, field: field.clone(), vars: vars.to_vec() })
    }

    fn advance(&mut self) -> Result<()> {
        self.cur = self.lex.next_tok()?;
        Ok(())
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = if self.cur == Tok::Minus {
            self.advance()?;
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            match self.cur {
                Tok::Plus => {
                    self.advance()?;
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Tok::Minus => {
                    self.advance()?;
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        while self.cur == Tok::Star {
            self.advance()?;
            let t = self.factor()?;
            acc = acc.mul(&t);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = self.base()?;
        if self.cur == Tok::Caret {
            self.advance()?;
            match std::mem::replace(&mut self.cur, Tok::End) {
                Tok::Int(s) => {
                    self.advance()?;
                    let e: u32 = s
                        .parse()
                        .map_err(|_| self.lex.err("exponent out of range"))?;
                    Ok(base.pow_trunc(e, None))
                }
                _ => Err(self.lex.err("expected integer exponent after '^'")),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Poly> {
        let n = self.vars.len();
        match std::mem::replace(&mut self.cur, Tok::End) {
            Tok::Int(s) => {
                self.advance()?;
                // fold decimal digits in the field (handles any magnitude)
                let f = &self.field;
                let ten = f.from_int(10);
                let mut acc = f.zero();
                for d in s.bytes() {
                    acc = f.add(&f.mul(&acc, &ten), &f.from_int((d - b'0') as i64));
                }
                Ok(Poly::constant(f, n, acc))
            }
            Tok::Ident(name) => {
                self.advance()?;
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Poly::var(&self.field, n, i)),
                    None => Err(self.lex.err(&format!("unknown variable '{name}'"))),
                }
            }
            Tok::Minus => {
                self.advance()?;
                Ok(self.base()?.neg())
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                if self.cur != Tok::RParen {
                    return Err(self.lex.err("expected ')'"));
                }
                self.advance()?;
                Ok(e)
            }
            t => Err(self.lex.err(&format!("unexpected token {t:?}"))),
        }
    }
}

/// Parse an expression in the germ grammar over the given field and variables.
pub fn parse_poly(src: &str, field: &Field, vars: &[String]) -> Result<Poly> {
    let mut p = Parser::new(src, field, vars)?;
    let e = p.expr()?;
    if p.cur != Tok::End {
        return Err(p.lex.err("trailing input after expression"));
    }
    Ok(e)
}

/// Convenience for two variables named x, y.
pub fn parse_xy(src: &str, field: &Field) -> Result<Poly> {
    parse_poly(src, field, &["x".to_string(), "y".to_string()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn f7() -> Field {
        FieldSpec::make(7, 1).unwrap()
    }

    #[test]
    fn grevlex_order() {
        // degree first, then x-power descending within a degree for 2 vars
        let x2 = Mono(vec![2, 0]);
        let xy = Mono(vec![1, 1]);
        let y2 = Mono(vec![0, 2]);
        let y3 = Mono(vec![0, 3]);
        assert!(y2 < xy && xy < x2);
        assert!(x2 < y3);
    }

    #[test]
    fn mul_trunc_example() {
        let f = f7();
        let a = parse_xy("x+y", &f).unwrap();
        let b = parse_xy("x-y", &f).unwrap();
        let p = a.mul_trunc(&b, Some(2));
        assert_eq!(p, parse_xy("x^2-y^2", &f).unwrap());
    }

    #[test]
    fn substitute_frobenius_kills_cross_terms() {
        // x -> x+y into x^3 over F_3, truncated at 3: binomials 3,3 vanish
        let f = FieldSpec::make(3, 1).unwrap();
        let x3 = parse_xy("x^3", &f).unwrap();
        let map = vec![parse_xy("x+y", &f).unwrap(), parse_xy("y", &f).unwrap()];
        let r = x3.substitute(&map, Some(3));
        assert_eq!(r, parse_xy("x^3+y^3", &f).unwrap());
    }

    #[test]
    fn substitute_identity() {
        let f = f7();
        let p = parse_xy("x^2*y + 3*y^4 - x", &f).unwrap();
        let map = vec![Poly::var(&f, 2, 0), Poly::var(&f, 2, 1)];
        assert_eq!(p.substitute(&map, None), p);
    }

    #[test]
    fn series_inverse_roundtrip() {
        let f = f7();
        let u = parse_xy("1 + x + 2*y + x*y^2", &f).unwrap();
        let v = u.series_inverse(6).unwrap();
        let prod = u.mul_trunc(&v, Some(6));
        assert_eq!(prod, Poly::one(&f, 2));
    }

    #[test]
    fn parser_reduces_coefficients() {
        let f = f7();
        let p = parse_xy("8*x + 14", &f).unwrap();
        assert_eq!(p, parse_xy("x", &f).unwrap());
    }

    #[test]
    fn parser_errors_carry_position() {
        let f = f7();
        match parse_xy("x + $", &f) {
            Err(Error::Parse { line: 1, col, .. }) => assert!(col >= 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn weighted_orders() {
        let f = f7();
        let p = parse_xy("x^2 + y^4", &f).unwrap();
        assert_eq!(p.weighted_ord(&[2, 1]), Some(4));
        assert_eq!(p.ord(), Some(2));
        let init = p.weighted_initial(&[2, 1]);
        assert_eq!(init, p);
        let q = parse_xy("x^2 + y^4 + y^5", &f).unwrap();
        assert_eq!(q.weighted_initial(&[2, 1]), p);
    }
}
