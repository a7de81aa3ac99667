//! Sparse multivariate polynomials with real coefficients.
//!
//! A [`Polynomial`] stores its nonzero terms sorted by graded-lexicographic
//! order of their exponent vectors. Evaluation always sums in that order and
//! raises coordinates to integer powers by repeated multiplication, so the
//! floating-point result for a given input is the same on every run and every
//! platform.
//!
//! Besides evaluation and differentiation the module provides the two-point
//! telescoping factorization used to build discrete multipliers:
//!
//! ```text
//! p(x') - p(x) = Σ_j  D_j(p; x, x') · (x'_j - x_j)
//! D_j = Σ_α c_α (Σ_{l<α_j} x'_j^l x_j^{α_j-l-1}) Π_{r<j} x_r^{α_r} Π_{s>j} x'_s^{α_s}
//! ```
//!
//! Variables are indexed from 0 in the API and written `x1 .. xn` in text.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{check_len, Error, Location, Result};

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n_vars: usize) -> Self {
        MultiIndex(vec![0; n_vars])
    }

    /// `e_j`, the exponent vector of the single variable `x_j`.
    pub fn unit(n_vars: usize, j: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree |α|.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Graded lexicographic: total degree first, then exponents of `x1, x2, ...`.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `x^e` by repeated multiplication.
#[inline]
pub(crate) fn ipow(x: f64, e: u32) -> f64 {
    match e {
        0 => 1.0,
        _ => {
            let mut r = x;
            for _ in 1..e {
                r *= x;
            }
            r
        }
    }
}

/// Σ_{l=0}^{e-1} next^l · prev^{e-1-l}, the divided difference of `t^e`
/// times `next - prev`.
#[inline]
pub(crate) fn geometric_sum(prev: f64, next: f64, e: u32) -> f64 {
    let mut s = 0.0;
    for l in 0..e {
        s += ipow(next, l) * ipow(prev, e - 1 - l);
    }
    s
}

/// A sparse polynomial in `n_vars` real variables.
///
/// Terms are kept in canonical form: sorted ascending in graded-lex order,
/// no duplicate exponents and no zero coefficients. Values are immutable once
/// built.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n_vars: usize,
    terms: Vec<(MultiIndex, f64)>,
}

impl Polynomial {
    pub fn zero(n_vars: usize) -> Self {
        Polynomial {
            n_vars,
            terms: Vec::new(),
        }
    }

    pub fn constant(n_vars: usize, c: f64) -> Self {
        Self::from_terms(n_vars, [(MultiIndex::zero(n_vars), c)]).expect("zero multi-index has the right length")
    }

    /// The coordinate function `x_j`.
    pub fn var(n_vars: usize, j: usize) -> Self {
        Self::monomial(n_vars, MultiIndex::unit(n_vars, j), 1.0).expect("unit multi-index has the right length")
    }

    pub fn monomial(n_vars: usize, alpha: MultiIndex, c: f64) -> Result<Self> {
        Self::from_terms(n_vars, [(alpha, c)])
    }

    /// Collects terms, summing duplicates in input order and dropping zeros.
    pub fn from_terms<I>(n_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut map: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (alpha, c) in terms {
            check_len("multi-index", alpha.len(), n_vars)?;
            *map.entry(alpha).or_insert(0.0) += c;
        }
        Ok(Self::from_map(n_vars, map))
    }

    fn from_map(n_vars: usize, map: BTreeMap<MultiIndex, f64>) -> Self {
        Polynomial {
            n_vars,
            terms: map.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Terms in canonical (ascending graded-lex) order.
    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(a, _)| a.degree()).max().unwrap_or(0)
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> f64 {
        self.terms
            .binary_search_by(|(a, _)| a.cmp(alpha))
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    /// True if some term has a positive exponent in variable `j`.
    pub fn depends_on(&self, j: usize) -> bool {
        self.terms.iter().any(|(a, _)| a.0.get(j).copied().unwrap_or(0) > 0)
    }

    /// Σ_α c_α x^α, summed in canonical order.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_len("point", x.len(), self.n_vars)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (alpha, c) in &self.terms {
            acc += c * monomial_value(alpha, x);
        }
        acc
    }

    /// ∂p/∂x_j as a canonical polynomial.
    pub fn partial(&self, j: usize) -> Result<Polynomial> {
        if j >= self.n_vars {
            return Err(Error::Input(format!(
                "variable index {j} out of range for {} variables",
                self.n_vars
            )));
        }
        let terms = self.terms.iter().filter_map(|(alpha, c)| {
            let e = alpha.0[j];
            (e > 0).then(|| {
                let mut beta = alpha.clone();
                beta.0[j] -= 1;
                (beta, c * e as f64)
            })
        });
        Polynomial::from_terms(self.n_vars, terms)
    }

    /// The gradient (∂p/∂x_1, ..., ∂p/∂x_n).
    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.n_vars)
            .map(|j| self.partial(j).expect("index in range"))
            .collect()
    }

    /// The `j`-th factor of the telescoping factorization of
    /// `p(x_next) - p(x_prev)`; see the module docs. Variables before `j` are
    /// taken at `x_prev`, variables after `j` at `x_next`.
    pub fn forward_difference_factor(&self, j: usize, x_prev: &[f64], x_next: &[f64]) -> Result<f64> {
        check_len("x_prev", x_prev.len(), self.n_vars)?;
        check_len("x_next", x_next.len(), self.n_vars)?;
        if j >= self.n_vars {
            return Err(Error::Input(format!(
                "variable index {j} out of range for {} variables",
                self.n_vars
            )));
        }
        let mut acc = 0.0;
        for (alpha, c) in &self.terms {
            acc += factor_term(alpha, *c, j, x_prev, x_next);
        }
        Ok(acc)
    }

    /// Evaluates `p` with variable `var` replaced by the divided difference
    /// of its antiderivative and all other variables at the midpoint:
    ///
    /// ```text
    /// c x_v^k Π_{r≠v} x_r^{α_r}  ↦  c/(k+1) Σ_{l=0}^{k} x'_v^l x_v^{k-l} · Π_{r≠v} ((x_r+x'_r)/2)^{α_r}
    /// ```
    ///
    /// Reduces to `p(y)` when both points equal `y`. For `3x² + a` in `x`
    /// this gives `x² + x·x' + x'² + a`.
    pub fn polarized_eval(&self, var: usize, x_prev: &[f64], x_next: &[f64]) -> Result<f64> {
        check_len("x_prev", x_prev.len(), self.n_vars)?;
        check_len("x_next", x_next.len(), self.n_vars)?;
        if var >= self.n_vars {
            return Err(Error::Input(format!(
                "variable index {var} out of range for {} variables",
                self.n_vars
            )));
        }
        let mut acc = 0.0;
        for (alpha, c) in &self.terms {
            let k = alpha.0[var];
            let mut v = c / (k as f64 + 1.0) * geometric_sum(x_prev[var], x_next[var], k + 1);
            for (r, &e) in alpha.0.iter().enumerate() {
                if r != var && e > 0 {
                    v *= ipow(0.5 * (x_prev[r] + x_next[r]), e);
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let map = self.terms.iter().map(|(a, c)| (a.clone(), c * s)).collect();
        Self::from_map(self.n_vars, map)
    }

    /// Parses the text form, resolving identifiers other than `x1..xn`
    /// through `params`.
    pub fn parse_with(text: &str, n_vars: usize, params: &HashMap<String, f64>) -> Result<Self> {
        Parser::new(text, n_vars, params).parse()
    }

    /// Parses the text form; the number of variables is the largest `xK` used.
    /// Use [`Polynomial::parse_with`] to fix the dimension.
    pub fn parse(text: &str) -> Result<Self> {
        let n = max_variable_index(text).max(1);
        Self::parse_with(text, n, &HashMap::new())
    }

    fn assert_same_dim(&self, other: &Polynomial) {
        assert_eq!(
            self.n_vars, other.n_vars,
            "polynomials live in different numbers of variables"
        );
    }
}

#[inline]
pub(crate) fn monomial_value(alpha: &MultiIndex, x: &[f64]) -> f64 {
    let mut v = 1.0;
    for (xr, &e) in x.iter().zip(&alpha.0) {
        if e > 0 {
            v *= ipow(*xr, e);
        }
    }
    v
}

/// One term's contribution to the `j`-th telescoping factor.
#[inline]
pub(crate) fn factor_term(alpha: &MultiIndex, c: f64, j: usize, x_prev: &[f64], x_next: &[f64]) -> f64 {
    let ej = alpha.0[j];
    if ej == 0 {
        return 0.0;
    }
    let mut v = c * geometric_sum(x_prev[j], x_next[j], ej);
    for (r, &e) in alpha.0.iter().enumerate() {
        if e == 0 || r == j {
            continue;
        }
        v *= if r < j { ipow(x_prev[r], e) } else { ipow(x_next[r], e) };
    }
    v
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.assert_same_dim(rhs);
        let mut map: BTreeMap<MultiIndex, f64> = self.terms.iter().cloned().collect();
        for (a, c) in &rhs.terms {
            *map.entry(a.clone()).or_insert(0.0) += c;
        }
        Polynomial::from_map(self.n_vars, map)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.assert_same_dim(rhs);
        let mut map: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (a, c) in &self.terms {
            for (b, d) in &rhs.terms {
                *map.entry(a.add(b)).or_insert(0.0) += c * d;
            }
        }
        Polynomial::from_map(self.n_vars, map)
    }
}

fn fmt_coeff(c: f64) -> String {
    let a = c.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{c:e}")
    } else {
        format!("{c}")
    }
}

/// Prints terms from highest to lowest degree, e.g. `-x1^3 + x2^2 + x1`.
/// Coefficients use the shortest representation that round-trips.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (alpha, c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            match (i, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            let vars: Vec<String> = alpha
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(r, &e)| match e {
                    1 => format!("x{}", r + 1),
                    _ => format!("x{}^{e}", r + 1),
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", fmt_coeff(mag))?;
            } else if mag == 1.0 {
                write!(f, "{}", vars.join(" * "))?;
            } else {
                write!(f, "{} * {}", fmt_coeff(mag), vars.join(" * "))?;
            }
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Polynomial::parse(s)
    }
}

fn max_variable_index(text: &str) -> usize {
    let b = text.as_bytes();
    let mut max = 0;
    let mut i = 0;
    while i < b.len() {
        if b[i].is_ascii_alphabetic() || b[i] == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            if let Some(k) = parse_var_name(&text[start..i]) {
                max = max.max(k);
            }
        } else {
            i += 1;
        }
    }
    max
}

/// `xK` with K ≥ 1, returned 1-based.
fn parse_var_name(ident: &str) -> Option<usize> {
    let digits = ident.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
}

struct Parser<'a> {
    text: &'a str,
    n_vars: usize,
    params: &'a HashMap<String, f64>,
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, n_vars: usize, params: &'a HashMap<String, f64>) -> Self {
        Parser {
            text,
            n_vars,
            params,
            tokens: Vec::new(),
            pos: 0,
        }
    }

    fn err(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            location: Location {
                source: format!("polynomial `{}`", self.text.trim()),
                line: 0,
                column,
            },
            message: message.into(),
        }
    }

    fn lex(&mut self) -> Result<()> {
        let b = self.text.as_bytes();
        let mut i = 0;
        while i < b.len() {
            let c = b[i];
            let col = i + 1;
            match c {
                b' ' | b'\t' => i += 1,
                b'+' => {
                    self.tokens.push((Token::Plus, col));
                    i += 1
                }
                b'-' => {
                    self.tokens.push((Token::Minus, col));
                    i += 1
                }
                b'*' => {
                    self.tokens.push((Token::Star, col));
                    i += 1
                }
                b'^' => {
                    self.tokens.push((Token::Caret, col));
                    i += 1
                }
                b'0'..=b'9' | b'.' => {
                    let start = i;
                    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                        i += 1;
                    }
                    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                        let mut k = i + 1;
                        if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                            k += 1;
                        }
                        if k < b.len() && b[k].is_ascii_digit() {
                            while k < b.len() && b[k].is_ascii_digit() {
                                k += 1;
                            }
                            i = k;
                        }
                    }
                    let s = &self.text[start..i];
                    let v: f64 = s.parse().map_err(|_| self.err(col, format!("bad number `{s}`")))?;
                    self.tokens.push((Token::Num(v), col));
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let start = i;
                    while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                        i += 1;
                    }
                    self.tokens.push((Token::Ident(self.text[start..i].to_string()), col));
                }
                _ => return Err(self.err(col, format!("unexpected character `{}`", c as char))),
            }
        }
        Ok(())
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.text.len() + 1)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn parse(mut self) -> Result<Polynomial> {
        self.lex()?;
        if self.tokens.is_empty() {
            return Err(self.err(0, "empty polynomial"));
        }
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let mut sign = 1.0;
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                }
                Some(Token::Minus) => {
                    sign = -1.0;
                    self.pos += 1;
                }
                None => break,
                _ if first => {}
                _ => return Err(self.err(self.col(), "expected `+` or `-` between terms")),
            }
            first = false;
            let (alpha, c) = self.term()?;
            terms.push((alpha, sign * c));
        }
        Polynomial::from_terms(self.n_vars, terms)
    }

    fn term(&mut self) -> Result<(MultiIndex, f64)> {
        let mut alpha = MultiIndex::zero(self.n_vars);
        let mut coeff = 1.0;
        loop {
            let col = self.col();
            let base = match self.next() {
                Some(Token::Num(v)) => Factor::Scalar(v),
                Some(Token::Ident(name)) => match parse_var_name(&name) {
                    Some(k) if k <= self.n_vars => Factor::Var(k - 1),
                    Some(k) => {
                        return Err(self.err(
                            col,
                            format!("variable x{k} exceeds the {} declared variables", self.n_vars),
                        ))
                    }
                    None => match self.params.get(&name) {
                        Some(v) => Factor::Scalar(*v),
                        None => return Err(self.err(col, format!("unknown identifier `{name}`"))),
                    },
                },
                _ => return Err(self.err(col, "expected a number, variable or parameter")),
            };
            let mut exp = 1u32;
            if self.peek() == Some(&Token::Caret) {
                self.pos += 1;
                let col = self.col();
                match self.next() {
                    Some(Token::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => exp = v as u32,
                    _ => return Err(self.err(col, "exponent must be a non-negative integer")),
                }
            }
            match base {
                Factor::Scalar(v) => coeff *= ipow(v, exp),
                Factor::Var(j) => alpha.0[j] += exp,
            }
            if self.peek() == Some(&Token::Star) {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((alpha, coeff))
    }
}

enum Factor {
    Scalar(f64),
    Var(usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elliptic(a: f64) -> Polynomial {
        let params = HashMap::from([("a".to_string(), a)]);
        Polynomial::parse_with("x2^2 - x1^3 - a*x1", 2, &params).unwrap()
    }

    /// Term-by-term evaluation with `powi`, independent of the canonical path.
    fn naive_eval(p: &Polynomial, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (alpha, c) in p.terms() {
            let mut m = *c;
            for (r, &e) in alpha.exponents().iter().enumerate() {
                for _ in 0..e {
                    m *= x[r];
                }
            }
            s += m;
        }
        s
    }

    #[test]
    fn evaluates_elliptic_level() {
        let p = elliptic(-1.0);
        let x0 = 0.571_f64;
        let y0 = (x0 * x0 * x0 - x0 + 0.3849).sqrt();
        let v = p.evaluate(&[x0, y0]).unwrap();
        assert!((v - 0.3849).abs() < 1e-15, "{v}");
        // y0 reported as ≈ 8.33e-3
        assert!((y0 - 8.33e-3).abs() < 5e-6);
    }

    #[test]
    fn constant_and_mixed() {
        assert_eq!(Polynomial::constant(3, 5.0).evaluate(&[1.0, -2.0, 9.0]).unwrap(), 5.0);
        let p = Polynomial::parse("x1^2*x2 + 3*x2^3").unwrap();
        assert_eq!(p.n_vars(), 2);
        assert_eq!(p.evaluate(&[2.0, 1.0]).unwrap(), 7.0);
        assert_eq!(naive_eval(&p, &[2.0, 1.0]), 7.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = elliptic(-1.0);
        assert!(matches!(p.evaluate(&[1.0]), Err(Error::Input(_))));
        assert!(p.forward_difference_factor(2, &[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(p.forward_difference_factor(0, &[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn gradient_of_elliptic() {
        let a = 0.7;
        let g = elliptic(a).gradient();
        let params = HashMap::from([("a".to_string(), a)]);
        assert_eq!(g[0], Polynomial::parse_with("-3*x1^2 - a", 2, &params).unwrap());
        assert_eq!(g[1], Polynomial::parse_with("2*x2", 2, &params).unwrap());
        let c = Polynomial::constant(3, 2.0).gradient();
        assert!(c.iter().all(Polynomial::is_zero));
    }

    #[test]
    fn difference_factor_small_cases() {
        let cube = Polynomial::parse("x1^3").unwrap();
        let (x, xn) = (0.3, -1.7);
        let f = cube.forward_difference_factor(0, &[x], &[xn]).unwrap();
        assert!((f - (xn * xn + xn * x + x * x)).abs() < 1e-15);
        let lin = Polynomial::parse("x1").unwrap();
        assert_eq!(lin.forward_difference_factor(0, &[4.0], &[-9.0]).unwrap(), 1.0);
    }

    #[test]
    fn polarized_matches_hand_form() {
        let params = HashMap::from([("a".to_string(), -1.0)]);
        let fy = Polynomial::parse_with("3*x1^2 + a", 2, &params).unwrap();
        let (p, n) = ([0.4, 0.1], [0.45, -0.2]);
        let v = fy.polarized_eval(0, &p, &n).unwrap();
        assert_eq!(v, -1.0 + (p[0] * p[0] + n[0] * p[0] + n[0] * n[0]));
        let y = [0.3, 0.8];
        assert!((fy.polarized_eval(0, &y, &y).unwrap() - fy.evaluate(&y).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn canonical_form() {
        let p = Polynomial::parse("x1 - x1 + 0*x2 + 2*x2 + x2").unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.coefficient(&MultiIndex::unit(2, 1)), 3.0);
        assert!(Polynomial::parse("x1 - x1").unwrap().is_zero());
        let mut idx: Vec<MultiIndex> = Polynomial::parse("x2^3 + x1 + x1*x2 + 7 + x1^2")
            .unwrap()
            .terms()
            .iter()
            .map(|(a, _)| a.clone())
            .collect();
        let sorted = idx.clone();
        idx.sort();
        assert_eq!(idx, sorted);
        assert_eq!(sorted[0], MultiIndex::zero(2));
        assert_eq!(sorted.last().unwrap().degree(), 3);
    }

    #[test]
    fn prints_and_reparses() {
        let p = elliptic(-1.0);
        assert_eq!(p.to_string(), "-x1^3 + x2^2 + x1");
        let q = Polynomial::parse("2.5*x1*x3^2 - 1e-7 + x2").unwrap();
        assert_eq!(q.to_string(), "2.5 * x1 * x3^2 + x2 - 1e-7");
        assert_eq!(Polynomial::parse(&q.to_string()).unwrap(), q);
        assert_eq!(Polynomial::zero(2).to_string(), "0");
    }

    #[test]
    fn parse_errors_carry_columns() {
        for bad in ["", "x1 +", "x1 ^ -2", "3 x1", "x0", "b*x1", "x1 $ 2"] {
            match Polynomial::parse(bad) {
                Err(Error::Parse { .. }) => {}
                other => panic!("`{bad}` parsed to {other:?}"),
            }
        }
        let e = Polynomial::parse_with("x3", 2, &HashMap::new()).unwrap_err();
        assert!(e.to_string().contains("col 1"), "{e}");
    }

    #[test]
    fn arithmetic() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&x * &x) - &(&y * &y);
        let q = &(&x + &y) * &(&x - &y);
        assert_eq!(p, q);
        assert!((&p - &q).is_zero());
        assert_eq!(p.degree(), 2);
        assert!(p.depends_on(1) && !Polynomial::constant(2, 1.0).depends_on(0));
    }
}
