//! Exact polynomials over ℚ.
//!
//! [`Poly`] is a sparse multivariate polynomial used for phases and supports.
//! [`UPoly`] is a dense univariate polynomial carrying the real-root
//! machinery: square-free decomposition and Sturm sequences.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q2(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exact binary value of a finite double.
pub fn q_from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parse `"p/q"`, an integer, or a finite decimal such as `"-0.25"`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::invalid(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) || !ip.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{ip}{fp}");
        let n: BigInt = if digits.is_empty() { return Err(bad()) } else { digits.parse().map_err(|_| bad())? };
        let r = Q::new(n, BigInt::from(10u32).pow(fp.len() as u32));
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

// ---------------------------------------------------------------------------
// Univariate

/// Dense univariate polynomial, coefficients in ascending order, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    c: Vec<Q>,
}

impl UPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| q(x)).collect())
    }

    pub fn zero() -> Self {
        UPoly { c: vec![] }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.c.iter().rev().fold(Q::zero(), |acc, a| acc * x + a)
    }

    pub fn deriv(&self) -> Self {
        Self::new(self.c.iter().enumerate().skip(1).map(|(i, a)| a * q(i as i64)).collect())
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::new(self.c.iter().map(|a| a * s).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new(
            (0..n)
                .map(|i| self.c.get(i).cloned().unwrap_or_else(Q::zero) + o.c.get(i).cloned().unwrap_or_else(Q::zero))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// Euclidean division `self = q·d + r`.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.c.len() - 1;
        let lead = d.lead();
        let mut r = self.c.clone();
        if r.len() < d.c.len() {
            return (Self::zero(), self.clone());
        }
        let mut qc = vec![Q::zero(); r.len() - dd];
        for k in (0..qc.len()).rev() {
            let coef = &r[k + dd] / &lead;
            if !coef.is_zero() {
                for (j, b) in d.c.iter().enumerate() {
                    r[k + j] -= &coef * b;
                }
            }
            qc[k] = coef;
        }
        r.truncate(dd);
        (Self::new(qc), Self::new(r))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(&(Q::one() / self.lead()))
    }

    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's square-free decomposition: `self = c·∏ fₖᵏ` with each `fₖ`
    /// square-free and pairwise coprime. Returns `(k, fₖ)` for non-constant `fₖ`.
    pub fn squarefree(&self) -> Vec<(usize, UPoly)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.deriv();
        let mut a = Self::gcd(&f, &fp);
        let mut b = f.divrem(&a).0;
        let mut c = fp.divrem(&a).0;
        let mut d = c.sub(&b.deriv());
        let mut k = 1;
        loop {
            a = Self::gcd(&b, &d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((k, a.clone()));
            }
            b = b.divrem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.divrem(&a).0;
            d = c.sub(&b.deriv());
            k += 1;
        }
        out
    }

    pub fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.deriv()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let (_, r) = seq[n - 2].divrem(&seq[n - 1]);
            seq.push(r.scale(&-Q::one()));
        }
        seq.pop();
        seq
    }

    fn sign_changes(signs: impl Iterator<Item = Ordering>) -> usize {
        let mut last = Ordering::Equal;
        let mut n = 0;
        for s in signs.filter(|s| *s != Ordering::Equal) {
            if last != Ordering::Equal && s != last {
                n += 1;
            }
            last = s;
        }
        n
    }

    fn sign_of(x: &Q) -> Ordering {
        x.cmp(&Q::zero())
    }

    fn changes_at(seq: &[UPoly], x: &Q) -> usize {
        Self::sign_changes(seq.iter().map(|p| Self::sign_of(&p.eval(x))))
    }

    fn changes_at_inf(seq: &[UPoly], positive: bool) -> usize {
        Self::sign_changes(seq.iter().map(|p| {
            let s = Self::sign_of(&p.lead());
            let odd = p.degree().unwrap_or(0) % 2 == 1;
            if !positive && odd {
                s.reverse()
            } else {
                s
            }
        }))
    }

    /// Number of distinct real roots.
    pub fn count_real_roots(&self) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let seq = self.sturm_sequence();
        Self::changes_at_inf(&seq, false) - Self::changes_at_inf(&seq, true)
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count_roots_in(&self, a: &Q, b: &Q) -> usize {
        if self.degree().unwrap_or(0) == 0 || a >= b {
            return 0;
        }
        let seq = self.sturm_sequence();
        Self::changes_at(&seq, a).saturating_sub(Self::changes_at(&seq, b))
    }

    /// Cauchy bound: every real root lies strictly inside `(−B, B)`.
    pub fn root_bound(&self) -> Q {
        let lead = self.lead().abs();
        let m = self.c.iter().rev().skip(1).map(|a| a.abs() / &lead).max().unwrap_or_else(Q::zero);
        m + q(1)
    }

    /// Disjoint intervals `(lo, hi]`, each containing exactly one real root,
    /// with width at most `width`.
    pub fn isolate_real_roots(&self, width: &Q) -> Vec<(Q, Q)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let sf = self.divrem(&Self::gcd(self, &self.deriv())).0;
        let seq = sf.sturm_sequence();
        let b = sf.root_bound();
        let mut stack = vec![(-b.clone(), b)];
        while let Some((lo, hi)) = stack.pop() {
            let n = Self::changes_at(&seq, &lo).saturating_sub(Self::changes_at(&seq, &hi));
            if n == 0 {
                continue;
            }
            if n == 1 && &hi - &lo <= *width {
                out.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / q(2);
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
        }
        out.sort();
        out
    }

    /// Real roots grouped by multiplicity: `(multiplicity, isolating interval)`.
    pub fn real_roots_with_multiplicity(&self, width: &Q) -> Vec<(usize, (Q, Q))> {
        let mut out = Vec::new();
        for (k, f) in self.squarefree() {
            for iv in f.isolate_real_roots(width) {
                out.push((k, iv));
            }
        }
        out.sort_by(|a, b| a.1.cmp(&b.1));
        out
    }
}

// ---------------------------------------------------------------------------
// Multivariate

/// Per-variable parity of a polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Sparse multivariate polynomial over ℚ in `d` variables `z1..zd`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    d: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(d: usize) -> Self {
        Poly { d, terms: BTreeMap::new() }
    }

    pub fn constant(d: usize, c: Q) -> Self {
        Self::monomial(vec![0; d], c)
    }

    pub fn monomial(exps: Vec<u32>, c: Q) -> Self {
        let mut p = Self::zero(exps.len());
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// The variable `z_{i+1}` (zero-based index `i`).
    pub fn var(d: usize, i: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Self {
        let mut p = Self::zero(d);
        for (e, c) in terms {
            assert_eq!(e.len(), d, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        let entry = self.terms.entry(e).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn coeff(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn support(&self) -> Vec<Vec<u32>> {
        self.terms.keys().cloned().collect()
    }

    /// Embed into `d` variables by appending unused ones.
    pub fn widen(&self, d: usize) -> Self {
        assert!(d >= self.d);
        Self::from_terms(
            d,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = e.clone();
                e2.resize(d, 0);
                (e2, c.clone())
            }),
        )
    }

    /// Rename variables: variable `i` of `self` becomes variable `map[i]` in `d` variables.
    pub fn relabel(&self, d: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.d);
        Self::from_terms(
            d,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = vec![0; d];
                for (i, &k) in e.iter().enumerate() {
                    e2[map[i]] += k;
                }
                (e2, c.clone())
            }),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.d, o.d, "dimension mismatch");
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::from_terms(self.d, self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.d, o.d, "dimension mismatch");
        let mut p = Self::zero(self.d);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::constant(self.d, Q::one());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// `∂/∂z_{i+1}`.
    pub fn partial(&self, i: usize) -> Self {
        Self::from_terms(
            self.d,
            self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, c * q(e[i] as i64))
            }),
        )
    }

    pub fn eval_q(&self, x: &[Q]) -> Q {
        self.terms.iter().fold(Q::zero(), |acc, (e, c)| {
            let m = e.iter().zip(x).fold(c.clone(), |m, (&k, xi)| m * num_traits::pow(xi.clone(), k as usize));
            acc + m
        })
    }

    /// Exact translate `z ↦ S(c + z)`.
    pub fn translate(&self, c: &[Q]) -> Self {
        assert_eq!(c.len(), self.d);
        let mut out = Self::zero(self.d);
        for (e, coef) in &self.terms {
            let mut term = Self::constant(self.d, coef.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    let lin = Self::var(self.d, i).add(&Self::constant(self.d, c[i].clone()));
                    term = term.mul(&lin.pow(k));
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Constant term removed.
    pub fn without_constant(&self) -> Self {
        let mut p = self.clone();
        p.terms.remove(&vec![0; self.d]);
        p
    }

    /// `S(0) = 0` and `∇S(0) = 0`.
    pub fn is_critical_germ(&self) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() >= 2)
    }

    pub fn parity(&self, i: usize) -> Parity {
        let mut even = true;
        let mut odd = true;
        for e in self.terms.keys() {
            if e[i] % 2 == 0 {
                odd = false;
            } else {
                even = false;
            }
        }
        match (even, odd) {
            (true, _) => Parity::Even,
            (false, true) => Parity::Odd,
            _ => Parity::Mixed,
        }
    }

    /// Every monomial has odd total degree, so `S(−z) = −S(z)`.
    pub fn is_globally_odd(&self) -> bool {
        !self.terms.is_empty() && self.terms.keys().all(|e| e.iter().sum::<u32>() % 2 == 1)
    }

    /// Invariant under every permutation of the variables.
    pub fn is_symmetric(&self) -> bool {
        (0..self.d.saturating_sub(1)).all(|i| {
            let mut map: Vec<usize> = (0..self.d).collect();
            map.swap(i, i + 1);
            self.relabel(self.d, &map) == *self
        })
    }

    pub fn compile(&self) -> Compiled {
        Compiled::new(self)
    }

    /// Parse expressions such as `"(z1+z2)^3 - z1^3 - z2^3 + 1/2*z3^2"`.
    /// Variables are a lowercase name followed by a 1-based index; the
    /// dimension is the largest index unless `d` is given.
    pub fn parse(s: &str, d: Option<usize>) -> Result<Self> {
        let toks = tokenize(s)?;
        let maxvar = toks.iter().filter_map(|t| if let Tok::Var(i) = t { Some(*i + 1) } else { None }).max().unwrap_or(1);
        let dim = match d {
            Some(d) if d < maxvar => return Err(Error::invalid(format!("expression uses {maxvar} variables, d = {d}"))),
            Some(d) => d,
            None => maxvar,
        };
        let mut p = Parser { toks, pos: 0, d: dim };
        let r = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::invalid(format!("trailing input in polynomial {s:?}")));
        }
        Ok(r)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest total degree first.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.iter().sum::<u32>().cmp(&a.0.iter().sum::<u32>()).then(b.0.cmp(a.0)));
        for (n, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("z{}", i + 1) } else { format!("z{}^{}", i + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{a}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Q),
    Var(usize),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(parse_rational(&cs[st..i].iter().collect::<String>())?));
        } else if c.is_ascii_lowercase() {
            while i < cs.len() && cs[i].is_ascii_lowercase() {
                i += 1;
            }
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let idx: usize = cs[st..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::invalid(format!("variable without index in {s:?}")))?;
            if idx == 0 {
                return Err(Error::invalid("variable indices start at 1"));
            }
            out.push(Tok::Var(idx - 1));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::invalid(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    d: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = if self.eat('-') {
            self.term()?.scale(&-Q::one())
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat('/') {
                match self.factor()? {
                    p if p.degree() == 0 && !p.is_zero() => {
                        let c = p.coeff(&vec![0; self.d]);
                        acc = acc.scale(&(Q::one() / c));
                    }
                    _ => return Err(Error::invalid("division only by nonzero constants")),
                }
            } else if matches!(self.peek(), Some(Tok::Var(_)) | Some(Tok::Op('('))) {
                acc = acc.mul(&self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(c)) => {
                self.pos += 1;
                Poly::constant(self.d, c)
            }
            Some(Tok::Var(i)) => {
                self.pos += 1;
                Poly::var(self.d, i)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::invalid("unbalanced parenthesis"));
                }
                e
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                return Ok(self.factor()?.scale(&-Q::one()));
            }
            other => return Err(Error::invalid(format!("unexpected token {other:?}"))),
        };
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(k)) if k.is_integer() && !k.is_negative() => {
                    self.pos += 1;
                    let k = k.to_integer().to_u32().ok_or_else(|| Error::invalid("exponent too large"))?;
                    return Ok(base.pow(k));
                }
                _ => return Err(Error::invalid("exponent must be a nonnegative integer")),
            }
        }
        Ok(base)
    }
}

/// Floating-point form of a [`Poly`] for hot loops.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub d: usize,
    coef: Vec<f64>,
    exps: Vec<[u8; 8]>,
    maxdeg: usize,
}

impl Compiled {
    fn new(p: &Poly) -> Self {
        assert!(p.d <= 8, "at most 8 variables in compiled form");
        let mut coef = Vec::new();
        let mut exps = Vec::new();
        for (e, c) in &p.terms {
            let mut a = [0u8; 8];
            for (k, &x) in e.iter().enumerate() {
                a[k] = u8::try_from(x).expect("exponent fits u8");
            }
            coef.push(q_to_f64(c));
            exps.push(a);
        }
        Compiled { d: p.d, coef, exps, maxdeg: p.terms.keys().flatten().copied().max().unwrap_or(0) as usize }
    }

    pub fn max_partial_degree(&self) -> usize {
        self.maxdeg
    }

    /// Evaluate given per-variable power tables `pw[i][k] = xᵢᵏ`.
    #[inline]
    pub fn eval_powers(&self, pw: &[Vec<f64>]) -> f64 {
        let mut s = 0.0;
        for (c, e) in self.coef.iter().zip(&self.exps) {
            let mut m = *c;
            for i in 0..self.d {
                m *= pw[i][e[i] as usize];
            }
            s += m;
        }
        s
    }

    /// Like [`Compiled::eval_powers`] with borrowed per-variable tables.
    #[inline]
    pub fn eval_slices(&self, pw: &[&[f64]]) -> f64 {
        let mut s = 0.0;
        for (c, e) in self.coef.iter().zip(&self.exps) {
            let mut m = *c;
            for (i, p) in pw.iter().enumerate() {
                m *= p[e[i] as usize];
            }
            s += m;
        }
        s
    }

    pub fn powers(&self, x: &[f64]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|&xi| {
                let mut v = Vec::with_capacity(self.maxdeg + 1);
                let mut p = 1.0;
                for _ in 0..=self.maxdeg {
                    v.push(p);
                    p *= xi;
                }
                v
            })
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_powers(&self.powers(x))
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let pw = self.powers(x);
        let mut g = vec![0.0; self.d];
        for (c, e) in self.coef.iter().zip(&self.exps) {
            for (j, gj) in g.iter_mut().enumerate() {
                if e[j] == 0 {
                    continue;
                }
                let mut m = *c * e[j] as f64;
                for i in 0..self.d {
                    let k = e[i] as usize - usize::from(i == j);
                    m *= pw[i][k];
                }
                *gj += m;
            }
        }
        g
    }

    pub fn hessian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let pw = self.powers(x);
        let mut h = vec![vec![0.0; self.d]; self.d];
        for (c, e) in self.coef.iter().zip(&self.exps) {
            for j in 0..self.d {
                for l in j..self.d {
                    let mut k = [0i32; 8];
                    for i in 0..self.d {
                        k[i] = e[i] as i32;
                    }
                    let mut m = *c;
                    m *= k[j] as f64;
                    k[j] -= 1;
                    m *= k[l] as f64;
                    k[l] -= 1;
                    if m == 0.0 {
                        continue;
                    }
                    for i in 0..self.d {
                        m *= pw[i][k[i] as usize];
                    }
                    h[j][l] += m;
                    if l != j {
                        h[l][j] += m;
                    }
                }
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_expand() {
        let p = Poly::parse("(z1+z2)^3 - z1^3 - z2^3", None).unwrap();
        let e = Poly::parse("3*z1^2*z2 + 3 z1 z2^2", None).unwrap();
        assert_eq!(p, e);
        assert_eq!(p.dim(), 2);
        let r = Poly::parse("1/2*x1^2 - 0.25*x2", Some(3)).unwrap();
        assert_eq!(r.dim(), 3);
        assert_eq!(r.coeff(&[2, 0, 0]), q2(1, 2));
        assert_eq!(r.coeff(&[0, 1, 0]), q2(-1, 4));
        assert!(Poly::parse("z1 +", None).is_err());
        assert!(Poly::parse("z0", None).is_err());
        assert!(Poly::parse("z3", Some(2)).is_err());
    }

    #[test]
    fn display_round_trip() {
        let p = Poly::parse("3/2*z1^2*z2 - z3^3 + 7", None).unwrap();
        assert_eq!(Poly::parse(&p.to_string(), Some(3)).unwrap(), p);
    }

    #[test]
    fn translate_is_exact() {
        let p = Poly::parse("z1*z2*z3", None).unwrap();
        let t = p.translate(&[q(1), q(0), q2(1, 2)]);
        let pt = [q(2), q(3), q(5)];
        let shifted = [q(3), q(3), q2(11, 2)];
        assert_eq!(t.eval_q(&pt), p.eval_q(&shifted));
    }

    #[test]
    fn parity_and_symmetry() {
        let d4 = Poly::parse("z2^3 - z1^2*z2", None).unwrap();
        assert_eq!(d4.parity(0), Parity::Even);
        assert_eq!(d4.parity(1), Parity::Odd);
        assert!(!d4.is_symmetric());
        let p4 = Poly::parse("(z1+z2+z3+z4)^3 - z1^3 - z2^3 - z3^3 - z4^3", None).unwrap();
        assert!(p4.is_symmetric());
        assert!(p4.is_globally_odd());
        assert_eq!(p4.parity(0), Parity::Mixed);
    }

    #[test]
    fn compiled_matches_exact() {
        let p = Poly::parse("3*z1^2*z2 - z2^3 + 1/3*z1*z2*z3 + z3^4", None).unwrap();
        let c = p.compile();
        let x = [0.3, -0.7, 1.1];
        let exact = q_to_f64(&p.eval_q(&x.map(q_from_f64)));
        assert!((c.eval(&x) - exact).abs() < 1e-14);
        let g = c.grad(&x);
        for (i, gi) in g.iter().enumerate() {
            let e = q_to_f64(&p.partial(i).eval_q(&x.map(q_from_f64)));
            assert!((gi - e).abs() < 1e-13);
        }
        let h = c.hessian(&x);
        for i in 0..3 {
            for j in 0..3 {
                let e = q_to_f64(&p.partial(i).partial(j).eval_q(&x.map(q_from_f64)));
                assert!((h[i][j] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn squarefree_decomposition() {
        // (x-1)^2 (x+2)^3 (x^2+1)
        let a = UPoly::from_i64(&[-1, 1]);
        let b = UPoly::from_i64(&[2, 1]);
        let c = UPoly::from_i64(&[1, 0, 1]);
        let p = a.mul(&a).mul(&b).mul(&b).mul(&b).mul(&c);
        let sf = p.squarefree();
        assert_eq!(sf.len(), 3);
        assert_eq!(sf[0], (1, c.clone()));
        assert_eq!(sf[1], (2, a.clone()));
        assert_eq!(sf[2], (3, b.clone()));
        let roots = p.real_roots_with_multiplicity(&q2(1, 1024));
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].0, 3);
        assert!(roots[0].1 .0 < q(-2) && roots[0].1 .1 >= q(-2));
        assert_eq!(roots[1].0, 2);
    }

    #[test]
    fn sturm_counts() {
        let p = UPoly::from_i64(&[-2, 0, 1]); // x^2 - 2
        assert_eq!(p.count_real_roots(), 2);
        assert_eq!(p.count_roots_in(&q(0), &q(2)), 1);
        assert_eq!(UPoly::from_i64(&[1, 0, 1]).count_real_roots(), 0);
        let iv = p.isolate_real_roots(&q2(1, 1 << 20));
        assert_eq!(iv.len(), 2);
        let r = q_to_f64(&iv[1].1);
        assert!((r - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("-5/6").unwrap(), q2(-5, 6));
        assert_eq!(parse_rational("0.125").unwrap(), q2(1, 8));
        assert_eq!(parse_rational("-1.5").unwrap(), q2(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), q(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }
}
