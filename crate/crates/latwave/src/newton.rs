//! Newton polyhedra, Newton distance, principal faces, adaptedness in two
//! variables, binary quartics and the `(β, p)` decay-index calculus.
//!
//! Everything here is exact over ℚ.
//!
//! ```
//! use latwave::newton::{newton_distance, SupportSet};
//! use latwave::poly::q2;
//!
//! let s = SupportSet::new(2, vec![vec![3, 0], vec![0, 3]]).unwrap();
//! assert_eq!(newton_distance(&s), q2(3, 2));
//! ```

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::poly::{parse_rational, q, Poly, UPoly, Q};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Exact simplex

/// `min cᵀx` subject to `Ax = b`, `x ≥ 0`. `Ok(None)` when infeasible.
pub fn lp_min(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> Result<Option<(Q, Vec<Q>)>> {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    assert!(a.iter().all(|r| r.len() == n));
    // Tableau columns: n originals, m artificials, rhs.
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Q> = a[i].iter().map(|x| if flip { -x } else { x.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
        row.push(if flip { -&b[i] } else { b[i].clone() });
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut phase1 = vec![Q::zero(); n + m];
    for x in phase1.iter_mut().skip(n) {
        *x = Q::one();
    }
    run_simplex(&mut t, &mut basis, &phase1, n + m)?;
    let infeas: Q = basis.iter().zip(&t).filter(|(&j, _)| j >= n).map(|(_, r)| r[n + m].clone()).sum();
    if infeas.is_positive() {
        return Ok(None);
    }
    // Drive remaining (zero-level) artificials out of the basis.
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            } else {
                t.remove(i);
                basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    let mut cost = c.to_vec();
    cost.extend((0..m).map(|_| Q::zero()));
    run_simplex(&mut t, &mut basis, &cost, n)?;
    let rhs = n + m;
    let mut x = vec![Q::zero(); n];
    for (r, &j) in t.iter().zip(&basis) {
        x[j] = r[rhs].clone();
    }
    let value = x.iter().zip(c).map(|(x, c)| x * c).sum();
    Ok(Some((value, x)))
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, col: usize) {
    let p = t[r][col].clone();
    for x in t[r].iter_mut() {
        *x /= &p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[col].is_zero() {
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                *x -= &f * y;
            }
        }
    }
    basis[r] = col;
}

fn run_simplex(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], allowed: usize) -> Result<()> {
    let rhs = t.first().map_or(0, |r| r.len() - 1);
    loop {
        // Bland's rule: smallest index with negative reduced cost.
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let z: Q = t.iter().zip(basis.iter()).map(|(row, &b)| &cost[b] * &row[j]).sum();
            (&cost[j] - z).is_negative()
        });
        let Some(j) = entering else { return Ok(()) };
        let mut best: Option<(usize, Q)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j].is_positive() {
                let ratio = &row[rhs] / &row[j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = best else {
            return Err(Error::NonConvergent("linear program is unbounded".into()));
        };
        pivot(t, basis, r, j);
    }
}

fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pr = m[r].clone();
        for row in m.iter_mut().skip(r + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &pr[c];
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    r
}

/// One-dimensional nullspace vector of a `(d−1) × d` matrix, if the kernel has dimension 1.
fn normal_vector(rows: &[Vec<Q>], d: usize) -> Option<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..d {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pr = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() != d - 1 {
        return None;
    }
    let free = (0..d).find(|c| !pivots.contains(c))?;
    let mut v = vec![Q::zero(); d];
    v[free] = Q::one();
    for (row, &pc) in m.iter().zip(&pivots) {
        v[pc] = -&row[free];
    }
    Some(v)
}

// ---------------------------------------------------------------------------
// Supports and polyhedra

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    d: usize,
    points: BTreeSet<Vec<u32>>,
}

impl SupportSet {
    pub fn new(d: usize, points: impl IntoIterator<Item = Vec<u32>>) -> Result<Self> {
        let points: BTreeSet<Vec<u32>> = points.into_iter().collect();
        if points.is_empty() {
            return Err(Error::invalid("support set must be nonempty"));
        }
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::invalid(format!("support points must have length {d}")));
        }
        Ok(SupportSet { d, points })
    }

    pub fn of(p: &Poly) -> Result<Self> {
        Self::new(p.dim(), p.support())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.points.iter()
    }

    fn as_q(&self) -> Vec<Vec<Q>> {
        self.points.iter().map(|p| p.iter().map(|&x| q(x as i64)).collect()).collect()
    }
}

/// Smallest `ϱ` with `(ϱ,…,ϱ)` in the Newton polyhedron, by exact LP.
pub fn newton_distance(s: &SupportSet) -> Q {
    let g = s.as_q();
    let k = g.len();
    let d = s.d;
    // Variables: λ (k), t, slack (d).
    let n = k + 1 + d;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..d {
        let mut row = vec![Q::zero(); n];
        for i in 0..k {
            row[i] = g[i][j].clone();
        }
        row[k] = -Q::one();
        row[k + 1 + j] = Q::one();
        a.push(row);
        b.push(Q::zero());
    }
    let mut row = vec![Q::zero(); n];
    for x in row.iter_mut().take(k) {
        *x = Q::one();
    }
    a.push(row);
    b.push(Q::one());
    let mut c = vec![Q::zero(); n];
    c[k] = Q::one();
    let (v, _) = lp_min(&a, &b, &c).expect("bounded LP").expect("feasible LP");
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    /// Inward normal, nonnegative.
    pub normal: Vec<Q>,
    pub offset: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolyhedron {
    pub d: usize,
    pub generators: SupportSet,
    pub vertices: Vec<Vec<u32>>,
    pub facets: Vec<Facet>,
}

/// Is `x` in `conv(pts) + ℝ₊ᵈ`?
fn in_polyhedron(pts: &[Vec<Q>], x: &[Q]) -> bool {
    if pts.is_empty() {
        return false;
    }
    let k = pts.len();
    let d = x.len();
    let n = k + d;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..d {
        let mut row = vec![Q::zero(); n];
        for i in 0..k {
            row[i] = pts[i][j].clone();
        }
        row[k + j] = Q::one();
        a.push(row);
        b.push(x[j].clone());
    }
    let mut row = vec![Q::zero(); n];
    for v in row.iter_mut().take(k) {
        *v = Q::one();
    }
    a.push(row);
    b.push(Q::one());
    lp_min(&a, &b, &vec![Q::zero(); n]).expect("bounded").is_some()
}

impl NewtonPolyhedron {
    pub fn new(s: &SupportSet) -> Self {
        let g = s.as_q();
        let pts: Vec<Vec<u32>> = s.points.iter().cloned().collect();
        let vertices: Vec<Vec<u32>> = (0..g.len())
            .filter(|&i| {
                let others: Vec<Vec<Q>> = g.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect();
                !in_polyhedron(&others, &g[i])
            })
            .map(|i| pts[i].clone())
            .collect();
        let facets = Self::facets_of(s.d, &vertices);
        NewtonPolyhedron { d: s.d, generators: s.clone(), vertices, facets }
    }

    fn facets_of(d: usize, vertices: &[Vec<u32>]) -> Vec<Facet> {
        let vq: Vec<Vec<Q>> = vertices.iter().map(|p| p.iter().map(|&x| q(x as i64)).collect()).collect();
        let mut found: Vec<Facet> = Vec::new();
        for ndir in 0..d {
            let nv = d - ndir;
            for dirs in subsets(d, ndir) {
                for vs in subsets(vq.len(), nv) {
                    let v0 = &vq[vs[0]];
                    let mut rows: Vec<Vec<Q>> = vs[1..].iter().map(|&i| vq[i].iter().zip(v0).map(|(a, b)| a - b).collect()).collect();
                    for &j in &dirs {
                        let mut e = vec![Q::zero(); d];
                        e[j] = Q::one();
                        rows.push(e);
                    }
                    let Some(mut a) = normal_vector(&rows, d) else { continue };
                    if a.iter().all(|x| !x.is_positive()) {
                        a.iter_mut().for_each(|x| *x = -x.clone());
                    }
                    if a.iter().any(|x| x.is_negative()) {
                        continue;
                    }
                    let first = a.iter().find(|x| !x.is_zero()).cloned().expect("nonzero normal");
                    a.iter_mut().for_each(|x| *x /= &first);
                    let b: Q = a.iter().zip(v0).map(|(x, y)| x * y).sum();
                    let ok = vq.iter().all(|v| a.iter().zip(v).map(|(x, y)| x * y).sum::<Q>() >= b);
                    let f = Facet { normal: a, offset: b };
                    if ok && !found.contains(&f) {
                        found.push(f);
                    }
                }
            }
        }
        found
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.facets.iter().all(|f| f.normal.iter().zip(x).map(|(a, b)| a * b).sum::<Q>() >= f.offset)
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// Principal face

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrincipalFace {
    pub distance: Q,
    pub dim: usize,
    /// Generators lying on the face.
    pub generators: Vec<Vec<u32>>,
    /// Coordinate directions `eⱼ` contained in the face's recession cone.
    pub unbounded_directions: Vec<usize>,
    /// For a compact edge in two variables: `(a₁, a₂)` with the edge on `a₁ξ₁ + ξ₂ = a₂`.
    pub edge_line: Option<(Q, Q)>,
}

impl PrincipalFace {
    pub fn is_compact(&self) -> bool {
        self.unbounded_directions.is_empty()
    }
}

/// The face of minimal dimension containing the diagonal point `(d_S,…,d_S)`.
///
/// A generator (or a direction `eⱼ`) lies on that face exactly when it can
/// carry positive weight in some representation of the diagonal point.
pub fn principal_face(s: &SupportSet) -> PrincipalFace {
    let ds = newton_distance(s);
    let g = s.as_q();
    let pts: Vec<Vec<u32>> = s.points.iter().cloned().collect();
    let k = g.len();
    let d = s.d;
    let n = k + d;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..d {
        let mut row = vec![Q::zero(); n];
        for i in 0..k {
            row[i] = g[i][j].clone();
        }
        row[k + j] = Q::one();
        a.push(row);
        b.push(ds.clone());
    }
    let mut row = vec![Q::zero(); n];
    for v in row.iter_mut().take(k) {
        *v = Q::one();
    }
    a.push(row);
    b.push(Q::one());
    let can_be_positive = |var: usize| {
        let mut c = vec![Q::zero(); n];
        c[var] = -Q::one();
        let (v, _) = lp_min(&a, &b, &c).expect("bounded").expect("diagonal point is in the polyhedron");
        v.is_negative()
    };
    let on_face: Vec<usize> = (0..k).filter(|&i| can_be_positive(i)).collect();
    let dirs: Vec<usize> = (0..d).filter(|&j| can_be_positive(k + j)).collect();
    let mut rows: Vec<Vec<Q>> = on_face[1..].iter().map(|&i| g[i].iter().zip(&g[on_face[0]]).map(|(x, y)| x - y).collect()).collect();
    for &j in &dirs {
        let mut e = vec![Q::zero(); d];
        e[j] = Q::one();
        rows.push(e);
    }
    let dim = if rows.is_empty() { 0 } else { rank(&rows) };
    let generators: Vec<Vec<u32>> = on_face.iter().map(|&i| pts[i].clone()).collect();
    let edge_line = if d == 2 && dim == 1 && dirs.is_empty() {
        let (p, r) = (&g[on_face[0]], &g[*on_face.last().unwrap()]);
        let (u1, u2) = (&r[0] - &p[0], &r[1] - &p[1]);
        // Normal (|u2|, |u1|) scaled so the ξ₂ coefficient is 1.
        let a1 = u2.abs() / u1.abs();
        let a2 = &a1 * &p[0] + &p[1];
        Some((a1, a2))
    } else {
        None
    };
    PrincipalFace { distance: ds, dim, generators, unbounded_directions: dirs, edge_line }
}

// ---------------------------------------------------------------------------
// Adaptedness in two variables

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adaptedness {
    Adapted,
    NotAdapted,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedReport {
    pub verdict: Adaptedness,
    /// Which condition decided: `'a'` vertex, `'b'` unbounded face, `'c'` compact edge.
    pub condition: Option<char>,
    pub face: Option<PrincipalFace>,
    /// Root of `f(x,1)` whose multiplicity exceeds the bound, as an isolating interval.
    pub witness: Option<(usize, (Q, Q))>,
}

/// Principal part restricted to `ξ₂ = 1`: `Σ_{γ ∈ face} s_γ x^{γ₁}`.
fn principal_part_x(poly: &Poly, face: &PrincipalFace) -> UPoly {
    let deg = face.generators.iter().map(|g| g[0]).max().unwrap_or(0) as usize;
    let mut c = vec![Q::zero(); deg + 1];
    for g in &face.generators {
        c[g[0] as usize] += poly.coeff(g);
    }
    UPoly::new(c)
}

pub fn is_adapted_2d(poly: &Poly) -> Result<AdaptedReport> {
    if poly.dim() != 2 {
        return Err(Error::invalid(format!("adaptedness test needs 2 variables, got {}", poly.dim())));
    }
    let na = AdaptedReport { verdict: Adaptedness::NotApplicable, condition: None, face: None, witness: None };
    if poly.is_zero() || !poly.is_critical_germ() {
        return Ok(na);
    }
    let face = principal_face(&SupportSet::of(poly)?);
    if face.dim == 0 {
        return Ok(AdaptedReport { verdict: Adaptedness::Adapted, condition: Some('a'), face: Some(face), witness: None });
    }
    if !face.is_compact() {
        return Ok(AdaptedReport { verdict: Adaptedness::Adapted, condition: Some('b'), face: Some(face), witness: None });
    }
    let (a1, a2) = face.edge_line.clone().expect("compact edge");
    let bound = &a2 / (Q::one() + &a1);
    let f = principal_part_x(poly, &face);
    let roots = f.real_roots_with_multiplicity(&Q::new(1.into(), (1u64 << 30).into()));
    let witness = roots.into_iter().filter(|(m, _)| q(*m as i64) > bound).max_by_key(|(m, _)| *m);
    let verdict = if witness.is_some() { Adaptedness::NotAdapted } else { Adaptedness::Adapted };
    Ok(AdaptedReport { verdict, condition: Some('c'), face: Some(face), witness })
}

// ---------------------------------------------------------------------------
// Decay indices

/// A decay index `(β, p)`: bounds of the form `C(1+|t|)^β log^p(|t|+2)`.
/// Ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DecayIndex {
    pub beta: Rational64,
    pub p: u32,
}

impl DecayIndex {
    pub fn new(beta: Rational64, p: u32) -> Self {
        DecayIndex { beta, p }
    }

    pub fn frac(n: i64, d: i64, p: u32) -> Self {
        DecayIndex { beta: Rational64::new(n, d), p }
    }
}

impl fmt::Display for DecayIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.beta, self.p)
    }
}

impl std::str::FromStr for DecayIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (b, p) = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split_once(',')
            .ok_or_else(|| Error::invalid(format!("decay index must look like \"beta,p\": {s:?}")))?;
        let beta = to_r64(&parse_rational(b)?)?;
        let p = p.trim().parse().map_err(|_| Error::invalid(format!("bad log power in {s:?}")))?;
        Ok(DecayIndex { beta, p })
    }
}

fn to_r64(x: &Q) -> Result<Rational64> {
    use num_traits::ToPrimitive;
    let n = x.numer().to_i64();
    let d = x.denom().to_i64();
    match (n, d) {
        (Some(n), Some(d)) => Ok(Rational64::new(n, d)),
        _ => Err(Error::invalid("rational out of 64-bit range")),
    }
}

pub fn index_lex_max(a: DecayIndex, b: DecayIndex) -> DecayIndex {
    a.max(b)
}

/// Splitting off `m` nondegenerate quadratic variables: `(β − m/2, p)`.
pub fn quad_split_shift(i: DecayIndex, m: u32) -> DecayIndex {
    DecayIndex { beta: i.beta - Rational64::new(m as i64, 2), p: i.p }
}

/// Weights `0 < α_d ≤ … ≤ α₁ < 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector(Vec<Rational64>);

impl WeightVector {
    pub fn new(alpha: Vec<Rational64>) -> Result<Self> {
        let zero = Rational64::zero();
        let one = Rational64::one();
        if alpha.is_empty() {
            return Err(Error::invalid("empty weight vector"));
        }
        if alpha.iter().any(|a| *a <= zero || *a >= one) {
            return Err(Error::invalid("weights must lie in (0, 1)"));
        }
        if alpha.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("weights must be non-increasing"));
        }
        Ok(WeightVector(alpha))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let v: Result<Vec<Rational64>> = s.split(',').map(|x| parse_rational(x).and_then(|q| to_r64(&q))).collect();
        Self::new(v?)
    }

    pub fn norm1(&self) -> Rational64 {
        self.0.iter().sum()
    }

    pub fn weights(&self) -> &[Rational64] {
        &self.0
    }
}

/// Karpushkin's combination rule.
///
/// With `cond_b = None` (empty zero set on the weighted sphere) the result is
/// `max{(β₁,p₁), (−‖α‖₁,0)}`. Otherwise it is `max{(β₁,p₁),(β₂,p₂),(−‖α‖₁,0)}`
/// unless `‖α‖₁ + β₂ = 0`, in which case it is `max{(β₁,p₁),(β₂,p₂+1)}`.
pub fn karpushkin_combine(alpha: &WeightVector, a: DecayIndex, b: Option<DecayIndex>) -> DecayIndex {
    let n = alpha.norm1();
    let homog = DecayIndex { beta: -n, p: 0 };
    match b {
        None => a.max(homog),
        Some(b) if n + b.beta != Rational64::zero() => a.max(b).max(homog),
        Some(b) => a.max(DecayIndex { beta: b.beta, p: b.p + 1 }),
    }
}

// ---------------------------------------------------------------------------
// Binary quartics

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuarticForm {
    /// `x₁⁴`
    FourthPower,
    /// `x₁³x₂`
    CubeTimesLinear,
    /// `x₁²x₂²`
    TwoDoubleLines,
    /// `x₁²(x₁²+x₂²)`
    DoubleLineTimesDefinite,
    /// `x₁²x₂(x₁+x₂)`
    DoubleLineTimesTwoLines,
    /// `(x₁²+x₂²)(x₁²+a₁x₁x₂+a₂x₂²)`
    DefiniteTimesQuadratic,
    /// `x₁x₂(x₁²+a₁x₁x₂+a₂x₂²)` with four distinct real lines
    FourLines,
}

impl QuarticForm {
    pub fn label(&self) -> &'static str {
        match self {
            QuarticForm::FourthPower => "x1^4",
            QuarticForm::CubeTimesLinear => "x1^3*x2",
            QuarticForm::TwoDoubleLines => "x1^2*x2^2",
            QuarticForm::DoubleLineTimesDefinite => "x1^2*(x1^2+x2^2)",
            QuarticForm::DoubleLineTimesTwoLines => "x1^2*x2*(x1+x2)",
            QuarticForm::DefiniteTimesQuadratic => "(x1^2+x2^2)*(x1^2+a1*x1*x2+a2*x2^2)",
            QuarticForm::FourLines => "x1*x2*(x1^2+a1*x1*x2+a2*x2^2)",
        }
    }

    pub fn index(&self) -> DecayIndex {
        match self {
            QuarticForm::FourthPower => DecayIndex::frac(-1, 4, 0),
            QuarticForm::CubeTimesLinear => DecayIndex::frac(-1, 3, 0),
            QuarticForm::TwoDoubleLines | QuarticForm::DoubleLineTimesDefinite | QuarticForm::DoubleLineTimesTwoLines => {
                DecayIndex::frac(-1, 2, 1)
            }
            QuarticForm::DefiniteTimesQuadratic | QuarticForm::FourLines => DecayIndex::frac(-1, 2, 0),
        }
    }
}

/// Classify `f = Σ aₖ x₁^{4−k} x₂^k` by the multiplicities of its real
/// projective roots.
pub fn classify_binary_quartic(a: &[Q; 5]) -> Result<(QuarticForm, DecayIndex)> {
    if a.iter().all(|x| x.is_zero()) {
        return Err(Error::invalid("zero quartic form"));
    }
    // f(x, 1) = Σ aₖ x^{4−k}: ascending coefficients a₄, a₃, …, a₀.
    let p = UPoly::new(a.iter().rev().cloned().collect());
    let deg = p.degree().unwrap_or(0);
    let mut real: Vec<usize> = Vec::new();
    let mut complex_pairs: Vec<usize> = Vec::new();
    for (k, f) in p.squarefree() {
        let r = f.count_real_roots();
        let fd = f.degree().unwrap_or(0);
        real.extend(std::iter::repeat(k).take(r));
        complex_pairs.extend(std::iter::repeat(k).take((fd - r) / 2));
    }
    // Root at infinity (x₂ = 0) of multiplicity 4 − deg.
    if deg < 4 {
        real.push(4 - deg);
    }
    real.sort_unstable_by(|x, y| y.cmp(x));
    let form = match (real.as_slice(), complex_pairs.len()) {
        ([4], 0) => QuarticForm::FourthPower,
        ([3, 1], 0) => QuarticForm::CubeTimesLinear,
        ([2, 2], 0) => QuarticForm::TwoDoubleLines,
        ([2], 1) => QuarticForm::DoubleLineTimesDefinite,
        ([2, 1, 1], 0) => QuarticForm::DoubleLineTimesTwoLines,
        ([1, 1, 1, 1], 0) => QuarticForm::FourLines,
        (_, n) if n >= 1 => QuarticForm::DefiniteTimesQuadratic,
        other => return Err(Error::NonConvergent(format!("unexpected root pattern {other:?}"))),
    };
    Ok((form, form.index()))
}

// ---------------------------------------------------------------------------
// Proportionality of quadratics

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Proportionality {
    NoMultiplicityFourRoot,
    /// `f = c₀ g` and `f² + c g² = s (r − r₀)⁴`.
    Proportional { c0: Q, r0: Q },
}

/// Decide whether `f² + c g²` is `s(r − r₀)⁴`; quadratics are given as
/// `[m₁, m₂, m₃]` meaning `m₁r² + m₂r + m₃`.
pub fn quartic_proportionality(f: &[Q; 3], g: &[Q; 3], c: &Q) -> Result<Proportionality> {
    if f.iter().all(|x| x.is_zero()) || g.iter().all(|x| x.is_zero()) {
        return Err(Error::invalid("both quadratics must be nonzero"));
    }
    if c.is_zero() {
        return Err(Error::invalid("c must be nonzero"));
    }
    let fp = UPoly::new(f.iter().rev().cloned().collect());
    let gp = UPoly::new(g.iter().rev().cloned().collect());
    let h = fp.mul(&fp).add(&gp.mul(&gp).scale(c));
    if h.is_zero() {
        return Err(Error::invalid("f² + c·g² vanishes identically"));
    }
    if h.degree() != Some(4) {
        return Ok(Proportionality::NoMultiplicityFourRoot);
    }
    let lead = h.lead();
    let r0 = -(&h.coeffs()[3]) / (q(4) * &lead);
    let lin = UPoly::new(vec![-r0.clone(), Q::one()]);
    let target = lin.mul(&lin).mul(&lin).mul(&lin).scale(&lead);
    if h != target {
        return Ok(Proportionality::NoMultiplicityFourRoot);
    }
    let (i, gi) = g.iter().enumerate().find(|(_, x)| !x.is_zero()).expect("g nonzero");
    let c0 = &f[i] / gi;
    if f.iter().zip(g).any(|(a, b)| *a != &c0 * b) {
        return Err(Error::NonConvergent("multiplicity-four root without proportional quadratics".into()));
    }
    Ok(Proportionality::Proportional { c0, r0 })
}

impl PartialOrd for Facet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Facet {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.normal, &self.offset).cmp(&(&other.normal, &other.offset))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q2;

    fn supp(d: usize, pts: &[&[u32]]) -> SupportSet {
        SupportSet::new(d, pts.iter().map(|p| p.to_vec())).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(newton_distance(&supp(2, &[&[2, 2]])), q(2));
        assert_eq!(newton_distance(&supp(2, &[&[3, 0], &[0, 3]])), q2(3, 2));
        assert_eq!(newton_distance(&supp(2, &[&[2, 0], &[0, 2], &[1, 1]])), q(1));
        assert_eq!(newton_distance(&supp(2, &[&[3, 1]])), q(3));
    }

    #[test]
    fn principal_face_examples() {
        let f = principal_face(&supp(2, &[&[2, 2]]));
        assert_eq!(f.dim, 0);
        let f = principal_face(&supp(2, &[&[3, 0], &[0, 3]]));
        assert_eq!((f.dim, f.distance.clone()), (1, q2(3, 2)));
        assert_eq!(f.edge_line, Some((q(1), q(3))));
        let f = principal_face(&supp(2, &[&[2, 0], &[0, 2], &[1, 1]]));
        assert_eq!(f.dim, 1);
        assert_eq!(f.generators.len(), 3);
        assert_eq!(f.edge_line, Some((q(1), q(2))));
        // The diagonal meets the vertex (1,1) where an edge and a ray join.
        let f = principal_face(&supp(2, &[&[3, 0], &[1, 1]]));
        assert_eq!((f.dim, f.distance.clone()), (0, q(1)));
        // ξ₁²ξ₂: the diagonal meets the vertical ray above (2,1).
        let f = principal_face(&supp(2, &[&[2, 1]]));
        assert_eq!((f.dim, f.distance.clone()), (1, q(2)));
        assert_eq!(f.unbounded_directions, vec![1]);
        assert!(!f.is_compact());
    }

    #[test]
    fn facets_of_simple_polyhedra() {
        let p = NewtonPolyhedron::new(&supp(2, &[&[3, 0], &[0, 3], &[2, 2]]));
        assert_eq!(p.vertices, vec![vec![0, 3], vec![3, 0]]);
        // x ≥ 0, y ≥ 0, x + y ≥ 3
        assert_eq!(p.facets.len(), 3);
        assert!(p.contains(&[q(2), q(2)]));
        assert!(!p.contains(&[q(1), q(1)]));
    }

    #[test]
    fn adapted_examples() {
        let r = is_adapted_2d(&Poly::parse("z1^2*z2^2", None).unwrap()).unwrap();
        assert_eq!(r.verdict, Adaptedness::Adapted);
        let r = is_adapted_2d(&Poly::parse("z1^3*z2", None).unwrap()).unwrap();
        assert_eq!((r.verdict, r.condition), (Adaptedness::Adapted, Some('b')));
        let r = is_adapted_2d(&Poly::parse("(z1+z2)^2", None).unwrap()).unwrap();
        assert_eq!((r.verdict, r.condition), (Adaptedness::NotAdapted, Some('c')));
        let (m, (lo, hi)) = r.witness.unwrap();
        assert_eq!(m, 2);
        assert!(lo < q(-1) && hi >= q(-1));
        let r = is_adapted_2d(&Poly::parse("z1 + z2^2", None).unwrap()).unwrap();
        assert_eq!(r.verdict, Adaptedness::NotApplicable);
        assert!(is_adapted_2d(&Poly::parse("z1*z2*z3", None).unwrap()).is_err());
    }

    #[test]
    fn quartic_examples() {
        let c = |v: [i64; 5]| v.map(q);
        assert_eq!(classify_binary_quartic(&c([1, 0, 0, 0, 0])).unwrap().0, QuarticForm::FourthPower);
        assert_eq!(classify_binary_quartic(&c([1, 0, 0, 0, 0])).unwrap().1, DecayIndex::frac(-1, 4, 0));
        assert_eq!(classify_binary_quartic(&c([0, 0, 1, 0, 0])).unwrap().1, DecayIndex::frac(-1, 2, 1));
        // (x1²+x2²)² = x1⁴ + 2x1²x2² + x2⁴
        let (f, i) = classify_binary_quartic(&c([1, 0, 2, 0, 1])).unwrap();
        assert_eq!((f, i), (QuarticForm::DefiniteTimesQuadratic, DecayIndex::frac(-1, 2, 0)));
        assert_eq!(classify_binary_quartic(&c([0, 1, 0, 0, 0])).unwrap().0, QuarticForm::CubeTimesLinear);
        // x1²(x1²+x2²)
        assert_eq!(classify_binary_quartic(&c([1, 0, 1, 0, 0])).unwrap().0, QuarticForm::DoubleLineTimesDefinite);
        // x1²x2(x1+x2) = x1³x2 + x1²x2²
        assert_eq!(classify_binary_quartic(&c([0, 1, 1, 0, 0])).unwrap().0, QuarticForm::DoubleLineTimesTwoLines);
        // x1x2(x1²−x2²)
        assert_eq!(classify_binary_quartic(&c([0, 1, 0, -1, 0])).unwrap().0, QuarticForm::FourLines);
        // (x1 - 2x2)^4 = x1^4 - 8x1^3x2 + 24x1^2x2^2 - 32x1x2^3 + 16x2^4
        assert_eq!(classify_binary_quartic(&c([1, -8, 24, -32, 16])).unwrap().0, QuarticForm::FourthPower);
        assert!(classify_binary_quartic(&c([0; 5])).is_err());
    }

    #[test]
    fn proportionality_examples() {
        let r = quartic_proportionality(&[q(1), q(0), q(0)], &[q(1), q(0), q(0)], &q(1)).unwrap();
        assert_eq!(r, Proportionality::Proportional { c0: q(1), r0: q(0) });
        let r = quartic_proportionality(&[q(1), q(0), q(1)], &[q(1), q(0), q(-1)], &q(1)).unwrap();
        assert_eq!(r, Proportionality::NoMultiplicityFourRoot);
        let sq = [q(1), q(-2), q(1)];
        let r = quartic_proportionality(&sq, &sq, &q2(-1, 2)).unwrap();
        assert_eq!(r, Proportionality::Proportional { c0: q(1), r0: q(1) });
        assert!(quartic_proportionality(&sq, &sq, &q(-1)).is_err());
    }

    #[test]
    fn index_calculus_examples() {
        let i = |n, d, p| DecayIndex::frac(n, d, p);
        assert_eq!(index_lex_max(i(-5, 6, 0), i(-1, 1, 1)), i(-5, 6, 0));
        assert_eq!(index_lex_max(i(-2, 1, 1), i(-2, 1, 0)), i(-2, 1, 1));
        assert_eq!(index_lex_max(i(-11, 6, 0), i(-13, 6, 0)), i(-11, 6, 0));
        assert_eq!(quad_split_shift(i(-1, 1, 1), 2), i(-2, 1, 1));
        assert_eq!(quad_split_shift(i(-4, 3, 0), 1), i(-11, 6, 0));
        assert_eq!(quad_split_shift(i(-4, 3, 0), 0), i(-4, 3, 0));
        let a3 = WeightVector::parse("1/3,1/3,1/3").unwrap();
        let a4 = WeightVector::parse("1/3,1/3,1/3,1/3").unwrap();
        assert_eq!(karpushkin_combine(&a3, i(-5, 6, 0), Some(i(-1, 1, 0))), i(-5, 6, 0));
        assert_eq!(karpushkin_combine(&a4, i(-4, 3, 0), None), i(-4, 3, 0));
        assert_eq!(karpushkin_combine(&a3, i(-1, 1, 0), Some(i(-1, 1, 0))), i(-1, 1, 1));
        assert!(WeightVector::parse("1/3,1/2").is_err());
        assert!(WeightVector::parse("1,1/2").is_err());
    }

    #[test]
    fn index_parse_display() {
        let x: DecayIndex = "-5/6,0".parse().unwrap();
        assert_eq!(x, DecayIndex::frac(-5, 6, 0));
        assert_eq!(x.to_string(), "-5/6,0");
        assert_eq!("(-2,1)".parse::<DecayIndex>().unwrap().to_string(), "-2,1");
        assert!("-5/6".parse::<DecayIndex>().is_err());
    }
}
