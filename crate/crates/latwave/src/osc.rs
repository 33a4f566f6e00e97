//! Oscillatory integrals `J(t,S,ψ) = ∫ e^{itS(ξ)} ψ(ξ) dξ` for polynomial
//! phases, phase families, random perturbations, and a dimension-reduced
//! evaluator for the four-variable cubic phase `P̃₄`.
//!
//! The amplitude is smooth and compactly supported (or Gaussian), so the
//! tensor trapezoidal rule converges faster than any power of the step once
//! the step resolves both `t·|∇S|` and the amplitude's own bandwidth. The
//! step is chosen so that even the doubled step resolves them; the sum on
//! the doubled grid is accumulated in the same pass and its distance to the
//! fine sum is the error estimate.
//!
//! ```
//! use latwave::osc::{eval_j, AmplitudeSpec, JOptions};
//! use latwave::poly::Poly;
//!
//! // A zero phase integrates the amplitude: the plateau bump on [-1,1] has mass 3/2.
//! let amp = AmplitudeSpec::product_bump(1, 1.0).unwrap();
//! let j = eval_j(50.0, &Poly::zero(1), &amp, &JOptions::default()).unwrap();
//! assert!((j.value.re - 1.5).abs() < 1e-9);
//! ```

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decay::{fit_decay, DecayFit, DecaySeries};
use crate::newton::DecayIndex;
use crate::poly::{q, q_from_f64, Compiled, Parity, Poly, Q};
use crate::quad::adaptive;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Amplitudes

/// Smooth cutoff: 1 on `[0, 1/2]`, 0 on `[1, ∞)`, built from `e^{−1/x}`.
pub fn plateau_cutoff(s: f64) -> f64 {
    let s = s.abs();
    if s <= 0.5 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = f(1.0 - s);
    let b = f(s - 0.5);
    a / (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeKind {
    /// `χ(|ξ|/r)`, radius `r[0]`.
    RadialBump,
    /// `Π χ(|ξᵢ|/rᵢ)`.
    ProductBump,
    /// `Π exp(−ξᵢ²/(2σᵢ²))`, not compactly supported.
    Gaussian,
}

/// Gaussian tails are cut where `exp(−x²/2) < 1e−16`.
const GAUSS_CUT: f64 = 8.6;
/// Bandwidth (times the radius) beyond which the bump's transform is below ~1e−11.
const BUMP_BANDWIDTH: f64 = 300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSpec {
    pub kind: AmplitudeKind,
    /// Radius per variable (σ per variable for the Gaussian).
    pub radius: Vec<f64>,
}

impl AmplitudeSpec {
    pub fn new(kind: AmplitudeKind, radius: Vec<f64>) -> Result<Self> {
        if radius.is_empty() || radius.len() > 5 {
            return Err(Error::invalid("amplitude needs 1 to 5 variables"));
        }
        if radius.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("amplitude radii must be positive"));
        }
        if kind == AmplitudeKind::RadialBump && radius.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::invalid("radial bump needs one common radius"));
        }
        Ok(AmplitudeSpec { kind, radius })
    }

    pub fn product_bump(d: usize, r: f64) -> Result<Self> {
        Self::new(AmplitudeKind::ProductBump, vec![r; d])
    }

    pub fn radial_bump(d: usize, r: f64) -> Result<Self> {
        Self::new(AmplitudeKind::RadialBump, vec![r; d])
    }

    pub fn gaussian(d: usize, sigma: f64) -> Result<Self> {
        Self::new(AmplitudeKind::Gaussian, vec![sigma; d])
    }

    pub fn dim(&self) -> usize {
        self.radius.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.kind {
            AmplitudeKind::RadialBump => plateau_cutoff(x.iter().map(|v| v * v).sum::<f64>().sqrt() / self.radius[0]),
            AmplitudeKind::ProductBump => x.iter().zip(&self.radius).map(|(v, r)| plateau_cutoff(v / r)).product(),
            AmplitudeKind::Gaussian => x.iter().zip(&self.radius).map(|(v, s)| (-v * v / (2.0 * s * s)).exp()).product(),
        }
    }

    /// Half-width of the box outside which the amplitude is (numerically) zero.
    pub fn extent(&self, i: usize) -> f64 {
        match self.kind {
            AmplitudeKind::Gaussian => GAUSS_CUT * self.radius[i],
            _ => self.radius[i],
        }
    }

    fn bandwidth(&self, i: usize) -> f64 {
        match self.kind {
            AmplitudeKind::Gaussian => GAUSS_CUT / self.radius[i],
            _ => BUMP_BANDWIDTH / self.radius[i],
        }
    }

    fn is_symmetric(&self) -> bool {
        self.radius.windows(2).all(|w| w[0] == w[1])
    }

    /// Restrict a product amplitude to a subset of its variables.
    pub fn select(&self, vars: &[usize]) -> Result<Self> {
        if self.kind == AmplitudeKind::RadialBump {
            return Err(Error::invalid("a radial bump does not factor over variables"));
        }
        Self::new(self.kind, vars.iter().map(|&i| self.radius[i]).collect())
    }

    /// `∫ψ` for one variable of a product amplitude.
    fn mass_1d(&self, i: usize) -> f64 {
        match self.kind {
            AmplitudeKind::Gaussian => (2.0 * PI).sqrt() * self.radius[i],
            // ∫χ(|x|/r) dx = 3r/2 by the symmetry χ(s) + χ(3/2 − s) = 1.
            _ => 1.5 * self.radius[i],
        }
    }
}

// ---------------------------------------------------------------------------
// Tensor trapezoid

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step halvings allowed after the first pass.
    pub max_refine: u32,
    /// Cost guard on visited grid points.
    pub max_points: f64,
    /// Safety factor on the sampled gradient bound.
    pub grad_safety: f64,
}

impl Default for JOptions {
    fn default() -> Self {
        JOptions { rel_tol: 1e-7, abs_tol: 1e-14, max_refine: 2, max_points: 5e8, grad_safety: 1.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JValue {
    pub value: Complex64,
    pub err_est: f64,
    pub points: f64,
    pub steps: Vec<f64>,
}

/// Largest `|∂ᵢS|` sampled on a grid over the region where `ψ` is not negligible.
pub fn gradient_bound(s: &Compiled, amp: &AmplitudeSpec) -> Vec<f64> {
    let d = s.d;
    let m: usize = match d {
        1 => 401,
        2 => 61,
        3 => 21,
        _ => 11,
    };
    let mut best = vec![0.0f64; d];
    let total = m.pow(d as u32);
    let mut x = vec![0.0; d];
    for idx in 0..total {
        let mut r = idx;
        for (i, xi) in x.iter_mut().enumerate() {
            let k = r % m;
            r /= m;
            *xi = amp.extent(i) * (2.0 * k as f64 / (m - 1) as f64 - 1.0);
        }
        if amp.kind != AmplitudeKind::ProductBump {
            let s2: f64 = x.iter().zip(&amp.radius).map(|(v, r)| (v / r).powi(2)).sum();
            let lim = if amp.kind == AmplitudeKind::Gaussian { GAUSS_CUT * GAUSS_CUT } else { 1.0 };
            if s2 > lim {
                continue;
            }
        }
        for (b, g) in best.iter_mut().zip(s.grad(&x)) {
            *b = b.max(g.abs());
        }
    }
    best
}

struct Axis {
    /// Powers of each node up to the phase degree.
    pw: Vec<Vec<f64>>,
    amp: Vec<f64>,
    sq: Vec<f64>,
    w_h: Vec<f64>,
    w_2h: Vec<f64>,
}

fn build_axis(h: f64, extent: f64, fold: bool, maxdeg: usize, amp: impl Fn(f64) -> f64) -> Axis {
    let n = (extent / h).ceil() as i64;
    let js: Vec<i64> = if fold { (0..=n).collect() } else { (-n..=n).collect() };
    let mut ax = Axis { pw: Vec::new(), amp: Vec::new(), sq: Vec::new(), w_h: Vec::new(), w_2h: Vec::new() };
    for j in js {
        let x = j as f64 * h;
        let mut p = Vec::with_capacity(maxdeg + 1);
        let mut v = 1.0;
        for _ in 0..=maxdeg {
            p.push(v);
            v *= x;
        }
        let mult = if fold && j != 0 { 2.0 } else { 1.0 };
        ax.pw.push(p);
        ax.amp.push(amp(x));
        ax.sq.push(x * x);
        ax.w_h.push(mult * h);
        ax.w_2h.push(if j % 2 == 0 { 2.0 * mult * h } else { 0.0 });
    }
    ax
}

#[derive(Default, Clone, Copy)]
struct Acc {
    h: Complex64,
    h2: Complex64,
    abs: f64,
}

impl std::ops::AddAssign for Acc {
    fn add_assign(&mut self, o: Acc) {
        self.h += o.h;
        self.h2 += o.h2;
        self.abs += o.abs;
    }
}

struct Walk<'a> {
    axes: &'a [Axis],
    s: &'a Compiled,
    t: f64,
    cos_only: bool,
    symmetric: bool,
    /// Radial bump radius; product amplitudes use the axis tables.
    radial: Option<f64>,
}

impl Walk<'_> {
    #[allow(clippy::too_many_arguments)]
    fn rec<'b>(&'b self, k: usize, prev: usize, run: usize, mult: f64, wh: f64, w2: f64, amp: f64, r2: f64, pw: &mut Vec<&'b [f64]>, acc: &mut Acc) {
        let ax = &self.axes[k];
        let start = if self.symmetric { prev } else { 0 };
        let pos = (k + 1) as f64;
        for j in start..ax.amp.len() {
            let a = amp * ax.amp[j];
            if a == 0.0 {
                continue;
            }
            let run_k = if self.symmetric && j == prev && k > 0 { run + 1 } else { 1 };
            let mult_k = if self.symmetric { mult * pos / run_k as f64 } else { 1.0 };
            let rr = r2 + ax.sq[j];
            pw.push(&ax.pw[j]);
            if k + 1 == self.axes.len() {
                let a = match self.radial {
                    Some(r) => a * plateau_cutoff(rr.sqrt() / r),
                    None => a,
                };
                if a != 0.0 {
                    let phase = self.t * self.s.eval_slices(pw);
                    let v = if self.cos_only { Complex64::new(phase.cos(), 0.0) } else { Complex64::new(phase.cos(), phase.sin()) };
                    let f = mult_k * a;
                    acc.h += v * (f * wh * ax.w_h[j]);
                    acc.abs += f * wh * ax.w_h[j];
                    let w2j = w2 * ax.w_2h[j];
                    if w2j != 0.0 {
                        acc.h2 += v * (f * w2j);
                    }
                }
            } else {
                self.rec(k + 1, j, run_k, mult_k, wh * ax.w_h[j], w2 * ax.w_2h[j], a, rr, pw, acc);
            }
            pw.pop();
        }
    }
}

/// `J(t,S,ψ)` by the tensor trapezoidal rule.
///
/// Variables in which `S` is even are folded onto `[0,∞)`. If `S` is odd
/// under `ξ ↦ −ξ`, `J = ∫cos(tS)ψ` is real and odd variables fold as well.
/// A permutation-symmetric phase with a symmetric amplitude is summed over
/// sorted index tuples only.
pub fn eval_j(t: f64, phase: &Poly, amp: &AmplitudeSpec, opts: &JOptions) -> Result<JValue> {
    let d = phase.dim();
    if amp.dim() != d {
        return Err(Error::invalid(format!("amplitude has {} variables, phase has {d}", amp.dim())));
    }
    if !t.is_finite() {
        return Err(Error::invalid("t must be finite"));
    }
    let s = phase.without_constant().compile();
    let c0 = phase.coeff(&vec![0; d]);
    let const_phase = Complex64::from_polar(1.0, t * crate::poly::q_to_f64(&c0));
    let grad = gradient_bound(&s, amp);
    let odd = phase.is_globally_odd();
    let fold: Vec<bool> = (0..d)
        .map(|i| match phase.parity(i) {
            Parity::Even => true,
            Parity::Odd => odd,
            Parity::Mixed => false,
        })
        .collect();
    let symmetric = d > 1 && phase.is_symmetric() && amp.is_symmetric() && fold.iter().all(|&f| f == fold[0]);
    let mut steps: Vec<f64> = (0..d).map(|i| PI / (t.abs() * grad[i] * opts.grad_safety + amp.bandwidth(i))).collect();
    let maxdeg = s.max_partial_degree();
    let mut last: Option<JValue> = None;
    for _ in 0..=opts.max_refine {
        let axes: Vec<Axis> = (0..d)
            .map(|i| {
                let r = amp.radius[i];
                let kind = amp.kind;
                build_axis(steps[i], amp.extent(i), fold[i], maxdeg, move |x| match kind {
                    AmplitudeKind::ProductBump => plateau_cutoff(x / r),
                    AmplitudeKind::Gaussian => (-x * x / (2.0 * r * r)).exp(),
                    AmplitudeKind::RadialBump => {
                        if x.abs() <= r {
                            1.0
                        } else {
                            0.0
                        }
                    }
                })
            })
            .collect();
        let mut points: f64 = axes.iter().map(|a| a.amp.len() as f64).product();
        if symmetric {
            points /= (1..=d).product::<usize>() as f64;
        }
        if points > opts.max_points {
            if let Some(v) = last {
                return Err(Error::NonConvergent(format!(
                    "error estimate {:.3e} above tolerance and refinement would need {points:.3e} points",
                    v.err_est
                )));
            }
            return Err(Error::CostGuard(format!("{points:.3e} quadrature points exceed the budget {:.1e}", opts.max_points)));
        }
        let walk = Walk {
            axes: &axes,
            s: &s,
            t,
            cos_only: odd,
            symmetric,
            radial: (amp.kind == AmplitudeKind::RadialBump).then_some(amp.radius[0]),
        };
        let partials: Vec<Acc> = (0..axes[0].amp.len())
            .into_par_iter()
            .map(|j0| {
                let ax = &axes[0];
                let mut acc = Acc::default();
                let a = ax.amp[j0];
                if a == 0.0 {
                    return acc;
                }
                let mut pw: Vec<&[f64]> = Vec::with_capacity(d);
                pw.push(&ax.pw[j0]);
                if d == 1 {
                    let a = match walk.radial {
                        Some(r) => a * plateau_cutoff(ax.sq[j0].sqrt() / r),
                        None => a,
                    };
                    let phase = t * s.eval_slices(&pw);
                    let v = if odd { Complex64::new(phase.cos(), 0.0) } else { Complex64::new(phase.cos(), phase.sin()) };
                    acc.h += v * (a * ax.w_h[j0]);
                    acc.h2 += v * (a * ax.w_2h[j0]);
                    acc.abs += a * ax.w_h[j0];
                } else {
                    walk.rec(1, j0, 1, 1.0, ax.w_h[j0], ax.w_2h[j0], a, ax.sq[j0], &mut pw, &mut acc);
                }
                acc
            })
            .collect();
        let mut tot = Acc::default();
        for p in partials {
            tot += p;
        }
        let floor = 16.0 * f64::EPSILON * tot.abs * points.sqrt().max(1.0);
        let err_est = (tot.h - tot.h2).norm() + floor;
        let v = JValue { value: tot.h * const_phase, err_est, points, steps: steps.clone() };
        if err_est <= opts.abs_tol.max(opts.rel_tol * v.value.norm()) {
            return Ok(v);
        }
        last = Some(v);
        steps.iter_mut().for_each(|h| *h /= 2.0);
    }
    let v = last.expect("at least one pass");
    Err(Error::NonConvergent(format!("error estimate {:.3e} above tolerance after refinement", v.err_est)))
}

/// Variables that occur in some monomial of `p`.
fn used_vars(p: &Poly) -> Vec<usize> {
    (0..p.dim()).filter(|&i| p.terms().keys().any(|e| e[i] > 0)).collect()
}

/// `J` for a sum of phases in disjoint variable sets, as the product of the
/// factors' integrals (times `∫ψ` over variables no part uses).
pub fn quad_factor_eval(t: f64, parts: &[Poly], amp: &AmplitudeSpec, opts: &JOptions) -> Result<JValue> {
    let d = amp.dim();
    if parts.iter().any(|p| p.dim() != d) {
        return Err(Error::invalid("every part must live in the amplitude's variables"));
    }
    let mut seen = vec![false; d];
    let mut value = Complex64::new(1.0, 0.0);
    let mut rel_err = 0.0;
    let mut points = 0.0;
    let mut steps = vec![f64::NAN; d];
    for p in parts {
        let vars = used_vars(p);
        if vars.iter().any(|&i| seen[i]) {
            return Err(Error::invalid("phase parts share variables"));
        }
        if vars.is_empty() {
            value *= Complex64::from_polar(1.0, t * crate::poly::q_to_f64(&p.coeff(&vec![0; d])));
            continue;
        }
        for &i in &vars {
            seen[i] = true;
        }
        let mut map = vec![0usize; d];
        for (k, &i) in vars.iter().enumerate() {
            map[i] = k;
        }
        // Project onto the used variables.
        let sub = Poly::from_terms(
            vars.len(),
            p.terms().iter().map(|(e, c)| (vars.iter().map(|&i| e[i]).collect::<Vec<u32>>(), c.clone())),
        );
        let j = eval_j(t, &sub, &amp.select(&vars)?, opts)?;
        rel_err += j.err_est / j.value.norm().max(f64::MIN_POSITIVE);
        value *= j.value;
        points += j.points;
        for (k, &i) in vars.iter().enumerate() {
            steps[i] = j.steps[k];
        }
    }
    for (i, s) in seen.iter().enumerate() {
        if !s {
            value *= amp.mass_1d(i);
        }
    }
    Ok(JValue { value, err_est: rel_err * value.norm(), points, steps })
}

// ---------------------------------------------------------------------------
// Phase families

/// `(Σ_{j≤m} zⱼ)³ − Σ_{j≤m} zⱼ³ + Σ_{j>m} ±zⱼ²` in `d` variables.
pub fn build_phase_pm(m: usize, d: usize, signs: &[i8]) -> Result<Poly> {
    if !(2 <= m && m < d) {
        return Err(Error::invalid(format!("need 2 <= m <= d-1, got m={m}, d={d}")));
    }
    if d > 5 {
        return Err(Error::invalid("at most 5 variables"));
    }
    if signs.len() != d - m || signs.iter().any(|s| s.abs() != 1) {
        return Err(Error::invalid(format!("need {} signs of ±1 for the quadratic part", d - m)));
    }
    let mut lin = Poly::zero(d);
    let mut cubes = Poly::zero(d);
    for j in 0..m {
        lin = lin.add(&Poly::var(d, j));
        cubes = cubes.add(&Poly::var(d, j).pow(3));
    }
    let mut p = lin.pow(3).sub(&cubes);
    for (k, &s) in signs.iter().enumerate() {
        p = p.add(&Poly::var(d, m + k).pow(2).scale(&q(s as i64)));
    }
    Ok(p)
}

/// `P̃₄ = (z₁+z₂+z₃+z₄)³ − Σ zⱼ³`.
pub fn p4_tilde() -> Poly {
    let d = 4;
    let lin = (0..d).fold(Poly::zero(d), |a, j| a.add(&Poly::var(d, j)));
    let cubes = (0..d).fold(Poly::zero(d), |a, j| a.add(&Poly::var(d, j).pow(3)));
    lin.pow(3).sub(&cubes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryPhase {
    pub id: String,
    pub expr: String,
    pub d: usize,
    /// Expected decay index of `J(t,S,ψ)` for small-support ψ with ψ(0) ≠ 0.
    pub index: DecayIndex,
    /// Parts in disjoint variables, when the phase is a direct sum.
    pub parts: Vec<String>,
}

impl LibraryPhase {
    pub fn poly(&self) -> Poly {
        Poly::parse(&self.expr, Some(self.d)).expect("library expressions parse")
    }

    pub fn part_polys(&self) -> Vec<Poly> {
        self.parts.iter().map(|e| Poly::parse(e, Some(self.d)).expect("library expressions parse")).collect()
    }
}

pub fn phase_library() -> Vec<LibraryPhase> {
    let e = |id: &str, expr: &str, d: usize, n: i64, den: i64, p: u32, parts: &[&str]| LibraryPhase {
        id: id.into(),
        expr: expr.into(),
        d,
        index: DecayIndex::frac(n, den, p),
        parts: parts.iter().map(|s| s.to_string()).collect(),
    };
    vec![
        e("fold", "z1^2", 1, -1, 2, 0, &[]),
        e("cusp", "z1^3", 1, -1, 3, 0, &[]),
        e("d4", "z2^3 - z1^2*z2", 2, -2, 3, 0, &[]),
        e("t444", "z1*z2*z3", 3, -1, 1, 1, &[]),
        e("u12", "z1^4 + z2*z3*(z2+z3)", 3, -11, 12, 0, &["z1^4", "z2*z3*(z2+z3)"]),
        e("p2", "(z1+z2)^3 - z1^3 - z2^3 + z3^2", 3, -7, 6, 0, &["(z1+z2)^3 - z1^3 - z2^3", "z3^2"]),
        e("p3", "(z1+z2+z3)^3 - z1^3 - z2^3 - z3^3 + z4^2", 4, -3, 2, 1, &["(z1+z2+z3)^3 - z1^3 - z2^3 - z3^3", "z4^2"]),
        e("p4", "(z1+z2+z3+z4)^3 - z1^3 - z2^3 - z3^3 - z4^3 + z5^2", 5, -11, 6, 0, &["(z1+z2+z3+z4)^3 - z1^3 - z2^3 - z3^3 - z4^3", "z5^2"]),
        e("p4-tilde", "(z1+z2+z3+z4)^3 - z1^3 - z2^3 - z3^3 - z4^3", 4, -4, 3, 0, &[]),
    ]
}

pub fn library_phase(id: &str) -> Result<LibraryPhase> {
    phase_library()
        .into_iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::invalid(format!("unknown phase id {id:?}")))
}

// ---------------------------------------------------------------------------
// Perturbations

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub d: usize,
    /// Radius of the box the sup bound is checked on.
    pub r: f64,
    pub eps: f64,
    pub degree: u32,
    pub seed: u64,
}

/// Exponent vectors of total degree `≤ deg` in `d` variables.
fn monomials(d: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[k] = e;
            rec(k + 1, left - e, cur, out);
        }
        cur[k] = 0;
    }
    rec(0, deg, &mut cur, &mut out);
    out
}

/// `max |P|` on a `m^d` grid over `[−r,r]^d`.
pub fn grid_sup(p: &Compiled, r: f64, m: usize) -> f64 {
    let d = p.d;
    let total = m.pow(d as u32);
    (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut x = [0.0; 8];
            let mut k = idx;
            for xi in x.iter_mut().take(d) {
                *xi = r * (2.0 * (k % m) as f64 / (m - 1) as f64 - 1.0);
                k /= m;
            }
            p.eval(&x[..d]).abs()
        })
        .reduce(|| 0.0, f64::max)
}

fn sup_grid_points(d: usize) -> usize {
    match d {
        1 => 1001,
        2 => 201,
        3 => 101,
        4 => 31,
        _ => 17,
    }
}

/// Coefficients uniform in `[−1,1]` on every monomial of degree `≤ D`,
/// rescaled so the grid-checked sup on `[−r,r]^d` is `0.99·ε`.
pub fn sample_perturbation(spec: &PerturbationSpec) -> Result<Poly> {
    if !(1..=5).contains(&spec.d) {
        return Err(Error::invalid("perturbations need 1 to 5 variables"));
    }
    if !(spec.eps >= 0.0 && spec.eps.is_finite()) || !(spec.r > 0.0) {
        return Err(Error::invalid("need eps >= 0 and r > 0"));
    }
    if spec.eps == 0.0 {
        return Ok(Poly::zero(spec.d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let terms: Vec<(Vec<u32>, f64)> = monomials(spec.d, spec.degree).into_iter().map(|e| (e, rng.random_range(-1.0..=1.0))).collect();
    let raw = Poly::from_terms(spec.d, terms.iter().map(|(e, c)| (e.clone(), q_from_f64(*c))));
    let sup = grid_sup(&raw.compile(), spec.r, sup_grid_points(spec.d));
    if sup == 0.0 {
        return Ok(Poly::zero(spec.d));
    }
    let scale = 0.99 * spec.eps / sup;
    Ok(Poly::from_terms(spec.d, terms.into_iter().map(|(e, c)| (e, q_from_f64(c * scale)))))
}

// ---------------------------------------------------------------------------
// Critical points and the stability probe

/// Critical points of `S` in `[−r,r]^d` by damped Newton from a `k^d` lattice
/// of starts. The Newton step uses a pseudo-inverse so that non-isolated
/// critical sets are reached as well.
pub fn critical_points(s: &Compiled, r: f64, k: usize) -> Vec<Vec<f64>> {
    let d = s.d;
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut found: Vec<Vec<f64>> = Vec::new();
    let total = k.pow(d as u32);
    for idx in 0..total {
        let mut x: Vec<f64> = (0..d)
            .map(|i| {
                let c = (idx / k.pow(i as u32)) % k;
                if k == 1 {
                    0.0
                } else {
                    r * (2.0 * c as f64 / (k - 1) as f64 - 1.0)
                }
            })
            .collect();
        let mut g = s.grad(&x);
        for _ in 0..100 {
            let gn = norm(&g);
            if gn < 1e-14 {
                break;
            }
            let h = s.hessian(&x);
            let hm = DMatrix::from_fn(d, d, |i, j| h[i][j]);
            let rhs = DVector::from_column_slice(&g);
            let Ok(step) = hm.svd(true, true).solve(&rhs, 1e-12 * gn.max(1e-300)) else { break };
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let y: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a - alpha * b).collect();
                let gy = s.grad(&y);
                if norm(&gy) < gn {
                    x = y;
                    g = gy;
                    improved = true;
                    break;
                }
                alpha /= 2.0;
            }
            if !improved {
                break;
            }
        }
        if norm(&g) < 1e-11 && x.iter().all(|v| v.abs() <= r) && !found.iter().any(|f| f.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-6)) {
            found.push(x);
        }
    }
    found.sort_by(|a, b| norm(a).total_cmp(&norm(b)));
    found
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeFit {
    pub seed: u64,
    /// Critical point the fit is centred at; the origin if none was found.
    pub center: Vec<f64>,
    pub fit: DecayFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub unperturbed: DecayFit,
    pub fits: Vec<ProbeFit>,
    /// Lexicographically largest `(β̂, p̂)` over all trials and centers.
    pub worst_beta: f64,
    pub worst_p: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub t: Vec<f64>,
    pub trials: u64,
    pub base_seed: u64,
    /// Critical points fitted per trial, nearest to the origin first.
    pub centers_per_trial: usize,
    pub newton_starts: usize,
}

fn fit_series(tag: &str, phase: &Poly, amp: &AmplitudeSpec, ts: &[f64], opts: &JOptions) -> Result<DecayFit> {
    let mags: Vec<f64> = ts.iter().map(|&t| eval_j(t, phase, amp, opts).map(|j| j.value.norm())).collect::<Result<_>>()?;
    fit_decay(&DecaySeries::new(tag, ts.to_vec(), mags)?)
}

/// Worst fitted decay of `J(t, S+P, ψ)` over random `P` with `sup|P| < ε`,
/// fitted at critical points of `S+P` near the origin after translating
/// them to the origin. A finite set of trials is a probe, not a proof.
pub fn uniform_stability_probe(
    phase: &Poly,
    spec: &PerturbationSpec,
    amp: &AmplitudeSpec,
    probe: &ProbeOptions,
    opts: &JOptions,
) -> Result<ProbeReport> {
    let d = phase.dim();
    if d > 3 {
        return Err(Error::invalid("the stability probe is limited to 3 variables"));
    }
    DecaySeries::new("t", probe.t.clone(), vec![1.0; probe.t.len()]).map_err(|e| Error::invalid(format!("fit window: {e}")))?;
    let unperturbed = fit_series("unperturbed", phase, amp, &probe.t, opts)?;
    let mut fits = Vec::new();
    let core = 0.5 * amp.radius.iter().cloned().fold(f64::INFINITY, f64::min);
    for trial in 0..probe.trials {
        let seed = probe.base_seed.wrapping_add(trial);
        let p = sample_perturbation(&PerturbationSpec { seed, d, ..*spec })?;
        if p.is_zero() {
            fits.push(ProbeFit { seed, center: vec![0.0; d], fit: unperturbed.clone() });
            continue;
        }
        let total = phase.add(&p);
        let mut centers = critical_points(&total.compile(), core, probe.newton_starts);
        if centers.is_empty() {
            // No critical point near the origin: J decays at least as fast there.
            centers.push(vec![0.0; d]);
        }
        for c in centers.iter().take(probe.centers_per_trial.max(1)) {
            let cq: Vec<Q> = c.iter().map(|v| q_from_f64(*v)).collect();
            let shifted = total.translate(&cq).without_constant();
            let fit = fit_series(&format!("seed-{seed}"), &shifted, amp, &probe.t, opts)?;
            fits.push(ProbeFit { seed, center: c.clone(), fit });
        }
    }
    let (worst_beta, worst_p) = fits
        .iter()
        .map(|f| (f.fit.beta, f.fit.p))
        .chain(std::iter::once((unperturbed.beta, unperturbed.p)).filter(|_| fits.is_empty()))
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 > a.1) { b } else { a });
    Ok(ProbeReport { unperturbed, fits, worst_beta, worst_p })
}

// ---------------------------------------------------------------------------
// P̃₄ through the two-variable reduction

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixValue {
    pub value: Complex64,
    pub err_est: f64,
    pub evaluations: usize,
}

/// `J(λ, P̃₄, ψ)` with `ψ(ξ) = exp(−|ξ|²/(2σ²))`.
///
/// With `ξ₁ = w₁+w₂, ξ₂ = w₁−w₂, ξ₃ = w₃+w₄, ξ₄ = w₃−w₄` one has
/// `P̃₄ = 2f(w)`, `f = 4(w₁+w₃)³ − w₁³ − w₃³ − 3w₁w₂² − 3w₃w₄²`, and the
/// Gaussian makes the `w₂`, `w₄` integrals exact:
/// `∫ e^{−6iλw₁w₂² − w₂²/σ²} dw₂ = (π/(σ⁻² + 6iλw₁))^{1/2}`.
/// What remains is a two-dimensional integral with phase
/// `2λ(4(w₁+w₃)³ − w₁³ − w₃³)`, done in polar coordinates. For each angle
/// the radial contour is rotated by `±π/6` so that the cubic phase becomes
/// exponential decay.
pub fn reduce_p4_appendix(lambda: f64, sigma: f64) -> Result<AppendixValue> {
    if !(lambda >= 10.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("λ = {lambda} is below the validity threshold 10")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("σ must be positive"));
    }
    // J(λ; σ) = σ⁴ J(λσ³; 1).
    let l = lambda * sigma.powi(3);
    let s4 = sigma.powi(4);
    let v = appendix_unit(l);
    Ok(AppendixValue { value: v.value * s4, err_est: v.err_est * s4, evaluations: v.evaluations })
}

fn cubic_h(c: f64, s: f64) -> f64 {
    4.0 * (c + s).powi(3) - c.powi(3) - s.powi(3)
}

fn appendix_unit(l: f64) -> AppendixValue {
    let sqrt_pi = PI.sqrt();
    let radial = |theta: f64| -> (Complex64, f64, usize) {
        let (s, c) = theta.sin_cos();
        let h = cubic_h(c, s);
        let phi = if h > 0.0 {
            PI / 6.0
        } else if h < 0.0 {
            -PI / 6.0
        } else {
            0.0
        };
        let rot = Complex64::from_polar(1.0, phi);
        let f = |r: f64| {
            let rho = rot * r;
            let e = Complex64::new(0.0, 2.0 * l * h) * rho * rho * rho - rho * rho;
            let a = (Complex64::new(1.0, 0.0) + Complex64::new(0.0, 6.0 * l * c) * rho).sqrt();
            let b = (Complex64::new(1.0, 0.0) + Complex64::new(0.0, 6.0 * l * s) * rho).sqrt();
            e.exp() * rho * rot * (sqrt_pi * sqrt_pi) / (a * b)
        };
        // Geometric breakpoints cover the 1/λ and λ^{-1/3} scales.
        let mut pts = vec![0.0];
        let mut r = 1e-3 / l;
        while r < 9.0 {
            pts.push(r);
            r *= 2.0;
        }
        pts.push(9.0);
        let res = adaptive(f, &pts, 1e-15, 1e-12, 4000);
        (res.value, res.err, res.evaluations)
    };
    // Half plane w₁ + w₃ ≥ 0; the other half is the complex conjugate.
    let (a, b) = (-PI / 4.0, 3.0 * PI / 4.0);
    let mut brk = vec![a, 0.0, PI / 2.0, b];
    // Zeros of h(cos θ, sin θ) on (a, b).
    let m = 2000;
    for i in 0..m {
        let t0 = a + (b - a) * i as f64 / m as f64;
        let t1 = a + (b - a) * (i + 1) as f64 / m as f64;
        let (h0, h1) = (cubic_h(t0.cos(), t0.sin()), cubic_h(t1.cos(), t1.sin()));
        if h0 * h1 < 0.0 {
            let (mut lo, mut hi) = (t0, t1);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if cubic_h(lo.cos(), lo.sin()) * cubic_h(mid.cos(), mid.sin()) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            brk.push(0.5 * (lo + hi));
        }
    }
    brk.sort_by(f64::total_cmp);
    brk.dedup();
    let inner_err = std::cell::Cell::new(0.0f64);
    let evals = std::cell::Cell::new(0usize);
    let outer = adaptive(
        |theta| {
            let (v, e, n) = radial(theta);
            inner_err.set(inner_err.get().max(e));
            evals.set(evals.get() + n);
            v
        },
        &brk,
        1e-14,
        1e-11,
        4000,
    );
    let value = Complex64::new(8.0 * outer.value.re, 0.0);
    let err_est = 8.0 * (outer.err + inner_err.get() * (b - a));
    AppendixValue { value, err_est, evaluations: evals.get() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q2;

    fn opts() -> JOptions {
        JOptions::default()
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(plateau_cutoff(0.0), 1.0);
        assert_eq!(plateau_cutoff(0.5), 1.0);
        assert_eq!(plateau_cutoff(1.0), 0.0);
        assert!((plateau_cutoff(0.75) - 0.5).abs() < 1e-15);
        for i in 0..100 {
            let s = 0.5 + i as f64 / 200.0;
            assert!(plateau_cutoff(s) >= plateau_cutoff(s + 0.005));
        }
    }

    #[test]
    fn zero_phase_gives_mass() {
        let amp = AmplitudeSpec::product_bump(2, 0.5).unwrap();
        let j = eval_j(123.0, &Poly::zero(2), &amp, &opts()).unwrap();
        assert!((j.value.re - 0.75 * 0.75).abs() < 1e-9);
        assert!(j.value.im.abs() < 1e-12);
        let g = AmplitudeSpec::gaussian(1, 0.3).unwrap();
        let j = eval_j(0.0, &Poly::zero(1), &g, &opts()).unwrap();
        assert!((j.value.re - (2.0 * PI).sqrt() * 0.3).abs() < 1e-12);
    }

    #[test]
    fn gaussian_fresnel_closed_form() {
        // ∫ e^{itz²} e^{−z²/(2σ²)} dz = (π/(1/(2σ²) − it))^{1/2}
        let g = AmplitudeSpec::gaussian(1, 0.5).unwrap();
        for t in [1.0, 10.0, 300.0] {
            let j = eval_j(t, &Poly::parse("z1^2", None).unwrap(), &g, &opts()).unwrap();
            let exact = (Complex64::new(PI, 0.0) / Complex64::new(2.0, -t)).sqrt();
            assert!((j.value - exact).norm() < 1e-10, "t={t}: {} vs {exact}", j.value);
            assert!(j.err_est < 1e-8);
        }
    }

    #[test]
    fn conjugation_is_exact() {
        let amp = AmplitudeSpec::product_bump(2, 0.5).unwrap();
        let p = Poly::parse("z1^2*z2 + z2^2 + z1", None).unwrap();
        let a = eval_j(40.0, &p, &amp, &opts()).unwrap().value;
        let b = eval_j(-40.0, &p, &amp, &opts()).unwrap().value;
        assert_eq!(a, b.conj());
    }

    #[test]
    fn folding_matches_unfolded_sum() {
        // Adding a tiny linear term breaks all parities but barely moves J.
        let amp = AmplitudeSpec::product_bump(2, 0.5).unwrap();
        let d4 = Poly::parse("z2^3 - z1^2*z2", None).unwrap();
        let a = eval_j(60.0, &d4, &amp, &opts()).unwrap();
        let b = eval_j(60.0, &d4.add(&Poly::monomial(vec![0, 2], q(0))), &amp, &opts()).unwrap();
        assert!((a.value - b.value).norm() < 1e-12);
        let c = eval_j(60.0, &d4.add(&Poly::monomial(vec![1, 0], q2(1, 1_000_000_000))), &amp, &opts()).unwrap();
        assert!((a.value - c.value).norm() < 1e-6);
    }

    #[test]
    fn symmetric_reduction_matches_full_sum() {
        let p = Poly::parse("z1*z2*z3 + z1^2 + z2^2 + z3^2", None).unwrap();
        let amp = AmplitudeSpec::product_bump(3, 0.5).unwrap();
        let a = eval_j(30.0, &p, &amp, &opts()).unwrap();
        let amp2 = AmplitudeSpec::new(AmplitudeKind::ProductBump, vec![0.5, 0.5, 0.5 + 1e-15]).unwrap();
        let b = eval_j(30.0, &p, &amp2, &opts()).unwrap();
        assert!((a.value - b.value).norm() < 1e-9, "{} {}", a.value, b.value);
    }

    #[test]
    fn factorization() {
        let amp = AmplitudeSpec::product_bump(2, 0.5).unwrap();
        let parts = [Poly::parse("z1^3", Some(2)).unwrap(), Poly::parse("z2^2", Some(2)).unwrap()];
        let f = quad_factor_eval(80.0, &parts, &amp, &opts()).unwrap();
        let full = eval_j(80.0, &parts[0].add(&parts[1]), &amp, &opts()).unwrap();
        assert!((f.value - full.value).norm() < 1e-10);
        let bad = [Poly::parse("z1*z2", None).unwrap(), Poly::parse("z2^2", None).unwrap()];
        assert!(quad_factor_eval(1.0, &bad, &amp, &opts()).is_err());
    }

    #[test]
    fn phase_family() {
        let p = build_phase_pm(2, 3, &[1]).unwrap();
        assert_eq!(p, Poly::parse("3*z1^2*z2 + 3*z1*z2^2 + z3^2", None).unwrap());
        let p3 = build_phase_pm(3, 4, &[-1]).unwrap();
        let cubic = Poly::parse("3*(z1+z2)*(z2+z3)*(z1+z3) - z4^2", None).unwrap();
        assert_eq!(p3, cubic);
        assert!(build_phase_pm(1, 3, &[1, 1]).is_err());
        assert!(build_phase_pm(3, 3, &[]).is_err());
        assert!(build_phase_pm(2, 4, &[1]).is_err());
        for ph in phase_library() {
            let p = ph.poly();
            assert_eq!(p.dim(), ph.d);
            if !ph.parts.is_empty() {
                let sum = ph.part_polys().iter().fold(Poly::zero(ph.d), |a, b| a.add(b));
                assert_eq!(sum, p, "{}", ph.id);
            }
        }
        assert_eq!(library_phase("p4").unwrap().poly(), build_phase_pm(4, 5, &[1]).unwrap());
        assert_eq!(library_phase("p4-tilde").unwrap().poly(), p4_tilde());
    }

    #[test]
    fn perturbations() {
        let spec = PerturbationSpec { d: 2, r: 1.0, eps: 1e-3, degree: 4, seed: 7 };
        let a = sample_perturbation(&spec).unwrap();
        let b = sample_perturbation(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.degree() <= 4);
        assert!(grid_sup(&a.compile(), 1.0, 201) <= 1e-3);
        assert!(sample_perturbation(&PerturbationSpec { eps: 0.0, ..spec }).unwrap().is_zero());
        let c = sample_perturbation(&PerturbationSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn newton_finds_critical_points() {
        let p = Poly::parse("z1^3 - 3*z1 + z2^2", None).unwrap().compile();
        let pts = critical_points(&p, 2.0, 5);
        assert_eq!(pts.len(), 2);
        for x in pts {
            assert!((x[0].abs() - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
        }
    }

    #[test]
    fn appendix_at_small_lambda_matches_mass() {
        // J(λ;σ) → 4π²σ⁴ as λσ³ → 0.
        let v = reduce_p4_appendix(10.0, 0.01).unwrap();
        let mass = 4.0 * PI * PI * 1e-8;
        assert!((v.value.re - mass).abs() < 1e-3 * mass);
        assert!(reduce_p4_appendix(5.0, 1.0).is_err());
    }
}
