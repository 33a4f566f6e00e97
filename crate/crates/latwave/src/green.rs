//! The lattice fundamental solution
//! `G(x,t) = (2π)^{-d} ∫ e^{ix·ξ} sin(tω)/ω dξ` and the directed integral
//! `I(v,t) = (2π)^{-d} ∫ e^{it(v·ξ − ω)}/ω dξ`.
//!
//! `sin(tω)/ω` is an entire function of `ω²`, so the integrand is a smooth
//! trigonometric function and the trapezoidal rule on the torus is exact up
//! to aliasing: with `N` nodes per half axis the computed value is
//! `Σₙ G(x + 2Nn, t)`. Once `2N − |x|∞` is past the light cone the alias
//! terms are super-exponentially small. Evenness in each coordinate reduces
//! the torus to the orthant `[0,π]^d` with cosine weights.
//!
//! ```
//! use latwave::dispersion::Dispersion;
//! use latwave::green::{green_wave, TorusGrid};
//!
//! let grid = TorusGrid::for_point(2, 0.0, 4).unwrap();
//! let g = green_wave(&[3, 4], 0.0, &grid).unwrap();
//! assert_eq!(g.value, 0.0);
//!
//! let grid = TorusGrid::for_point(2, 5.0, 1).unwrap();
//! let a = green_wave(&[1, 0], 5.0, &grid).unwrap();
//! let b = green_wave(&[0, -1], 5.0, &grid).unwrap();
//! assert_eq!(a.value, b.value);
//! # let _ = Dispersion::wave(2);
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustdct::DctPlanner;
use serde::{Deserialize, Serialize};

use crate::dispersion::Dispersion;
use crate::quad::gauss_legendre;
use crate::{Error, Result};

/// Largest number of orthant points (or summands) a single evaluation may touch.
pub const MAX_ORTHANT_POINTS: f64 = 5e8;

/// Trapezoidal grid with `N` intervals on each half axis `[0,π]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub d: usize,
    pub n: usize,
    /// Skip the cost guard.
    pub force: bool,
}

impl TorusGrid {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if !(1..=5).contains(&d) {
            return Err(Error::invalid(format!("dimension {d} outside 1..=5")));
        }
        if n < 8 {
            return Err(Error::invalid(format!("grid needs N >= 8, got {n}")));
        }
        Ok(TorusGrid { d, n, force: false })
    }

    /// Grid for a single value at `|x|∞ ≤ xmax`: the nearest alias image sits
    /// at distance `2N − xmax`, which this keeps 40 sites beyond the light cone.
    pub fn for_point(d: usize, t: f64, xmax: u64) -> Result<Self> {
        let n = ((t.abs() + xmax as f64) / 2.0).ceil() as usize + 20;
        Self::new(d, n.max(8))
    }

    /// Grid for the whole field on `[0,N]^d`.
    pub fn for_field(d: usize, t: f64) -> Result<Self> {
        Self::new(d, (t.abs().ceil() as usize + 30).max(8))
    }

    /// `N = ⌈c·|t|⌉` (at least 8).
    pub fn with_c_grid(d: usize, t: f64, c_grid: f64) -> Result<Self> {
        if !(c_grid > 0.0) {
            return Err(Error::invalid("c_grid must be positive"));
        }
        Self::new(d, ((c_grid * t.abs()).ceil() as usize).max(8))
    }

    pub fn forced(mut self) -> Self {
        self.force = true;
        self
    }

    pub fn orthant_points(&self) -> f64 {
        (self.n as f64 + 1.0).powi(self.d as i32)
    }

    /// Companion grid used for the error estimate. Its alias images sit 12
    /// sites closer, so the difference bounds the aliasing tail of this grid.
    pub fn coarse(&self) -> TorusGrid {
        TorusGrid { n: self.n.saturating_sub(6).max(8), ..*self }
    }

    fn guard(&self, work: f64) -> Result<()> {
        if !self.force && work > MAX_ORTHANT_POINTS {
            return Err(Error::CostGuard(format!(
                "{work:.3e} grid points exceed the budget of {MAX_ORTHANT_POINTS:.0e} (d={}, N={})",
                self.d, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenSample {
    pub x: Vec<i64>,
    pub t: f64,
    pub m: f64,
    pub value: f64,
    /// `|G_N − G_{N'}|` against the coarse companion grid.
    pub err_est: f64,
    pub grid: TorusGrid,
    /// Set when `N < ⌈c_grid·|t|⌉` for the `c_grid` the caller asked to check.
    pub coarse_warning: bool,
}

/// `sin(tω)/ω` with the value `t` at `ω = 0`.
#[inline]
fn sinc_t(t: f64, w2: f64) -> f64 {
    if w2 == 0.0 {
        t
    } else {
        let w = w2.sqrt();
        (t * w).sin() / w
    }
}

fn trap_weight(j: usize, n: usize) -> f64 {
    if j == 0 || j == n {
        0.5
    } else {
        1.0
    }
}

/// `N^{-d} Σ_j Π_k w_j cos(π x_k j_k/N) f(ω²(j))` over `j ∈ {0..N}^d`.
///
/// Coordinates are sorted by `|x_k|`; within a run of equal `|x_k|` only
/// non-decreasing index tuples are visited, weighted by their multiplicity.
/// The first index is split across threads and the partial sums are added
/// in index order, so the result does not depend on the thread count.
fn orthant_sum<F>(x: &[i64], m: f64, grid: &TorusGrid, f: F) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let d = grid.d;
    let n = grid.n;
    if x.len() != d {
        return Err(Error::invalid(format!("point has {} coordinates, expected {d}", x.len())));
    }
    let mut ax: Vec<u64> = x.iter().map(|v| v.unsigned_abs()).collect();
    ax.sort_unstable_by(|a, b| b.cmp(a));
    if ax[0] as usize > n {
        return Err(Error::invalid(format!("|x|∞ = {} outside the grid window {n}", ax[0])));
    }
    let same_as_prev: Vec<bool> = (0..d).map(|k| k > 0 && ax[k] == ax[k - 1]).collect();
    let work = symmetric_work(&same_as_prev, n);
    grid.guard(work)?;

    let e: Vec<f64> = (0..=n).map(|j| 2.0 - 2.0 * (PI * j as f64 / n as f64).cos()).collect();
    let tables: Vec<Vec<f64>> = ax
        .iter()
        .map(|&xk| (0..=n).map(|j| trap_weight(j, n) * cos_pi_ratio(xk as u128 * j as u128, n as u128)).collect())
        .collect();
    let m2 = m * m;

    struct Ctx<'a, F> {
        d: usize,
        n: usize,
        e: &'a [f64],
        tables: &'a [Vec<f64>],
        same: &'a [bool],
        f: &'a F,
    }
    fn rec<F: Fn(f64) -> f64>(c: &Ctx<F>, k: usize, prev: usize, run: usize, pos: usize, mult: f64, prod: f64, w2: f64) -> f64 {
        let (start, pos) = if c.same[k] { (prev, pos + 1) } else { (0, 1) };
        let tab = &c.tables[k];
        let mut acc = 0.0;
        for j in start..=c.n {
            let run_k = if c.same[k] && j == prev { run + 1 } else { 1 };
            let mult_k = mult * pos as f64 / run_k as f64;
            let p = prod * tab[j];
            if p == 0.0 {
                continue;
            }
            let w = w2 + c.e[j];
            if k + 1 == c.d {
                acc += mult_k * p * (c.f)(w);
            } else {
                acc += rec(c, k + 1, j, run_k, pos, mult_k, p, w);
            }
        }
        acc
    }

    let ctx = Ctx { d, n, e: &e, tables: &tables, same: &same_as_prev, f: &f };
    let partials: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|j0| {
            let p = tables[0][j0];
            let w = m2 + e[j0];
            if d == 1 {
                p * f(w)
            } else {
                rec(&ctx, 1, j0, 1, 1, 1.0, p, w)
            }
        })
        .collect();
    let sum: f64 = partials.iter().sum();
    Ok(sum / (n as f64).powi(d as i32))
}

/// `cos(π·num/n)` with the argument reduced exactly modulo `2n` first.
fn cos_pi_ratio(num: u128, n: u128) -> f64 {
    let r = num % (2 * n);
    // cos is symmetric about π: fold into [0, n].
    let r = if r > n { 2 * n - r } else { r };
    if 2 * r == n {
        0.0
    } else {
        (PI * r as f64 / n as f64).cos()
    }
}

/// Number of summands visited by [`orthant_sum`].
fn symmetric_work(same: &[bool], n: usize) -> f64 {
    // Product over runs of C(N+1+len−1, len).
    let mut work = 1.0;
    let mut len = 0usize;
    for (k, &s) in same.iter().enumerate() {
        if s {
            len += 1;
        } else {
            if k > 0 {
                work *= multichoose(n + 1, len);
            }
            len = 1;
        }
    }
    work * multichoose(n + 1, len)
}

fn multichoose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n + i) as f64 / (i + 1) as f64)
}

fn sample(x: &[i64], t: f64, m: f64, grid: &TorusGrid) -> Result<GreenSample> {
    if !t.is_finite() {
        return Err(Error::invalid("time must be finite"));
    }
    Dispersion::new(grid.d, m)?;
    let value = orthant_sum(x, m, grid, |w2| sinc_t(t, w2))?;
    let coarse = grid.coarse();
    let err_est = if x.iter().all(|v| v.unsigned_abs() as usize <= coarse.n) {
        (value - orthant_sum(x, m, &coarse, |w2| sinc_t(t, w2))?).abs()
    } else {
        f64::NAN
    };
    Ok(GreenSample { x: x.to_vec(), t, m, value, err_est, grid: *grid, coarse_warning: false })
}

/// `G(x,t)` for the massless lattice wave equation.
pub fn green_wave(x: &[i64], t: f64, grid: &TorusGrid) -> Result<GreenSample> {
    sample(x, t, 0.0, grid)
}

/// `G_*(x,t)` with `ω_*² = ω² + m²`, `m > 0`.
pub fn green_kg(x: &[i64], t: f64, grid: &TorusGrid, m: f64) -> Result<GreenSample> {
    if !(m > 0.0) {
        return Err(Error::invalid("Klein–Gordon mass must be positive"));
    }
    sample(x, t, m, grid)
}

/// Mark `s.coarse_warning` when its grid is finer than `⌈c_grid·|t|⌉`.
pub fn check_c_grid(mut s: GreenSample, c_grid: f64) -> GreenSample {
    s.coarse_warning = (s.grid.n as f64) < (c_grid * s.t.abs()).ceil();
    s
}

// ---------------------------------------------------------------------------
// Whole field

/// `G(·,t)` on `x ∈ [0,N]^d`, laid out row-major with the last coordinate fastest.
#[derive(Debug, Clone)]
pub struct GreenField {
    pub d: usize,
    pub n: usize,
    pub t: f64,
    pub m: f64,
    pub data: Vec<f64>,
}

impl GreenField {
    /// One DCT-I per axis: `G = N^{-d} DCT-I^{⊗d}[sin(tω)/ω]`.
    pub fn compute(t: f64, m: f64, grid: &TorusGrid) -> Result<Self> {
        Dispersion::new(grid.d, m)?;
        grid.guard(grid.orthant_points())?;
        let (d, n) = (grid.d, grid.n);
        let s = n + 1;
        let e: Vec<f64> = (0..s).map(|j| 2.0 - 2.0 * (PI * j as f64 / n as f64).cos()).collect();
        let total = s.pow(d as u32);
        let m2 = m * m;
        let mut data = vec![0.0; total];
        data.par_chunks_mut(s).enumerate().for_each(|(row, out)| {
            let mut idx = row;
            let mut w2 = m2;
            for _ in 1..d {
                w2 += e[idx % s];
                idx /= s;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = sinc_t(t, w2 + e[j]);
            }
        });
        let dct = DctPlanner::new().plan_dct1(s);
        for axis in 0..d {
            let stride = s.pow((d - 1 - axis) as u32);
            data.par_chunks_mut(stride * s).for_each(|block| {
                let mut line = vec![0.0; s];
                let mut scratch = vec![0.0; dct.get_scratch_len()];
                for inner in 0..stride {
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = block[j * stride + inner];
                    }
                    dct.process_dct1_with_scratch(&mut line, &mut scratch);
                    for (j, l) in line.iter().enumerate() {
                        block[j * stride + inner] = *l;
                    }
                }
            });
        }
        let scale = 1.0 / (n as f64).powi(d as i32);
        data.par_iter_mut().for_each(|v| *v *= scale);
        if t == 0.0 {
            data.iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(GreenField { d, n, t, m, data })
    }

    pub fn get(&self, x: &[i64]) -> Option<f64> {
        let s = self.n + 1;
        let mut idx = 0usize;
        for &v in x {
            let a = v.unsigned_abs() as usize;
            if a > self.n {
                return None;
            }
            idx = idx * s + a;
        }
        Some(self.data[idx])
    }

    /// `Σ_{x ∈ ℤ^d, |x|∞ ≤ R} G(x,t)²`, using the orthant copy.
    pub fn l2_sq(&self, r: usize) -> f64 {
        let s = self.n + 1;
        let r = r.min(self.n);
        let mut acc = 0.0;
        for (i, v) in self.data.iter().enumerate() {
            let mut idx = i;
            let mut mult = 1.0;
            let mut inside = true;
            for _ in 0..self.d {
                let c = idx % s;
                idx /= s;
                if c > r {
                    inside = false;
                    break;
                }
                if c != 0 {
                    mult *= 2.0;
                }
            }
            if inside {
                acc += mult * v * v;
            }
        }
        acc
    }
}

/// Size of the signed-permutation orbit of `x`.
pub fn orbit_size(x: &[i64]) -> u64 {
    let mut a: Vec<u64> = x.iter().map(|v| v.unsigned_abs()).collect();
    a.sort_unstable();
    let fact = |k: usize| (1..=k as u64).product::<u64>();
    let mut size = fact(a.len()) << a.iter().filter(|&&v| v != 0).count();
    let mut i = 0;
    while i < a.len() {
        let j = a[i..].iter().take_while(|&&v| v == a[i]).count();
        size /= fact(j);
        i += j;
    }
    size
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub t: f64,
    /// Maximizer in the fundamental domain `x₁ ≥ … ≥ x_d ≥ 0`.
    pub x: Vec<i64>,
    pub value: f64,
    pub err_est: f64,
    pub orbit_size: u64,
    pub grid: TorusGrid,
}

/// `max_{|x|∞ ≤ R} |G(x,t)|` from one field evaluation.
pub fn sup_over_window(t: f64, r: usize, m: f64, grid: &TorusGrid) -> Result<SupResult> {
    let need = t.abs().ceil() as usize + 2;
    if r < need {
        return Err(Error::invalid(format!("window radius {r} must be at least ceil(|t|)+2 = {need}")));
    }
    if r > grid.n {
        return Err(Error::invalid(format!("window radius {r} exceeds the grid size {}", grid.n)));
    }
    let field = GreenField::compute(t, m, grid)?;
    let (d, s) = (grid.d, grid.n + 1);
    let mut best = (0usize, -1.0f64);
    'outer: for (i, v) in field.data.iter().enumerate() {
        // Fundamental domain: first coordinate largest.
        let mut idx = i;
        let mut prev = 0usize;
        for _ in 0..d {
            let c = idx % s;
            idx /= s;
            if c < prev || c > r {
                continue 'outer;
            }
            prev = c;
        }
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    let mut x = vec![0i64; d];
    let mut idx = best.0;
    for k in (0..d).rev() {
        x[k] = (idx % s) as i64;
        idx /= s;
    }
    if t != 0.0 && x[0] as usize >= r {
        return Err(Error::invalid(format!("maximizer {x:?} touches the window boundary R = {r}")));
    }
    let value = best.1.max(0.0);
    let coarse = grid.coarse();
    let err_est = if t == 0.0 {
        0.0
    } else {
        let c = orthant_sum(&x, m, &coarse.forced(), |w2| sinc_t(t, w2))?;
        (value - c.abs()).abs()
    };
    Ok(SupResult { t, orbit_size: orbit_size(&x), x, value, err_est, grid: *grid })
}

/// `max` of [`sup_over_window`] over the times `t + k·π/(8ω₀)`, `k < samples`,
/// where `ω₀ = √(2d)` is the frequency at the most degenerate critical point.
/// These offsets sample one quarter of the lattice phase period at the
/// maximizer, so the result tracks the envelope rather than a phase.
pub fn sup_envelope(t: f64, samples: usize, m: f64, d: usize) -> Result<SupResult> {
    if samples == 0 {
        return Err(Error::invalid("need at least one time sample"));
    }
    let w0 = ((2 * d) as f64 + m * m).sqrt();
    let mut best: Option<SupResult> = None;
    for k in 0..samples {
        let tk = t + k as f64 * PI / (8.0 * w0);
        let grid = TorusGrid::for_field(d, tk)?;
        let r = sup_over_window(tk, tk.abs().ceil() as usize + 10, m, &grid)?;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one sample"))
}

// ---------------------------------------------------------------------------
// Directed integral

/// `e^{−x} I₀(x)` for `x ≥ 0`.
pub fn scaled_i0(x: f64) -> f64 {
    assert!(x >= 0.0);
    if x <= 20.0 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-18 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kk = k as f64;
            let next = term * (2.0 * kk - 1.0).powi(2) / (8.0 * kk * x);
            if next > term || next < 1e-18 {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// `W = (2π)^{-d} ∫_{𝕋^d} dξ/ω_*(ξ)` via `1/ω = π^{-1/2}∫₀^∞ s^{-1/2} e^{-sω²} ds`,
/// whose torus average factorizes into `(e^{-2s}I₀(2s))^d e^{-sm²}`.
pub fn mean_inverse_omega(d: usize, m: f64) -> Result<f64> {
    let rel = Dispersion::new(d, m)?;
    if d == 1 && rel.mass() == 0.0 {
        return Err(Error::Singular("1/ω is not integrable on the circle".into()));
    }
    let m2 = m * m;
    let integrand = |s: f64| s.sqrt() * scaled_i0(2.0 * s).powi(d as i32) * (-s * m2).exp();
    // s = e^u; trapezoid in u converges geometrically.
    let (lo, hi, h) = (-80.0f64, 8.0 * 10f64.ln(), 0.02);
    let steps = ((hi - lo) / h).round() as usize;
    let mut acc = 0.0;
    for i in 0..=steps {
        let u = lo + i as f64 * h;
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        acc += w * integrand(u.exp());
    }
    acc *= h;
    // Tail beyond S using the leading asymptotics (4πs)^{-1/2}(1 + 1/(16s)).
    let s_max = hi.exp();
    if m2 * s_max < 40.0 {
        let p = (d as f64 - 1.0) / 2.0;
        let lead = (4.0 * PI).powf(-(d as f64) / 2.0);
        if m2 == 0.0 {
            acc += lead * (s_max.powf(-p) / p + d as f64 / 16.0 * s_max.powf(-p - 1.0) / (p + 1.0));
        } else {
            return Err(Error::NonConvergent("mass too small for the tail bound".into()));
        }
    }
    Ok(acc / PI.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedIntegral {
    pub value: Complex64,
    pub err_est: f64,
}

/// `I(v,t)`. When `vt` is a lattice point the trapezoid grid is used and
/// `Im I(v,t) = −G(vt,t)` holds on the same grid; otherwise a composite
/// Gauss–Legendre rule is used on each axis.
pub fn directed_integral(v: &[f64], t: f64, m: f64, grid: &TorusGrid) -> Result<DirectedIntegral> {
    let d = grid.d;
    if v.len() != d {
        return Err(Error::invalid(format!("velocity has {} coordinates, expected {d}", v.len())));
    }
    if !t.is_finite() || v.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("velocity and time must be finite"));
    }
    Dispersion::new(d, m)?;
    let w_mean = if m == 0.0 { mean_inverse_omega(d, 0.0)? } else { 0.0 };
    let y: Vec<f64> = v.iter().map(|c| (c * t).abs()).collect();
    let lattice = y.iter().all(|c| c.fract() == 0.0);
    let eval = |grid: &TorusGrid| -> Result<Complex64> {
        // Subtract 1/ω when m = 0 so the remaining integrand is bounded.
        let re_f = |w2: f64| {
            if m == 0.0 {
                if w2 == 0.0 {
                    0.0
                } else {
                    let w = w2.sqrt();
                    ((t * w).cos() - 1.0) / w
                }
            } else {
                let w = w2.sqrt();
                (t * w).cos() / w
            }
        };
        if lattice {
            let x: Vec<i64> = y.iter().map(|c| *c as i64).collect();
            let im = -orthant_sum(&x, m, grid, |w2| sinc_t(t, w2))?;
            // cos(x·ξ)cos(tω)/ω − 1/ω = cos(x·ξ)(cos tω − 1)/ω + (cos(x·ξ) − 1)/ω.
            let a = orthant_sum(&x, m, grid, re_f)?;
            let b = if m == 0.0 { cos_minus_one_over_omega(&x, grid)? } else { 0.0 };
            Ok(Complex64::new(a + b + w_mean, im))
        } else {
            gl_directed(&y, t, m, grid.n, grid.force, w_mean)
        }
    };
    let value = eval(grid)?;
    let coarse = grid.coarse();
    let fits = !lattice || y.iter().all(|c| *c as usize <= coarse.n);
    let err_est = if fits { (value - eval(&coarse)?).norm() } else { f64::NAN };
    Ok(DirectedIntegral { value, err_est })
}

/// Orthant trapezoid of `(Π cos(x_k ξ_k) − 1)/ω` for `m = 0`.
fn cos_minus_one_over_omega(x: &[i64], grid: &TorusGrid) -> Result<f64> {
    let n = grid.n;
    let d = grid.d;
    grid.guard(grid.orthant_points())?;
    let e: Vec<f64> = (0..=n).map(|j| 2.0 - 2.0 * (PI * j as f64 / n as f64).cos()).collect();
    let tabs: Vec<Vec<f64>> =
        x.iter().map(|&xk| (0..=n).map(|j| cos_pi_ratio(xk.unsigned_abs() as u128 * j as u128, n as u128)).collect()).collect();
    let partial: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|j0| {
            let mut acc = 0.0;
            let mut idx = vec![0usize; d];
            idx[0] = j0;
            let inner = (n + 1).pow(d as u32 - 1);
            for mut r in 0..inner {
                for k in (1..d).rev() {
                    idx[k] = r % (n + 1);
                    r /= n + 1;
                }
                let w2: f64 = idx.iter().map(|&j| e[j]).sum();
                if w2 == 0.0 {
                    continue;
                }
                let c: f64 = idx.iter().zip(&tabs).map(|(&j, tab)| tab[j]).product();
                let w: f64 = idx.iter().map(|&j| trap_weight(j, n)).product();
                acc += w * (c - 1.0) / w2.sqrt();
            }
            acc
        })
        .collect();
    Ok(partial.iter().sum::<f64>() / (n as f64).powi(d as i32))
}

/// Tensor Gauss–Legendre on `[0,π]^d` with `n/8 + 1` panels of 16 nodes.
fn gl_directed(y: &[f64], t: f64, m: f64, n: usize, force: bool, w_mean: f64) -> Result<Complex64> {
    let d = y.len();
    let panels = n / 8 + 1;
    let (gx, gw) = gauss_legendre(16);
    let per_axis = panels * 16;
    let work = (per_axis as f64).powi(d as i32);
    if !force && work > MAX_ORTHANT_POINTS {
        return Err(Error::CostGuard(format!("{work:.3e} quadrature nodes exceed the budget")));
    }
    let h = PI / panels as f64;
    let mut nodes = Vec::with_capacity(per_axis);
    for p in 0..panels {
        for (xg, wg) in gx.iter().zip(&gw) {
            nodes.push((h * (p as f64 + 0.5 + 0.5 * xg), 0.5 * h * wg));
        }
    }
    let e: Vec<f64> = nodes.iter().map(|(xi, _)| 2.0 - 2.0 * xi.cos()).collect();
    let m2 = m * m;
    let partial: Vec<Complex64> = (0..per_axis)
        .into_par_iter()
        .map(|i0| {
            let mut acc = Complex64::new(0.0, 0.0);
            let inner = per_axis.pow(d as u32 - 1);
            let mut idx = vec![0usize; d];
            idx[0] = i0;
            for mut r in 0..inner {
                for k in (1..d).rev() {
                    idx[k] = r % per_axis;
                    r /= per_axis;
                }
                let w2: f64 = m2 + idx.iter().map(|&i| e[i]).sum::<f64>();
                let w = w2.sqrt();
                let c: f64 = idx.iter().zip(y).map(|(&i, yk)| (yk * nodes[i].0).cos()).product();
                let wt: f64 = idx.iter().map(|&i| nodes[i].1).product();
                let re = if m2 == 0.0 { (c * (t * w).cos() - 1.0) / w } else { c * (t * w).cos() / w };
                acc += wt * Complex64::new(re, -c * (t * w).sin() / w);
            }
            acc
        })
        .collect();
    let sum: Complex64 = partial.iter().sum();
    Ok(sum / PI.powi(d as i32) + Complex64::new(w_mean, 0.0))
}
