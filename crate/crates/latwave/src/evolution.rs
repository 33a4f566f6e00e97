//! Spectral solvers for `∂ₜ²u − Δu + m²u = F` on the periodic box `ℤ_L^d`,
//! and space-time norms of the resulting trajectories.
//!
//! The linear flow is diagonal in Fourier space and is applied exactly. The
//! nonlinear flow uses Strang splitting: half a linear step, a kick
//! `∂ₜu += Δt·F(u)` in physical space, half a linear step.
//!
//! Data that is even in every coordinate can be stored on the reduced grid
//! `{0, …, L/2}^d`, where the periodic Fourier transform becomes a DCT-I in
//! each axis. This is what makes `d = 5`, `L = 32` runs cheap.
//!
//! ```
//! use latwave::evolution::{BoxState, Layout};
//!
//! let s = BoxState::delta(2, 16, Layout::Full, 0.0, 1.0).unwrap();
//! let a = s.linear_propagate(0.7).linear_propagate(0.5);
//! let b = s.linear_propagate(1.2);
//! let (ua, ub) = (a.physical_u(), b.physical_u());
//! assert!(ua.iter().zip(&ub).all(|(x, y)| (x - y).abs() < 1e-12));
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustdct::{Dct1, DctPlanner};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest number of stored modes per state.
pub const MAX_BOX_POINTS: usize = 1 << 24;

/// Decay exponent of the `ℓ¹ → ℓ^∞` estimate on `ℤ⁵`.
pub const SIGMA_D5: f64 = 11.0 / 6.0;

/// Data exponent of the `f₂` term in the Strichartz estimate on `ℤ⁵`.
pub const F2_EXPONENT: f64 = 10.0 / 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// All `L^d` sites, complex FFT.
    Full,
    /// Data even in every coordinate, stored on `{0, …, L/2}^d`; `L` even.
    Even,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxState {
    pub d: usize,
    pub l: usize,
    pub layout: Layout,
    pub m: f64,
    pub t: f64,
    /// Coefficients of `u` on the stored frequency grid `ξ = 2πk/L`.
    pub u_hat: Vec<Complex64>,
    /// Coefficients of `∂ₜu`.
    pub v_hat: Vec<Complex64>,
    omega: Vec<f64>,
}

/// Applies `line` to every line of an `n^d` row-major array along every axis.
/// Each pass transforms the contiguous last axis and then rotates the axes,
/// so after `d` passes the original order is restored.
fn each_axis<T, F>(data: &mut Vec<T>, n: usize, d: usize, scratch_len: usize, line: F)
where
    T: Copy + Default + Send + Sync,
    F: Fn(&mut [T], &mut [T]) + Sync,
{
    let rows = data.len() / n;
    let mut tmp = vec![T::default(); data.len()];
    for _ in 0..d {
        data.par_chunks_mut(n).for_each_init(|| vec![T::default(); scratch_len], |s, row| line(row, s));
        // out[j][r] = in[r][j]
        let src = &*data;
        tmp.par_chunks_mut(rows).enumerate().for_each(|(j, out)| {
            for (r, o) in out.iter_mut().enumerate() {
                *o = src[r * n + j];
            }
        });
        std::mem::swap(data, &mut tmp);
    }
}

struct Plans {
    fwd: Option<Arc<dyn Fft<f64>>>,
    inv: Option<Arc<dyn Fft<f64>>>,
    dct: Option<Arc<dyn Dct1<f64>>>,
}

impl BoxState {
    fn side_of(l: usize, layout: Layout) -> usize {
        match layout {
            Layout::Full => l,
            Layout::Even => l / 2 + 1,
        }
    }

    fn check(d: usize, l: usize, layout: Layout, m: f64) -> Result<usize> {
        if !(1..=5).contains(&d) {
            return Err(Error::invalid(format!("box dimension {d} outside 1..=5")));
        }
        if l < 4 {
            return Err(Error::invalid("box side must be at least 4"));
        }
        if layout == Layout::Even && l % 2 != 0 {
            return Err(Error::invalid("the even layout needs an even box side"));
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::invalid("mass must be finite and non-negative"));
        }
        let n = Self::side_of(l, layout);
        let total = (n as f64).powi(d as i32);
        if total > MAX_BOX_POINTS as f64 {
            return Err(Error::CostGuard(format!("{total:.3e} modes exceed the budget {MAX_BOX_POINTS}")));
        }
        Ok(n)
    }

    /// Zero state with mass `m`.
    pub fn zeros(d: usize, l: usize, layout: Layout, m: f64) -> Result<Self> {
        let n = Self::check(d, l, layout, m)?;
        let total = n.pow(d as u32);
        let tab: Vec<f64> = (0..n).map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / l as f64).cos()).collect();
        let omega = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut w2 = m * m;
                for _ in 0..d {
                    w2 += tab[idx % n];
                    idx /= n;
                }
                w2.sqrt()
            })
            .collect();
        Ok(BoxState { d, l, layout, m, t: 0.0, u_hat: vec![Complex64::default(); total], v_hat: vec![Complex64::default(); total], omega })
    }

    /// Initial data given on the stored physical grid (`L^d` sites for the
    /// full layout, `(L/2+1)^d` for the even one), row-major.
    pub fn from_physical(d: usize, l: usize, layout: Layout, m: f64, f1: &[f64], f2: &[f64]) -> Result<Self> {
        let mut s = Self::zeros(d, l, layout, m)?;
        if f1.len() != s.u_hat.len() || f2.len() != s.u_hat.len() {
            return Err(Error::invalid(format!("initial data must have {} entries", s.u_hat.len())));
        }
        s.u_hat = s.forward(f1);
        s.v_hat = s.forward(f2);
        Ok(s)
    }

    /// `f₁ = a₁δ₀`, `f₂ = a₂δ₀`, massless.
    pub fn delta(d: usize, l: usize, layout: Layout, a1: f64, a2: f64) -> Result<Self> {
        let mut s = Self::zeros(d, l, layout, 0.0)?;
        // δ₀ has all Fourier coefficients equal to 1.
        s.u_hat.iter_mut().for_each(|c| *c = Complex64::new(a1, 0.0));
        s.v_hat.iter_mut().for_each(|c| *c = Complex64::new(a2, 0.0));
        Ok(s)
    }

    /// Points per axis of the stored grid.
    pub fn side(&self) -> usize {
        Self::side_of(self.l, self.layout)
    }

    pub fn len(&self) -> usize {
        self.u_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_hat.is_empty()
    }

    /// Number of box sites represented by each stored site.
    pub fn multiplicities(&self) -> Vec<f64> {
        let n = self.side();
        let (d, l) = (self.d, self.l);
        match self.layout {
            Layout::Full => vec![1.0; self.len()],
            Layout::Even => (0..self.len())
                .map(|mut idx| {
                    let mut w = 1.0;
                    for _ in 0..d {
                        let k = idx % n;
                        idx /= n;
                        if k != 0 && 2 * k != l {
                            w *= 2.0;
                        }
                    }
                    w
                })
                .collect(),
        }
    }

    fn plans(&self) -> Plans {
        let n = self.side();
        match self.layout {
            Layout::Full => {
                let mut p = FftPlanner::new();
                Plans { fwd: Some(p.plan_fft_forward(n)), inv: Some(p.plan_fft_inverse(n)), dct: None }
            }
            Layout::Even => Plans { fwd: None, inv: None, dct: Some(DctPlanner::new().plan_dct1(n)) },
        }
    }

    fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let (n, d) = (self.side(), self.d);
        let plans = self.plans();
        match self.layout {
            Layout::Full => {
                let fft = plans.fwd.expect("full layout has an FFT plan");
                let mut data: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                each_axis(&mut data, n, d, fft.get_inplace_scratch_len(), |row, s| fft.process_with_scratch(row, s));
                data
            }
            Layout::Even => {
                let dct = plans.dct.expect("even layout has a DCT plan");
                let mut data = f.to_vec();
                each_axis(&mut data, n, d, dct.get_scratch_len(), |row, s| {
                    dct.process_dct1_with_scratch(row, s);
                    row.iter_mut().for_each(|x| *x *= 2.0);
                });
                data.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
            }
        }
    }

    fn inverse(&self, c: &[Complex64]) -> Vec<f64> {
        let (n, d, l) = (self.side(), self.d, self.l);
        let plans = self.plans();
        match self.layout {
            Layout::Full => {
                let fft = plans.inv.expect("full layout has an FFT plan");
                let mut data = c.to_vec();
                each_axis(&mut data, n, d, fft.get_inplace_scratch_len(), |row, s| fft.process_with_scratch(row, s));
                let norm = 1.0 / (l as f64).powi(d as i32);
                data.into_iter().map(|z| z.re * norm).collect()
            }
            Layout::Even => {
                let dct = plans.dct.expect("even layout has a DCT plan");
                let mut data: Vec<f64> = c.iter().map(|z| z.re).collect();
                let scale = 2.0 / l as f64;
                each_axis(&mut data, n, d, dct.get_scratch_len(), |row, s| {
                    dct.process_dct1_with_scratch(row, s);
                    row.iter_mut().for_each(|x| *x *= scale);
                });
                data
            }
        }
    }

    pub fn physical_u(&self) -> Vec<f64> {
        self.inverse(&self.u_hat)
    }

    pub fn physical_v(&self) -> Vec<f64> {
        self.inverse(&self.v_hat)
    }

    /// Stored-grid index of a box site (folded into `{0,…,L/2}` for the even layout).
    pub fn index_of(&self, x: &[i64]) -> Result<usize> {
        if x.len() != self.d {
            return Err(Error::invalid(format!("site has {} coordinates, box has {}", x.len(), self.d)));
        }
        let (n, l) = (self.side(), self.l as i64);
        Ok(x.iter().fold(0usize, |acc, &xi| {
            let r = xi.rem_euclid(l);
            let k = match self.layout {
                Layout::Full => r,
                Layout::Even => r.min(l - r),
            };
            acc * n + k as usize
        }))
    }

    /// In-place exact linear step.
    pub fn propagate_mut(&mut self, dt: f64) {
        let omega = &self.omega;
        self.u_hat.par_iter_mut().zip(self.v_hat.par_iter_mut()).zip(omega.par_iter()).for_each(|((u, v), &w)| {
            let (s, c) = (dt * w).sin_cos();
            // sin(Δt ω)/ω → Δt at ω = 0
            let sinc = if w == 0.0 { dt } else { s / w };
            let (u0, v0) = (*u, *v);
            *u = u0 * c + v0 * sinc;
            *v = v0 * c - u0 * (w * s);
        });
        self.t += dt;
    }

    pub fn linear_propagate(&self, dt: f64) -> BoxState {
        let mut s = self.clone();
        s.propagate_mut(dt);
        s
    }

    /// `|∂ₜu|₂² + Σⱼ|u(·+eⱼ)−u(·)|₂² + m²|u|₂²`, evaluated by Parseval.
    pub fn energy(&self) -> f64 {
        let w = self.multiplicities();
        let vol = (self.l as f64).powi(self.d as i32);
        let e: f64 = self
            .u_hat
            .par_iter()
            .zip(self.v_hat.par_iter())
            .zip(self.omega.par_iter())
            .zip(w.par_iter())
            .map(|(((u, v), om), wt)| wt * (v.norm_sqr() + om * om * u.norm_sqr()))
            .sum();
        e / vol
    }

    pub fn norms(&self) -> NormSample {
        let u = self.physical_u();
        let w = self.multiplicities();
        NormSample {
            t: self.t,
            l2: lr_norm(&u, &w, 2.0).expect("valid exponent"),
            l4: lr_norm(&u, &w, 4.0).expect("valid exponent"),
            linf: lr_norm(&u, &w, f64::INFINITY).expect("valid exponent"),
            energy: self.energy(),
        }
    }

    /// `∂ₜu += Δt·|u|^{k−1}u`.
    fn kick(&mut self, dt: f64, power: u32) {
        let u = self.physical_u();
        let f: Vec<f64> = u.par_iter().map(|x| x.abs().powi(power as i32 - 1) * x).collect();
        let fh = self.forward(&f);
        self.v_hat.par_iter_mut().zip(fh.par_iter()).for_each(|(v, g)| *v += g * dt);
    }
}

/// `(Σ w|u|^r)^{1/r}`, with `r = ∞` the weighted-support maximum.
pub fn lr_norm(u: &[f64], weights: &[f64], r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::invalid(format!("norm exponent {r} below 1")));
    }
    if u.len() != weights.len() {
        return Err(Error::invalid("values and weights differ in length"));
    }
    if r.is_infinite() {
        return Ok(u.par_iter().zip(weights.par_iter()).filter(|(_, w)| **w > 0.0).map(|(x, _)| x.abs()).reduce(|| 0.0, f64::max));
    }
    let s: f64 = u.par_iter().zip(weights.par_iter()).map(|(x, w)| w * x.abs().powf(r)).sum();
    Ok(s.powf(1.0 / r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub t: f64,
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub steps: usize,
    /// Exponent `k` in `F = |u|^{k−1}u`.
    pub power: u32,
    /// Record norms every this many steps (and at the end).
    pub record_every: usize,
    /// Drop the kick, leaving the split linear flow.
    pub linear_only: bool,
    /// Reject the step size if halving it moves the final `|u|_∞` by more
    /// than this relative amount.
    pub richardson_tol: Option<f64>,
    /// Largest admissible `|f₂|₁` (small-data regime).
    pub max_data_l1: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { t_end: 1.0, steps: 20, power: 3, record_every: 1, linear_only: false, richardson_tol: None, max_data_l1: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<NormSample>,
    pub final_state: BoxState,
    /// Relative change of the final `|u|_∞` under step halving.
    pub richardson: Option<f64>,
}

fn run_split(state: &BoxState, opts: &EvolveOptions, steps: usize) -> (Vec<NormSample>, BoxState) {
    let dt = opts.t_end / steps as f64;
    let mut s = state.clone();
    let mut samples = vec![s.norms()];
    for i in 1..=steps {
        s.propagate_mut(0.5 * dt);
        if !opts.linear_only {
            s.kick(dt, opts.power);
        }
        s.propagate_mut(0.5 * dt);
        if i % opts.record_every.max(1) == 0 || i == steps {
            samples.push(s.norms());
        }
    }
    (samples, s)
}

/// Strang splitting for `∂ₜ²u − Δu = |u|^{k−1}u` up to `t_end`.
pub fn nonlinear_evolve(state: &BoxState, opts: &EvolveOptions) -> Result<Trajectory> {
    if opts.power < 3 {
        return Err(Error::invalid(format!("power k = {} must be at least 3", opts.power)));
    }
    if opts.steps == 0 || !(opts.t_end.is_finite()) {
        return Err(Error::invalid("need at least one step and a finite end time"));
    }
    if let Some(bound) = opts.max_data_l1 {
        let f2 = state.physical_v();
        let l1 = lr_norm(&f2, &state.multiplicities(), 1.0)?;
        if l1 > bound {
            return Err(Error::invalid(format!("|f2|_1 = {l1:.3e} exceeds the small-data bound {bound:.3e}")));
        }
    }
    let (samples, final_state) = run_split(state, opts, opts.steps);
    let richardson = match opts.richardson_tol {
        None => None,
        Some(tol) => {
            let (_, fine) = run_split(state, &EvolveOptions { record_every: usize::MAX, ..*opts }, 2 * opts.steps);
            let a = final_state.physical_u();
            let b = fine.physical_u();
            let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
            let diff = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale;
            if diff > tol {
                return Err(Error::NonConvergent(format!("step size rejected: halving moved |u|_inf by {diff:.3e} > {tol:.3e}")));
            }
            Some(diff)
        }
    };
    Ok(Trajectory { samples, final_state, richardson })
}

// ---------------------------------------------------------------------------
// Strichartz norms

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzIndices {
    pub q: f64,
    pub r: f64,
    pub qt: f64,
    pub rt: f64,
}

/// `1/q ≤ σ(1/2 − 1/r)`.
pub fn admissible_pair(q: f64, r: f64, sigma: f64) -> bool {
    q >= 2.0 && r >= 2.0 && 1.0 / q <= sigma * (0.5 - 1.0 / r) + 1e-15
}

impl StrichartzIndices {
    pub fn new(q: f64, r: f64, qt: f64, rt: f64) -> Result<Self> {
        if [q, r, qt, rt].iter().any(|x| !(*x >= 2.0)) {
            return Err(Error::invalid("Strichartz exponents must be at least 2"));
        }
        Ok(StrichartzIndices { q, r, qt, rt })
    }

    pub fn admissible(&self, sigma: f64) -> bool {
        admissible_pair(self.q, self.r, sigma) && admissible_pair(self.qt, self.rt, sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    /// Difference to the same rule on every other sample.
    pub err_est: f64,
}

/// `(∫ ‖u(t)‖_r^q dt)^{1/q}` by the composite trapezoid over `(t, ‖u(t)‖_r)`
/// samples; `q = ∞` gives the maximum.
pub fn strichartz_norm(samples: &[(f64, f64)], q: f64) -> Result<NormEstimate> {
    if !(q >= 1.0) {
        return Err(Error::invalid(format!("time exponent {q} below 1")));
    }
    if samples.len() < 2 || samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::invalid("need at least two samples at increasing times"));
    }
    if q.is_infinite() {
        return Ok(NormEstimate { value: samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max), err_est: 0.0 });
    }
    let trap = |pts: &[(f64, f64)]| -> f64 { pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.abs().powf(q) + w[1].1.abs().powf(q))).sum() };
    let fine = trap(samples).powf(1.0 / q);
    let err_est = if samples.len() % 2 == 1 && samples.len() >= 3 {
        let coarse: Vec<(f64, f64)> = samples.iter().step_by(2).copied().collect();
        (trap(&coarse).powf(1.0 / q) - fine).abs()
    } else {
        f64::NAN
    };
    Ok(NormEstimate { value: fine, err_est })
}

/// Finitely supported initial data `Σ a δ_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseData {
    pub f1: Vec<(Vec<i64>, f64)>,
    pub f2: Vec<(Vec<i64>, f64)>,
}

impl SparseData {
    /// `points` sites of `f₂` uniform in `[−spread, spread]^d` with weights in `[−1,1]`.
    pub fn random(d: usize, points: usize, spread: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f2 = (0..points)
            .map(|_| {
                let p: Vec<i64> = (0..d).map(|_| rng.random_range(-spread..=spread)).collect();
                (p, rng.random_range(-1.0..=1.0))
            })
            .collect();
        SparseData { f1: Vec::new(), f2 }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let sc = |v: &[(Vec<i64>, f64)]| v.iter().map(|(p, c)| (p.clone(), a * c)).collect();
        SparseData { f1: sc(&self.f1), f2: sc(&self.f2) }
    }

    /// Site norms after merging repeated sites.
    fn site_norm(v: &[(Vec<i64>, f64)], r: f64) -> f64 {
        let mut m: std::collections::BTreeMap<&[i64], f64> = std::collections::BTreeMap::new();
        for (p, c) in v {
            *m.entry(p.as_slice()).or_default() += c;
        }
        m.values().map(|c| c.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }

    /// `‖f₁‖₂ + ‖f₂‖_{10/7}`.
    pub fn data_norm(&self) -> f64 {
        Self::site_norm(&self.f1, 2.0) + Self::site_norm(&self.f2, F2_EXPONENT)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub indices: StrichartzIndices,
    pub l: usize,
    pub horizon: f64,
    pub times: Vec<f64>,
    /// `‖u(t)‖_r` per sample and time.
    pub spatial: Vec<Vec<f64>>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub max_quadrature_err: f64,
}

impl RatioReport {
    /// The same test on the shorter horizon `t_end`.
    pub fn restrict(&self, t_end: f64) -> Result<RatioReport> {
        let n = self.times.iter().take_while(|t| **t <= t_end + 1e-12).count();
        if n < 3 {
            return Err(Error::invalid("horizon too short for the stored samples"));
        }
        let times = self.times[..n].to_vec();
        let spatial: Vec<Vec<f64>> = self.spatial.iter().map(|s| s[..n].to_vec()).collect();
        finish_report(self.indices, self.l, times[n - 1], times, spatial, self.rhs.clone())
    }
}

fn finish_report(indices: StrichartzIndices, l: usize, horizon: f64, times: Vec<f64>, spatial: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<RatioReport> {
    let mut lhs = Vec::new();
    let mut max_quadrature_err = 0.0f64;
    for s in &spatial {
        let pts: Vec<(f64, f64)> = times.iter().copied().zip(s.iter().copied()).collect();
        let n = strichartz_norm(&pts, indices.q)?;
        max_quadrature_err = max_quadrature_err.max(n.err_est / n.value.max(f64::MIN_POSITIVE));
        lhs.push(n.value);
    }
    let ratios: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a / b).collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(RatioReport { indices, l, horizon, times, spatial, lhs, rhs, ratios, max_ratio, max_quadrature_err })
}

/// Samples per unit time of the time quadrature.
pub const TIME_SAMPLES_PER_UNIT: usize = 20;

/// `‖u‖_{L^q_t ℓ^r}` over `[0, T]` divided by `‖f₁‖₂ + ‖f₂‖_{10/7}` for
/// the free flow of each data sample on the box `ℤ_L^d`.
///
/// Solutions are superpositions of translates of the two kernels
/// `cos(t√−Δ)δ₀` and `sin(t√−Δ)/√−Δ δ₀`, which are even and so are
/// computed on the reduced grid.
pub fn strichartz_ratio_test(data: &[SparseData], indices: StrichartzIndices, t_end: f64, l: usize, sigma: f64) -> Result<RatioReport> {
    if !indices.admissible(sigma) {
        return Err(Error::invalid(format!("indices {indices:?} are not admissible")));
    }
    strichartz_ratios(data, indices, t_end, l)
}

/// The ratios of [`strichartz_ratio_test`] without the admissibility check.
pub fn strichartz_ratios(data: &[SparseData], indices: StrichartzIndices, t_end: f64, l: usize) -> Result<RatioReport> {
    if !(t_end > 0.0) || t_end > (l / 2) as f64 {
        return Err(Error::invalid(format!("horizon {t_end} outside (0, L/2] (wraparound guard)")));
    }
    if data.is_empty() {
        return Err(Error::invalid("no data samples"));
    }
    let d = data.iter().flat_map(|s| s.f1.iter().chain(&s.f2)).map(|p| p.0.len()).next().unwrap_or(0);
    let base = BoxState::zeros(d, l, Layout::Even, 0.0)?;
    if data.iter().any(|s| s.f1.iter().chain(&s.f2).any(|p| p.0.len() != d)) {
        return Err(Error::invalid("data samples mix dimensions"));
    }
    let rhs: Vec<f64> = data.iter().map(|s| s.data_norm()).collect();
    if rhs.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("a data sample vanishes"));
    }
    let steps = (t_end * TIME_SAMPLES_PER_UNIT as f64).ceil() as usize;
    let steps = steps + steps % 2;
    let times: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
    let n = base.side();
    let full = l.pow(d as u32);
    let folded: Vec<usize> = (0..l).map(|x| x.min(l - x)).collect();
    let mut spatial = vec![Vec::with_capacity(times.len()); data.len()];
    let mut cos_k = BoxState::delta(d, l, Layout::Even, 1.0, 0.0)?;
    let mut sin_k = BoxState::delta(d, l, Layout::Even, 0.0, 1.0)?;
    for (i, &t) in times.iter().enumerate() {
        if i > 0 {
            // Propagate from t = 0 in one step each time, so errors do not accumulate.
            cos_k = BoxState::delta(d, l, Layout::Even, 1.0, 0.0)?.linear_propagate(t);
            sin_k = BoxState::delta(d, l, Layout::Even, 0.0, 1.0)?.linear_propagate(t);
        }
        let kc = cos_k.physical_u();
        let ks = sin_k.physical_u();
        for (s, out) in data.iter().zip(spatial.iter_mut()) {
            let terms: Vec<(&[f64], &[i64], f64)> =
                s.f1.iter().map(|(p, c)| (kc.as_slice(), p.as_slice(), *c)).chain(s.f2.iter().map(|(p, c)| (ks.as_slice(), p.as_slice(), *c))).collect();
            let r = indices.r;
            let acc = (0..full / l)
                .into_par_iter()
                .map(|row| {
                    let mut x = vec![0usize; d];
                    let mut rem = row;
                    for k in (0..d - 1).rev() {
                        x[k] = rem % l;
                        rem /= l;
                    }
                    // Folded index of every term without its last coordinate.
                    let bases: Vec<usize> = terms
                        .iter()
                        .map(|(_, p, _)| (0..d - 1).fold(0usize, |a, k| a * n + folded[(x[k] as i64 - p[k]).rem_euclid(l as i64) as usize]) * n)
                        .collect();
                    let mut sum = 0.0f64;
                    for xl in 0..l {
                        let mut u = 0.0;
                        for ((kern, p, c), b) in terms.iter().zip(&bases) {
                            u += c * kern[b + folded[(xl as i64 - p[d - 1]).rem_euclid(l as i64) as usize]];
                        }
                        sum = if r.is_infinite() { sum.max(u.abs()) } else { sum + u.abs().powf(r) };
                    }
                    sum
                })
                .collect::<Vec<f64>>();
            let norm = if r.is_infinite() { acc.into_iter().fold(0.0, f64::max) } else { acc.into_iter().sum::<f64>().powf(1.0 / r) };
            out.push(norm);
        }
    }
    finish_report(indices, l, t_end, times, spatial, rhs)
}
