//! Degenerate critical points of `φ(v,ξ) = v·ξ − ω(ξ)`.
//!
//! `ξ` is critical for `v` exactly when `v = ∇ω(ξ)`, so every torus point
//! other than the origin is critical for one velocity. The Hessian
//! `−Hess ω(ξ)` has a kernel containing every vector supported on the
//! coordinates equal to `π/2` with zero sum, which is where the `Σ_k`
//! structure comes from.
//!
//! ```
//! use latwave::critical::velocity_of;
//! use std::f64::consts::FRAC_PI_2;
//!
//! let v = velocity_of(&[FRAC_PI_2; 5]).unwrap();
//! assert!(v.iter().all(|c| (c - 0.1f64.sqrt()).abs() < 1e-15));
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{Dispersion, DEFAULT_CORANK_TOL};
use crate::{Error, Result};

/// `v = ∇ω(ξ)`.
pub fn velocity_of(xi: &[f64]) -> Result<Vec<f64>> {
    Dispersion::wave(xi.len())?.grad(xi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRecord {
    pub xi: Vec<f64>,
    pub v: Vec<f64>,
    pub corank: usize,
    pub speed: f64,
    /// Smallest `|λ|` among the Hessian eigenvalues outside the kernel.
    pub min_nonzero_eig: f64,
    /// Corank is the same at tolerance `1e−10` and `1e−6`.
    pub stable: bool,
}

impl CriticalRecord {
    pub fn at(xi: &[f64], tol: f64) -> Result<Self> {
        let rel = Dispersion::wave(xi.len())?;
        let v = rel.grad(xi)?;
        let ev = rel.hessian_eigenvalues(xi)?;
        let corank = rel.corank(xi, tol)?;
        let stable = rel.corank(xi, 1e-10)? == rel.corank(xi, 1e-6)?;
        let min_nonzero_eig = ev.get(corank).map_or(f64::NAN, |l| l.abs());
        let speed = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        Ok(CriticalRecord { xi: xi.to_vec(), v, corank, speed, min_nonzero_eig, stable })
    }

    /// `|∇_ξ φ(v,ξ)|` re-evaluated from the stored `v`.
    pub fn gradient_residual(&self) -> f64 {
        let g = velocity_of(&self.xi).expect("record is away from the origin");
        g.iter().zip(&self.v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    pub fn near_half_pi(&self, tol: f64) -> usize {
        self.xi.iter().filter(|x| (x.abs() - FRAC_PI_2).abs() <= tol).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaScan {
    pub d: usize,
    pub k: usize,
    pub resolution: usize,
    pub records: Vec<CriticalRecord>,
    /// Number of scan-lattice points with exactly `k+1` coordinates at `π/2`.
    pub predicted: Option<u64>,
    /// Every record has exactly `k+1` coordinates at `π/2`.
    pub structure_ok: bool,
    pub scanned: usize,
}

/// Scan lattice coordinate `jπ/(2R)`, with `j = R` mapped to the exact `π/2`.
fn lattice_coord(j: usize, r: usize) -> f64 {
    if j == r {
        FRAC_PI_2
    } else if j == 2 * r {
        PI
    } else {
        j as f64 * PI / (2 * r) as f64
    }
}

fn sorted_tuples(len: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    fn rec(k: usize, start: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for j in start..len {
            cur[k] = j;
            rec(k + 1, j, len, cur, out);
        }
    }
    rec(0, 0, len, &mut cur, &mut out);
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Points of corank `k` on the sorted lattice `{jπ/(2R)}^d ∩ [0,π]^d`
/// (one representative per permutation orbit; the origin excluded).
pub fn scan_sigma(d: usize, k: usize, resolution: usize, tol: f64) -> Result<SigmaScan> {
    Dispersion::wave(d)?;
    if k == 0 || k > d {
        return Err(Error::invalid(format!("corank {k} outside 1..={d}")));
    }
    if resolution < 2 {
        return Err(Error::invalid("scan resolution must be at least 2"));
    }
    let r = resolution;
    let tuples = sorted_tuples(2 * r + 1, d);
    let scanned = tuples.len() - 1;
    let mut records: Vec<CriticalRecord> = tuples
        .par_iter()
        .filter(|t| t.iter().any(|&j| j != 0))
        .map(|t| {
            let xi: Vec<f64> = t.iter().map(|&j| lattice_coord(j, r)).collect();
            CriticalRecord::at(&xi, tol)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|rec| rec.corank == k)
        .collect();
    records.sort_by(|a, b| a.xi.iter().zip(&b.xi).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    let predicted = if k >= 2 {
        let s = (d as u64).saturating_sub(k as u64 + 1);
        Some(if k + 1 > d { 0 } else { binomial(2 * r as u64 + s - 1, s) })
    } else {
        None
    };
    let structure_ok = k < 2 || records.iter().all(|rec| rec.near_half_pi(tol) == k + 1);
    if let Some(p) = predicted {
        if (records.len() as u64) < p {
            return Err(Error::NonConvergent(format!("found {} corank-{k} points, expected {p}: resolution too coarse", records.len())));
        }
    }
    Ok(SigmaScan { d, k, resolution, records, predicted, structure_ok, scanned })
}

/// `k+1` coordinates at `π/2`, the last `d−k−1` sweeping `samples` interior
/// values of `(0,π)` that avoid `π/2`.
pub fn sweep_sigma(d: usize, k: usize, samples: usize, tol: f64) -> Result<Vec<CriticalRecord>> {
    if k + 1 > d {
        return Err(Error::invalid(format!("corank {k} needs {} coordinates at π/2", k + 1)));
    }
    let free = d - k - 1;
    let mut out = Vec::new();
    for i in 0..samples {
        let mut s = PI * (i as f64 + 0.5) / samples as f64;
        if (s - FRAC_PI_2).abs() < 1e-3 {
            s += 2e-3;
        }
        let mut xi = vec![FRAC_PI_2; k + 1];
        xi.extend(std::iter::repeat(s).take(free));
        // Vary the free coordinates independently when there are several.
        for (j, x) in xi.iter_mut().skip(k + 1).enumerate() {
            *x = (s + 0.37 * j as f64) % PI;
            if (*x - FRAC_PI_2).abs() < 1e-3 || *x < 1e-3 {
                *x += 2e-3;
            }
        }
        out.push(CriticalRecord::at(&xi, tol)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaStats {
    pub max_speed: f64,
    /// `(i, j, min distance between Ω_i and Ω_j samples)`, over signed permutations.
    pub separations: Vec<(usize, usize, f64)>,
}

fn orbit_key(v: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = v.iter().map(|c| c.abs()).collect();
    a.sort_by(f64::total_cmp);
    a
}

/// Largest `|v|` and pairwise separations between coranks. Two velocity
/// orbits are compared by their sorted absolute values, which gives the
/// minimal distance over signed permutations.
pub fn omega_image_stats(records: &[CriticalRecord]) -> Result<OmegaStats> {
    if records.is_empty() {
        return Err(Error::invalid("no critical records"));
    }
    let max_speed = records.iter().map(|r| r.speed).fold(0.0, f64::max);
    let mut ks: Vec<usize> = records.iter().map(|r| r.corank).collect();
    ks.sort_unstable();
    ks.dedup();
    let keys: Vec<(usize, Vec<f64>)> = records.iter().map(|r| (r.corank, orbit_key(&r.v))).collect();
    let mut separations = Vec::new();
    for (a, &i) in ks.iter().enumerate() {
        for &j in &ks[a + 1..] {
            let mut best = f64::INFINITY;
            for (_, vi) in keys.iter().filter(|(k, _)| *k == i) {
                for (_, vj) in keys.iter().filter(|(k, _)| *k == j) {
                    let dist = vi.iter().zip(vj).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                    best = best.min(dist);
                }
            }
            separations.push((i, j, best));
        }
    }
    Ok(OmegaStats { max_speed, separations })
}

/// `DEFAULT_CORANK_TOL`, re-exported for callers of the scan.
pub const SCAN_TOL: f64 = DEFAULT_CORANK_TOL;
