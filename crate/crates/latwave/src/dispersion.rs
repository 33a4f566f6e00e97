//! The lattice dispersion relation `ω(ξ) = (Σⱼ 2 − 2cos ξⱼ + m²)^{1/2}`.
//!
//! ```
//! use latwave::dispersion::Dispersion;
//! use std::f64::consts::FRAC_PI_2;
//!
//! let rel = Dispersion::wave(5).unwrap();
//! let xi0 = [FRAC_PI_2; 5];
//! assert!((rel.omega(&xi0) - 10f64.sqrt()).abs() < 1e-15);
//! assert_eq!(rel.corank(&xi0, 1e-8).unwrap(), 4);
//! ```

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_CORANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    d: usize,
    m: f64,
}

/// Reduce an angle into `[−π, π]`, rounding ties to even.
pub fn reduce_angle(x: f64) -> f64 {
    x - TAU * (x / TAU).round_ties_even()
}

impl Dispersion {
    pub fn new(d: usize, m: f64) -> Result<Self> {
        if !(1..=5).contains(&d) {
            return Err(Error::invalid(format!("dimension {d} outside 1..=5")));
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::invalid(format!("mass {m} must be finite and >= 0")));
        }
        Ok(Dispersion { d, m })
    }

    pub fn wave(d: usize) -> Result<Self> {
        Self::new(d, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    /// `ω(ξ)²`. Terms are summed in sorted order so the result is bitwise
    /// invariant under signed permutations of `ξ`.
    pub fn omega_sq(&self, xi: &[f64]) -> f64 {
        assert_eq!(xi.len(), self.d, "torus point has wrong dimension");
        let mut terms = [0.0f64; 5];
        for (t, &x) in terms.iter_mut().zip(xi) {
            *t = 2.0 - 2.0 * x.abs().cos();
        }
        let terms = &mut terms[..self.d];
        terms.sort_by(f64::total_cmp);
        terms.iter().sum::<f64>() + self.m * self.m
    }

    pub fn omega(&self, xi: &[f64]) -> f64 {
        self.omega_sq(xi).sqrt()
    }

    fn check_regular(&self, xi: &[f64]) -> Result<f64> {
        let w = self.omega(xi);
        if w == 0.0 {
            return Err(Error::Singular("ω vanishes at ξ = 0 for m = 0".into()));
        }
        Ok(w)
    }

    /// `∇ω(ξ)ⱼ = sin ξⱼ / ω(ξ)`; this is also the group velocity.
    pub fn grad(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let w = self.check_regular(xi)?;
        Ok(xi.iter().map(|x| x.sin() / w).collect())
    }

    /// `Hess ω = diag(cos ξ)/ω − (sin ξ)(sin ξ)ᵀ/ω³`.
    pub fn hessian(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        let w = self.check_regular(xi)?;
        let s: Vec<f64> = xi.iter().map(|x| x.sin()).collect();
        let w3 = w * w * w;
        Ok(DMatrix::from_fn(self.d, self.d, |i, j| {
            let diag = if i == j { xi[i].cos() / w } else { 0.0 };
            diag - s[i] * s[j] / w3
        }))
    }

    /// Eigenvalues of `Hess ω(ξ)`, sorted by absolute value.
    pub fn hessian_eigenvalues(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hessian(xi)?).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        Ok(ev)
    }

    /// Corank of `Hess_ξ φ(v,ξ) = −Hess ω(ξ)`: eigenvalues with
    /// `|λ| ≤ tol·max(1, spectral radius)`.
    pub fn corank(&self, xi: &[f64], tol: f64) -> Result<usize> {
        if !(tol > 0.0) {
            return Err(Error::invalid("corank tolerance must be positive"));
        }
        let ev = self.hessian_eigenvalues(xi)?;
        let radius = ev.last().map_or(0.0, |l| l.abs());
        let thr = tol * radius.max(1.0);
        Ok(ev.iter().filter(|l| l.abs() <= thr).count())
    }

    /// The phase `φ(v,ξ) = v·ξ − ω(ξ)`.
    pub fn phase(&self, v: &[f64], xi: &[f64]) -> f64 {
        v.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() - self.omega(xi)
    }

    /// `ξ` with every component reduced into `[−π, π]`.
    pub fn normalize(&self, xi: &[f64]) -> Vec<f64> {
        xi.iter().map(|&x| if (-PI..=PI).contains(&x) { x } else { reduce_angle(x) }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn omega_examples() {
        let r = Dispersion::wave(5).unwrap();
        assert_eq!(r.omega(&[0.0; 5]), 0.0);
        assert!((r.omega(&[PI; 5]) - 20f64.sqrt()).abs() < 1e-14);
        assert!((r.omega(&[FRAC_PI_2; 5]) - 10f64.sqrt()).abs() < 1e-14);
        let kg = Dispersion::new(2, 1.5).unwrap();
        assert_eq!(kg.omega(&[0.0, 0.0]), 1.5);
    }

    #[test]
    fn grad_examples() {
        let r = Dispersion::wave(5).unwrap();
        for g in r.grad(&[FRAC_PI_2; 5]).unwrap() {
            assert!((g - 0.1f64.sqrt()).abs() < 1e-15);
        }
        for g in r.grad(&[PI; 5]).unwrap() {
            assert!(g.abs() < 1e-15);
        }
        let r2 = Dispersion::wave(2).unwrap();
        let g = r2.grad(&[FRAC_PI_2, PI]).unwrap();
        assert!((g[0] - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!(g[1].abs() < 1e-15);
        assert!(matches!(r.grad(&[0.0; 5]), Err(Error::Singular(_))));
    }

    #[test]
    fn corank_examples() {
        let r = Dispersion::wave(5).unwrap();
        assert_eq!(r.corank(&[FRAC_PI_2; 5], 1e-8).unwrap(), 4);
        let xi = [FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 1.0, 1.0];
        assert_eq!(r.corank(&xi, 1e-8).unwrap(), 2);
        assert_eq!(r.corank(&[1.0; 5], 1e-8).unwrap(), 0);
        assert!(r.corank(&[0.0; 5], 1e-8).is_err());
    }

    #[test]
    fn reduce_ties_to_even() {
        assert_eq!(reduce_angle(0.5), 0.5);
        assert!((reduce_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        // x/2π = 0.5 exactly rounds to 0, so π stays π.
        assert_eq!(reduce_angle(PI), PI);
        assert_eq!(reduce_angle(-PI), -PI);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Dispersion::new(0, 0.0).is_err());
        assert!(Dispersion::new(6, 0.0).is_err());
        assert!(Dispersion::new(2, -1.0).is_err());
        assert!(Dispersion::new(2, f64::NAN).is_err());
    }
}
