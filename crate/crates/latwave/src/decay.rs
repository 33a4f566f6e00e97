//! Fitting `m(t) ≈ C t^β log^p t` to sampled magnitudes.
//!
//! ```
//! use latwave::decay::{fit_decay, DecaySeries};
//!
//! let s = DecaySeries::from_fn("demo", (0..20).map(|i| 10f64.powf(1.0 + i as f64 / 8.0)), |t| {
//!     t.powf(-1.5) * t.ln()
//! })
//! .unwrap();
//! let fit = fit_decay(&s).unwrap();
//! assert_eq!(fit.p, 1);
//! assert!((fit.beta + 1.5).abs() < 1e-10);
//! ```

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `p = 1` is chosen only if its residual beats `p = 0` by this factor.
pub const LOG_SELECTION_MARGIN: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub tag: String,
    pub t: Vec<f64>,
    pub m: Vec<f64>,
}

impl DecaySeries {
    pub fn new(tag: impl Into<String>, t: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        Self::checked(tag.into(), t, m, true)
    }

    /// As [`DecaySeries::new`] but without the one-decade span requirement,
    /// for short preasymptotic windows. Fits on these are indicative only.
    pub fn short_window(tag: impl Into<String>, t: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        Self::checked(tag.into(), t, m, false)
    }

    fn checked(tag: String, t: Vec<f64>, m: Vec<f64>, decade: bool) -> Result<Self> {
        if t.len() != m.len() {
            return Err(Error::invalid("times and magnitudes differ in length"));
        }
        if t.len() < 8 {
            return Err(Error::invalid(format!("need at least 8 samples, got {}", t.len())));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("times must be strictly increasing"));
        }
        if !(t[0] > 1.0) || !t.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("times must be finite and exceed 1"));
        }
        if decade && t[t.len() - 1] < 10.0 * t[0] {
            return Err(Error::invalid("samples must span at least one decade"));
        }
        if let Some(bad) = m.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("magnitude {bad} is not positive")));
        }
        Ok(DecaySeries { tag, t, m })
    }

    pub fn from_fn(tag: impl Into<String>, ts: impl IntoIterator<Item = f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let t: Vec<f64> = ts.into_iter().collect();
        let m = t.iter().map(|&x| f(x)).collect();
        Self::new(tag, t, m)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Samples with `t ≥ t_min`, if they still form a valid series.
    pub fn restrict(&self, t_min: f64) -> Option<DecaySeries> {
        let (t, m): (Vec<f64>, Vec<f64>) = self.t.iter().zip(&self.m).filter(|(t, _)| **t >= t_min).map(|(a, b)| (*a, *b)).unzip();
        DecaySeries::new(self.tag.clone(), t, m).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub beta: f64,
    pub log_c: f64,
    /// RMS residual in log space.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub beta: f64,
    pub p: u32,
    pub c: f64,
    pub residual: f64,
    pub fit_p0: LineFit,
    pub fit_p1: LineFit,
    /// `residual(p=1) / residual(p=0)`.
    pub score: f64,
    pub window: (f64, f64),
    pub trimmed: bool,
}

/// Least squares for `log m − p log log t = log C + β log t`.
pub fn fit_fixed_p(s: &DecaySeries, p: u32) -> LineFit {
    let xs: Vec<f64> = s.t.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = s.t.iter().zip(&s.m).map(|(t, m)| m.ln() - p as f64 * t.ln().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let beta = sxy / sxx;
    let log_c = my - beta * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - log_c - beta * x).powi(2)).sum();
    LineFit { beta, log_c, residual: (rss / n).sqrt() }
}

fn fit_window(s: &DecaySeries, trimmed: bool) -> DecayFit {
    let f0 = fit_fixed_p(s, 0);
    let f1 = fit_fixed_p(s, 1);
    let use_log = f1.residual < LOG_SELECTION_MARGIN * f0.residual;
    let (f, p) = if use_log { (f1, 1) } else { (f0, 0) };
    let score = if f0.residual > 0.0 { f1.residual / f0.residual } else { f64::INFINITY };
    DecayFit {
        beta: f.beta,
        p,
        c: f.log_c.exp(),
        residual: f.residual,
        fit_p0: f0,
        fit_p1: f1,
        score,
        window: (s.t[0], s.t[s.len() - 1]),
        trimmed,
    }
}

/// Fit with `p ∈ {0,1}`. If dropping the first decade leaves a valid series
/// whose residual is less than half the full-window residual, that trimmed
/// fit is reported instead.
pub fn fit_decay(s: &DecaySeries) -> Result<DecayFit> {
    DecaySeries::checked(s.tag.clone(), s.t.clone(), s.m.clone(), false)?;
    let full = fit_window(s, false);
    if let Some(tail) = s.restrict(10.0 * s.t[0]) {
        let trimmed = fit_window(&tail, true);
        if full.residual > 2.0 * trimmed.residual {
            return Ok(trimmed);
        }
    }
    Ok(full)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    /// Mean of the last third of the scaled samples.
    pub c0: f64,
    /// Largest relative deviation from `c0` on the last third.
    pub flatness_tail: f64,
    /// Largest relative deviation from `c0` over the whole series.
    pub flatness_full: f64,
    /// `flatness_full ≤ bound`.
    pub conclusive: bool,
}

/// Plateau of already-scaled values (for instance `t^{11/6}|I|`).
pub fn sharpness_plateau(scaled: &[f64], bound: f64) -> Result<Plateau> {
    if scaled.len() < 3 {
        return Err(Error::invalid("need at least 3 samples for a plateau"));
    }
    if scaled.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite sample"));
    }
    let tail = &scaled[scaled.len() - scaled.len() / 3..];
    let c0 = tail.iter().sum::<f64>() / tail.len() as f64;
    if c0 == 0.0 {
        return Ok(Plateau { c0, flatness_tail: f64::INFINITY, flatness_full: f64::INFINITY, conclusive: false });
    }
    let dev = |xs: &[f64]| xs.iter().map(|v| ((v - c0) / c0).abs()).fold(0.0, f64::max);
    let flatness_full = dev(scaled);
    Ok(Plateau { c0, flatness_tail: dev(tail), flatness_full, conclusive: flatness_full <= bound })
}

/// Log-log slope of `|a_{i+1} − a_i|` against the midpoint abscissa.
/// Useful to measure how fast a sequence approaches its plateau.
pub fn difference_decay_slope(x: &[f64], a: &[f64]) -> Result<f64> {
    if x.len() != a.len() || x.len() < 3 {
        return Err(Error::invalid("need at least 3 matching samples"));
    }
    let pts: Vec<(f64, f64)> = x
        .windows(2)
        .zip(a.windows(2))
        .filter_map(|(xw, aw)| {
            let diff = (aw[1] - aw[0]).abs() / (xw[1] / xw[0]).ln();
            (diff > 0.0).then(|| ((xw[0] * xw[1]).sqrt().ln(), diff.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::invalid("differences vanish"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// `n` points geometrically spaced over `[a, b]`.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && a > 0.0 && b > a);
    let r = (b / a).ln() / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { b } else { a * (r * i as f64).exp() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts() -> Vec<f64> {
        geomspace(10.0, 1e4, 24)
    }

    #[test]
    fn exact_power_law() {
        let s = DecaySeries::from_fn("a", ts(), |t| t.powf(-2.0 / 3.0)).unwrap();
        let f = fit_decay(&s).unwrap();
        assert_eq!(f.p, 0);
        assert!((f.beta + 2.0 / 3.0).abs() < 1e-10);
        assert!((f.c - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exact_log_law() {
        let s = DecaySeries::from_fn("b", ts(), |t| t.powf(-1.5) * t.ln()).unwrap();
        let f = fit_decay(&s).unwrap();
        assert_eq!(f.p, 1);
        assert!((f.beta + 1.5).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_series() {
        assert!(DecaySeries::from_fn("c", geomspace(10.0, 50.0, 10), |t| 1.0 / t).is_err());
        assert!(DecaySeries::from_fn("c", geomspace(10.0, 500.0, 5), |t| 1.0 / t).is_err());
        assert!(DecaySeries::from_fn("c", ts(), |_| 0.0).is_err());
        assert!(DecaySeries::new("c", vec![2.0; 10], vec![1.0; 10]).is_err());
    }

    #[test]
    fn short_window_fits_without_trimming() {
        let t = geomspace(10.0, 60.0, 10);
        let m = t.iter().map(|t| t.powf(-1.5) * t.ln()).collect();
        let s = DecaySeries::short_window("e", t, m).unwrap();
        let f = fit_decay(&s).unwrap();
        assert_eq!((f.p, f.trimmed), (1, false));
        assert!((f.beta + 1.5).abs() < 1e-10);
    }

    #[test]
    fn trimming_discards_preasymptotic_decade() {
        // Strong transient in the first decade only.
        let s = DecaySeries::from_fn("d", geomspace(10.0, 1e4, 30), |t| t.powf(-1.0) * (1.0 + 50.0 * (-t / 5.0).exp())).unwrap();
        let f = fit_decay(&s).unwrap();
        assert!(f.trimmed);
        assert!((f.beta + 1.0).abs() < 1e-6);
    }

    #[test]
    fn plateau_of_exact_law() {
        let t = geomspace(1e3, 1e5, 12);
        let v: Vec<f64> = t.iter().map(|t| t.powf(11.0 / 6.0) * 3.0 * t.powf(-11.0 / 6.0)).collect();
        let p = sharpness_plateau(&v, 0.05).unwrap();
        assert!((p.c0 - 3.0).abs() < 1e-12);
        assert!(p.flatness_full < 1e-12);
        assert!(p.conclusive);
    }

    #[test]
    fn slowly_converging_plateau_is_inconclusive() {
        let t = geomspace(1e4, 1e5, 12);
        let v: Vec<f64> = t.iter().map(|t| 1.0 + t.powf(-1.0 / 6.0) * t.ln()).collect();
        let p = sharpness_plateau(&v, 0.05).unwrap();
        assert!(!p.conclusive);
    }

    #[test]
    fn difference_slope() {
        let x = geomspace(1e3, 1e5, 10);
        let a: Vec<f64> = x.iter().map(|x| 2.0 + x.powf(-0.5)).collect();
        assert!((difference_decay_slope(&x, &a).unwrap() + 0.5).abs() < 1e-3);
    }
}
