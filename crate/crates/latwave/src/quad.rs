//! One-dimensional quadrature: adaptive Gauss–Kronrod (21 points) for
//! complex integrands and Gauss–Legendre nodes.

use num_complex::Complex64;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525134961,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub err: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Single 21-point Kronrod panel on `[a,b]` with the QUADPACK error heuristic.
pub fn gk21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[10];
    let mut g = Complex64::new(0.0, 0.0);
    let mut fv = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[j] = (f1, f2);
        k += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            g += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = k * 0.5;
    let mut resabs = fc.norm() * WGK[10];
    let mut resasc = (fc - mean).norm() * WGK[10];
    for j in 0..10 {
        resabs += WGK[j] * (fv[j].0.norm() + fv[j].1.norm());
        resasc += WGK[j] * ((fv[j].0 - mean).norm() + (fv[j].1 - mean).norm());
    }
    let h = h.abs();
    let (k, g, resabs, resasc) = (k * h, g * h, resabs * h, resasc * h);
    let mut err = (k - g).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    (k, err.max(floor))
}

/// Globally adaptive integration over `[pts[0], pts[last]]`, starting from the
/// panels delimited by `pts` and bisecting the panel with the largest error.
pub fn adaptive<F: FnMut(f64) -> Complex64>(
    mut f: F,
    pts: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Integral {
    assert!(pts.len() >= 2, "need at least one panel");
    let mut segs: Vec<Segment> = pts
        .windows(2)
        .filter(|w| w[1] != w[0])
        .map(|w| {
            let (value, err) = gk21(&mut f, w[0], w[1]);
            Segment { a: w[0], b: w[1], value, err }
        })
        .collect();
    let mut evaluations = 21 * segs.len();
    loop {
        let total: Complex64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        let done = err <= abs_tol.max(rel_tol * total.norm());
        if done || segs.len() >= max_segments || segs.is_empty() {
            return Integral { value: total, err, evaluations, converged: done };
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty");
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a.min(s.b) || m >= s.a.max(s.b) {
            // Panel cannot be split further in double precision.
            let total: Complex64 = segs.iter().map(|s| s.value).sum::<Complex64>() + s.value;
            let err: f64 = segs.iter().map(|s| s.err).sum::<f64>() + s.err;
            return Integral { value: total, err, evaluations, converged: false };
        }
        let (v1, e1) = gk21(&mut f, s.a, m);
        let (v2, e2) = gk21(&mut f, m, s.b);
        evaluations += 42;
        segs.push(Segment { a: s.a, b: m, value: v1, err: e1 });
        segs.push(Segment { a: m, b: s.b, value: v2, err: e2 });
    }
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<F: FnMut(f64) -> f64>(
    mut f: F,
    pts: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> (f64, f64, bool) {
    let r = adaptive(|x| Complex64::new(f(x), 0.0), pts, abs_tol, rel_tol, max_segments);
    (r.value.re, r.err, r.converged)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk21_is_exact_on_polynomials() {
        let (v, e) = gk21(&mut |x: f64| Complex64::new(x.powi(20), x), 0.0, 1.0);
        assert!((v.re - 1.0 / 21.0).abs() < 1e-15);
        assert!((v.im - 0.5).abs() < 1e-15);
        assert!(e < 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let (v, e, ok) = adaptive_real(|x| 1.0 / x.sqrt(), &[0.0, 1.0], 1e-12, 1e-12, 500);
        assert!(ok, "err {e}");
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_oscillatory() {
        let r = adaptive(|x| Complex64::new(0.0, 50.0 * x).exp(), &[0.0, 1.0, 2.0], 1e-13, 0.0, 200);
        let exact = (Complex64::new(0.0, 100.0).exp() - 1.0) / Complex64::new(0.0, 50.0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn gauss_legendre_moments() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((m - exact).abs() < 1e-13, "n={n}");
        }
    }
}
