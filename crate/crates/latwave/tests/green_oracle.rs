//! The Green function against a direct RK4 integration of the lattice ODE
//! `ü = Δu − m²u` on a box large enough that the boundary is never felt.

use latwave::green::{green_kg, green_wave, GreenField, TorusGrid};

const R: i64 = 24;
const W: usize = (2 * R + 1) as usize;

fn idx(x: i64, y: i64) -> usize {
    ((x + R) as usize) * W + (y + R) as usize
}

fn accel(u: &[f64], m2: f64, out: &mut [f64]) {
    for x in -R..=R {
        for y in -R..=R {
            let at = |a: i64, b: i64| if a.abs() > R || b.abs() > R { 0.0 } else { u[idx(a, b)] };
            let c = u[idx(x, y)];
            out[idx(x, y)] = at(x + 1, y) + at(x - 1, y) + at(x, y + 1) + at(x, y - 1) - 4.0 * c - m2 * c;
        }
    }
}

/// `u(·,t)` with `u(0) = 0`, `u̇(0) = δ₀` by classical RK4.
fn rk4(t: f64, m: f64, steps: usize) -> Vec<f64> {
    let n = W * W;
    let (mut u, mut v) = (vec![0.0; n], vec![0.0; n]);
    v[idx(0, 0)] = 1.0;
    let h = t / steps as f64;
    let m2 = m * m;
    let mut a = vec![0.0; n];
    for _ in 0..steps {
        let (u0, v0) = (u.clone(), v.clone());
        let mut ku = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut kv = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let coef = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            let us: Vec<f64> = (0..n).map(|i| u0[i] + if s == 0 { 0.0 } else { coef[s] * h * ku[s - 1][i] }).collect();
            let vs: Vec<f64> = (0..n).map(|i| v0[i] + if s == 0 { 0.0 } else { coef[s] * h * kv[s - 1][i] }).collect();
            accel(&us, m2, &mut a);
            ku[s] = vs;
            kv[s] = a.clone();
        }
        for i in 0..n {
            u[i] = u0[i] + h / 6.0 * (ku[0][i] + 2.0 * ku[1][i] + 2.0 * ku[2][i] + ku[3][i]);
            v[i] = v0[i] + h / 6.0 * (kv[0][i] + 2.0 * kv[1][i] + 2.0 * kv[2][i] + kv[3][i]);
        }
    }
    u
}

#[test]
fn wave_matches_rk4() {
    let u = rk4(1.0, 0.0, 400);
    let grid = TorusGrid::for_point(2, 1.0, 3).unwrap();
    for x in [[0, 0], [1, 0], [1, 1], [2, 1], [3, 0]] {
        let g = green_wave(&x, 1.0, &grid).unwrap();
        assert!((g.value - u[idx(x[0], x[1])]).abs() < 1e-10, "{x:?}: {} vs {}", g.value, u[idx(x[0], x[1])]);
    }
    // Frozen reference from this oracle.
    assert!((u[idx(1, 0)] - 0.11027476324792787).abs() < 1e-10);
}

#[test]
fn klein_gordon_matches_rk4() {
    let u = rk4(2.5, 0.7, 1000);
    let grid = TorusGrid::for_point(2, 2.5, 2).unwrap();
    for x in [[0, 0], [1, 0], [2, 1]] {
        let g = green_kg(&x, 2.5, &grid, 0.7).unwrap();
        assert!((g.value - u[idx(x[0], x[1])]).abs() < 1e-9);
    }
}

#[test]
fn field_l2_matches_rk4() {
    let t = 6.0;
    let u = rk4(t, 0.0, 2000);
    let field = GreenField::compute(t, 0.0, &TorusGrid::for_field(2, t).unwrap()).unwrap();
    let direct: f64 = u.iter().map(|v| v * v).sum();
    assert!((field.l2_sq(R as usize) - direct).abs() < 1e-9 * direct);
}

#[test]
fn light_cone() {
    // Far outside |x| ≤ t the solution is tiny: |G| ≤ t^{|x|₁+1}/(|x|₁+1)! up to a factor.
    let t = 3.0;
    let grid = TorusGrid::for_point(2, t, 20).unwrap();
    let g = green_wave(&[20, 0], t, &grid).unwrap().value.abs();
    assert!(g < 1e-10, "{g}");
    let near = green_wave(&[2, 0], t, &grid).unwrap().value.abs();
    assert!(near > 1e-3);
}
