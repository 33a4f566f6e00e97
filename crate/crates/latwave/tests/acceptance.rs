//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs every criterion even when an earlier one fails. The process exits 0
//! once all criteria have been evaluated; set `LATWAVE_ACCEPTANCE_STRICT=1`
//! to exit 1 when any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use latwave::critical::{omega_image_stats, scan_sigma, sweep_sigma, velocity_of, SCAN_TOL};
use latwave::decay::{difference_decay_slope, fit_decay, fit_fixed_p, geomspace, sharpness_plateau, DecayFit, DecaySeries};
use latwave::evolution::{
    nonlinear_evolve, strichartz_ratio_test, BoxState, EvolveOptions, Layout, SparseData, StrichartzIndices, SIGMA_D5,
};
use latwave::green::{green_wave, sup_envelope, TorusGrid};
use latwave::newton::{karpushkin_combine, newton_distance, quad_split_shift, DecayIndex, SupportSet, WeightVector};
use latwave::osc::{
    eval_j, library_phase, p4_tilde, quad_factor_eval, reduce_p4_appendix, uniform_stability_probe, AmplitudeSpec, JOptions,
    PerturbationSpec, ProbeOptions,
};
use latwave::poly::{q, q2};

// Pinned tolerances.
const TOL_BETA_LOW_D: f64 = 0.05;
const TOL_BETA_D4: f64 = 0.1;
const TOL_BETA_D5_PROBE: f64 = 0.15;
const PLATEAU_FLATNESS: f64 = 0.05;
/// Residual must decay at least as fast as `λ^{−(1/6)(1−margin)}`.
const PLATEAU_RESIDUAL_MARGIN: f64 = 0.25;
const TOL_LIBRARY_BETA: f64 = 0.05;
const PROBE_BETA_SLACK: f64 = 0.1;
const ENERGY_DRIFT: f64 = 1e-12;
const LINEAR_VS_GREEN: f64 = 1e-8;
const NLS_STABILITY: f64 = 0.2;
const STRICHARTZ_STABILITY: f64 = 0.1;

type Outcome = Result<(bool, String), String>;

fn fit_line(f: &DecayFit) -> String {
    format!("beta={:.4} p={} (p0 {:.4}, p1 {:.4}, score {:.3}) window=[{}, {}]", f.beta, f.p, f.fit_p0.beta, f.fit_p1.beta, f.score, f.window.0, f.window.1)
}

fn sup_series(d: usize, ts: &[f64], short: bool) -> Result<DecayFit, String> {
    let mut m = Vec::new();
    for &t in ts {
        m.push(sup_envelope(t, 4, 0.0, d).map_err(|e| e.to_string())?.value);
    }
    let s = if short { DecaySeries::short_window(format!("sup-d{d}"), ts.to_vec(), m) } else { DecaySeries::new(format!("sup-d{d}"), ts.to_vec(), m) };
    fit_decay(&s.map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn ac1() -> Outcome {
    let f = sup_series(2, &geomspace(50.0, 2000.0, 12), false)?;
    Ok(((f.beta + 2.0 / 3.0).abs() <= TOL_BETA_LOW_D && f.p == 0, fit_line(&f)))
}

fn ac2() -> Outcome {
    let f = sup_series(3, &geomspace(20.0, 400.0, 10), false)?;
    Ok(((f.beta + 7.0 / 6.0).abs() <= TOL_BETA_LOW_D, fit_line(&f)))
}

fn ac3() -> Outcome {
    let f = sup_series(4, &geomspace(10.0, 60.0, 10), true)?;
    Ok(((f.beta + 1.5).abs() <= TOL_BETA_D4 && f.p == 1, fit_line(&f)))
}

fn ac4() -> Outcome {
    // |G| along the degenerate ray, enveloped over half a period of e^{itω₀}.
    let v = velocity_of(&[FRAC_PI_2; 5]).map_err(|e| e.to_string())?;
    let w0 = 10f64.sqrt();
    let ts = geomspace(8.0, 40.0, 9);
    let mut m = Vec::new();
    for &t in &ts {
        let mut best = 0.0f64;
        for k in 0..8 {
            let tk = t + k as f64 * PI / (8.0 * w0);
            let x: Vec<i64> = v.iter().map(|c| (c * tk).round() as i64).collect();
            let grid = TorusGrid::for_point(5, tk, x[0].unsigned_abs()).map_err(|e| e.to_string())?;
            best = best.max(green_wave(&x, tk, &grid).map_err(|e| e.to_string())?.value.abs());
        }
        m.push(best);
    }
    let s = DecaySeries::short_window("ray-d5", ts, m).map_err(|e| e.to_string())?;
    let f = fit_fixed_p(&s, 0);
    Ok(((f.beta + 11.0 / 6.0).abs() <= TOL_BETA_D5_PROBE, format!("beta={:.4} (p=0) residual={:.3}", f.beta, f.residual)))
}

fn ac5() -> Outcome {
    let ls = geomspace(1e3, 1e5, 7);
    let mut scaled = Vec::new();
    for &l in &ls {
        scaled.push(l.powf(4.0 / 3.0) * reduce_p4_appendix(l, 1.0).map_err(|e| e.to_string())?.value.norm());
    }
    let p = sharpness_plateau(&scaled, PLATEAU_FLATNESS).map_err(|e| e.to_string())?;
    let slope = difference_decay_slope(&ls, &scaled).map_err(|e| e.to_string())?;
    let bound = -(1.0 / 6.0) * (1.0 - PLATEAU_RESIDUAL_MARGIN);
    let ok = p.conclusive && p.c0 > 0.0 && slope <= bound;
    Ok((ok, format!("c0={:.6} flatness={:.2e} residual slope={:.3} (bound {:.3})", p.c0, p.flatness_full, slope, bound)))
}

fn ac6() -> Outcome {
    let amp = AmplitudeSpec::gaussian(4, 0.1).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut worst = 0.0f64;
    for l in [10.0, 20.0, 50.0] {
        let a = reduce_p4_appendix(l, 0.1).map_err(|e| e.to_string())?;
        let j = eval_j(l, &p4_tilde(), &amp, &JOptions::default()).map_err(|e| e.to_string())?;
        let gap = (a.value - j.value).norm();
        ok &= gap <= a.err_est + j.err_est;
        worst = worst.max(gap / (a.err_est + j.err_est));
    }
    Ok((ok, format!("max |gap|/(err sum) = {worst:.3}")))
}

fn ac7() -> Outcome {
    let ts = geomspace(10.0, 1e4, 13);
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ["fold", "cusp", "d4", "t444", "u12"] {
        let ph = library_phase(id).map_err(|e| e.to_string())?;
        let amp = AmplitudeSpec::product_bump(ph.d, 0.5).map_err(|e| e.to_string())?;
        let mut m = Vec::new();
        for &t in &ts {
            let j = if ph.parts.is_empty() {
                eval_j(t, &ph.poly(), &amp, &JOptions::default())
            } else {
                quad_factor_eval(t, &ph.part_polys(), &amp, &JOptions::default())
            };
            m.push(j.map_err(|e| e.to_string())?.value.norm());
        }
        let f = fit_decay(&DecaySeries::new(id, ts.clone(), m).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let beta = *ph.index.beta.numer() as f64 / *ph.index.beta.denom() as f64;
        let hit = (f.beta - beta).abs() <= TOL_LIBRARY_BETA && f.p == ph.index.p;
        ok &= hit;
        parts.push(format!("{id} {} beta={:.4} p={}{}", ph.index, f.beta, f.p, if hit { "" } else { " MISS" }));
    }
    Ok((ok, parts.join("; ")))
}

fn ac8() -> Outcome {
    let s22 = SupportSet::new(2, [vec![2, 2]]).map_err(|e| e.to_string())?;
    let pt = SupportSet::of(&p4_tilde()).map_err(|e| e.to_string())?;
    let p4 = SupportSet::of(&library_phase("p4").map_err(|e| e.to_string())?.poly()).map_err(|e| e.to_string())?;
    let got = [newton_distance(&s22), newton_distance(&pt), newton_distance(&p4)];
    let want = [q(2), q2(3, 4), q2(6, 11)];
    Ok((got == want, format!("{} {} {}", got[0], got[1], got[2])))
}

fn ac9() -> Outcome {
    let i = DecayIndex::frac;
    let a3 = WeightVector::parse("1/3,1/3,1/3").map_err(|e| e.to_string())?;
    let a4 = WeightVector::parse("1/3,1/3,1/3,1/3").map_err(|e| e.to_string())?;
    let f3 = karpushkin_combine(&a3, i(-5, 6, 0), Some(i(-1, 1, 0)));
    let pt = karpushkin_combine(&a4, i(-4, 3, 0), None);
    let p3 = quad_split_shift(i(-1, 1, 1), 2);
    let p4 = quad_split_shift(pt, 1);
    let ok = f3 == i(-5, 6, 0) && pt == i(-4, 3, 0) && p3 == i(-2, 1, 1) && p4 == i(-11, 6, 0);
    Ok((ok, format!("F3 {f3}, P4~ {pt}, P3 {p3}, P4 {p4}")))
}

fn ac10() -> Outcome {
    let e = |e: latwave::Error| e.to_string();
    let c4 = scan_sigma(5, 4, 4, SCAN_TOL).map_err(e)?;
    let c3 = scan_sigma(5, 3, 4, SCAN_TOL).map_err(e)?;
    let c5 = scan_sigma(5, 5, 4, SCAN_TOL).map_err(e)?;
    let sweep = sweep_sigma(5, 3, 16, SCAN_TOL).map_err(e)?;
    let all_pi2 = c4.records.len() == 1 && c4.records[0].xi.iter().all(|x| *x == FRAC_PI_2);
    let sweep_ok = !sweep.is_empty() && sweep.iter().all(|r| r.corank == 3 && r.near_half_pi(1e-12) == 4);
    let mut recs = c4.records.clone();
    recs.extend(c3.records.iter().cloned());
    recs.extend(sweep.iter().cloned());
    let stats = omega_image_stats(&recs).map_err(e)?;
    let ok = all_pi2 && c3.structure_ok && sweep_ok && c5.records.is_empty() && stats.max_speed < 1.0;
    Ok((
        ok,
        format!(
            "corank4 {} at all-pi/2: {all_pi2}; corank3 lattice {} sweep {} ok: {sweep_ok}; corank5 {}; max|v|={:.6}",
            c4.records.len(),
            c3.records.len(),
            sweep.len(),
            c5.records.len(),
            stats.max_speed
        ),
    ))
}

fn ac11() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (id, ts) in [("t444", geomspace(100.0, 2000.0, 8)), ("d4", geomspace(100.0, 1e4, 9))] {
        let ph = library_phase(id).map_err(|e| e.to_string())?;
        let amp = AmplitudeSpec::product_bump(ph.d, 0.5).map_err(|e| e.to_string())?;
        let spec = PerturbationSpec { d: ph.d, r: 0.5, eps: 1e-3, degree: 4, seed: 0 };
        let probe = ProbeOptions { t: ts, trials: 10, base_seed: 1, centers_per_trial: 1, newton_starts: 5 };
        let r = uniform_stability_probe(&ph.poly(), &spec, &amp, &probe, &JOptions::default()).map_err(|e| e.to_string())?;
        let cap = r.unperturbed.beta + PROBE_BETA_SLACK;
        let hit = r.worst_beta < cap || (r.worst_beta == cap && r.worst_p <= r.unperturbed.p);
        ok &= hit;
        parts.push(format!("{id} unperturbed ({:.4},{}) worst ({:.4},{})", r.unperturbed.beta, r.unperturbed.p, r.worst_beta, r.worst_p));
    }
    Ok((ok, parts.join("; ")))
}

fn ac12() -> Outcome {
    let e = |e: latwave::Error| e.to_string();
    // Linear energy over many steps.
    let s = BoxState::delta(3, 32, Layout::Full, 1.0, 0.5).map_err(e)?;
    let lin = EvolveOptions { t_end: 50.0, steps: 1000, power: 3, record_every: 1000, linear_only: true, richardson_tol: None, max_data_l1: None };
    let tr = nonlinear_evolve(&s, &lin).map_err(e)?;
    let e0 = tr.samples[0].energy;
    let drift = tr.samples.iter().map(|x| ((x.energy - e0) / e0).abs()).fold(0.0, f64::max);

    // Box propagator against the lattice Green function.
    let b = BoxState::delta(2, 64, Layout::Full, 0.0, 1.0).map_err(e)?.linear_propagate(1.0);
    let u = b.physical_u();
    let grid = TorusGrid::for_point(2, 1.0, 5).map_err(e)?;
    let mut gap = 0.0f64;
    for x1 in -5i64..=5 {
        for x2 in -5i64..=5 {
            let g = green_wave(&[x1, x2], 1.0, &grid).map_err(e)?.value;
            gap = gap.max((u[b.index_of(&[x1, x2]).map_err(e)?] - g).abs());
        }
    }

    let nls = |eps: f64, steps: usize| -> Result<f64, String> {
        let s = BoxState::delta(5, 32, Layout::Even, 0.0, eps).map_err(e)?;
        let o = EvolveOptions { t_end: 12.0, steps, power: 3, record_every: 1, linear_only: false, richardson_tol: None, max_data_l1: None };
        let tr = nonlinear_evolve(&s, &o).map_err(e)?;
        Ok(tr.samples.iter().map(|s| (1.0 + s.t).powf(SIGMA_D5) * s.linf / eps).fold(0.0, f64::max))
    };
    let base = nls(1e-3, 120)?;
    let half_eps = nls(5e-4, 120)?;
    let half_dt = nls(1e-3, 240)?;
    let rel = ((half_eps - base) / base).abs().max(((half_dt - base) / base).abs());
    let ok = drift <= ENERGY_DRIFT && gap <= LINEAR_VS_GREEN && base.is_finite() && rel <= NLS_STABILITY;
    Ok((ok, format!("energy drift {drift:.2e}; |box - G| {gap:.2e}; sup scaled {base:.6} (half eps {half_eps:.6}, half dt {half_dt:.6})")))
}

fn ac13() -> Outcome {
    let e = |e: latwave::Error| e.to_string();
    let data: Vec<SparseData> = (0..20).map(|i| SparseData::random(5, 3, 2, 1 + i)).collect();
    let idx = StrichartzIndices::new(4.0, 4.0, 4.0, 4.0).map_err(e)?;
    let r8 = strichartz_ratio_test(&data, idx, 8.0, 16, SIGMA_D5).map_err(e)?;
    let r4 = r8.restrict(4.0).map_err(e)?;
    let rel = ((r8.max_ratio - r4.max_ratio) / r4.max_ratio).abs();
    let ok = r8.max_ratio.is_finite() && r4.max_ratio > 0.0 && rel <= STRICHARTZ_STABILITY;
    Ok((ok, format!("max ratio T=4 {:.6}, T=8 {:.6}, change {:.2e}", r4.max_ratio, r8.max_ratio, rel)))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("d=2 sup decay", ac1),
        ("d=3 sup decay", ac2),
        ("d=4 sup decay with log", ac3),
        ("d=5 ray probe", ac4),
        ("reduced P4 plateau", ac5),
        ("reduced P4 vs direct sum", ac6),
        ("phase library exponents", ac7),
        ("Newton distances", ac8),
        ("index calculus", ac9),
        ("critical structure d=5", ac10),
        ("perturbation probe", ac11),
        ("evolution", ac12),
        ("Strichartz ratio", ac13),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("AC{:<2} {} {name}: {detail} [{:.1}s]", n + 1, if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/13 passed", 13 - failed);
    if failed > 0 && std::env::var("LATWAVE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
