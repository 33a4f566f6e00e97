//! Subcommand arguments and their implementations.

use std::fmt::Write as _;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use latwave::critical::{omega_image_stats, scan_sigma, sweep_sigma, CriticalRecord};
use latwave::decay::{difference_decay_slope, fit_decay, geomspace, sharpness_plateau, DecayFit, DecaySeries};
use latwave::evolution::{
    admissible_pair, nonlinear_evolve, strichartz_ratios, BoxState, EvolveOptions, Layout, SparseData, StrichartzIndices, SIGMA_D5,
};
use latwave::green::{check_c_grid, green_kg, green_wave, sup_envelope, TorusGrid};
use latwave::newton::{
    classify_binary_quartic, is_adapted_2d, karpushkin_combine, newton_distance, principal_face, quad_split_shift, Adaptedness, DecayIndex,
    SupportSet, WeightVector,
};
use latwave::osc::{
    eval_j, library_phase, phase_library, quad_factor_eval, reduce_p4_appendix, uniform_stability_probe, AmplitudeKind, AmplitudeSpec, JOptions,
    PerturbationSpec, ProbeOptions,
};
use latwave::poly::{parse_rational, Poly, Q};

#[derive(Debug)]
pub enum CliError {
    Lib(latwave::Error),
    Usage(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "invalid input: {s}"),
            CliError::Io(s) => write!(f, "{s}"),
        }
    }
}

impl From<latwave::Error> for CliError {
    fn from(e: latwave::Error) -> Self {
        CliError::Lib(e)
    }
}

type Res<T> = Result<T, CliError>;

#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub stdout: String,
}

impl Outputs {
    fn file(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body.into_bytes()));
    }

    fn json(&mut self, name: &str, v: &serde_json::Value) {
        self.file(name, serde_json::to_string_pretty(v).expect("json serializes") + "\n");
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn fit_json(f: &DecayFit) -> serde_json::Value {
    json!({
        "beta": f.beta,
        "p": f.p,
        "C": f.c,
        "residual": f.residual,
        "window": [f.window.0, f.window.1],
        "score": f.score,
        "trimmed": f.trimmed,
    })
}

fn time_list(t: &[f64], t_min: Option<f64>, t_max: Option<f64>, count: usize) -> Res<Vec<f64>> {
    match (t.is_empty(), t_min, t_max) {
        (false, None, None) => Ok(t.to_vec()),
        (true, Some(a), Some(b)) if a > 0.0 && b > a && count >= 2 => Ok(geomspace(a, b, count)),
        (true, Some(_), Some(_)) => Err(CliError::Usage("need 0 < t-min < t-max and count >= 2".into())),
        _ => Err(CliError::Usage("give either a time list or both t-min and t-max".into())),
    }
}

fn parse_q(s: &str) -> Res<Q> {
    Ok(parse_rational(s.trim())?)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenArgs {
    #[arg(long)]
    pub d: usize,
    /// Times, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub t: Vec<f64>,
    /// Lattice point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<i64>,
    /// Klein–Gordon mass.
    #[arg(long, default_value_t = 0.0)]
    pub m: f64,
    /// Fixed torus grid size instead of the automatic rule.
    #[arg(long)]
    pub n: Option<usize>,
    /// Flag rows whose grid is below `c·|t|`.
    #[arg(long)]
    pub c_grid: Option<f64>,
}

pub fn green(a: &GreenArgs) -> Res<Outputs> {
    if a.x.len() != a.d {
        return Err(CliError::Usage(format!("--x has {} coordinates, --d is {}", a.x.len(), a.d)));
    }
    let xmax = a.x.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let mut csv = String::from("d,m,t,");
    for i in 1..=a.d {
        write!(csv, "x{i},").unwrap();
    }
    csv.push_str("value,errEst,N\n");
    let mut warnings = 0;
    for &t in &a.t {
        let grid = match a.n {
            Some(n) => TorusGrid::new(a.d, n)?,
            None => TorusGrid::for_point(a.d, t, xmax)?,
        };
        let mut s = if a.m == 0.0 { green_wave(&a.x, t, &grid)? } else { green_kg(&a.x, t, &grid, a.m)? };
        if let Some(c) = a.c_grid {
            s = check_c_grid(s, c);
            warnings += s.coarse_warning as usize;
        }
        write!(csv, "{},{},{},", a.d, g17(a.m), g17(t)).unwrap();
        for x in &a.x {
            write!(csv, "{x},").unwrap();
        }
        writeln!(csv, "{},{},{}", g17(s.value), g17(s.err_est), s.grid.n).unwrap();
    }
    let mut o = Outputs::default();
    if warnings > 0 {
        eprintln!("warning: {warnings} row(s) use a grid coarser than the requested c-grid");
    }
    o.stdout = csv.clone();
    o.file("green.csv", csv);
    Ok(o)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupDecayArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub t_min: f64,
    #[arg(long)]
    pub t_max: f64,
    /// Number of geometrically spaced times.
    #[arg(long, default_value_t = 12)]
    pub count: usize,
    /// Time offsets per sample used for the envelope.
    #[arg(long, default_value_t = 4)]
    pub envelope: usize,
    #[arg(long, default_value_t = 0.0)]
    pub m: f64,
}

pub fn sup_decay(a: &SupDecayArgs) -> Res<Outputs> {
    let ts = time_list(&[], Some(a.t_min), Some(a.t_max), a.count)?;
    let mut csv = String::from("t,");
    for i in 1..=a.d {
        write!(csv, "x{i},").unwrap();
    }
    csv.push_str("value,errEst,N\n");
    let mut mags = Vec::new();
    for &t in &ts {
        let r = sup_envelope(t, a.envelope, a.m, a.d)?;
        write!(csv, "{},", g17(r.t)).unwrap();
        for x in &r.x {
            write!(csv, "{x},").unwrap();
        }
        writeln!(csv, "{},{},{}", g17(r.value), g17(r.err_est), r.grid.n).unwrap();
        mags.push(r.value);
    }
    let fit = fit_decay(&DecaySeries::new(format!("sup-d{}", a.d), ts, mags)?)?;
    let mut o = Outputs::default();
    o.stdout = format!("beta = {}, p = {}\n", g17(fit.beta), fit.p);
    o.file("sup.csv", csv);
    o.json("decay.json", &fit_json(&fit));
    Ok(o)
}

// ---------------------------------------------------------------------------

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmpKind {
    ProductBump,
    RadialBump,
    Gaussian,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscintArgs {
    /// Library phase id (see `phase-library.json`).
    #[arg(long)]
    pub phase: Option<String>,
    /// Polynomial phase in z1, z2, …
    #[arg(long)]
    pub expr: Option<String>,
    /// Number of variables of `--expr`.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 12)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = AmpKind::ProductBump)]
    pub amp: AmpKind,
    /// Bump radius, or σ for the Gaussian.
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Evaluate library phases as one integral even when they split.
    #[arg(long)]
    pub no_factor: bool,
    #[arg(long, default_value_t = 1e-7)]
    pub rel_tol: f64,
    /// Run the perturbation stability probe over the time list.
    #[arg(long)]
    pub probe: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 10)]
    pub trials: u64,
    #[arg(long, default_value_t = 4)]
    pub degree: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn oscint(a: &OscintArgs) -> Res<Outputs> {
    let (id, poly, parts) = match (&a.phase, &a.expr) {
        (Some(id), None) => {
            let ph = library_phase(id)?;
            let parts = if a.no_factor { Vec::new() } else { ph.part_polys() };
            (id.clone(), ph.poly(), parts)
        }
        (None, Some(e)) => ("expr".to_string(), Poly::parse(e, a.d)?, Vec::new()),
        _ => return Err(CliError::Usage("give exactly one of --phase and --expr".into())),
    };
    let d = poly.dim();
    let kind = match a.amp {
        AmpKind::ProductBump => AmplitudeKind::ProductBump,
        AmpKind::RadialBump => AmplitudeKind::RadialBump,
        AmpKind::Gaussian => AmplitudeKind::Gaussian,
    };
    let amp = AmplitudeSpec::new(kind, vec![a.radius; d])?;
    let opts = JOptions { rel_tol: a.rel_tol, ..JOptions::default() };
    let ts = time_list(&a.t, a.t_min, a.t_max, a.count)?;
    let mut o = Outputs::default();
    o.json("phase-library.json", &serde_json::to_value(phase_library()).expect("library serializes"));
    if a.probe {
        let spec = PerturbationSpec { d, r: a.radius, eps: a.eps, degree: a.degree, seed: a.seed };
        let probe = ProbeOptions { t: ts, trials: a.trials, base_seed: a.seed, centers_per_trial: 1, newton_starts: 5 };
        let rep = uniform_stability_probe(&poly, &spec, &amp, &probe, &opts)?;
        o.stdout = format!("worst beta = {}, p = {}\n", g17(rep.worst_beta), rep.worst_p);
        let fits: Vec<_> = rep.fits.iter().map(|f| json!({"seed": f.seed, "center": f.center, "fit": fit_json(&f.fit)})).collect();
        o.json(
            "probe.json",
            &json!({"phase": id, "eps": a.eps, "unperturbed": fit_json(&rep.unperturbed), "worst": {"beta": rep.worst_beta, "p": rep.worst_p}, "fits": fits}),
        );
        return Ok(o);
    }
    let mut csv = String::from("phase-id,t,ReJ,ImJ,errEst\n");
    let mut mags = Vec::new();
    for &t in &ts {
        let j = if parts.is_empty() { eval_j(t, &poly, &amp, &opts)? } else { quad_factor_eval(t, &parts, &amp, &opts)? };
        writeln!(csv, "{id},{},{},{},{}", g17(t), g17(j.value.re), g17(j.value.im), g17(j.err_est)).unwrap();
        mags.push(j.value.norm());
    }
    o.stdout = csv.clone();
    o.file("osc.csv", csv);
    if let Ok(series) = DecaySeries::new(id.clone(), ts, mags) {
        o.json("decay.json", &fit_json(&fit_decay(&series)?));
    }
    Ok(o)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P4AppendixArgs {
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = 9)]
    pub count: usize,
    /// Width of the Gaussian amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Also evaluate the direct four-variable sum (small λ only).
    #[arg(long)]
    pub direct: bool,
}

pub fn p4_appendix(a: &P4AppendixArgs) -> Res<Outputs> {
    let ls = time_list(&a.lambda, a.lambda_min, a.lambda_max, a.count)?;
    let mut csv = String::from(if a.direct { "lambda,ReJ,ImJ,errEst,scaled,directRe,directIm,directErr\n" } else { "lambda,ReJ,ImJ,errEst,scaled\n" });
    let mut scaled = Vec::new();
    let amp = AmplitudeSpec::gaussian(4, a.sigma)?;
    for &l in &ls {
        let v = reduce_p4_appendix(l, a.sigma)?;
        let s = l.powf(4.0 / 3.0) * v.value.norm();
        scaled.push(s);
        write!(csv, "{},{},{},{},{}", g17(l), g17(v.value.re), g17(v.value.im), g17(v.err_est), g17(s)).unwrap();
        if a.direct {
            let j = eval_j(l, &latwave::osc::p4_tilde(), &amp, &JOptions::default())?;
            write!(csv, ",{},{},{}", g17(j.value.re), g17(j.value.im), g17(j.err_est)).unwrap();
        }
        csv.push('\n');
    }
    let mut o = Outputs::default();
    if scaled.len() >= 3 {
        let p = sharpness_plateau(&scaled, 0.05)?;
        let slope = difference_decay_slope(&ls, &scaled).ok();
        o.json(
            "plateau.json",
            &json!({"c0": p.c0, "flatness_tail": p.flatness_tail, "flatness_full": p.flatness_full, "conclusive": p.conclusive, "difference_slope": slope}),
        );
    }
    o.stdout = csv.clone();
    o.file("appendix.csv", csv);
    Ok(o)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonArgs {
    /// Exponent vectors separated by `;`, entries by `,` (e.g. "2,0;0,2").
    #[arg(long)]
    pub monomials: Option<String>,
    #[arg(long)]
    pub expr: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
}

fn parse_support(s: &str) -> Res<SupportSet> {
    let pts: Vec<Vec<u32>> = s
        .split(';')
        .map(|p| p.split(',').map(|e| e.trim().parse::<u32>().map_err(|_| CliError::Usage(format!("bad exponent in {p:?}")))).collect())
        .collect::<Res<_>>()?;
    let d = pts.first().map_or(0, |p| p.len());
    if pts.iter().any(|p| p.len() != d) {
        return Err(CliError::Usage("exponent vectors differ in length".into()));
    }
    Ok(SupportSet::new(d, pts)?)
}

pub fn newton(a: &NewtonArgs) -> Res<Outputs> {
    let (support, poly) = match (&a.monomials, &a.expr) {
        (Some(m), None) => (parse_support(m)?, None),
        (None, Some(e)) => {
            let p = Poly::parse(e, a.d)?;
            (SupportSet::of(&p)?, Some(p))
        }
        _ => return Err(CliError::Usage("give exactly one of --monomials and --expr".into())),
    };
    let dist = newton_distance(&support);
    let face = principal_face(&support);
    let adapted = if support.dim() == 2 {
        let p = poly.unwrap_or_else(|| Poly::from_terms(2, support.points().map(|e| (e.clone(), latwave::poly::q(1)))));
        Some(verdict_name(is_adapted_2d(&p)?.verdict))
    } else {
        None
    };
    let v = json!({
        "support": support.points().collect::<Vec<_>>(),
        "distance": dist.to_string(),
        "principal_face": {"dim": face.dim, "generators": face.generators, "unbounded_directions": face.unbounded_directions},
        "adapted": adapted,
    });
    let mut o = Outputs::default();
    o.stdout = serde_json::to_string(&v).expect("json serializes") + "\n";
    o.json("newton.json", &v);
    Ok(o)
}

fn verdict_name(v: Adaptedness) -> &'static str {
    match v {
        Adaptedness::Adapted => "adapted",
        Adaptedness::NotAdapted => "not-adapted",
        Adaptedness::NotApplicable => "not-applicable",
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedArgs {
    /// Phase in z1, z2.
    #[arg(long)]
    pub expr: String,
}

pub fn adapted(a: &AdaptedArgs) -> Res<Outputs> {
    let p = Poly::parse(&a.expr, Some(2))?;
    let r = is_adapted_2d(&p)?;
    let v = json!({
        "expr": a.expr,
        "verdict": verdict_name(r.verdict),
        "condition": r.condition.map(|c| c.to_string()),
        "distance": r.face.as_ref().map(|f| f.distance.to_string()),
        "principal_face": r.face.as_ref().map(|f| json!({"dim": f.dim, "generators": f.generators})),
        "witness": r.witness.map(|(m, (lo, hi))| json!({"multiplicity": m, "interval": [lo.to_string(), hi.to_string()]})),
    });
    let mut o = Outputs::default();
    o.stdout = serde_json::to_string(&v).expect("json serializes") + "\n";
    o.json("adapted.json", &v);
    Ok(o)
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarticArgs {
    /// `a0,…,a4` for `Σ a_k x1^(4-k) x2^k`; rationals allowed.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: String,
}

pub fn quartic(a: &QuarticArgs) -> Res<Outputs> {
    let c: Vec<Q> = a.coeffs.split(',').map(parse_q).collect::<Res<_>>()?;
    let arr: [Q; 5] = c.try_into().map_err(|_| CliError::Usage("--coeffs needs exactly 5 entries".into()))?;
    let (form, index) = classify_binary_quartic(&arr)?;
    let v = json!({"coeffs": a.coeffs, "form": form.label(), "index": index.to_string()});
    let mut o = Outputs::default();
    o.stdout = serde_json::to_string(&v).expect("json serializes") + "\n";
    o.json("quartic.json", &v);
    Ok(o)
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexOp {
    /// Karpushkin's rule from `--alpha`, `--a` and optionally `--b`.
    Combine,
    /// Shift `--a` by `--m` split quadratic variables.
    QuadShift,
    /// Lexicographic maximum of `--a` and `--b`.
    Max,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexCalcArgs {
    #[arg(value_enum)]
    pub op: IndexOp,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long)]
    pub m: Option<u32>,
}

pub fn index_calc(a: &IndexCalcArgs) -> Res<Outputs> {
    let ia: DecayIndex = a.a.parse()?;
    let ib: Option<DecayIndex> = a.b.as_deref().map(str::parse).transpose()?;
    let r = match a.op {
        IndexOp::Combine => {
            let alpha = WeightVector::parse(a.alpha.as_deref().ok_or_else(|| CliError::Usage("combine needs --alpha".into()))?)?;
            karpushkin_combine(&alpha, ia, ib)
        }
        IndexOp::QuadShift => quad_split_shift(ia, a.m.ok_or_else(|| CliError::Usage("quad-shift needs --m".into()))?),
        IndexOp::Max => ia.max(ib.ok_or_else(|| CliError::Usage("max needs --b".into()))?),
    };
    let mut o = Outputs::default();
    o.stdout = format!("{r}\n");
    o.json("index.json", &json!({"result": r.to_string(), "beta": r.beta.to_string(), "p": r.p}));
    Ok(o)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaScanArgs {
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    /// Coranks to scan.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5])]
    pub k: Vec<usize>,
    /// Lattice resolution R: coordinates jπ/(2R).
    #[arg(long, default_value_t = 4)]
    pub resolution: usize,
    /// Extra sweep samples per corank with free coordinates.
    #[arg(long, default_value_t = 0)]
    pub sweep: usize,
    #[arg(long, default_value_t = latwave::critical::SCAN_TOL)]
    pub tol: f64,
}

pub fn sigma_scan(a: &SigmaScanArgs) -> Res<Outputs> {
    let mut csv = String::from("k,");
    for i in 1..=a.d {
        write!(csv, "xi{i},").unwrap();
    }
    for i in 1..=a.d {
        write!(csv, "v{i},").unwrap();
    }
    csv.push_str("|v|,min|eig|\n");
    let mut all: Vec<CriticalRecord> = Vec::new();
    let mut summary = Vec::new();
    for &k in &a.k {
        let s = scan_sigma(a.d, k, a.resolution, a.tol)?;
        summary.push(json!({"k": k, "found": s.records.len(), "predicted": s.predicted, "structure_ok": s.structure_ok, "scanned": s.scanned}));
        all.extend(s.records);
        if a.sweep > 0 && k + 1 <= a.d && k + 1 < a.d {
            all.extend(sweep_sigma(a.d, k, a.sweep, a.tol)?);
        }
    }
    for r in &all {
        write!(csv, "{},", r.corank).unwrap();
        for x in r.xi.iter().chain(&r.v) {
            write!(csv, "{},", g17(*x)).unwrap();
        }
        writeln!(csv, "{},{}", g17(r.speed), g17(r.min_nonzero_eig)).unwrap();
    }
    let stats = if all.is_empty() { None } else { Some(omega_image_stats(&all)?) };
    let v = json!({"scans": summary, "max_speed": stats.as_ref().map(|s| s.max_speed), "separations": stats.map(|s| s.separations)});
    let mut o = Outputs::default();
    o.stdout = serde_json::to_string(&v).expect("json serializes") + "\n";
    o.file("sigma.csv", csv);
    o.json("sigma.json", &v);
    Ok(o)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzArgs {
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    /// Box side.
    #[arg(long, default_value_t = 16)]
    pub l: usize,
    #[arg(long, default_value_t = 4.0)]
    pub q: f64,
    #[arg(long, default_value_t = 4.0)]
    pub r: f64,
    #[arg(long, default_value_t = 4.0)]
    pub qt: f64,
    #[arg(long, default_value_t = 4.0)]
    pub rt: f64,
    #[arg(long, default_value_t = 8.0)]
    pub t_end: f64,
    /// Number of random sparse data samples.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Sites per sample.
    #[arg(long, default_value_t = 3)]
    pub points: usize,
    #[arg(long, default_value_t = 2)]
    pub spread: i64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub allow_inadmissible: bool,
}

pub fn strichartz(a: &StrichartzArgs) -> Res<Outputs> {
    let idx = StrichartzIndices::new(a.q, a.r, a.qt, a.rt)?;
    let admissible = idx.admissible(SIGMA_D5);
    if !admissible && !a.allow_inadmissible {
        return Err(CliError::Usage(format!(
            "(q,r)=({},{}) or (q~,r~)=({},{}) is not admissible; pass --allow-inadmissible to measure anyway",
            a.q, a.r, a.qt, a.rt
        )));
    }
    let data: Vec<SparseData> = (0..a.samples as u64).map(|i| SparseData::random(a.d, a.points, a.spread, a.seed.wrapping_add(i))).collect();
    let rep = strichartz_ratios(&data, idx, a.t_end, a.l)?;
    let mut csv = String::from("sample,lhs,rhs,ratio\n");
    for (i, ((l, r), q)) in rep.lhs.iter().zip(&rep.rhs).zip(&rep.ratios).enumerate() {
        writeln!(csv, "{i},{},{},{}", g17(*l), g17(*r), g17(*q)).unwrap();
    }
    let v = json!({
        "d": a.d, "L": a.l, "T": a.t_end, "q": a.q, "r": a.r, "qt": a.qt, "rt": a.rt,
        "admissible": admissible,
        "pair_admissible": admissible_pair(a.q, a.r, SIGMA_D5),
        "max_ratio": rep.max_ratio,
        "max_quadrature_err": rep.max_quadrature_err,
        "seed": a.seed,
    });
    let mut o = Outputs::default();
    o.stdout = format!("max ratio = {}\n", g17(rep.max_ratio));
    o.file("strichartz.csv", csv);
    o.json("strichartz.json", &v);
    Ok(o)
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutArg {
    Full,
    Even,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlsArgs {
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    #[arg(long, default_value_t = 32)]
    pub l: usize,
    /// Power k in F = |u|^(k-1) u.
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    /// f2 = eps·δ0.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 12.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 240)]
    pub steps: usize,
    #[arg(long, default_value_t = 4)]
    pub record_every: usize,
    #[arg(long, value_enum, default_value_t = LayoutArg::Even)]
    pub layout: LayoutArg,
    /// Drop the nonlinearity.
    #[arg(long)]
    pub linear: bool,
    #[arg(long)]
    pub richardson_tol: Option<f64>,
}

pub fn nls(a: &NlsArgs) -> Res<Outputs> {
    let layout = match a.layout {
        LayoutArg::Full => Layout::Full,
        LayoutArg::Even => Layout::Even,
    };
    let state = BoxState::delta(a.d, a.l, layout, 0.0, a.eps)?;
    let opts = EvolveOptions {
        t_end: a.t_end,
        steps: a.steps,
        power: a.k,
        record_every: a.record_every,
        linear_only: a.linear,
        richardson_tol: a.richardson_tol,
        max_data_l1: None,
    };
    let tr = nonlinear_evolve(&state, &opts)?;
    let mut csv = String::from("t,l2,l4,linf,energy\n");
    let mut scaled_max = 0.0f64;
    for s in &tr.samples {
        writeln!(csv, "{},{},{},{},{}", g17(s.t), g17(s.l2), g17(s.l4), g17(s.linf), g17(s.energy)).unwrap();
        scaled_max = scaled_max.max((1.0 + s.t).powf(SIGMA_D5) * s.linf / a.eps.abs());
    }
    let v = json!({
        "d": a.d, "L": a.l, "k": a.k, "dt": a.t_end / a.steps as f64, "T": a.t_end, "eps": a.eps,
        "seeds": [], "layout": a.layout, "linear": a.linear,
        "sup_scaled_linf": scaled_max,
        "richardson": tr.richardson,
        "final": tr.samples.last(),
    });
    let mut o = Outputs::default();
    o.stdout = format!("sup (1+t)^(11/6) |u|_inf / |f2|_1 = {}\n", g17(scaled_max));
    o.file("norms.csv", csv);
    o.json("nls.json", &v);
    Ok(o)
}
