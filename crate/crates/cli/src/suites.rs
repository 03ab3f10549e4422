//! The verification suites behind each subcommand. Every suite walks its
//! grid in a fixed lexicographic order and streams rows into a [`Sink`].

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};

use dunkl_liyau::inequalities::{f_of_a, h_of_a};
use dunkl_liyau::scan::{default_t_grid, for_each_index, liyau_scan};
use dunkl_liyau::semigroup::{heat_residual_check, symmetry_check, upper_bound_check};
use dunkl_liyau::{
    chain_rule_residual, chapman_kolmogorov_check, gradient_form_check, harnack_check,
    liyau_for_solution, log_convexity_check, log_convexity_midpoint_check, log_kernel_derivatives,
    moment_ratios, normalization_check, pi_psi, Adaptive, ClaimId, Convention, GridPoint,
    InitialDatum, KernelSolution, MultiplicityZ2, PositiveSolution, Profile, Relation,
    SemigroupSolution, StdPsi, VerificationReport, WeightedMeasure,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{CommonArgs, HarnackArgs, KernelEvalArgs, ReportArgs, SemigroupArgs, SolutionArgs, SolutionKind};
use crate::corpus;
use crate::output::{fmt_f64, KernelRow, Row, Sink, SummaryRow};
use crate::CliError;

/// Tolerance of the `f(0) = 0` and `h` antisymmetry rows.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
/// Tolerance of the chain-rule residual, relative to its largest term.
pub const CHAIN_RULE_TOLERANCE: f64 = 1e-8;
/// Tolerance on the log-convexity Hessian entries.
pub const LOG_CONVEXITY_TOLERANCE: f64 = 1e-10;
/// Tilt grids of the auxiliary claims.
pub const F_GRID: (f64, f64, usize) = (-200.0, 200.0, 41);
pub const H_GRID: (f64, f64, usize) = (-5.0, 5.0, 101);
/// Random pairs in the midpoint-convexity check.
pub const MIDPOINT_PAIRS: usize = 100;

/// Validated settings shared by the grid commands.
#[derive(Debug, Clone)]
pub struct Settings {
    pub kappa: MultiplicityZ2,
    pub t_grid: Vec<f64>,
    pub coords: Vec<f64>,
    pub tol: f64,
    pub adaptive: Adaptive,
    pub seed: u64,
    pub random: usize,
    pub convention: Convention,
}

impl Settings {
    pub fn from_args(a: &CommonArgs) -> Result<Self, CliError> {
        let kappa = MultiplicityZ2::new(a.kappa.clone())
            .map_err(|e| CliError::Config(format!("--kappa: {e}")))?;
        let t_grid = a.t.clone().unwrap_or_else(default_t_grid);
        if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(CliError::Config("--t must be a nonempty list of positive times".into()));
        }
        if a.coords.is_empty() || a.coords.iter().any(|c| !c.is_finite()) {
            return Err(CliError::Config("--coords must be a nonempty list of finite values".into()));
        }
        if !(a.tol > 0.0) || !(a.quad_tol > 0.0) {
            return Err(CliError::Config("--tol and --quad-tol must be positive".into()));
        }
        if a.max_nodes < 64 {
            return Err(CliError::Config("--max-nodes must be at least 64".into()));
        }
        let mut coords = a.coords.clone();
        if a.random > 0 {
            let (lo, hi) = bounds(&coords);
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let span = if hi > lo { hi - lo } else { 1.0 };
            coords.extend((0..a.random).map(|_| lo + span * rng.gen::<f64>()));
            coords.sort_by(f64::total_cmp);
            coords.dedup();
        }
        Ok(Settings {
            kappa,
            t_grid,
            coords,
            tol: a.tol,
            adaptive: Adaptive {
                rel_tol: a.quad_tol,
                max_nodes: a.max_nodes,
                ..Adaptive::default()
            },
            seed: a.seed,
            random: a.random,
            convention: a.convention.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.kappa.dim()
    }

    /// `coords^d` in lexicographic order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let _ = for_each_index(self.coords.len(), self.dim(), |idx| {
            out.push(idx.iter().map(|&k| self.coords[k]).collect());
            Ok(())
        });
        out
    }
}

fn bounds(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn at<T>(r: dunkl_liyau::Result<T>, context: impl FnOnce() -> String) -> Result<T, CliError> {
    r.map_err(|source| CliError::Numeric {
        source,
        context: context(),
    })
}

fn emit(sink: &mut Sink, report: &VerificationReport, detail: impl Into<String>) -> Result<(), CliError> {
    Ok(sink.write_row(&Row::from_report(report, detail))?)
}

pub fn kernel_eval(args: &KernelEvalArgs, sink: &mut Sink) -> Result<(), CliError> {
    let st = Settings::from_args(&args.common)?;
    let check = |p: &Option<Vec<f64>>, name: &str| -> Result<Option<Vec<f64>>, CliError> {
        match p {
            Some(v) if v.len() != st.dim() => Err(CliError::Config(format!(
                "--{name} has {} entries but --kappa has {}",
                v.len(),
                st.dim()
            ))),
            other => Ok(other.clone()),
        }
    };
    let xs = check(&args.x, "x")?.map(|v| vec![v]).unwrap_or_else(|| st.points());
    let ys = check(&args.y, "y")?.map(|v| vec![v]).unwrap_or_else(|| st.points());
    for &t in &st.t_grid {
        for x in &xs {
            for y in &ys {
                let kp = at(log_kernel_derivatives(t, x, y, &st.kappa, &st.adaptive), || {
                    format!("t={t}, x={x:?}, y={y:?}")
                })?;
                sink.write(&KernelRow {
                    t,
                    x: x.clone(),
                    y: y.clone(),
                    kappa: st.kappa.kappa().to_vec(),
                    p: kp.log_p.exp(),
                    log_p: kp.log_p,
                    grad_log_p: kp.grad_x_log_p.clone(),
                    hess_diag_log_p: kp.hess_diag_x_log_p.clone(),
                    dt_log_p: kp.dt_log_p,
                })?;
            }
        }
    }
    Ok(())
}

pub fn liyau(args: &CommonArgs, sink: &mut Sink) -> Result<(), CliError> {
    let st = Settings::from_args(args)?;
    let mut io_err = None;
    let result = liyau_scan(&st.t_grid, &st.coords, &st.kappa, &st.adaptive, st.tol, |dec| {
        let report = dec.report(st.tol)?;
        let detail = dec
            .terms
            .iter()
            .map(|c| {
                format!(
                    "a={},var={},f={},I={}",
                    fmt_f64(c.a),
                    fmt_f64(c.variance_term),
                    fmt_f64(c.f_a),
                    fmt_f64(c.i)
                )
            })
            .collect::<Vec<_>>()
            .join("|");
        if let Err(e) = sink.write_row(&Row::from_report(&report, detail)) {
            io_err = Some(e);
            return Err(dunkl_liyau::Error::Field("output failed".into()));
        }
        Ok(())
    });
    if let Some(e) = io_err {
        return Err(e.into());
    }
    at(result, || "liyau scan".into())?;
    Ok(())
}

pub fn parse_profile(s: &str) -> Result<Profile, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts[1..]
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("--datum {s}: {e}")))?;
    let profile = match (parts[0], nums.as_slice()) {
        ("indicator", [lo, hi]) => Profile::Indicator { lo: *lo, hi: *hi },
        ("bump", [center, radius]) => Profile::Bump {
            center: *center,
            radius: *radius,
        },
        ("two-bump", [left, right, radius]) => Profile::TwoBump {
            left: *left,
            right: *right,
            radius: *radius,
        },
        _ => return Err(CliError::Config(format!("--datum {s}: unknown profile"))),
    };
    profile
        .validate()
        .map_err(|e| CliError::Config(format!("--datum {s}: {e}")))?;
    Ok(profile)
}

pub fn parse_datum(specs: &[String], d: usize) -> Result<InitialDatum, CliError> {
    let profiles = specs.iter().map(|s| parse_profile(s)).collect::<Result<Vec<_>, _>>()?;
    let profiles = match profiles.len() {
        1 => vec![profiles[0]; d],
        n if n == d => profiles,
        n => {
            return Err(CliError::Config(format!(
                "--datum given {n} times for dimension {d}"
            )))
        }
    };
    InitialDatum::new(profiles).map_err(|e| CliError::Config(e.to_string()))
}

/// Li–Yau and gradient-form rows for one solution at every `(t, x)`.
pub fn solution_rows<S: PositiveSolution + ?Sized>(
    u: &S,
    st: &Settings,
    sink: &mut Sink,
) -> Result<(), CliError> {
    for &t in &st.t_grid {
        for x in st.points() {
            let ctx = || format!("t={t}, x={x:?}");
            let r = at(liyau_for_solution(u, t, &x, &st.kappa, st.tol), ctx)?;
            emit(sink, &r, "")?;
            let beta = st.kappa.liyau_bound(t);
            let r = at(gradient_form_check(u, t, &x, beta, &st.kappa, st.tol), ctx)?;
            emit(sink, &r, "")?;
        }
    }
    Ok(())
}

pub fn solution(args: &SolutionArgs, sink: &mut Sink) -> Result<(), CliError> {
    let st = Settings::from_args(&args.common)?;
    let datum = parse_datum(&args.datum, st.dim())?;
    let u = at(SemigroupSolution::new(datum, &st.kappa, st.adaptive), || "datum".into())?;
    solution_rows(&u, &st, sink)
}

/// `count` random tuples `s < t` (log-uniform in the time range) and
/// `x, y` uniform in the coordinate box.
pub fn random_tuples(st: &Settings, count: usize) -> Vec<(f64, Vec<f64>, f64, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(st.seed);
    let (tlo, thi) = bounds(&st.t_grid);
    let (thi, tlo) = if thi > tlo { (thi, tlo) } else { (tlo * 10.0, tlo) };
    let (clo, chi) = bounds(&st.coords);
    let d = st.dim();
    (0..count)
        .map(|_| {
            let mut a = (tlo.ln() + (thi.ln() - tlo.ln()) * rng.gen::<f64>()).exp();
            let mut b = (tlo.ln() + (thi.ln() - tlo.ln()) * rng.gen::<f64>()).exp();
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            if a == b {
                b *= 1.5;
            }
            let x = (0..d).map(|_| clo + (chi - clo) * rng.gen::<f64>()).collect();
            let y = (0..d).map(|_| clo + (chi - clo) * rng.gen::<f64>()).collect();
            (a, x, b, y)
        })
        .collect()
}

pub fn harnack_rows<S: PositiveSolution + ?Sized>(
    u: &S,
    st: &Settings,
    sink: &mut Sink,
) -> Result<(), CliError> {
    let points = st.points();
    for (i, &s) in st.t_grid.iter().enumerate() {
        for &t in &st.t_grid[i + 1..] {
            if !(s < t) {
                continue;
            }
            for x in &points {
                for y in &points {
                    let r = at(harnack_check(u, s, x, t, y, &st.kappa, st.tol), || {
                        format!("s={s}, x={x:?}, t={t}, y={y:?}")
                    })?;
                    emit(sink, &r, "grid")?;
                }
            }
        }
    }
    for (s, x, t, y) in random_tuples(st, st.random) {
        let r = at(harnack_check(u, s, &x, t, &y, &st.kappa, st.tol), || {
            format!("s={s}, x={x:?}, t={t}, y={y:?}")
        })?;
        emit(sink, &r, "random")?;
    }
    Ok(())
}

pub fn harnack(args: &HarnackArgs, sink: &mut Sink) -> Result<(), CliError> {
    let mut common = args.common.clone();
    // Random tuples are drawn here instead of augmenting the coordinate grid.
    let samples = common.random;
    common.random = 0;
    let mut st = Settings::from_args(&common)?;
    st.random = samples;
    match args.solution {
        SolutionKind::Kernel => {
            let source = args.source.clone().unwrap_or_else(|| vec![0.0; st.dim()]);
            let u = KernelSolution::new(&source, &st.kappa, st.adaptive)
                .map_err(|e| CliError::Config(format!("--source: {e}")))?;
            harnack_rows(&u, &st, sink)
        }
        SolutionKind::Datum => {
            let datum = parse_datum(&args.datum, st.dim())?;
            let u = at(SemigroupSolution::new(datum, &st.kappa, st.adaptive), || "datum".into())?;
            harnack_rows(&u, &st, sink)
        }
    }
}

pub fn normalization_rows(st: &Settings, sink: &mut Sink) -> Result<(), CliError> {
    let measure = WeightedMeasure::with_convention(&st.kappa, st.convention);
    for &t in &st.t_grid {
        for x in st.points() {
            let r = at(normalization_check(t, &x, &measure, &st.adaptive), || format!("t={t}, x={x:?}"))?;
            emit(sink, &r, "")?;
        }
    }
    Ok(())
}

pub fn semigroup(args: &SemigroupArgs, sink: &mut Sink) -> Result<(), CliError> {
    let st = Settings::from_args(&args.common)?;
    if args.s.is_empty() || args.s.iter().any(|s| !(*s > 0.0)) {
        return Err(CliError::Config("--s must list positive times".into()));
    }
    normalization_rows(&st, sink)?;
    let measure = WeightedMeasure::with_convention(&st.kappa, st.convention);
    let points = st.points();
    for &t in &st.t_grid {
        for x in &points {
            for y in &points {
                let ctx = || format!("t={t}, x={x:?}, y={y:?}");
                emit(sink, &at(symmetry_check(t, x, y, &st.kappa, &st.adaptive), ctx)?, "")?;
                emit(sink, &at(upper_bound_check(t, x, y, &st.kappa, &st.adaptive), ctx)?, "")?;
                emit(sink, &at(heat_residual_check(t, x, y, &st.kappa, &st.adaptive), ctx)?, "")?;
                for &s in &args.s {
                    let r = at(chapman_kolmogorov_check(s, t, x, y, &measure, &st.adaptive), || {
                        format!("s={s}, t={t}, x={x:?}, y={y:?}")
                    })?;
                    emit(sink, &r, "")?;
                }
            }
        }
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// `f(0) = 0`, `f >= 0`, `h` antisymmetric and nondecreasing, and
/// nonnegative tilted variances for one positive multiplicity.
pub fn tilt_claim_rows(kappa: f64, ad: &Adaptive, tol: f64, sink: &mut Sink) -> Result<(), CliError> {
    let ctx = |a: f64| move || format!("a={a}, kappa={kappa}");
    let f0 = at(f_of_a(0.0, kappa, ad), ctx(0.0))?;
    let r = VerificationReport::new(ClaimId::FAtZero, GridPoint::tilt(0.0, kappa), f0, 0.0, Relation::EqAbs, IDENTITY_TOLERANCE);
    emit(sink, &at(r, ctx(0.0))?, "")?;
    let (lo, hi, n) = F_GRID;
    let (hlo, hhi, hn) = H_GRID;
    let f_grid = linspace(lo, hi, n);
    let h_grid = linspace(hlo, hhi, hn);
    for &a in &f_grid {
        let f = at(f_of_a(a, kappa, ad), ctx(a))?;
        let r = VerificationReport::inequality(ClaimId::FNonnegative, GridPoint::tilt(a, kappa), -f, 0.0, tol);
        emit(sink, &at(r, ctx(a))?, "")?;
    }
    let mut prev: Option<(f64, f64)> = None;
    for &a in &h_grid {
        let h = at(h_of_a(a, kappa, ad), ctx(a))?;
        let hm = at(h_of_a(-a, kappa, ad), ctx(-a))?;
        let r = VerificationReport::new(ClaimId::HAntisymmetric, GridPoint::tilt(a, kappa), h, -hm, Relation::EqAbs, IDENTITY_TOLERANCE);
        emit(sink, &at(r, ctx(a))?, "")?;
        if let Some((pa, ph)) = prev {
            let r = VerificationReport::inequality(ClaimId::HMonotone, GridPoint::tilt(a, kappa), ph, h, 0.0);
            emit(sink, &at(r, ctx(a))?, format!("from a={}", fmt_f64(pa)))?;
        }
        prev = Some((a, h));
    }
    for &a in f_grid.iter().chain(&h_grid) {
        let m = at(moment_ratios(a, kappa, ad), ctx(a))?;
        let r = VerificationReport::inequality(ClaimId::VarianceNonnegative, GridPoint::tilt(a, kappa), -m.variance, 0.0, 0.0);
        emit(sink, &at(r, ctx(a))?, "")?;
    }
    Ok(())
}

/// Chain-rule residuals and `Pi_log <= 0` over the field corpus.
pub fn chain_rule_rows(st: &Settings, sink: &mut Sink) -> Result<(), CliError> {
    let fields = corpus::fields(st.dim());
    for x in st.points() {
        for cf in &fields {
            for (name, psi) in corpus::PSIS {
                let ctx = || format!("field={}, psi={name}, x={x:?}", cf.name);
                let res = at(chain_rule_residual(&cf.field, psi, &x, &st.kappa), ctx)?;
                let point = GridPoint {
                    x: x.clone(),
                    kappa: st.kappa.kappa().to_vec(),
                    ..Default::default()
                };
                let r = VerificationReport::inequality(ClaimId::ChainRule, point, res.relative(), 0.0, CHAIN_RULE_TOLERANCE);
                emit(sink, &at(r, ctx)?, format!("{}/{name}", cf.name))?;
            }
            let ctx = || format!("field={}, x={x:?}", cf.name);
            let pi = at(pi_psi(&cf.field, &StdPsi::Log, &x, &st.kappa), ctx)?;
            let point = GridPoint {
                x: x.clone(),
                kappa: st.kappa.kappa().to_vec(),
                ..Default::default()
            };
            let r = VerificationReport::inequality(ClaimId::PiLogNonpositive, point, pi, 0.0, st.tol);
            emit(sink, &at(r, ctx)?, cf.name)?;
        }
    }
    Ok(())
}

pub fn log_convexity_rows(st: &Settings, sink: &mut Sink) -> Result<(), CliError> {
    let points = st.points();
    for &t in &st.t_grid {
        for x in &points {
            for y in &points {
                let r = at(
                    log_convexity_check(t, x, y, &st.kappa, &st.adaptive, LOG_CONVEXITY_TOLERANCE),
                    || format!("t={t}, x={x:?}, y={y:?}"),
                )?;
                emit(sink, &r, "")?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(st.seed);
    let (clo, chi) = bounds(&st.coords);
    let (tlo, thi) = bounds(&st.t_grid);
    let d = st.dim();
    for _ in 0..MIDPOINT_PAIRS {
        let mut draw = || -> Vec<f64> { (0..d).map(|_| clo + (chi - clo) * rng.gen::<f64>()).collect() };
        let (z1, z2, y) = (draw(), draw(), draw());
        let t = (tlo.ln() + (thi.ln() - tlo.ln()) * rng.gen::<f64>()).exp();
        let r = at(
            log_convexity_midpoint_check(t, &z1, &z2, &y, &st.kappa, &st.adaptive, st.tol),
            || format!("t={t}, z1={z1:?}, z2={z2:?}, y={y:?}"),
        )?;
        emit(sink, &r, format!("z1={};z2={}", crate::output::join(&z1), crate::output::join(&z2)))?;
    }
    Ok(())
}

pub fn claims(args: &CommonArgs, sink: &mut Sink) -> Result<(), CliError> {
    let st = Settings::from_args(args)?;
    let mut kappas: Vec<f64> = st.kappa.kappa().iter().copied().filter(|k| *k > 0.0).collect();
    kappas.sort_by(f64::total_cmp);
    kappas.dedup();
    for k in kappas {
        tilt_claim_rows(k, &st.adaptive, st.tol, sink)?;
    }
    chain_rule_rows(&st, sink)?;
    log_convexity_rows(&st, sink)?;
    normalization_rows(&st, sink)
}

pub fn report(args: &ReportArgs, sink: &mut Sink) -> Result<(), CliError> {
    let mut map: BTreeMap<String, SummaryRow> = BTreeMap::new();
    let mut failed = 0;
    for path in &args.inputs {
        let file = fs::File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value = serde_json::from_str(&line)
                .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), n + 1)))?;
            if value.get("claim_id").is_none() {
                continue;
            }
            let row: Row = serde_json::from_value(value)
                .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), n + 1)))?;
            let entry = map.entry(row.claim_id.clone()).or_insert_with(|| SummaryRow {
                claim_id: row.claim_id.clone(),
                total: 0,
                failed: 0,
                worst_deficit: f64::INFINITY,
            });
            entry.total += 1;
            if !row.pass {
                entry.failed += 1;
                failed += 1;
            }
            entry.worst_deficit = entry.worst_deficit.min(row.deficit);
        }
    }
    for row in map.values() {
        sink.write(row)?;
    }
    sink.failures += failed;
    Ok(())
}
