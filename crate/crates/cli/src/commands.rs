use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use polyprod::congruence::{root_count_check, divisibility_check};
use polyprod::counting::{tuple_divisibility_report, log_log_slope, ratio_f64, tally, tally_with, Budget};
use polyprod::curves::{
    curve_point_bound, curve_points, gcd_sum_aggregate, linear_factor_detect, CurveSpec, DEFAULT_TOL,
};
use polyprod::polyalg::{parse_poly, IntPoly, PolyProfile};
use polyprod::report::{json_int, BoundReport};
use polyprod::rmf::{mixed_moment_exact, moment_estimate};
use polyprod::{Error, Result};
use serde_json::{json, Value};

use crate::args::{
    AnalyzeArgs, BoundsArgs, Command, Common, CountArgs, CurvesArgs, Format, RmfArgs,
};
use crate::report::Report;

pub fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Analyze(a) => &a.common,
        Command::Count(a) => &a.common,
        Command::Bounds(a) => &a.common,
        Command::Curves(a) => &a.common,
        Command::Rmf(a) => &a.common,
    }
}

/// Every setting that can change the output. Thread count and output path
/// are left out so reruns with different values compare byte for byte.
pub fn config_echo(cmd: &Command) -> Value {
    let c = common(cmd);
    let format = match c.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let mut v = match cmd {
        Command::Analyze(_) => json!({ "command": "analyze" }),
        Command::Count(a) => json!({ "command": "count", "N": a.n, "N_grid": a.n_grid, "k": a.k }),
        Command::Bounds(a) => json!({
            "command": "bounds",
            "N_grid": a.n_grid,
            "k": a.k,
            "lambda": a.lambda,
            "M": a.m,
            "C": a.c,
            "l_max": a.l_max,
            "z_max": a.z_max,
            "recursion_max": a.recursion_max,
            "samples": a.samples,
            "ab_max": a.ab_max,
        }),
        Command::Curves(a) => json!({
            "command": "curves",
            "N": a.n,
            "ab_max": a.ab_max,
            "lambda": a.lambda,
            "N_grid": a.n_grid,
        }),
        Command::Rmf(a) => json!({
            "command": "rmf",
            "N": a.n,
            "k": a.k,
            "trials": a.trials,
            "seed": a.seed,
            "mixed": a.mixed,
            "mixed_N": a.mixed_n,
        }),
    };
    v["poly"] = Value::String(c.poly.clone());
    v["format"] = Value::String(format.into());
    v
}

pub fn run(cmd: &Command, report: &mut Report) -> Result<()> {
    match cmd {
        Command::Analyze(a) => analyze(a, report),
        Command::Count(a) => count(a, report),
        Command::Bounds(a) => bounds(a, report),
        Command::Curves(a) => curves(a, report),
        Command::Rmf(a) => rmf(a, report),
    }
}

/// Parses and flips the sign if needed, so the leading coefficient is positive.
fn positive_poly(text: &str) -> Result<(IntPoly, bool)> {
    let p = parse_poly(text)?;
    if p.is_constant() {
        return Err(Error::Degenerate(format!("{p} is constant")));
    }
    let negated = p.leading().is_negative();
    Ok((if negated { -&p } else { p }, negated))
}

fn normalized(text: &str) -> Result<(PolyProfile, u64)> {
    PolyProfile::normalized(&parse_poly(text)?)
}

fn check_grid(grid: &[u64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("empty N grid".into()));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(format!(
            "N grid must be positive and strictly increasing: {grid:?}"
        )));
    }
    Ok(())
}

/// `floor(N^(1/6))`.
fn default_lambda(n: u64) -> u64 {
    BigUint::from(n).nth_root(6).to_u64().unwrap_or(1).max(1)
}

/// `floor(M(P) N^(1/4))`.
fn default_m(profile: &PolyProfile, n: u64) -> Result<u64> {
    let m = profile.m_p.ok_or_else(|| {
        Error::Resource(format!(
            "growth threshold of {} is out of scan range",
            profile.p
        ))
    })?;
    let m4 = num_traits::pow(BigUint::from(m), 4) * n;
    Ok(m4.nth_root(4).to_u64().expect("fits below N * M(P)"))
}

fn push_bound(report: &mut Report, kind: &str, rep: &BoundReport, extra: &[(&str, Value)]) {
    let mut row = serde_json::to_value(rep).expect("report serializes");
    for (k, v) in extra {
        row[*k] = v.clone();
    }
    if !rep.advisory {
        report.check(rep.holds, || {
            format!(
                "{kind} {}",
                Value::Object(rep.inputs.clone().into_iter().collect())
            )
        });
    }
    report.push(kind, row);
}

fn analyze(a: &AnalyzeArgs, report: &mut Report) -> Result<()> {
    let (p, negated) = positive_poly(&a.common.poly)?;
    let profile = PolyProfile::new(&p)?;
    let mut row = profile.to_json();
    row["negated"] = negated.into();
    report.push("profile", row);
    Ok(())
}

fn count(a: &CountArgs, report: &mut Report) -> Result<()> {
    let grid = if a.n_grid.is_empty() {
        a.n.into_iter().collect()
    } else {
        a.n_grid.clone()
    };
    check_grid(&grid)?;
    if a.k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let (profile, shift) = normalized(&a.common.poly)?;
    profile.require_eligible()?;
    let budget = Budget::default();
    let mut points = Vec::new();
    for &n in &grid {
        let t = tally_with(&profile, n, a.k, &budget)?;
        let nk = num_traits::pow(BigUint::from(n), a.k as usize);
        let mut row = t.to_json();
        row["poly"] = Value::String(profile.id());
        row["shift"] = shift.into();
        row["A_over_Nk"] = ratio_f64(&t.a_count, &nk).into();
        row["nontrivial_over_Nk"] = ratio_f64(&t.nontrivial, &nk).into();
        let holds = t.recursion_inequality_holds();
        row["recursion_holds"] = holds.into();
        if let Some(h) = holds {
            report.check(h, || format!("recursion inequality at N = {n}"));
        }
        report.push("count", row);
        points.push((n as f64, t.nontrivial.to_f64().unwrap_or(f64::INFINITY)));
    }
    let slope = log_log_slope(&points);
    let theory = a.k as f64 - 1.0 / (6.0 * profile.e_p as f64);
    report.push(
        "fit",
        json!({
            "quantity": "nontrivial",
            "k": a.k,
            "slope": slope,
            "theory_exponent": theory,
            "implied_epsilon": slope.map(|s| s - theory),
        }),
    );
    Ok(())
}

fn bounds(a: &BoundsArgs, report: &mut Report) -> Result<()> {
    check_grid(&a.n_grid)?;
    if a.k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let c: BigRational =
        a.c.parse()
            .map_err(|_| Error::Parse(format!("cannot read C = {:?} as a fraction", a.c)))?;
    let (profile, shift) = normalized(&a.common.poly)?;
    profile.require_eligible()?;
    let shift_v = Value::from(shift);

    for l in 1..=a.l_max {
        let rep = root_count_check(&profile, l)?;
        push_bound(report, "roots", &rep, &[]);
    }
    for &n in &a.n_grid {
        for z in 1..=a.z_max {
            let rep = divisibility_check(&profile, &BigUint::from(z), n)?;
            push_bound(report, "divisibility", &rep, &[("shift", shift_v.clone())]);
        }
    }
    for n in 1..=a.recursion_max {
        let t = tally(&profile, n, a.k)?;
        let holds = t.recursion_inequality_holds();
        if let Some(h) = holds {
            report.check(h, || format!("recursion inequality at N = {n}"));
        }
        let mut row = t.to_json();
        row["holds"] = holds.into();
        report.push("recursion", row);
    }
    for &n in &a.n_grid {
        let lambda = a.lambda.unwrap_or_else(|| default_lambda(n));
        let m = match a.m {
            Some(m) => m,
            None => default_m(&profile, n)?,
        }
        .max(1);
        if m > n {
            report.push(
                "tuple_divisibility_skipped",
                json!({ "N": n, "M": m, "reason": "M exceeds N" }),
            );
            continue;
        }
        let mut ys: Vec<u64> = (0..a.samples.max(1))
            .map(|i| m + i * (n - m) / a.samples.saturating_sub(1).max(1))
            .collect();
        ys.dedup();
        for y in ys {
            let z = profile
                .p
                .eval(&BigInt::from(y))
                .to_biguint()
                .expect("normalized P is positive");
            let rep = tuple_divisibility_report(&profile, n, a.k, &z, lambda, &c)?;
            push_bound(
                report,
                "tuple_divisibility",
                &rep,
                &[("y", y.into()), ("M", m.into()), ("shift", shift_v.clone())],
            );
        }
    }
    for b in 2..=a.ab_max {
        for a_ in 1..b {
            let spec = CurveSpec::new(a_, b, profile.p.clone(), 0)?;
            let v = linear_factor_detect(&spec, DEFAULT_TOL)?;
            report.check(v.is_none_found(), || {
                format!("linear factor for a = {a_}, b = {b}")
            });
            let mut row = v.to_json();
            row["a"] = a_.into();
            row["b"] = b.into();
            report.push("detector", row);
        }
    }
    Ok(())
}

fn curves(a: &CurvesArgs, report: &mut Report) -> Result<()> {
    let (profile, shift) = normalized(&a.common.poly)?;
    let d = profile.d as u64;
    for b in 1..=a.ab_max {
        for a_ in 1..b {
            let spec = CurveSpec::new(a_, b, profile.p.clone(), a.n)?;
            let pts = curve_points(&spec)?;
            report.check(pts.len() as u64 <= d * a.n, || {
                format!("{} points on a = {a_}, b = {b} exceed d N", pts.len())
            });
            let detection = linear_factor_detect(&spec, DEFAULT_TOL)?;
            if profile.eligible {
                report.check(detection.is_none_found(), || {
                    format!("linear factor for a = {a_}, b = {b}")
                });
            }
            report.push(
                "curve",
                json!({
                    "a": a_,
                    "b": b,
                    "N": a.n,
                    "shift": shift,
                    "points": pts.len(),
                    "point_list": pts,
                    "detector": detection.to_json()["verdict"],
                }),
            );
        }
    }
    let grid = if a.n_grid.is_empty() {
        vec![a.n]
    } else {
        a.n_grid.clone()
    };
    check_grid(&grid)?;
    let mut points = Vec::new();
    for &n in &grid {
        let lambda = a.lambda.unwrap_or_else(|| default_lambda(n));
        let g = gcd_sum_aggregate(&profile, n, lambda)?;
        let cb = curve_point_bound(n.max(3), profile.d as u32).ok();
        report.push(
            "gcd_aggregate",
            json!({
                "N": n,
                "lambda": lambda,
                "aggregate": g,
                "curve_point_bound": cb.map(|b| b.0),
                "curve_bound_in_range": cb.map(|b| b.1),
            }),
        );
        points.push((n as f64, g as f64));
    }
    report.push(
        "fit",
        json!({ "quantity": "gcd_aggregate", "slope": log_log_slope(&points) }),
    );
    Ok(())
}

fn rmf(a: &RmfArgs, report: &mut Report) -> Result<()> {
    let (p, negated) = positive_poly(&a.common.poly)?;
    let profile = PolyProfile::new(&p)?;
    if a.k.is_empty() {
        return Err(Error::Domain("no moments requested".into()));
    }
    let mut first = None;
    for &k in &a.k {
        let est = moment_estimate(&profile, a.n, k, a.trials, a.seed)?;
        let z = est.z_score();
        report.check(z <= 4.0, || {
            format!(
                "k = {k}: estimate {} is {z:.2} standard errors from {}",
                est.normalized_estimate, est.exact_target
            )
        });
        report.push(
            "moment",
            json!({
                "poly": profile.id(),
                "negated": negated,
                "N": a.n,
                "n0_used": est.n0_used,
                "k": k,
                "trials": est.trials,
                "seed": est.seed,
                "estimate": est.normalized_estimate,
                "std_error": est.std_error,
                "exact_target": est.exact_target,
                "z_score": z,
            }),
        );
        first.get_or_insert(est);
    }
    let est = first.expect("at least one moment");
    let mean = est.mean_s[0].hypot(est.mean_s[1]);
    report.check(mean <= 4.0 * est.mean_s_std_error, || {
        format!(
            "mean of S is {mean}, above 4 standard errors {}",
            est.mean_s_std_error
        )
    });
    report.push(
        "mean_s",
        json!({
            "N": a.n,
            "trials": est.trials,
            "seed": est.seed,
            "mean_re": est.mean_s[0],
            "mean_im": est.mean_s[1],
            "std_error": est.mean_s_std_error,
        }),
    );
    if !a.mixed.is_empty() {
        let (norm, shift) = PolyProfile::normalized(&p)?;
        for pair in &a.mixed {
            let (x, y) = parse_pair(pair)?;
            let m = mixed_moment_exact(&norm, a.mixed_n, x, y)?;
            report.push(
                "mixed_moment",
                json!({ "a": x, "b": y, "N": a.mixed_n, "shift": shift, "count": json_int(&m) }),
            );
        }
    }
    Ok(())
}

fn parse_pair(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Parse(format!("expected a:b, got {s:?}"));
    let (x, y) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        x.trim().parse().map_err(|_| bad())?,
        y.trim().parse().map_err(|_| bad())?,
    ))
}
