use crate::output::{emit, ensure_dir, envelope};
use crate::poly::{parse_poly, parse_rat};
use crate::{ModelArgs, SizeArgs};
use autocov::freelimit::{
    limit_moment, limit_moment_exact, EvalOptions, GammaPolynomial, MatrixTrace, ModelSpec,
    PolyShape,
};
use autocov::inference::{
    ar_order_estimate, ma_order_estimate, white_noise_trace_test, BandedLsEstimator,
    ThresholdConfig, TraceStatKind,
};
use autocov::laws::{
    biquadratic_residual, cgf_stieltjes_check, cfp_moments, mp_moments_f64, silverstein_residual,
    Orientation, StieltjesPoint,
};
use autocov::scalar::{Rat, Scalar};
use autocov::simkit::{
    builtin_model, esd, eval_sym_poly, sample_autocov, symmetric_eigenvalues, write_ecdf_csv,
    BuiltinModel, SampleMatrix,
};
use autocov::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

enum ResolvedModel {
    Builtin(BuiltinModel),
    Scalar(ModelSpec),
}

impl ResolvedModel {
    fn simulate(&self, p: usize, n: usize, seed: u64, replicate: u64) -> Result<SampleMatrix> {
        match self {
            ResolvedModel::Builtin(b) => b.simulate_substream(p, n, seed, replicate),
            ResolvedModel::Scalar(spec) => {
                autocov::simkit::simulate_ma_substream(spec, p, n, seed, replicate)
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            ResolvedModel::Builtin(b) => b.describe(),
            ResolvedModel::Scalar(s) => s.describe(),
        }
    }

    /// The MA spec the limit calculus applies to, if any.
    fn ma_spec(&self) -> Option<&ModelSpec> {
        match self {
            ResolvedModel::Builtin(b) => b.ma_spec(),
            ResolvedModel::Scalar(s) => Some(s),
        }
    }

    fn builtin_index(&self) -> Option<usize> {
        match self {
            ResolvedModel::Builtin(b) => Some(b.index()),
            ResolvedModel::Scalar(_) => None,
        }
    }
}

fn resolve_model(args: &ModelArgs) -> Result<ResolvedModel> {
    let y = parse_rat(&args.y)?;
    if let Some(spec) = &args.lambda {
        let lambdas: Result<Vec<Rat>> = spec.split(',').map(|t| parse_rat(t.trim())).collect();
        return Ok(ResolvedModel::Scalar(ModelSpec::scalar(y, lambdas?)?));
    }
    let idx = args
        .model
        .ok_or_else(|| Error::Domain("pass --model <1..6> or --lambda <coeffs>".into()))?;
    Ok(ResolvedModel::Builtin(builtin_model(idx, y)?))
}

fn parse_complex(src: &str) -> Result<Complex64> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Domain(format!("bad complex literal {src:?}; expected e.g. 0+4i"));
    if !s.ends_with('i') {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    }
    let body = &s[..s.len() - 1];
    // split at the sign of the imaginary part (not the leading sign)
    for (k, c) in body.char_indices().rev() {
        if (c == '+' || c == '-') && k > 0 {
            let re: f64 = body[..k].parse().map_err(|_| bad())?;
            let im_str = &body[k..];
            let im: f64 = if im_str == "+" {
                1.0
            } else if im_str == "-" {
                -1.0
            } else {
                im_str.parse().map_err(|_| bad())?
            };
            return Ok(Complex64::new(re, im));
        }
    }
    let im: f64 = if body.is_empty() { 1.0 } else { body.parse().map_err(|_| bad())? };
    Ok(Complex64::new(0.0, im))
}

fn parse_lags(src: &str) -> Result<Vec<u32>> {
    let lags: std::result::Result<Vec<u32>, _> =
        src.split(',').map(|t| t.trim().parse::<u32>()).collect();
    let lags = lags.map_err(|_| Error::Domain(format!("bad lag list {src:?}")))?;
    if lags.is_empty() {
        return Err(Error::Domain("empty lag list".into()));
    }
    Ok(lags)
}

/// Spectral moments of one simulated replicate: p^{-1} tr(M^h) for h <= h_max.
fn empirical_moments(
    model: &ResolvedModel,
    poly: &GammaPolynomial,
    p: usize,
    n: usize,
    seed: u64,
    replicate: u64,
    h_max: usize,
) -> Result<Vec<f64>> {
    let x = model.simulate(p, n, seed, replicate)?;
    let mut gammas = BTreeMap::new();
    let mut lags: Vec<u32> = poly
        .terms()
        .flat_map(|(_, w)| w.iter().map(|a| a.lag()))
        .collect();
    lags.sort_unstable();
    lags.dedup();
    for u in lags {
        gammas.insert(u, sample_autocov(&x, u as usize)?);
    }
    let m = eval_sym_poly(poly, &gammas)?;
    let vals = symmetric_eigenvalues(&m)?;
    Ok((1..=h_max)
        .map(|h| vals.iter().map(|v| v.powi(h as i32)).sum::<f64>() / p as f64)
        .collect())
}

#[derive(Serialize)]
struct MomentRow {
    h: usize,
    theory: Option<f64>,
    theory_exact: Option<String>,
    empirical_mean: Option<f64>,
    mc_standard_error: Option<f64>,
}

pub fn moments(
    margs: &ModelArgs,
    size: &SizeArgs,
    poly_text: &str,
    h_max: usize,
    reps: usize,
    tau_p: usize,
    out: Option<&Path>,
) -> Result<()> {
    let model = resolve_model(margs)?;
    let poly = parse_poly(poly_text)?;
    poly.require_symmetric()?;
    if h_max == 0 {
        return Err(Error::Domain("need --h >= 1".into()));
    }
    let opts = EvalOptions::default();

    let mut rows: Vec<MomentRow> = Vec::new();
    match model.ma_spec() {
        Some(spec) => {
            if model.builtin_index() == Some(3) {
                return Err(Error::Domain(
                    "model 3 violates the trace-limit assumption (its coefficient norm grows \
                     with p); theoretical moments are unavailable — use the simulation side"
                        .into(),
                ));
            }
            if spec.scalar_lambdas().is_some() {
                for h in 1..=h_max {
                    let v = limit_moment_exact(&poly, spec, h, &opts)?;
                    rows.push(MomentRow {
                        h,
                        theory: Some(Scalar::to_f64(&v)),
                        theory_exact: Some(format!("{v}")),
                        empirical_mean: None,
                        mc_standard_error: None,
                    });
                }
            } else {
                let tau = MatrixTrace::from_model(spec, tau_p)?;
                for h in 1..=h_max {
                    let v = limit_moment(&poly, spec, &tau, h, &opts)?;
                    rows.push(MomentRow {
                        h,
                        theory: Some(v),
                        theory_exact: None,
                        empirical_mean: None,
                        mc_standard_error: None,
                    });
                }
            }
        }
        None => {
            for h in 1..=h_max {
                rows.push(MomentRow {
                    h,
                    theory: None,
                    theory_exact: None,
                    empirical_mean: None,
                    mc_standard_error: None,
                });
            }
        }
    }

    if reps > 0 {
        let mut per_h: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); h_max];
        for rep in 0..reps as u64 {
            let ms = empirical_moments(&model, &poly, size.p, size.n, size.seed, rep, h_max)?;
            for (h, v) in ms.into_iter().enumerate() {
                per_h[h].push(v);
            }
        }
        for (h, vals) in per_h.iter().enumerate() {
            let (mean, var, _, _) = autocov::simkit::sample_moments(vals);
            rows[h].empirical_mean = Some(mean);
            rows[h].mc_standard_error = Some((var / reps as f64).sqrt());
        }
    }

    #[derive(Serialize)]
    struct Config {
        model: String,
        poly: String,
        n: usize,
        p: usize,
        h: usize,
        reps: usize,
        tau_p: usize,
    }
    let env = envelope(
        size.seed,
        Config {
            model: model.describe(),
            poly: format!("{poly}"),
            n: size.n,
            p: size.p,
            h: h_max,
            reps,
            tau_p,
        },
        rows,
    );
    emit(&env, out, "moments.json")?;
    Ok(())
}

pub fn ecdf(
    margs: &ModelArgs,
    size: &SizeArgs,
    lags_text: &str,
    shape: &str,
    poly_text: Option<&str>,
    out: &Path,
) -> Result<()> {
    let model = resolve_model(margs)?;
    let lags = parse_lags(lags_text)?;
    ensure_dir(out)?;
    let x = model.simulate(size.p, size.n, size.seed, 0)?;
    let tag = model
        .builtin_index()
        .map(|i| format!("model{i}"))
        .unwrap_or_else(|| "custom".into());

    let mut files = Vec::new();
    let mut write_poly_ecdf = |poly: &GammaPolynomial, name: String| -> Result<()> {
        let mut gammas = BTreeMap::new();
        let mut needed: Vec<u32> = poly
            .terms()
            .flat_map(|(_, w)| w.iter().map(|a| a.lag()))
            .collect();
        needed.sort_unstable();
        needed.dedup();
        for u in needed {
            gammas.insert(u, sample_autocov(&x, u as usize)?);
        }
        let m = eval_sym_poly(poly, &gammas)?;
        let e = esd(&m)?;
        let path = out.join(&name);
        let mut buf = Vec::new();
        write_ecdf_csv(&e, &mut buf)?;
        fs::write(&path, buf)?;
        files.push(name);
        Ok(())
    };

    if let Some(pt) = poly_text {
        let poly = parse_poly(pt)?;
        poly.require_symmetric()?;
        write_poly_ecdf(&poly, format!("ecdf_{tag}_poly.csv"))?;
    } else {
        for &u in &lags {
            let poly = match shape {
                "lagsq" => PolyShape::LagProduct.at(u),
                "sym" => PolyShape::SymmetrizedHalf.at(u),
                "sumsq" => PolyShape::LagProduct
                    .at(u)
                    .add(&PolyShape::LagProduct.at(u + 1)),
                other => {
                    return Err(Error::Domain(format!(
                        "unknown shape {other:?}: use lagsq, sym or sumsq"
                    )))
                }
            };
            write_poly_ecdf(&poly, format!("ecdf_{tag}_{shape}_u{u}.csv"))?;
        }
    }

    #[derive(Serialize)]
    struct Config {
        model: String,
        lags: Vec<u32>,
        shape: String,
        poly: Option<String>,
        n: usize,
        p: usize,
    }
    #[derive(Serialize)]
    struct Out {
        files: Vec<String>,
    }
    let env = envelope(
        size.seed,
        Config {
            model: model.describe(),
            lags,
            shape: shape.to_string(),
            poly: poly_text.map(|s| s.to_string()),
            n: size.n,
            p: size.p,
        },
        Out { files },
    );
    emit(&env, Some(out), "ecdf_manifest.json")?;
    Ok(())
}

pub fn order(
    margs: &ModelArgs,
    size: &SizeArgs,
    mode: &str,
    umax: usize,
    smax: usize,
    null_reps: usize,
    out: Option<&Path>,
) -> Result<()> {
    let model = resolve_model(margs)?;
    let x = model.simulate(size.p, size.n, size.seed, 0)?;
    let thr = ThresholdConfig {
        null_replicates: null_reps,
        quantile: 0.95,
        // decouple the calibration stream from the data stream
        seed: size.seed.wrapping_add(0x9E3779B97F4A7C15),
    };
    let report = match mode {
        "ma" => ma_order_estimate(&x, umax, PolyShape::LagProduct, &thr)?,
        "ar" => ar_order_estimate(&x, smax, &BandedLsEstimator::new(), &thr)?,
        other => {
            return Err(Error::Domain(format!(
                "unknown mode {other:?}: use ma or ar"
            )))
        }
    };
    #[derive(Serialize)]
    struct Config {
        model: String,
        mode: String,
        umax: usize,
        smax: usize,
        n: usize,
        p: usize,
    }
    let env = envelope(
        size.seed,
        Config {
            model: model.describe(),
            mode: mode.to_string(),
            umax,
            smax,
            n: size.n,
            p: size.p,
        },
        report,
    );
    emit(&env, out, "order.json")?;
    Ok(())
}

pub fn tracetest(
    margs: &ModelArgs,
    size: &SizeArgs,
    stat_text: &str,
    reps: usize,
    out: Option<&Path>,
) -> Result<()> {
    let model = resolve_model(margs)?;
    let stat = match stat_text {
        "g0" => TraceStatKind::Gamma0,
        "g1g1t" => TraceStatKind::Lag1Product,
        "g1pg1t" => TraceStatKind::Lag1Symmetrized,
        other => {
            return Err(Error::Domain(format!(
                "unknown statistic {other:?}: use g0, g1g1t or g1pg1t"
            )))
        }
    };
    if reps == 0 {
        return Err(Error::Domain("need --reps >= 1".into()));
    }

    #[derive(Serialize)]
    struct McSummary {
        replications: usize,
        rejection_rate_one_sided_5pct: f64,
        statistic_mean: f64,
        statistic_variance: f64,
    }
    #[derive(Serialize)]
    struct Out {
        single: autocov::inference::TraceTestReport,
        monte_carlo: Option<McSummary>,
    }

    let x = model.simulate(size.p, size.n, size.seed, 0)?;
    let single = white_noise_trace_test(&x, stat, None)?;
    let monte_carlo = if reps > 1 {
        let mut values = Vec::with_capacity(reps);
        let mut rejections = 0usize;
        for rep in 0..reps as u64 {
            let x = model.simulate(size.p, size.n, size.seed, rep)?;
            let r = white_noise_trace_test(&x, stat, None)?;
            values.push(r.value);
            rejections += r.reject_one_sided_5pct as usize;
        }
        let (mean, var, _, _) = autocov::simkit::sample_moments(&values);
        Some(McSummary {
            replications: reps,
            rejection_rate_one_sided_5pct: rejections as f64 / reps as f64,
            statistic_mean: mean,
            statistic_variance: var,
        })
    } else {
        None
    };

    #[derive(Serialize)]
    struct Config {
        model: String,
        statistic: String,
        n: usize,
        p: usize,
        reps: usize,
    }
    let env = envelope(
        size.seed,
        Config {
            model: model.describe(),
            statistic: stat_text.to_string(),
            n: size.n,
            p: size.p,
            reps,
        },
        Out { single, monte_carlo },
    );
    emit(&env, out, "tracetest.json")?;
    Ok(())
}

#[derive(Serialize)]
struct LawRow {
    check: String,
    z: String,
    n_trunc: usize,
    residual_re: f64,
    residual_im: f64,
    residual_abs: f64,
}

pub fn laws(
    check: &str,
    y_text: &str,
    z_text: &str,
    n_trunc: usize,
    u: usize,
    lambda_text: &str,
    out: Option<&Path>,
) -> Result<()> {
    let y = parse_rat(y_text)?;
    let z = parse_complex(z_text)?;
    let lambdas: Result<Vec<Rat>> = lambda_text.split(',').map(|t| parse_rat(t.trim())).collect();
    let lambdas = lambdas?;
    let yf = Scalar::to_f64(&y);
    let mut rows = Vec::new();

    let mut push = |name: &str, r: Complex64| {
        rows.push(LawRow {
            check: name.into(),
            z: z_text.into(),
            n_trunc,
            residual_re: r.re,
            residual_im: r.im,
            residual_abs: r.norm(),
        });
    };

    let wants = |name: &str| check == name || check == "all";
    if wants("biquadratic") {
        let betas: Vec<f64> = cfp_moments(u.max(1), &[Rat::from_integer(1)], &y, n_trunc)?
            .iter()
            .map(Scalar::to_f64)
            .collect();
        let pt = StieltjesPoint::from_moments(z, &betas)?;
        push("biquadratic", biquadratic_residual(&pt, yf));
    }
    if wants("silverstein") {
        let betas = mp_moments_f64(&y, n_trunc.max(24));
        let pt = StieltjesPoint::from_moments(z, &betas)?;
        push(
            "silverstein",
            silverstein_residual(&pt, yf, &[(1.0, 1.0)], Orientation::Conventional)?,
        );
    }
    if wants("cgf") {
        push("cgf", cgf_stieltjes_check(u, &lambdas, &y, z, n_trunc)?);
    }
    if rows.is_empty() {
        return Err(Error::Domain(format!(
            "unknown check {check:?}: use biquadratic, silverstein, cgf or all"
        )));
    }

    #[derive(Serialize)]
    struct Config {
        check: String,
        y: String,
        z: String,
        n_trunc: usize,
        u: usize,
        lambda: String,
    }
    let env = envelope(
        0,
        Config {
            check: check.into(),
            y: y_text.into(),
            z: z_text.into(),
            n_trunc,
            u,
            lambda: lambda_text.into(),
        },
        rows,
    );
    emit(&env, out, "laws.json")?;
    Ok(())
}

pub fn simulate(margs: &ModelArgs, size: &SizeArgs, out: &Path) -> Result<()> {
    let model = resolve_model(margs)?;
    let x = model.simulate(size.p, size.n, size.seed, 0)?;
    ensure_dir(out)?;
    // time-major CSV: row t holds X_t's p components
    let mut buf = String::new();
    for t in 0..x.n() {
        let col = x.col(t);
        for (i, v) in col.iter().enumerate() {
            if i > 0 {
                buf.push(',');
            }
            buf.push_str(&format!("{v:.16e}"));
        }
        buf.push('\n');
    }
    fs::write(out.join("sample.csv"), buf)?;

    #[derive(Serialize)]
    struct Config {
        model: String,
        n: usize,
        p: usize,
    }
    #[derive(Serialize)]
    struct Out {
        files: Vec<String>,
        layout: String,
    }
    let env = envelope(
        size.seed,
        Config {
            model: model.describe(),
            n: size.n,
            p: size.p,
        },
        Out {
            files: vec!["sample.csv".into()],
            layout: "rows are time points t = 1..n, columns are components 1..p".into(),
        },
    );
    emit(&env, Some(out), "sample_manifest.json")?;
    Ok(())
}
