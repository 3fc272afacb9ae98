//! One handler per subcommand. Handlers return plain results; the caller
//! wraps them in the report envelope.

use extint_core::chenstein::stein_bounds;
use extint_core::gauss::{
    bivariate_orthant_prob, equicorr_min_tail_asymptote, field_exceedance_moments, gumbel_quantile, rate_bound_terms,
    std_normal_tail, v_moment_asymptotes,
};
use extint_core::hypothesis::{cov_regime, estimate_m4, mean_equality_test, LimitLawKind};
use extint_core::moments::{classify_regime, Condition};
use extint_core::normseq::{d_n1, d_n2, d_n_y, interpoint_normalizers, qnorm_normalizers};
use extint_core::pairstats::{
    cov_entries, extremes, interpoint_sq_distances, normalized_extremes, qnorm_distances, top_k, WalkKind,
};
use extint_core::simulate::experiment::{
    cov_regime_experiment, first_order_experiment, gumbel_convergence_experiment, joint_minmax_experiment,
    order_stats_experiment, point_process_experiment, v_moment_experiment, CovConfig, ExperimentConfig,
    ExperimentReport, FieldConfig, FirstOrderSource, Region, Statistic,
};
use extint_core::simulate::ks::LimitLaw;
use extint_core::simulate::EntryDistribution;
use extint_core::{pair_count, Error, MomentProfile, Pair, RegimeReport, TailClass};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;
use crate::io::{pair_units, read_rows};
use crate::report::Outcome;

type Res<T> = Result<T, CliError>;

/// 1-based pair for output.
#[derive(Debug, Serialize)]
struct PairOut {
    i: usize,
    j: usize,
}

impl From<Pair> for PairOut {
    fn from(p: Pair) -> Self {
        PairOut { i: p.i + 1, j: p.j + 1 }
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_tail(text: &str) -> Res<TailClass> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |k: usize| -> Res<f64> {
        parts
            .get(k)
            .ok_or_else(|| config(format!("tail '{text}' is missing a parameter")))?
            .parse::<f64>()
            .map_err(|_| config(format!("tail '{text}': bad number")))
    };
    match parts[0] {
        "poly" => Ok(TailClass::Poly { s: num(1)? }),
        "subexp" => Ok(TailClass::SubExp { r: num(1)?, eta: if parts.len() > 2 { num(2)? } else { 0.25 } }),
        "bounded" => Ok(TailClass::Bounded { k: num(1)? }),
        other => Err(config(format!("unknown tail class '{other}' (poly, subexp, bounded)"))),
    }
}

/// Profile from a preset name or explicit moments. Explicit moments without
/// a tail class default to `subexp:0.5:0.25`.
fn profile_from(args: &ProfileArgs) -> Res<Option<MomentProfile>> {
    if let Some(name) = &args.profile {
        return MomentProfile::preset(name).map(Some).ok_or_else(|| {
            config(format!("unknown profile '{name}'; presets: {}", MomentProfile::PRESETS.join(", ")))
        });
    }
    let Some(m4) = args.m4 else { return Ok(None) };
    let class = parse_tail(args.tail.as_deref().unwrap_or("subexp:0.5"))?;
    Ok(Some(MomentProfile::new(args.m3.unwrap_or(0.0), m4, args.m6, class)?))
}

/// Regime for a profile, falling back to `d_n1` norming when no moment
/// condition applies.
fn regime_for(profile: &MomentProfile, n: usize, p: usize, warnings: &mut Vec<String>) -> Res<RegimeReport> {
    match classify_regime(profile, n, p) {
        Ok(r) => Ok(r),
        Err(Error::NoCondition(msg)) => {
            warnings.push(format!("no moment condition applies ({msg}); using d_n1 norming"));
            Ok(RegimeReport { condition: Condition::B1, rate_exponent: f64::NAN, dnorm_choice: false })
        }
        Err(e) => Err(e.into()),
    }
}

fn parse_statistic(s: &str) -> Res<Statistic> {
    match s {
        "interpoint" => Ok(Statistic::Interpoint),
        "sqdiff" => Ok(Statistic::Walk(WalkKind::SqDiff)),
        "product" => Ok(Statistic::Walk(WalkKind::Product)),
        _ => match s.strip_prefix("absq:") {
            Some(q) => {
                Ok(Statistic::Walk(WalkKind::AbsQ(q.parse().map_err(|_| config(format!("bad exponent in '{s}'")))?)))
            }
            None => Err(config(format!("unknown statistic '{s}' (interpoint, sqdiff, product, absq:Q)"))),
        },
    }
}

fn walk_config(w: &WalkSimArgs) -> Res<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(
        EntryDistribution::from_name(&w.dist)?,
        parse_statistic(&w.stat)?,
        w.n,
        w.p,
        w.sim.reps,
        w.sim.seed,
    );
    cfg.allow_large = w.sim.allow_large;
    Ok(cfg)
}

fn experiment(report: ExperimentReport) -> Res<Outcome> {
    let mut results = serde_json::to_value(&report)?;
    if let Value::Object(m) = &mut results {
        m.remove("samples");
        m.remove("runtime_secs");
    }
    Ok(Outcome {
        results,
        master_seed: Some(report.master_seed),
        columns: report.sample_columns,
        samples: Some(report.samples),
    })
}

fn plain(results: Value) -> Res<Outcome> {
    Ok(Outcome { results, ..Default::default() })
}

pub fn run(cmd: &Command) -> Res<Outcome> {
    match cmd {
        Command::Normalize(a) => normalize(a),
        Command::Maxdist(a) => maxdist(a),
        Command::TestMeans(a) => test_means(a),
        Command::CovMax(a) => cov_max(a),
        Command::Chenstein(a) => chenstein(a),
        Command::Oracle(o) => oracle(o),
        Command::Simulate(s) => simulate(s),
    }
}

fn normalize(a: &NormalizeArgs) -> Res<Outcome> {
    let profile = profile_from(&a.profile)?.ok_or_else(|| config("give --profile or --m4"))?;
    let mut warnings = Vec::new();
    let regime = regime_for(&profile, a.n, a.p, &mut warnings)?;
    let norm = interpoint_normalizers(a.n, a.p, &profile, &regime)?;
    plain(json!({
        "n": a.n,
        "p": a.p,
        "pair_count": pair_count(a.p),
        "profile": profile,
        "rho": profile.rho(),
        "kappa_tilde": profile.kappa_tilde().ok(),
        "regime": regime,
        "b": norm.b,
        "c": norm.c,
        "d": norm.d,
        "d_kind": norm.d_kind,
        "warnings": warnings,
    }))
}

fn maxdist(a: &MaxdistArgs) -> Res<Outcome> {
    let x = pair_units(read_rows(&a.input.input, a.input.header)?, a.layout)?;
    let (n, p) = (x.n(), x.p());
    if p < 2 {
        return Err(CliError::Data("need at least two vectors".into()));
    }
    let field = if a.q == 2.0 { interpoint_sq_distances(&x) } else { qnorm_distances(&x, a.q)? };
    let mut warnings = Vec::new();
    let norm = if a.q == 2.0 {
        if a.dist.is_some() {
            return Err(config("--dist applies to q != 2; use --profile for q = 2"));
        }
        match profile_from(&a.profile)? {
            Some(profile) => {
                let regime = regime_for(&profile, n, p, &mut warnings)?;
                Some(interpoint_normalizers(n, p, &profile, &regime)?)
            }
            None => None,
        }
    } else {
        if a.profile.profile.is_some() || a.profile.m4.is_some() {
            return Err(config("q != 2 is normalized from --dist, not a moment profile"));
        }
        match &a.dist {
            Some(name) => {
                let dist = EntryDistribution::from_name(name)?;
                let m1 = dist.abs_diff_moment(a.q)?;
                let m2 = dist.abs_diff_moment(2.0 * a.q)?;
                Some(qnorm_normalizers(n, p, m1, m2 - m1 * m1)?)
            }
            None => None,
        }
    };
    let scale = |v: f64| {
        if a.root {
            v.max(0.0).powf(1.0 / a.q)
        } else {
            v
        }
    };
    let e = match &norm {
        Some(nm) => normalized_extremes(&field, nm),
        None => extremes(&field),
    };
    let top = if a.top > 0 {
        top_k(&field, a.top.min(field.len()))?
            .into_iter()
            .map(|(v, pr)| json!({"value": scale(v), "pair": PairOut::from(pr)}))
            .collect()
    } else {
        Vec::new()
    };
    plain(json!({
        "n": n,
        "p": p,
        "q": a.q,
        "scale": if a.root { "root" } else { "sum" },
        "max": {"value": scale(e.max_value), "pair": PairOut::from(e.argmax)},
        "min": {"value": scale(e.min_value), "pair": PairOut::from(e.argmin)},
        "normalizers": norm,
        "normalized_max": e.normalized_max,
        "normalized_min": e.normalized_min,
        "top": top,
        "warnings": warnings,
    }))
}

fn test_means(a: &TestMeansArgs) -> Res<Outcome> {
    let x = pair_units(read_rows(&a.input.input, a.input.header)?, a.layout)?;
    let profile = if a.estimate_m4 {
        MomentProfile::new(0.0, estimate_m4(&x), None, TailClass::SubExp { r: 0.5, eta: 0.25 })?
    } else {
        profile_from(&a.profile)?.ok_or_else(|| config("give --profile, --m4 or --estimate-m4"))?
    };
    let mut warnings = Vec::new();
    let regime = regime_for(&profile, x.n(), x.p(), &mut warnings)?;
    let r = mean_equality_test(&x, &profile, a.alpha, &regime)?;
    plain(json!({
        "n": x.n(),
        "p": x.p(),
        "m4": profile.m4,
        "alpha": r.alpha,
        "statistic": r.statistic,
        "threshold": r.threshold,
        "reject": r.reject,
        "argmax_pair": PairOut::from(r.argmax_pair),
        "normalizers": r.normalizers,
        "warnings": warnings,
    }))
}

fn cov_max(a: &CovMaxArgs) -> Res<Outcome> {
    let cols = pair_units(read_rows(&a.input.input, a.input.header)?, a.layout)?;
    let (p, n) = (cols.p(), cols.n());
    if p < 2 {
        return Err(CliError::Data("need at least two variables".into()));
    }
    let e = extremes(&cov_entries(&cols));
    let mut out = json!({
        "n": n,
        "p": p,
        "w": e.max_value,
        "pair": PairOut::from(e.argmax),
    });
    if let Some(rho) = a.rho {
        let reg = cov_regime(rho, p, n, a.lambda_hint)?;
        let z = reg.normalize(e.max_value);
        let law = match reg.limit_law {
            LimitLawKind::Gumbel => LimitLaw::Gumbel,
            LimitLawKind::NormalPlusScaledGumbel(lambda) => LimitLaw::Convolution { lambda },
            LimitLawKind::Normal => LimitLaw::Normal,
        };
        out["regime"] = serde_json::to_value(reg)?;
        out["normalized"] = json!(z);
        out["limit_cdf"] = json!(law.cdf(z));
    }
    plain(out)
}

fn chenstein(a: &ChensteinArgs) -> Res<Outcome> {
    let (marginal, joint, u) = match (a.marginal, a.joint, a.rho, a.x) {
        (Some(m), Some(j), None, None) => (m, j, None),
        (None, None, Some(rho), Some(x)) => {
            let d = d_n1(pair_count(a.p))?;
            let u = d + x / d;
            (std_normal_tail(u), bivariate_orthant_prob(rho, u)?, Some(u))
        }
        _ => return Err(config("give either --marginal and --joint, or --rho and --x")),
    };
    let b = stein_bounds(a.p, marginal, joint, a.b3)?;
    let mut out = serde_json::to_value(b)?;
    out["p"] = json!(a.p);
    out["marginal"] = json!(marginal);
    out["joint"] = json!(joint);
    out["threshold"] = json!(u);
    plain(out)
}

fn oracle(o: &OracleCommand) -> Res<Outcome> {
    match *o {
        OracleCommand::Orthant { rho, t } => {
            plain(json!({"rho": rho, "t": t, "value": bivariate_orthant_prob(rho, t)?}))
        }
        OracleCommand::Asymptote { d, rho, t } => {
            let a = equicorr_min_tail_asymptote(d, rho, t)?;
            let mut out = serde_json::to_value(a)?;
            if d == 2 {
                out["exact"] = json!(bivariate_orthant_prob(rho, t)?);
            }
            plain(out)
        }
        OracleCommand::Vmoments { p, rho, x } => {
            let d = d_n1(pair_count(p))?;
            let u = d + x / d;
            let (e1, e2) = field_exceedance_moments(p, rho, u)?;
            let (l1, l2) = v_moment_asymptotes(p, rho, x)?;
            plain(
                json!({"p": p, "rho": rho, "x": x, "u": u, "exact_mean": e1, "exact_second": e2, "limit_mean": l1, "limit_second": l2}),
            )
        }
        OracleCommand::Rate { p, n, rho } => plain(serde_json::to_value(rate_bound_terms(p, n, rho)?)?),
        OracleCommand::Dseq { p, n, y } => {
            let m = pair_count(p);
            let mut out = json!({"p": p, "pair_count": m, "d_n1": d_n1(m)?, "d_n2": d_n2(p as u64)?});
            if let (Some(n), Some(y)) = (n, y) {
                out["d_n_y"] = json!(d_n_y(p, n, y)?);
            }
            plain(out)
        }
        OracleCommand::GumbelQuantile { alpha } => plain(json!({"alpha": alpha, "value": gumbel_quantile(alpha)?})),
    }
}

fn simulate(s: &SimulateCommand) -> Res<Outcome> {
    let report = match s {
        SimulateCommand::Gumbel(w) => gumbel_convergence_experiment(&walk_config(w)?)?,
        SimulateCommand::Joint(w) => joint_minmax_experiment(&walk_config(w)?)?,
        SimulateCommand::FirstOrder(f) => {
            let source = match f.rho {
                Some(rho) => {
                    let mut fc = FieldConfig::new(f.p, rho, 0.0, f.sim.reps, f.sim.seed);
                    fc.allow_large = f.sim.allow_large;
                    FirstOrderSource::Field(fc)
                }
                None => {
                    let n = f.n.ok_or_else(|| config("--n is required without --rho"))?;
                    let w = WalkSimArgs {
                        dist: f.dist.clone(),
                        stat: f.stat.clone(),
                        n,
                        p: f.p,
                        sim: SimArgs { reps: f.sim.reps, seed: f.sim.seed, allow_large: f.sim.allow_large },
                    };
                    FirstOrderSource::Walk(walk_config(&w)?)
                }
            };
            first_order_experiment(&source)?
        }
        SimulateCommand::Pointprocess { walk, x } => {
            let regions: Vec<Region> = x.iter().map(|&t| Region::tail(t)).collect();
            point_process_experiment(&walk_config(walk)?, &regions)?
        }
        SimulateCommand::Orderstats { walk, k } => order_stats_experiment(&walk_config(walk)?, *k)?,
        SimulateCommand::Vmoment { p, rho, x, sim } => {
            let mut fc = FieldConfig::new(*p, *rho, *x, sim.reps, sim.seed);
            fc.allow_large = sim.allow_large;
            v_moment_experiment(&fc)?
        }
        SimulateCommand::CovRegime { n, p, rho, lambda_hint, sim } => cov_regime_experiment(&CovConfig {
            n: *n,
            p: *p,
            rho_n: *rho,
            lambda_hint: *lambda_hint,
            replications: sim.reps,
            master_seed: sim.seed,
            allow_large: sim.allow_large,
        })?,
    };
    experiment(report)
}

/// Subcommand path such as `simulate gumbel`.
pub fn name(cmd: &Command) -> String {
    match cmd {
        Command::Normalize(_) => "normalize".into(),
        Command::Maxdist(_) => "maxdist".into(),
        Command::TestMeans(_) => "test-means".into(),
        Command::CovMax(_) => "cov-max".into(),
        Command::Chenstein(_) => "chenstein".into(),
        Command::Oracle(o) => format!(
            "oracle {}",
            match o {
                OracleCommand::Orthant { .. } => "orthant",
                OracleCommand::Asymptote { .. } => "asymptote",
                OracleCommand::Vmoments { .. } => "vmoments",
                OracleCommand::Rate { .. } => "rate",
                OracleCommand::Dseq { .. } => "dseq",
                OracleCommand::GumbelQuantile { .. } => "gumbel-quantile",
            }
        ),
        Command::Simulate(s) => format!(
            "simulate {}",
            match s {
                SimulateCommand::Gumbel(_) => "gumbel",
                SimulateCommand::Joint(_) => "joint",
                SimulateCommand::FirstOrder(_) => "first-order",
                SimulateCommand::Pointprocess { .. } => "pointprocess",
                SimulateCommand::Orderstats { .. } => "orderstats",
                SimulateCommand::Vmoment { .. } => "vmoment",
                SimulateCommand::CovRegime { .. } => "cov-regime",
            }
        ),
    }
}

/// Resolved arguments of the innermost subcommand, with the enum tags
/// stripped.
pub fn resolved_config(cmd: &Command) -> Res<Value> {
    let mut v = serde_json::to_value(cmd)?;
    for _ in 0..name(cmd).split(' ').count() {
        v = match v {
            Value::Object(m) if m.len() == 1 => m.into_iter().next().map(|(_, inner)| inner).unwrap_or(Value::Null),
            other => other,
        };
    }
    Ok(v)
}
