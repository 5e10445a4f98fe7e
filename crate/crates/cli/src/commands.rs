use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Args;
use coker_core::equidist::{
    moment_tail_sum, norms_and_theta, parse_rational, replacement_sweep, ConvergenceParams, EntryDistribution,
};
use coker_core::matrix::{cokernel, determinant, howell_form, smith_normal_form, MatrixOverR};
use coker_core::measures::{rational_to_f64, sweep_measures, Decomposer, Rational, SignedMeasure};
use coker_core::modules::{ConcreteModule, ModuleType};
use coker_core::montecarlo::{
    column_swap_exact, exact_distribution, fit_rate, run_experiment, substream, ExperimentPlan, Invariant, RatePoint,
    StreamTag, DEFAULT_RESAMPLES,
};
use coker_core::theory_dist::{LimitLaw, DEFAULT_TERMS};
use coker_core::{Error, Result, Ring};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::config::{parse_n_values, Config, NValues};
use crate::render::Rendered;

fn s(x: impl Display) -> String {
    x.to_string()
}

/// Seed from the flag, then the config, else fresh from the clock (printed so the run can be repeated).
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> u64 {
    flag.or(config).unwrap_or_else(|| {
        let seed = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0);
        eprintln!("seed: {seed}");
        seed
    })
}

fn required<T: Clone>(flag: &Option<T>, config: &Option<T>, name: &str) -> Result<T> {
    flag.clone().or_else(|| config.clone()).ok_or_else(|| Error::usage(format!("--{name} is required")))
}

fn rational_or(flag: &Option<String>, config: &Option<String>, default: Rational) -> Result<Rational> {
    match flag.as_ref().or(config.as_ref()) {
        Some(text) => parse_rational(text),
        None => Ok(default),
    }
}

fn type_label(t: &ModuleType) -> String {
    if t.is_trivial() {
        "trivial".into()
    } else {
        t.shorthand()
    }
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long)]
    ring: String,
    /// Extra columns: matrices are n x (n + u).
    #[arg(long, default_value_t = 0)]
    u: u32,
    /// Number of rows to print.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Largest `log_q |A|` considered.
    #[arg(long, default_value_t = 6)]
    max_length: u32,
    /// Factors kept in each infinite product.
    #[arg(long, default_value_t = DEFAULT_TERMS)]
    terms: u32,
}

pub fn dist(a: &DistArgs) -> Result<Rendered> {
    let ring = Ring::parse(&a.ring)?;
    let law = LimitLaw::new(ring.spec(), a.u, a.terms)?;
    let mut table = law.table(a.max_length)?;
    table.truncate(a.top);
    let rows = table
        .iter()
        .map(|(t, p)| vec![type_label(t), format!("{:e}", p.value), format!("{:e}", p.tail_bound)])
        .collect();
    let human = table
        .iter()
        .map(|(t, p)| vec![type_label(t), format!("{:.6}", p.value), format!("{:.1e}", p.tail_bound)])
        .collect();
    let body: Vec<Value> = table
        .iter()
        .map(|(t, p)| json!({"module_type": t.shorthand(), "probability": p.value, "tail_bound": p.tail_bound}))
        .collect();
    Ok(Rendered::new("dist", json!({"law": law, "rows": body}))
        .columns(&["module_type", "probability", "tail_bound"], rows)
        .human(&["module_type", "probability", "tail_bound"], human))
}

fn read_matrix(ring: &str, matrix: &str) -> Result<(Ring, MatrixOverR)> {
    let ring = Ring::parse(ring)?;
    let m = MatrixOverR::parse(&ring, matrix)?;
    Ok((ring, m))
}

pub fn snf(ring: &str, matrix: &str) -> Result<Rendered> {
    let (ring, m) = read_matrix(ring, matrix)?;
    let form = smith_normal_form(&m, false);
    let mut diag = MatrixOverR::zeros(&ring, m.rows(), m.cols());
    for (i, &a) in form.exponents.iter().enumerate() {
        diag.set(i, i, ring.pi_pow(a));
    }
    let exps: Vec<String> = form.exponents.iter().map(|x| x.to_string()).collect();
    let rows = form.exponents.iter().enumerate().map(|(i, a)| vec![s(i), s(a), s(ring.pi_pow(*a))]).collect();
    Ok(Rendered::new("snf", json!({"ring": ring.spec().to_string(), "matrix": m.to_text(), "exponents": form.exponents, "diagonal": diag.to_text()}))
        .columns(&["position", "exponent", "diagonal_entry"], rows)
        .human(&[], vec![])
        .note(format!("exponents ({})", exps.join(",")))
        .note(format!("diagonal {}", diag.to_text())))
}

pub fn coker(ring: &str, matrix: &str) -> Result<Rendered> {
    let (ring, m) = read_matrix(ring, matrix)?;
    let t = cokernel(&m);
    let order = t.cardinality().to_string();
    Ok(Rendered::new("coker", json!({"ring": ring.spec().to_string(), "matrix": m.to_text(), "cokernel": t.shorthand(), "order": order}))
        .columns(&["cokernel", "order"], vec![vec![t.shorthand(), order]])
        .human(&[], vec![])
        .note(t.shorthand()))
}

pub fn det(ring: &str, matrix: &str) -> Result<Rendered> {
    let (ring, m) = read_matrix(ring, matrix)?;
    let d = determinant(&m)?;
    let v = ring.valuation(d)?;
    Ok(Rendered::new("det", json!({"ring": ring.spec().to_string(), "matrix": m.to_text(), "det": d.code(), "valuation": v}))
        .columns(&["det", "valuation"], vec![vec![s(d.code()), s(v)]])
        .human(&[], vec![])
        .note(s(d.code())))
}

pub fn span(ring: &str, matrix: &str) -> Result<Rendered> {
    let (ring, m) = read_matrix(ring, matrix)?;
    let h = howell_form(&m);
    let length = h.span_length(&ring);
    let generators = h.as_matrix(&ring).to_text();
    Ok(Rendered::new(
        "span",
        json!({"ring": ring.spec().to_string(), "matrix": m.to_text(), "encoding": h.encoding(), "generators": generators, "span_length": length}),
    )
    .columns(&["encoding", "span_length"], vec![vec![h.encoding(), s(length)]])
    .human(&[], vec![])
    .note(h.encoding())
    .note(format!("generators {generators}")))
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long)]
    ring: String,
    /// Module type such as `[2,1]` or `R/pi^2 + R/pi`.
    #[arg(long)]
    module: String,
    /// Weights in element order (first coordinate most significant), e.g. `1/2,0,1/4,1/4`.
    #[arg(long, conflicts_with = "seed")]
    measure: Option<String>,
    /// Draw a random signed measure from this seed when no measure is given.
    #[arg(long)]
    seed: Option<u64>,
    /// Also list the components that vanish identically.
    #[arg(long)]
    all: bool,
}

fn element_text(module: &ConcreteModule, x: u32) -> String {
    let c: Vec<String> = module.decode(x).iter().map(|v| v.to_string()).collect();
    format!("({})", c.join(","))
}

pub fn decompose(a: &DecomposeArgs) -> Result<Rendered> {
    let ring = Ring::parse(&a.ring)?;
    let t = ModuleType::parse(ring.spec(), &a.module)?;
    let module = Arc::new(ConcreteModule::new(&ring, t.clone())?);
    let (nu, seed) = match &a.measure {
        Some(text) => {
            let weights = text.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
            if weights.len() != module.size() as usize {
                return Err(Error::usage(format!("measure has {} weights, module has {} elements", weights.len(), module.size())));
            }
            (SignedMeasure::from_rationals(module.clone(), &weights)?, None)
        }
        None => {
            let seed = resolve_seed(a.seed, None);
            let mut rng = substream(seed, 0, StreamTag::Sweep, 0);
            let num = (0..module.size()).map(|_| rng.random_range(-9i128..=9)).collect();
            (SignedMeasure::from_integers(module.clone(), num, rng.random_range(1..=12))?, Some(seed))
        }
    };
    let dec = Decomposer::new(module.clone())?;
    let mut rows = Vec::new();
    let mut body = Vec::new();
    for c in dec.decompose(&nu)? {
        let dim = dec.dimension_formula(c.kernel);
        if dim == 0 && !a.all {
            continue;
        }
        let gens: Vec<String> = c.kernel_generators.iter().map(|&g| element_text(&module, g)).collect();
        let kernel = format!("<{}>", gens.join(" "));
        let l1 = c.component.l1_norm()?;
        let l2sq = c.component.l2_norm_squared()?;
        rows.push(vec![
            kernel.clone(),
            c.quotient.shorthand(),
            s(dim),
            s(l1),
            format!("{:.6}", rational_to_f64(&l1)),
            s(l2sq),
            format!("{:.6}", rational_to_f64(&l2sq).sqrt()),
        ]);
        body.push(json!({
            "kernel": kernel,
            "kernel_generators": c.kernel_generators,
            "quotient": c.quotient.shorthand(),
            "dimension": dim,
            "l1": l1.to_string(),
            "l2_squared": l2sq.to_string(),
            "weights": c.component.weights().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        }));
    }
    let measure: Vec<String> = nu.weights().iter().map(|w| w.to_string()).collect();
    let mut out = Rendered::new(
        "decompose",
        json!({"ring": ring.spec().to_string(), "module": t.shorthand(), "seed": seed, "measure": measure, "components": body}),
    )
    .columns(&["kernel", "quotient", "dim", "l1", "l1_decimal", "l2_squared", "l2_decimal"], rows);
    if let Some(seed) = seed {
        out = out.note(format!("seed {seed}"));
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct VerifyMeasuresArgs {
    #[arg(long)]
    ring: Option<String>,
    /// Largest module order swept.
    #[arg(long)]
    max_module: Option<u32>,
    /// Random signed and random probability measures per module.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn verify_measures(a: &VerifyMeasuresArgs, c: &Config) -> Result<Rendered> {
    let ring = Ring::parse(&required(&a.ring, &c.ring, "ring")?)?;
    let max_module = a.max_module.or(c.max_module).unwrap_or(16);
    let trials = a.trials.or(c.trials).unwrap_or(100);
    let seed = resolve_seed(a.seed, c.seed);
    let sweep = sweep_measures(&ring, max_module, trials, seed)?;
    let rows = sweep
        .modules
        .iter()
        .map(|m| {
            vec![
                m.module.clone(),
                s(m.order),
                s(m.submodules),
                s(m.dimensions_ok),
                s(m.reconstruction_failures),
                s(m.orthogonality_failures),
                format!("{}/{}", m.inequality_violations, m.inequality_checks),
                format!("{}/{}", m.l1_violations, m.l1_checks),
                s(m.passed()),
            ]
        })
        .collect();
    let passed = sweep.passed;
    Ok(Rendered::new("verify measures", &sweep)
        .columns(
            &["module", "order", "submodules", "dimensions_ok", "reconstruction_failures", "orthogonality_failures", "inequality_violations", "l1_violations", "passed"],
            rows,
        )
        .note(format!("seed {seed}"))
        .note(if passed { "all checks passed" } else { "FAILED" })
        .passed(passed))
}

#[derive(Args, Debug)]
pub struct VerifyMomentArgs {
    #[arg(long)]
    ring: Option<String>,
    /// Entry law such as `0:1/2,1:1/2`, or `haar`.
    #[arg(long)]
    entry: Option<String>,
    /// Target module type.
    #[arg(long)]
    module: String,
    /// Values of l, e.g. `2..8`.
    #[arg(long, default_value = "2..6")]
    l: String,
    /// Number of columns is `l + k_offset`.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    k_offset: i32,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    eps0: Option<String>,
    #[arg(long)]
    eps_prime: Option<String>,
    /// Random uniform-replacement patterns checked per l.
    #[arg(long, default_value_t = 0)]
    replacements: usize,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn verify_moment(a: &VerifyMomentArgs, c: &Config) -> Result<Rendered> {
    let ring = Ring::parse(&required(&a.ring, &c.ring, "ring")?)?;
    let xi = EntryDistribution::parse(&ring, &required(&a.entry, &c.entry, "entry")?)?;
    let module = ModuleType::parse(ring.spec(), &a.module)?;
    let defaults = ConvergenceParams::default();
    let params = ConvergenceParams::new(
        rational_or(&a.eps, &c.epsilon, defaults.epsilon)?,
        rational_or(&a.eps0, &c.epsilon0, defaults.epsilon0)?,
        rational_or(&a.eps_prime, &c.epsilon_prime, defaults.epsilon_prime)?,
    )?;
    let ls = parse_n_values(&a.l)?;
    let bound_q = (Rational::from(1) - xi.beta()) * (Rational::from(1) + params.epsilon_prime);
    let bound = BigRational::new((*bound_q.numer()).into(), (*bound_q.denom()).into());
    let seed = (a.replacements > 0).then(|| resolve_seed(a.seed, c.seed));
    let mut rows = Vec::new();
    let mut tails = Vec::new();
    let mut replacements = Vec::new();
    let mut decay_ok = true;
    let mut replacement_ok = true;
    let mut previous: Option<(u32, BigRational)> = None;
    for &l in &ls {
        let k = l as i64 + a.k_offset as i64;
        if k < 1 {
            return Err(Error::usage(format!("l + k_offset = {k} must be positive")));
        }
        let tail = moment_tail_sum(&module, &xi, l, k as u32, &params)?;
        let (ratio, ok) = match &previous {
            Some((pl, pv)) if pl + 1 == l => {
                let ratio = if pv.is_zero() { None } else { Some(&tail.value / pv) };
                // the decay bound applies from l = 3 onward
                let ok = *pl < 3 || if pv.is_zero() { tail.value.is_zero() } else { &tail.value <= &(&bound * pv) };
                (ratio, Some(ok))
            }
            _ => (None, None),
        };
        decay_ok &= ok.unwrap_or(true);
        rows.push(vec![
            s(l),
            s(k),
            s(&tail.value),
            format!("{:e}", tail.decimal),
            ratio.as_ref().map(|r| format!("{:.6}", r.to_f64().unwrap_or(f64::NAN))).unwrap_or_default(),
            s(&tail.by_type[0]),
            s(&tail.by_type[1]),
            s(&tail.by_type[2]),
            ok.map(s).unwrap_or_default(),
        ]);
        if let Some(seed) = seed {
            let reps = replacement_sweep(&module, &xi, l, k as u32, a.replacements, seed, &params)?;
            replacement_ok &= reps.iter().all(|r| r.holds);
            replacements.push(json!({"l": l, "holds": reps.iter().filter(|r| r.holds).count(), "checked": reps.len(), "reports": reps}));
        }
        previous = Some((l, tail.value.clone()));
        tails.push(tail);
    }
    let passed = decay_ok && replacement_ok;
    let mut out = Rendered::new(
        "verify moment",
        json!({
            "ring": ring.spec().to_string(),
            "entry": xi.to_string(),
            "module": module.shorthand(),
            "k_offset": a.k_offset,
            "params": params,
            "beta": xi.beta().to_string(),
            "decay_bound": bound_q.to_string(),
            "tails": tails,
            "decay_holds": decay_ok,
            "seed": seed,
            "replacements": replacements,
        }),
    )
    .columns(&["l", "k", "sum", "decimal", "ratio", "type1", "type2", "type3", "decay_ok"], rows)
    .note(format!("decay bound (1 - beta)(1 + eps') = {bound_q}"))
    .passed(passed);
    if let Some(seed) = seed {
        out = out.note(format!("uniform replacement: {} (seed {seed})", if replacement_ok { "holds" } else { "VIOLATED" }));
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct VerifySwapArgs {
    #[arg(long)]
    ring: Option<String>,
    #[arg(long)]
    entry: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<i32>,
    #[arg(long)]
    n: Option<String>,
    /// Sampled matrices per n.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest acceptable fitted decay rate.
    #[arg(long)]
    theta_max: Option<f64>,
}

pub fn verify_swap(a: &VerifySwapArgs, c: &Config) -> Result<Rendered> {
    let ring = Ring::parse(&required(&a.ring, &c.ring, "ring")?)?;
    let xi = EntryDistribution::parse(&ring, &required(&a.entry, &c.entry, "entry")?)?;
    let u = a.u.or(c.u).unwrap_or(0);
    let ns = n_values(&a.n, &c.n, "2..6")?;
    let samples = a.samples.or(c.samples).unwrap_or(200) as usize;
    let seed = resolve_seed(a.seed, c.seed);
    let theta_max = a.theta_max.or(c.theta_max).unwrap_or(0.85);
    let mut reports = Vec::new();
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &n in &ns {
        let r = column_swap_exact(&xi, n, u, samples, seed)?;
        let half = 1.96 * r.std_error;
        points.push(RatePoint::new(n, r.mean, [r.mean - half, r.mean + half], 0.0));
        rows.push(vec![s(n), format!("{:.6}", r.mean), format!("{:.6}", r.std_error), r.mean_exact.clone()]);
        reports.push(r);
    }
    let theory = norms_and_theta(&xi, None).theta_lower;
    let fit = fit_rate(points, Some(theta_max), 1.0);
    let passed = matches!(&fit, Ok(f) if f.within_bound == Some(true));
    let fit_note = match &fit {
        Ok(f) => format!("fitted theta {:.4} (95% CI {:.4}..{:.4}); limit {theta_max}; theory {theory:.4}", f.theta_hat, f.theta_ci[0], f.theta_ci[1]),
        Err(e) => format!("no fit: {e}"),
    };
    Ok(Rendered::new(
        "verify swap",
        json!({
            "ring": ring.spec().to_string(),
            "entry": xi.to_string(),
            "u": u,
            "samples": samples,
            "seed": seed,
            "per_n": reports.iter().map(|r| json!({"n": r.n, "mean": r.mean, "std_error": r.std_error, "mean_exact": r.mean_exact})).collect::<Vec<_>>(),
            "theta_lower": theory,
            "theta_max": theta_max,
            "rate_fit": fit.as_ref().ok(),
            "rate_fit_error": fit.as_ref().err().map(|e| e.to_string()),
        }),
    )
    .columns(&["n", "mean_tv", "std_error", "mean_exact"], rows)
    .note(fit_note)
    .note(format!("seed {seed}"))
    .passed(passed))
}

fn n_values(flag: &Option<String>, config: &Option<NValues>, default: &str) -> Result<Vec<u32>> {
    match (flag, config) {
        (Some(text), _) => parse_n_values(text),
        (None, Some(n)) => n.resolve(),
        (None, None) => parse_n_values(default),
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    ring: Option<String>,
    #[arg(long)]
    entry: Option<String>,
    /// Column offset; matrices are n x (n + u). May be negative.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<i32>,
    /// Values of n, e.g. `2..8`.
    #[arg(long)]
    n: Option<String>,
    /// Samples per n and model.
    #[arg(long)]
    samples: Option<u64>,
    /// One of coker, det, span, coker-det, span-det.
    #[arg(long)]
    invariant: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Bootstrap resamples for TV intervals.
    #[arg(long)]
    resamples: Option<usize>,
    /// Write `n tv ci_low ci_high noise_floor ln_tv` rows for plotting.
    #[arg(long, value_name = "PATH")]
    emit_plot: Option<PathBuf>,
    /// Enumerate every matrix with exact weights instead of sampling.
    #[arg(long)]
    exact: bool,
}

fn build_plan(a: &SimulateArgs, c: &Config) -> Result<ExperimentPlan> {
    let ring = Ring::parse(&required(&a.ring, &c.ring, "ring")?)?;
    let entry = EntryDistribution::parse(&ring, &required(&a.entry, &c.entry, "entry")?)?;
    let invariant: Invariant = match a.invariant.as_ref().or(c.invariant.as_ref()) {
        Some(text) => text.parse()?,
        None => Invariant::Coker,
    };
    let plan = ExperimentPlan {
        entry,
        u: a.u.or(c.u).unwrap_or(0),
        n_values: n_values(&a.n, &c.n, "2..6")?,
        samples: a.samples.or(c.samples).unwrap_or(10_000),
        invariant,
        seed: resolve_seed(a.seed, c.seed),
        workers: a.workers.or(c.workers).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        resamples: a.resamples.or(c.resamples).unwrap_or(DEFAULT_RESAMPLES),
    };
    plan.validate()?;
    Ok(plan)
}

pub fn simulate(a: &SimulateArgs, c: &Config) -> Result<Rendered> {
    let plan = build_plan(a, c)?;
    if a.exact {
        return simulate_exact(&plan);
    }
    let result = run_experiment(&plan)?;
    let report = result.report();
    let mut rows = Vec::new();
    for e in &report.per_n {
        let extra = |v: Option<f64>| v.map(s).unwrap_or_default();
        for h in &e.histogram {
            rows.push(vec![
                s(e.n),
                s(serde_json::to_value(e.model).expect("model").as_str().unwrap_or_default()),
                h.class.clone(),
                s(h.count),
                extra(e.tv_vs_haar),
                extra(e.ci.map(|c| c[0])),
                extra(e.ci.map(|c| c[1])),
                extra(e.noise_floor),
            ]);
        }
    }
    let human = result
        .per_n
        .iter()
        .map(|r| {
            vec![
                s(r.n),
                format!("{:.4}", r.tv.tv),
                format!("[{:.4}, {:.4}]", r.tv.ci[0], r.tv.ci[1]),
                format!("{:.4}", r.noise_floor),
                s(r.iid.full.counts.len()),
                s(r.haar.full.counts.len()),
            ]
        })
        .collect();
    if let Some(path) = &a.emit_plot {
        let mut text = String::from("# n tv ci_low ci_high noise_floor ln_tv\n");
        for r in &result.per_n {
            text.push_str(&format!("{} {} {} {} {} {}\n", r.n, r.tv.tv, r.tv.ci[0], r.tv.ci[1], r.noise_floor, r.tv.tv.ln()));
        }
        fs::write(path, text).map_err(|e| Error::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let fit_note = match &result.rate_fit {
        Ok(f) => format!("fitted theta {:.4} (95% CI {:.4}..{:.4}), lower bound {:.4}", f.theta_hat, f.theta_ci[0], f.theta_ci[1], f.theta_bound.unwrap_or(f64::NAN)),
        Err(e) => format!("no rate fit: {e}"),
    };
    Ok(Rendered::new("simulate", &report)
        .columns(&["n", "model", "class", "count", "tv_vs_haar", "ci_low", "ci_high", "noise_floor"], rows)
        .human(&["n", "tv_vs_haar", "ci", "noise_floor", "iid_classes", "haar_classes"], human)
        .note(fit_note)
        .note(format!("seed {}", plan.seed)))
}

fn simulate_exact(plan: &ExperimentPlan) -> Result<Rendered> {
    let haar = EntryDistribution::haar(plan.ring());
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    let mut human = Vec::new();
    for &n in &plan.n_values {
        let iid = exact_distribution(&plan.entry, n, plan.u, plan.invariant)?;
        let uni = exact_distribution(&haar, n, plan.u, plan.invariant)?;
        let mut tv = BigRational::zero();
        for class in iid.keys().chain(uni.keys().filter(|k| !iid.contains_key(*k))) {
            let zero = BigRational::zero();
            let d = iid.get(class).unwrap_or(&zero) - uni.get(class).unwrap_or(&zero);
            tv += if d < zero { -d } else { d };
        }
        tv /= BigRational::from_integer(2.into());
        for (model, law) in [("iid", &iid), ("haar", &uni)] {
            for (class, p) in law {
                rows.push(vec![s(n), model.into(), class.clone(), s(p), s(p.to_f64().unwrap_or(f64::NAN))]);
            }
            per_n.push(json!({
                "n": n,
                "model": model,
                "law": law.iter().map(|(c, p)| json!({"class": c, "probability": p.to_string()})).collect::<Vec<_>>(),
            }));
        }
        human.push(vec![s(n), s(&tv), format!("{:.6}", tv.to_f64().unwrap_or(f64::NAN)), s(iid.len()), s(uni.len())]);
        per_n.push(json!({"n": n, "tv_vs_haar": tv.to_string()}));
    }
    Ok(Rendered::new(
        "simulate",
        json!({
            "mode": "exact",
            "ring": plan.ring().spec().to_string(),
            "entry": plan.entry.to_string(),
            "u": plan.u,
            "invariant": plan.invariant,
            "per_n": per_n,
        }),
    )
    .columns(&["n", "model", "class", "probability", "decimal"], rows)
    .human(&["n", "tv_vs_haar", "decimal", "iid_classes", "haar_classes"], human))
}

#[derive(Args, Debug)]
pub struct RateArgs {
    /// JSON report written by `simulate --json`.
    #[arg(long, conflicts_with = "series")]
    report: Option<PathBuf>,
    /// Points `n:tv` or `n:tv:floor`, comma separated.
    #[arg(long)]
    series: Option<String>,
    /// Compare the fitted rate against this bound.
    #[arg(long)]
    theta_bound: Option<f64>,
    /// Multiplier on the bound allowed for Monte Carlo error.
    #[arg(long, default_value_t = 1.0)]
    slack: f64,
}

fn points_from_report(path: &PathBuf) -> Result<Vec<RatePoint>> {
    let text = fs::read_to_string(path).map_err(|e| Error::usage(format!("cannot read {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::parse(format!("{}: {e}", path.display())))?;
    let entries = doc["per_n"].as_array().ok_or_else(|| Error::parse("report has no per_n array"))?;
    let mut points = Vec::new();
    for e in entries {
        let (Some(n), Some(tv)) = (e["n"].as_u64(), e["tv_vs_haar"].as_f64()) else {
            continue;
        };
        let ci = [e["ci"][0].as_f64().unwrap_or(tv), e["ci"][1].as_f64().unwrap_or(tv)];
        points.push(RatePoint::new(n as u32, tv, ci, e["noise_floor"].as_f64().unwrap_or(0.0)));
    }
    Ok(points)
}

fn points_from_series(text: &str) -> Result<Vec<RatePoint>> {
    text.split(',')
        .map(|item| {
            let bad = || Error::parse(format!("unrecognised point '{item}'"));
            let parts: Vec<&str> = item.trim().split(':').collect();
            if !(2..=3).contains(&parts.len()) {
                return Err(bad());
            }
            let n: u32 = parts[0].parse().map_err(|_| bad())?;
            let tv: f64 = parts[1].parse().map_err(|_| bad())?;
            let floor: f64 = parts.get(2).map_or(Ok(0.0), |f| f.parse().map_err(|_| bad()))?;
            Ok(RatePoint::new(n, tv, [tv, tv], floor))
        })
        .collect()
}

pub fn rate(a: &RateArgs) -> Result<Rendered> {
    let points = match (&a.report, &a.series) {
        (Some(path), _) => points_from_report(path)?,
        (None, Some(text)) => points_from_series(text)?,
        (None, None) => return Err(Error::usage("give --report or --series")),
    };
    let fit = fit_rate(points, a.theta_bound, a.slack)?;
    let rows = fit
        .points
        .iter()
        .map(|p| vec![s(p.n), s(p.tv), s(p.floor), s(p.used)])
        .collect();
    let passed = fit.within_bound != Some(false);
    let mut out = Rendered::new("rate", &fit)
        .columns(&["n", "tv", "noise_floor", "used"], rows)
        .note(format!("fitted theta {:.6} (95% CI {:.6}..{:.6})", fit.theta_hat, fit.theta_ci[0], fit.theta_ci[1]));
    if let Some(b) = fit.theta_bound {
        out = out.note(format!("bound {b} x slack {}: {}", fit.slack, if passed { "within" } else { "EXCEEDED" }));
    }
    Ok(out.passed(passed))
}
