//! Acceptance criteria, one test each. Every test prints a single `[PASS]` or `[FAIL]`
//! line before asserting, so `cargo test --test acceptance -- --nocapture` gives a summary.

use std::process::Command;
use std::time::{Duration, Instant};

use coker_core::equidist::{moment_tail_sum, replacement_sweep, ConvergenceParams, EntryDistribution};
use coker_core::measures::sweep_measures;
use coker_core::modules::ModuleType;
use coker_core::montecarlo::{
    column_swap_exact, exact_distribution, fit_rate, run_experiment, sample_invariants, ExperimentPlan, Invariant,
    Model, RatePoint,
};
use coker_core::theory_dist::{c_constant, rectangular_prob, sawin_wood_prob, DEFAULT_TERMS};
use coker_core::Ring;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;

const SEED: u64 = 42;

fn verdict(criterion: u32, title: &str, ok: bool, detail: &str) {
    println!("[{}] criterion {criterion}: {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} ({title}) failed: {detail}");
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

#[test]
fn criterion_1_exact_haar_oracle() {
    let start = Instant::now();
    let f2 = Ring::parse("Z/2").unwrap();
    let law = exact_distribution(&EntryDistribution::haar(&f2), 2, 0, Invariant::Coker).unwrap();
    let trivial = law.get("[]").cloned().unwrap_or_else(BigRational::zero);
    let product: BigRational = (1..=2)
        .map(|i| BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(2u32.pow(i))))
        .product();
    let exact_ok = trivial == BigRational::new(3.into(), 8.into()) && trivial == product;

    let z4 = Ring::parse("Z/4").unwrap();
    let haar = EntryDistribution::haar(&z4);
    let exact = exact_distribution(&haar, 2, 0, Invariant::Coker).unwrap();
    let samples = 100_000u64;
    let mc = sample_invariants(&haar, Model::Haar, 2, 0, samples, Invariant::Coker, SEED).unwrap();
    let mut worst = 0.0f64;
    for (class, p) in &exact {
        let p = p.to_f64().unwrap();
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        worst = worst.max((mc.full.prob(class) - p).abs() / sigma);
    }
    let unseen = mc.full.classes().filter(|c| !exact.contains_key(*c)).count();
    let elapsed = start.elapsed();
    let ok = exact_ok && worst <= 3.0 && unseen == 0 && within(elapsed, 10);
    verdict(
        1,
        "exact Haar oracle",
        ok,
        &format!(
            "F2 P(trivial) = {trivial} (product {product}); Z/4 worst deviation {worst:.2} sigma over {} classes, {unseen} unexpected; {elapsed:.2?}",
            exact.len()
        ),
    );
}

#[test]
fn criterion_2_limit_law_consistency() {
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut loosest_bound = 0.0f64;
    for ring in ["Z/2", "Z/3"] {
        let ring = Ring::parse(ring).unwrap();
        let max_length = (32f64.ln() / (ring.q() as f64).ln()).floor() as u32;
        for a in ModuleType::enumerate(ring.spec(), max_length) {
            for u in [1, 2] {
                let sw = sawin_wood_prob(&a, u, DEFAULT_TERMS).unwrap();
                let rect = rectangular_prob(&a, u, DEFAULT_TERMS).unwrap();
                let bound = sw.tail_bound + rect.tail_bound;
                loosest_bound = loosest_bound.max(bound);
                checked += 1;
                if (sw.value - rect.value).abs() > bound || bound > 1e-10 {
                    failures.push(format!("{} {} u={u}: {:.3e} vs {:.3e}", ring.spec(), a.shorthand(), sw.value, rect.value));
                }
            }
        }
    }
    let detail = format!(
        "{} of {checked} (A, u) pairs disagree; largest combined bound {loosest_bound:.1e}; first: {}",
        failures.len(),
        failures.first().map(String::as_str).unwrap_or("none")
    );
    verdict(2, "limit-law consistency", failures.is_empty(), &detail);
}

#[test]
fn criterion_3_decomposition_exactness() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for ring in ["Z/4", "F4[t]/t"] {
        let sweep = sweep_measures(&Ring::parse(ring).unwrap(), 64, 100, SEED).unwrap();
        let structural = sweep
            .modules
            .iter()
            .all(|m| m.dimensions_ok && m.reconstruction_failures == 0 && m.orthogonality_failures == 0);
        ok &= structural;
        lines.push(format!("{ring}: {} modules {}", sweep.modules.len(), if structural { "exact" } else { "FAILED" }));
    }
    let elapsed = start.elapsed();
    ok &= within(elapsed, 60);
    verdict(3, "decomposition exactness", ok, &format!("{}; {elapsed:.2?}", lines.join(", ")));
}

#[test]
fn criterion_4_inequality_sweeps() {
    let mut checks = 0;
    let mut violations = 0;
    let mut modules = 0;
    for ring in ["Z/2", "Z/3", "Z/4", "Z/8", "Z/9", "Z/16", "F4[t]/t", "F4[t]/t^2", "F2[t]/t^2", "F2[t]/t^3"] {
        let sweep = sweep_measures(&Ring::parse(ring).unwrap(), 16, 1000, SEED).unwrap();
        for m in &sweep.modules {
            modules += 1;
            checks += m.inequality_checks + m.l1_checks;
            violations += m.inequality_violations + m.l1_violations;
        }
    }
    verdict(
        4,
        "inequality sweeps",
        violations == 0,
        &format!("{violations} violations in {checks} exact checks over {modules} modules"),
    );
}

fn moment_setup() -> (ModuleType, EntryDistribution, ConvergenceParams) {
    let ring = Ring::parse("Z/2").unwrap();
    let module = ModuleType::new(ring.spec(), vec![1]).unwrap();
    let xi = EntryDistribution::parse(&ring, "0:3/5,1:2/5").unwrap();
    (module, xi, ConvergenceParams::default())
}

#[test]
fn criterion_5_moment_tail_decay() {
    let start = Instant::now();
    let (module, xi, params) = moment_setup();
    let sums: Vec<BigRational> =
        (2..=8).map(|l| moment_tail_sum(&module, &xi, l, l, &params).unwrap().value).collect();
    let beta = xi.beta();
    let bound_q = (BigRational::one() - BigRational::new((*beta.numer()).into(), (*beta.denom()).into()))
        * BigRational::new(6.into(), 5.into());
    let positive = sums[0] > BigRational::zero();
    let mut ratios = Vec::new();
    let mut decay = true;
    for l in 3..8usize {
        let ratio = &sums[l - 1] / &sums[l - 2];
        decay &= ratio <= bound_q;
        ratios.push(format!("{}:{:.4}", l, ratio.to_f64().unwrap()));
    }
    let haar = EntryDistribution::haar(&Ring::parse("Z/2").unwrap());
    let haar_zero = (2..=8).all(|l| moment_tail_sum(&module, &haar, l, l, &params).unwrap().value.is_zero());
    let elapsed = start.elapsed();
    let ok = positive && decay && haar_zero && within(elapsed, 30);
    verdict(
        5,
        "moment-tail decay",
        ok,
        &format!(
            "sum(2) = {}; ratios sum(l+1)/sum(l) [{}] against {:.4}; Haar all zero: {haar_zero}; {elapsed:.2?}",
            sums[0],
            ratios.join(" "),
            bound_q.to_f64().unwrap()
        ),
    );
}

#[test]
fn criterion_6_uniform_replacement() {
    let (module, xi, params) = moment_setup();
    let mut checked = 0;
    let mut violated = 0;
    for l in 2..=8 {
        for r in replacement_sweep(&module, &xi, l, l, 50, SEED, &params).unwrap() {
            checked += 1;
            if !r.holds {
                violated += 1;
            }
        }
    }
    verdict(6, "uniform-replacement monotonicity", violated == 0, &format!("{violated} of {checked} patterns violate"));
}

#[test]
fn criterion_7_column_swap_decay() {
    let start = Instant::now();
    let ring = Ring::parse("Z/4").unwrap();
    let xi = EntryDistribution::parse(&ring, "0:1/2,1:1/2").unwrap();
    let mut points = Vec::new();
    let mut means = Vec::new();
    for n in 2..=6 {
        let r = column_swap_exact(&xi, n, 0, 200, SEED).unwrap();
        let half = 1.96 * r.std_error;
        points.push(RatePoint::new(n, r.mean, [r.mean - half, r.mean + half], 0.0));
        means.push(format!("{n}:{:.4}", r.mean));
    }
    let fit = fit_rate(points, Some(0.85), 1.0);
    let elapsed = start.elapsed();
    let (ok, detail) = match &fit {
        Ok(f) => (
            f.within_bound == Some(true) && within(elapsed, 300),
            format!("means [{}]; fitted theta {:.4} against 0.85; {elapsed:.2?}", means.join(" "), f.theta_hat),
        ),
        Err(e) => (false, format!("no fit: {e}")),
    };
    verdict(7, "column-swapping decay", ok, &detail);
}

fn z4_plan(n: Vec<u32>, invariant: Invariant) -> ExperimentPlan {
    let ring = Ring::parse("Z/4").unwrap();
    ExperimentPlan {
        entry: EntryDistribution::parse(&ring, "0:1/2,1:1/2").unwrap(),
        u: 0,
        n_values: n,
        samples: 100_000,
        invariant,
        seed: SEED,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        resamples: 200,
    }
}

#[test]
fn criterion_8_universality_endpoint() {
    let start = Instant::now();
    let coker = run_experiment(&z4_plan(vec![8], Invariant::Coker)).unwrap();
    let c = &coker.per_n[0];
    let c0 = c_constant(2, 0, DEFAULT_TERMS).unwrap().value;
    let trivial = c.haar.full.prob("[]");
    let det = run_experiment(&z4_plan(vec![8], Invariant::Det)).unwrap();
    let d = &det.per_n[0];
    let span = run_experiment(&z4_plan(vec![4], Invariant::Span)).unwrap();
    let s = &span.per_n[0];
    let elapsed = start.elapsed();
    let parts = [
        (c.tv.tv <= 0.03, format!("coker TV {:.4} (<= 0.03)", c.tv.tv)),
        ((trivial - c0).abs() <= 0.01, format!("Haar P(trivial) {trivial:.4} vs c0 {c0:.4}")),
        (d.tv.tv <= 3.0 * d.noise_floor, format!("det TV {:.4} vs 3 x floor {:.4}", d.tv.tv, 3.0 * d.noise_floor)),
        (s.tv.tv <= 0.05, format!("span TV at n=4 {:.4} (<= 0.05)", s.tv.tv)),
        (within(elapsed, 600), format!("{elapsed:.2?}")),
    ];
    let ok = parts.iter().all(|p| p.0);
    let detail: Vec<String> = parts.iter().map(|(ok, text)| format!("{text} {}", if *ok { "ok" } else { "MISS" })).collect();
    verdict(8, "universality endpoint", ok, &detail.join("; "));
}

fn simulate_histograms(workers: usize) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_coker"))
        .args(["simulate", "--ring", "Z/4", "--entry", "0:1/2,1:1/4,3:1/4", "--n", "2..5", "--samples", "20000"])
        .args(["--invariant", "span-det", "--seed", "7", "--resamples", "50", "--json"])
        .args(["--workers", &workers.to_string()])
        .output()
        .expect("run coker");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let hist: Vec<&Value> = doc["per_n"].as_array().unwrap().iter().map(|e| &e["histogram"]).collect();
    serde_json::to_string(&hist).unwrap()
}

#[test]
fn criterion_9_reproducibility() {
    let runs: Vec<String> = [1, 3, 8].iter().map(|&w| simulate_histograms(w)).collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        9,
        "reproducibility",
        identical && runs[0].len() > 2,
        &format!("histograms for 1, 3 and 8 workers identical: {identical} ({} bytes)", runs[0].len()),
    );
}
