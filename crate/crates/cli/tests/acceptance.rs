//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any failed.

use std::process::Command;
use std::time::Instant;

use rand_distr::{Distribution, StandardNormal, Uniform};
use rand_chacha::ChaCha20Rng;

use sketchreg_core::bounds::{self, default_slack, BoundReport, SegmentStatus};
use sketchreg_core::datagen::{self, rng_for, GenerativeConfig};
use sketchreg_core::glm::{self, DataSet, GlmSpec};
use sketchreg_core::linalg::{norm2, Matrix, DEFAULT_RANK_TOL};
use sketchreg_core::mu::{self, MuStatus};
use sketchreg_core::sketch::{coordinate_sketch, low_rank_approx, pca_sketch, random_orthonormal_sketch, SketchMatrix, TightnessInstance};
use sketchreg_core::solver::{self, SolveConfig};
use sketchreg_oracle as oracle;

const STREAM: u64 = 7;
const LAMBDAS: [f64; 3] = [0.1, 1.0, 10.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pick(rng: &mut ChaCha20Rng, lo: usize, hi: usize) -> usize {
    Uniform::new_inclusive(lo, hi).unwrap().sample(rng)
}

fn gaussian(rng: &mut ChaCha20Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

fn logistic_instance(n: usize, d: usize, seed: u64) -> DataSet {
    datagen::generate_generative(&GenerativeConfig::isotropic(n, d, 2.0, seed)).unwrap()
}

fn random_indices(rng: &mut ChaCha20Rng, d: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..d).collect();
    for i in 0..k {
        let j = pick(rng, i, d - 1);
        all.swap(i, j);
    }
    all.truncate(k);
    all
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn vec_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| rel_close(*x, *y, tol))
}

struct SandwichCase {
    data: DataSet,
    sketch: SketchMatrix,
    lambda: f64,
    report: BoundReport,
}

/// The 50 randomized instances shared by the sandwich and cross-entropy checks.
fn sandwich_cases() -> Vec<SandwichCase> {
    let cfg = SolveConfig::default();
    (0..50u64)
        .map(|i| {
            let mut rng = rng_for(i, STREAM);
            let n = pick(&mut rng, 50, 200);
            let d = pick(&mut rng, 5, 20);
            let k = pick(&mut rng, 1, d - 1);
            let lambda = LAMBDAS[(i % 3) as usize];
            let data = logistic_instance(n, d, 100 + i);
            let sketch = match (i / 3) % 3 {
                0 => coordinate_sketch(d, &random_indices(&mut rng, d, k)).unwrap(),
                1 => pca_sketch(&data.x, k).unwrap(),
                _ => random_orthonormal_sketch(d, k, 200 + i).unwrap(),
            };
            let report = bounds::forward_error_report(&data, &sketch, lambda, &cfg).unwrap();
            SandwichCase { data, sketch, lambda, report }
        })
        .collect()
}

fn criterion_1(cases: &[SandwichCase], elapsed: f64) -> Outcome {
    let bad: Vec<String> = cases
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.report.sandwich_ok)
        .map(|(i, c)| {
            let r = &c.report;
            format!(
                "#{i} {} lambda={} n={} d={} k={}: lower {:.6e} actual {:.6e} upper {:.6e}",
                c.sketch.label(),
                c.lambda,
                r.n,
                r.d,
                r.k,
                r.lower,
                r.actual,
                r.upper
            )
        })
        .collect();
    let pass = bad.is_empty() && elapsed < 120.0;
    let mut detail = format!("{} instances, {} violations, {elapsed:.1}s", cases.len(), bad.len());
    for b in bad {
        detail.push_str("\n    ");
        detail.push_str(&b);
    }
    outcome(pass, detail)
}

fn criterion_2() -> Outcome {
    let cfg = SolveConfig::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..10u64 {
        let mut rng = rng_for(300 + i, STREAM);
        let n = pick(&mut rng, 30, 120);
        let d = pick(&mut rng, 3, 10);
        let k = pick(&mut rng, 1, d - 1);
        let lambda = LAMBDAS[(i % 3) as usize];
        let base = logistic_instance(n, d, 300 + i);
        let s2 = bounds::spectral_norm_sq(&base.x).unwrap();
        let sketch = random_orthonormal_sketch(d, k, 400 + i).unwrap();
        for (multiple, expected) in [(1.0, 1.0), (3.0, 2.0)] {
            let x = base.x.scaled((multiple * lambda / s2).sqrt());
            let data = base.with_features(x).unwrap();
            let r = bounds::forward_error_report(&data, &sketch, lambda, &cfg).unwrap();
            worst = worst.max((r.upper / r.lower - expected).abs());
            count += 1;
        }
    }
    outcome(worst <= 1e-10, format!("{count} cases, max |upper/lower - target| = {worst:.3e}"))
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let mut found = 0;
    let mut seed = 500u64;
    let mut worst_rel_gap: f64 = 0.0;
    while found < 20 {
        seed += 1;
        let mut rng = rng_for(seed, STREAM);
        let n = pick(&mut rng, 10, 60);
        let data = logistic_instance(n, 2, seed);
        let rows = data.x.to_rows();
        let grid = oracle::mu_angular_grid(&rows, &data.y, 10_000);
        if !grid.is_finite() {
            continue;
        }
        found += 1;
        let lp = mu::compute_mu(&data, mu::DEFAULT_BUDGET, DEFAULT_RANK_TOL).unwrap();
        let direct = mu::compute_mu_direct(&data, mu::DEFAULT_BUDGET).unwrap();
        let scaled = mu::compute_mu(&data, 7.5, DEFAULT_RANK_TOL).unwrap();
        worst_rel_gap = worst_rel_gap.max(lp.mu / grid - 1.0);
        if !(lp.mu >= grid - 1e-6 && lp.mu <= grid * 1.02) {
            failures.push(format!("seed {seed}: lp {} vs grid {grid}", lp.mu));
        }
        if !mu::agree(&lp, &direct, 1e-6) {
            failures.push(format!("seed {seed}: lp {} vs direct {}", lp.mu, direct.mu));
        }
        if (scaled.mu - lp.mu).abs() > 1e-8 * lp.mu {
            failures.push(format!("seed {seed}: C=1 gives {} but C=7.5 gives {}", lp.mu, scaled.mu));
        }
    }
    let mut separable = 0;
    for i in 0..5u64 {
        let mut rng = rng_for(600 + i, STREAM);
        let n = pick(&mut rng, 10, 60);
        let x = Matrix::from_fn(n, 2, |_, _| StandardNormal.sample(&mut rng));
        let w = gaussian(&mut rng, 2);
        let y = (0..n).map(|r| if x.row(r)[0] * w[0] + x.row(r)[1] * w[1] >= 0.0 { 1.0 } else { -1.0 }).collect();
        let data = DataSet::new(x, y).unwrap();
        let lp = mu::compute_mu(&data, mu::DEFAULT_BUDGET, DEFAULT_RANK_TOL).unwrap();
        let direct = mu::compute_mu_direct(&data, mu::DEFAULT_BUDGET).unwrap();
        if lp.status == MuStatus::InfiniteSeparable && direct.status == MuStatus::InfiniteSeparable && lp.mu.is_infinite() {
            separable += 1;
        } else {
            failures.push(format!("separable instance {i}: statuses {:?} / {:?}", lp.status, direct.status));
        }
    }
    let mut detail = format!(
        "{found} non-separable instances (max mu_lp/mu_grid - 1 = {worst_rel_gap:.2e}), {separable}/5 separable flagged"
    );
    for f in &failures {
        detail.push_str("\n    ");
        detail.push_str(f);
    }
    outcome(failures.is_empty(), detail)
}

fn criterion_4() -> Outcome {
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let mut rng = rng_for(700 + i, STREAM);
        let n = pick(&mut rng, 5, 60);
        let d = pick(&mut rng, 2, 15);
        let k = pick(&mut rng, 1, n.min(d) - 1);
        let x = Matrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
        let y = gaussian(&mut rng, n).iter().map(|v| v.signum()).collect();
        let beta = gaussian(&mut rng, d);
        let data = DataSet::new(x, y).unwrap();
        let xk = low_rank_approx(&data.x, k).unwrap();
        let gap = bounds::lowrank_loss_gap(&data, &xk, &beta).unwrap();
        worst = worst.max(gap.ratio());
        if !gap.holds() {
            violations += 1;
        }
    }
    let t = TightnessInstance::new(10, 50.0, 1.0).unwrap();
    let achieved = t.achieved_ratio().unwrap();
    outcome(
        violations == 0 && achieved >= 0.99,
        format!("100 triples, {violations} violations, max gap/budget {worst:.4}; witness gap/budget {achieved:.6}"),
    )
}

fn criterion_5() -> Outcome {
    let mut violations = 0;
    let mut non_finite = 0;
    let mut checks = 0;
    for i in 0..20u64 {
        let mut rng = rng_for(900 + i, STREAM);
        let n = pick(&mut rng, 10, 100);
        let d = pick(&mut rng, 2, 10);
        let data = datagen::to_standard_form(&logistic_instance(n, d, 900 + i));
        let beta = gaussian(&mut rng, d);
        for t in [1.0, 10.0, 100.0, 1000.0] {
            let g = glm::relu_scaling_gap(&data, &beta, t).unwrap();
            checks += 1;
            if !(g.gap.is_finite() && g.budget.is_finite()) {
                non_finite += 1;
            } else if !g.holds() {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0 && non_finite == 0,
        format!("{checks} checks, {violations} violations, {non_finite} non-finite"),
    )
}

fn criterion_6(cases: &[SandwichCase]) -> Outcome {
    let mut failures = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let r = &c.report;
        let x = bounds::cross_entropy_report(&c.data, &c.sketch, &r.beta_d, &r.beta_k, c.lambda).unwrap();
        if r.actual > x.phi_bound + r.slack {
            failures.push(format!("#{i}: actual {:.6e} > (2/lambda)phi {:.6e}", r.actual, x.phi_bound));
        }
        if !x.chain_ok(1e-8) {
            failures.push(format!("#{i}: (2/lambda)phi {:.6e} > (2/lambda)H {:.6e}", x.phi_bound, x.bound));
        }
    }
    let mut detail = format!("{} instances, {} failures", cases.len(), failures.len());
    for f in &failures {
        detail.push_str("\n    ");
        detail.push_str(f);
    }
    outcome(failures.is_empty(), detail)
}

fn criterion_7() -> Outcome {
    let cfg = SolveConfig::default();
    let linear = GlmSpec::linear();
    let logistic = GlmSpec::logistic();
    let mut failures = Vec::new();
    for i in 0..20u64 {
        let mut rng = rng_for(1100 + i, STREAM);
        let n = pick(&mut rng, 20, 120);
        let d = pick(&mut rng, 3, 12);
        let k = pick(&mut rng, 1, d - 1);
        let lambda = LAMBDAS[(i % 3) as usize];
        let x = Matrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
        let truth = gaussian(&mut rng, d);
        let noise = gaussian(&mut rng, n);
        let r: Vec<f64> = x.matvec(&truth).iter().zip(&noise).map(|(m, e)| m + 0.5 * e).collect();
        let sketch = random_orthonormal_sketch(d, k, 1200 + i).unwrap();

        let rep = bounds::glm_forward_error_report(&x, &r, &linear, &sketch, lambda, &cfg).unwrap();
        if !rep.sandwich_ok {
            failures.push(format!("#{i}: linear sandwich lower {:e} actual {:e} upper {:e}", rep.lower, rep.actual, rep.upper));
        }
        let rows = x.to_rows();
        let ridge_d = oracle::ridge_closed_form(&rows, &r, lambda);
        let ridge_k = oracle::ridge_closed_form(&x.matmul(sketch.matrix()).to_rows(), &r, lambda);
        if !vec_close(&rep.beta_d, &ridge_d, 1e-8) || !vec_close(&rep.beta_k, &ridge_k, 1e-8) {
            failures.push(format!("#{i}: linear fits differ from closed-form ridge"));
        }

        let data = logistic_instance(n, d, 1300 + i);
        let native = bounds::forward_error_report(&data, &sketch, lambda, &cfg).unwrap();
        let via_glm = bounds::glm_forward_error_report(&data.x, &data.y, &logistic, &sketch, lambda, &cfg).unwrap();
        let same = [
            (native.phi, via_glm.phi),
            (native.actual, via_glm.actual),
            (native.upper, via_glm.upper),
            (native.lower_smooth, via_glm.lower_smooth),
        ]
        .iter()
        .all(|(a, b)| rel_close(*a, *b, 1e-8));
        if !same || !vec_close(&native.beta_d, &via_glm.beta_d, 1e-8) || !vec_close(&native.beta_k, &via_glm.beta_k, 1e-8) {
            failures.push(format!("#{i}: logistic GLM report differs from the native one"));
        }
    }
    let mut detail = format!("20 instances, {} failures", failures.len());
    for f in &failures {
        detail.push_str("\n    ");
        detail.push_str(f);
    }
    outcome(failures.is_empty(), detail)
}

fn criterion_8() -> Outcome {
    let cfg = SolveConfig::default();
    let d = 10;
    let mut converged = 0;
    let mut failures = Vec::new();
    for seed in 0..10u64 {
        let data = datagen::generate_generative(&GenerativeConfig::isotropic(50 * d, d, 1.0, seed)).unwrap();
        let full_ok = matches!(solver::fit_full(&data, 0.0, &cfg), Ok(f) if f.converged);
        if !full_ok {
            continue;
        }
        converged += 1;
        let sketch = pca_sketch(&data.x, d / 2).unwrap();
        let seg = bounds::segment_constant_check(&data, &sketch, &cfg).unwrap();
        if seg.status != SegmentStatus::Checked {
            failures.push(format!("seed {seed}: segment check skipped ({:?})", seg.reason));
            continue;
        }
        if seg.actual < seg.lower - default_slack(seg.lower) {
            failures.push(format!("seed {seed}: actual {:e} below lower {:e}", seg.actual, seg.lower));
        }
        if !seg.upper_ok {
            failures.push(format!("seed {seed}: actual {:e} above upper {:e} (+5%)", seg.actual, seg.upper));
        }
    }
    let mut detail = format!("{converged}/10 lambda=0 fits converged, {} failures", failures.len());
    for f in &failures {
        detail.push_str("\n    ");
        detail.push_str(f);
    }
    outcome(converged >= 9 && failures.is_empty(), detail)
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff) / norm2(b).max(1e-12)
}

fn criterion_9() -> Outcome {
    let linear = GlmSpec::linear();
    let mut worst_g: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    for i in 0..20u64 {
        let mut rng = rng_for(1500 + i, STREAM);
        let n = pick(&mut rng, 10, 80);
        let d = pick(&mut rng, 2, 8);
        let lambda = LAMBDAS[(i % 3) as usize];
        let data = logistic_instance(n, d, 1500 + i);
        let beta = gaussian(&mut rng, d);
        let r: Vec<f64> = gaussian(&mut rng, n);
        let (x, y) = (&data.x, &data.y);

        let g = glm::logistic_gradient_raw(x, y, &beta, lambda);
        let g_fd = oracle::central_gradient(|b| glm::logistic_loss_raw(x, y, b, lambda), &beta, 1e-5);
        worst_g = worst_g.max(rel_err(&g, &g_fd));
        let h = glm::logistic_hessian_raw(x, y, &beta, lambda);
        let h_fd = oracle::central_jacobian(|b| glm::logistic_gradient_raw(x, y, b, lambda), &beta, 1e-5);
        worst_h = worst_h.max(rel_err(h.data(), &h_fd.concat()));

        let g = glm::glm_gradient(x, &r, &linear, &beta, lambda).unwrap();
        let g_fd = oracle::central_gradient(|b| glm::glm_loss(x, &r, &linear, b, lambda).unwrap(), &beta, 1e-5);
        worst_g = worst_g.max(rel_err(&g, &g_fd));
        let h = glm::glm_hessian(x, &r, &linear, &beta, lambda).unwrap();
        let h_fd = oracle::central_jacobian(|b| glm::glm_gradient(x, &r, &linear, b, lambda).unwrap(), &beta, 1e-5);
        worst_h = worst_h.max(rel_err(h.data(), &h_fd.concat()));
    }
    outcome(
        worst_g <= 1e-5 && worst_h <= 1e-4,
        format!("40 (instance, beta) pairs; max gradient rel err {worst_g:.2e}, max Hessian rel err {worst_h:.2e}"),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.toml");
    std::fs::write(
        &config,
        "lambdas = [1.0, 0.1]\nsketches = [\"pca:3\", \"rand:2\", \"coord:0,4\", \"topcoef:2\"]\nseeds = [0, 1, 2]\n\n[data]\nkind = \"generative\"\nn = 120\nd = 6\n",
    )
    .unwrap();
    let run = |threads: &str, out: &str| {
        let path = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_sketchreg"))
            .arg("experiment")
            .arg(&config)
            .arg("--out")
            .arg(&path)
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        (status.code(), std::fs::read(&path).unwrap_or_default())
    };
    let (c1, a) = run("4", "a.csv");
    let (c2, b) = run("4", "b.csv");
    let (c3, c) = run("1", "c.csv");
    let rows = a.iter().filter(|&&ch| ch == b'\n').count().saturating_sub(1);
    let ok_code = |c: Option<i32>| matches!(c, Some(0) | Some(3));
    let pass = ok_code(c1) && c1 == c2 && c1 == c3 && rows == 24 && a == b && a == c;
    outcome(
        pass,
        format!("{rows} rows, {} bytes; reruns identical: {}, single-thread identical: {}", a.len(), a == b, a == c),
    )
}

fn main() {
    let start = Instant::now();
    let cases = sandwich_cases();
    let elapsed = start.elapsed().as_secs_f64();
    let results = [
        ("forward-error sandwich", criterion_1(&cases, elapsed)),
        ("constant-factor tightness regime", criterion_2()),
        ("mu exactness", criterion_3()),
        ("low-rank additive bound", criterion_4()),
        ("ReLU scaling", criterion_5()),
        ("cross-entropy chain", criterion_6(&cases)),
        ("GLM extension", criterion_7()),
        ("generative lambda=0 regime", criterion_8()),
        ("numerical calculus", criterion_9()),
        ("determinism", criterion_10()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
