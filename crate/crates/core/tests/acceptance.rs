mod common;

use std::io::Write;
use std::time::Instant;

use cmdsdml::harness::{bench, fit_model, profile, run_eval, ExperimentConfig, Method};
use cmdsdml::ldmlr::LdmlrProblem;
use cmdsdml::learner::embedding_targets;
use cmdsdml::{
    build_group_edm, build_label_edm, centering_matrix, cmds_embed, embed_labels,
    find_target_neighbors, is_edm, min_beta, project_psd, spearman, split, synth, train,
    FitProblem, Matrix, SplitSpec, SquaredDistanceMatrix, SynthSpec, Termination, TrainConfig,
};
use common::*;
use rand::Rng;

/// Writes the verdict straight to stdout so it shows even when output is
/// captured, then fails the test on FAIL.
fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{tag} criterion {id} ({name}): {detail}").unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_edm_and_cmds_properties() {
    let t0 = Instant::now();
    let mut r = rng(1);
    let (mut worst_rt, mut worst_j) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = r.random_range(2..=50);
        let k = r.random_range(1..=10);
        let ambient = k + r.random_range(0..=5);
        // Points spanning a k-dimensional subspace of the ambient space.
        let basis = gaussian(&mut r, k, ambient);
        let pts = gaussian(&mut r, n, k).matmul(&basis).unwrap();
        let d = SquaredDistanceMatrix::from_points(&pts).unwrap();
        let y = cmds_embed(&d, k.min(n - 1)).unwrap();
        worst_rt = worst_rt.max(max_abs_diff(&y.pairwise_sq_distances(), d.entries()));
        let j = centering_matrix::<f64>(n).unwrap();
        let j1 = j.mul_vec(&vec![1.0; n]).unwrap();
        let b = d.double_centered();
        let jb = max_abs_diff(&j.matmul(&b).unwrap(), &b);
        worst_j = worst_j.max(j1.iter().fold(jb, |a, v| a.max(v.abs())));
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        1,
        "EDM/cMDS properties",
        worst_rt <= 1e-8 && worst_j <= 1e-12 && secs < 10.0,
        format!("round-trip {worst_rt:.2e} (<= 1e-8), J identities {worst_j:.2e} (<= 1e-12), {secs:.2}s (< 10s)"),
    );
}

fn distinct_labels(r: &mut impl Rng, m: usize) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(m);
    while v.len() < m {
        let x = (r.random_range(0.0..20.0f64) * 4.0).round() / 4.0;
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[test]
fn criterion_2_label_edm_beta_bound() {
    let mut r = rng(2);
    let mut admissible_fail = 0;
    let mut equiv_fail = 0;
    for _ in 0..100 {
        let m = r.random_range(1..=10);
        let distinct = distinct_labels(&mut r, m);
        let labels: Vec<f64> = (0..r.random_range(m..=3 * m))
            .map(|i| {
                if i < m {
                    distinct[i]
                } else {
                    distinct[r.random_range(0..m)]
                }
            })
            .collect();
        let bound = min_beta(&distinct).unwrap().min_beta;
        let below = bound - r.random_range(0.1..3.0);
        for (beta, must_pass) in [
            (bound, true),
            (bound + 0.5, true),
            (bound + 1.0, true),
            (below, false),
        ] {
            let big = is_edm(&build_label_edm(&labels, beta).unwrap(), 1e-9).unwrap();
            let small = is_edm(&build_group_edm(&distinct, beta).unwrap(), 1e-9).unwrap();
            if must_pass && !big {
                admissible_fail += 1;
            }
            if big != small {
                equiv_fail += 1;
            }
        }
    }
    let b = min_beta(&[0.0, 1.0, 2.0]).unwrap();
    let anchor = b.mu0 == 0.0 && b.min_beta == 0.0;
    verdict(
        2,
        "label EDM bound",
        admissible_fail == 0 && equiv_fail == 0 && anchor,
        format!(
            "{admissible_fail} admissible-beta failures, {equiv_fail} equivalence mismatches, mu0 for {{0,1,2}} = {}",
            b.mu0
        ),
    );
}

fn numeric_grad(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn vec_rel(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    diff / a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12)
}

#[test]
fn criterion_3_gradients_match_finite_differences() {
    let t0 = Instant::now();
    let mut worst_f = 0.0f64;
    let mut worst_h = 0.0f64;
    for seed in 0..20 {
        let mut r = rng(300 + seed);
        let (n, d, s) = (r.random_range(6..=12), r.random_range(2..=6), 2);
        let data = labelled(&mut r, n, d, 3);
        let (c, _) = data.centered();
        let targets = embedding_targets(c.labels(), 1.0, s).unwrap();
        let nbrs = find_target_neighbors(&c, 2).unwrap();
        let p = FitProblem::new(
            c.features().clone(),
            &targets,
            &nbrs,
            r.random_range(0.01..1.0),
        )
        .unwrap();
        let l = gaussian(&mut r, s, d).scaled(0.5);
        let cc = r.random_range(0.5..1.5);
        let (_, g) = p.value_and_gradient(&l, cc).unwrap();
        let mut theta = l.as_slice().to_vec();
        theta.push(cc);
        let num = numeric_grad(&theta, 1e-6, |t| {
            p.value(
                &Matrix::from_vec(s, d, t[..s * d].to_vec()).unwrap(),
                t[s * d],
            )
            .unwrap()
        });
        let mut ana = g.l.as_slice().to_vec();
        ana.push(g.c);
        worst_f = worst_f.max(vec_rel(&ana, &num));

        let nbrs = find_target_neighbors(&data, 2).unwrap();
        let prob = LdmlrProblem::new(&data, &nbrs, r.random_range(0.1..2.0), 1.0).unwrap();
        let a = symmetric(&mut r, d)
            .scaled(0.3)
            .add(&Matrix::identity(d))
            .unwrap();
        let g = prob.gradient(&a).unwrap();
        let mut num = Matrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let mut e = Matrix::zeros(d, d);
                e[(i, j)] = 1e-6;
                e[(j, i)] = 1e-6;
                let dd = (prob.value(&a.add(&e).unwrap()).unwrap()
                    - prob.value(&a.sub(&e).unwrap()).unwrap())
                    / 2e-6;
                let v = if i == j { dd } else { dd / 2.0 };
                num[(i, j)] = v;
                num[(j, i)] = v;
            }
        }
        worst_h = worst_h.max(vec_rel(g.as_slice(), num.as_slice()));
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        3,
        "gradient check",
        worst_f <= 1e-5 && worst_h <= 1e-5 && secs < 5.0,
        format!("max rel error f {worst_f:.2e}, h {worst_h:.2e} (<= 1e-5), {secs:.2}s (< 5s)"),
    );
}

#[test]
fn criterion_4_descent_never_increases() {
    let mut bad = Vec::new();
    for seed in 0..10 {
        let mut r = rng(400 + seed);
        let n = r.random_range(12..=30);
        let d = r.random_range(3..=8);
        let m = r.random_range(2..=4);
        let data = labelled(&mut r, n, d, m);
        let cfg = TrainConfig {
            mu: r.random_range(1e-3..1e-1),
            gamma: 0.1,
            max_iters: 200,
            s: 2,
            k: 2,
            ..TrainConfig::default()
        };
        let (_, t) = train(&data, &cfg).unwrap();
        let monotone = t.objective.windows(2).all(|w| w[1] <= w[0]);
        let status_ok = matches!(t.status, Termination::Converged | Termination::MaxIters);
        if !(monotone && status_ok) {
            bad.push((seed, t.status));
        }
    }
    verdict(
        4,
        "descent",
        bad.is_empty(),
        format!(
            "{} of 10 instances monotone with Converged/MaxIters; failures {bad:?}",
            10 - bad.len()
        ),
    );
}

#[test]
fn criterion_5_compressed_label_embedding() {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let m = r.random_range(1..=8);
        let n = r.random_range(m..=200);
        let distinct = distinct_labels(&mut r, m);
        let labels: Vec<f64> = (0..n)
            .map(|i| {
                if i < m {
                    distinct[i]
                } else {
                    distinct[r.random_range(0..m)]
                }
            })
            .collect();
        let beta = min_beta(&distinct).unwrap().min_beta.max(0.0) + r.random_range(0.0..2.0);
        let y = embed_labels(&labels, beta, m).unwrap();
        let d = build_label_edm(&labels, beta).unwrap();
        worst = worst.max(max_abs_diff(&y.pairwise_sq_distances(), d.entries()));
    }
    let labels: Vec<f64> = (0..1000).map(|i| (i % 5) as f64).collect();
    let t0 = Instant::now();
    let fast = embed_labels(&labels, 1.0, 4).unwrap();
    let t_fast = t0.elapsed().as_secs_f64();
    let t0 = Instant::now();
    let full = cmds_embed(&build_label_edm(&labels, 1.0).unwrap(), 4).unwrap();
    let t_full = t0.elapsed().as_secs_f64();
    let agree = max_abs_diff(&fast.pairwise_sq_distances(), &full.pairwise_sq_distances()) < 1e-6;
    verdict(
        5,
        "compressed label embedding",
        worst <= 1e-8 && t_fast < t_full && agree,
        format!(
            "max deviation {worst:.2e} (<= 1e-8); n=1000, m=5: {t_fast:.2e}s vs full {t_full:.2e}s"
        ),
    );
}

#[test]
fn criterion_6_end_to_end_ranking() {
    let t0 = Instant::now();
    let data = synth::<f64>(&SynthSpec::benchmark(2024)).unwrap();
    let mut mae = [0.0; 3];
    for (slot, method) in Method::ALL.into_iter().enumerate() {
        let cfg = ExperimentConfig::<f64> {
            method,
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.trials, 50);
        mae[slot] = run_eval(&data, &cfg).unwrap().0.mae;
    }
    let get = |m: Method| mae[Method::ALL.iter().position(|&x| x == m).unwrap()];
    let (c, l, e) = (
        get(Method::CmdsDml),
        get(Method::Ldmlr),
        get(Method::Euclidean),
    );
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        6,
        "end-to-end ranking",
        c < e && c <= l && secs < 300.0,
        format!("mean MAE over 50 trials: cmds-dml {c:.4}, ldmlr {l:.4}, euclidean {e:.4}; {secs:.1}s (< 300s)"),
    );
}

#[test]
fn criterion_7_layering() {
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..20u64 {
        let data = synth::<f64>(&SynthSpec::benchmark(seed)).unwrap();
        let (tr, _) = split(&data, SplitSpec::new(10, seed)).unwrap();
        let (model, _) = fit_model(Method::CmdsDml, &tr, &ExperimentConfig::default()).unwrap();
        let rows = profile(&model, &tr, 0).unwrap();
        let gap: Vec<f64> = rows
            .iter()
            .map(|r| (r.label - tr.labels()[0]).abs())
            .collect();
        let e: Vec<f64> = rows.iter().map(|r| r.euclidean).collect();
        let l: Vec<f64> = rows.iter().map(|r| r.learned).collect();
        let (se, sl) = (spearman(&e, &gap).unwrap(), spearman(&l, &gap).unwrap());
        if sl > se {
            wins += 1;
        }
        pairs.push(format!("{sl:.2}/{se:.2}"));
    }
    verdict(
        7,
        "layering",
        wins * 5 >= 20 * 4,
        format!(
            "learned beats Euclidean Spearman in {wins}/20 runs (>= 16); learned/euclidean: {}",
            pairs.join(" ")
        ),
    );
}

#[test]
fn criterion_8_timing_trend() {
    let rows = bench::<f64>(30, &[50, 100, 150], 5, 30, 1).unwrap();
    let ratio = |d: usize| {
        let t = |m: Method| {
            rows.iter()
                .find(|r| r.d == d && r.method == m)
                .unwrap()
                .seconds_per_iteration
        };
        t(Method::Ldmlr) / t(Method::CmdsDml)
    };
    let (r50, r100, r150) = (ratio(50), ratio(100), ratio(150));
    verdict(
        8,
        "timing trend",
        r150 > r50,
        format!("LDMLR/cMDS-DML per-iteration time ratio: d=50 {r50:.1}, d=100 {r100:.1}, d=150 {r150:.1}"),
    );
}

#[test]
fn criterion_9_psd_projection() {
    let mut r = rng(9);
    let (mut worst, mut worst_idem) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let d = r.random_range(1..=8);
        let m = symmetric(&mut r, d);
        let ours = project_psd(&m).unwrap();
        let e = to_na(&m).symmetric_eigen();
        let clipped = e.eigenvalues.map(|v| v.max(0.0));
        let o = &e.eigenvectors
            * nalgebra::DMatrix::from_diagonal(&clipped)
            * e.eigenvectors.transpose();
        worst = worst.max(max_abs_diff(
            ours.matrix(),
            &Matrix::from_fn(d, d, |i, j| o[(i, j)]),
        ));
        let again = project_psd(ours.matrix()).unwrap();
        worst_idem = worst_idem.max(max_abs_diff(again.matrix(), ours.matrix()));
    }
    verdict(
        9,
        "PSD projection",
        worst <= 1e-10 && worst_idem <= 1e-10,
        format!(
            "max deviation from eigen-clip {worst:.2e}, idempotence {worst_idem:.2e} (<= 1e-10)"
        ),
    );
}
