//! Acceptance checks. Run with `cargo test -p baryscore-core --test acceptance`.
//! Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

mod common;

use std::time::{Duration, Instant};

use baryscore::baryscore::{write_scores_csv, ScoreRow};
use baryscore::embeddings::{compute_idf, read_bundle, write_bundle};
use baryscore::eval::{
    evaluate, kendall, kendall_pair_counts, pearson, spearman, system_level, text_level, williams_test,
    Coefficient, EvalDataset, Judgment, Level,
};
use baryscore::ot::{solve_transport, wasserstein};
use baryscore::{
    bary_score, batch_score, free_support_barycenter, BarycenterConfig, InitStrategy, CostMatrix, DiscreteMeasure, Error,
    IdfTable, LayeredEmbedding, ScoreConfig, Weighting,
};
use common::*;
use ndarray::{array, Array1, Array2};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ot_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=6);
        let mut a = rational_weights(&mut rng, n);
        let mut b = rational_weights(&mut rng, m);
        // A few instances carry zero-mass atoms.
        if case % 10 == 0 && n > 1 {
            let z = rng.random_range(0..n);
            let moved = a[z];
            a[z] = 0.0;
            a[(z + 1) % n] += moved;
        }
        if case % 15 == 0 && m > 1 {
            let z = rng.random_range(0..m);
            let moved = b[z];
            b[z] = 0.0;
            b[(z + 1) % m] += moved;
        }
        let c = if case % 2 == 0 {
            Array2::from_shape_fn((n, m), |_| rng.random_range(0.0..1.0))
        } else {
            let d = rng.random_range(1..=4);
            let x = gaussian_matrix(&mut rng, n, d, 1.0);
            let y = gaussian_matrix(&mut rng, m, d, 1.0);
            Array2::from_shape_fn((n, m), |(i, j)| (&x.row(i) - &y.row(j)).mapv(|v| v * v).sum())
        };
        let expected = lp_transport_cost(&a, &b, &c);
        let cost = CostMatrix::from_entries(c.clone(), 2.0).map_err(|e| e.to_string())?;
        let got = solve_transport(&a, &b, &cost).map_err(|e| format!("case {case}: {e}"))?;
        let err = (got.cost - expected).abs();
        worst = worst.max(err);
        ensure(err <= 1e-8, || format!("case {case} ({n}x{m}): solver {} vs LP {expected}", got.cost))?;
        ensure(got.exact, || format!("case {case}: solution not flagged exact"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("200 instances, max |diff| {worst:.1e}, {elapsed:.2?}"))
}

fn metric_axioms() -> Outcome {
    let mut rng = rng(2);
    let (mut id_worst, mut sym_worst, mut tri_slack) = (0.0f64, 0.0f64, f64::INFINITY);
    for case in 0..100 {
        let d = rng.random_range(1..=8);
        let sizes: Vec<usize> = (0..3).map(|_| rng.random_range(1..=10)).collect();
        let mu = random_measure(&mut rng, sizes[0], d);
        let nu = random_measure(&mut rng, sizes[1], d);
        let rho = random_measure(&mut rng, sizes[2], d);
        let w = |x: &DiscreteMeasure, y: &DiscreteMeasure| wasserstein(x, y, 2.0).map_err(|e| e.to_string());
        let id = w(&mu, &mu)?;
        id_worst = id_worst.max(id);
        ensure(id <= 1e-9, || format!("case {case}: W(mu, mu) = {id}"))?;
        let (mn, nm) = (w(&mu, &nu)?, w(&nu, &mu)?);
        sym_worst = sym_worst.max((mn - nm).abs());
        ensure((mn - nm).abs() <= 1e-9, || format!("case {case}: asymmetric {mn} vs {nm}"))?;
        let (nr, mr) = (w(&nu, &rho)?, w(&mu, &rho)?);
        tri_slack = tri_slack.min(mn + nr - mr);
        ensure(mr <= mn + nr + 1e-7, || format!("case {case}: {mr} > {mn} + {nr}"))?;
    }
    Ok(format!(
        "100 triples, identity {id_worst:.1e}, symmetry {sym_worst:.1e}, min triangle slack {tri_slack:.1e}"
    ))
}

fn barycenter_of_two_diracs() -> Outcome {
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let d = rng.random_range(1..=8);
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let measures = [
            DiscreteMeasure::dirac(&a).map_err(|e| e.to_string())?,
            DiscreteMeasure::dirac(&b).map_err(|e| e.to_string())?,
        ];
        let res = free_support_barycenter(&measures, &BarycenterConfig::new(1)).map_err(|e| e.to_string())?;
        let support = res.measure.support();
        for k in 0..d {
            let err = (support[[0, k]] - 0.5 * (a[k] + b[k])).abs();
            worst = worst.max(err);
            ensure(err <= 1e-8, || format!("case {case}: coordinate {k} off by {err}"))?;
        }
        let half_sq: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / 2.0;
        // Summed squared distances from the returned barycenter to both inputs.
        let summed: f64 = measures
            .iter()
            .map(|m| wasserstein(m, &res.measure, 2.0).map(|w| w * w))
            .sum::<baryscore::Result<f64>>()
            .map_err(|e| e.to_string())?;
        let err = (summed - half_sq).abs();
        worst = worst.max(err);
        ensure(err <= 1e-8, || format!("case {case}: sum of W2^2 {summed} vs |a-b|^2/2 = {half_sq}"))?;
        // The reported objective carries lambda = 1/2 on each term.
        let err = (res.objective() - 0.5 * half_sq).abs();
        worst = worst.max(err);
        ensure(err <= 1e-8, || format!("case {case}: objective {} vs {}", res.objective(), 0.5 * half_sq))?;
    }
    Ok(format!(
        "20 pairs, midpoint and sum W2^2 = |a-b|^2/2 (objective with lambda=1/2 is |a-b|^2/4), max error {worst:.1e}"
    ))
}

fn barycenter_monotonicity() -> Outcome {
    let mut rng = rng(4);
    let mut max_rise = f64::NEG_INFINITY;
    for case in 0..100 {
        let d = if case % 2 == 0 { 1 } else { 2 };
        let count = rng.random_range(2..=4);
        let measures: Vec<DiscreteMeasure> = (0..count)
            .map(|_| {
                let n = rng.random_range(1..=8);
                random_measure(&mut rng, n, d)
            })
            .collect();
        let config = if case % 4 < 2 {
            BarycenterConfig::new(measures[0].len())
        } else {
            let k = rng.random_range(1..=6);
            BarycenterConfig::new(k).with_init(InitStrategy::Given(gaussian_matrix(&mut rng, k, d, 1.0)))
        };
        let res = free_support_barycenter(&measures, &config).map_err(|e| e.to_string())?;
        for (step, w) in res.objective_trace.windows(2).enumerate() {
            max_rise = max_rise.max(w[1] - w[0]);
            ensure(w[1] <= w[0] + 1e-9, || format!("case {case} step {step}: {} -> {}", w[0], w[1]))?;
        }
    }

    let mut rng = common::rng(5);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let measures: Vec<(Vec<f64>, Vec<f64>)> = (0..2)
            .map(|_| {
                let mut xs = vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
                xs.sort_by(f64::total_cmp);
                (xs, rational_weights(&mut rng, 2))
            })
            .collect();
        let as_measure = |(xs, ws): &(Vec<f64>, Vec<f64>)| {
            DiscreteMeasure::new(Array2::from_shape_vec((2, 1), xs.clone()).unwrap(), Array1::from(ws.clone()))
        };
        let ms = measures.iter().map(as_measure).collect::<baryscore::Result<Vec<_>>>().map_err(|e| e.to_string())?;
        let res = free_support_barycenter(&ms, &BarycenterConfig::new(2)).map_err(|e| e.to_string())?;
        let oracle = grid_barycenter_objective_1d(&measures, 0.0, 1.0, 1e-3);
        let err = (res.objective() - oracle).abs();
        worst = worst.max(err);
        ensure(err <= 1e-4, || format!("grid case {case}: {} vs oracle {oracle}", res.objective()))?;
    }
    Ok(format!(
        "100 traces, max per-step rise {max_rise:.1e}; 20 grid cases, max |diff| {worst:.1e}"
    ))
}

fn degenerate_score() -> Outcome {
    let mut rng = rng(6);
    let config = ScoreConfig::default();
    let mut worst_self = 0.0f64;
    for case in 0..50 {
        let layers = rng.random_range(1..=4);
        let n = rng.random_range(1..=12);
        let d = rng.random_range(1..=32);
        let x = random_embedding(&mut rng, &format!("x{case}"), layers, n, d);
        let idf = compute_idf(&[x.tokens()]).map_err(|e| e.to_string())?;
        let s = bary_score(&x, &x, &idf, &config).map_err(|e| e.to_string())?.score;
        worst_self = worst_self.max(s);
        ensure(s <= 1e-8, || format!("case {case}: self score {s}"))?;
    }

    let uniform = ScoreConfig {
        weighting: Weighting::Uniform,
        ..ScoreConfig::default()
    };
    let mut worst_l1 = 0.0f64;
    for case in 0..50 {
        let d = rng.random_range(1..=32);
        let (n1, n2) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let x = random_embedding(&mut rng, "x", 1, n1, d);
        let y = random_embedding(&mut rng, "y", 1, n2, d);
        let s = bary_score(&x, &y, &IdfTable::flat(), &uniform).map_err(|e| e.to_string())?.score;
        let mx = DiscreteMeasure::uniform(x.layer(0).to_owned()).map_err(|e| e.to_string())?;
        let my = DiscreteMeasure::uniform(y.layer(0).to_owned()).map_err(|e| e.to_string())?;
        let direct = wasserstein(&mx, &my, 2.0).map_err(|e| e.to_string())?;
        worst_l1 = worst_l1.max((s - direct).abs());
        ensure((s - direct).abs() <= 1e-8, || format!("L=1 case {case}: {s} vs direct {direct}"))?;
    }
    Ok(format!(
        "50 self scores, max {worst_self:.1e}; 50 single-layer pairs, max |diff| {worst_l1:.1e}"
    ))
}

fn noise_monotonicity() -> Outcome {
    let mut rng = rng(7);
    let config = ScoreConfig::default();
    let bases: Vec<LayeredEmbedding> = (0..100)
        .map(|i| {
            let n = rng.random_range(4..=12);
            random_embedding(&mut rng, &format!("r{i}"), 4, n, 16)
        })
        .collect();
    let docs: Vec<&[String]> = bases.iter().map(|e| e.tokens()).collect();
    let idf = compute_idf(&docs).map_err(|e| e.to_string())?;
    let mut means = Vec::new();
    for sigma in [0.01, 0.1, 1.0] {
        let mut total = 0.0;
        for base in &bases {
            let noisy = perturbed(&mut rng, base, "c", sigma);
            total += bary_score(&noisy, base, &idf, &config).map_err(|e| e.to_string())?.score;
        }
        means.push(total / bases.len() as f64);
    }
    ensure(means[0] < means[1] && means[1] < means[2], || format!("means {means:?}"))?;
    Ok(format!(
        "sigma 0.01/0.1/1.0 -> mean score {:.4}/{:.4}/{:.4}",
        means[0], means[1], means[2]
    ))
}

fn tied_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    // Small value pools force ties; sometimes continuous values.
    if rng.random_bool(0.3) {
        (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
    } else {
        let pool = rng.random_range(2..=5);
        (0..n).map(|_| rng.random_range(0..pool) as f64 * 0.5).collect()
    }
}

fn close(got: baryscore::Result<f64>, want: Option<f64>, tol: f64) -> bool {
    match (got, want) {
        (Ok(g), Some(w)) => (g - w).abs() <= tol,
        (Err(Error::DegenerateInput(_)), None) => true,
        _ => false,
    }
}

fn grid_dataset(human: &Array2<f64>) -> EvalDataset {
    let mut js = Vec::new();
    for ((t, s), &h) in human.indexed_iter() {
        js.push(Judgment {
            text_id: format!("t{t}"),
            system_id: format!("s{s}"),
            candidate_id: format!("c{t}_{s}"),
            human_score: h,
        });
    }
    let refs = (0..human.nrows()).map(|t| (format!("t{t}"), vec![format!("r{t}")])).collect();
    EvalDataset::from_judgments(&js, refs).unwrap()
}

fn correlation_oracles() -> Outcome {
    let mut rng = rng(8);
    let mut worst = 0.0f64;
    for case in 0..500 {
        let n = rng.random_range(2..=10);
        let x = tied_vector(&mut rng, n);
        let y = tied_vector(&mut rng, n);
        let counts = kendall_pair_counts(&x, &y).map_err(|e| e.to_string())?;
        let want = pair_counts_oracle(&x, &y);
        let got = (counts.concordant, counts.discordant, counts.ties_x, counts.ties_y, counts.ties_both);
        ensure(got == want, || format!("case {case}: counts {got:?} vs {want:?}"))?;
        for (name, g, w) in [
            ("pearson", pearson(&x, &y), pearson_oracle(&x, &y)),
            ("spearman", spearman(&x, &y), spearman_oracle(&x, &y)),
            ("kendall", kendall(&x, &y), kendall_oracle(&x, &y)),
        ] {
            if let (Ok(gv), Some(wv)) = (&g, w) {
                worst = worst.max((gv - wv).abs());
            }
            let shown = format!("{g:?} vs {w:?}");
            ensure(close(g, w, 1e-12), || format!("case {case} {name}: {shown} on {x:?} / {y:?}"))?;
        }
    }

    // 3 texts x 4 systems. The last metric row is constant and must be skipped
    // at text level.
    let human = array![[1.0, 2.0, 3.0, 4.0], [2.0, 1.0, 4.0, 3.0], [0.0, 3.0, 2.0, 4.0]];
    let metric = array![[1.0, 3.0, 2.0, 4.0], [1.0, 2.0, 3.0, 4.0], [2.0, 2.0, 2.0, 2.0]];
    let ds = grid_dataset(&human);
    // System means x3: metric (4, 7, 7, 10), human (3, 6, 9, 11).
    //   pearson: sxy = 24, sxx = 18, syy = 36.75
    //   spearman: ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4) -> 4.5 / sqrt(4.5 * 5)
    //   kendall: 5 concordant, 1 pair tied in metric only -> 5 / sqrt(5 * 6)
    // Text rows: t0 -> pearson = spearman = 0.8, kendall = 4/6;
    //            t1 -> pearson = spearman = 0.6, kendall = 2/6; t2 skipped.
    let expected = [
        (Level::System, Coefficient::Pearson, 24.0 / (18.0f64 * 36.75).sqrt(), 4),
        (Level::System, Coefficient::Spearman, 4.5 / (22.5f64).sqrt(), 4),
        (Level::System, Coefficient::Kendall, 5.0 / 30.0f64.sqrt(), 4),
        (Level::Text, Coefficient::Pearson, 0.7, 2),
        (Level::Text, Coefficient::Spearman, 0.7, 2),
        (Level::Text, Coefficient::Kendall, 0.5, 2),
    ];
    let rows: Vec<ScoreRow> = metric
        .indexed_iter()
        .map(|((t, s), &v)| ScoreRow {
            candidate_id: format!("c{t}_{s}"),
            reference_id: format!("r{t}"),
            score: -v,
        })
        .collect();
    let grid = ds.metric_grid(&rows).map_err(|e| e.to_string())?;
    let via_evaluate = evaluate(&ds, &grid, &[Level::System, Level::Text], &Coefficient::ALL, false)
        .map_err(|e| e.to_string())?;
    for (i, &(level, coef, value, n_eff)) in expected.iter().enumerate() {
        let direct = match level {
            Level::System => system_level(&ds, &metric, coef),
            Level::Text => text_level(&ds, &metric, coef),
        }
        .map_err(|e| e.to_string())?;
        for report in [direct, via_evaluate[i]] {
            ensure(report.level == level && report.coefficient == coef, || format!("report order {report:?}"))?;
            ensure((report.value - value).abs() <= 1e-12, || {
                format!("{level} {coef}: {} vs hand value {value}", report.value)
            })?;
            ensure(report.n_effective == n_eff, || format!("{level} {coef}: n_effective {}", report.n_effective))?;
        }
    }
    Ok(format!("500 vectors, max |diff| {worst:.1e}, counts exact; 3x4 dataset matches hand values"))
}

fn williams_oracle() -> Outcome {
    let grid = [-0.8, -0.3, 0.1, 0.5, 0.9];
    let (mut checked, mut invalid, mut worst) = (0, 0, 0.0f64);
    for n in [10usize, 50, 200] {
        for &r12 in &grid {
            for &r13 in &grid {
                for &r23 in &grid {
                    let got = williams_test(r12, r13, r23, n);
                    if r12 == r13 {
                        let out = got.map_err(|e| format!("equal correlations: {e}"))?;
                        ensure((out.p_value - 0.5).abs() <= 1e-12, || format!("p = {} for r12 = r13", out.p_value))?;
                        continue;
                    }
                    match williams_t_oracle(r12, r13, r23, n as f64) {
                        None => {
                            invalid += 1;
                            ensure(matches!(got, Err(Error::DomainError(_))), || {
                                format!("({r12}, {r13}, {r23}, n={n}) should be rejected, got {got:?}")
                            })?;
                        }
                        Some(t) => {
                            let out = got.map_err(|e| format!("({r12}, {r13}, {r23}, n={n}): {e}"))?;
                            let p = t_sf_quadrature(t, (n - 3) as f64);
                            let (dt, dp) = ((out.t_statistic - t).abs(), (out.p_value - p).abs());
                            worst = worst.max(dt).max(dp);
                            ensure(dt <= 1e-6 && dp <= 1e-6, || {
                                format!("({r12}, {r13}, {r23}, n={n}): t {} vs {t}, p {} vs {p}", out.t_statistic, out.p_value)
                            })?;
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{checked} points match quadrature (max |diff| {worst:.1e}), {invalid} invalid points rejected, r12 = r13 gives p = 0.5"
    ))
}

fn synthetic_pairs(seed: u64, count: usize, layers: usize, max_tokens: usize, d: usize) -> (Vec<LayeredEmbedding>, Vec<LayeredEmbedding>) {
    let mut rng = common::rng(seed);
    let mut cands = Vec::with_capacity(count);
    let mut refs = Vec::with_capacity(count);
    for i in 0..count {
        let n = rng.random_range(1..=max_tokens);
        let r = random_embedding(&mut rng, &format!("ref{i}"), layers, n, d);
        let m = rng.random_range(1..=max_tokens);
        cands.push(random_embedding(&mut rng, &format!("cand{i}"), layers, m, d));
        refs.push(r);
    }
    (cands, refs)
}

fn score_file(cands: &[LayeredEmbedding], refs: &[LayeredEmbedding], workers: usize) -> Result<Vec<u8>, String> {
    let docs: Vec<&[String]> = refs.iter().map(|e| e.tokens()).collect();
    let idf = compute_idf(&docs).map_err(|e| e.to_string())?;
    let records = batch_score(cands, refs, &idf, &ScoreConfig::default(), workers)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect::<baryscore::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    write_scores_csv(&mut out, &records, true).map_err(|e| e.to_string())?;
    Ok(out)
}

fn determinism() -> Outcome {
    let (cands, refs) = synthetic_pairs(9, 60, 3, 10, 8);
    let mut cand_bytes = Vec::new();
    let mut ref_bytes = Vec::new();
    write_bundle(&mut cand_bytes, &cands).map_err(|e| e.to_string())?;
    write_bundle(&mut ref_bytes, &refs).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for workers in [1, 8, 1, 8, 3] {
        let (_, c) = read_bundle(cand_bytes.as_slice()).map_err(|e| e.to_string())?;
        let (_, r) = read_bundle(ref_bytes.as_slice()).map_err(|e| e.to_string())?;
        outputs.push((workers, score_file(&c, &r, workers)?));
    }
    for (workers, bytes) in &outputs[1..] {
        ensure(bytes == &outputs[0].1, || format!("output with {workers} workers differs"))?;
    }
    Ok(format!(
        "{} runs over 60 pairs, workers 1/8/3, identical {}-byte CSVs",
        outputs.len(),
        outputs[0].1.len()
    ))
}

fn performance() -> Outcome {
    let (cands, refs) = synthetic_pairs(10, 1000, 4, 30, 64);
    let start = Instant::now();
    let bytes = score_file(&cands, &refs, 1)?;
    let elapsed = start.elapsed();
    ensure(!bytes.is_empty(), || "empty output".into())?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "1000 pairs in {elapsed:.2?} single-threaded ({:.0} pairs/s)",
        1000.0 / elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("ot_oracle_equivalence", ot_oracle_equivalence),
        ("metric_axioms", metric_axioms),
        ("barycenter_two_diracs", barycenter_of_two_diracs),
        ("barycenter_monotonicity", barycenter_monotonicity),
        ("degenerate_score", degenerate_score),
        ("noise_monotonicity", noise_monotonicity),
        ("correlation_oracles", correlation_oracles),
        ("williams_oracle", williams_oracle),
        ("determinism", determinism),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
