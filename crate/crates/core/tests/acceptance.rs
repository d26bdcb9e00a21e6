//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails. Run with `--nocapture` to see the lines.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risloc::dataset::{generate_dataset, load_csv, split, DEFAULT_REPEATS, DEFAULT_SEED};
use risloc::evaluation::{mae, r2, rmse, EvalReport, PeaksFile};
use risloc::physics::{
    array_factor, peak_angle, radiation_pattern, received_power_dbm, steering_phase_profile,
    AngleGrid, RisConfig,
};
use risloc::probing::{build_sector_codebook, DEFAULT_SPAN};
use risloc::regressors::boosting::{gb_fit_traced, xgb_fit};
use risloc::regressors::cart::cart_fit;
use risloc::regressors::knn::{knn_fit, knn_predict};
use risloc::regressors::svr::svr_fit_traced;
use risloc::regressors::{
    fit, CartParams, GbParams, Hyperparams, KnnParams, Node, RegressorSpec, SvrParams,
    TrainedModel, TrainingData, XgbParams,
};

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const DOUBLING_DB: f64 = 6.020599913279624;

fn array_factor_oracle() -> Outcome {
    let cfg = RisConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs: Vec<(f64, f64)> = (0..100)
        .map(|_| (rng.gen_range(0.0..=90.0), rng.gen_range(0.0..=90.0)))
        .collect();
    let start = Instant::now();
    let fast: Vec<_> = pairs
        .iter()
        .map(|&(s, e)| {
            let profile = steering_phase_profile(&cfg, s, cfg.phi_r_deg).unwrap();
            (
                profile.clone(),
                array_factor(&cfg, &profile, e, cfg.phi_r_deg).unwrap(),
            )
        })
        .collect();
    let elapsed = start.elapsed();
    let mut worst = 0.0f64;
    for ((profile, af), &(_, e)) in fast.iter().zip(&pairs) {
        let (re, im) = common::direct_array_factor(&cfg, profile, e, cfg.phi_r_deg);
        let err = ((af.re - re).powi(2) + (af.im - im).powi(2)).sqrt();
        worst = worst.max(err / (re * re + im * im).sqrt().max(1e-300));
    }
    check(
        worst <= 1e-9 && elapsed < Duration::from_secs(1),
        format!("worst relative error {worst:.2e} (<= 1e-9), 100 pairs in {elapsed:?} (< 1 s)"),
    )
}

fn codebook_beam_placement() -> Outcome {
    let cfg = RisConfig::default();
    let cb = build_sector_codebook(&cfg, 4, DEFAULT_SPAN).unwrap();
    let grid = AngleGrid::new(0.0, 90.0, 0.25).unwrap();
    let centers = [11.25, 33.75, 56.25, 78.75];
    let peaks: Vec<f64> = cb
        .profiles()
        .iter()
        .map(|p| peak_angle(&radiation_pattern(&cfg, p, &grid).unwrap()).unwrap())
        .collect();
    let ok = peaks
        .iter()
        .zip(centers)
        .all(|(p, c)| (p - c).abs() <= 0.25);
    check(
        ok,
        format!("sector peaks {peaks:?} vs centers {centers:?} (within 0.25 deg)"),
    )
}

fn link_budget_laws() -> Outcome {
    let base = RisConfig::default();
    let power = |cfg: &RisConfig| {
        let profile = steering_phase_profile(cfg, 45.0, cfg.phi_r_deg).unwrap();
        received_power_dbm(cfg, &profile, 45.0).unwrap()
    };
    let p0 = power(&base);
    let d2_shift = power(&RisConfig {
        d2_m: 2.0 * base.d2_m,
        ..base.clone()
    }) - p0;
    let gamma_shift = power(&RisConfig {
        gamma_amp: 0.35,
        ..base.clone()
    }) - p0;
    check(
        (d2_shift + DOUBLING_DB).abs() <= 1e-6 && (gamma_shift + DOUBLING_DB).abs() <= 1e-6,
        format!("doubling d2: {d2_shift:.7} dB, gamma 0.7->0.35: {gamma_shift:.7} dB (-6.0206 +/- 1e-6)"),
    )
}

fn knn1_noiseless_mae(repeats: usize) -> (f64, usize, usize) {
    let cfg = RisConfig::default();
    let cb = build_sector_codebook(&cfg, 4, DEFAULT_SPAN).unwrap();
    let ds = generate_dataset(&cfg, &cb, 0.5, repeats, 0.0, DEFAULT_SEED).unwrap();
    let (train, test) = split(&ds, 0.2, DEFAULT_SEED).unwrap();
    let spec = RegressorSpec::new(Hyperparams::Knn(KnnParams { k: 1 }), DEFAULT_SEED);
    let model = fit(&train, &spec).unwrap();
    let err = mae(&test.labels(), &model.predict_dataset(&test).unwrap()).unwrap();
    (err, train.len(), test.len())
}

/// Asserted with the dataset defaults apart from sigma = 0. The single-repeat
/// figure is reported for context only: near sidelobe nulls one sector's dBm
/// value swings by 15 dB or more per 0.5 deg, so the nearest neighbour in
/// feature space is often not a grid-adjacent angle.
fn noiseless_localization() -> Outcome {
    let (err, n_train, n_test) = knn1_noiseless_mae(DEFAULT_REPEATS);
    let (single, _, _) = knn1_noiseless_mae(1);
    check(
        err <= 0.5,
        format!(
            "KNN k=1 test MAE {err:.4} deg on {n_train}/{n_test} split, {DEFAULT_REPEATS} repeats (<= 0.5); single-repeat grid gives {single:.4} deg"
        ),
    )
}

struct ReproRun {
    workdir: PathBuf,
    elapsed: Duration,
}

fn run_repro(workdir: &Path) -> ReproRun {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_risloc"))
        .args([
            "repro",
            "--workdir",
            workdir.to_str().unwrap(),
            "--seed",
            "42",
        ])
        .output()
        .expect("spawn risloc");
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    ReproRun {
        workdir: workdir.to_path_buf(),
        elapsed: start.elapsed(),
    }
}

fn load_report(run: &ReproRun) -> EvalReport {
    serde_json::from_str(&std::fs::read_to_string(run.workdir.join("report.json")).unwrap())
        .unwrap()
}

fn noisy_pipeline_quality(run: &ReproRun) -> Outcome {
    let report = load_report(run);
    let best = report.best().unwrap();
    check(
        best.mae_deg <= 8.0 && best.r2 >= 0.85 && run.elapsed < Duration::from_secs(120),
        format!(
            "best {} MAE {:.3} deg (<= 8.0), R2 {:.3} (>= 0.85), repro took {:?} (< 120 s)",
            best.model, best.mae_deg, best.r2, run.elapsed
        ),
    )
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let jensen = (0..1000).all(|_| {
        let n = rng.gen_range(1..64);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-90.0..90.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-90.0..90.0)).collect();
        mae(&a, &b).unwrap() <= rmse(&a, &b).unwrap() + 1e-12
    });
    let y = [10.0, 20.0, 40.0, 70.0];
    let perfect = r2(&y, &y).unwrap();
    let mean_pred = r2(&y, &[35.0; 4]).unwrap();
    let hand = [
        mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 0.0,
        mae(&[0.0], &[3.0]).unwrap() - 3.0,
        rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 0.0,
        rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt(),
        r2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0,
        r2(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 0.0,
    ];
    let hand_ok = hand.iter().all(|d| d.abs() <= 1e-12);
    check(
        jensen && (perfect - 1.0).abs() <= 1e-12 && mean_pred.abs() <= 1e-12 && hand_ok,
        format!("mae<=rmse on 1000 pairs: {jensen}, r2 perfect {perfect}, r2 mean {mean_pred:.1e}, hand cases within 1e-12: {hand_ok}"),
    )
}

fn pattern_comparison_contract(run: &ReproRun) -> Outcome {
    let peaks: PeaksFile = serde_json::from_str(
        &std::fs::read_to_string(run.workdir.join("compare/peaks.json")).unwrap(),
    )
    .unwrap();
    let step: f64 = peaks.grid.rsplit(':').next().unwrap().parse().unwrap();
    let tracks = peaks
        .models
        .iter()
        .all(|m| (m.peak_deg - m.predicted_theta_deg).abs() <= step);
    let report = load_report(run);
    let best = report.best().unwrap();
    let best_delta = peaks
        .models
        .iter()
        .find(|m| m.model == best.model)
        .map(|m| m.peak_delta_deg)
        .unwrap();
    let deltas: Vec<String> = peaks
        .models
        .iter()
        .map(|m| format!("{} {:+.1}", m.model, m.peak_delta_deg))
        .collect();
    check(
        peaks.theta_true_deg == 52.0 && tracks && best_delta.abs() <= 3.0,
        format!(
            "peaks track predictions within {step} deg: {tracks}; best {} |delta| {:.2} (<= 3); deltas [{}]",
            best.model,
            best_delta.abs(),
            deltas.join(", ")
        ),
    )
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(a: &ReproRun, b: &ReproRun) -> Outcome {
    let files = files_under(&a.workdir);
    let same_set = files == files_under(&b.workdir);
    let differing: Vec<String> = files
        .iter()
        .filter(|f| std::fs::read(a.workdir.join(f)).ok() != std::fs::read(b.workdir.join(f)).ok())
        .map(|f| f.display().to_string())
        .collect();
    let test = load_csv(&a.workdir.join("test.csv"), 4).unwrap();
    let mut worst = 0.0f64;
    for f in files.iter().filter(|f| f.starts_with("models")) {
        let text = std::fs::read_to_string(a.workdir.join(f)).unwrap();
        let model = TrainedModel::from_json(&text).unwrap();
        let again = TrainedModel::from_json(&model.to_json().unwrap()).unwrap();
        for s in &test.samples {
            let x = &s.features.powers_dbm;
            let d = (model.predict_slice(x).unwrap() - again.predict_slice(x).unwrap()).abs();
            worst = worst.max(d);
        }
    }
    check(
        same_set && differing.is_empty() && worst <= 1e-9,
        format!(
            "{} artifacts byte-identical across runs: {} (differing: {:?}); round-trip max prediction change {worst:.1e} (<= 1e-9)",
            files.len(),
            same_set && differing.is_empty(),
            differing
        ),
    )
}

fn regressor_oracles() -> Outcome {
    let mut failures = Vec::new();

    let (x, y) = common::random_dataset(20, 4, 99);
    let td = TrainingData::new(x.clone(), y.clone()).unwrap();
    let tree = cart_fit(
        &td,
        &CartParams {
            max_depth: Some(2),
            ..CartParams::default()
        },
    )
    .unwrap();
    let oracle = common::oracle_tree(&x, &y, &(0..20).collect::<Vec<_>>(), 0, 2);
    if !common::trees_match(&tree, &oracle, 1e-12) {
        failures.push("CART split choice");
    }

    let (kx, ky) = common::random_dataset(10, 4, 100);
    let knn = knn_fit(
        &TrainingData::new(kx.clone(), ky.clone()).unwrap(),
        &KnnParams { k: 3 },
    )
    .unwrap();
    let (queries, _) = common::random_dataset(50, 4, 101);
    if !queries
        .iter()
        .all(|q| (knn_predict(&knn, q) - common::knn_bruteforce(&kx, &ky, q, 3)).abs() <= 1e-12)
    {
        failures.push("KNN neighbours");
    }

    let (gx, gy) = common::random_dataset(30, 4, 102);
    let gb_params = GbParams {
        n_estimators: 5,
        max_depth: Some(2),
        ..GbParams::default()
    };
    let (_, sse) = gb_fit_traced(&TrainingData::new(gx, gy).unwrap(), &gb_params).unwrap();
    if !sse.windows(2).all(|w| w[1] <= w[0] + 1e-9) {
        failures.push("GB SSE monotonicity");
    }

    let (hx, hy) = common::xgb_hand_dataset();
    let xgb_params = XgbParams {
        n_estimators: 1,
        max_depth: Some(1),
        lambda: 1.0,
        gamma: 0.0,
        ..XgbParams::default()
    };
    let xgb = xgb_fit(&TrainingData::new(hx, hy).unwrap(), &xgb_params).unwrap();
    let leaves = xgb.trees[0].leaf_values();
    let split_ok =
        matches!(xgb.trees[0], Node::Split { feature: 0, threshold, .. } if threshold == 3.5);
    if !(split_ok
        && (leaves[0] + 90.0 / 7.0).abs() <= 1e-12
        && (leaves[1] - 90.0 / 7.0).abs() <= 1e-12)
    {
        failures.push("XGB leaf values");
    }

    let (sx, sy) = common::smooth_dataset(20, 103);
    let (_, dual) =
        svr_fit_traced(&TrainingData::new(sx, sy).unwrap(), &SvrParams::default()).unwrap();
    if !dual
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0))
    {
        failures.push("SVR dual ascent");
    }

    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "CART = exhaustive oracle, KNN = brute-force sort, GB SSE {:.1} -> {:.1} non-increasing, XGB leaves {:?} = -/+90/7, SVR dual non-decreasing over {} updates",
                sse[0],
                sse[sse.len() - 1],
                leaves,
                dual.len()
            )
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

#[test]
fn acceptance_criteria() {
    let scratch = tempfile::tempdir().unwrap();
    let first = run_repro(&scratch.path().join("run-a"));
    let second = run_repro(&scratch.path().join("run-b"));

    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "array-factor oracle equivalence", array_factor_oracle()),
        (2, "codebook beam placement", codebook_beam_placement()),
        (3, "link-budget laws", link_budget_laws()),
        (4, "noiseless localization", noiseless_localization()),
        (5, "noisy-pipeline quality", noisy_pipeline_quality(&first)),
        (6, "metric identities", metric_identities()),
        (
            7,
            "pattern-comparison contract",
            pattern_comparison_contract(&first),
        ),
        (8, "determinism", determinism(&first, &second)),
        (9, "regressor oracles", regressor_oracles()),
    ];

    let mut failed = Vec::new();
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(detail) => {
                println!("FAIL criterion {n} ({name}): {detail}");
                failed.push(*n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
