//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria 5 and 7 encode statistical/reproduction targets that the
//! implementation does not fully meet; those tests fail by design rather
//! than being weakened. See the README for the status table.

use std::collections::BTreeSet;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lad_diagnostics::classical::{classical_flags, OutlierRule};
use lad_diagnostics::data::{bundled, generate_threevariables, generate_twovariables};
use lad_diagnostics::detect::{detect_leverage, detect_outliers};
use lad_diagnostics::lad::{brute_force_lad, fit_lad};
use lad_diagnostics::scores::compute_scores;
use lad_diagnostics::Dataset;

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    let x = DMatrix::from_fn(n, p, |_, _| rng.gen_range(-10.0..10.0));
    let y = DVector::from_fn(n, |_, _| rng.gen_range(-10.0..10.0));
    Dataset::new(x, y).unwrap()
}

fn set(v: &[usize]) -> BTreeSet<usize> {
    v.iter().copied().collect()
}

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("acceptance {id} [{name}]: {status} — {detail}");
    assert!(ok, "acceptance criterion {id} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = rng.gen_range(1..=2usize);
        let n = rng.gen_range(p + 3..=12);
        let data = random_dataset(&mut rng, n, p);
        let fit = fit_lad(&data).unwrap();
        let oracle = brute_force_lad(&data).unwrap();
        let rel = (fit.objective - oracle.objective).abs() / (1.0 + oracle.objective);
        worst = worst.max(rel);
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "oracle-equivalence",
        worst <= 1e-9 && secs < 10.0,
        &format!("200 datasets, worst relative gap {worst:.2e}, {secs:.2}s"),
    );
}

#[test]
fn criterion_2_score_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut checked = 0;
    for _ in 0..100 {
        let p = rng.gen_range(1..=2usize);
        let n = rng.gen_range((p + 3).max(6)..=30);
        let data = random_dataset(&mut rng, n, p);
        let table = compute_scores(&data).unwrap();
        let sum_l: u32 = table.l_scores.iter().sum();
        let sum_o: u32 = table.o_scores.iter().sum();
        assert_eq!(sum_l as usize, n * (p + 1), "sum of L scores");
        assert_eq!(sum_o as usize, n, "sum of O scores");
        for k in 0..n {
            assert!(
                (table.l_scores[k] + table.o_scores[k]) as usize <= n - 1,
                "L+O bound at position {k}"
            );
        }
        if table.degenerate_subsets.is_empty() {
            checked += 1;
        }
    }
    report(
        2,
        "score-identities",
        true,
        &format!("100 datasets, identities exact, {checked} fully non-degenerate"),
    );
}

#[test]
fn criterion_3_extreme_point_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut t1_ok = 0;
    let mut t2_ok = 0;
    for _ in 0..50 {
        let p = rng.gen_range(1..=2usize);
        let n = rng.gen_range(p + 3..=15);
        let data = random_dataset(&mut rng, n, p);

        // A point with interior x but arbitrarily large |y| never enters
        // the basis.
        let x_mid: Vec<f64> = (0..p).map(|j| data.x().column(j).mean()).collect();
        let huge_y = data.push(&x_mid, 1e7).unwrap();
        let fit = fit_lad(&huge_y).unwrap();
        if !fit.basis.contains(&n) {
            t1_ok += 1;
        }

        // A point far enough out in x is always interpolated.
        let x_far: Vec<f64> = (0..p).map(|_| 1e6).collect();
        let y_far = rng.gen_range(-10.0..10.0);
        let huge_x = data.push(&x_far, y_far).unwrap();
        let fit = fit_lad(&huge_x).unwrap();
        if fit.basis.contains(&n) {
            t2_ok += 1;
        }
    }
    report(
        3,
        "extreme-point-properties",
        t1_ok == 50 && t2_ok == 50,
        &format!("interior-x/huge-y excluded {t1_ok}/50, huge-x included {t2_ok}/50"),
    );
}

#[test]
fn criterion_4_telephone() {
    let start = Instant::now();
    let data = bundled("telephone").unwrap();
    let out = detect_outliers(&data).unwrap();
    let lev = detect_leverage(&data).unwrap();
    let classical = classical_flags(&data, OutlierRule::TwoSided).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = out.flagged_sorted() == vec![17, 18, 19, 20]
        && lev.flagged.is_empty()
        && classical.outlier_flags == vec![20]
        && classical.leverage_flags.is_empty()
        && secs < 5.0;
    report(
        4,
        "telephone-reproduction",
        ok,
        &format!(
            "outliers {:?}, leverage {:?}, classical outliers {:?}, {secs:.2}s",
            out.flagged_sorted(),
            lev.flagged_sorted(),
            classical.outlier_flags
        ),
    );
}

/// Exact match, or a deviation of at most one observation per set that is
/// documented by the committed round trace (tests/fixtures/hawkins_trace.json).
fn deviation_ok(got: &BTreeSet<usize>, target: &BTreeSet<usize>, trace_matches: bool) -> bool {
    if got == target {
        return true;
    }
    let missing = target.difference(got).count();
    let extra = got.difference(target).count();
    missing <= 1 && extra <= 1 && trace_matches
}

#[test]
fn criterion_5_hawkins() {
    let data = bundled("hawkins").unwrap();
    let out = detect_outliers(&data).unwrap();
    let lev = detect_leverage(&data).unwrap();

    let fixture: serde_json::Value =
        serde_json::from_str(include_str!("fixtures/hawkins_trace.json")).unwrap();
    let lev_trace_matches =
        serde_json::to_value(&lev).unwrap() == fixture["leverage"]["report"];
    let out_trace_matches =
        serde_json::to_value(&out).unwrap() == fixture["outliers"]["report"];

    let out_target: BTreeSet<usize> = [11, 12, 13, 14].into();
    let lev_target: BTreeSet<usize> = [3, 4, 5, 6, 9, 10, 13].into();
    let out_got = set(&out.flagged);
    let lev_got = set(&lev.flagged);

    let lev_ok = deviation_ok(&lev_got, &lev_target, lev_trace_matches);
    let out_ok = deviation_ok(&out_got, &out_target, out_trace_matches);

    report(
        5,
        "hawkins-reproduction",
        lev_ok && out_ok,
        &format!(
            "leverage {lev_got:?} vs {lev_target:?} ({}), outliers {out_got:?} vs {out_target:?} ({})",
            if lev_ok { "ok under deviation policy" } else { "out of policy" },
            if out_ok { "ok under deviation policy" } else { "out of policy" },
        ),
    );
}

#[test]
fn criterion_6_scottish() {
    let data = bundled("scottish").unwrap();
    let out = detect_outliers(&data).unwrap();
    let lev = detect_leverage(&data).unwrap();
    let ok = out.flagged_sorted() == vec![7, 18, 33] && lev.flagged_sorted() == vec![11, 17, 35];
    report(
        6,
        "scottish-reproduction",
        ok,
        &format!(
            "outliers {:?}, leverage {:?}",
            out.flagged_sorted(),
            lev.flagged_sorted()
        ),
    );
}

#[test]
fn criterion_7_simulated_power() {
    let planted_out: BTreeSet<usize> = [54, 55, 56].into();
    let planted_lev: BTreeSet<usize> = [51, 52, 53].into();

    let mut recovered = 0;
    let mut max_clean_flags = 0;
    for seed in 0..20u64 {
        let data = generate_twovariables(seed);
        let flagged = set(&detect_outliers(&data).unwrap().flagged);
        if flagged.is_superset(&planted_out) {
            recovered += 1;
        }
        let clean = flagged.difference(&planted_out).count();
        max_clean_flags = max_clean_flags.max(clean);
    }

    let mut lev_compliant = 0;
    for seed in 0..20u64 {
        let data = generate_threevariables(seed);
        let flagged = set(&detect_leverage(&data).unwrap().flagged);
        let clean = flagged.difference(&planted_lev).count();
        if clean <= 1 {
            lev_compliant += 1;
        }
    }

    let ok = recovered >= 19 && max_clean_flags <= 3 && lev_compliant >= 18;
    report(
        7,
        "simulated-power",
        ok,
        &format!(
            "twovariables outliers recovered {recovered}/20 (need ≥19), \
             max clean rows flagged {max_clean_flags} (need ≤3); \
             threevariables leverage compliant {lev_compliant}/20 (need ≥18)"
        ),
    );
}

#[test]
fn criterion_8_masking_regression() {
    let pts = [
        (0.0, 0.1),
        (1.0, 0.9),
        (2.0, 2.2),
        (3.0, 2.8),
        (4.0, 4.1),
        (5.0, 4.9),
        (6.0, 6.2),
        (7.0, 6.8),
        (8.0, 8.1),
        (9.0, 8.9),
        (5.0, 60.0),
        (5.0, 60.0),
    ];
    let x = DMatrix::from_iterator(12, 1, pts.iter().map(|p| p.0));
    let y = DVector::from_iterator(12, pts.iter().map(|p| p.1));
    let data = Dataset::new(x, y).unwrap();

    let ours = detect_outliers(&data).unwrap();

    // Single-pass comparator: flag only the largest |studentized residual|,
    // and only if it clears the cut-off.
    let classical = classical_flags(&data, OutlierRule::TwoSided).unwrap();
    let single_pass: Vec<usize> = classical
        .student_res
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_finite())
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .filter(|(_, r)| r.abs() > 2.0)
        .map(|(i, _)| vec![i + 1])
        .unwrap_or_default();

    let ok = ours.flagged_sorted() == vec![11, 12] && single_pass.len() <= 1;
    report(
        8,
        "masking-regression",
        ok,
        &format!(
            "quarantine method flags {:?}, single-pass rule flags {:?}",
            ours.flagged_sorted(),
            single_pass
        ),
    );
}

#[test]
fn criterion_9_determinism() {
    let bin = env!("CARGO_BIN_EXE_laddiag");
    let run = |threads: &str| {
        std::process::Command::new(bin)
            .args(["diagnose", "--bundled", "hawkins", "--trace", "--threads", threads])
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("4");
    let ok = a.status.success() && b.status.success() && a.stdout == b.stdout;
    report(
        9,
        "determinism",
        ok,
        &format!(
            "threads 1 vs 4: {} bytes, byte-identical = {}",
            a.stdout.len(),
            a.stdout == b.stdout
        ),
    );
}
