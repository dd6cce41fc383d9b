//! Acceptance suite. Every test prints one `[PASS]` / `[FAIL]` line for its
//! criterion before asserting, so `cargo test --test acceptance -- --nocapture`
//! doubles as a report.

mod common;

use angleheads::circmath::circular_distance;
use angleheads::cli::{self, CompareArgs, TrainOpts};
use angleheads::codecs::{CodecSpec, DirectLoss};
use angleheads::geometry::{largest_inscribed_rect, rotate_and_crop};
use angleheads::metrics::{read_error_csv, report_from_errors};
use angleheads::synthdata::{Dataset, DatasetConfig, Manifest, Split};
use angleheads::{Angle, Method, RasterImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::Path;

fn verdict(criterion: &str, ok: bool, detail: String) {
    println!("[{}] {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{criterion} failed: {detail}");
}

fn structured() -> Vec<CodecSpec> {
    Method::ALL.iter().map(|&m| CodecSpec::default_for(m)).collect()
}

#[test]
fn c1_codec_round_trip() {
    let mut worst = Vec::new();
    let mut ok = true;
    for codec in structured() {
        let tol = match codec {
            CodecSpec::Classification { .. } | CodecSpec::CircularGaussian { .. } => 0.5,
            _ => 1e-6,
        };
        let max_err = (0..3600)
            .map(|i| {
                let theta = Angle::new(i as f64 / 10.0).unwrap();
                circular_distance(codec.decode(&codec.encode(theta).values).unwrap(), theta)
            })
            .fold(0.0, f64::max);
        ok &= max_err <= tol;
        worst.push(format!("{}={max_err:.2e}", codec.label()));
    }
    verdict("C1 codec round-trip", ok, format!("max error {}", worst.join(", ")));
}

/// Distance from the nearest non-differentiable point of the loss.
fn kink_distance(codec: &CodecSpec, p: &[f64], t: &[f64]) -> f64 {
    let l1 = || p.iter().zip(t).map(|(a, b)| (a - b).abs()).fold(f64::INFINITY, f64::min);
    match codec {
        CodecSpec::Direct { loss: DirectLoss::Circular } => {
            let r = (p[0] - t[0]).rem_euclid(180.0);
            r.min(180.0 - r)
        }
        CodecSpec::Direct { loss: DirectLoss::NaiveL1 } => (p[0] - t[0]).abs(),
        CodecSpec::UnitVector { .. } => l1().min(p[0].hypot(p[1])),
        CodecSpec::PhaseShift { .. } => l1(),
        _ => f64::INFINITY,
    }
}

#[test]
fn c2_gradient_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut ok = true;
    let mut parts = Vec::new();
    for codec in structured() {
        let mut worst: f64 = 0.0;
        let mut checked = 0;
        while checked < 100 {
            let target = codec.encode(Angle::new(rng.random_range(0.0..360.0)).unwrap());
            let pred: Vec<f64> = (0..codec.output_dim())
                .map(|_| match codec {
                    CodecSpec::Direct { .. } => rng.random_range(-360.0..720.0),
                    _ => rng.random_range(-2.0..2.0),
                })
                .collect();
            if kink_distance(&codec, &pred, &target.values) < 1e-2 {
                continue;
            }
            let analytic = codec.loss_and_grad(&pred, &target).unwrap().gradient;
            let numeric = common::central_diff(
                |p| codec.loss_and_grad(p, &target).unwrap().loss,
                &pred,
                1e-4,
            );
            worst = worst.max(common::relative_error(&analytic, &numeric));
            checked += 1;
        }
        ok &= worst < 1e-4;
        parts.push(format!("{}={worst:.1e}", codec.label()));
    }
    verdict("C2 gradient correctness", ok, format!("worst relative error {}", parts.join(", ")));
}

#[test]
fn c3_boundary_behavior() {
    let below = Angle::new(359.999).unwrap();
    let above = Angle::new(0.001).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [Method::Uv, Method::Psc, Method::Cgd] {
        let codec = CodecSpec::default_for(m);
        let (a, b) = (codec.encode(below).values, codec.encode(above).values);
        let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ok &= gap < 1e-3;
        parts.push(format!("{}={gap:.1e}", codec.label()));
    }
    let da = CodecSpec::default_for(Method::Da);
    let jump = (da.encode(below).values[0] - da.encode(above).values[0]).abs();
    ok &= (jump - 359.998).abs() < 1e-6;
    parts.push(format!("da jump={jump:.3}"));
    verdict("C3 boundary behavior", ok, parts.join(", "));
}

#[test]
fn c4_geometry_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_side: f64 = 0.0;
    for _ in 0..50 {
        let w = rng.random_range(8..160) as f64;
        let h = rng.random_range(8..160) as f64;
        let deg = rng.random_range(0.0..360.0);
        let got = largest_inscribed_rect(w, h, Angle::new(deg).unwrap()).unwrap();
        let (bw, bh) = common::brute_force_rect(w, h, deg);
        worst_side = worst_side
            .max((got.crop_width - bw).abs())
            .max((got.crop_height - bh).abs());
    }
    let unit = largest_inscribed_rect(1.0, 1.0, Angle::new(45.0).unwrap()).unwrap().area();
    let ones = RasterImage::filled(96, 96, 1, 1.0).unwrap();
    let min_pixel = (0..360)
        .map(|d| {
            rotate_and_crop(&ones, Angle::new(d as f64).unwrap(), 64)
                .unwrap()
                .min_value()
        })
        .fold(f32::INFINITY, f32::min);
    let ok = worst_side <= 1.0 && (unit - 0.5).abs() <= 1e-6 && min_pixel > 0.99;
    verdict(
        "C4 geometry oracle",
        ok,
        format!("worst side deviation {worst_side:.3} px, 45° unit-square ratio {unit:.9}, min pixel {min_pixel}"),
    );
}

#[test]
fn c5_metrics_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_auc: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(1..200);
        let errors: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..15.0)).collect();
        let r = report_from_errors(&errors).unwrap();
        for k in [2u32, 5, 10] {
            worst_auc = worst_auc.max((r.auc_at[&k] - common::riemann_auc(&errors, k as f64)).abs());
        }
    }
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..100);
        let errors: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..180.0)).collect();
        let r = report_from_errors(&errors).unwrap();
        let holds = r.mae <= r.rmse + 1e-12
            && [2u32, 5, 10].iter().all(|k| r.auc_at[k] <= r.acc_at[k] + 1e-12)
            && r.median <= r.p90 + 1e-12
            && r.p90 <= r.p95 + 1e-12;
        violations += usize::from(!holds);
    }
    verdict(
        "C5 metrics oracle",
        worst_auc <= 1e-3 && violations == 0,
        format!("max |AUC - Riemann| {worst_auc:.2e}, invariant violations {violations}/1000"),
    );
}

fn default_train_opts() -> TrainOpts {
    TrainOpts {
        lr: 1e-3,
        batch: 32,
        epochs: 60,
        patience: 15,
        optimizer: "adam_like".into(),
        hidden: angleheads::model::DEFAULT_HIDDEN,
        features: "hog".into(),
    }
}

fn synth(dir: &Path, cfg: &DatasetConfig) {
    Dataset::render(cfg).unwrap().write(dir).unwrap();
}

fn compare(data: &Path, out: &Path, methods: &[&str], naive: bool, runs: usize, opts: TrainOpts) {
    cli::cmd_compare(&CompareArgs {
        data: data.to_path_buf(),
        runs,
        seed: 0,
        include_naive_da: naive,
        methods: methods.iter().map(|s| s.to_string()).collect(),
        out: out.to_path_buf(),
        opts,
    })
    .unwrap();
}

/// `label → cells` from a compare table.
fn read_table(path: &Path) -> HashMap<String, HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            let row: HashMap<String, String> =
                header.iter().cloned().zip(rec.iter().map(str::to_string)).collect();
            (row["method"].clone(), row)
        })
        .collect()
}

#[test]
fn c6_end_to_end_comparison() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("cmp"));
    synth(&data, &DatasetConfig { n_train: 2000, ..DatasetConfig::default() });
    let start = std::time::Instant::now();
    compare(&data, &out, &[], true, 1, default_train_opts());
    let elapsed = start.elapsed().as_secs_f64();

    let table = read_table(&out.join("compare.csv"));
    let mae = |label: &str| -> f64 {
        assert_eq!(table[label]["status"], "ok", "{label} failed to train");
        table[label]["mae"].parse().unwrap()
    };
    let structured_maes: Vec<(&str, f64)> =
        ["uv", "psc", "cls", "cgd"].iter().map(|&l| (l, mae(l))).collect();
    let best = structured_maes.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let (da, naive) = (mae("da"), mae("da-naive"));

    let mut errors = read_error_csv(out.join("errors_da-naive_run0.csv")).unwrap();
    errors.sort_by(|a, b| b.error_deg.total_cmp(&a.error_deg));
    let decile = &errors[..errors.len().div_ceil(10)];
    let near_seam = decile
        .iter()
        .filter(|r| r.true_deg <= 20.0 || r.true_deg >= 340.0)
        .count() as f64
        / decile.len() as f64;

    let ok = structured_maes.iter().all(|p| p.1 <= 5.0)
        && naive >= 3.0 * best
        && near_seam >= 0.3
        && da < naive;
    let listed: Vec<String> = structured_maes.iter().map(|(l, m)| format!("{l}={m:.2}")).collect();
    verdict(
        "C6 end-to-end comparison",
        ok,
        format!(
            "MAE {}, da={da:.2}, da-naive={naive:.2} ({:.1}x best), naive top-decile near seam {:.0}%, {elapsed:.0}s",
            listed.join(" "),
            naive / best,
            100.0 * near_seam
        ),
    );
}

fn small_config(test_seed: u64) -> DatasetConfig {
    DatasetConfig {
        n_train: 120,
        n_test: 40,
        test_seed,
        scene_size: 64,
        out_size: 48,
        ..DatasetConfig::default()
    }
}

fn quick_opts(epochs: usize) -> TrainOpts {
    TrainOpts {
        epochs,
        patience: epochs,
        hidden: 32,
        ..default_train_opts()
    }
}

#[test]
fn c7_reproducibility() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, &small_config(2));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    compare(&data, &a, &[], true, 1, quick_opts(3));
    compare(&data, &b, &[], true, 1, quick_opts(3));
    let identical = ["compare.csv", "compare.md", "compare_meta.json"].iter().all(|f| {
        std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap()
    });

    let other = tmp.path().join("other");
    synth(&other, &small_config(99));
    let t1 = Manifest::read_csv(data.join("test.csv"), Split::Test).unwrap();
    let t2 = Manifest::read_csv(other.join("test.csv"), Split::Test).unwrap();
    let same_scenes = t1.scene_seeds().eq(t2.scene_seeds());
    let angles_changed = t1
        .entries
        .iter()
        .zip(&t2.entries)
        .filter(|(x, y)| x.angle_deg != y.angle_deg)
        .count();
    let train_same = std::fs::read(data.join("train.csv")).unwrap()
        == std::fs::read(other.join("train.csv")).unwrap()
        && std::fs::read(data.join("val.csv")).unwrap()
            == std::fs::read(other.join("val.csv")).unwrap();

    verdict(
        "C7 reproducibility",
        identical && same_scenes && train_same && angles_changed == t1.len(),
        format!(
            "tables byte-identical: {identical}; new test seed keeps scenes: {same_scenes}, \
             changes {angles_changed}/{} test angles, train/val untouched: {train_same}",
            t1.len()
        ),
    );
}

#[test]
fn c8_multi_run_reporting() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("cmp"));
    synth(
        &data,
        &DatasetConfig {
            n_train: 400,
            n_test: 100,
            ..DatasetConfig::default()
        },
    );
    compare(&data, &out, &["cgd"], false, 5, quick_opts(15));
    let table = read_table(&out.join("compare.csv"));
    let row = &table["cgd"];
    let cell = &row["mae"];
    let std: Option<f64> = cell
        .strip_suffix(')')
        .and_then(|s| s.split_once('('))
        .and_then(|(_, s)| s.parse().ok());
    let all_cells_paired = row
        .iter()
        .filter(|(k, _)| !matches!(k.as_str(), "method" | "status" | "n"))
        .all(|(_, v)| v.contains('(') && v.ends_with(')'));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("compare_meta.json")).unwrap())
            .unwrap();
    let converged = row["status"] == "ok" && meta["arms"][0]["best_epochs"].as_array().unwrap().len() == 5;
    let ok = all_cells_paired && converged && std.is_some_and(f64::is_finite);
    verdict(
        "C8 multi-run reporting",
        ok,
        format!("cgd MAE cell {cell}, all cells mean(std): {all_cells_paired}, 5 runs converged: {converged}"),
    );
}
