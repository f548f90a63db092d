//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p tailmean-cli --test acceptance -- 3 9`.

use std::path::Path;
use std::process::Command;
use std::result::Result;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};
use tailmean_cli::experiment::{run_coverage, run_ga_check};
use tailmean_cli::{ConfigLayer, RunConfig};
use tailmean_core::*;

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn config(distribution: DistributionSpec, f: impl FnOnce(&mut ConfigLayer)) -> RunConfig {
    let mut layer = ConfigLayer {
        distribution: Some(distribution),
        ..ConfigLayer::default()
    };
    f(&mut layer);
    RunConfig::resolve(layer, None).expect("valid acceptance config")
}

fn dist(family: DistributionFamily, n: usize, p: usize) -> DistributionSpec {
    DistributionSpec {
        family,
        n,
        p,
        seed: 0,
    }
}

// 1

fn truncation_algebra() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        z * 10f64.powi(rng.random_range(-3..4))
    };
    for i in 0..100_000 {
        let (x, y) = (draw(&mut rng), draw(&mut rng));
        let k1 = rng.random_range(1e-3..50.0);
        let k2 = k1 + rng.random_range(0.0..50.0);
        let t = |v: f64, k: f64| truncate_scalar(v, k).map_err(|e| e.to_string());
        let tx = t(x, k1)?;
        ensure(t(-x, k1)? == -tx, || {
            format!("odd fails at x = {x}, kappa = {k1} (input {i})")
        })?;
        ensure(t(tx, k1)? == tx, || {
            format!("idempotence fails at x = {x}, kappa = {k1}")
        })?;
        ensure((tx - t(y, k1)?).abs() <= (x - y).abs(), || {
            format!("1-Lipschitz fails at x = {x}, y = {y}, kappa = {k1}")
        })?;
        let tx2 = t(x, k2)?;
        ensure(tx.abs() <= tx2.abs() && tx * tx2 >= 0.0, || {
            format!("monotone in kappa fails at x = {x}, kappa {k1} < {k2}")
        })?;
    }
    Ok("odd, idempotent, 1-Lipschitz and monotone in kappa on 1e5 inputs".into())
}

// 2

fn score_oracle(column: &[f64], kappa: f64, y: f64) -> f64 {
    column.iter().map(|&x| (x - y).clamp(-kappa, kappa)).sum()
}

/// `inf {f <= level}` or `sup {f >= level}` of the nonincreasing score.
fn bisection(column: &[f64], kappa: f64, level: f64, side: Side) -> f64 {
    let lo0 = column.iter().cloned().fold(f64::INFINITY, f64::min) - kappa - 1.0;
    let hi0 = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + kappa + 1.0;
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = score_oracle(column, kappa, mid);
        let left = match side {
            Side::Smallest => f <= level,
            Side::Largest => f < level,
        };
        if left {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn solver_vs_bisection() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut flat = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let col: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                if rng.random_bool(0.15) {
                    z * 30.0
                } else {
                    z
                }
            })
            .collect();
        let kappa = rng.random_range(0.01..5.0);
        let bound = n as f64 * kappa;
        let level = if n > 1 && rng.random_bool(0.4) {
            // flat pieces of the score sit at integer multiples of kappa
            flat += 1;
            let k = rng.random_range(-(n as i64) + 1..n as i64) as f64;
            k * kappa + if rng.random_bool(0.5) { 1e-6 } else { -1e-6 }
        } else {
            rng.random_range(-0.999 * bound..0.999 * bound)
        };
        let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs())) + kappa;
        for side in [Side::Smallest, Side::Largest] {
            let exact = solve_level(&col, kappa, level, side).map_err(|e| e.to_string())?;
            let oracle = bisection(&col, kappa, level, side);
            let err = (exact - oracle).abs() / scale;
            worst = worst.max(err);
            ensure(err <= 1e-9, || {
                format!("{side:?} at level {level}, kappa {kappa}: {exact} vs bisection {oracle}")
            })?;
        }
    }
    Ok(format!(
        "1000 instances ({flat} next to flat pieces), worst relative error {worst:.1e}"
    ))
}

// 3

fn duality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut rejections, mut boundary) = (0, 0);
    for d in 0..100 {
        let n = rng.random_range(8..80);
        let p = rng.random_range(1..10);
        let values: Vec<f64> = (0..n * p)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                z / rng.random_range(0.02f64..1.0).sqrt() + 0.5
            })
            .collect();
        let x = Matrix::new(n, p, values).map_err(|e| e.to_string())?;
        let spec = TruncationSpec::from_data(&x, 1.0, 1.0).map_err(|e| e.to_string())?;
        let plan = ResamplePlan::new(n, 200, d).map_err(|e| e.to_string())?;
        let resampled = resample_distribution(&x, &spec, &plan).map_err(|e| e.to_string())?;
        let cutoff = empirical_quantile(&resampled, 0.1).map_err(|e| e.to_string())?;
        let sci = match build_sci(&x, &spec, cutoff, 0.1) {
            Ok(s) => s,
            Err(Error::InfeasibleCutoff { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        for _ in 0..100 {
            let mut mu0: Vec<f64> = (0..p)
                .map(|j| {
                    let mid = 0.5 * (sci.lower[j] + sci.upper[j]);
                    let half = 0.5 * (sci.upper[j] - sci.lower[j]);
                    mid + half * rng.random_range(-1.5..1.5)
                })
                .collect();
            if rng.random_bool(0.25) {
                // put one coordinate exactly on an endpoint, the rest strictly inside
                for (j, v) in mu0.iter_mut().enumerate() {
                    *v = 0.5 * (sci.lower[j] + sci.upper[j]);
                }
                let j = rng.random_range(0..p);
                mu0[j] = if rng.random_bool(0.5) {
                    sci.lower[j]
                } else {
                    sci.upper[j]
                };
                boundary += 1;
            }
            let decision = test_mean(&x, &spec, &mu0, cutoff).map_err(|e| e.to_string())?;
            let inside = sci.contains(&mu0);
            let expected = !inside || decision.statistic == decision.threshold;
            ensure(decision.reject == expected, || {
                format!(
                    "dataset {d}: reject = {}, inside = {inside}, statistic {} vs threshold {}",
                    decision.reject, decision.statistic, decision.threshold
                )
            })?;
            rejections += decision.reject as usize;
        }
    }
    Ok(format!(
        "100 datasets x 100 mu0: {rejections} rejections, {boundary} endpoint cases, no mismatch"
    ))
}

// 4

/// Smallest 1-based rank `k` with `k / len >= 1 - alpha`, found by scanning
/// and comparing exactly against the binary value of `alpha`.
fn rank_by_scan(len: usize, alpha: f64) -> usize {
    let bits = alpha.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64 - 1075;
    let mantissa = (bits & ((1 << 52) - 1)) | (1 << 52);
    let shift = (-exponent) as u32;
    let need = ((1u128 << shift) - mantissa as u128) * len as u128;
    (1..=len)
        .find(|&k| (k as u128) << shift >= need)
        .unwrap_or(len)
}

fn quantile_convention() -> Check {
    let four = [1.0, 2.0, 3.0, 4.0];
    let q = upper_quantile(&four, 0.25).map_err(|e| e.to_string())?;
    ensure(q == 3.0, || format!("{{1,2,3,4}} at alpha 0.25 gave {q}"))?;
    let resampled = ResampleDistribution {
        stats: four.to_vec(),
        kappa_used: 1.0,
        half: 2,
    };
    ensure(empirical_quantile(&resampled, 0.25) == Ok(3.0), || {
        "resampled path disagrees".into()
    })?;
    ensure(oracle_cutoff(&four, 0.25) == Ok(3.0), || {
        "oracle path disagrees".into()
    })?;
    let mut fixtures = 0;
    for len in [1, 2, 3, 7, 10, 19, 20, 100, 999, 1000, 2000] {
        let sorted: Vec<f64> = (1..=len).map(|i| i as f64 * 0.5).collect();
        let dist = ResampleDistribution {
            stats: sorted.clone(),
            kappa_used: 1.0,
            half: 1,
        };
        for alpha in [0.01, 0.05, 0.1, 0.2, 0.25, 1.0 / 3.0, 0.5, 0.75, 0.9, 0.99] {
            let want = sorted[rank_by_scan(len, alpha) - 1];
            let e = empirical_quantile(&dist, alpha).map_err(|e| e.to_string())?;
            let o = oracle_cutoff(&sorted, alpha).map_err(|e| e.to_string())?;
            ensure(e == want && o == want, || {
                format!("len {len}, alpha {alpha}: expected {want}, resampled {e}, oracle {o}")
            })?;
            fixtures += 1;
        }
    }
    Ok(format!(
        "{{1,2,3,4}} at 0.25 -> 3; {fixtures} further fixtures agree on both paths"
    ))
}

// 5

fn gaussian_calibration() -> Check {
    let std_normal = Normal::standard();
    let one = std_normal.inverse_cdf(0.975);
    // P(max(|Y1|, |Y2|) <= t) = (2 Phi(t) - 1)^2
    let two = std_normal.inverse_cdf((1.0 + 0.95f64.sqrt()) / 2.0);
    let mut parts = Vec::new();
    for (p, truth) in [(1, one), (2, two)] {
        let draws = sample_gaussian_max::<f64>(&CovarianceModel::identity(p), 1_000_000, 5)
            .map_err(|e| e.to_string())?;
        let c = oracle_cutoff(&draws, 0.05).map_err(|e| e.to_string())?;
        ensure((c - truth).abs() <= 0.01, || {
            format!("p = {p}: cutoff {c:.4}, expected {truth:.4}")
        })?;
        parts.push(format!("p = {p}: {c:.4} (exact {truth:.4})"));
    }
    Ok(parts.join(", "))
}

// 6

fn coverage() -> Check {
    let cfg = config(
        dist(
            DistributionFamily::Gaussian {
                cov: CovarianceKind::Identity,
            },
            200,
            50,
        ),
        |c| {
            c.alpha = Some(0.1);
            c.perms = Some(1000);
            c.reps = Some(500);
            c.seed = Some(6);
        },
    );
    let report = run_coverage(&cfg).map_err(|e| e.to_string())?;
    let cov = report.summary.coverage;
    let msg = format!("coverage {cov:.3} over 500 replicates, band [0.86, 0.94]");
    ensure((0.86..=0.94).contains(&cov), || msg.clone())?;
    Ok(msg)
}

// 7

fn ga_trend() -> Check {
    let mut rho = Vec::new();
    for n in [50, 200, 800] {
        let cfg = config(
            dist(
                DistributionFamily::StudentT {
                    dof: 5.0,
                    cov: CovarianceKind::Identity,
                },
                n,
                50,
            ),
            |c| {
                c.reps = Some(2000);
                c.gauss_draws = Some(2000);
                c.seed = Some(7);
            },
        );
        rho.push(
            run_ga_check(&cfg)
                .map_err(|e| e.to_string())?
                .diagnostics
                .ks_distance,
        );
    }
    let msg = format!(
        "rho at n = 50, 200, 800: {:.4}, {:.4}, {:.4}",
        rho[0], rho[1], rho[2]
    );
    let trend = rho.windows(2).all(|w| w[1] <= w[0] + 0.02);
    ensure(trend && rho[2] < 0.10, || msg.clone())?;
    Ok(msg)
}

// 8

/// Datasets and Gaussian reference draws per seed. The KS noise floor at
/// R = B = 2000 is as large as the effect, so the comparison uses more.
const ADVANTAGE_REPS: usize = 5000;
const ADVANTAGE_DRAWS: usize = 50_000;

fn truncation_advantage() -> Check {
    let mut wins = 0;
    let mut rows = Vec::new();
    for seed in 1..=10u64 {
        let cfg = config(
            dist(
                DistributionFamily::ParetoLog {
                    q: 3.0,
                    x0: std::f64::consts::E,
                },
                200,
                200,
            ),
            |c| {
                c.reps = Some(ADVANTAGE_REPS);
                c.gauss_draws = Some(ADVANTAGE_DRAWS);
                c.seed = Some(seed);
            },
        );
        let d = run_ga_check(&cfg).map_err(|e| e.to_string())?.diagnostics;
        wins += (d.ks_distance <= d.ks_distance_plain) as usize;
        rows.push(format!("{:.3}/{:.3}", d.ks_distance, d.ks_distance_plain));
    }
    let msg = format!(
        "truncated <= plain in {wins}/10 seeds (truncated/plain: {})",
        rows.join(" ")
    );
    ensure(wins >= 8, || msg.clone())?;
    Ok(msg)
}

// 9

fn tailmean(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tailmean"))
        .args(args)
        .current_dir(dir)
        .env_remove("TAILMEAN_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "tailmean {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let data_dist =
        r#"{"family":"student_t","dof":4,"cov":{"kind":"ar1","rho":0.5},"n":151,"p":12}"#;
    tailmean(
        &[
            "generate", "--dist", data_dist, "--seed", "9", "--output", "data.csv",
        ],
        root,
    )?;
    std::fs::write(root.join("mu0.txt"), "0,0,0,0,0,0,0,0,0,0,0,0\n").map_err(|e| e.to_string())?;
    let gauss = r#"{"family":"gaussian","cov":{"kind":"equicorrelated","rho":0.3},"n":60,"p":8}"#;
    let pareto = r#"{"family":"pareto_log","q":3,"n":80,"p":30}"#;
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("generate", vec!["--dist", pareto, "--seed", "3"]),
        (
            "sci",
            vec!["--input", "data.csv", "--perms", "500", "--seed", "4"],
        ),
        (
            "test",
            vec![
                "--input", "data.csv", "--mu0", "mu0.txt", "--perms", "500", "--seed", "4",
            ],
        ),
        (
            "coverage",
            vec![
                "--dist", gauss, "--reps", "40", "--perms", "200", "--seed", "5",
            ],
        ),
        (
            "ga-check",
            vec![
                "--dist",
                pareto,
                "--reps",
                "300",
                "--gauss-draws",
                "5000",
                "--seed",
                "6",
            ],
        ),
        ("diagnose", vec!["--input", "data.csv", "--q", "4"]),
    ];
    for (command, args) in &runs {
        let ext = if *command == "generate" {
            "csv"
        } else {
            "json"
        };
        for workers in ["1", "8"] {
            let out = format!("{command}-w{workers}.{ext}");
            let mut all = vec![*command, "--workers", workers, "--output", &out];
            all.extend(args.iter().copied());
            tailmean(&all, root)?;
        }
    }
    let mut compared = 0;
    for entry in std::fs::read_dir(root).map_err(|e| e.to_string())? {
        let name = entry
            .map_err(|e| e.to_string())?
            .file_name()
            .to_string_lossy()
            .into_owned();
        if !name.contains("-w1.") {
            continue;
        }
        let a = std::fs::read(root.join(&name)).map_err(|e| e.to_string())?;
        let b =
            std::fs::read(root.join(name.replace("-w1.", "-w8."))).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{name} differs between 1 and 8 workers"))?;
        compared += 1;
    }
    Ok(format!(
        "{} commands, {compared} output files byte-identical with 1 and 8 workers",
        runs.len()
    ))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "truncation algebra",
            budget: Some(Duration::from_secs(1)),
            run: truncation_algebra,
        },
        Criterion {
            id: 2,
            name: "exact solver vs bisection",
            budget: Some(Duration::from_secs(5)),
            run: solver_vs_bisection,
        },
        Criterion {
            id: 3,
            name: "interval/test duality",
            budget: Some(Duration::from_secs(30)),
            run: duality,
        },
        Criterion {
            id: 4,
            name: "quantile convention",
            budget: None,
            run: quantile_convention,
        },
        Criterion {
            id: 5,
            name: "Gaussian oracle calibration",
            budget: Some(Duration::from_secs(10)),
            run: gaussian_calibration,
        },
        Criterion {
            id: 6,
            name: "simultaneous coverage",
            budget: Some(Duration::from_secs(300)),
            run: coverage,
        },
        Criterion {
            id: 7,
            name: "Gaussian approximation trend",
            budget: Some(Duration::from_secs(600)),
            run: ga_trend,
        },
        Criterion {
            id: 8,
            name: "truncation advantage",
            budget: None,
            run: truncation_advantage,
        },
        Criterion {
            id: 9,
            name: "determinism across worker counts",
            budget: None,
            run: determinism,
        },
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for c in criteria
        .iter()
        .filter(|c| selected.is_empty() || selected.contains(&c.id))
    {
        let start = Instant::now();
        let mut result = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(msg), Some(budget)) = (&result, c.budget) {
            if elapsed > budget {
                result = Err(format!("{msg}; took {elapsed:.1?}, budget {budget:?}"));
            }
        }
        match result {
            Ok(msg) => println!("[PASS] {}. {}: {msg} ({elapsed:.2?})", c.id, c.name),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {}. {}: {msg} ({elapsed:.2?})", c.id, c.name);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
