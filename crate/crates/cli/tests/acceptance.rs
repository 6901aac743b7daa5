//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use boxsize::eval::evaluate_velocity;
use boxsize::oracle::{exhaustive_1d, exhaustive_partition, exhaustive_split};
use boxsize::refine::{iterative_refinement_with, Rescoring};
use boxsize::split::best_split;
use boxsize::{
    dp_1d, evaluate, solve, Catalog, Cluster, Dims, EvalOptions, Product, ShipmentRecord, Solution,
    SolverConfig, Stage, StageRecord,
};
use boxsize_cli::commands::{run, Cli, Output};
use boxsize_cli::io::{write_catalog, write_shipments};
use boxsize_cli::synth::{self, Profile};
use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn catalog(items: &[(f64, f64, f64, f64)]) -> Catalog {
    let products = items
        .iter()
        .enumerate()
        .map(|(i, &(l, w, h, s))| Product::new(format!("p{i:04}"), Dims::new(l, w, h).unwrap(), s).unwrap())
        .collect();
    Catalog::new(products).unwrap()
}

/// Dims on a 0.5 cm grid, velocities on a 0.25 grid so every sum is exact.
fn random_items(rng: &mut ChaCha8Rng, n: usize, dim_steps: u32, vel_steps: u32) -> Vec<(f64, f64, f64, f64)> {
    (0..n)
        .map(|_| {
            (
                rng.random_range(1..=dim_steps) as f64 * 0.5,
                rng.random_range(1..=dim_steps) as f64 * 0.5,
                rng.random_range(1..=dim_steps) as f64 * 0.5,
                rng.random_range(0..=vel_steps) as f64 * 0.25,
            )
        })
        .collect()
}

type Criterion = (&'static str, fn() -> Verdict);

fn c1_split_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..=200);
        // small grids force many ties; velocities span four orders of magnitude
        let steps = rng.random_range(3..=60);
        let items: Vec<_> = (0..n)
            .map(|_| {
                let scale = [0.25, 1.0, 4.0, 64.0][rng.random_range(0..4)];
                (
                    rng.random_range(1..=steps) as f64 * 0.5,
                    rng.random_range(1..=steps) as f64 * 0.5,
                    rng.random_range(1..=steps) as f64 * 0.5,
                    rng.random_range(0..=40) as f64 * scale,
                )
            })
            .collect();
        let cat = catalog(&items);
        let c = Cluster::new(&cat, (0..n).collect()).unwrap();
        let fast = best_split(&c, &cat);
        let slow = exhaustive_split(&c, &cat).unwrap();
        let same = match (&fast, &slow) {
            (None, None) => true,
            (Some(a), Some(b)) => a.gain == b.gain && a.axis == b.axis && a.cut == b.cut && a.left == b.left,
            _ => false,
        };
        if !same {
            mismatches += 1;
        }
    }

    let time_for = |n: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let items: Vec<_> = (0..n)
            .map(|_| (rng.random_range(1.0..100.0), rng.random_range(1.0..100.0), rng.random_range(1.0..100.0), rng.random_range(0.0..10.0)))
            .collect();
        let cat = catalog(&items);
        let c = Cluster::new(&cat, (0..n).collect()).unwrap();
        (0..7)
            .map(|_| {
                let t = Instant::now();
                std::hint::black_box(best_split(&c, &cat));
                t.elapsed()
            })
            .min()
            .unwrap()
    };
    let t1 = time_for(10_000);
    let t2 = time_for(20_000);
    let ratio = t2.as_secs_f64() / t1.as_secs_f64();
    verdict(
        mismatches == 0 && ratio < 2.4,
        format!("{mismatches}/200 oracle mismatches; sweep time 1e4 -> 2e4 ratio {ratio:.2} ({t1:?} -> {t2:?})"),
    )
}

fn c2_global_bound() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut below, mut within) = (0, 0);
    let mut gaps = Vec::with_capacity(100);
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let cat = catalog(&random_items(&mut rng, n, 30, 16));
        let (opt, _) = exhaustive_partition(&cat, 2).unwrap();
        let v = solve(&cat, &SolverConfig::new(2, 4, 50)).unwrap().solution.total_volume();
        if v < opt {
            below += 1;
        }
        if v <= 1.25 * opt {
            within += 1;
        }
        gaps.push(if opt > 0.0 { v / opt - 1.0 } else { 0.0 });
    }
    gaps.sort_by(f64::total_cmp);
    let exact = gaps.iter().filter(|&&g| g == 0.0).count();
    verdict(
        below == 0 && within >= 90,
        format!(
            "V >= V* on {}/100, V <= 1.25 V* on {within}/100; gap: {exact} exact, median {:.3}, p90 {:.3}, max {:.3}",
            100 - below,
            gaps[49],
            gaps[89],
            gaps[99]
        ),
    )
}

fn c3_dp_exact() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=12);
        let k = rng.random_range(1..=4.min(n));
        let cat = catalog(&random_items(&mut rng, n, 40, 40));
        if dp_1d(&cat, k).unwrap().v_tilde != exhaustive_1d(&cat, k).unwrap() {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("{mismatches}/500 mismatches"))
}

/// Index of the first record whose volume rose over its predecessor, merges excepted.
fn log_violation(log: &[StageRecord]) -> Option<usize> {
    log.windows(2).position(|w| w[1].stage != Stage::Merge && w[1].total_volume > w[0].total_volume)
}

fn c4_monotone() -> Verdict {
    let mut runs = 0;
    let mut bad_logs = Vec::new();
    let mut bad_ladders = Vec::new();
    let mut check = |name: String, cat: &Catalog, k: usize, k_tilde: usize| {
        let out = solve(cat, &SolverConfig::new(k, k_tilde, 50)).unwrap();
        runs += 1;
        if let Some(i) = log_violation(&out.log) {
            bad_logs.push(format!("{name}@{i}"));
        }
        let vs: Vec<(usize, f64)> = out.ladder.iter().map(|(k, s)| (k, s.total_volume())).collect();
        if let Some(w) = vs.windows(2).find(|w| w[1].1 > w[0].1) {
            bad_ladders.push(format!("{name} K={}->{}", w[0].0, w[1].0));
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for i in 0..200 {
        let n = rng.random_range(2..=60);
        let items = random_items(&mut rng, n, 40, 20);
        let k_tilde = rng.random_range(1..=12);
        let k = rng.random_range(1..=k_tilde);
        check(format!("random#{i}"), &catalog(&items), k, k_tilde);
    }
    for seed in 0..3 {
        let s = synth::gen_synthetic(2000, seed, Profile::Skewed, 20_000.0);
        check(format!("synthetic#{seed}"), &s.catalog, 10, 40);
    }
    let s = synth::gen_synthetic(5000, 7, Profile::Skewed, 50_000.0);
    check("fixture".into(), &s.catalog, 12, 60);
    verdict(
        bad_logs.is_empty() && bad_ladders.is_empty(),
        format!(
            "{runs} runs; stage-log increases: {}; ladder increases: {}",
            if bad_logs.is_empty() { "none".into() } else { bad_logs.join(", ") },
            if bad_ladders.is_empty() { "none".into() } else { bad_ladders.join(", ") }
        ),
    )
}

/// Write the fixed ablation fixture to `dir`.
fn write_fixture(dir: &Path, s: &synth::Synthetic) {
    write_catalog(std::fs::File::create(dir.join("catalog.csv")).unwrap(), &s.catalog).unwrap();
    write_shipments(std::fs::File::create(dir.join("validation.csv")).unwrap(), &s.validation).unwrap();
    write_shipments(std::fs::File::create(dir.join("test.csv")).unwrap(), &s.test).unwrap();
}

fn cli(args: &[&str]) -> Output {
    let mut full = vec!["boxsize"];
    full.extend_from_slice(args);
    let parsed = Cli::try_parse_from(full).expect("valid arguments");
    run(&parsed.command).expect("command succeeds")
}

fn c5_ablation() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let s = synth::gen_synthetic(5000, 7, Profile::Skewed, 50_000.0);
    write_fixture(dir.path(), &s);
    let p = |f: &str| dir.path().join(f).display().to_string();
    let (cat, val, test) = (p("catalog.csv"), p("validation.csv"), p("test.csv"));
    let out = cli(&[
        "compare", "--train", &cat, "--test", &test, "--validation", &val, "--k-min", "12", "--k-max", "20",
        "--candidates", "20,24,28,32,36,40,44,48,52,56,60",
    ]);
    let report = out.report.unwrap();
    let curves = report.comparison.unwrap();
    let xi = |m: &str| -> Vec<f64> {
        curves.iter().find(|c| c.method == m).unwrap().points.iter().map(|p| p.xi).collect()
    };
    let full = xi("full");
    let wins = |other: &[f64]| full.iter().zip(other).filter(|(f, o)| f <= o).count();
    let (nr, bl, fo) = (wins(&xi("no-reassign")), wins(&xi("baseline")), wins(&xi("forward-only")));
    let deficits: Vec<String> = full
        .iter()
        .zip(xi("no-reassign"))
        .enumerate()
        .filter(|(_, (f, o))| *f > o)
        .map(|(i, (f, o))| format!("K={} +{:.2}pp", 12 + i, f - o))
        .collect();
    verdict(
        full.len() == 9 && nr == 9 && bl == 9 && fo >= 7,
        format!(
            "full <= no-reassign on {nr}/9{}, <= baseline on {bl}/9, <= forward-only on {fo}/9",
            if deficits.is_empty() { String::new() } else { format!(" (behind at {})", deficits.join(", ")) }
        ),
    )
}

fn c6_endpoints() -> Verdict {
    let mut failures = Vec::new();
    // one box of (2,2,2) for one (1,1,1) shipment
    let cat = catalog(&[(1., 1., 1., 1.)]);
    let r = evaluate(&[Dims::new(2., 2., 2.).unwrap()], &[ShipmentRecord::new("p0000", 1)], &cat).unwrap();
    if (r.product_volume, r.box_volume, r.xi) != (1.0, 8.0, 87.5) {
        failures.push(format!("hand check gave xi={}", r.xi));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut catalogs = Vec::new();
    for _ in 0..30 {
        let n = rng.random_range(1..=40);
        // coarse grid so duplicate dims are common
        let items: Vec<_> = (0..n)
            .map(|_| (rng.random_range(1..=4) as f64, rng.random_range(1..=4) as f64, rng.random_range(1..=3) as f64, rng.random_range(1..=8) as f64 * 0.25))
            .collect();
        catalogs.push(catalog(&items));
    }
    catalogs.push(synth::gen_synthetic(300, 6, Profile::Uniform, 3000.0).catalog);
    for (i, cat) in catalogs.iter().enumerate() {
        let k = cat.distinct_dims();
        let out = solve(cat, &SolverConfig::new(k, k, 50)).unwrap();
        match evaluate_velocity(&out.boxes, cat, EvalOptions::default()) {
            Ok(r) if r.xi == 0.0 => {}
            Ok(r) => failures.push(format!("catalog {i}: training xi {} at K={k}", r.xi)),
            Err(boxsize::Error::NoFittedShipments) => {}
            Err(e) => failures.push(format!("catalog {i}: {e}")),
        }
        for kk in 1..=k.min(6) {
            let out = solve(cat, &SolverConfig::new(kk, (2 * kk).max(k.min(12)), 50)).unwrap();
            if let Ok(r) = evaluate_velocity(&out.boxes, cat, EvalOptions::default()) {
                if !(0.0..100.0).contains(&r.xi) {
                    failures.push(format!("catalog {i}: xi {} out of range", r.xi));
                }
            }
        }
    }
    verdict(failures.is_empty(), if failures.is_empty() { format!("87.5 hand check exact; xi = 0 at K = distinct triples on {} catalogs; xi in [0,100)", catalogs.len()) } else { failures.join("; ") })
}

fn c7_scaling() -> Verdict {
    let u = synth::universe(100_000, 77, Profile::Skewed);
    let cat = synth::catalog_for(&u, synth::STREAM_TRAIN, 1_000_000.0);
    let t = Instant::now();
    let out = solve(&cat, &SolverConfig::new(20, 60, 50)).unwrap();
    let el = t.elapsed();
    verdict(
        el < Duration::from_secs(300) && out.boxes.len() == 20,
        format!("N=100000 K=20 K~=60 T_max=50 solved in {el:.2?} with {} boxes", out.boxes.len()),
    )
}

fn c8_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = |f: &str| dir.path().join(f).display().to_string();
    let gen_a = d("a");
    let gen_b = d("b");
    let _ = cli(&["gen", "--n", "400", "--shipments", "4000", "--seed", "5", "--out", &gen_a]).write();
    let _ = cli(&["gen", "--n", "400", "--shipments", "4000", "--seed", "5", "--out", &gen_b]).write();
    let mut diffs = Vec::new();
    for f in ["catalog.csv", "validation.csv", "test.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        if a != b {
            diffs.push(format!("gen {f}"));
        }
    }
    let cat = d("a/catalog.csv");
    let val = d("a/validation.csv");
    let test = d("a/test.csv");
    let boxes = d("boxes.json");
    cli(&["optimize", "--catalog", &cat, "--k", "5", "--k-tilde", "12", "--out", &boxes]).write().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["optimize", "--catalog", &cat, "--k", "6", "--k-tilde", "15", "--shipments", &test],
        vec!["optimize", "--catalog", &cat, "--k", "6", "--forward-only", "--no-refine", "--canonicalize-dims"],
        vec!["evaluate", "--boxes", &boxes, "--shipments", &test, "--catalog", &cat],
        vec!["tune", "--train", &cat, "--validation", &val, "--k", "4", "--k-max", "6", "--candidates", "6,9,12"],
        vec!["sweep", "--train", &cat, "--test", &test, "--k-min", "3", "--k-max", "8"],
        vec!["compare", "--train", &cat, "--test", &test, "--k-min", "3", "--k-max", "6", "--k-tilde", "15"],
        vec!["baseline", "--catalog", &cat, "--k", "5", "--shipments", &test],
    ];
    for args in &commands {
        let a = cli(args).report.unwrap().to_json();
        let b = cli(args).report.unwrap().to_json();
        if a != b {
            diffs.push(args[0].to_string());
        }
    }
    verdict(diffs.is_empty(), if diffs.is_empty() { format!("gen plus {} command runs byte-identical", commands.len()) } else { format!("differs: {}", diffs.join(", ")) })
}

fn c9_incremental() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (mut differ, mut total_moves) = (0, 0);
    for _ in 0..100 {
        let n = rng.random_range(2..=50);
        let c = rng.random_range(2..=6.min(n));
        let cat = catalog(&random_items(&mut rng, n, 30, 20));
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        labels[..c].iter_mut().enumerate().for_each(|(i, l)| *l = i);
        let s = Solution::from_labels(&cat, &labels).unwrap();
        let a = iterative_refinement_with(&s, &cat, 1000, Rescoring::Incremental).unwrap();
        let b = iterative_refinement_with(&s, &cat, 1000, Rescoring::Full).unwrap();
        total_moves += a.moves.len();
        if a.moves != b.moves || a.solution != b.solution {
            differ += 1;
        }
    }
    verdict(differ == 0, format!("{differ}/100 instances differ ({total_moves} moves compared)"))
}

fn c10_sensitivity() -> Verdict {
    let u = synth::universe(5000, 7, Profile::Skewed);
    let test = synth::shipments_for(&u, synth::STREAM_TEST, 50_000.0);
    let mut xis = Vec::new();
    for i in 0..3 {
        let train = synth::catalog_for(&u, synth::STREAM_EXTRA_TRAIN + i, 50_000.0);
        let out = solve(&train, &SolverConfig::new(14, 42, 50)).unwrap();
        xis.push(evaluate(&out.boxes, &test, &train).unwrap().xi);
    }
    let spread = xis.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xis.iter().cloned().fold(f64::INFINITY, f64::min);
    verdict(spread < 2.0, format!("test xi {:.2} / {:.2} / {:.2}, max pairwise gap {spread:.2}pp", xis[0], xis[1], xis[2]))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 split oracle equivalence and sweep scaling", c1_split_oracle),
        ("2 global oracle bound", c2_global_bound),
        ("3 DP exactness", c3_dp_exact),
        ("4 monotone stage log and ladder", c4_monotone),
        ("5 ablation dominance", c5_ablation),
        ("6 air-in-box endpoint identities", c6_endpoints),
        ("7 scaling at N=100000", c7_scaling),
        ("8 determinism", c8_determinism),
        ("9 incremental refinement equivalence", c9_incremental),
        ("10 training-set sensitivity", c10_sensitivity),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !v.pass {
            failed += 1;
        }
        println!("{} criterion {name}: {} [{:.1?}]", if v.pass { "PASS" } else { "FAIL" }, v.detail, t.elapsed());
    }
    println!("acceptance: {}/10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
