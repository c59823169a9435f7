//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every criterion uses a fixed seed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use itertools::Itertools;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;

use elliott_core::cuntz::{
    dim_function, dimension_drop_model, dimension_drop_unit, k1_trivial, nccw_check, DimMeasure, ExtNat, LscStep,
};
use elliott_core::intlinalg::{cokernel, kernel_rank, FGAbelianGroup, IntMatrix};
use elliott_core::ktheory::{k_dimension_drop, k_toeplitz};
use elliott_core::rng::stream;
use elliott_core::sampler::{estimate_prob_jiang_su, estimate_sup_histogram};
use elliott_core::simplex::{draw_collapse, face_top, BarycentricVector, MeasureScheme, BARYCENTRIC_TOL};
use elliott_core::stats::binomial_se;
use elliott_core::transport::weyl::{weyl_table, PairKind};
use elliott_core::transport::{sorted_matching_distance, wasserstein_inf, ComplexPlane, DiscreteMeasure};
use elliott_core::walk::{hit_zero_probability, sup_distribution, Barrier, WalkParams};

const SEED: u64 = 1;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Smallest over all bijections of the largest matched cost.
fn brute_bottleneck(n: usize, cost: impl Fn(usize, usize) -> f64) -> f64 {
    (0..n)
        .permutations(n)
        .map(|perm| perm.iter().enumerate().map(|(i, &j)| cost(i, j)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

fn weyl_criterion(kind: PairKind, sizes: &[usize], trials: u64, bound: f64) -> Outcome {
    let mut worst = 0.0f64;
    let mut non_converged = 0;
    for &n in sizes {
        let rows = weyl_table(kind, n, trials, SEED, 1e-8).map_err(|e| e.to_string())?;
        worst = rows.iter().fold(worst, |m, r| m.max(r.gap.abs()));
        non_converged += rows.iter().filter(|r| !r.converged).count();
    }
    check(
        worst <= bound,
        format!("{} pairs, max |d_U - delta| = {worst:.3e} (bound {bound:e}), non-converged {non_converged}", trials as usize * sizes.len()),
    )
}

fn c1() -> Outcome {
    weyl_criterion(PairKind::Hermitian, &[2, 3, 4, 5, 6], 200, 1e-6)
}

fn c2() -> Outcome {
    let mut rng = stream(SEED ^ 2);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let draw = |rng: &mut elliott_core::rng::StreamRng| -> Vec<f64> {
            // Small integer grid so ties and repeated values occur.
            (0..n).map(|_| if rng.random_bool(0.3) { rng.random_range(-3..=3) as f64 } else { rng.random_range(-5.0..5.0) }).collect()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let sorted = sorted_matching_distance(&a, &b).map_err(|e| e.to_string())?;
        if sorted != brute_bottleneck(n, |i, j| (a[i] - b[j]).abs()) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("500 cases, {mismatches} mismatches"))
}

fn c3() -> Outcome {
    weyl_criterion(PairKind::Unitary, &[2, 3, 4], 100, 1e-5)
}

fn c4() -> Outcome {
    let mut rng = stream(SEED ^ 4);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let draw = |rng: &mut elliott_core::rng::StreamRng| -> Vec<Complex64> {
            (0..n).map(|_| Complex64::new(rng.random_range(-2..=2) as f64, rng.random_range(-2.0..2.0))).collect()
        };
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let mu = DiscreteMeasure::uniform(x.clone()).map_err(|e| e.to_string())?;
        let nu = DiscreteMeasure::uniform(y.clone()).map_err(|e| e.to_string())?;
        let w = wasserstein_inf(&mu, &nu, &ComplexPlane).map_err(|e| e.to_string())?;
        if w != brute_bottleneck(n, |i, j| (x[i] - y[j]).norm()) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("500 cases, {mismatches} mismatches"))
}

fn c5() -> Outcome {
    let recurrent = WalkParams::from_start(0.4, Barrier::Reflecting, 0).map_err(|e| e.to_string())?;
    let r = estimate_prob_jiang_su(&recurrent, 10_000, 10_000, SEED).map_err(|e| e.to_string())?;
    let transient = WalkParams::from_start(0.6, Barrier::Reflecting, 1).map_err(|e| e.to_string())?;
    let t = estimate_prob_jiang_su(&transient, 10_000, 10_000, SEED).map_err(|e| e.to_string())?;
    let oracle = hit_zero_probability(&transient, 1);
    check(
        r.estimate >= 0.999 && t.ci.contains(oracle),
        format!(
            "p=0.4: {:.5}; p=0.6 from 1: {:.5} CI [{:.5}, {:.5}] vs oracle {oracle:.5}",
            r.estimate, t.estimate, t.ci.lo, t.ci.hi
        ),
    )
}

fn c6() -> Outcome {
    let params = WalkParams::from_start(0.5, Barrier::Absorbing, 1).map_err(|e| e.to_string())?;
    let trials = 100_000;
    let h = estimate_sup_histogram(&params, 10, trials, 10_000_000, SEED).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for k in 1..=10u64 {
        let oracle = sup_distribution(&params, k).map_err(|e| e.to_string())?;
        let exact = k as f64 / (k + 1) as f64;
        if (oracle - exact).abs() > 1e-9 {
            return Err(format!("linear solve gives {oracle} for k={k}, expected {exact}"));
        }
        worst = worst.max((h.cdf(k) - oracle).abs() / binomial_se(oracle, trials));
    }
    check(
        worst <= 3.0 && h.censored == 0,
        format!("k=1..10, worst deviation {worst:.2} SE, censored {}", h.censored),
    )
}

fn c7() -> Outcome {
    let draws = 10_000u64;
    let mut rng = stream(SEED ^ 7);
    for i in 0..draws {
        let n = 1 + (i % 6) as usize;
        let v = draw_collapse(MeasureScheme::BarycenterPointMass, n, i, &mut rng);
        if v != BarycentricVector::barycenter(n - 1) {
            return Err(format!("scheme I draw {i} is not the barycentre"));
        }
        let v = draw_collapse(MeasureScheme::UniformVertices, n, i, &mut rng);
        if !(0..n).any(|j| v == BarycentricVector::vertex(n - 1, j)) {
            return Err(format!("scheme II draw {i} is not a vertex"));
        }
    }
    let n = 3;
    let mut sums = vec![vec![0.0; n]; n];
    let mut counts = vec![0u64; n];
    for visit in 0..draws {
        let v = draw_collapse(MeasureScheme::LebesgueFaces, n, visit, &mut rng);
        let top = face_top(n, visit);
        let valid = BarycentricVector::new(v.coords().to_vec()).is_ok()
            && v.coords()[top + 1..].iter().all(|&c| c == 0.0)
            && (v.coords().iter().sum::<f64>() - 1.0).abs() <= BARYCENTRIC_TOL;
        if !valid {
            return Err(format!("scheme III draw {visit} is not a point of its face"));
        }
        counts[top] += 1;
        for (s, c) in sums[top].iter_mut().zip(v.coords()) {
            *s += c;
        }
    }
    let mut worst = 0.0f64;
    for top in 0..n {
        let mean: Vec<f64> = sums[top].iter().map(|s| s / counts[top] as f64).collect();
        let mut target = BarycentricVector::barycenter(top).coords().to_vec();
        target.resize(n, 0.0);
        let dev = mean.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    check(worst <= 0.01, format!("{draws} draws per scheme; face means within {worst:.4} of face barycentres"))
}

fn c8() -> Outcome {
    let (k0, k1) = k_toeplitz();
    if (k0.clone(), k1.clone()) != (FGAbelianGroup::free(1), FGAbelianGroup::zero()) {
        return Err(format!("Toeplitz: ({k0}, {k1})"));
    }
    let mut checked = 0;
    for p in 1..=20u64 {
        for q in 1..=20u64 {
            let (k0, k1) = k_dimension_drop(p, q).map_err(|e| e.to_string())?;
            // Boundary map of the end-point evaluation: (x, y) -> q x - p y.
            let boundary = IntMatrix::from_rows(&[vec![q as i64, -(p as i64)]]);
            let oracle = (FGAbelianGroup::free(kernel_rank(&boundary)), cokernel(&boundary));
            if (k0.clone(), k1.clone()) != oracle {
                return Err(format!("({p}, {q}): ({k0}, {k1}) vs oracle ({}, {})", oracle.0, oracle.1));
            }
            if num_integer_gcd(p, q) == 1 && (k0.clone(), k1.clone()) != (FGAbelianGroup::free(1), FGAbelianGroup::zero()) {
                return Err(format!("coprime ({p}, {q}) gives ({k0}, {k1})"));
            }
            checked += 1;
        }
    }
    let (k0, k1) = k_dimension_drop(2, 4).map_err(|e| e.to_string())?;
    check(
        k0 == FGAbelianGroup::free(1) && k1 == FGAbelianGroup::cyclic(2),
        format!("Toeplitz (Z, 0); {checked} pairs match the Smith-form oracle; (2,4) gives ({k0}, {k1})"),
    )
}

fn num_integer_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Flood fill of the image lattice from 0 by steps of ±columns. By the
/// Steinitz lemma every `e_i` in the image is reached by a path whose partial
/// sums stay in the sup-norm ball of radius `m * max|d| + 1`.
fn brute_surjective(d: &[Vec<i64>], n: usize) -> bool {
    let m = d.len();
    let c = d.iter().flatten().map(|x| x.abs()).max().unwrap_or(0).max(1);
    let radius = m as i64 * c + 1;
    let steps: Vec<Vec<i64>> = (0..n)
        .flat_map(|j| {
            let col: Vec<i64> = d.iter().map(|row| row[j]).collect();
            [col.clone(), col.iter().map(|x| -x).collect()]
        })
        .collect();
    let mut seen = std::collections::HashSet::from([vec![0i64; m]]);
    let mut queue = std::collections::VecDeque::from([vec![0i64; m]]);
    while let Some(y) = queue.pop_front() {
        for s in &steps {
            let z: Vec<i64> = y.iter().zip(s).map(|(a, b)| a + b).collect();
            if z.iter().all(|x| x.abs() <= radius) && seen.insert(z.clone()) {
                queue.push_back(z);
            }
        }
    }
    (0..m).all(|i| seen.contains(&(0..m).map(|j| i64::from(i == j)).collect::<Vec<_>>()))
}

fn c9() -> Outcome {
    for p in 1..=20u64 {
        for q in 1..=20u64 {
            let (m0, m1) = dimension_drop_model(p, q);
            if k1_trivial(&m0, &m1).map_err(|e| e.to_string())? != (num_integer_gcd(p, q) == 1) {
                return Err(format!("k1_trivial wrong at ({p}, {q})"));
            }
        }
    }
    let mut rng = stream(SEED ^ 9);
    let shapes = 300;
    for _ in 0..shapes {
        let (m, n) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let a: Vec<i64> = (0..m * n).map(|_| rng.random_range(0..=5)).collect();
        let b: Vec<i64> = (0..m * n).map(|_| rng.random_range(0..=5)).collect();
        let d: Vec<Vec<i64>> = (0..m).map(|i| (0..n).map(|j| a[i * n + j] - b[i * n + j]).collect()).collect();
        let m0 = IntMatrix::from_i64(m, n, &a).map_err(|e| e.to_string())?;
        let m1 = IntMatrix::from_i64(m, n, &b).map_err(|e| e.to_string())?;
        if k1_trivial(&m0, &m1).map_err(|e| e.to_string())? != brute_surjective(&d, n) {
            return Err(format!("k1_trivial disagrees with brute force on {d:?}"));
        }
    }
    for p in 1..=10u64 {
        for q in 1..=10u64 {
            if num_integer_gcd(p, q) == 1 && !nccw_check(&dimension_drop_unit(p, q)).map_err(|e| e.to_string())? {
                return Err(format!("unit of Z_({p},{q}) rejected"));
            }
        }
    }
    let half = BigRational::new(1.into(), 2.into());
    let f = LscStep::open_indicator(BigRational::from_integer(0.into()), half.clone(), ExtNat::Fin(1)).map_err(|e| e.to_string())?;
    let d = dim_function(&f, &DimMeasure::Lebesgue);
    check(d == half, format!("coprime grid, {shapes} brute-force shapes, unit checks; d(1_(0,1/2)) = {d}"))
}

fn run_cli(bin: &Path, args: &[&str], output: &Path) -> Result<String, String> {
    let status = Command::new(bin)
        .args(args)
        .arg("--output")
        .arg(output)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("{args:?} exited with {status}"));
    }
    let text = std::fs::read_to_string(output).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.starts_with("# generated_at_unix=") => Ok(lines.join("\n")),
        other => Err(format!("{args:?}: missing timestamp header, got {other:?}")),
    }
}

fn c10() -> Outcome {
    let bin = Path::new(env!("CARGO_BIN_EXE_elliott"));
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 7] = [
        &["sample", "--p", "0.4", "--scheme", "barycenter", "--trials", "1000", "--seed", "7"],
        &["sample", "--p", "0.5", "--barrier", "absorbing", "--start", "1", "--trials", "500", "--horizon", "100000", "--seed", "7"],
        &["weyl", "--n", "4", "--trials", "200", "--seed", "1", "--format", "csv"],
        &["walk", "--p", "0.6", "--start", "1", "--trials", "500", "--seed", "3"],
        &["simplex", "--p", "0.6", "--scheme", "faces", "--trials", "20", "--horizon", "100", "--seed", "5"],
        &["cuntz", "--max", "10"],
        &["ktheory", "--max", "10"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let out = dir.path().join(format!("report-{i}"));
        let first = run_cli(bin, args, &out)?;
        let second = run_cli(bin, args, &out)?;
        if first != second {
            return Err(format!("{args:?} differs between runs"));
        }
        if first.lines().count() < 2 {
            return Err(format!("{args:?} produced an empty report"));
        }
    }
    Ok(format!("{} CLI runs byte-identical after the timestamp line", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("weyl equality, hermitian pairs", c1),
        ("sorted matching attains the bottleneck", c2),
        ("unitary pairs", c3),
        ("W_inf equals bottleneck matching", c4),
        ("recurrence proxy", c5),
        ("absorbing dimension law", c6),
        ("measure scheme invariants", c7),
        ("K-theory reproductions", c8),
        ("Cuntz criteria", c9),
        ("CLI determinism", c10),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
