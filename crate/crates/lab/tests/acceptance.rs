//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use pesinlab::config::LabConfig;
use pesinlab::report::{Cell, ExperimentReport};
use pesinlab::{run_command, Command, RunOptions};
use pesinlab_core::cantor_skeleton::{cantor_total_measure, mu_k_cylinder};
use pesinlab_core::entropy::{
    atom_mass_decay, birkhoff_lyapunov, distortion_ratio, entropy_rate, lyapunov_integral, orbit_statistics, pesin_symbolic,
};
use pesinlab_core::map_builder::{build_doubling, build_example1, build_example2, build_reference_affine, build_torus, gap_image_check};
use pesinlab_core::measures::{mixture, product_measure, pushforward, weak_star_dist};
use pesinlab_core::{BowenParams, BowenSkeleton, Example1Spec, Example2Spec, Measure, ObservableFamily, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn floats(rep: &ExperimentReport, table: &str, column: &str) -> Vec<f64> {
    rep.table(table).map(|t| t.values(column).iter().filter_map(|c| c.as_f64()).collect()).unwrap_or_default()
}

fn cantor_mass() -> Outcome {
    let p = BowenParams::circle(0.25, 4.0, 41);
    let m = cantor_total_measure(&p).unwrap().value;
    // partial sum to 10^7 plus the integral-test tail bracket
    let terms = 10_000_000u64;
    let partial: f64 = (1..=terms).rev().map(|n| 1.0 / (4.0 * (n as f64) * (n as f64))).sum();
    let upper = 1.5 - partial - 1.0 / (4.0 * (terms + 1) as f64);
    let lower = 1.5 - partial - 1.0 / (4.0 * terms as f64);
    let oracle_err = (m - 0.5 * (lower + upper)).abs();
    let bracket_ok = m >= lower - 1e-12 && m <= upper + 1e-12;
    let skel = BowenSkeleton::build(&p).unwrap();
    let mut worst: f64 = 0.0;
    let mut alpha_sum = 0.0;
    for n in 1..=40 {
        if n >= 2 {
            alpha_sum += 1.0 / (4.0 * ((n - 1) * (n - 1)) as f64);
        }
        worst = worst.max((skel.atom_mass(n) - (1.5 - alpha_sum)).abs());
    }
    check(
        oracle_err <= 1e-9 && bracket_ok && worst <= 1e-12,
        format!("m(K) = {m:?}, |m - oracle| = {oracle_err:.2e}, 1.5 - pi^2/24 = {:?}, max m(A_n) residual n<=40 = {worst:.2e}", 1.5 - PI * PI / 24.0),
    )
}

fn cylinders() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut bad = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=20usize);
        let bits = rng.random::<u64>() >> (64 - n);
        if mu_k_cylinder(&Word::new(bits, n).unwrap()) != 1.0 / (1u64 << n) as f64 {
            bad += 1;
        }
    }
    check(bad == 0, format!("{bad} of 10000 random words (n <= 20) differ from 2^-n"))
}

fn symbolic_pesin() -> Outcome {
    let e1 = build_example1(&Example1Spec::default()).unwrap();
    let mu = Measure::mu_k(&e1.carriers[0], 24).unwrap();
    let r = pesin_symbolic(&e1, &mu, 12).unwrap();
    let ly = lyapunov_integral(&e1.map, &mu).unwrap().value;
    let ok1 = r.h_final == LN_2 && ly == LN_2 && r.defect <= 1e-9;
    let t = build_torus(e1, build_example2(&Example2Spec::default()).unwrap()).unwrap();
    let mut ok2 = true;
    let mut detail = format!("example1: h = {:?}, lyap = {ly:?}, defect = {:?}", r.h_final, r.defect);
    for p in &t.products {
        let mu = product_measure(Measure::mu_k(&p.left, 12).unwrap(), Measure::mu_k(&p.right, 12).unwrap()).unwrap();
        let r = pesin_symbolic(&t, &mu, 6).unwrap();
        ok2 &= r.h_final == 4f64.ln() && r.lyap == 2.0 * LN_2 && r.defect.abs() <= 1e-9;
        detail += &format!("; {}: h = {:?}, lyap = {:?}, defect = {:?}", p.label, r.h_final, r.lyap, r.defect);
    }
    check(ok1 && ok2, detail)
}

fn ruelle_matrix() -> Outcome {
    let maps = [
        r#"{"map":{"kind":"doubling"}}"#,
        r#"{"map":{"kind":"example1"}}"#,
        r#"{"map":{"kind":"example2"}}"#,
        r#"{"map":{"kind":"torus"},"torus":{"left":{"kind":"example1"},"right":{"kind":"example2"}}}"#,
    ];
    let mut rows = 0;
    let mut failures = Vec::new();
    let mut worst = (f64::INFINITY, String::new());
    for m in maps {
        let mut cfg = LabConfig::from_json(m).unwrap();
        let sys = pesinlab::setup::build_system(&cfg).unwrap();
        // Lebesgue, every μ_K variant, and δ at a fixed point
        let mut specs = pesinlab::setup::default_measures(&sys);
        specs.push(pesinlab::config::MeasureSpec::kind("dirac"));
        cfg.measures = specs;
        let rep = run_command(Command::PesinCheck, &cfg, &RunOptions { seed: 42, workers: workers() }).unwrap();
        let t = rep.table("pesin").unwrap();
        let (im, idf, iname) = (t.column("method").unwrap(), t.column("defect").unwrap(), t.column("measure").unwrap());
        for row in &t.rows {
            rows += 1;
            let defect = row[idf].as_f64().unwrap();
            let tol = if row[im] == Cell::Str("empirical".into()) { 0.02 } else { 1e-9 };
            let measure = match &row[iname] {
                Cell::Str(s) => s.as_str(),
                _ => "?",
            };
            let label = format!("{}/{measure}", rep.inputs["map"]["kind"].as_str().unwrap_or("?"));
            if defect + tol < worst.0 {
                worst = (defect + tol, label.clone());
            }
            if defect.is_nan() || defect < -tol {
                failures.push(format!("{label}: {defect:?}"));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{rows} reports, smallest margin defect + tol = {:.4} at {}; failures: {failures:?}", worst.0, worst.1),
    )
}

fn doubling_entropy() -> Outcome {
    let sys = build_doubling();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let stats = orbit_statistics(&sys.map, &[0.123456789], 1_000_000, 12, 1e-12, &mut rng).unwrap();
    let h = entropy_rate(&stats.tables(), true).h_final;
    let birkhoff = stats.birkhoff_mean();
    let exact = birkhoff_lyapunov(&sys.map, &[0.3], 1000);
    check(
        (h - LN_2).abs() <= 0.05 && (birkhoff - LN_2).abs() <= 1e-12 && (exact - LN_2).abs() <= 1e-12,
        format!("h = {h:?} (|h - log 2| = {:.4}), Birkhoff Lyapunov = {birkhoff:?}", (h - LN_2).abs()),
    )
}

fn c1_validation() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (sys, deg) in [(build_example1(&Example1Spec::default()).unwrap(), 3), (build_example2(&Example2Spec::default()).unwrap(), 4)] {
        match sys.map.as_circle().unwrap().validate(1e-9) {
            Ok(v) => {
                ok &= v.c0_residual <= 1e-9 && v.c1_residual <= 1e-9 && (v.lambda - 2.0).abs() <= 1e-12 && v.degree == deg;
                detail.push(format!(
                    "{}: c0 {:.1e}, c1 {:.1e}, lambda {:?}, degree {}",
                    sys.name(),
                    v.c0_residual,
                    v.c1_residual,
                    v.lambda,
                    v.degree
                ));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("{}: {e}", sys.name()));
            }
        }
    }
    check(ok, detail.join("; "))
}

fn gap_conjugacy() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for sys in [build_example1(&Example1Spec::default()).unwrap(), build_example2(&Example2Spec::default()).unwrap()] {
        match gap_image_check(&sys, 10, 1e-12) {
            Ok(r) => detail.push(format!(
                "{}: {} gaps, {} atoms, max residual {:.1e}",
                sys.name(),
                r.gaps_checked,
                r.atoms_checked,
                r.max_gap_residual.max(r.max_atom_residual)
            )),
            Err(e) => {
                ok = false;
                detail.push(format!("{}: {e}", sys.name()));
            }
        }
    }
    check(ok, detail.join("; "))
}

fn distortion() -> Outcome {
    let aff = build_reference_affine();
    let c = &aff.carriers[0];
    let ratios_one = (1..=12).all(|n| distortion_ratio(&aff, c, &Word::new(0, n).unwrap()).unwrap().ratio == 1.0);
    let masses = atom_mass_decay(&aff, c, 24).unwrap();
    // 2^{n+1} and 3^n are exact integers in binary64, one rounding in the quotient
    let masses_exact = masses.iter().enumerate().all(|(i, m)| {
        let n = i as u32 + 1;
        *m == (1u64 << (n + 1)) as f64 / 3u64.pow(n) as f64
    });
    let e1 = build_example1(&Example1Spec::default()).unwrap();
    let k = &e1.carriers[0];
    let r8 = distortion_ratio(&e1, k, &Word::new(0, 8).unwrap()).unwrap().ratio;
    let m1 = atom_mass_decay(&e1, k, 24).unwrap();
    let min_mass = m1.iter().copied().fold(f64::INFINITY, f64::min);
    check(
        ratios_one && masses_exact && r8 > 2.0 && min_mass >= 1.088,
        format!(
            "affine3: ratio 1 for n<=12: {ratios_one}, m(A_n) = 2(2/3)^n exact for n<=24: {masses_exact}; example1: ratio at n=8 = {r8:.4}, min m(A_n) n<=24 = {min_mass:?}"
        ),
    )
}

fn decay() -> Outcome {
    let cfg = LabConfig::from_json(
        r#"{"map":{"kind":"doubling"},
            "measures":[{"kind":"dirac","point":0.0,"name":"delta0"}],
            "experiment":{"target":"delta0","control":"lebesgue","epsilon_star":0.05,
                          "n_schedule":[4,6,8,10,12,14,16,18,20],"n_points":1000000},
            "rng":{"seed":42}}"#,
    )
    .unwrap();
    let rep = run_command(Command::DecayRate, &cfg, &RunOptions { seed: 42, workers: workers() }).unwrap();
    let fit = rep.table("fit").unwrap();
    let get = |c: &str| fit.values(c)[0].clone();
    let hits = floats(&rep, "fractions", "hits");
    let control = floats(&rep, "fractions", "control_fraction");
    let r2 = get("r_squared").as_f64().unwrap_or(f64::NAN);
    let rate = get("rate").as_f64().unwrap_or(f64::NAN);
    let decreasing = get("strictly_decreasing") == Cell::Bool(true);
    let no_decay = control.last() >= control.first();
    check(
        decreasing && r2 > 0.9 && rate > 0.0 && no_decay,
        format!(
            "hits {hits:?}, strictly decreasing {decreasing}, rate {rate:.4}, R^2 {r2:.4}, ceiling r/2 {:.4} (ratio {:?}); control fraction {:.4} -> {:.4}",
            get("ceiling").as_f64().unwrap(),
            get("ratio").as_f64(),
            control[0],
            control[control.len() - 1]
        ),
    )
}

fn random_empirical(rng: &mut ChaCha8Rng) -> Measure {
    let n = rng.random_range(1..40usize);
    let coords: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Measure::Empirical { dim: 1, coords, weights: raw.iter().map(|w| w / total).collect() }
}

fn metric_properties() -> Outcome {
    let e1 = build_example1(&Example1Spec::default()).unwrap();
    let fam = ObservableFamily::new(&e1.map);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let d = |a: &Measure, b: &Measure| weak_star_dist(a, b, &fam).unwrap().value;
    let mut sym_ok = true;
    let mut tri_worst: f64 = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (a, b, c) = (random_empirical(&mut rng), random_empirical(&mut rng), random_empirical(&mut rng));
        sym_ok &= d(&a, &b).to_bits() == d(&b, &a).to_bits();
        tri_worst = tri_worst.max(d(&a, &c) - d(&a, &b) - d(&b, &c));
    }
    let mut convex_ok = true;
    for _ in 0..100 {
        let (mu, n1, n2) = (random_empirical(&mut rng), random_empirical(&mut rng), random_empirical(&mut rng));
        let eps = d(&n1, &mu).max(d(&n2, &mu)) * (1.0 + 1e-9) + 1e-15;
        let lam: f64 = rng.random();
        let mix = mixture(&[(lam, &n1), (1.0 - lam, &n2)]).unwrap();
        convex_ok &= d(&mix, &mu) < eps;
    }
    let mut inv_worst: f64 = f64::NEG_INFINITY;
    let e2 = build_example2(&Example2Spec::default()).unwrap();
    let aff = build_reference_affine();
    for sys in [&e1, &e2, &aff] {
        let fam = ObservableFamily::new(&sys.map);
        for c in &sys.carriers {
            let mu = Measure::mu_k(c, 16).unwrap();
            let r = weak_star_dist(&pushforward(&sys.map, &mu).unwrap(), &mu, &fam).unwrap();
            inv_worst = inv_worst.max(r.value - r.tail_bound);
        }
    }
    check(
        sym_ok && tri_worst <= 1e-12 && convex_ok && inv_worst <= 1e-9,
        format!(
            "symmetry exact: {sym_ok}, max triangle excess {tri_worst:.1e}, convexity on 100 mixtures: {convex_ok}, max invariance residual - tail {inv_worst:.1e}"
        ),
    )
}

fn determinism() -> Outcome {
    let tmp = std::env::temp_dir().join(format!("pesinlab-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    let cfg = tmp.join("config.json");
    std::fs::write(
        &cfg,
        r#"{"map":{"kind":"example1"},
            "measures":[{"kind":"lebesgue"},{"kind":"mu_K","skeleton_label":"K"},{"kind":"dirac"}],
            "experiment":{"n_points":20000,"times":[10,100,1000],"n_schedule":[2,4,6,8],"n_orbits":8,"orbit_len":50000},
            "rng":{"seed":42}}"#,
    )
    .unwrap();
    let run = |cmd: &str, w: &str, out: &Path| {
        Process::new(env!("CARGO_BIN_EXE_pesinlab"))
            .args([cmd, "--config", cfg.to_str().unwrap(), "--workers", w, "--out", out.to_str().unwrap()])
            .env_remove("PESINLAB_SEED")
            .output()
            .unwrap()
            .status
            .code()
    };
    let mut mismatches = Vec::new();
    let mut n_files = 0;
    for cmd in ["validate", "cantor-report", "pesin-check", "basin-scan", "decay-rate", "distortion"] {
        let (a, b) = (tmp.join(format!("{cmd}-w1")), tmp.join(format!("{cmd}-w8")));
        let (ca, cb) = (run(cmd, "1", &a), run(cmd, "8", &b));
        if ca != cb || ca.is_none() {
            mismatches.push(format!("{cmd}: exit {ca:?} vs {cb:?}"));
            continue;
        }
        let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        let other = std::fs::read_dir(&b).map(|d| d.count()).unwrap_or(0);
        if names.len() != other {
            mismatches.push(format!("{cmd}: file count {} vs {other}", names.len()));
        }
        for f in names {
            n_files += 1;
            if std::fs::read(a.join(&f)).ok() != std::fs::read(b.join(&f)).ok() {
                mismatches.push(format!("{cmd}/{}", f.to_string_lossy()));
            }
        }
    }
    let _ = std::fs::remove_dir_all(&tmp);
    check(mismatches.is_empty() && n_files > 0, format!("{n_files} files compared between 1 and 8 workers; differences: {mismatches:?}"))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 cantor mass", Duration::from_secs(1), cantor_mass),
        ("2 mu_K cylinders", Duration::from_secs(1), cylinders),
        ("3 symbolic Pesin formula", Duration::from_secs(5), symbolic_pesin),
        ("4 Ruelle inequality matrix", Duration::from_secs(600), ruelle_matrix),
        ("5 doubling empirical entropy", Duration::from_secs(30), doubling_entropy),
        ("6 C1 validation", Duration::from_secs(1), c1_validation),
        ("7 gap conjugacy", Duration::from_secs(5), gap_conjugacy),
        ("8 distortion dichotomy", Duration::from_secs(5), distortion),
        ("9 decay rate", Duration::from_secs(180), decay),
        ("10 metric and measure properties", Duration::from_secs(60), metric_properties),
        ("11 determinism across workers", Duration::from_secs(600), determinism),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.2} s, budget {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
