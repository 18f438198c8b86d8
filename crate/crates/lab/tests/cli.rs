use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn pesinlab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pesinlab"));
    c.args(args).env_remove("PESINLAB_SEED");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn run_in(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    pesinlab(&args, &[])
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let ok = write_config(d, "ok.json", r#"{"map":{"kind":"example1"}}"#);
    assert_eq!(run_in("validate", &ok, &d.join("a"), &[]).status.code(), Some(0));

    let infeasible_k = write_config(d, "k.json", r#"{"map":{"kind":"example1","k":1}}"#);
    let out = run_in("cantor-report", &infeasible_k, &d.join("b"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum of alpha_n"));

    let inner = write_config(d, "b1.json", r#"{"map":{"kind":"example2","b1":0.19}}"#);
    assert_eq!(run_in("validate", &inner, &d.join("c"), &[]).status.code(), Some(2));

    let unknown = write_config(d, "u.json", r#"{"map":{"kind":"example1"},"colour":"red"}"#);
    assert_eq!(run_in("validate", &unknown, &d.join("d"), &[]).status.code(), Some(2));

    let label = write_config(d, "l.json", r#"{"map":{"kind":"example1"},"measures":[{"kind":"mu_K","skeleton_label":"K9"}]}"#);
    let out = run_in("pesin-check", &label, &d.join("e"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("K9"));

    let missing = d.join("nope.json");
    assert_eq!(run_in("validate", &missing, &d.join("f"), &[]).status.code(), Some(2));

    let garbage = write_config(d, "g.json", "{ not json");
    assert_eq!(run_in("validate", &garbage, &d.join("g"), &[]).status.code(), Some(2));

    // too few points for any hits near the point mass: the fit is impossible
    let tiny = write_config(
        d,
        "t.json",
        r#"{"map":{"kind":"doubling"},"experiment":{"n_points":50,"n_schedule":[10,12,14]}}"#,
    );
    let out = run_in("decay-rate", &tiny, &d.join("h"), &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(d.join("h/decay-rate-fit.csv").exists());

    let zero = write_config(d, "z.json", r#"{"map":{"kind":"doubling"},"workers":0}"#);
    assert_eq!(run_in("validate", &zero, &d.join("i"), &[]).status.code(), Some(2));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write_config(
        d,
        "c.json",
        r#"{
            "map": {"kind": "example1"},
            "measures": [
                {"kind": "lebesgue"},
                {"kind": "mu_K", "skeleton_label": "K", "depth": 12},
                {"kind": "empirical", "x0": 0.3, "n": 500, "name": "orbit"}
            ],
            "experiment": {"n_points": 600, "times": [10, 100], "n_schedule": [2, 4, 6], "orbit_len": 20000, "n_orbits": 5},
            "rng": {"seed": 7}
        }"#,
    );
    for cmd in ["basin-scan", "pesin-check", "decay-rate", "cantor-report", "distortion", "validate"] {
        let a = d.join(format!("{cmd}-1"));
        let b = d.join(format!("{cmd}-8"));
        let ra = run_in(cmd, &cfg, &a, &["--workers", "1"]);
        let rb = run_in(cmd, &cfg, &b, &["--workers", "8"]);
        assert_eq!(ra.status.code(), rb.status.code(), "{cmd}");
        let (fa, fb) = (files(&a), files(&b));
        assert!(!fa.is_empty(), "{cmd} wrote nothing");
        assert_eq!(fa, fb, "{cmd}");
    }
}

#[test]
fn seed_precedence_and_formats() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write_config(
        d,
        "c.json",
        r#"{"map":{"kind":"doubling"},"experiment":{"n_points":300,"times":[50]},"rng":{"seed":1}}"#,
    );
    let c = cfg.to_str().unwrap();
    let run = |out: &str, extra: &[&str], env: &[(&str, &str)]| {
        let o = d.join(out);
        let mut args = vec!["basin-scan", "--config", c, "--out", o.to_str().unwrap(), "--format", "json"];
        args.extend_from_slice(extra);
        assert_eq!(pesinlab(&args, env).status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(o.join("basin-scan.json")).unwrap()).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(run("cfg", &[], &[]), 1);
    assert_eq!(run("env", &[], &[("PESINLAB_SEED", "5")]), 5);
    assert_eq!(run("cli", &["--seed", "9"], &[("PESINLAB_SEED", "5")]), 9);
    assert!(!d.join("cfg/basin-scan.csv").exists());

    // different seeds give different numbers under the same schema
    let a = std::fs::read_to_string(d.join("env/basin-scan.json")).unwrap();
    let b = std::fs::read_to_string(d.join("cli/basin-scan.json")).unwrap();
    assert_ne!(a, b);

    let bad = pesinlab(&["validate", "--config", c, "--out", d.join("x").to_str().unwrap()], &[("PESINLAB_SEED", "abc")]);
    assert_eq!(bad.status.code(), Some(2));

    let csv = d.join("csv");
    let out = pesinlab(&["cantor-report", "--config", c, "--out", csv.to_str().unwrap(), "--format", "csv"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read_to_string(csv.join("cantor-report.csv")).unwrap();
    assert_eq!(body, "carrier,generation,L_n,m_A_n,alpha_n,gap_len\n");
    assert!(!body.contains('\r'));
}
