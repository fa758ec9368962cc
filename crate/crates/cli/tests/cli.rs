use std::process::{Command, Output};

use serde_json::Value;

fn gapcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapcert"))
        .args(args)
        .output()
        .expect("run gapcert")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

#[test]
fn gap_csv_sweep() {
    let o = gapcert(&["gap", "--model", "heisenberg_fm", "--sizes", "2..8", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,sites,hilbert_dim,gap,ground_degeneracy,lowest_eigenvalue,tol,method"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 7);
    let l4: f64 = rows[2][3].parse().unwrap();
    assert_eq!(rows[2][0], "4");
    assert!((l4 - 0.29289).abs() < 1e-5);
    // ground space of the ferromagnet is the spin n/2 multiplet
    assert!(rows.iter().all(|r| r[4].parse::<i64>().unwrap() == r[0].parse::<i64>().unwrap() + 1));
}

#[test]
fn certify_default_start_is_valid() {
    let o = gapcert(&["certify", "--delta", "exponential:c=1,alpha=0.5", "--schedule", "k2", "--lambda0", "1"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["result"]["k0"], 24);
    assert!(v["result"]["lower_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn certify_from_level_three_has_no_certificate() {
    let o = gapcert(&[
        "certify", "--delta", "exponential:c=1,alpha=0.5", "--schedule", "k2", "--lambda0", "1", "--k0", "3",
    ]);
    assert_eq!(code(&o), 3);
    let v = json_of(&o);
    assert_eq!(v["result"]["valid"], false);
    assert_eq!(v["result"]["lower_bound"], 0.0);
}

#[test]
fn certify_zero_delta_constant() {
    let o = gapcert(&["certify", "--delta", "const:0", "--schedule", "k2"]);
    assert_eq!(code(&o), 0);
    let lb = json_of(&o)["result"]["lower_bound"].as_f64().unwrap();
    assert!((0.2719..=0.2721).contains(&lb));
}

#[test]
fn quasi_factorization_aklt() {
    let o = gapcert(&["verify", "qf", "--model", "aklt", "--A", "0..4", "--B", "3..6", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_of(&o);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["tolerances"]["operator"], 1e-9);
    assert!(v["result"]["min_eigenvalue"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn sampled_checks_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = gapcert(&[
            "verify", "sandwich", "--model", "aklt", "--sites", "5", "--samples", "50", "--seed", "11", "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(path).unwrap()
    };
    let first = run("a.json");
    assert_eq!(first, run("b.json"));
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["result"]["seed"], 11);
    assert!(v["result"]["checks"].as_array().unwrap().len() >= 4);
}

#[test]
fn dl_checks_csv() {
    let o = gapcert(&["verify", "dl", "--model", "heisenberg_fm", "--sites", "6", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("name,worst_margin,tolerance,samples,passed,witness"));
    assert!(text.contains("detectability"));
}

#[test]
fn gamma_certificate_depends_on_model() {
    let o = gapcert(&["verify", "gamma", "--model", "product", "--sites", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_of(&o)["result"]["gamma"], 0.0);
    // γ > 1 here: reported, no certificate
    let o = gapcert(&["verify", "gamma", "--model", "heisenberg_fm", "--sites", "6"]);
    assert_eq!(code(&o), 3);
    let v = json_of(&o);
    assert!(v["result"]["gamma"].as_f64().unwrap() > 1.0);
    assert!(v["result"]["bound"].is_null());
}

#[test]
fn split_example() {
    let o = gapcert(&["verify", "split", "--model", "heisenberg_fm", "--A", "0..5", "--B", "3..7", "--q", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = gapcert(&["verify", "split", "--model", "heisenberg_fm", "--A", "0..5", "--B", "3..7", "--q", "9"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gap_to_delta_and_projector_inequality() {
    let o = gapcert(&["verify", "gapdelta", "--model", "aklt", "--A", "0..3", "--B", "2..5"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert!(v["result"]["delta"]["value"].as_f64().unwrap() <= v["result"]["bound"].as_f64().unwrap());
    let o = gapcert(&["verify", "projineq", "--dim", "16", "--pairs", "10", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 11);
}

#[test]
fn delta_pair_table_and_curve() {
    let o = gapcert(&["delta", "--model", "heisenberg_fm", "--A", "0..4", "--B", "3..7"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_eq!(v["result"]["forms_agree"], true);
    assert!(v["result"]["value"].as_f64().unwrap() > 0.0);

    let o = gapcert(&["delta", "--model", "product", "--k-max", "8", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("k,l_k,s_k,s_admissible,region_sites,pairs,delta_k,method"));

    let o = gapcert(&["delta", "--model", "aklt", "--curve", "2", "--max-sites", "6", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let deltas: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(deltas.len(), 2);
    assert!(deltas[1] < deltas[0]);
}

#[test]
fn pvbs_commands() {
    let o = gapcert(&["pvbs", "delta", "--lambda", "1", "--A", "0..9", "--B", "5..14"]);
    assert_eq!(code(&o), 0);
    assert!((json_of(&o)["result"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let o = gapcert(&["pvbs", "certify", "--lambda", "0.8"]);
    assert_eq!(code(&o), 0);
    assert!(json_of(&o)["result"]["lower_bound"].as_f64().unwrap() > 0.0);
    let o = gapcert(&["pvbs", "certify", "--lambda", "1"]);
    assert_eq!(code(&o), 3);
    let o = gapcert(&["pvbs", "bound", "--lambda", "0.5", "--l", "4", "--la", "9", "--lb", "9"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn threshold_table_and_gaps() {
    let o = gapcert(&["threshold", "--n", "10"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_eq!(v["result"]["fractions"], serde_json::json!(["1/9", "6/110", "1/29", "8/100"]));

    let o = gapcert(&["threshold", "--model", "heisenberg_fm", "--sizes", "4..8", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.contains("knabe_chain"), "{line}");
        assert!(line.ends_with("knabe_chain;gosset_chain;log"), "{line}");
    }
    let o = gapcert(&["threshold", "--gaps", "10:1.0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_of(&o)["result"]["rows"][0]["below"], serde_json::json!(["log"]));
}

#[test]
fn model_files() {
    let dir = tempfile::tempdir().unwrap();
    // triplet projector on neighbouring spins: frustrated on three sites
    let s = 0.5;
    let m = [
        [1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0],
        [0.0, 0.0], [1.0 - s, 0.0], [s, 0.0], [0.0, 0.0],
        [0.0, 0.0], [s, 0.0], [1.0 - s, 0.0], [0.0, 0.0],
        [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0],
    ];
    let file = serde_json::json!({
        "version": 1,
        "dim": 1,
        "local_dim": 2,
        "range": 2.0,
        "translation_invariant": true,
        "terms": [{ "support": [[0], [1]], "matrix": m }],
    });
    let path = dir.path().join("triplet.json");
    std::fs::write(&path, file.to_string()).unwrap();
    let p = path.to_str().unwrap();
    let o = gapcert(&["model", "validate", "--model", p, "--sites", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = gapcert(&["model", "validate", "--model", p, "--sites", "3"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json_of(&o)["result"]["frustration"]["frustration_free"], false);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 1, "local_dim": 2, "range": 2.0, "builtin": {"name": "aklt"}}"#).unwrap();
    let o = gapcert(&["model", "validate", "--model", bad.to_str().unwrap(), "--sites", "3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn error_exit_codes() {
    assert_eq!(code(&gapcert(&["gap", "--model", "nope", "--sizes", "3"])), 2);
    assert_eq!(code(&gapcert(&["gap", "--model", "aklt", "--sizes", "3..x"])), 2);
    assert_eq!(code(&gapcert(&["gap", "--model", "aklt", "--sizes", "20"])), 4);
    assert_eq!(code(&gapcert(&["gap", "--model", "aklt", "--sizes", "8", "--budget", "100"])), 4);
    assert_eq!(code(&gapcert(&["verify", "qf", "--model", "aklt", "--A", "0..4,0..1", "--B", "3..6"])), 2);
    assert_eq!(code(&gapcert(&["certify", "--delta", "bogus"])), 2);
    assert_eq!(code(&gapcert(&["delta", "--model", "aklt"])), 2);
    let o = gapcert(&["gap", "--model", "aklt", "--sizes", "3", "--format", "csv", "--out", "/nonexistent/x.csv"]);
    assert_eq!(code(&o), 2);
}
