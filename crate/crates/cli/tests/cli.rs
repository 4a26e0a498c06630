use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn hitgate(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hitgate"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn missing_input_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hitgate(
        &["validate", "/nonexistent/file.smi"],
        &tmp.path().join("o"),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn unknown_flag_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hitgate(&["filter", "--bogus"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_key_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "a.smi", "CCO\n");
    let cfg = write(tmp.path(), "c.toml", "[filter]\nmw_maximum = 3\n");
    let out = hitgate(&["filter", &input, "--config", &cfg], &tmp.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_scores_exit_3_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = write(
        tmp.path(),
        "s.csv",
        "molecule_id,target,cohort,score\nm1,T,c,notanumber\n",
    );
    let out_dir = tmp.path().join("o");
    let out = hitgate(&["docking", &scores], &out_dir);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out_dir.exists());
}

#[test]
fn malformed_smiles_line_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "a.smi", "CCO\tm1\tnot-a-number\n");
    let out = hitgate(&["filter", &input], &tmp.path().join("o"));
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn validate_three_novel_molecules() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "a.smi", "CCO\tm1\nc1ccccc1\tm2\nCC(=O)O\tm3\n");
    let training = write(tmp.path(), "t.smi", "CCCC\n");
    let o = tmp.path().join("o");
    assert!(hitgate(&["validate", &input, "--training", &training], &o)
        .status
        .success());
    let v = json(&o, "vun.json");
    assert_eq!(v["report"]["vun_pct"], 100.0);
    let manifest = json(&o, "manifest.json");
    assert_eq!(v["run_digest"], manifest["run_digest"]);
}

#[test]
fn validate_logs_rejects_with_reasons() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "a.smi", "CCO\tok\nC(C)(C)(C)(C)C\tbad\n");
    let o = tmp.path().join("o");
    assert!(hitgate(&["validate", &input], &o).status.success());
    let rejects = read(&o, "rejects.tsv");
    assert_eq!(rejects.lines().count(), 2);
    assert!(rejects.contains("\tbad\t"));
}

#[test]
fn filter_hand_counted_table() {
    let tmp = tempfile::tempdir().unwrap();
    // Phenethylamine fails only MW; the second molecule passes everything.
    let input = write(
        tmp.path(),
        "a.smi",
        "NCCc1ccccc1\tlight\nCC(C)(C)c1ccc(cc1)C(=O)NC1CC1\tok\n",
    );
    let o = tmp.path().join("o");
    let out = hitgate(&["filter", &input, "--explain"], &o);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&o, "failure_table.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("Sev.,SAS,MW,logP,NoR,<4R,<8t,<2R6t,AromR,FusedR,All")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[2], "50.00");
    assert_eq!(row[10], "50.00");
    assert_eq!(read(&o, "passing.smi").lines().count(), 1);
    let first: serde_json::Value =
        serde_json::from_str(read(&o, "outcomes.jsonl").lines().next().unwrap()).unwrap();
    let measured = first["measured"].as_array().unwrap();
    for c in ["Mw", "LogP", "Sas", "Sev"] {
        assert!(
            measured
                .iter()
                .any(|r| r["criterion"] == c && r["value"].is_number()),
            "{c}"
        );
    }
}

#[test]
fn filter_without_explain_omits_values() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "a.smi", "NCCc1ccccc1\n");
    let o = tmp.path().join("o");
    assert!(hitgate(&["filter", &input], &o).status.success());
    assert!(!read(&o, "outcomes.jsonl").contains("measured"));
}

#[test]
fn set_flag_overrides_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "a.smi", "NCCc1ccccc1\n");
    let cfg = write(tmp.path(), "c.toml", "[filter]\nmw_min = 200.0\n");
    let o = tmp.path().join("o");
    assert!(hitgate(
        &[
            "filter",
            &input,
            "--config",
            &cfg,
            "--set",
            "filter.mw_min=100"
        ],
        &o
    )
    .status
    .success());
    assert_eq!(
        json(&o, "manifest.json")["config"]["settings"]["filter"]["mw_min"],
        100.0
    );
    assert!(
        read(&o, "failure_table.csv")
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(2)
            == Some("0.00")
    );
}

#[test]
fn largest_fragment_flag_admits_salts() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "a.smi", "CC(C)(C)c1ccc(cc1)C(=O)NC1CC1.Cl\n");
    let o1 = tmp.path().join("o1");
    let o2 = tmp.path().join("o2");
    assert!(hitgate(&["filter", &input], &o1).status.success());
    assert!(hitgate(&["filter", &input, "--largest-fragment"], &o2)
        .status
        .success());
    assert_eq!(read(&o1, "passing.smi").lines().count(), 0);
    assert_eq!(read(&o2, "passing.smi").lines().count(), 1);
}

#[test]
fn metrics_self_comparison() {
    let tmp = tempfile::tempdir().unwrap();
    let set = data("matcher_molecules.smi").display().to_string();
    let o = tmp.path().join("o");
    let out = hitgate(
        &[
            "metrics",
            "--generated",
            &set,
            "--reference",
            &set,
            "--training",
            &set,
        ],
        &o,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&o, "metrics.csv");
    assert_eq!(
        csv.lines().next(),
        Some("Valid,VUN,Filters,FCD,Frag.,Scaff.,SNN,Div.")
    );
    let t = &json(&o, "metrics.json")["report"]["table"];
    assert_eq!(t["Valid"], 100.0);
    assert!((t["SNN"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(t["FCD"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn metrics_without_features_skips_fcd() {
    let tmp = tempfile::tempdir().unwrap();
    let set = data("matcher_molecules.smi").display().to_string();
    let o = tmp.path().join("o");
    let out = hitgate(
        &[
            "metrics",
            "--generated",
            &set,
            "--reference",
            &set,
            "--no-builtin-features",
        ],
        &o,
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("FCD skipped"));
    assert!(json(&o, "metrics.json")["report"]["table"]["FCD"].is_null());
}

#[test]
fn docking_self_comparison_and_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("molecule_id,target,cohort,score\n");
    for (i, s) in [-8.1, -7.4, -9.0, -6.5, -7.7].iter().enumerate() {
        text.push_str(&format!(
            "g{i},T1,Model (Hit-like),{s}\nr{i},T1,reference-full,{s}\n"
        ));
    }
    let scores = write(tmp.path(), "s.csv", &text);
    let o = tmp.path().join("o");
    assert!(hitgate(&["docking", &scores], &o).status.success());
    assert_eq!(
        read(&o, "table4a.csv"),
        "Model,KL divergence\nModel (Hit-like),0.000 ± 0.000\n"
    );
    let t3 = read(&o, "table3.csv");
    assert_eq!(t3.lines().nth(1), Some("Model (Hit-like),T1,-7.70,40.00"));
    let svg = read(&o, "plots/hist_T1_Model_Hit-like.svg");
    roxmltree::Document::parse(&svg).expect("well-formed SVG");
}

#[test]
fn triage_empty_candidates() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write(tmp.path(), "e.smi", "");
    let o = tmp.path().join("o");
    let out = hitgate(
        &[
            "triage",
            "--candidates",
            &empty,
            "--binders",
            data("triage_binders.smi").to_str().unwrap(),
            "--scores",
            data("triage_scores.csv").to_str().unwrap(),
        ],
        &o,
    );
    assert!(out.status.success());
    assert_eq!(
        read(&o, "triage.csv"),
        "id,score,z_margin,nearest_binder_id,tanimoto_distance,sa_score\n"
    );
}

#[test]
fn triage_td_min_monotone_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |td: &str, name: &str| {
        let o = tmp.path().join(name);
        let out = hitgate(
            &[
                "triage",
                "--candidates",
                data("triage_candidates.smi").to_str().unwrap(),
                "--binders",
                data("triage_binders.smi").to_str().unwrap(),
                "--scores",
                data("triage_scores.csv").to_str().unwrap(),
                "--z",
                "0.25",
                "--td-min",
                td,
                "--activities",
                data("activities.csv").to_str().unwrap(),
                "--highlight-value",
                "7.9",
            ],
            &o,
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let ids: Vec<String> = read(&o, "triage.csv")
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().to_string())
            .collect();
        roxmltree::Document::parse(&read(&o, "plots/activity.svg")).expect("well-formed SVG");
        ids
    };
    let mut previous = run("0.0", "t0");
    assert_eq!(previous.first().map(String::as_str), Some("A"));
    for (k, td) in ["0.3", "0.6", "0.9", "1.0"].iter().enumerate() {
        let ids = run(td, &format!("t{}", k + 1));
        assert!(
            ids.iter().all(|i| previous.contains(i)),
            "{td}: {ids:?} not within {previous:?}"
        );
        previous = ids;
    }
}

#[test]
fn rerun_digests_equal() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = data("docking_scores.csv").display().to_string();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(hitgate(&["docking", &scores, "--threads", "1"], &a)
        .status
        .success());
    assert!(hitgate(&["docking", &scores, "--threads", "3"], &b)
        .status
        .success());
    assert_eq!(
        json(&a, "manifest.json")["run_digest"],
        json(&b, "manifest.json")["run_digest"]
    );
    assert_eq!(read(&a, "docking.json"), read(&b, "docking.json"));
    assert_eq!(read(&a, "manifest.json"), read(&b, "manifest.json"));
}
