//! End-to-end checks of the command-line interface against the bundled
//! sample fixtures. Every documented README command line is executed
//! here.

use std::path::{Path, PathBuf};

use earlyrank::cli::run;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run_cli(args: &[&str]) -> i32 {
    let mut argv = vec!["earlyrank"];
    argv.extend_from_slice(args);
    run(argv)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn rank_eval_pipeline_on_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let cohort_path = dir.path().join("cohort.txt");
    let rank_path = dir.path().join("ranking.tsv");
    let metric_path = dir.path().join("metric.tsv");

    // Extract the cohort of recently created accounts.
    let code = run_cli(&[
        "cohort",
        "--edges",
        &fixture("sample_edges.tsv"),
        "--meta",
        &fixture("sample_meta.tsv"),
        "--snapshot-time",
        "5000000",
        "--weeks",
        "2",
        "--min-followers",
        "2",
        "--out",
        cohort_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let cohort = read(&cohort_path);
    let members: Vec<&str> = cohort.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(members, vec!["9", "10"]);

    // Rank the cohort by the reciprocity-filtered sum score.
    let code = run_cli(&[
        "rank",
        "--edges",
        &fixture("sample_edges.tsv"),
        "--meta",
        &fixture("sample_meta.tsv"),
        "--score",
        "f2-sum",
        "--factors",
        "r",
        "--targets",
        cohort_path.to_str().unwrap(),
        "--out",
        rank_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let ranking = read(&rank_path);
    let lines: Vec<&str> = ranking.lines().collect();
    assert_eq!(lines[0], "# method: f2-sum(r)");
    // Account 9 is followed by the account whose links were copied
    // three times; account 10 by a weaker one.
    assert_eq!(lines[1], "1\t9\t1");
    assert_eq!(lines[2], "2\t10\t0.5");
    assert!(rank_path.with_file_name("ranking.tsv.manifest.json").exists());

    // The ranking matches the ground-truth order exactly.
    let code = run_cli(&[
        "eval",
        "--ranking",
        rank_path.to_str().unwrap(),
        "--meta",
        &fixture("sample_meta.tsv"),
        "--metric",
        "spearman",
        "--out",
        metric_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let metric = read(&metric_path);
    assert!(metric.contains("spearman\tf2-sum(r)\t-\t1"), "{metric}");

    let code = run_cli(&[
        "eval",
        "--ranking",
        rank_path.to_str().unwrap(),
        "--meta",
        &fixture("sample_meta.tsv"),
        "--metric",
        "ndcg@2",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn cf_export_and_explain() {
    let dir = tempfile::tempdir().unwrap();
    let cf_path = dir.path().join("cf.tsv");
    let explain_path = dir.path().join("explain.tsv");
    let code = run_cli(&[
        "cf",
        "--edges",
        &fixture("sample_edges.tsv"),
        "--meta",
        &fixture("sample_meta.tsv"),
        "--factors",
        "r",
        "--out",
        cf_path.to_str().unwrap(),
        "--explain",
        explain_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let cf = read(&cf_path);
    assert!(cf.starts_with("# method: cf(r)"));
    // Account 1 was imitated three times, account 4 once.
    assert!(cf.contains("\n1\t3\n"), "{cf}");
    assert!(cf.contains("\n4\t1\n"), "{cf}");
    let explain = read(&explain_path);
    // Copy of 1 -> 9 by account 2 at seq 10, sole candidate.
    assert!(explain.contains("10\t2\t9\t1\t1"), "{explain}");
}

#[test]
fn baseline_methods_run() {
    let dir = tempfile::tempdir().unwrap();
    for method in [
        "fw", "fw-nr", "fr", "fr-nr", "hits", "hits-nr", "pr", "pr-nr", "ad-sum", "ad-mean",
    ] {
        let out = dir.path().join(format!("{method}.tsv"));
        let code = run_cli(&[
            "baseline",
            "--edges",
            &fixture("sample_edges.tsv"),
            "--meta",
            &fixture("sample_meta.tsv"),
            "--method",
            method,
            "--targets",
            &fixture("sample_targets.txt"),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "method {method}");
        let text = read(&out);
        assert!(text.starts_with(&format!("# method: {method}")));
        assert_eq!(text.lines().count(), 3);
    }
}

#[test]
fn synth_combine_scatter_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let synth_dir = dir.path().join("synth");
    let code = run_cli(&[
        "synth",
        "--n-accounts",
        "300",
        "--n-events",
        "4000",
        "--horizon-events",
        "2000",
        "--seed",
        "7",
        "--out-dir",
        synth_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let edges = synth_dir.join("edges.tsv");
    let meta = synth_dir.join("meta.tsv");
    assert!(edges.exists() && meta.exists());
    assert!(synth_dir.join("ground_truth.tsv").exists());
    assert!(synth_dir.join("manifest.json").exists());

    // Rank everyone, also compute a baseline, then combine the two.
    let ours = dir.path().join("ours.tsv");
    let fw = dir.path().join("fw.tsv");
    assert_eq!(
        run_cli(&[
            "rank",
            "--edges",
            edges.to_str().unwrap(),
            "--meta",
            meta.to_str().unwrap(),
            "--score",
            "f2-sum",
            "--factors",
            "r",
            "--out",
            ours.to_str().unwrap(),
        ]),
        0
    );
    assert_eq!(
        run_cli(&[
            "baseline",
            "--edges",
            edges.to_str().unwrap(),
            "--meta",
            meta.to_str().unwrap(),
            "--method",
            "fw",
            "--out",
            fw.to_str().unwrap(),
        ]),
        0
    );
    let combined = dir.path().join("combined.tsv");
    assert_eq!(
        run_cli(&[
            "combine",
            "--meta",
            meta.to_str().unwrap(),
            "--features",
            ours.to_str().unwrap(),
            "--features",
            fw.to_str().unwrap(),
            "--folds",
            "5",
            "--seed",
            "42",
            "--out",
            combined.to_str().unwrap(),
        ]),
        0
    );
    let text = read(&combined);
    assert!(text.contains("# method: lr(f2-sum(r)+fw)"));
    assert!(text.contains("# seed: 42"));
    assert!(text.contains("# coefficient: f2-sum(r)"));

    let scatter = dir.path().join("scatter.tsv");
    assert_eq!(
        run_cli(&[
            "scatter",
            "--scores",
            ours.to_str().unwrap(),
            "--meta",
            meta.to_str().unwrap(),
            "--out",
            scatter.to_str().unwrap(),
        ]),
        0
    );
    let text = read(&scatter);
    assert!(text.starts_with("# account_id\tscore_rank\tgain_rank"));
    assert_eq!(text.lines().count(), 301);
}

#[test]
fn exit_codes() {
    // Usage errors: missing arguments, unknown values.
    assert_eq!(run_cli(&["rank"]), 1);
    assert_eq!(run_cli(&["frobnicate"]), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.tsv");
    assert_eq!(
        run_cli(&[
            "rank",
            "--edges",
            &fixture("sample_edges.tsv"),
            "--meta",
            &fixture("sample_meta.tsv"),
            "--score",
            "f9-sum",
            "--out",
            out.to_str().unwrap(),
        ]),
        1
    );
    assert_eq!(
        run_cli(&[
            "cf",
            "--edges",
            &fixture("sample_edges.tsv"),
            "--meta",
            &fixture("sample_meta.tsv"),
            "--factors",
            "q",
            "--out",
            out.to_str().unwrap(),
        ]),
        1
    );

    // Data errors: missing files, malformed input, unknown accounts.
    assert_eq!(
        run_cli(&[
            "cf",
            "--edges",
            "/nonexistent/edges.tsv",
            "--meta",
            &fixture("sample_meta.tsv"),
            "--out",
            out.to_str().unwrap(),
        ]),
        2
    );
    let bad_edges = dir.path().join("bad.tsv");
    std::fs::write(&bad_edges, "1\t1\t1\n").unwrap();
    assert_eq!(
        run_cli(&[
            "cf",
            "--edges",
            bad_edges.to_str().unwrap(),
            "--meta",
            &fixture("sample_meta.tsv"),
            "--out",
            out.to_str().unwrap(),
        ]),
        2
    );
    let bad_targets = dir.path().join("targets.txt");
    std::fs::write(&bad_targets, "999\n").unwrap();
    assert_eq!(
        run_cli(&[
            "rank",
            "--edges",
            &fixture("sample_edges.tsv"),
            "--meta",
            &fixture("sample_meta.tsv"),
            "--score",
            "f2-sum",
            "--targets",
            bad_targets.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]),
        2
    );

    // Help and version print and exit cleanly.
    assert_eq!(run_cli(&["--help"]), 0);
    assert_eq!(run_cli(&["--version"]), 0);
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.path().join(format!("cf_{workers}.tsv"));
        let code = run_cli(&[
            "cf",
            "--edges",
            &fixture("sample_edges.tsv"),
            "--meta",
            &fixture("sample_meta.tsv"),
            "--factors",
            "t,r,s",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
