use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mediasent(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mediasent"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MEDIASENT_MODEL_CACHE")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_dir(o: &Output, cwd: &Path) -> PathBuf {
    assert!(o.status.success(), "{}", stderr(o));
    cwd.join(String::from_utf8_lossy(&o.stdout).trim())
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(mediasent(&[], tmp.path()).status.code(), Some(2));
    assert_eq!(mediasent(&["frobnicate"], tmp.path()).status.code(), Some(2));
    assert_eq!(
        mediasent(&["evaluate", "--test", "x.csv"], tmp.path()).status.code(),
        Some(2)
    );
}

#[test]
fn missing_input_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mediasent(&["ingest", "--articles", "nope.csv", "--out", "r"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("error[data]"), "{}", stderr(&o));
    // the failed run still leaves a manifest behind
    let m = manifest(&tmp.path().join("r"));
    assert!(m["status"].as_str().unwrap().starts_with("failed"));
}

#[test]
fn bad_config_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.json"), r#"{"ngram": {"size": 2}}"#).unwrap();
    let o = mediasent(&["--config", "c.json", "ngrams", "--articles", "a.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("error[config]"));

    let o = mediasent(&["ngrams", "--articles", "a.csv", "--n", "4"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn missing_pretrained_model_is_an_environment_error() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = run_dir(
        &mediasent(
            &["synth", "--tweets", "40", "--articles", "5", "--out", "s"],
            tmp.path(),
        ),
        tmp.path(),
    );
    let tweets = synth.join("tweets.csv");
    let o = mediasent(
        &["train", "--dataset", tweets.to_str().unwrap(), "--out", "t"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(stderr(&o).contains("error[environment]"));
}

#[test]
fn runs_never_overwrite() {
    let tmp = tempfile::tempdir().unwrap();
    run_dir(
        &mediasent(&["synth", "--tweets", "5", "--articles", "5", "--out", "s"], tmp.path()),
        tmp.path(),
    );
    let o = mediasent(&["synth", "--tweets", "5", "--articles", "5", "--out", "s"], tmp.path());
    assert_eq!(o.status.code(), Some(3));

    let a = run_dir(
        &mediasent(&["synth", "--tweets", "5", "--articles", "5"], tmp.path()),
        tmp.path(),
    );
    let b = run_dir(
        &mediasent(&["synth", "--tweets", "5", "--articles", "5"], tmp.path()),
        tmp.path(),
    );
    assert_ne!(a, b);
    assert!(a.starts_with(tmp.path().join("runs")) && b.starts_with(tmp.path().join("runs")));
}

#[test]
fn flags_override_config_and_land_in_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = run_dir(
        &mediasent(
            &["synth", "--tweets", "5", "--articles", "40", "--out", "s"],
            tmp.path(),
        ),
        tmp.path(),
    );
    let articles = synth.join("articles.csv");
    std::fs::write(
        tmp.path().join("c.json"),
        format!(
            r#"{{"corpus": {{"articles": {:?}}}, "ngram": {{"n": 3, "k": 4}}}}"#,
            articles
        ),
    )
    .unwrap();
    let dir = run_dir(
        &mediasent(&["--config", "c.json", "ngrams", "--k", "7", "--out", "n"], tmp.path()),
        tmp.path(),
    );
    let m = manifest(&dir);
    assert_eq!(m["command"], "ngrams");
    assert_eq!(m["config"]["n"], 3);
    assert_eq!(m["config"]["k"], 7);
    assert_eq!(m["status"], "ok");
    let table = std::fs::read_to_string(dir.join("ngrams_all_all_trigrams.csv")).unwrap();
    assert_eq!(table.lines().count(), 8);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn ingest_drops_excluded_sections() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = run_dir(
        &mediasent(
            &["synth", "--tweets", "5", "--articles", "200", "--out", "s"],
            tmp.path(),
        ),
        tmp.path(),
    );
    let src = std::fs::read_to_string(synth.join("articles.csv")).unwrap();
    assert!(src.contains(",Sport,"));
    let dir = run_dir(
        &mediasent(
            &[
                "ingest",
                "--articles",
                "s/articles.csv",
                "--sections",
                "World news,Sport",
                "--out",
                "i",
            ],
            tmp.path(),
        ),
        tmp.path(),
    );
    let kept = std::fs::read_to_string(dir.join("articles.csv")).unwrap();
    assert!(!kept.contains(",Sport,"));
    assert!(kept.contains(",World news,"));
}

#[test]
fn sample_and_polarity_from_persisted_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    run_dir(
        &mediasent(&["synth", "--tweets", "5", "--articles", "3", "--out", "s"], tmp.path()),
        tmp.path(),
    );
    let preds = [
        r#"{"article_id":"a0001","scores":[0.9,0,0,0,0,0,0,0,0,0],"labels":[1,0,0,0,0,0,0,0,0,0],"chunk_count":1}"#,
        r#"{"article_id":"a0002","scores":[0,0,0,0.9,0,0,0,0,0,0],"labels":[0,0,0,1,0,0,0,0,0,0],"chunk_count":1}"#,
        r#"{"article_id":"a0003","scores":[0.9,0,0,0.9,0,0,0,0,0,0],"labels":[1,0,0,1,0,0,0,0,0,0],"chunk_count":1}"#,
    ];
    std::fs::write(tmp.path().join("p.jsonl"), preds.join("\n") + "\n").unwrap();
    let dir = run_dir(
        &mediasent(
            &[
                "sample",
                "--predictions",
                "p.jsonl",
                "--articles",
                "s/articles.csv",
                "-k",
                "3",
                "--out",
                "x",
            ],
            tmp.path(),
        ),
        tmp.path(),
    );
    assert_eq!(
        std::fs::read_to_string(dir.join("sample.csv")).unwrap().lines().count(),
        4
    );

    let dir = run_dir(
        &mediasent(&["polarity", "--predictions", "p.jsonl", "--out", "y"], tmp.path()),
        tmp.path(),
    );
    let pol = std::fs::read_to_string(dir.join("polarity.csv")).unwrap();
    assert!(pol.contains("a0001,optimistic,1.000000"));
    assert!(pol.contains("a0002,pessimistic,-1.000000"));
    assert!(pol.contains("a0003,optimistic;pessimistic,0.000000"));
}
