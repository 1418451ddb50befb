use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn histmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_histmix")).args(args).arg("--quiet").output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split(' ').find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('='))).unwrap_or_else(|| panic!("{key} in {line}"))
}

fn synth(dir: &TempDir, cfg_text: &str, seed: &str, name: &str) -> PathBuf {
    let cfg = write(dir, &format!("{name}.cfg"), cfg_text);
    let out = dir.path().join(name);
    stdout(&histmix(&["synth", "--config", s(&cfg), "--seed", seed, "--output", s(&out)]));
    out
}

#[test]
fn synth_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = std::fs::read_to_string(synth(&dir, "source = uniform-iid\nn = 100\n", "7", "a")).unwrap();
    let b = std::fs::read_to_string(synth(&dir, "source = uniform-iid\nn = 100\n", "7", "b")).unwrap();
    assert_eq!(a, b);
    assert_eq!(data_lines(&a).len(), 100);
    let header = a.lines().next().unwrap();
    assert!(header.starts_with('#') && header.contains("seed=7") && header.contains("digest="));
}

#[test]
fn synth_mixed_and_countable_formats() {
    let dir = TempDir::new().unwrap();
    let mixed = std::fs::read_to_string(synth(&dir, "source = mixed-atom\nn = 200\n", "1", "m")).unwrap();
    let lines = data_lines(&mixed);
    assert!(lines.contains(&"-1"));
    assert!(lines.iter().any(|l| l.parse::<f64>().is_ok_and(|v| (0.0..1.0).contains(&v) && l.contains('.'))));

    let countable = std::fs::read_to_string(synth(&dir, "source = countable-geometric\nn = 200\n", "1", "c")).unwrap();
    assert!(data_lines(&countable).iter().all(|l| l.parse::<u64>().is_ok_and(|k| k >= 1)));
}

#[test]
fn estimate_reports_every_checkpoint_deterministically() {
    let dir = TempDir::new().unwrap();
    let text = "source = mixed-atom\nn = 1024\ncheckpoints = 64, 256, 1024\n";
    let data = synth(&dir, text, "3", "d");
    let cfg = write(&dir, "e.cfg", text);
    let run = || stdout(&histmix(&["estimate", "--config", s(&cfg), "--input", s(&data)]));
    let first = run();
    assert_eq!(first, run());
    let records = data_lines(&first);
    assert_eq!(records.iter().map(|l| field(l, "n")).collect::<Vec<_>>(), ["64", "256", "1024"]);
    for r in records {
        assert!(field(r, "kl_bits").parse::<f64>().unwrap().is_finite());
        assert_eq!(field(r, "weights").split(',').count(), 6);
    }
}

#[test]
fn more_levels_cost_little_on_uniform_data() {
    let dir = TempDir::new().unwrap();
    let data = synth(&dir, "source = uniform-iid\nn = 16384\n", "5", "u");
    let logloss = |levels: usize| {
        let cfg = write(&dir, &format!("l{levels}.cfg"), &format!("family = dyadic\ninterval = 0, 1\nlevels = {levels}\n"));
        let out = stdout(&histmix(&["estimate", "--config", s(&cfg), "--input", s(&data)]));
        let last = *data_lines(&out).last().unwrap();
        assert_eq!(field(last, "n"), "16384");
        field(last, "logloss_bits").parse::<f64>().unwrap()
    };
    let (one, four) = (logloss(1), logloss(4));
    assert!((four - one).abs() < 0.2, "L=1 {one}, L=4 {four}");
}

#[test]
fn predict_rows_and_values() {
    let dir = TempDir::new().unwrap();
    let text = "source = uniform-iid\nn = 16384\n";
    let data = synth(&dir, text, "2", "p");
    let cfg = write(&dir, "p.cfg", text);

    let ones = stdout(&histmix(&["predict", "--config", s(&cfg), "--input", s(&data), "--r", "one"]));
    let rows = data_lines(&ones);
    assert_eq!(rows.len(), 16384);
    assert!(rows.iter().all(|r| field(r, "prediction").parse::<f64>().unwrap() == 1.0));
    assert_eq!(field(rows[0], "j"), "1");

    let half = stdout(&histmix(&["predict", "--config", s(&cfg), "--input", s(&data), "--r", "cell:0"]));
    let preds: Vec<f64> = data_lines(&half).iter().map(|r| field(r, "prediction").parse().unwrap()).collect();
    let mean = preds.iter().sum::<f64>() / preds.len() as f64;
    assert!((mean - 0.5).abs() < 0.02, "{mean}");
    // The first forecast is made before any data.
    assert_eq!(preds[0], 0.5);
}

#[test]
fn evaluate_record_counts_and_digest() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "v.cfg", "source = uniform-iid\n");
    let out = stdout(&histmix(&["evaluate", "--config", s(&cfg)]));
    let digest = field(out.lines().next().unwrap(), "digest").to_string();
    let records = data_lines(&out);
    assert!(records.iter().all(|r| field(r, "digest") == digest));
    let per_seed = records.iter().filter(|r| field(r, "record") == "seed").count();
    assert_eq!(per_seed, 140);
    for metric in ["kl_bits", "sq_error", "abs_error"] {
        let medians: Vec<f64> = records
            .iter()
            .filter(|r| field(r, "record") == "aggregate" && field(r, "metric") == metric)
            .map(|r| field(r, "median").parse().unwrap())
            .collect();
        assert_eq!(medians.len(), 7);
        assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{metric}: {medians:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "x.cfg", "source = uniform-iid\n");
    let bad_data = write(&dir, "bad.txt", "0.5\n# note\n\n1.5\n");
    let out = histmix(&["estimate", "--config", s(&cfg), "--input", s(&bad_data)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let garbled = write(&dir, "nan.txt", "nan\n");
    assert_eq!(histmix(&["estimate", "--config", s(&cfg), "--input", s(&garbled)]).status.code(), Some(2));

    let lebesgue = write(&dir, "l.cfg", "source = mixed-atom\neta.pieces = 0:1:1\n");
    let out = histmix(&["evaluate", "--config", s(&lebesgue)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero mass"));

    let missing = dir.path().join("missing.cfg");
    assert_eq!(histmix(&["synth", "--config", s(&missing)]).status.code(), Some(3));
    assert_eq!(histmix(&["estimate", "--config", s(&cfg), "--input", s(&missing)]).status.code(), Some(2));
    assert_eq!(histmix(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(histmix(&["predict", "--config", s(&cfg), "--input", s(&bad_data), "--r", "square"]).status.code(), Some(1));
    assert_eq!(histmix(&["evaluate", "--config", s(&cfg), "--jobs", "0"]).status.code(), Some(1));
}
