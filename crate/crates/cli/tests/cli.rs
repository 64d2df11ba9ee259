use std::path::Path;
use std::process::{Command, Output};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_channelformer"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "expected one error line, got {text:?}");
    serde_json::from_str(lines[0]).unwrap()
}

#[test]
fn pdp_list_prints_the_four_builtin_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["pdp", "list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(names, ["EPA", "EVA", "ETU", "CUSTOM"]);
}

#[test]
fn missing_config_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in [
        "gen-dataset",
        "train",
        "prune",
        "finetune",
        "eval-sweep",
        "online-sim",
        "probe-attention",
    ] {
        let o = cli(dir.path(), &[cmd, "--config", "absent.toml", "--out", "res"]);
        assert!(!o.status.success(), "{cmd}");
        assert_eq!(error_json(&o)["error"], "io");
        let o = cli(dir.path(), &[cmd, "--out", "res"]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert_eq!(error_json(&o)["error"], "usage");
    }
    assert!(!dir.path().join("res").exists());
}

#[test]
fn config_errors_are_single_line_and_typed() {
    let dir = tempfile::tempdir().unwrap();
    let write = |text: &str| std::fs::write(dir.path().join("c.toml"), text).unwrap();

    write("[sweep]\nkind = \"mse_vs_snr\"\naxis = [0.0]\nestimators = [\"kalman\"]\n");
    let o = cli(dir.path(), &["eval-sweep", "--config", "c.toml", "--out", "res"]);
    assert_eq!(error_json(&o)["error"], "unknown_estimator");

    write("[sweep]\nkind = \"mse_vs_snr\"\naxis = [0.0]\nnetwork = [{ name = \"n\", weights = \"none.cfw\" }]\n");
    let o = cli(dir.path(), &["eval-sweep", "--config", "c.toml", "--out", "res"]);
    assert_eq!(error_json(&o)["error"], "io");

    write("[sweep]\nkind = \"mse_vs_snr\"\n");
    let o = cli(dir.path(), &["eval-sweep", "--config", "c.toml", "--out", "res"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "config");

    write("seed = 1\n");
    let o = cli(dir.path(), &["train", "--config", "c.toml", "--out", "res"]);
    assert_eq!(error_json(&o)["error"], "config");
    assert!(!dir.path().join("res").exists());
}

#[test]
fn sweep_csv_embeds_seed_and_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        "[sweep]\nkind = \"ber_vs_snr\"\naxis = [0.0, 20.0]\nrealizations = 5\nestimators = [\"perfect\", \"ls\"]\n";
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let o = cli(
        dir.path(),
        &[
            "eval-sweep",
            "--config",
            "c.toml",
            "--seed",
            "9",
            "--out",
            "res",
            "--quiet",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stderr.is_empty());
    let text = std::fs::read_to_string(dir.path().join("res/ber_vs_snr.csv")).unwrap();
    let head = text.lines().next().unwrap();
    assert!(head.contains("seed=9") && head.contains("kind=ber_vs_snr"));
    assert_eq!(text.lines().nth(1), Some("axis,estimator,metric,mean,std_err,n"));
    assert_eq!(text.lines().count(), 2 + 4);
}

#[test]
fn json_log_emits_one_object_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[sweep]\nkind = \"mse_vs_snr\"\naxis = [10.0]\nrealizations = 2\nestimators = [\"ls\"]\n";
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let o = cli(
        dir.path(),
        &["eval-sweep", "--config", "c.toml", "--out", "res", "--json-log"],
    );
    assert!(o.status.success());
    let text = String::from_utf8(o.stderr).unwrap();
    assert!(!text.is_empty());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["level"], "info");
    }
}

#[test]
fn shipped_configs_parse() {
    use channelformer::experiments::config::RunConfig;
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let cfg = RunConfig::parse(&std::fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if cfg.dataset.is_some() {
            cfg.dataset_spec(0).unwrap();
            cfg.train_hyperparams().unwrap();
            cfg.finetune_hyperparams().unwrap();
            cfg.online_spec(0).unwrap();
        }
        seen += 1;
    }
    assert!(seen >= 2);
}
