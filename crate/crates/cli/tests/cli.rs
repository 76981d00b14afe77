use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn scenario(name: &str) -> PathBuf {
    root().join("scenarios").join(name)
}

fn qbkg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbkg")).args(args).current_dir(cwd).output().unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

/// One small run of standard_lab into `dir/run`.
fn small_run(dir: &Path) -> PathBuf {
    let out = dir.join("run");
    let o = qbkg(
        &["run", scenario("standard_lab.toml").to_str().unwrap(), "--events", "40000", "--out", out.to_str().unwrap()],
        dir,
    );
    assert!(o.status.success(), "{}", text(&o));
    out
}

#[test]
fn validate_accepts_shipped_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qbkg(&["validate", scenario("lngs_full_shield.toml").to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("ok ("));
}

#[test]
fn validate_rejects_overlap() {
    let tmp = tempfile::tempdir().unwrap();
    let geo = fs::read_to_string(root().join("scenarios/geometry/thin_absorber.geo")).unwrap()
        + "volume name=lump solid=box dims=30,30,5 material=aluminum parent=inside offset=0,0,10\n";
    fs::write(tmp.path().join("g.geo"), geo).unwrap();
    let toml = fs::read_to_string(scenario("thin_absorber.toml"))
        .unwrap()
        .replace("geometry/thin_absorber.geo", "g.geo")
        .replace("../data", &root().join("data").display().to_string());
    fs::write(tmp.path().join("s.toml"), toml).unwrap();
    let o = qbkg(&["validate", "s.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
    let t = text(&o);
    assert!(t.contains("'target'") && t.contains("'lump'"), "{t}");
}

#[test]
fn missing_scenario_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qbkg(&["run", "nowhere.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("nowhere.toml"), "{}", text(&o));
}

#[test]
fn run_report_compare_and_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_run(tmp.path());
    for f in ["summary.json", "manifest.json", "rates.csv", "rates.txt", "spectrum_total.csv", "crossings_gamma.txt"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary = out.join("summary.json");
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"n_gen\": 40000"), "{manifest}");

    let o = qbkg(&["report", summary.to_str().unwrap(), "--out", "rep"], tmp.path());
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("muon"));
    assert_eq!(
        fs::read_to_string(tmp.path().join("rep/rates.csv")).unwrap(),
        fs::read_to_string(out.join("rates.csv")).unwrap()
    );

    let s = summary.to_str().unwrap();
    let o = qbkg(&["compare", s, s, "--out", "cmp.json"], tmp.path());
    assert!(o.status.success(), "{}", text(&o));
    let t = text(&o);
    let muon = t.lines().find(|l| l.starts_with("muon")).unwrap_or_else(|| panic!("{t}"));
    assert!(muon.contains("1.0000 ±"), "{muon}");
    assert!(tmp.path().join("cmp.json").is_file());

    let renamed = fs::read_to_string(&summary).unwrap().replace("\"muon\"", "\"cosmic\"");
    fs::write(tmp.path().join("renamed.json"), renamed).unwrap();
    let o = qbkg(&["compare", s, "renamed.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("labels differ"), "{}", text(&o));

    let o = qbkg(
        &[
            "two-step-replay",
            scenario("standard_lab.toml").to_str().unwrap(),
            out.join("crossings_gamma.txt").to_str().unwrap(),
            "--label",
            "gamma",
            "--n2",
            "50000",
            "--mode",
            "marginal",
            "--out",
            "replay",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", text(&o));
    let m = fs::read_to_string(tmp.path().join("replay/manifest.json")).unwrap();
    assert!(m.contains("\"n_gen\": 50000"), "{m}");
}

#[test]
fn default_output_directory_is_named_after_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qbkg(&["run", scenario("thin_absorber.toml").to_str().unwrap(), "--events", "2000", "--seed", "5"], tmp.path());
    assert!(o.status.success(), "{}", text(&o));
    assert!(tmp.path().join("out/thin_absorber/summary.json").is_file());
}
