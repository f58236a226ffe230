use frame_pbo::abc::HistoryRow;
use frame_pbo::analysis::read_curve_csv;
use frame_pbo_cli::output::{from_csv, to_csv, CaseReport, DriftRow, RunRow};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frame-pbo"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: Option<&Path>) -> Output {
    let mut c = bin();
    c.args(args).env_remove("FRAME_PBO_DATA");
    if let Some(p) = config {
        c.arg("--config").arg(p);
    }
    c.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(dir: &Path) -> CaseReport {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

fn tiny(dir: &Path, extra: &str) -> PathBuf {
    tiny_at(dir, "[\"IO\", \"CP\"]", extra)
}

fn tiny_at(dir: &Path, levels: &str, extra: &str) -> PathBuf {
    let text = format!(
        "data_dir = {:?}\ncase = \"custom\"\nlevels = {levels}\n{extra}\n[frame]\nstories = 2\nbays = 1\ngrouping = \"per-kind\"\n[abc]\ncolony_size = 6\nmax_iterations = 8\nruns = 3\nseed = 11\n",
        fixtures().display().to_string()
    );
    write(dir, "tiny.toml", &text)
}

fn copy_fixtures(to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for f in ["beams.csv", "columns.csv", "walls.csv"] {
        std::fs::copy(fixtures().join(f), to.join(f)).unwrap();
    }
}

#[test]
fn validate_shipped_fixtures_warns_about_beam_row() {
    let o = run(&["validate"], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("warning: beam row 1"), "{out}");
    assert!(out.contains("31 beams, 65 columns, 26 walls"), "{out}");
}

#[test]
fn validate_rejects_negative_depth_naming_the_row() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("bad");
    copy_fixtures(&dir);
    let beams = std::fs::read_to_string(dir.join("beams.csv")).unwrap().replace("3,450,350", "3,-450,350");
    std::fs::write(dir.join("beams.csv"), beams).unwrap();
    let o = run(&["validate", "--data", dir.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4") || err.contains("id 3"), "{err}");
}

#[test]
fn validate_rejects_empty_catalog_and_missing_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("empty");
    copy_fixtures(&dir);
    std::fs::write(dir.join("columns.csv"), "").unwrap();
    assert_eq!(run(&["validate", "--data", dir.to_str().unwrap()], None).status.code(), Some(2));
    std::fs::remove_file(dir.join("walls.csv")).unwrap();
    std::fs::copy(fixtures().join("columns.csv"), dir.join("columns.csv")).unwrap();
    assert_eq!(run(&["validate", "--data", dir.to_str().unwrap()], None).status.code(), Some(4));
}

#[test]
fn config_errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write(tmp.path(), "e.toml", "case = \"story4\"\nlevels = []\n");
    let o = run(&["analyze"], Some(&empty));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least one performance level"));
    assert_eq!(run(&["analyze"], Some(&tmp.path().join("missing.toml"))).status.code(), Some(4));
    let ok = write(tmp.path(), "ok.toml", "case = \"story4\"\n");
    let o = run(&["analyze", "--design", "1,2,3"], Some(&ok));
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["optimize", "--preset", "nope"], Some(&ok));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_story4_extremes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s4.toml", "case = \"story4\"\n");
    let max = tmp.path().join("max");
    let o = run(&["analyze", "--design", "max", "--out", max.to_str().unwrap()], Some(&cfg));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&max);
    assert_eq!(r.levels.len(), 3);
    assert!(r.all_feasible());
    for l in &r.levels {
        assert!(l.max_drift.unwrap() <= l.drift_limit);
        let curve = read_curve_csv(std::fs::File::open(max.join(l.pushover_csv.as_ref().unwrap())).unwrap()).unwrap();
        assert!(curve.len() > 10);
        assert!(max.join(format!("capacity_{}.svg", l.level.tag())).exists());
        assert!(max.join(format!("drift_{}.svg", l.level.tag())).exists());
    }
    assert!(max.join("report.txt").exists() && max.join("run_meta.json").exists());

    let min = tmp.path().join("min");
    let o = run(&["analyze", "--design", "min", "--out", min.to_str().unwrap()], Some(&cfg));
    assert_eq!(o.status.code(), Some(0));
    assert!(report(&min).levels.iter().all(|l| l.report.total > 0.0));
}

#[test]
fn optimize_is_reproducible_and_outputs_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny(tmp.path(), "");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let oa = run(&["optimize", "--out", a.to_str().unwrap()], Some(&cfg));
    let ob = run(&["optimize", "--out", b.to_str().unwrap(), "--threads", "3"], Some(&cfg));
    assert!(matches!(oa.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(oa.status.code(), ob.status.code());

    let mut names: Vec<String> =
        std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    for n in names.iter().filter(|n| *n != "run_meta.json") {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap(), "{n}");
    }

    let r = report(&a);
    for l in &r.levels {
        let opt = l.optimization.as_ref().unwrap();
        assert_eq!(opt.runs.len(), 3);
        let seeds: std::collections::BTreeSet<u64> = opt.runs.iter().map(|x| x.seed).collect();
        assert_eq!(seeds.len(), 3);

        let tag = l.level.tag();
        let runs_csv = std::fs::read(a.join(format!("runs_{tag}.csv"))).unwrap();
        let rows: Vec<RunRow> = from_csv(&runs_csv).unwrap();
        assert_eq!(rows, opt.runs);
        assert_eq!(to_csv(&rows).unwrap(), runs_csv);

        let conv = std::fs::read(a.join(&opt.convergence_csv)).unwrap();
        let h: Vec<HistoryRow> = from_csv(&conv).unwrap();
        assert_eq!(to_csv(&h).unwrap(), conv);
        assert_eq!(h.len(), 9);
        assert_eq!(h.last().unwrap().best_phi, opt.runs[opt.best_run - 1].best_phi);
        assert_eq!(l.report.phi, h.last().unwrap().best_phi);
        assert!(h.windows(2).all(|w| w[1].best_phi <= w[0].best_phi));

        let drift = std::fs::read(a.join(&l.drift_csv)).unwrap();
        let d: Vec<DriftRow> = from_csv(&drift).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(to_csv(&d).unwrap(), drift);
    }
    assert!(a.join("convergence_IO.svg").exists());
    assert!(!a.join("convergence_LS.csv").exists());
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("run_meta.json")).unwrap()).unwrap();
    assert!(meta["wall_clock_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn best_design_reevaluates_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny(tmp.path(), "");
    let out = tmp.path().join("opt");
    run(&["optimize", "--out", out.to_str().unwrap()], Some(&cfg));
    let r = report(&out);
    for l in &r.levels {
        let ids: Vec<String> = l.design.to_flat().iter().map(u32::to_string).collect();
        let single = tiny_at(tmp.path(), &format!("[\"{}\"]", l.level.tag()), "");
        let dir = tmp.path().join(format!("re_{}", l.level.tag()));
        let o = run(&["analyze", "--design", &ids.join(","), "--out", dir.to_str().unwrap()], Some(&single));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(report(&dir).levels[0].report, l.report);
    }
}

#[test]
fn divergence_with_abort_policy_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny(tmp.path(), "[limits]\nelastic_drift = 1e-12\n");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("seed = 11\n", "seed = 11\nabort_on_divergence = true\n");
    let cfg = write(tmp.path(), "abort.toml", &text);
    let out = tmp.path().join("o");
    let o = run(&["optimize", "--out", out.to_str().unwrap()], Some(&cfg));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("report.json").exists());

    let text = std::fs::read_to_string(&cfg).unwrap().replace("abort_on_divergence = true\n", "");
    let cfg = write(tmp.path(), "flag.toml", &text);
    let o = run(&["optimize", "--out", out.to_str().unwrap()], Some(&cfg));
    assert_eq!(o.status.code(), Some(1));
    assert!(report(&out).levels.iter().all(|l| l.optimization.as_ref().unwrap().diverged));
}

#[test]
fn report_rerenders_plots_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny(tmp.path(), "");
    let out = tmp.path().join("opt");
    run(&["optimize", "--out", out.to_str().unwrap()], Some(&cfg));
    let svg = out.join("convergence_CP.svg");
    let before = std::fs::read(&svg).unwrap();
    std::fs::remove_file(&svg).unwrap();
    let o = run(&["report", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&svg).unwrap(), before);
    let empty = tmp.path().join("nothing");
    std::fs::create_dir_all(&empty).unwrap();
    assert_eq!(run(&["report", "--out", empty.to_str().unwrap()], None).status.code(), Some(4));
}

#[test]
fn data_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().arg("validate").env("FRAME_PBO_DATA", fixtures()).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5 beams, 5 columns, 3 walls"));
    let missing = tmp.path().join("absent");
    let o = bin().arg("validate").env("FRAME_PBO_DATA", &missing).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}
