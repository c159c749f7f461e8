use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use nonprob_extend::cli::{run_command, AlphaChoice, Command, OutputFormat, RunConfig};
use nonprob_extend::io::{load_csv, load_scenario, read_csv_dataset, write_csv, NamedDataset};
use nonprob_extend::simulation::gen_scenario;
use nonprob_extend::ScenarioSpec;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_nonprob-extend");

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write_samples(dir: &Path, seed: u64) -> (PathBuf, PathBuf) {
    let data = gen_scenario(&ScenarioSpec::setting_1().with_sizes(40, 60, 60).with_seed(seed)).unwrap();
    let predictors: Vec<String> = (1..=4).map(|j| format!("x{j}")).collect();
    let prob = dir.join("prob.csv");
    let nonprob = dir.join("nonprob.csv");
    for (path, ds) in [(&prob, data.prob_sample), (&nonprob, data.nonprob_sample)] {
        let named = NamedDataset {
            dataset: ds,
            response: "y".into(),
            predictors: predictors.clone(),
        };
        write_csv(path, &named).unwrap();
    }
    (prob, nonprob)
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn run_bin(args: &[&str]) -> std::process::Output {
    Process::new(BIN).args(args).output().unwrap()
}

#[test]
fn loads_small_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(&path, "y,x\n1,0\n3,1\n5,2.5\n").unwrap();
    let d = load_csv(&path, "y").unwrap();
    assert_eq!((d.n(), d.p()), (3, 1));
    assert_eq!(d.responses().as_slice(), &[1.0, 3.0, 5.0]);
    assert_eq!(d.predictors().as_slice(), &[0.0, 1.0, 2.5]);
}

#[test]
fn response_column_can_be_anywhere() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(&path, "a,target,b\n1,10,2\n3,11,4\n5,12,7\n6,13,1\n").unwrap();
    let named = read_csv_dataset(&path, "target").unwrap();
    assert_eq!(named.predictors, vec!["a", "b"]);
    assert_eq!(named.dataset.predictors().row(1).iter().copied().collect::<Vec<_>>(), vec![3.0, 4.0]);
}

#[test]
fn blank_cell_error_names_row_and_column() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("d.csv");
    let mut body = String::from("y,x1,x2\n");
    for i in 1..=9 {
        if i == 7 {
            body.push_str("2.0,,1.0\n");
        } else {
            body.push_str(&format!("{i},{},{}\n", i * 2, i % 3));
        }
    }
    fs::write(&path, body).unwrap();
    let err = load_csv(&path, "y").unwrap_err();
    let msg = err.to_string();
    assert_eq!(err.code(), "E_CSV");
    assert!(msg.contains("row 7") && msg.contains("'x1'") && msg.contains("blank"), "{msg}");
}

#[test]
fn malformed_files_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("text.csv", "y,x\n1,2\n3,abc\n4,5\n", "non-numeric"),
        ("noresp.csv", "a,b\n1,2\n3,4\n5,6\n", "not found"),
        ("short.csv", "y,x\n1,2\n3,4\n", "need at least"),
        ("empty.csv", "", "header"),
    ];
    for (name, body, needle) in cases {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        let msg = load_csv(&path, "y").unwrap_err().to_string();
        assert!(msg.contains(needle), "{name}: {msg}");
    }
}

#[test]
fn csv_round_trip_is_lossless() {
    let dir = TempDir::new().unwrap();
    let (prob, _) = write_samples(dir.path(), 3);
    let original = gen_scenario(&ScenarioSpec::setting_1().with_sizes(40, 60, 60).with_seed(3))
        .unwrap()
        .prob_sample;
    let reloaded = load_csv(&prob, "y").unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(reloaded.responses().as_slice()), bits(original.responses().as_slice()));
    assert_eq!(bits(reloaded.predictors().as_slice()), bits(original.predictors().as_slice()));
}

#[test]
fn output_headers_match_golden_file() {
    let golden: BTreeMap<String, String> = include_str!("golden/headers.txt")
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(": ").unwrap();
            (k.to_string(), v.to_string())
        })
        .collect();
    let dir = TempDir::new().unwrap();
    let (prob, nonprob) = write_samples(dir.path(), 4);

    let mut seen = BTreeMap::new();
    let mut cv = RunConfig::new(Command::Cv, dir.path().join("cv"));
    cv.prob = Some(prob);
    cv.nonprob = Some(nonprob);
    cv.response = Some("y".into());
    let mut sim = RunConfig::new(Command::Simulate, dir.path().join("sim"));
    sim.scenario = Some(scenario_dir().join("setting_b1.cfg"));
    sim.n_datasets = 5;
    sim.n_boot = Some(5);
    for config in [cv, sim] {
        for file in run_command(&config).unwrap().files {
            if file.extension().is_some_and(|e| e == "csv") {
                let stem = file.file_stem().unwrap().to_string_lossy().into_owned();
                let header = fs::read_to_string(&file).unwrap().lines().next().unwrap().to_string();
                seen.insert(stem, header);
            }
        }
    }
    for (table, header) in &golden {
        assert_eq!(seen.get(table), Some(header), "table {table}");
    }
}

#[test]
fn empty_candidate_file_leaves_fit_unchanged() {
    let dir = TempDir::new().unwrap();
    let (prob, _) = write_samples(dir.path(), 5);
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "y,x1,x2,x3,x4\n").unwrap();
    let mut config = RunConfig::new(Command::Extend, dir.path().join("out"));
    config.prob = Some(prob);
    config.nonprob = Some(empty);
    config.response = Some("y".into());
    run_command(&config).unwrap();

    let coef = fs::read_to_string(dir.path().join("out/coefficients.csv")).unwrap();
    let rows: Vec<Vec<&str>> = coef.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let base: Vec<_> = rows.iter().filter(|r| r[0] == "base").map(|r| &r[1..]).collect();
    let ext: Vec<_> = rows.iter().filter(|r| r[0] == "extended").map(|r| &r[1..]).collect();
    assert_eq!(base.len(), 5);
    assert_eq!(base, ext);
    let decisions = fs::read_to_string(dir.path().join("out/decisions.csv")).unwrap();
    assert_eq!(decisions.lines().count(), 1);
}

#[test]
fn json_output_is_valid() {
    let dir = TempDir::new().unwrap();
    let (prob, nonprob) = write_samples(dir.path(), 6);
    let mut config = RunConfig::new(Command::Bootstrap, dir.path().join("out"));
    config.prob = Some(prob);
    config.nonprob = Some(nonprob);
    config.response = Some("y".into());
    config.n_boot = Some(10);
    config.format = OutputFormat::Json;
    run_command(&config).unwrap();
    let coef: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/coefficients.json")).unwrap()).unwrap();
    let rows = coef.as_array().unwrap();
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().any(|r| r["se_method"] == "bootstrap" && r["std_error"].as_f64().unwrap() > 0.0));
}

#[test]
fn robustify_writes_reduced_sample() {
    let dir = TempDir::new().unwrap();
    let (prob, _) = write_samples(dir.path(), 7);
    let mut config = RunConfig::new(Command::Robustify, dir.path().join("out"));
    config.prob = Some(prob.clone());
    config.response = Some("y".into());
    run_command(&config).unwrap();
    let reduced = load_csv(&dir.path().join("out/reduced.csv"), "y").unwrap();
    let original = load_csv(&prob, "y").unwrap();
    let rows: Vec<_> = original.observations().collect();
    assert!(reduced.n() <= original.n());
    assert!(reduced.observations().all(|o| rows.contains(&o)));
}

fn workflows(dir: &Path, prob: &Path, nonprob: &Path, out: &str) -> Vec<Vec<String>> {
    let p = prob.to_str().unwrap().to_string();
    let np = nonprob.to_str().unwrap().to_string();
    let o = |name: &str| dir.join(out).join(name).to_str().unwrap().to_string();
    let scenario = scenario_dir().join("setting_a.cfg").to_str().unwrap().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<String>>();
    vec![
        s(&["extend", "--prob", &p, "--nonprob", &np, "--response", "y", "--seed", "9", "--out", &o("extend")]),
        s(&["cv", "--prob", &p, "--nonprob", &np, "--response", "y", "--seed", "9", "--out", &o("cv")]),
        s(&["bootstrap", "--prob", &p, "--nonprob", &np, "--response", "y", "--n-boot", "20", "--seed", "9", "--out", &o("boot")]),
        s(&["robustify", "--prob", &p, "--response", "y", "--n-boot", "10", "--seed", "9", "--out", &o("rob")]),
        s(&["simulate", "--scenario", &scenario, "--n-datasets", "10", "--cv", "--seed", "9", "--out", &o("sim")]),
        s(&["extend", "--prob", &p, "--nonprob", &np, "--response", "y", "--cv", "--full-grid", "--norm", "slopes", "--format", "json", "--seed", "9", "--out", &o("json")]),
    ]
}

#[test]
fn binary_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (prob, nonprob) = write_samples(dir.path(), 8);
    let first = workflows(dir.path(), &prob, &nonprob, "run1");
    let second = workflows(dir.path(), &prob, &nonprob, "run2");
    for (a, b) in first.iter().zip(&second) {
        for args in [a, b] {
            let out = run_bin(&args.iter().map(String::as_str).collect::<Vec<_>>());
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
        let da = Path::new(a.last().unwrap());
        let db = Path::new(b.last().unwrap());
        let ba = read_dir_bytes(da);
        assert!(!ba.is_empty());
        assert_eq!(ba, read_dir_bytes(db), "{}", a[0]);
    }
}

#[test]
fn binary_reports_machine_readable_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = run_bin(&[
        "extend",
        "--prob",
        missing.to_str().unwrap(),
        "--nonprob",
        missing.to_str().unwrap(),
        "--response",
        "y",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error code=E_CSV origin=cli_io message=\""), "{stderr}");

    let bad_alpha = run_bin(&[
        "simulate",
        "--scenario",
        scenario_dir().join("setting_a.cfg").to_str().unwrap(),
        "--alpha-st",
        "1.5",
        "--out",
        dir.path().join("o2").to_str().unwrap(),
    ]);
    assert!(!bad_alpha.status.success());
    assert!(String::from_utf8_lossy(&bad_alpha.stderr).starts_with("error code=E_DOMAIN"));
}

#[test]
fn library_run_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (prob, nonprob) = write_samples(dir.path(), 10);
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let mut config = RunConfig::new(Command::Extend, dir.path().join(run));
        config.prob = Some(prob.clone());
        config.nonprob = Some(nonprob.clone());
        config.response = Some("y".into());
        config.alphas = AlphaChoice::CrossValidated;
        config.n_boot = Some(10);
        config.seed = Some(42);
        run_command(&config).unwrap();
        outputs.push(read_dir_bytes(&dir.path().join(run)));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn scenario_fixtures_match_presets() {
    let files = [
        ("setting_a", "a"),
        ("setting_b", "b"),
        ("setting_c", "c"),
        ("setting_1", "1"),
        ("setting_2", "2"),
        ("setting_2_sigma4", "2-4"),
        ("setting_3", "3"),
        ("setting_1_inverted_noise", "1-inverted"),
        ("setting_b1", "b1"),
        ("setting_b2", "b2"),
        ("setting_b3", "b3"),
    ];
    for (file, preset) in files {
        let spec = load_scenario(&scenario_dir().join(format!("{file}.cfg"))).unwrap();
        assert_eq!(spec, ScenarioSpec::preset(preset).unwrap(), "{file}");
    }
}
