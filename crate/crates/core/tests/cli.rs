use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_seasonal-ruin");

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(
        &path,
        format!(
            "schema_version = 1\n{body}\n[outputs]\ntable_path = \"{name}.csv\"\nreport_path = \"{name}.json\"\n"
        ),
    )
    .unwrap();
    path
}

const BI_POISSON: &str = "u_max = 10
t_values = [1, 5]
claims = [{ kind = \"poisson\", lambda = 0.3 }, { kind = \"poisson\", lambda = 1.4 }]";

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ex1",
        &format!("{BI_POISSON}\n[oracle]\nmc_paths = 5000\nseed = 11\nenum_cap = 100000"),
    );
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let status = Command::new(BIN).arg("run").arg(&cfg).status().unwrap();
        assert!(status.success());
        let csv = std::fs::read(dir.path().join("ex1.csv")).unwrap();
        let json = std::fs::read(dir.path().join("ex1.json")).unwrap();
        outputs.push((csv, json));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bi_poisson_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ex1", BI_POISSON);
    let out = Command::new(BIN)
        .arg("run")
        .arg(&cfg)
        .arg("--pretty")
        .output()
        .unwrap();
    assert!(out.status.success());
    let pretty = String::from_utf8(out.stdout).unwrap();
    assert!(pretty.lines().nth(1).unwrap().contains("0.202"));

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("ex1.json")).unwrap()).unwrap();
    let root = report["roots"]["roots"][0]["value"][0].as_f64().unwrap();
    assert!((root + 0.3244096519).abs() < 1e-9);
    let phi0 = report["phi"][0].as_f64().unwrap();
    assert!((phi0 - 0.2023378868).abs() < 1e-9);
    assert_eq!(report["classification"]["tag"], "NetProfit");

    let csv = std::fs::read_to_string(dir.path().join("ex1.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("u,phi_inf,phi_T1,phi_T5"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ex1", BI_POISSON);
    let out = dir.path().join("custom.csv");
    let status = Command::new(BIN)
        .args(["run", cfg.to_str().unwrap(), "--u-max", "3", "--t", "2,4"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().next(), Some("u,phi_inf,phi_T2,phi_T4"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn supercritical_model_gives_zero_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sup",
        "u_max = 4\nclaims = [{ kind = \"table\", weights = [0, 0, 1] }, { kind = \"table\", weights = [0, 0, 1] }]",
    );
    assert!(Command::new(BIN)
        .arg("run")
        .arg(&cfg)
        .status()
        .unwrap()
        .success());
    let csv = std::fs::read_to_string(dir.path().join("sup.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",0"), "{line}");
    }
    let report = std::fs::read_to_string(dir.path().join("sup.json")).unwrap();
    assert!(report.contains("Supercritical"));
}

#[test]
fn exit_codes_and_error_names() {
    let dir = tempfile::tempdir().unwrap();
    let bad_schema = write_config(dir.path(), "bad", "u_max = 3\nclaims = []");
    let out = Command::new(BIN)
        .arg("run")
        .arg(&bad_schema)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ConfigError"));

    let missing = Command::new(BIN)
        .args(["run", "/no/such/file.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    // lattice law: a root sits on the unit circle at s = -1
    let lattice = write_config(
        dir.path(),
        "lattice",
        "u_max = 3\nclaims = [{ kind = \"table\", weights = [0.6, 0, 0.4] }, { kind = \"table\", weights = [0.6, 0, 0.4] }]",
    );
    let out = Command::new(BIN).arg("run").arg(&lattice).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("RootCountMismatch"));
}

#[test]
fn shipped_configs_run() {
    let dir = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut count = 0;
    for entry in std::fs::read_dir(configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let out = dir.path().join("t.csv");
        let status = Command::new(BIN)
            .arg("run")
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .arg("--report")
            .arg(dir.path().join("r.json"))
            .status()
            .unwrap();
        assert!(status.success(), "{}", path.display());
        count += 1;
    }
    assert!(count >= 4);
}
