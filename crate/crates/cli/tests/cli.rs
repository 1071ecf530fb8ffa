use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use brwlab::{run_experiment, CliError, ExperimentConfig, RunManifest, EXIT_CONFIG, EXIT_CONSISTENCY, EXIT_RESOURCE};

fn brwlab(args: &[&str], out_base: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brwlab"))
        .args(args)
        .env("BRWLAB_OUT", out_base)
        .output()
        .expect("binary runs")
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn without_clock(mut m: RunManifest) -> RunManifest {
    m.started_unix_seconds = 0;
    m.wall_clock_seconds = 0.0;
    m
}

const SIMULATE: &str = "
experiment = simulate
graph = product(t(3), z)
kernel = product(1/2: simple@1, 1/2: simple@2)
offspring = critical
generations = 25
replications = 4
seed = 9
";

#[test]
fn preset_listing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = brwlab(&["presets"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().filter_map(|l| l.split_whitespace().next()).collect();
    assert!(names.len() >= 11);
    for expected in ["hammock-one-end", "exponent-additivity", "t3xz-critical-ends", "t3xt3-purple", "glue-remark"] {
        assert!(names.contains(&expected), "{expected} missing");
    }
}

#[test]
fn malformed_kernel_is_a_config_error_without_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, SIMULATE.replace("simple@2)", "simpel@2)")).unwrap();
    let out_dir = tmp.path().join("out");
    let out = brwlab(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(!out_dir.exists());

    let out = brwlab(&["ends", "--preset", "no-such-preset"], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let out = brwlab(&["purple", "--preset", "t3xz-critical-ends"], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 1);
}

#[test]
fn equal_seeds_give_identical_files_and_replay_reproduces_them() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("sim.cfg");
    fs::write(&cfg_path, SIMULATE).unwrap();
    let dirs: Vec<_> = (0..2).map(|i| tmp.path().join(format!("run{i}"))).collect();
    for d in &dirs {
        let out = brwlab(
            &["simulate", "--config", cfg_path.to_str().unwrap(), "--out", d.to_str().unwrap()],
            tmp.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = csv_files(&dirs[0]);
    assert_eq!(first.len(), 4);
    assert_eq!(first, csv_files(&dirs[1]));
    let manifests: Vec<_> = dirs
        .iter()
        .map(|d| without_clock(RunManifest::read(&d.join("manifest.json")).unwrap()))
        .collect();
    assert_eq!(manifests[0], manifests[1]);
    assert_eq!(
        fs::read(dirs[0].join("aggregate.json")).unwrap(),
        fs::read(dirs[1].join("aggregate.json")).unwrap()
    );

    let replayed = tmp.path().join("replayed");
    let manifest = dirs[0].join("manifest.json");
    let out = brwlab(&["replay", manifest.to_str().unwrap(), "--out", replayed.to_str().unwrap()], tmp.path());
    assert!(out.status.success());
    assert_eq!(csv_files(&replayed), first);

    let other = tmp.path().join("other");
    let out = brwlab(
        &["simulate", "--config", cfg_path.to_str().unwrap(), "--seed", "10", "--out", other.to_str().unwrap()],
        tmp.path(),
    );
    assert!(out.status.success());
    assert_ne!(csv_files(&other), first);
    assert_eq!(RunManifest::read(&other.join("manifest.json")).unwrap().seed, 10);
}

#[test]
fn default_output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = brwlab(&["return-series", "--preset", "hammock-series"], tmp.path());
    assert!(out.status.success());
    let series = fs::read_to_string(tmp.path().join("hammock-series-seed1").join("series.csv")).unwrap();
    let p2 = series.lines().nth(3).unwrap();
    assert!(p2.starts_with("2,") && p2.ends_with(",31/210"), "{p2}");
}

#[test]
fn truncation_is_a_resource_exit_with_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("grow.cfg");
    fs::write(
        &cfg_path,
        "experiment = simulate\ngraph = t(3)\nkernel = simple\noffspring = const(2)\ngenerations = 20\npopulation_cap = 1000\n",
    )
    .unwrap();
    let dir = tmp.path().join("out");
    let out = brwlab(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", dir.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_RESOURCE));
    let m = RunManifest::read(&dir.join("manifest.json")).unwrap();
    assert_eq!(m.status, "truncated");
    assert_eq!(m.truncations.len(), 1);
    assert_eq!(m.truncations[0].generation, Some(9));
    let populations = fs::read_to_string(dir.join("populations.csv")).unwrap();
    assert_eq!(populations.lines().count(), 1 + 10);
}

#[test]
fn runtime_errors_land_in_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // the simple walk on Z has rho = 1, so no critical law exists
    let cfg = ExperimentConfig::parse("experiment = ends\ngraph = z\nkernel = simple\noffspring = critical\n").unwrap();
    let outcome = run_experiment(&cfg, tmp.path()).unwrap();
    assert_eq!(outcome.exit_code, EXIT_CONFIG);
    let m = RunManifest::read(&tmp.path().join("manifest.json")).unwrap();
    assert_eq!(m.status, "error");
    assert!(m.error.unwrap().message.contains("rho"));
    assert_eq!(m.rho.unwrap().value, 1.0);
    assert!(m.files.is_empty());
}

#[test]
fn exit_codes_by_error_family() {
    use brwlab_core::Error;
    assert_eq!(CliError::Config("x".into()).exit_code(), EXIT_CONFIG);
    assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), EXIT_CONFIG);
    assert_eq!(CliError::from(Error::Resource("x".into())).exit_code(), EXIT_RESOURCE);
    assert_eq!(CliError::from(Error::Consistency("x".into())).exit_code(), EXIT_CONSISTENCY);
}

#[test]
fn every_experiment_kind_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let t3xz = "graph = product(t(3), z)\nkernel = product(1/2: simple@1, 1/2: simple@2)\n";
    let cases = [
        ("return-series", "horizon = 40\nmode = rational\n", vec!["series.csv"]),
        ("spectral-fit", "horizon = 800\ndirichlet_radii = 2, 4\n", vec!["fit.csv", "dirichlet.csv"]),
        ("criticality-sum", "horizon = 800\n", vec!["sums.csv"]),
        ("two-walk-sum", "horizon = 60\ntarget = w:0,z:1\n", vec!["sums.csv"]),
        ("simulate", "offspring = critical\ngenerations = 10\n", vec!["populations.csv", "visited.csv", "edges.csv", "final.csv"]),
        ("many-to-one", "offspring = critical\ngenerations = 3\nreplications = 200\ntargets = w:,z:0; w:0,z:1\n", vec!["many_to_one.csv"]),
        ("purple", "offspring = critical\nhorizons = 5, 10\nreplications = 3\n", vec!["purple.csv"]),
        ("ends", "offspring = critical\ngenerations = 10\nradii = 1, 2\nreplications = 3\n", vec!["ends.csv"]),
        ("fiber", "offspring = critical\ngenerations = 10\nreplications = 3\nfiber = fiber(1, w:)\n", vec!["fiber.csv", "fiber_hits.csv"]),
        ("embedded-gw", "offspring = const(1)\nlag = 2\ngenerations = 4\nreplications = 50\n", vec!["gw.csv"]),
    ];
    for (kind, extra, files) in cases {
        let cfg = ExperimentConfig::parse(&format!("experiment = {kind}\n{t3xz}{extra}")).unwrap();
        let dir = tmp.path().join(kind);
        let outcome = run_experiment(&cfg, &dir).unwrap();
        assert_eq!(outcome.exit_code, 0, "{kind}: {:?}", outcome.manifest.error);
        for file in files {
            let text = fs::read_to_string(dir.join(file)).unwrap();
            assert!(text.lines().count() >= 2, "{kind}/{file} is empty");
        }
        assert!(dir.join("aggregate.json").exists());
    }
}
