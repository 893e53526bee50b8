use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn nullform(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nullform"));
    c.args(args).env_remove("NULLFORM_OUT");
    if let Some(p) = env_out {
        c.env("NULLFORM_OUT", p);
    }
    c.output().expect("binary runs")
}

fn scenario(name: &str) -> String {
    repo().join("scenarios").join(format!("{name}.toml")).to_string_lossy().into_owned()
}

fn run_dir(root: &Path, name: &str) -> PathBuf {
    let mut dirs: Vec<_> = fs::read_dir(root)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with(&format!("{name}-")))
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.remove(0)
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn malformed_configs_exit_with_two_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("name = \"x\"\npipeline = \"energy\"\ndim = 1\n[energy]\ncases = \"many\"\n", "energy.cases"),
        ("name = \"x\"\npipeline = \"energy\"\ndim = 4\n[energy]\n", "dim"),
        ("name = \"x\"\npipeline = \"certify\"\ndim = 2\n[potential]\nkey = \"nope\"\n[certify]\nprofiles = [{ kind = \"constant\", value = 1.0 }]\n", "potential.key"),
        ("name = \"x\"\npipeline = \"energy\"\ndim = 1\nspeed = 3\n[energy]\n", "speed"),
    ];
    for (i, (body, field)) in cases.iter().enumerate() {
        let p = tmp.path().join(format!("bad{i}.toml"));
        fs::write(&p, body).unwrap();
        let o = nullform(&["run", p.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));
        assert!(text(&o.stderr).contains(field), "expected `{field}` in {}", text(&o.stderr));
    }
}

#[test]
fn repeated_runs_write_identical_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let cfg = scenario("recover_synthetic_quick");
    assert!(nullform(&["run", &cfg, "--out", out, "--jobs", "1"], None).status.success());
    let dir = run_dir(tmp.path(), "recover_synthetic_quick");
    let first = fs::read(dir.join("summary.json")).unwrap();
    let again = nullform(&["run", &cfg, "--out", out], None);
    assert!(text(&again.stdout).contains("up to date"));
    assert!(nullform(&["run", &cfg, "--out", out, "--force"], None).status.success());
    assert_eq!(first, fs::read(dir.join("summary.json")).unwrap());
}

#[test]
fn compare_accepts_the_golden_and_rejects_a_changed_spacing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let golden = repo().join("goldens/energy_suite");
    assert!(nullform(&["run", &scenario("energy_suite"), "--out", out], None).status.success());
    let dir = run_dir(tmp.path(), "energy_suite");
    let ok = nullform(&["compare", dir.to_str().unwrap(), golden.to_str().unwrap()], None);
    assert!(ok.status.success(), "{}", text(&ok.stdout));

    let body = fs::read_to_string(scenario("energy_suite")).unwrap().replace("dx = 0.02", "dx = 0.025");
    let p = tmp.path().join("perturbed.toml");
    fs::write(&p, body).unwrap();
    let alt = tempfile::tempdir().unwrap();
    assert!(nullform(&["run", p.to_str().unwrap(), "--out", alt.path().to_str().unwrap()], None).status.success());
    let bad = nullform(&["compare", run_dir(alt.path(), "energy_suite").to_str().unwrap(), golden.to_str().unwrap()], None);
    assert_eq!(bad.status.code(), Some(1));
    assert!(text(&bad.stdout).contains("config.energy.dx"), "{}", text(&bad.stdout));
}

#[test]
fn missing_golden_is_explained() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nullform(&["compare", tmp.path().to_str().unwrap(), tmp.path().join("absent").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("does not exist"));
}

#[test]
fn environment_sets_the_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nullform(&["run", &scenario("certify_zero")], Some(tmp.path()));
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(run_dir(tmp.path(), "certify_zero").join("summary.json").exists());
    // --out wins over the environment
    let other = tempfile::tempdir().unwrap();
    assert!(nullform(&["run", &scenario("certify_zero"), "--out", other.path().to_str().unwrap()], Some(tmp.path())).status.success());
    assert!(run_dir(other.path(), "certify_zero").join("summary.json").exists());
}

#[test]
fn catalog_lists_every_key() {
    let o = nullform(&["list-catalog"], None);
    assert!(o.status.success());
    let s = text(&o.stdout);
    for k in ["zero", "bump_linear_u", "gaussian_xy_cubic_u", "radial_bump_2d", "ramp", "certify"] {
        assert!(s.contains(k), "{k}");
    }
}
