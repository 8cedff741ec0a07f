use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = "\
experiment = regress
master_seed = 3
seeds = 2
n.ladder = 128, 256, 512, 1024
k.rule = power
k.exponent = 2/3
density.kind = uniform-box
density.dim = 1
noise.kind = gaussian
noise.scale = 0.1
field.kind = tent
probes.resolution = 65
";

fn knnrate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knnrate"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let a = knnrate(&["regress", "--config", &cfg, "--quiet"]);
    let b = knnrate(&["regress", "--config", &cfg, "--quiet"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout)
        .starts_with("experiment,n,k,seed,quantity,value,bound,valid_k,ms\n"));
    let c = knnrate(&["regress", "--config", &cfg, "--quiet", "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn run_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let records = dir.path().join("r.csv").display().to_string();
    let fits = dir.path().join("fit.csv").display().to_string();
    assert!(
        knnrate(&["regress", "--config", &cfg, "--out", &records, "--quiet"])
            .status
            .success()
    );
    for _ in 0..2 {
        let out = knnrate(&[
            "fit",
            &records,
            "--quantity",
            "sup_error",
            "--out",
            &fits,
            "--quiet",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let text = fs::read_to_string(&fits).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "experiment,quantity,rungs,slope,intercept,slope_stderr,residual_rms"
    );
    assert!(lines[1].starts_with("regress,sup_error,4,"));
    assert_eq!(lines[1], lines[2]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.cfg").display().to_string();
    let out = knnrate(&["regress", "--config", &missing]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.cfg"));
    let bad = write_config(dir.path(), &format!("{CONFIG}field.bogus = 1\n"));
    let out = knnrate(&["regress", "--config", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.cfg:13"));
    let cfg = write_config(dir.path(), CONFIG);
    assert_eq!(
        knnrate(&["maxima", "--config", &cfg]).status.code(),
        Some(1)
    );
    assert_eq!(knnrate(&["regress"]).status.code(), Some(1));
    assert_eq!(knnrate(&["--help"]).status.code(), Some(0));
    let few = write_config(
        dir.path(),
        &CONFIG.replace("128, 256, 512, 1024", "128, 256"),
    );
    let records = dir.path().join("few.csv").display().to_string();
    assert!(
        knnrate(&["regress", "--config", &few, "--out", &records, "--quiet"])
            .status
            .success()
    );
    assert_eq!(
        knnrate(&["fit", &records, "--quantity", "sup_error"])
            .status
            .code(),
        Some(2)
    );
}
