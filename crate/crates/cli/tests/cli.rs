use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn partinv(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_partinv"));
    cmd.args(args).env_remove("PARTINV_OUT_DIR");
    if let Some(dir) = out {
        cmd.env("PARTINV_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest(o: &Output) -> serde_json::Value {
    let line = stdout(o).lines().next().expect("manifest line").to_string();
    serde_json::from_str(&line).expect("manifest is JSON")
}

#[test]
fn corr_haar_filter_writes_square_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = partinv(&["corr", "--ensemble", "haar-filter", "--n", "256"], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("corr_haar-filter.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 256);
    assert!(rows.iter().all(|r| r.split(',').count() == 256));
    assert!(dir.path().join("corr_haar-filter.svg").exists());
    assert_eq!(manifest(&o)["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn delta_kernel_gives_sampled_basis_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = partinv(&["corr", "--ensemble", "haar-filter", "--n", "16", "--kernel", "1", "--out", out], None);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("corr_haar-filter.csv")).unwrap();
    let m: Vec<Vec<f64>> = csv
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    // even-sample restriction of an orthonormal basis: half the energy stays on the diagonal
    let trace: f64 = (0..16).map(|i| m[i][i]).sum();
    assert!((trace - 8.0).abs() < 1e-5, "{trace}");
}

#[test]
fn unknown_ensemble_is_a_usage_error() {
    let o = partinv(&["corr", "--ensemble", "fourier"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn recover_easy_gaussian() {
    let o = partinv(
        &["recover", "--method", "partinv", "--ensemble", "gaussian", "--n", "256", "--delta", "0.9", "--rho", "0.1", "--seed", "7"],
        None,
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("K = 23"), "{text}");
    assert!(text.contains("success = true"), "{text}");
    assert_eq!(manifest(&o)["seed"], 7);
}

#[test]
fn zero_rho_is_a_usage_error() {
    let o = partinv(&["recover", "--delta", "0.5", "--rho", "0"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn recover_wavelet_tree() {
    let o = partinv(&["recover", "--method", "partinv-wavelet", "--delta", "14/16", "--trees", "1", "--seed", "3"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("K = 21"), "{text}");
    assert!(text.contains("success = true"), "{text}");
}

#[test]
fn recover_with_custom_mask() {
    // twelve of sixteen pixels sampled: M = 768
    let mask = "1,1,1,1,1,0,1,0,1,1,1,1,1,0,1,0";
    let o = partinv(&["recover", "--method", "partinv-wavelet", "--mask", mask, "--trees", "1"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(manifest(&o)["m"], 768);

    let bad = partinv(&["recover", "--method", "partinv-wavelet", "--mask", "1,0,1", "--trees", "1"], None);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn phase_writes_one_csv_and_svg_per_method_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["phase", "--ensemble", "gaussian", "--methods", "partinv,cosamp", "--trials", "2", "--seed", "1"];
    let oa = partinv(&args, Some(a.path()));
    let ob = partinv(&args, Some(b.path()));
    assert!(oa.status.success() && ob.status.success());
    for name in ["gaussian_partinv", "gaussian_cosamp"] {
        let csv_a = fs::read(a.path().join(format!("{name}.csv"))).unwrap();
        let csv_b = fs::read(b.path().join(format!("{name}.csv"))).unwrap();
        assert_eq!(csv_a, csv_b);
        assert_eq!(String::from_utf8(csv_a).unwrap().lines().count(), 82);
        assert!(a.path().join(format!("{name}.svg")).exists());
    }
    assert_eq!(manifest(&oa)["outputs"].as_array().unwrap().len(), 4);
}

#[test]
fn phase_block_with_l_rule() {
    let dir = tempfile::tempdir().unwrap();
    let o = partinv(
        &["phase", "--ensemble", "block", "--methods", "partinv", "--trials", "1", "--l-rule", "max08"],
        Some(dir.path()),
    );
    assert!(o.status.success());
    assert!(dir.path().join("block_partinv-max08.csv").exists());
}

#[test]
fn phase_wavelet_uses_tabulated_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let o = partinv(&["phase", "--ensemble", "wavelet", "--trials", "1", "--trees", "1,7"], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("wavelet_partinv-wavelet.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 14);
    // 7 trees do not fit in the 128 measurements of the sparsest pattern
    assert!(rows[1].starts_with("0.1250,1.1484,partinv-wavelet,0,0,"), "{}", rows[1]);
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let o = partinv(&["corr", "--ensemble", "haar-filter", "--n", "8"], Some(&blocker.join("sub")));
    assert!(!o.status.success());
}
