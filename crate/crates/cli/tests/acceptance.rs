//! Acceptance criterion 14: a run repeated with the same config produces
//! byte-identical data files (summary timestamps aside), at any thread
//! count. Exercised through the real binary.

use std::path::Path;
use std::process::Command;

fn run_binary(args: &[&str]) {
    let exe = env!("CARGO_BIN_EXE_anderson");
    let out = Command::new(exe).args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "anderson {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("missing {name} in {}: {e}", dir.display()))
}

fn strip_timestamp(summary: &str) -> String {
    summary
        .lines()
        .filter(|l| !l.contains("timestamp_unix"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn compare_runs(a: &Path, b: &Path, data_files: &[&str]) {
    for name in data_files {
        let fa = read(a, name);
        let fb = read(b, name);
        assert!(
            fa == fb,
            "data file {name} differs between identical runs ({} vs {})",
            a.display(),
            b.display()
        );
    }
    assert_eq!(
        strip_timestamp(&read(a, "summary.json")),
        strip_timestamp(&read(b, "summary.json")),
        "summaries differ beyond the timestamp"
    );
}

#[test]
fn criterion_14_reproducibility() {
    let base = tempfile::tempdir().expect("tempdir");
    let config_path = base.path().join("weyl.json");
    let make_config = |out_dir: &Path| {
        format!(
            r#"{{"experiment":"weyl","n":16,"eps":0.25,"base_seed":9,"seed_count":3,"lambda_max":12,"output_dir":{:?}}}"#,
            out_dir.to_str().unwrap()
        )
    };
    let dirs: Vec<_> = (0..3).map(|i| base.path().join(format!("run{i}"))).collect();
    let weyl_files = ["weyl_counts.csv", "weyl_slopes.csv", "config_echo.json"];

    // same config, default threads, twice
    for dir in &dirs[..2] {
        std::fs::write(&config_path, make_config(dir)).unwrap();
        run_binary(&["run", config_path.to_str().unwrap()]);
    }
    compare_runs(&dirs[0], &dirs[1], &weyl_files);

    // explicit single-thread pool must agree with the default pool
    std::fs::write(&config_path, make_config(&dirs[2])).unwrap();
    run_binary(&["--threads", "1", "run", config_path.to_str().unwrap()]);
    compare_runs(&dirs[0], &dirs[2], &weyl_files);

    // a second experiment with heavier internal parallelism
    let gamma_dirs: Vec<_> = (0..2).map(|i| base.path().join(format!("gamma{i}"))).collect();
    for (i, dir) in gamma_dirs.iter().enumerate() {
        let cfg = base.path().join(format!("gamma{i}.json"));
        std::fs::write(
            &cfg,
            format!(
                r#"{{"experiment":"gamma-diagnostics","n":16,"eps":0.25,"s":0.0625,"base_seed":4,"seed_count":2,"output_dir":{:?}}}"#,
                dir.to_str().unwrap()
            ),
        )
        .unwrap();
        let threads = if i == 0 { "2" } else { "4" };
        run_binary(&["--threads", threads, "run", cfg.to_str().unwrap()]);
    }
    compare_runs(
        &gamma_dirs[0],
        &gamma_dirs[1],
        &["gamma.csv", "phi_decay.csv", "corrector_swap.csv"],
    );

    println!("[PASS] criterion 14: byte-identical reruns across thread counts (weyl + gamma-diagnostics)");
}
