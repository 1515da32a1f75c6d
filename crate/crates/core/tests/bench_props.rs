mod common;

use common::check_tree;
use skelfmm::bench::{generate_points, run_benchmark, BenchConfig, BenchReport, Distribution};
use skelfmm::{build_balanced_tree, FmmError, KernelFamily};

#[test]
fn laplace2d_report_is_accurate() {
    let mut cfg = BenchConfig::new(KernelFamily::Laplace2d, Distribution::Square, 2000, 1e-6);
    cfg.leaf_size = 64;
    cfg.n_check = 2000;
    let r = run_benchmark(&cfg).unwrap();
    assert_eq!(r.n_checked, 2000);
    assert!(r.relerr.unwrap() <= 1e-5);
    assert!(r.t_tree >= 0.0 && r.t_skel >= 0.0 && r.t_apply >= 0.0);
    assert!(r.k_max > 0 && r.m_proj > 0);
    assert_eq!(r.boxes_per_level.iter().sum::<usize>(), r.n_boxes);
    assert_eq!(r.boxes_per_level.len() as u32, r.depth + 1);
}

#[test]
fn report_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut cfg = BenchConfig::new(KernelFamily::Helmholtz3d, Distribution::Sphere, 1500, 1e-5);
    cfg.kappa = Some(3.0);
    cfg.leaf_size = 32;
    cfg.out = Some(out.clone());
    let r = run_benchmark(&cfg).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let parsed: BenchReport = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, r);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "N", "b", "k_max", "T_tree", "T_skel", "M_proj", "T_apply", "relerr", "L",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn single_point_skips_the_check() {
    let cfg = BenchConfig::new(KernelFamily::Laplace3d, Distribution::Cube, 1, 1e-6);
    let r = run_benchmark(&cfg).unwrap();
    assert_eq!(r.relerr, None);
    assert_eq!(r.n_checked, 0);
    assert!(!r.warnings.is_empty());
}

#[test]
fn no_check_means_no_relerr() {
    let mut cfg = BenchConfig::new(KernelFamily::Laplace2d, Distribution::Annulus, 500, 1e-6);
    cfg.n_check = 0;
    assert_eq!(run_benchmark(&cfg).unwrap().relerr, None);
}

#[test]
fn seed_changes_points_not_quality() {
    let eps = 1e-6;
    let mut seen = Vec::new();
    for seed in [1, 2, 3] {
        let p = generate_points(Distribution::Annulus, 3000, seed).unwrap();
        check_tree(&build_balanced_tree(&p, 32).unwrap(), &p).unwrap();
        let mut cfg = BenchConfig::new(KernelFamily::Laplace2d, Distribution::Annulus, 3000, eps);
        cfg.leaf_size = 32;
        cfg.seed = seed;
        let r = run_benchmark(&cfg).unwrap();
        assert!(
            r.relerr.unwrap() <= 10.0 * eps,
            "seed {seed}: {:?}",
            r.relerr
        );
        seen.push(p.coords().to_vec());
    }
    assert_ne!(seen[0], seen[1]);
    assert_ne!(seen[1], seen[2]);
}

#[test]
fn csv_points_override_generator() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.csv");
    let p = generate_points(Distribution::Cube, 800, 4).unwrap();
    let mut text = String::from("# x,y,z\n");
    for x in p.iter() {
        text.push_str(&format!("{:e},{:e},{:e}\n", x[0], x[1], x[2]));
    }
    std::fs::write(&path, text).unwrap();
    let mut cfg = BenchConfig::new(KernelFamily::Laplace3d, Distribution::Cube, 1, 1e-6);
    cfg.points_file = Some(path);
    cfg.leaf_size = 16;
    let r = run_benchmark(&cfg).unwrap();
    assert_eq!(r.n, 800);
    assert!(r.relerr.unwrap() <= 1e-5);
}

#[test]
fn failures_carry_stage_labels() {
    let mut cfg = BenchConfig::new(KernelFamily::Laplace2d, Distribution::Square, 100, 1e-6);
    cfg.points_file = Some("/nonexistent/points.csv".into());
    let err = run_benchmark(&cfg).unwrap_err();
    assert!(
        matches!(
            err,
            FmmError::Stage {
                stage: "points",
                ..
            }
        ),
        "{err}"
    );
    assert!(err.to_string().starts_with("points:"));

    let cfg = BenchConfig::new(KernelFamily::Helmholtz2d, Distribution::Square, 100, 1e-6);
    assert!(matches!(
        run_benchmark(&cfg),
        Err(FmmError::Stage {
            stage: "config",
            ..
        })
    ));
}
