mod common;

use nnsr_core::imaging::{psnr, read_image, write_image, BitDepth, ImagePlane};
use nnsr_core::matrix::{load_csv, save_csv};
use nnsr_core::solver::nnsr_solve;
use nnsr_core::synth::{generate, rre, run_sweep, SweepAxis, SweepSpec, SyntheticSpec};
use nnsr_core::{Config, Error, Matrix};
use rand::Rng;
use rand_distr::StandardNormal;
use tempfile::TempDir;

fn spec(m: usize, n: usize, rank: usize, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        m,
        n,
        rank,
        gamma: 0.8,
        alpha: 0.2,
        beta: 100.0,
        seed,
    }
}

#[test]
fn csv_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("a.csv");
    let a = Matrix::from_row_major(2, 3, vec![1.5, -2.0, 1e-300, 3.0, 0.1, 7.25]).unwrap();
    save_csv(&a, &path).unwrap();
    assert_eq!(load_csv::<f64>(&path).unwrap(), a);

    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,2\n3\n").unwrap();
    assert!(load_csv::<f64>(&ragged).is_err());
    assert!(matches!(load_csv::<f64>(dir.path().join("missing.csv")), Err(Error::Io(_))));
}

#[test]
fn image_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let mut r = common::rng(7);
    for depth in [BitDepth::Eight, BitDepth::Sixteen] {
        let px: Vec<f64> = (0..35 * 21).map(|_| r.gen()).collect();
        let plane = ImagePlane::new(35, 21, px, depth).unwrap();
        let path = dir.path().join(format!("img{}.pgm", depth.bits()));
        write_image(&plane, &path).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.source_depth(), depth);
        let step = 1.0 / depth.maxval() as f64;
        for (a, b) in plane.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= step);
        }
    }
}

#[test]
fn single_cell_row_is_direct_solve() {
    let base = spec(40, 35, 3, 12);
    let sweep = SweepSpec {
        axis: SweepAxis::Alpha,
        values: vec![0.2],
        repeats: 1,
        base,
        solver: Config::for_shape(40, 35),
        record_timing: false,
    };
    let rows = run_sweep(&sweep, Some(1)).unwrap();
    let inst = generate::<f64>(&base).unwrap();
    let res = nnsr_solve(&inst.observed, &inst.mask, &sweep.solver).unwrap();
    assert_eq!(rows[0].mean_rre, rre(&inst.truth, &res.completed).unwrap());
    assert_eq!(rows[0].mean_iters, res.iterations() as f64);
}

#[test]
fn sweep_report_independent_of_worker_count() {
    let sweep = SweepSpec {
        axis: SweepAxis::Rank,
        values: vec![3.0, 1.0, 2.0],
        repeats: 2,
        base: spec(30, 30, 1, 5),
        solver: Config::for_shape(30, 30),
        record_timing: false,
    };
    let one = run_sweep(&sweep, Some(1)).unwrap();
    let four = run_sweep(&sweep, Some(4)).unwrap();
    assert_eq!(one, four);
    let values: Vec<f64> = one.iter().map(|r| r.value).collect();
    assert_eq!(values, vec![1.0, 2.0, 3.0]);
}

#[test]
fn sweep_names_failing_cell() {
    let sweep = SweepSpec {
        axis: SweepAxis::Gamma,
        values: vec![0.5],
        repeats: 1,
        base: spec(20, 20, 2, 1),
        solver: Config {
            rho0: Some(1e300),
            mu: 1e10,
            ..Config::for_shape(20, 20)
        },
        record_timing: false,
    };
    match run_sweep(&sweep, Some(1)) {
        Err(Error::Cell { axis, value, repeat, source }) => {
            assert_eq!((axis.as_str(), value, repeat), ("gamma", 0.5, 0));
            assert!(matches!(*source, Error::Divergence { .. }));
        }
        other => panic!("expected a cell error, got {other:?}"),
    }
}

#[test]
fn error_shrinks_as_observation_grows() {
    let sweep = SweepSpec {
        axis: SweepAxis::Gamma,
        values: vec![0.9, 0.7, 0.5],
        repeats: 2,
        base: spec(200, 200, 5, 3),
        solver: Config::for_shape(200, 200),
        record_timing: false,
    };
    let rows = run_sweep(&sweep, None).unwrap();
    // Rows come back ordered by γ ascending.
    for w in rows.windows(2) {
        assert!(w[1].mean_rre <= 1.2 * w[0].mean_rre, "{} -> {}", w[0].mean_rre, w[1].mean_rre);
    }
}

#[test]
fn psnr_falls_with_noise_variance() {
    let mut r = common::rng(21);
    let px: Vec<f64> = (0..48 * 48).map(|_| r.gen_range(0.2..0.8)).collect();
    let reference = ImagePlane::new(48, 48, px, BitDepth::Eight).unwrap();
    let noise: Vec<f64> = (0..48 * 48).map(|_| r.sample(StandardNormal)).collect();
    let scores: Vec<f64> = [0.01, 0.03, 0.09]
        .iter()
        .map(|sd| {
            let noisy = reference
                .pixels()
                .iter()
                .zip(&noise)
                .map(|(p, z)| (p + sd * z).clamp(0.0, 1.0))
                .collect();
            let test = ImagePlane::new(48, 48, noisy, BitDepth::Eight).unwrap();
            psnr(&reference, &test, 1.0).unwrap()
        })
        .collect();
    assert!(scores[0] > scores[1] && scores[1] > scores[2], "{scores:?}");
}
