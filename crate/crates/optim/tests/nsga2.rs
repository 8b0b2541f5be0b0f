use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sehs_optim::*;

fn brute_front(objs: &[Objectives]) -> Vec<usize> {
    (0..objs.len())
        .filter(|&i| !(0..objs.len()).any(|j| dominates(&objs[j], &objs[i])))
        .collect()
}

#[test]
fn first_front_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let objs: Vec<Objectives> = (0..50).map(|_| [rng.random(), rng.random()]).collect();
        let fronts = fast_nondominated_sort(&objs);
        assert_eq!(fronts[0], brute_front(&objs));
        assert_eq!(fronts.iter().map(Vec::len).sum::<usize>(), 50);
    }
}

#[test]
fn linear_tradeoff_front() {
    let cfg = Nsga2Config {
        population: 40,
        generations: 50,
        seed: 3,
        ..Default::default()
    };
    let set = nsga2(|x| Ok([x[0], 1.0 - x[0]]), &[(0.0, 1.0)], &cfg).unwrap();
    let hv = set.hypervolume([0.0, 0.0]);
    assert!(hv >= 0.99 * 0.5, "hypervolume {hv}");
    for p in &set.points {
        assert!((p.objectives[0] + p.objectives[1] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn shared_maximizer_collapses_front() {
    let cfg = Nsga2Config {
        population: 40,
        generations: 40,
        seed: 4,
        ..Default::default()
    };
    let f = |x: &[f64]| Ok([-(x[0] - 0.34).powi(2), 1.0 - 2.0 * (x[0] - 0.34).powi(2)]);
    let set = nsga2(f, &[(0.15, 0.5)], &cfg).unwrap();
    assert_eq!(set.points.len(), 1);
    assert!((set.points[0].design[0] - 0.34).abs() < 1e-3);
}

#[test]
fn correlated_objectives_single_point() {
    let cfg = Nsga2Config {
        population: 20,
        generations: 30,
        seed: 5,
        ..Default::default()
    };
    let set = nsga2(|x| Ok([x[0], x[0]]), &[(0.0, 1.0)], &cfg).unwrap();
    assert_eq!(set.points.len(), 1);
    assert!(set.points[0].design[0] > 0.99);
}

#[test]
fn seeded_runs_identical() {
    let f = |x: &[f64]| Ok([x[0] * x[1], (1.0 - x[0]) + 0.3 * x[1]]);
    let b = [(0.15, 0.5), (0.1, 1.0)];
    let cfg = Nsga2Config {
        population: 16,
        generations: 10,
        seed: 9,
        ..Default::default()
    };
    assert_eq!(nsga2(f, &b, &cfg).unwrap(), nsga2(f, &b, &cfg).unwrap());
}

#[test]
fn evaluator_failure_reports_design() {
    let cfg = Nsga2Config {
        population: 8,
        generations: 3,
        ..Default::default()
    };
    let err = nsga2(
        |x| if x[0] > 0.5 { Err("boom".into()) } else { Ok([x[0], 0.0]) },
        &[(0.0, 1.0)],
        &cfg,
    )
    .unwrap_err();
    match err {
        OptimError::Evaluation { design, message, .. } => {
            assert!(design[0] > 0.5);
            assert_eq!(message, "boom");
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn csv_export() {
    let cfg = Nsga2Config {
        population: 8,
        generations: 2,
        ..Default::default()
    };
    let set = nsga2(|x| Ok([x[0], 1.0 - x[0]]), &[(0.0, 1.0)], &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    set.write_csv(&path, &["length_m"]).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("length_m,energy,accuracy\n"));
    assert_eq!(text.lines().count(), set.points.len() + 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn archive_front_sound_and_hv_monotone(seed in 0u64..1000, a in 0.5f64..3.0) {
        let f = move |x: &[f64]| Ok([(a * x[0]).sin() + x[1], x[0] * (1.0 - x[1])]);
        let cfg = Nsga2Config { population: 12, generations: 8, seed, ..Default::default() };
        let set = nsga2(f, &[(0.15, 0.5), (0.1, 1.0)], &cfg).unwrap();
        let objs = set.objectives();
        for (i, p) in objs.iter().enumerate() {
            for q in &objs[i + 1..] {
                prop_assert!(!dominates(p, q) && !dominates(q, p));
            }
        }
        for w in set.hypervolume_history.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn affine_rescaling_keeps_designs(seed in 0u64..1000, s in 0.1f64..10.0, c in -5.0f64..5.0) {
        let f = |x: &[f64]| [x[0] * (1.0 - x[1]), x[1] - (x[0] - 0.3).powi(2)];
        let cfg = Nsga2Config { population: 12, generations: 6, seed, ..Default::default() };
        let b = [(0.15, 0.5), (0.1, 1.0)];
        let p = nsga2(|x| Ok(f(x)), &b, &cfg).unwrap();
        let q = nsga2(|x| { let o = f(x); Ok([s * o[0] + c, o[1]]) }, &b, &cfg).unwrap();
        let dp: Vec<_> = p.points.iter().map(|p| p.design.clone()).collect();
        let dq: Vec<_> = q.points.iter().map(|p| p.design.clone()).collect();
        prop_assert_eq!(dp, dq);
    }

    #[test]
    fn identical_points_single_front(n in 1usize..30, v in -3.0f64..3.0) {
        let fronts = fast_nondominated_sort(&vec![[v, v]; n]);
        prop_assert_eq!(fronts.len(), 1);
        prop_assert_eq!(fronts[0].len(), n);
    }
}
