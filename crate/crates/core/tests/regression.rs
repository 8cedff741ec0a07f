use proptest::prelude::*;

use knnrate::regression::empirical_modulus;
use knnrate::{brute_force_knn, Dataset, Error, PointSet, Regressor, ScalarField};

fn dataset(dim: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Dataset> {
    (dim, 1usize..=60).prop_flat_map(|(dim, n)| {
        (
            prop::collection::vec(-1.0f64..1.0, n * dim),
            prop::collection::vec(-100.0f64..100.0, n),
        )
            .prop_map(move |(x, y)| Dataset::new(PointSet::new(dim, x).unwrap(), y).unwrap())
    })
}

fn dyadic(dim: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Dataset> {
    (dim, 16usize..=80).prop_flat_map(|(dim, n)| {
        (
            prop::collection::vec(0.0f64..1.0, n * dim),
            prop::collection::vec(-512i32..=512, n),
        )
            .prop_map(move |(x, y)| {
                let y = y.into_iter().map(|v| v as f64 / 8.0).collect();
                Dataset::new(PointSet::new(dim, x).unwrap(), y).unwrap()
            })
    })
}

fn naive_mean(data: &Dataset, q: &[f64], k: usize) -> f64 {
    let ns = brute_force_knn(data.x(), q, k).unwrap();
    ns.members.iter().map(|&i| data.y()[i]).sum::<f64>() / ns.count() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn prediction_is_the_neighbor_mean(data in dataset(1..=3), kf in 0.0f64..1.0, q in prop::collection::vec(-1.2f64..1.2, 3)) {
        let k = 1 + (kf * (data.len() - 1) as f64) as usize;
        let q = &q[..data.dim()];
        let reg = Regressor::new(data.clone(), k).unwrap();
        let got = reg.predict(q).unwrap();
        let want = naive_mean(&data, q, k);
        prop_assert!((got - want).abs() <= 1e-12 * 100.0, "{got} vs {want}");
        prop_assert_eq!(reg.knn_radius(q).unwrap(), brute_force_knn(data.x(), q, k).unwrap().radius);
    }

    #[test]
    fn constant_observations_predict_exactly(data in dataset(1..=3), c in -1e6f64..1e6, kf in 0.0f64..1.0) {
        let k = 1 + (kf * (data.len() - 1) as f64) as usize;
        let reg = Regressor::new(data.map_y(|_| c).unwrap(), k).unwrap();
        for p in reg.predict_at_samples().unwrap() {
            prop_assert_eq!(p, c);
        }
    }

    #[test]
    fn affine_equivariance_is_exact(data in dyadic(1..=3), kexp in 0u32..4, a in 1i32..=16, b in -64i32..=64) {
        let (a, b) = (a as f64 / 4.0, b as f64 / 4.0);
        let k = 1usize << kexp;
        let reg = Regressor::new(data.clone(), k).unwrap();
        let moved = Regressor::new(data.map_y(|y| a * y + b).unwrap(), k).unwrap();
        let p = reg.predict_at_samples().unwrap();
        let m = moved.predict_at_samples().unwrap();
        for j in 0..data.len() {
            if reg.neighbors(data.x().point(j)).unwrap().count().is_power_of_two() {
                prop_assert_eq!(m[j], a * p[j] + b);
            }
        }
    }

    #[test]
    fn noiseless_error_is_within_the_modulus(data in dataset(1..=3), kf in 0.0f64..1.0) {
        let dim = data.dim();
        let field = ScalarField::radial(vec![0.1; dim], 1.0, 2.0, 0.5);
        let data = Dataset::new(data.x().clone(), data.x().iter().map(|p| field.evaluate(p)).collect()).unwrap();
        let k = 1 + (kf * (data.len() - 1) as f64) as usize;
        let reg = Regressor::new(data.clone(), k).unwrap();
        for p in data.x().iter() {
            let r = reg.knn_radius(p).unwrap();
            let err = (reg.predict(p).unwrap() - field.evaluate(p)).abs();
            prop_assert!(err <= field.modulus(p, r).unwrap() + 1e-12);
        }
    }
}

#[test]
fn one_dimensional_path_matches_general_path() {
    let xs: Vec<f64> = (0..257).map(|i| ((i * 37) % 257) as f64 / 64.0).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
    let data = Dataset::new(PointSet::from_scalars(&xs).unwrap(), ys).unwrap();
    for k in [1, 2, 7, 64, 257] {
        let reg = Regressor::new(data.clone(), k).unwrap();
        for q in [-1.0, 0.0, 0.5 / 64.0, 1.3, 4.0, 9.0] {
            assert!((reg.predict(&[q]).unwrap() - naive_mean(&data, &[q], k)).abs() < 1e-14);
            assert_eq!(
                reg.neighbors(&[q]).unwrap(),
                brute_force_knn(data.x(), &[q], k).unwrap()
            );
        }
    }
}

#[test]
fn ties_enlarge_the_neighborhood() {
    let data = Dataset::new(
        PointSet::from_scalars(&[0.0, 1.0, 2.0, 3.0]).unwrap(),
        vec![0.0, 4.0, 8.0, 100.0],
    )
    .unwrap();
    let reg = Regressor::new(data, 2).unwrap();
    assert_eq!(reg.neighbors(&[1.0]).unwrap().members, vec![0, 1, 2]);
    assert_eq!(reg.predict(&[1.0]).unwrap(), 4.0);
}

#[test]
fn invalid_construction() {
    let x = PointSet::from_scalars(&[0.0, 1.0]).unwrap();
    assert!(matches!(
        Dataset::new(x.clone(), vec![1.0]),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        Dataset::new(x.clone(), vec![1.0, f64::NAN]),
        Err(Error::NonFiniteObservation { .. })
    ));
    let data = Dataset::new(x, vec![0.0, 1.0]).unwrap();
    assert!(matches!(
        Regressor::new(data.clone(), 0),
        Err(Error::InvalidK { .. })
    ));
    assert!(matches!(
        Regressor::new(data, 3),
        Err(Error::InvalidK { .. })
    ));
}

#[test]
fn dataset_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.txt");
    let data = Dataset::new(
        PointSet::from_rows(&[[0.1, -2.5], [1e-7, 3.0]]).unwrap(),
        vec![1.0 / 3.0, -0.0],
    )
    .unwrap();
    data.write(&path).unwrap();
    assert_eq!(Dataset::read(&path).unwrap(), data);
    let err = Dataset::parse("2 2\n0 0 1\n0 x 1\n", "d.txt").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    assert!(matches!(
        Dataset::parse("1 3\n0 1\n", "d.txt"),
        Err(Error::Parse { line: 1, .. })
    ));
    assert!(matches!(
        Dataset::read(dir.path().join("missing")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn sampled_modulus_is_a_lower_bound() {
    let field = ScalarField::custom(2, |x| x[0].abs() + x[1].abs());
    let est = empirical_modulus(&field, &[0.0, 0.0], 0.5, 256).unwrap();
    assert!(est.approximate);
    assert!(est.value <= 0.5 * 2f64.sqrt() + 1e-12 && est.value >= 0.5);
    let exact = empirical_modulus(
        &ScalarField::linear(vec![3.0, 4.0], 1.0),
        &[0.2, 0.2],
        0.1,
        0,
    )
    .unwrap();
    assert!(!exact.approximate);
    assert!((exact.value - 0.5).abs() < 1e-12);
}
