mod common;

use gbfrs::dataset::{inject_label_noise, kfold_split};
use gbfrs::granular_ball::{generate, BallConfig, InitialCount};

#[test]
fn bundled_datasets_have_expected_shapes() {
    let wine = common::load_raw("wine.csv");
    assert_eq!((wine.n(), wine.d(), wine.class_count()), (178, 13, 3));
    assert_eq!(wine.attribute_names()[0], "alcohol");
    let iris = common::load_raw("iris.csv");
    assert_eq!((iris.n(), iris.d(), iris.class_count()), (150, 4, 3));
    let wdbc = common::load_raw("wdbc.csv");
    assert_eq!((wdbc.n(), wdbc.d(), wdbc.class_count()), (569, 30, 2));
}

#[test]
fn wine_starts_from_fourteen_clusters() {
    let wine = common::wine();
    assert_eq!(InitialCount::SqrtCeil.resolve(wine.n()), 14);
    // pure balls can only come from further splits of the initial partition
    let gbs = generate(&wine, &BallConfig::new(1.0, 1)).unwrap();
    assert!(gbs.len() >= 14);
    assert!(gbs
        .balls
        .iter()
        .all(|b| b.purity == 1.0 || !b.is_splittable(&wine)));
}

#[test]
fn normalized_wine_lies_in_the_unit_cube() {
    let wine = common::wine();
    assert!(wine.features().iter().all(|x| (0.0..=1.0).contains(x)));
}

#[test]
fn stratified_folds_cover_wine_once() {
    let wine = common::wine();
    let split = kfold_split(&wine, 5, 9, true).unwrap();
    let mut seen = vec![0; wine.n()];
    for f in 0..5 {
        for &i in split.test(f) {
            seen[i] += 1;
        }
        // class 0 has 59 samples: 11 or 12 per fold
        let zeros = split
            .test(f)
            .iter()
            .filter(|&&i| wine.label(i) == 0)
            .count();
        assert!((11..=12).contains(&zeros));
    }
    assert!(seen.iter().all(|&c| c == 1));
}

#[test]
fn label_noise_on_wine_flips_the_requested_count() {
    let wine = common::wine();
    let noisy = inject_label_noise(&wine, 0.2, 4).unwrap();
    let changed = wine
        .labels()
        .iter()
        .zip(noisy.labels())
        .filter(|(a, b)| a != b)
        .count();
    assert_eq!(changed, 35);
    assert_eq!(noisy.noise().flipped.len(), 35);
}
