use dqnimb::baselines::{
    csm_class_weights, dta_predict, resample_ros, resample_rus, train_supervised, weighted_ce_loss,
    SupervisedConfig, SupervisedMethod,
};
use dqnimb::data::{gen_blobs, BlobSpec, Dataset};
use dqnimb::metrics::confusion;
use dqnimb::nn::Matrix;
use dqnimb::seed::rng_from;
use dqnimb::Label;
use rand::Rng;

fn blobs(counts: [usize; 2], gap: f64, seed: u64) -> Dataset {
    gen_blobs(&BlobSpec {
        means: [vec![0.0, 0.0], vec![gap, gap]],
        stds: [0.5, 0.5],
        counts,
        seed,
    })
    .unwrap()
}

fn cfg(method: SupervisedMethod) -> SupervisedConfig {
    SupervisedConfig {
        hidden: vec![16],
        max_epochs: 100,
        seed: 3,
        method,
        ..Default::default()
    }
}

#[test]
fn separable_blobs_reach_perfect_validation_accuracy() {
    let ds = blobs([400, 400], 6.0, 1);
    let clf = train_supervised(&ds, &cfg(SupervisedMethod::Dnn)).unwrap();
    let preds = clf.predict_batch(ds.features()).unwrap();
    let cm = confusion(&preds, ds.labels(), 1).unwrap();
    assert_eq!(cm.tp + cm.tn, ds.len() as u64);
}

#[test]
fn returned_snapshot_has_the_lowest_validation_loss() {
    let ds = blobs([500, 50], 1.0, 2);
    for method in SupervisedMethod::ALL {
        let clf = train_supervised(&ds, &cfg(method)).unwrap();
        assert!(!clf.history.is_empty());
        let later = clf.history.iter().filter(|e| e.epoch > clf.best_epoch);
        for e in later {
            assert!(clf.best_val_loss <= e.val_loss, "{method}: {e:?}");
        }
        if clf.best_epoch > 0 {
            assert_eq!(clf.history[clf.best_epoch - 1].val_loss, clf.best_val_loss);
        }
    }
}

#[test]
fn resampling_balances_without_altering_samples() {
    let ds = blobs([100, 10], 2.0, 4);
    let originals: Vec<Vec<f64>> = ds.features().iter_rows().map(|r| r.to_vec()).collect();
    let ros = resample_ros(&ds, &mut rng_from(1)).unwrap();
    assert_eq!(ros.class_counts(), [100, 100]);
    let rus = resample_rus(&ds, &mut rng_from(1)).unwrap();
    assert_eq!(rus.class_counts(), [10, 10]);
    for out in [&ros, &rus] {
        for i in 0..out.len() {
            let j = originals
                .iter()
                .position(|r| r.as_slice() == out.row(i))
                .unwrap();
            assert_eq!(ds.label(j), out.label(i));
        }
    }
    let mut negs: Vec<u64> = (0..rus.len())
        .filter(|&i| rus.label(i) == 0)
        .map(|i| rus.row(i)[0].to_bits())
        .collect();
    negs.sort_unstable();
    negs.dedup();
    assert_eq!(negs.len(), 10);
    let balanced = blobs([20, 20], 2.0, 5);
    assert_eq!(resample_ros(&balanced, &mut rng_from(0)).unwrap(), balanced);
    assert_eq!(resample_rus(&balanced, &mut rng_from(0)).unwrap(), balanced);
}

#[test]
fn csm_weights_are_inverse_imbalance() {
    let w = csm_class_weights(&blobs([10_000, 100], 1.0, 6)).unwrap();
    assert_eq!(w, [1.0, 100.0]);
    assert_eq!(
        csm_class_weights(&blobs([50, 50], 1.0, 6)).unwrap(),
        [1.0, 1.0]
    );
}

#[test]
fn csm_with_unit_weights_equals_dnn() {
    let ds = blobs([200, 200], 1.0, 7);
    let a = train_supervised(&ds, &cfg(SupervisedMethod::Dnn)).unwrap();
    let b = train_supervised(&ds, &cfg(SupervisedMethod::Csm)).unwrap();
    assert_eq!(b.class_weights, [1.0, 1.0]);
    assert_eq!(a.net, b.net);
}

#[test]
fn dta_rule_examples_and_scale_invariance() {
    assert_eq!(dta_predict([0.3, 0.7], [0.01, 0.99]).unwrap(), 0);
    assert_eq!(dta_predict([0.3, 0.7], [0.5, 0.5]).unwrap(), 1);
    assert_eq!(dta_predict([0.2, 0.8], [0.2, 0.8]).unwrap(), 0);
    assert!(dta_predict([0.5, 0.5], [0.0, 1.0]).is_err());
    let mut rng = rng_from(9);
    for _ in 0..1000 {
        let p: f64 = rng.random_range(0.001..0.999);
        let prior: f64 = rng.random_range(0.001..0.999);
        let k: f64 = rng.random_range(0.01..100.0);
        assert_eq!(
            dta_predict([1.0 - p, p], [1.0 - prior, prior]).unwrap(),
            dta_predict([k * (1.0 - p), k * p], [1.0 - prior, prior]).unwrap()
        );
    }
}

#[test]
fn weighted_loss_matches_per_sample_average() {
    let ds = blobs([30, 5], 1.0, 8);
    let clf = train_supervised(
        &ds,
        &SupervisedConfig {
            max_epochs: 2,
            ..cfg(SupervisedMethod::Dnn)
        },
    )
    .unwrap();
    let w = [1.0, 6.0];
    let mut total = 0.0;
    for i in 0..ds.len() {
        let z = clf.net.forward_row(ds.row(i)).unwrap();
        let p = dqnimb::nn::softmax(&z);
        total -= w[ds.label(i) as usize] * p[ds.label(i) as usize].ln();
    }
    let got = weighted_ce_loss(&clf.net, &ds, w).unwrap();
    assert!((got - total / ds.len() as f64).abs() < 1e-12);
}

#[test]
fn single_class_input_is_rejected() {
    let ds = Dataset::new(
        Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap(),
        vec![0 as Label; 3],
    )
    .unwrap();
    assert!(train_supervised(&ds, &cfg(SupervisedMethod::Dnn)).is_err());
    assert!(resample_ros(&ds, &mut rng_from(0)).is_err());
    assert!(csm_class_weights(&ds).is_err());
}
