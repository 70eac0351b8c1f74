//! Replays the checked-in fuzz corpus through the same properties the fuzz
//! targets assert, so regressions show up without a nightly toolchain.

use std::path::PathBuf;

use dqnimb::agent::PolicyCheckpoint;
use dqnimb::data::{
    parse_csv, parse_idx_images, parse_idx_labels, write_csv_to, write_idx_images,
    write_idx_labels, CsvOptions,
};
use dqnimb::experiment::ExperimentConfig;
use dqnimb::nn::DenseNet;

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus for {target}");
    files
        .into_iter()
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn accepted(target: &str, check: impl Fn(&[u8]) -> bool) -> Vec<String> {
    corpus(target)
        .into_iter()
        .filter(|(_, d)| check(d))
        .map(|(n, _)| n)
        .collect()
}

#[test]
fn idx_images_corpus() {
    let ok = accepted("idx_images", |data| match parse_idx_images(data) {
        Ok(images) => {
            let mut encoded = Vec::new();
            write_idx_images(&mut encoded, &images).unwrap();
            assert_eq!(encoded, data);
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, ["empty", "one_28x28_zero", "two_2x2"]);
}

#[test]
fn idx_labels_corpus() {
    let ok = accepted("idx_labels", |data| match parse_idx_labels(data) {
        Ok(labels) => {
            let mut encoded = Vec::new();
            write_idx_labels(&mut encoded, &labels).unwrap();
            assert_eq!(encoded, data);
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, ["digits", "empty"]);
}

#[test]
fn csv_corpus() {
    let opts = CsvOptions::default();
    let ok = accepted("csv_dataset", |data| match parse_csv(data, &opts) {
        Ok(ds) => {
            let mut encoded = Vec::new();
            write_csv_to(&ds, &mut encoded).unwrap();
            let again = parse_csv(encoded.as_slice(), &opts).unwrap();
            assert_eq!(again.features().as_slice(), ds.features().as_slice());
            assert_eq!(again.labels(), ds.labels());
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, ["basic", "label_first"]);
}

#[test]
fn network_checkpoint_corpus() {
    let ok = accepted("network_checkpoint", |data| {
        match DenseNet::from_json(std::str::from_utf8(data).unwrap()) {
            Ok(net) => {
                assert_eq!(DenseNet::from_json(&net.to_json()).unwrap(), net);
                true
            }
            Err(_) => false,
        }
    });
    assert_eq!(ok, ["linear", "two_layer"]);
}

#[test]
fn policy_checkpoint_corpus() {
    let ok = accepted("policy_checkpoint", |data| {
        PolicyCheckpoint::from_json(std::str::from_utf8(data).unwrap()).is_ok()
    });
    assert_eq!(ok, ["linear_policy", "with_metrics"]);
}

#[test]
fn experiment_config_corpus() {
    let valid = accepted("experiment_config", |data| {
        let cfg = ExperimentConfig::from_json(std::str::from_utf8(data).unwrap()).unwrap();
        let reparsed = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(reparsed.hash(), cfg.hash());
        cfg.validate().is_ok()
    });
    assert_eq!(valid, ["blobs_compare", "mnist", "sweep"]);
}
