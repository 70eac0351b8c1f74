#![no_main]

use dqnimb::data::{parse_csv, write_csv_to, CsvOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let opts = CsvOptions::default();
    if let Ok(ds) = parse_csv(data, &opts) {
        assert!(ds.labels().iter().all(|&l| l <= 1));
        assert!(ds.features().is_finite());
        let mut encoded = Vec::new();
        write_csv_to(&ds, &mut encoded).unwrap();
        let again = parse_csv(encoded.as_slice(), &opts).unwrap();
        assert_eq!(again.features().as_slice(), ds.features().as_slice());
        assert_eq!(again.labels(), ds.labels());
    }
});
