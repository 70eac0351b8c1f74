#![no_main]

use dqnimb::data::{parse_idx_labels, write_idx_labels};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(labels) = parse_idx_labels(data) {
        let mut encoded = Vec::new();
        write_idx_labels(&mut encoded, &labels).unwrap();
        assert_eq!(encoded, data);
    }
});
