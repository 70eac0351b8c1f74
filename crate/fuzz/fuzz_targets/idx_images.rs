#![no_main]

use dqnimb::data::{parse_idx_images, write_idx_images};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(images) = parse_idx_images(data) {
        assert_eq!(
            images.pixels.len(),
            images.count * images.rows * images.cols
        );
        let mut encoded = Vec::new();
        write_idx_images(&mut encoded, &images).unwrap();
        assert_eq!(encoded, data);
    }
});
