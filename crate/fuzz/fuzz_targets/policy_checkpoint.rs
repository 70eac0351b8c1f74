#![no_main]

use dqnimb::agent::PolicyCheckpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((net, _meta)) = PolicyCheckpoint::from_json(text) {
        assert_eq!(net.output_dim(), 2);
    }
});
