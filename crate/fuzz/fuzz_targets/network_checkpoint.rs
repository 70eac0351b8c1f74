#![no_main]

use dqnimb::nn::DenseNet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(net) = DenseNet::from_json(text) {
        let again = DenseNet::from_json(&net.to_json()).unwrap();
        assert_eq!(again, net);
        let _ = net.forward_row(&vec![0.5; net.input_dim()]);
    }
});
