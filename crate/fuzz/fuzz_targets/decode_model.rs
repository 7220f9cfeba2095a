#![no_main]

use libfuzzer_sys::fuzz_target;
use semlabel::models::{decode_model, encode_model};

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = decode_model(data) {
        assert_eq!(encode_model(&model).expect("re-encode"), data);
    }
});
