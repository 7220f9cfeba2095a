#![no_main]

use libfuzzer_sys::fuzz_target;
use semlabel::corpus::{parse_labels, write_labels};

fuzz_target!(|data: &[u8]| {
    if let Ok(labels) = parse_labels(data) {
        let again = parse_labels(write_labels(&labels).as_bytes()).expect("written labels parse");
        assert_eq!(again, labels);
    }
});
