#![no_main]

use libfuzzer_sys::fuzz_target;
use semlabel::corpus::{parse_source, LoadOptions};

fuzz_target!(|data: &[u8]| {
    let (&delimiter, rest) = match data.split_first() {
        Some(split) => split,
        None => return,
    };
    for has_header in [true, false] {
        let options = LoadOptions {
            delimiter,
            has_header,
        };
        if let Ok(loaded) = parse_source("fuzz", rest, options) {
            let rows = loaded.source.num_rows();
            assert!(rows > 0);
            assert!(loaded
                .source
                .attributes
                .iter()
                .all(|a| a.values.len() == rows));
        }
    }
});
