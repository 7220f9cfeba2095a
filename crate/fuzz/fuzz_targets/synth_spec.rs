#![no_main]

use libfuzzer_sys::fuzz_target;
use semlabel_cli::parse_synth_spec;

fuzz_target!(|data: &[u8]| {
    let _ = parse_synth_spec(data);
});
