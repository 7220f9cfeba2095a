#![no_main]

use libfuzzer_sys::fuzz_target;
use semlabel_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let _ = RunConfig::parse(data);
});
