#![no_main]

use cbp_core::ingest::parse_seed;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(repo) = parse_seed(data) {
        let _ = repo.to_kb();
    }
});
