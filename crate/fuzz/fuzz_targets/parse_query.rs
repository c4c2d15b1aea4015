#![no_main]

use cbp_core::query::parse_query;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(q) = parse_query(data) {
        assert_eq!(parse_query(&q.to_string()).as_ref(), Ok(&q));
    }
});
