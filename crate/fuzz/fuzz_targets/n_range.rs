#![no_main]

use libfuzzer_sys::fuzz_target;
use rdflb_cli::parse_n_range;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(ns) = parse_n_range(s) {
            assert!(!ns.is_empty());
            assert!(ns.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
