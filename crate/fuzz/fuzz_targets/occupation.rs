#![no_main]
use libfuzzer_sys::fuzz_target;
use syk_magic::fock::{format_occupation, parse_occupation};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(idx) = parse_occupation(s) {
        assert_eq!(format_occupation(idx, s.len()), s);
    }
});
