#![no_main]
use libfuzzer_sys::fuzz_target;
use syk_magic::experiments::FigureId;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = s.parse::<FigureId>() {
        assert_eq!(f.to_string(), s);
    }
});
