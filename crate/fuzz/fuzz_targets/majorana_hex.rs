#![no_main]
use libfuzzer_sys::fuzz_target;
use syk_magic::majorana::MajoranaString;

// first byte picks N, the rest is the hex text
fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(s) = std::str::from_utf8(rest) else { return };
    if let Ok(m) = MajoranaString::from_hex(s, n as usize % 40) {
        assert_eq!(m.to_hex(), s);
    }
});
