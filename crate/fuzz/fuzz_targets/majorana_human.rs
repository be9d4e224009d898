#![no_main]
use libfuzzer_sys::fuzz_target;
use syk_magic::majorana::MajoranaString;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(s) = std::str::from_utf8(rest) else { return };
    if let Ok(m) = MajoranaString::from_human(s, n as usize % 40) {
        assert_eq!(m.to_human(), s);
        assert_eq!(MajoranaString::from_hex(&m.to_hex(), m.sites()).unwrap(), m);
    }
});
