#![no_main]
use libfuzzer_sys::fuzz_target;
use syk_magic::hamiltonian::{decode_sidecar, encode_sidecar};

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = decode_sidecar(data) {
        let bytes = encode_sidecar(&model);
        let again = decode_sidecar(&bytes).expect("re-encoded sidecar must decode");
        assert_eq!(encode_sidecar(&again), bytes);
    }
});
