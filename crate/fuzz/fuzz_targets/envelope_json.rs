#![no_main]
use libfuzzer_sys::fuzz_target;
use syk_magic::experiments::ResultEnvelope;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(env) = ResultEnvelope::from_json(s) else { return };
    let _ = env.group(syk_magic::hamiltonian::ModelKind::Syk4, 8);
    if let Ok(json) = env.to_json() {
        let back = ResultEnvelope::from_json(&json).expect("serialized envelope must parse");
        assert_eq!(back.to_json().unwrap(), json);
    }
});
