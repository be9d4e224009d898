#![no_main]
use libfuzzer_sys::fuzz_target;
use syk_magic::experiments::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ExperimentConfig::from_toml_str(s) else { return };
    let _ = cfg.validate();
    let text = cfg.to_toml_string();
    let back = ExperimentConfig::from_toml_str(&text).expect("serialized config must parse");
    assert_eq!(back.to_toml_string(), text);
});
