#![no_main]

use gradplay::harness::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_toml(text) {
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).expect("config parses"), cfg);
    }
    if let Ok(base) = ExperimentConfig::preset("paper-sim") {
        let _ = ExperimentConfig::from_toml_over(&base, text);
    }
});
