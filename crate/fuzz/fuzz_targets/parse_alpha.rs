#![no_main]

use gradplay::harness::AlphaSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<AlphaSpec>() {
        assert_eq!(spec.to_string().parse::<AlphaSpec>().expect("display parses"), spec);
    }
});
