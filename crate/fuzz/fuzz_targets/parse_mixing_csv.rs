#![no_main]

use gradplay::network::MixingMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(w) = MixingMatrix::from_csv(text) {
        let again = MixingMatrix::from_csv(&w.to_csv()).expect("csv parses");
        assert_eq!(again.matrix(), w.matrix());
        assert!(w.sigma() >= 0.0);
    }
});
