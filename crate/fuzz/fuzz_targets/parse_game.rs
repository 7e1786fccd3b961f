#![no_main]

use gradplay::QuadraticGame;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(game) = QuadraticGame::from_json(text) {
        let again = QuadraticGame::from_json(&game.to_json()).expect("serialised game parses");
        assert_eq!(again, game);
        if game.n() <= 64 {
            let _ = game.constants();
        }
    }
});
