#![no_main]

use gradplay::network::{Graph, MixingMatrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = Graph::from_edge_list(text, None) {
        let again = Graph::from_edge_list(&g.to_edge_list(), Some(g.n())).expect("edge list parses");
        assert_eq!(again, g);
        if g.n() <= 64 {
            let _ = MixingMatrix::metropolis(&g);
        }
    }
});
