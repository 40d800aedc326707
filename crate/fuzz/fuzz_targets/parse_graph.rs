#![no_main]

use libfuzzer_sys::fuzz_target;
use topiso::format::{parse_graph, serialize_graph};

fuzz_target!(|data: &[u8]| {
    if let Ok(g) = parse_graph(data) {
        // Anything accepted must survive a round trip.
        let text = serialize_graph(&g);
        assert_eq!(parse_graph(text.as_bytes()).unwrap(), g);
    }
});
