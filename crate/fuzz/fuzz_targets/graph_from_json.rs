#![no_main]

use libfuzzer_sys::fuzz_target;
use topiso::format::{graph_from_json, graph_to_json};

fuzz_target!(|data: &[u8]| {
    if let Ok(g) = graph_from_json(data) {
        assert_eq!(graph_from_json(graph_to_json(&g).as_bytes()).unwrap(), g);
    }
});
