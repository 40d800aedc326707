#![no_main]

use libfuzzer_sys::fuzz_target;
use topiso::format::{parse_coloring, serialize_coloring};

fuzz_target!(|input: (u8, &str)| {
    let (n, text) = input;
    let n = n as usize % 24;
    if let Ok(c) = parse_coloring(text, n) {
        let back = parse_coloring(&serialize_coloring(&c), n).unwrap();
        assert!(back.same_partition(&c));
    }
});
