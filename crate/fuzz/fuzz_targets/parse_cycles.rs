#![no_main]

use libfuzzer_sys::fuzz_target;
use topiso::Permutation;

fuzz_target!(|input: (u8, &str)| {
    let (n, text) = input;
    if let Ok(p) = Permutation::parse_cycles(n as usize, text) {
        assert_eq!(Permutation::parse_cycles(n as usize, &p.to_cycle_string()).unwrap(), p);
    }
});
