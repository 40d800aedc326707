#![no_main]

use libfuzzer_sys::fuzz_target;
use topiso::generate::Family;

fuzz_target!(|data: &str| {
    if let Ok(f) = Family::parse(data) {
        assert_eq!(Family::parse(&f.to_string()).unwrap(), f);
    }
});
