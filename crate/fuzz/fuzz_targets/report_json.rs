#![no_main]

use libfuzzer_sys::fuzz_target;
use topiso::report::RunReport;

fuzz_target!(|data: &str| {
    if let Ok(r) = RunReport::from_json(data) {
        assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
    }
});
