#![no_main]

use libfuzzer_sys::fuzz_target;
use unialg::Algebra;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(a) = Algebra::from_json(text) {
            let back = Algebra::from_json(&a.to_json()).expect("written algebra reads back");
            assert_eq!(a, back);
        }
    }
});
