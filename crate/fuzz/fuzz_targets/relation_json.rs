#![no_main]

use libfuzzer_sys::fuzz_target;
use unialg::BinRel;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(r) = BinRel::from_json(text) {
            let back = BinRel::from_json(&r.to_json()).expect("written relation reads back");
            assert_eq!(r, back);
        }
    }
});
