#![no_main]

use libfuzzer_sys::fuzz_target;
use unialg::relation::parse_expr;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(e) = parse_expr(text) {
            // printing and re-parsing must give the same tree
            let again = parse_expr(&e.to_string()).expect("printed expression parses");
            assert_eq!(e, again);
        }
    }
});
