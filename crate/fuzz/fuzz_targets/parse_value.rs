#![no_main]

use libfuzzer_sys::fuzz_target;
use sumtree::parse_value;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_value(text) {
        let shown = v.to_string();
        assert_eq!(parse_value(&shown).expect("display output parses"), v, "{shown}");
    }
});
