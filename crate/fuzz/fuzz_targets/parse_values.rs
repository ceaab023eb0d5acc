#![no_main]

use libfuzzer_sys::fuzz_target;
use sumtree::io::{format_values, parse_values};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = parse_values(text) {
        assert!(!values.is_empty());
        assert_eq!(parse_values(&format_values(&values)).expect("formatted values parse"), values);
    }
});
