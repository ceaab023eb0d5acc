#![no_main]

use libfuzzer_sys::fuzz_target;
use sumtree::hardness::{format_3par, parse_3par, reduce_to_addition_tree, validate_3par};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(instance) = parse_3par(text) else {
        return;
    };
    assert_eq!(parse_3par(&format_3par(&instance)).expect("formatted instance parses"), instance);
    if let Ok(m) = validate_3par(&instance) {
        let r = reduce_to_addition_tree(&instance).expect("valid instances reduce");
        assert_eq!(r.x.len(), 5 * m);
        assert!(r.scaling_facts().all_hold());
    }
});
