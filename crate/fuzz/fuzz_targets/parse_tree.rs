#![no_main]

use libfuzzer_sys::fuzz_target;
use sumtree::tree::{cost, parse_tree, serialize};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(tree) = parse_tree(text) {
        assert!(tree.is_consistent());
        let text = serialize(&tree);
        let back = parse_tree(&text).expect("serialized tree parses");
        assert_eq!(serialize(&back), text);
        assert_eq!(cost(&back), cost(&tree));
    }
});
