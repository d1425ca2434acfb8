#![no_main]

use libfuzzer_sys::fuzz_target;
use planepart_cli::nlist::parse_n_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ns) = parse_n_list(text) {
        assert!(!ns.is_empty());
        assert!(ns[0] > 0);
        assert!(ns.windows(2).all(|w| w[0] < w[1]));
    }
});
