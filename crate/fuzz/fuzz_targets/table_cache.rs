#![no_main]

use libfuzzer_sys::fuzz_target;
use planepart::exact::{decode_cache, encode_cache};

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = decode_cache(data) {
        let again = encode_cache(&table);
        assert_eq!(decode_cache(&again).unwrap(), table);
    }
});
