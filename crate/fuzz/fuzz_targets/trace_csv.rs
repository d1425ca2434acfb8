#![no_main]

use libfuzzer_sys::fuzz_target;
use planepart::exact::{read_trace_csv, write_trace_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = read_trace_csv(text) {
        let mut out = Vec::new();
        write_trace_csv(&table, &mut out).unwrap();
        let back = read_trace_csv(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(back, table);
    }
});
