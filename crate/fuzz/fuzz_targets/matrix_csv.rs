#![no_main]

use libfuzzer_sys::fuzz_target;
use lpdecode::io::{matrix_to_csv, parse_matrix_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = parse_matrix_csv(text) {
        assert!(a.nrows() > 0 && a.ncols() > 0);
        assert_eq!(parse_matrix_csv(&matrix_to_csv(&a)).unwrap(), a);
    }
});
