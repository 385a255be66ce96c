#![no_main]

use libfuzzer_sys::fuzz_target;
use lpdecode::grid::parse_grid;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_grid(spec) {
        assert!(!points.is_empty());
        assert!(points.iter().all(|v| v.is_finite()));
        if spec.contains(':') {
            assert!(points.windows(2).all(|w| w[0] <= w[1]));
        }
    }
});
