#![no_main]

//! Input: matrix CSV, a NUL byte, then the JSON sidecar.

use libfuzzer_sys::fuzz_target;
use lpdecode::io::{matrix_to_csv, parse_instance, InstanceSidecar};

fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else { return };
    let (Ok(csv), Ok(json)) = (std::str::from_utf8(&data[..split]), std::str::from_utf8(&data[split + 1..])) else {
        return;
    };
    if let Ok(inst) = parse_instance(csv, json) {
        inst.check_pattern().unwrap();
        assert_eq!(inst.y, &inst.a * &inst.f + &inst.e);
        let side = serde_json::to_string(&InstanceSidecar::from_instance(&inst, None)).unwrap();
        assert_eq!(parse_instance(&matrix_to_csv(&inst.a), &side).unwrap(), inst);
    }
});
