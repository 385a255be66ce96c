#![no_main]

use libfuzzer_sys::fuzz_target;
use lpdecode::certify::Verdict;
use lpdecode::io::parse_certify_report;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = parse_certify_report(text) {
        assert_eq!(report.verdict, Verdict::from_margin(report.min_margin));
        let again = parse_certify_report(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(again, report);
    }
});
