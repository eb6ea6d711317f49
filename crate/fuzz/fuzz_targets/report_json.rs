#![no_main]

use libfuzzer_sys::fuzz_target;
use randcert::report::AnalysisReport;

fuzz_target!(|text: &str| {
    if let Ok(report) = AnalysisReport::from_json(text) {
        let again = AnalysisReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(again, report);
    }
});
