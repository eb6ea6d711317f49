#![no_main]

use libfuzzer_sys::fuzz_target;
use randcert::extract::{parse_timetags_text, write_timetags_text, TimeUnit};

fuzz_target!(|data: &[u8]| {
    if let Ok(values) = parse_timetags_text(data, None) {
        let mut out = Vec::new();
        write_timetags_text(&mut out, &values, Some(TimeUnit::Ps)).unwrap();
        assert_eq!(
            parse_timetags_text(&out, Some(TimeUnit::Ps)).unwrap(),
            values
        );
    }
});
