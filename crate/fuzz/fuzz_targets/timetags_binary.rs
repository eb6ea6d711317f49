#![no_main]

use libfuzzer_sys::fuzz_target;
use randcert::extract::{parse_timetags_binary, write_timetags_binary, TimeTagSeries, TimeUnit};
use randcert::{interarrivals, timetags_to_bits};

fuzz_target!(|data: &[u8]| {
    let Ok(values) = parse_timetags_binary(data) else {
        assert_ne!(data.len() % 8, 0);
        return;
    };
    let mut out = Vec::new();
    write_timetags_binary(&mut out, &values).unwrap();
    assert_eq!(out, data);
    if let Ok(stamps) = TimeTagSeries::timestamps(values, TimeUnit::Ps) {
        if let Ok(gaps) = interarrivals(&stamps) {
            let bits = timetags_to_bits(&gaps, 1).unwrap();
            assert_eq!(bits.len() as usize, stamps.len() - 1);
        }
    }
});
