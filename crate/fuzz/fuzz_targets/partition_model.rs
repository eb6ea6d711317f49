#![no_main]

use libfuzzer_sys::fuzz_target;
use randcert::PartitionModel;

fuzz_target!(|text: &str| {
    if let Ok(model) = text.parse::<PartitionModel>() {
        let again: PartitionModel = model.to_string().parse().unwrap();
        assert_eq!(again, model);
        assert_eq!(model.block_sizes().iter().sum::<u64>(), model.size() as u64);
    }
});
