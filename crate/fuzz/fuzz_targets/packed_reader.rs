#![no_main]

use std::io::Cursor;

use libfuzzer_sys::fuzz_target;
use randcert::bitstream::ChunkedBitReader;
use randcert::blockstats::count_blocks_streaming;
use randcert::{count_blocks, BitFormat, BitSequence};

fuzz_target!(|input: (u8, u16, &[u8])| {
    let (level, n, data) = input;
    let level = u32::from(level % 9) + 1;
    let n = u64::from(n);
    let Ok(seq) = BitSequence::from_packed(data.to_vec(), Some(n)) else {
        assert!(n > data.len() as u64 * 8);
        return;
    };
    let reader =
        ChunkedBitReader::with_chunk_blocks(Cursor::new(data), BitFormat::Packed, level, 5)
            .with_bit_limit(n);
    let total: u64 = reader.map(|c| c.unwrap().len()).sum();
    assert_eq!(total, n);
    match count_blocks(&seq, level) {
        Ok(whole) => {
            let streamed =
                count_blocks_streaming(Cursor::new(data), BitFormat::Packed, Some(n), level)
                    .unwrap();
            assert_eq!(whole, streamed);
        }
        Err(_) => assert!(n < u64::from(level)),
    }
});
