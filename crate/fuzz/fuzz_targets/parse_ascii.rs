#![no_main]

use std::io::Cursor;

use libfuzzer_sys::fuzz_target;
use randcert::bitstream::{parse_ascii, ChunkedBitReader};
use randcert::BitFormat;

fuzz_target!(|data: &[u8]| {
    let whole = parse_ascii(data);
    let chunks: Result<Vec<_>, _> =
        ChunkedBitReader::with_chunk_blocks(Cursor::new(data), BitFormat::Ascii, 3, 8).collect();
    match (whole, chunks) {
        (Ok(seq), Ok(chunks)) => {
            let streamed: String = chunks.iter().map(|c| c.to_ascii(None)).collect::<String>();
            let streamed: String = streamed.chars().filter(|c| *c != '\n').collect();
            let direct: String = seq.to_ascii(None).trim_end().to_string();
            assert_eq!(streamed, direct);
            assert_eq!(parse_ascii(seq.to_ascii(Some(7)).as_bytes()).unwrap(), seq);
        }
        (Err(_), Err(_)) => {}
        (whole, chunks) => panic!("whole {:?} vs streamed {:?}", whole.is_ok(), chunks.is_ok()),
    }
});
