#![no_main]

use dvfo_core::quant::{dequantize, QuantizedBlock};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(q) = QuantizedBlock::decode(data) {
        assert_eq!(q.encode(), data);
        assert_eq!(dequantize(&q).len(), q.original_len);
    }
});
