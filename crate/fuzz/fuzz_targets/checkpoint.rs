#![no_main]

use dvfo_core::agent::Checkpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ck) = Checkpoint::parse(text) {
        let again = ck.to_text();
        assert_eq!(Checkpoint::parse(&again).expect("reparse").to_text(), again);
    }
});
