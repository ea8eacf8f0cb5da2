#![no_main]

use dvfo_core::attention::{importance_distribution, Tensor3};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = Tensor3::parse_text(text) {
        assert_eq!(t.data().len(), t.channels() * t.height() * t.width());
        let d = importance_distribution(&t);
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
});
