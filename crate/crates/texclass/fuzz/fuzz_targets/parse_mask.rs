#![no_main]
use libfuzzer_sys::fuzz_target;

use texclass::dct::CoefficientMask;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(mask) = text.parse::<CoefficientMask>() else { return };
    let again: CoefficientMask = mask.to_string().parse().unwrap();
    assert_eq!(again, mask);
});
