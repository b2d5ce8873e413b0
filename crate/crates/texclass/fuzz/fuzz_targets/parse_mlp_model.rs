#![no_main]
use libfuzzer_sys::fuzz_target;

use texclass::harness::classifier_from_text;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(model) = classifier_from_text(text) else { return };
    let canonical = model.to_text();
    let again = classifier_from_text(&canonical).unwrap();
    assert_eq!(again.to_text(), canonical);
});
