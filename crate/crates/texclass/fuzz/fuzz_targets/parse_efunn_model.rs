#![no_main]
use libfuzzer_sys::fuzz_target;

use texclass::efunn::EfunnModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(model) = EfunnModel::from_text(text) else { return };
    let canonical = model.to_text();
    let again = EfunnModel::from_text(&canonical).unwrap();
    assert_eq!(again.to_text(), canonical);
});
