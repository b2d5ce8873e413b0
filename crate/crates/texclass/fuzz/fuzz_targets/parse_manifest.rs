#![no_main]
use libfuzzer_sys::fuzz_target;

use texclass::harness::{manifest_from_csv, manifest_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(entries) = manifest_from_csv(text) else { return };
    let again = manifest_from_csv(&manifest_to_csv(&entries)).unwrap();
    assert_eq!(again, entries);
});
