#![no_main]
use libfuzzer_sys::fuzz_target;

use texclass::harness::{dataset_from_csv, features_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(ds) = dataset_from_csv(text) else { return };
    let canonical = features_to_csv(&ds);
    let again = dataset_from_csv(&canonical).unwrap();
    assert_eq!(again.class_names(), ds.class_names());
    assert_eq!(again.len(), ds.len());
    for ((a, ca), (b, cb)) in again.items().iter().zip(ds.items()) {
        assert_eq!(ca, cb);
        assert_eq!(a.values(), b.values());
    }
});
