#![no_main]
use libfuzzer_sys::fuzz_target;

use texclass::imaging::{parse_image, Image};

fuzz_target!(|data: &[u8]| {
    let Ok(parsed) = parse_image(data) else { return };
    // anything that parses must survive both encodings bit-exactly
    match &parsed {
        Image::Gray(img) => {
            for plain in [true, false] {
                let again = parse_image(&img.encode_pgm(plain)).unwrap();
                assert_eq!(again, parsed);
            }
        }
        Image::Rgb(img) => {
            for plain in [true, false] {
                let again = parse_image(&img.encode_ppm(plain)).unwrap();
                assert_eq!(again, parsed);
            }
        }
    }
});
