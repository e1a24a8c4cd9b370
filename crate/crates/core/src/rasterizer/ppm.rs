use super::{ImageRGB, RasterError, CHANNELS, IMAGE_SIZE};

fn header() -> String {
    format!("P6\n{IMAGE_SIZE} {IMAGE_SIZE}\n255\n")
}

/// Binary PPM (P6) encoding.
pub fn write_ppm(image: &ImageRGB) -> Vec<u8> {
    let mut out = header().into_bytes();
    out.extend_from_slice(image.as_raw());
    out
}

fn bad(msg: impl Into<String>) -> RasterError {
    RasterError::MalformedPpm(msg.into())
}

/// Decodes a 64x64 P6 pixmap with maxval 255. Header tokens may be separated
/// by any whitespace and `#` comments.
pub fn read_ppm(bytes: &[u8]) -> Result<ImageRGB, RasterError> {
    if !bytes.starts_with(b"P6") {
        return Err(bad("missing P6 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("non-numeric header field"))?;
    }
    let [width, height, maxval] = fields;
    if (width, height) != (IMAGE_SIZE, IMAGE_SIZE) {
        return Err(bad(format!("expected {IMAGE_SIZE}x{IMAGE_SIZE}, got {width}x{height}")));
    }
    if maxval != 255 {
        return Err(bad(format!("maxval must be 255, got {maxval}")));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("missing separator after maxval"));
    }
    pos += 1;
    let need = IMAGE_SIZE * IMAGE_SIZE * CHANNELS;
    let payload = &bytes[pos..];
    if payload.len() < need {
        return Err(bad(format!("payload has {} bytes, need {need}", payload.len())));
    }
    Ok(ImageRGB::from_raw(payload[..need].to_vec()).expect("length checked"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn white_image_layout() {
        let bytes = write_ppm(&ImageRGB::white());
        let head = b"P6\n64 64\n255\n";
        assert_eq!(&bytes[..head.len()], head);
        assert_eq!(bytes.len(), head.len() + 12288);
        assert!(bytes[head.len()..].iter().all(|&b| b == 0xFF));
    }

    #[test]
    fn truncated_payload() {
        let mut bytes = write_ppm(&ImageRGB::white());
        bytes.pop();
        assert!(matches!(read_ppm(&bytes), Err(RasterError::MalformedPpm(_))));
    }

    #[test]
    fn rejects_bad_headers() {
        let payload = vec![0u8; 12288];
        for head in ["P3\n64 64\n255\n", "P6\n32 64\n255\n", "P6\n64 64\n65535\n", "P6\n64 x\n255\n", "P6\n64 64\n255"] {
            let mut bytes = head.as_bytes().to_vec();
            bytes.extend_from_slice(&payload);
            assert!(read_ppm(&bytes).is_err(), "{head:?}");
        }
    }

    #[test]
    fn accepts_comments() {
        let mut bytes = b"P6 # made by hand\n64\t64 255\n".to_vec();
        bytes.extend(std::iter::repeat_n(7u8, 12288));
        assert_eq!(read_ppm(&bytes).unwrap(), ImageRGB::filled([7; 3]));
    }

    proptest! {
        #[test]
        fn round_trip(data in prop::collection::vec(any::<u8>(), 12288)) {
            let img = ImageRGB::from_raw(data).unwrap();
            prop_assert_eq!(read_ppm(&write_ppm(&img)).unwrap(), img);
        }
    }
}
