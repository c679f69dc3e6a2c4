//! Grayscale images, binary PGM I/O, nearest-neighbour resizing and
//! gray-level quantization.

use crate::error::{Error, Result};

/// A row-major grid of quantized gray levels in `[0, levels)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    levels: usize,
    pixels: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, levels: usize, pixels: Vec<u16>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::Dimension(format!(
                "image must be at least 2x2, got {width}x{height}"
            )));
        }
        if levels < 2 {
            return Err(Error::Range(format!("levels must be >= 2, got {levels}")));
        }
        if pixels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(&bad) = pixels.iter().find(|&&p| p as usize >= levels) {
            return Err(Error::Range(format!(
                "pixel value {bad} out of range for {levels} levels"
            )));
        }
        Ok(GrayImage {
            width,
            height,
            levels,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        levels: usize,
        mut f: impl FnMut(usize, usize) -> u16,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, levels, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.pixels[row * self.width + col]
    }

    /// Number of pixels, `width * height`.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Swaps rows and columns.
    pub fn transpose(&self) -> GrayImage {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for c in 0..self.width {
            for r in 0..self.height {
                pixels.push(self.get(r, c));
            }
        }
        GrayImage {
            width: self.height,
            height: self.width,
            levels: self.levels,
            pixels,
        }
    }

    /// Rotates a quarter turn counter-clockwise.
    pub fn rotate90(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        let mut pixels = Vec::with_capacity(self.pixels.len());
        // new(r, c) = old(c, w - 1 - r), new dims h x w
        for r in 0..w {
            for c in 0..h {
                pixels.push(self.get(c, w - 1 - r));
            }
        }
        GrayImage {
            width: h,
            height: w,
            levels: self.levels,
            pixels,
        }
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse("unexpected end of header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn parse_number(token: &[u8], what: &str) -> Result<usize> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| {
            Error::Parse(format!(
                "invalid {what} token {:?}",
                String::from_utf8_lossy(token)
            ))
        })
}

/// Decodes a binary (P5) portable graymap with maxval <= 255.
///
/// The returned image always has 256 levels; pixel bytes are copied verbatim.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::Parse(format!(
            "bad magic token {:?}, expected \"P5\"",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = parse_number(next_token(bytes, &mut pos)?, "width")?;
    let height = parse_number(next_token(bytes, &mut pos)?, "height")?;
    let maxval = parse_number(next_token(bytes, &mut pos)?, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Unsupported(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Parse("missing whitespace after maxval".into()));
    }
    pos += 1;

    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::Parse(format!("image size {width}x{height} overflows")))?;
    let body = &bytes[pos..];
    if body.len() < expected {
        return Err(Error::Length {
            expected,
            found: body.len(),
        });
    }
    let pixels = body[..expected].iter().map(|&b| b as u16).collect();
    GrayImage::new(width, height, 256, pixels)
}

/// Encodes an image as binary PGM with maxval 255.
///
/// Images with fewer than 256 levels are spread over the full byte range with
/// `ceil(v * 256 / levels)`, which [`quantize`] maps straight back to `v`.
pub fn write_pgm(image: &GrayImage) -> Result<Vec<u8>> {
    let levels = image.levels;
    if levels > 256 {
        return Err(Error::Unsupported(format!(
            "cannot write {levels} levels to an 8-bit PGM"
        )));
    }
    let header = format!("P5\n{} {}\n255\n", image.width, image.height);
    let mut out = Vec::with_capacity(header.len() + image.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(
        image
            .pixels
            .iter()
            .map(|&v| (v as usize * 256).div_ceil(levels) as u8),
    );
    Ok(out)
}

/// Nearest-neighbour resampling with `src = floor(dst * src_dim / dst_dim)`.
pub fn resize_nearest(image: &GrayImage, new_width: usize, new_height: usize) -> Result<GrayImage> {
    if new_width < 2 || new_height < 2 {
        return Err(Error::Dimension(format!(
            "resize target must be at least 2x2, got {new_width}x{new_height}"
        )));
    }
    let cols: Vec<usize> = (0..new_width)
        .map(|c| c * image.width / new_width)
        .collect();
    GrayImage::from_fn(new_width, new_height, image.levels, |r, c| {
        image.get(r * image.height / new_height, cols[c])
    })
}

/// Reduces an image to `target_levels` gray levels with
/// `new = floor(old * target_levels / levels)`.
pub fn quantize(image: &GrayImage, target_levels: usize) -> Result<GrayImage> {
    if target_levels < 2 || target_levels > image.levels {
        return Err(Error::Range(format!(
            "target levels {target_levels} outside [2, {}]",
            image.levels
        )));
    }
    let levels = image.levels;
    let pixels = image
        .pixels
        .iter()
        .map(|&v| (v as usize * target_levels / levels) as u16)
        .collect();
    GrayImage::new(image.width, image.height, target_levels, pixels)
}

/// Resize to `side x side` (when needed) then quantize to `levels`.
pub fn preprocess(image: &GrayImage, side: usize, levels: usize) -> Result<GrayImage> {
    let resized = if image.width == side && image.height == side {
        image.clone()
    } else {
        resize_nearest(image, side, side)?
    };
    if resized.levels == levels {
        Ok(resized)
    } else {
        quantize(&resized, levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn img(w: usize, h: usize, levels: usize, px: &[u16]) -> GrayImage {
        GrayImage::new(w, h, levels, px.to_vec()).unwrap()
    }

    #[test]
    fn reads_small_p5() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 255, 0]);
        let image = read_pgm(&bytes).unwrap();
        assert_eq!(image, img(2, 2, 256, &[0, 255, 255, 0]));
    }

    #[test]
    fn reads_header_comments() {
        let mut bytes = b"P5 # comment\n# another\n2 2 255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4]);
        assert_eq!(read_pgm(&bytes).unwrap().pixels(), &[1, 2, 3, 4]);
    }

    #[test]
    fn rejects_16_bit_maxval() {
        let mut bytes = b"P5\n2 2\n65535\n".to_vec();
        bytes.extend_from_slice(&[0; 8]);
        let err = read_pgm(&bytes).unwrap_err();
        assert!(err.to_string().contains("unsupported maxval"), "{err}");
    }

    #[test]
    fn rejects_truncated_raster() {
        let mut bytes = b"P5\n4 4\n255\n".to_vec();
        bytes.extend_from_slice(&[7; 12]);
        assert!(matches!(
            read_pgm(&bytes),
            Err(Error::Length {
                expected: 16,
                found: 12
            })
        ));
    }

    #[test]
    fn bad_magic_names_token() {
        let err = read_pgm(b"P2\n2 2\n255\n0 0 0 0").unwrap_err();
        assert!(err.to_string().contains("\"P2\""), "{err}");
        let err = read_pgm(b"P5\n2 x\n255\n").unwrap_err();
        assert!(err.to_string().contains("\"x\""), "{err}");
    }

    #[test]
    fn writes_raw_body() {
        let bytes = write_pgm(&img(2, 2, 256, &[0, 1, 2, 3])).unwrap();
        assert_eq!(&bytes[..11], b"P5\n2 2\n255\n");
        assert_eq!(&bytes[11..], &[0, 1, 2, 3]);
    }

    #[test]
    fn one_by_one_is_rejected() {
        assert!(matches!(
            GrayImage::new(1, 1, 256, vec![0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn write_rejects_wide_levels() {
        let image = img(2, 2, 1024, &[0, 1, 2, 1000]);
        assert!(matches!(write_pgm(&image), Err(Error::Unsupported(_))));
    }

    #[test]
    fn low_level_images_survive_pgm_and_quantize() {
        for levels in [2usize, 3, 7, 8, 100, 255] {
            let px: Vec<u16> = (0..16).map(|i| (i % levels) as u16).collect();
            let original = img(4, 4, levels, &px);
            let back = quantize(&read_pgm(&write_pgm(&original).unwrap()).unwrap(), levels).unwrap();
            assert_eq!(back, original, "levels {levels}");
        }
    }

    #[test]
    fn resize_identity_and_halving() {
        let px: Vec<u16> = (0..16).collect();
        let image = img(4, 4, 256, &px);
        assert_eq!(resize_nearest(&image, 4, 4).unwrap(), image);
        let half = resize_nearest(&image, 2, 2).unwrap();
        // rows/cols {0, 2}
        assert_eq!(half.pixels(), &[0, 2, 8, 10]);
        assert!(matches!(resize_nearest(&image, 1, 4), Err(Error::Dimension(_))));
    }

    #[test]
    fn resize_up_then_down_round_trips() {
        let image = img(2, 2, 256, &[9, 8, 7, 6]);
        let up = resize_nearest(&image, 4, 4).unwrap();
        // target 0,1 -> src 0; target 2,3 -> src 1
        assert_eq!(
            up.pixels(),
            &[9, 9, 8, 8, 9, 9, 8, 8, 7, 7, 6, 6, 7, 7, 6, 6]
        );
        assert_eq!(resize_nearest(&up, 2, 2).unwrap(), image);
    }

    #[test]
    fn quantize_examples() {
        let image = img(2, 2, 256, &[255, 128, 0, 31]);
        let q = quantize(&image, 8).unwrap();
        assert_eq!(q.pixels(), &[7, 4, 0, 0]);
        assert_eq!(q.levels(), 8);
        assert_eq!(quantize(&image, 256).unwrap(), image);
        assert!(matches!(quantize(&image, 1), Err(Error::Range(_))));
        assert!(matches!(quantize(&q, 9), Err(Error::Range(_))));
    }

    #[test]
    fn transpose_and_rotate() {
        let image = img(3, 2, 8, &[0, 1, 2, 3, 4, 5]);
        let t = image.transpose();
        assert_eq!((t.width(), t.height()), (2, 3));
        assert_eq!(t.pixels(), &[0, 3, 1, 4, 2, 5]);
        let r = image.rotate90();
        // counter-clockwise: last column becomes first row
        assert_eq!(r.pixels(), &[2, 5, 1, 4, 0, 3]);
        assert_eq!(r.rotate90().rotate90().rotate90(), image);
    }

    fn arb_image() -> impl Strategy<Value = GrayImage> {
        (2usize..12, 2usize..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(0u16..256, w * h)
                .prop_map(move |px| GrayImage::new(w, h, 256, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn pgm_round_trip(image in arb_image()) {
            prop_assert_eq!(read_pgm(&write_pgm(&image).unwrap()).unwrap(), image);
        }

        #[test]
        fn quantize_is_monotone(a in 0u16..256, b in 0u16..256, target in 2usize..=256) {
            let image = GrayImage::new(2, 1 + 1, 256, vec![a, b, 0, 0]).unwrap();
            let q = quantize(&image, target).unwrap();
            prop_assert_eq!(q.len(), image.len());
            if a <= b {
                prop_assert!(q.get(0, 0) <= q.get(0, 1));
            }
        }

        #[test]
        fn resize_only_uses_input_values(image in arb_image(), w in 2usize..20, h in 2usize..20) {
            let out = resize_nearest(&image, w, h).unwrap();
            for p in out.pixels() {
                prop_assert!(image.pixels().contains(p));
            }
        }
    }
}
