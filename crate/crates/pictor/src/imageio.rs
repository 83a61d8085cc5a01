//! PNG encode/decode between files and the core RGB raster type.

use std::io::Cursor;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use image::{ImageFormat, ImageReader, RgbImage};
use pictor_core::RasterImage;

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    let rgb = RgbImage::from_raw(img.width(), img.height(), img.as_bytes().to_vec())
        .ok_or_else(|| anyhow!("raster buffer does not match its dimensions"))?;
    let mut out = Cursor::new(Vec::new());
    rgb.write_to(&mut out, ImageFormat::Png).context("encoding png")?;
    Ok(out.into_inner())
}

pub fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let decoded = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .context("sniffing image format")?
        .decode()
        .context("decoding image")?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    RasterImage::from_raw(w, h, decoded.into_raw())
        .ok_or_else(|| anyhow!("decoded buffer does not match its dimensions"))
}

pub fn save_png(img: &RasterImage, path: &Path) -> Result<()> {
    let bytes = encode_png(img)?;
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn load_png(path: &Path) -> Result<RasterImage> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode_png(&bytes).with_context(|| format!("decoding {}", path.display()))
}

/// Inline `data:` URL form used when attaching images to chat requests.
pub fn to_data_url(img: &RasterImage) -> Result<String> {
    Ok(format!("data:image/png;base64,{}", BASE64.encode(encode_png(img)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pictor_core::color::{BLACK, RED};

    fn sample() -> RasterImage {
        let mut img = RasterImage::new(13, 7);
        img.put(3, 2, RED);
        img.put(12, 6, BLACK);
        img
    }

    #[test]
    fn png_round_trip_preserves_every_pixel() {
        let img = sample();
        let back = decode_png(&encode_png(&img).unwrap()).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let img = sample();
        save_png(&img, &path).unwrap();
        assert_eq!(load_png(&path).unwrap(), img);
    }

    #[test]
    fn data_url_is_decodable() {
        let url = to_data_url(&sample()).unwrap();
        let b64 = url.strip_prefix("data:image/png;base64,").unwrap();
        let bytes = BASE64.decode(b64).unwrap();
        assert_eq!(decode_png(&bytes).unwrap(), sample());
    }

    #[test]
    fn garbage_bytes_are_rejected() {
        assert!(decode_png(b"not a png").is_err());
    }
}
